//! Two-dimensional incompressible Navier–Stokes in the periodic channel
//! with the moving-wall (Couette) boundary conditions.
//!
//! The state is the perturbation about the linear shear, `u = (y, 0) + v`,
//! written as a streamfunction for every streamwise mode `k >= 1`
//! (`v = (psi_y, -psi_x)`) plus an `x`-averaged streamwise velocity `V(y)`
//! for `k = 0`. Pressure never appears:
//!
//! ```text
//! d/dt (D^2 - a^2) psi = -i a y (D^2 - a^2) psi + eps (D^2 - a^2)^2 psi + F   (k >= 1)
//! d/dt V               = <v2 omega> + eps V''                                 (k = 0)
//! ```
//!
//! where `F` is the Fourier coefficient of `v . grad(omega)`. Advection by the
//! base shear and diffusion are implicit (Crank–Nicolson per stage),
//! `F` and `<v2 omega>` are explicit, combined in the low-storage
//! three-stage Runge–Kutta/Crank–Nicolson scheme. With `eps > 0` the walls
//! carry `psi = psi' = 0` and `V = 0`; with `eps = 0` only `psi = 0`.

mod operators;
pub mod perturbation;

use crate::error::{LabError, Result};
use crate::field::{FlowField, ScalarField};
use crate::fourier::XTransform;
use crate::grid::ChannelGrid;
use nalgebra::{DMatrix, DVector, LU};
use num_complex::Complex64;
use operators::WallNormalOps;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Arc;

pub use perturbation::{random_perturbation, PerturbationSpec};

/// Explicit weights of the three stages.
const GAMMA: [f64; 3] = [8.0 / 15.0, 5.0 / 12.0, 3.0 / 4.0];
const ZETA: [f64; 3] = [0.0, -17.0 / 60.0, -5.0 / 12.0];
/// Crank–Nicolson half-weights, `(gamma + zeta) / 2`.
const BETA: [f64; 3] = [4.0 / 15.0, 1.0 / 15.0, 1.0 / 6.0];

/// Largest CFL number accepted under a fixed time step.
pub const CFL_LIMIT: f64 = 1.0;
/// Finest adaptive level, `dt_max / 2^MAX_LEVEL`.
const MAX_LEVEL: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BcMode {
    /// `u1 = 0, 1` and `u2 = 0` at the walls.
    NoSlip,
    /// `u2 = 0` only.
    NonPenetration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DtPolicy {
    Fixed {
        dt: f64,
    },
    /// `dt = dt_max / 2^m` with the smallest `m` keeping the CFL number at
    /// or below `safety`.
    Adaptive {
        safety: f64,
        dt_max: f64,
    },
}

impl Default for DtPolicy {
    fn default() -> Self {
        DtPolicy::Adaptive {
            safety: 0.5,
            dt_max: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub epsilon: f64,
    pub dt: DtPolicy,
    pub dealias: bool,
    pub bc: BcMode,
}

impl SolverParams {
    /// Picks the wall condition from `epsilon`: no-slip when viscous,
    /// non-penetration when `epsilon == 0`.
    pub fn new(epsilon: f64, dt: DtPolicy, dealias: bool) -> Self {
        let bc = if epsilon == 0.0 {
            BcMode::NonPenetration
        } else {
            BcMode::NoSlip
        };
        SolverParams {
            epsilon,
            dt,
            dealias,
            bc,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(LabError::InvalidParameter(format!(
                "epsilon must be >= 0, got {}",
                self.epsilon
            )));
        }
        match (self.epsilon == 0.0, self.bc) {
            (true, BcMode::NoSlip) => {
                return Err(LabError::InvalidParameter(
                    "epsilon = 0 requires the non-penetration wall condition".into(),
                ))
            }
            (false, BcMode::NonPenetration) => {
                return Err(LabError::InvalidParameter(
                    "epsilon > 0 requires the no-slip wall condition".into(),
                ))
            }
            _ => {}
        }
        match self.dt {
            DtPolicy::Fixed { dt } if !(dt > 0.0 && dt.is_finite()) => Err(
                LabError::InvalidParameter(format!("fixed dt must be > 0, got {dt}")),
            ),
            DtPolicy::Adaptive { safety, dt_max }
                if !(safety > 0.0 && safety <= CFL_LIMIT && dt_max > 0.0 && dt_max.is_finite()) =>
            {
                Err(LabError::InvalidParameter(format!(
                    "adaptive dt needs 0 < safety <= {CFL_LIMIT} and dt_max > 0"
                )))
            }
            _ => Ok(()),
        }
    }

    fn no_slip(&self) -> bool {
        self.bc == BcMode::NoSlip
    }
}

/// Snapshot of a run: full velocity (base shear included) at time `t`.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub t: f64,
    pub u: FlowField,
    pub steps: u64,
    pub dt: f64,
}

impl SolverState {
    pub fn new(u: FlowField) -> Self {
        SolverState {
            t: 0.0,
            u,
            steps: 0,
            dt: 0.0,
        }
    }
}

/// What one call to [`Solver::step`] did.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub dt: f64,
    pub cfl: f64,
}

/// Per-`dt` factorized implicit operators.
struct ImplicitSet {
    /// `[mode][stage]`.
    modes: Vec<[LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>; 3]>,
    /// Viscous mean-flow operators per stage.
    mean: Option<[LU<f64, nalgebra::Dyn, nalgebra::Dyn>; 3]>,
}

/// Time integrator holding the spectral state.
pub struct Solver {
    grid: Arc<ChannelGrid>,
    params: SolverParams,
    ops: WallNormalOps,
    xt: XTransform,
    /// Streamwise wavenumbers of modes `1..=kmax` (index `k - 1`).
    alphas: Vec<f64>,
    /// `Ny x 2 kmax` packed real/imaginary streamfunction coefficients.
    psi: DMatrix<f64>,
    /// `x`-averaged perturbation velocity.
    mean: DVector<f64>,
    t: f64,
    steps: u64,
    dt: f64,
    level: u32,
    implicit: HashMap<u64, Arc<ImplicitSet>>,
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver")
            .field("t", &self.t)
            .field("steps", &self.steps)
            .field("dt", &self.dt)
            .field("kmax", &self.alphas.len())
            .finish()
    }
}

#[inline]
fn cget(m: &DMatrix<f64>, r: usize, k: usize) -> Complex64 {
    Complex64::new(m[(r, 2 * k)], m[(r, 2 * k + 1)])
}

#[inline]
fn cset(m: &mut DMatrix<f64>, r: usize, k: usize, v: Complex64) {
    m[(r, 2 * k)] = v.re;
    m[(r, 2 * k + 1)] = v.im;
}

impl Solver {
    /// Builds a solver from a full velocity field. The streamfunction of
    /// every mode `k >= 1` is recovered from `u2`, the mean flow from the
    /// `x`-average of `u1 - y`; `u` is assumed solenoidal.
    pub fn new(state: &SolverState, params: SolverParams) -> Result<Self> {
        params.validate()?;
        let grid = Arc::clone(state.u.grid());
        if !state.u.is_finite() {
            return Err(LabError::NonFinite("initial velocity".into()));
        }
        let (nx, ny) = (grid.nx(), grid.ny());
        let kmax = if params.dealias {
            (nx - 1) / 3
        } else {
            nx / 2 - 1
        };
        let alphas: Vec<f64> = (1..=kmax).map(|k| grid.wavenumber(k)).collect();
        let ops = WallNormalOps::new(ny, params.dealias);
        let xt = XTransform::new(nx);

        let mut psi = DMatrix::zeros(ny, 2 * kmax);
        let mut mean = DVector::zeros(ny);
        let mut coeffs = vec![Complex64::default(); xt.modes()];
        let mut buf = Vec::new();
        for j in 0..ny {
            let y = grid.y()[j];
            let row: Vec<f64> = state.u.u1.row(j).iter().map(|v| v - y).collect();
            xt.forward(&row, &mut coeffs, &mut buf);
            mean[j] = coeffs[0].re;
            if j == 0 || j == ny - 1 {
                continue;
            }
            xt.forward(state.u.u2.row(j), &mut coeffs, &mut buf);
            for k in 1..=kmax {
                // u2_k = -i a psi_k
                let p = coeffs[k] * Complex64::new(0.0, 1.0 / alphas[k - 1]);
                cset(&mut psi, j, k - 1, p);
            }
        }
        if params.no_slip() {
            mean[0] = 0.0;
            mean[ny - 1] = 0.0;
        }

        let mut solver = Solver {
            grid,
            params,
            ops,
            xt,
            alphas,
            psi,
            mean,
            t: state.t,
            steps: state.steps,
            dt: 0.0,
            level: 0,
            implicit: HashMap::new(),
        };
        solver.dt = match params.dt {
            DtPolicy::Fixed { dt } => dt,
            DtPolicy::Adaptive { dt_max, .. } => dt_max,
        };
        Ok(solver)
    }

    pub fn grid(&self) -> &Arc<ChannelGrid> {
        &self.grid
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of retained streamwise modes `k >= 1`.
    pub fn kmax(&self) -> usize {
        self.alphas.len()
    }

    /// Current full velocity on the grid.
    pub fn velocity(&self) -> FlowField {
        let g = &self.grid;
        let (nx, ny) = (g.nx(), g.ny());
        let d1psi = &self.ops.d[1] * &self.psi;
        let mut u1 = vec![0.0; g.len()];
        let mut u2 = vec![0.0; g.len()];
        let mut c1 = vec![Complex64::default(); self.kmax() + 1];
        let mut c2 = vec![Complex64::default(); self.kmax() + 1];
        let mut buf = Vec::new();
        for j in 0..ny {
            c1[0] = Complex64::new(self.mean[j], 0.0);
            c2[0] = Complex64::default();
            for k in 1..=self.kmax() {
                let a = self.alphas[k - 1];
                c1[k] = cget(&d1psi, j, k - 1);
                c2[k] = cget(&self.psi, j, k - 1) * Complex64::new(0.0, -a);
            }
            self.xt
                .inverse(&c1, &mut u1[j * nx..(j + 1) * nx], &mut buf);
            self.xt
                .inverse(&c2, &mut u2[j * nx..(j + 1) * nx], &mut buf);
            let y = g.y()[j];
            for v in &mut u1[j * nx..(j + 1) * nx] {
                *v += y;
            }
        }
        if self.params.no_slip() {
            // the collocation solve leaves O(1e-16) residue at the walls
            for i in 0..nx {
                u1[i] = 0.0;
                u1[(ny - 1) * nx + i] = 1.0;
            }
        }
        for i in 0..nx {
            u2[i] = 0.0;
            u2[(ny - 1) * nx + i] = 0.0;
        }
        FlowField {
            u1: ScalarField::from_values(g, u1).expect("finite state"),
            u2: ScalarField::from_values(g, u2).expect("finite state"),
        }
    }

    pub fn state(&self) -> SolverState {
        SolverState {
            t: self.t,
            u: self.velocity(),
            steps: self.steps,
            dt: self.dt,
        }
    }

    /// Explicit terms at the solver nodes: packed `F_k` for `k >= 1`, the
    /// mean forcing `<v2 omega>`, and the advective CFL rate
    /// `max(|v1|/dx + |v2|/dy)`.
    fn explicit_terms(
        &self,
        psi: &DMatrix<f64>,
        mean: &DVector<f64>,
    ) -> (DMatrix<f64>, DVector<f64>, f64) {
        let kmax = self.kmax();
        let nx = self.grid.nx();
        let my = self.ops.fine_len();
        let p0 = &self.ops.to_fine[0] * psi;
        let p1 = &self.ops.to_fine[1] * psi;
        let p2 = &self.ops.to_fine[2] * psi;
        let p3 = &self.ops.to_fine[3] * psi;
        let m0 = &self.ops.to_fine[0] * mean;
        let m1 = &self.ops.to_fine[1] * mean;
        let m2 = &self.ops.to_fine[2] * mean;

        let mut nf = DMatrix::<f64>::zeros(my, 2 * kmax);
        let mut qf = DVector::<f64>::zeros(my);
        let zero = Complex64::default();
        let mut cv1 = vec![zero; kmax + 1];
        let mut cv2 = vec![zero; kmax + 1];
        let mut cw = vec![zero; kmax + 1];
        let mut cwx = vec![zero; kmax + 1];
        let mut cwy = vec![zero; kmax + 1];
        let mut v1 = vec![0.0; nx];
        let mut v2 = vec![0.0; nx];
        let mut w = vec![0.0; nx];
        let mut wx = vec![0.0; nx];
        let mut wy = vec![0.0; nx];
        let mut prod = vec![0.0; nx];
        let mut out = vec![zero; self.xt.modes()];
        let mut buf = Vec::with_capacity(nx);
        let dx = self.grid.lx() / nx as f64;
        let mut rate: f64 = 0.0;

        for j in 0..my {
            cv1[0] = Complex64::new(m0[j], 0.0);
            cv2[0] = zero;
            cw[0] = Complex64::new(-m1[j], 0.0);
            cwx[0] = zero;
            cwy[0] = Complex64::new(-m2[j], 0.0);
            for k in 1..=kmax {
                let a = self.alphas[k - 1];
                let ia = Complex64::new(0.0, a);
                let s0 = cget(&p0, j, k - 1);
                let s1 = cget(&p1, j, k - 1);
                let s2 = cget(&p2, j, k - 1);
                let s3 = cget(&p3, j, k - 1);
                let om = -(s2 - s0 * (a * a));
                cv1[k] = s1;
                cv2[k] = -ia * s0;
                cw[k] = om;
                cwx[k] = ia * om;
                cwy[k] = -(s3 - s1 * (a * a));
            }
            self.xt.inverse(&cv1, &mut v1, &mut buf);
            self.xt.inverse(&cv2, &mut v2, &mut buf);
            self.xt.inverse(&cw, &mut w, &mut buf);
            self.xt.inverse(&cwx, &mut wx, &mut buf);
            self.xt.inverse(&cwy, &mut wy, &mut buf);

            let dy = self.ops.fine_dy[j];
            for i in 0..nx {
                rate = rate.max(v1[i].abs() / dx + v2[i].abs() / dy);
                prod[i] = v1[i] * wx[i] + v2[i] * wy[i];
            }
            self.xt.forward(&prod, &mut out, &mut buf);
            for k in 1..=kmax {
                cset(&mut nf, j, k - 1, out[k]);
            }
            for i in 0..nx {
                prod[i] = v2[i] * w[i];
            }
            self.xt.forward(&prod, &mut out, &mut buf);
            qf[j] = out[0].re;
        }
        let f = &self.ops.from_fine * nf;
        let q = &self.ops.from_fine * qf;
        (f, q, rate)
    }

    fn implicit_set(&mut self, dt: f64) -> Result<Arc<ImplicitSet>> {
        let key = dt.to_bits();
        if let Some(s) = self.implicit.get(&key) {
            return Ok(Arc::clone(s));
        }
        let set = Arc::new(self.build_implicit(dt)?);
        if self.implicit.len() > 4 {
            self.implicit.clear();
        }
        self.implicit.insert(key, Arc::clone(&set));
        Ok(set)
    }

    fn build_implicit(&self, dt: f64) -> Result<ImplicitSet> {
        let ny = self.grid.ny();
        let n = ny - 1;
        let eps = self.params.epsilon;
        let d = &self.ops.d;
        let y = self.grid.y();
        let no_slip = self.params.no_slip();
        let m = n - 1;

        let build_mode = |a: f64| -> Result<[LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>; 3]> {
            let a2 = a * a;
            // operators on interior columns, all rows
            let cols = |mat: &DMatrix<f64>| mat.columns(1, m).into_owned();
            let d2 = cols(&d[2]);
            let d4 = cols(&d[4]);
            let id = cols(&DMatrix::identity(ny, ny));
            let lap = &d2 - &id * a2;
            let bilap = &d4 - &d2 * (2.0 * a2) + &id * (a2 * a2);
            let stage = |beta: f64| -> Result<LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>> {
                let h = beta * dt;
                let mut mat = DMatrix::<Complex64>::zeros(m, m);
                if no_slip {
                    for c in 0..m {
                        mat[(0, c)] = Complex64::new(d[1][(0, c + 1)], 0.0);
                        mat[(m - 1, c)] = Complex64::new(d[1][(n, c + 1)], 0.0);
                    }
                    for (r, row) in (2..=n - 2).enumerate() {
                        for c in 0..m {
                            let l = lap[(row, c)];
                            let lam = Complex64::new(eps * bilap[(row, c)], -a * y[row] * l);
                            mat[(r + 1, c)] = Complex64::new(l, 0.0) - lam * h;
                        }
                    }
                } else {
                    for (r, row) in (1..=n - 1).enumerate() {
                        for c in 0..m {
                            let l = lap[(row, c)];
                            let lam = Complex64::new(0.0, -a * y[row] * l);
                            mat[(r, c)] = Complex64::new(l, 0.0) - lam * h;
                        }
                    }
                }
                let lu = mat.lu();
                if !lu.is_invertible() {
                    return Err(LabError::Singular(format!(
                        "implicit operator at alpha = {a}"
                    )));
                }
                Ok(lu)
            };
            Ok([stage(BETA[0])?, stage(BETA[1])?, stage(BETA[2])?])
        };

        let modes = self
            .alphas
            .iter()
            .map(|&a| build_mode(a))
            .collect::<Result<Vec<_>>>()?;

        let mean = if no_slip {
            let d2 = d[2].view((1, 1), (m, m)).into_owned();
            let stage = |beta: f64| {
                let mat = DMatrix::<f64>::identity(m, m) - &d2 * (beta * dt * eps);
                mat.lu()
            };
            Some([stage(BETA[0]), stage(BETA[1]), stage(BETA[2])])
        } else {
            None
        };
        Ok(ImplicitSet { modes, mean })
    }

    fn choose_dt(&mut self, rate: f64) -> Result<f64> {
        match self.params.dt {
            DtPolicy::Fixed { dt } => {
                let cfl = dt * rate;
                if cfl > CFL_LIMIT {
                    return Err(LabError::Cfl {
                        dt,
                        cfl,
                        suggested: 0.5 * CFL_LIMIT / rate,
                    });
                }
                Ok(dt)
            }
            DtPolicy::Adaptive { safety, dt_max } => {
                let level_dt = |l: u32| dt_max / 2f64.powi(l as i32);
                let mut level = self.level;
                while level < MAX_LEVEL && level_dt(level) * rate > safety {
                    level += 1;
                }
                // grow back only with some margin, to avoid refactorizing
                while level > 0 && level_dt(level - 1) * rate <= 0.8 * safety {
                    level -= 1;
                }
                if level_dt(level) * rate > CFL_LIMIT {
                    return Err(LabError::Cfl {
                        dt: level_dt(level),
                        cfl: level_dt(level) * rate,
                        suggested: safety / rate,
                    });
                }
                self.level = level;
                Ok(level_dt(level))
            }
        }
    }

    /// Advances one full three-stage step.
    pub fn step(&mut self) -> Result<StepInfo> {
        self.step_capped(f64::INFINITY)
    }

    /// Steps until `target`, shortening the last step so the solver lands
    /// on it exactly.
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        let tol = 1e-9 * target.abs().max(1.0);
        while self.t < target - tol {
            self.step_capped(target - self.t)?;
        }
        if (self.t - target).abs() <= tol {
            self.t = target;
        }
        Ok(())
    }

    fn step_capped(&mut self, cap: f64) -> Result<StepInfo> {
        let ny = self.grid.ny();
        let n = ny - 1;
        let m = n - 1;
        let eps = self.params.epsilon;
        let no_slip = self.params.no_slip();
        let y: Vec<f64> = self.grid.y().to_vec();

        let mut psi = self.psi.clone();
        let mut mean = self.mean.clone();
        let mut f_prev = DMatrix::<f64>::zeros(ny, 2 * self.kmax());
        let mut q_prev = DVector::<f64>::zeros(ny);
        let mut dt = self.dt;
        let mut cfl = 0.0;
        let mut set: Option<Arc<ImplicitSet>> = None;

        for s in 0..3 {
            let (f, q, rate) = self.explicit_terms(&psi, &mean);
            if s == 0 {
                dt = self.choose_dt(rate)?;
                // a cap within rounding of the chosen step keeps the cached operators
                if cap < dt * (1.0 - 1e-9) {
                    dt = cap;
                }
                cfl = dt * rate;
                set = Some(self.implicit_set(dt)?);
            }
            let set = set.as_ref().expect("set on first stage");
            let (g, z, b) = (GAMMA[s], ZETA[s], BETA[s]);
            let h = b * dt;

            let d2psi = &self.ops.d[2] * &psi;
            let d4psi = if no_slip {
                Some(&self.ops.d[4] * &psi)
            } else {
                None
            };
            let mut next = DMatrix::<f64>::zeros(ny, 2 * self.kmax());
            let mut rhs = DVector::<Complex64>::zeros(m);
            for k in 0..self.kmax() {
                let a = self.alphas[k];
                let a2 = a * a;
                let fill = |row: usize| -> Complex64 {
                    let p = cget(&psi, row, k);
                    let lap = cget(&d2psi, row, k) - p * a2;
                    let mut lam = Complex64::new(0.0, -a * y[row]) * lap;
                    if let Some(d4) = &d4psi {
                        let bilap =
                            cget(d4, row, k) - cget(&d2psi, row, k) * (2.0 * a2) + p * (a2 * a2);
                        lam += bilap * eps;
                    }
                    lap + lam * h + (cget(&f, row, k) * g + cget(&f_prev, row, k) * z) * dt
                };
                if no_slip {
                    rhs[0] = Complex64::default();
                    rhs[m - 1] = Complex64::default();
                    for (r, row) in (2..=n - 2).enumerate() {
                        rhs[r + 1] = fill(row);
                    }
                } else {
                    for (r, row) in (1..=n - 1).enumerate() {
                        rhs[r] = fill(row);
                    }
                }
                if !set.modes[k][s].solve_mut(&mut rhs) {
                    return Err(LabError::Singular(format!(
                        "implicit solve, mode {}",
                        k + 1
                    )));
                }
                for r in 0..m {
                    cset(&mut next, r + 1, k, rhs[r]);
                }
            }

            let mut next_mean = DVector::<f64>::zeros(ny);
            if let Some(mean_ops) = &set.mean {
                let d2v = &self.ops.d[2] * &mean;
                let mut r = DVector::<f64>::from_iterator(
                    m,
                    (1..=m).map(|j| mean[j] + h * eps * d2v[j] + dt * (g * q[j] + z * q_prev[j])),
                );
                if !mean_ops[s].solve_mut(&mut r) {
                    return Err(LabError::Singular("mean-flow implicit solve".into()));
                }
                next_mean.rows_mut(1, m).copy_from(&r);
            } else {
                for j in 0..ny {
                    next_mean[j] = mean[j] + dt * (g * q[j] + z * q_prev[j]);
                }
            }
            psi = next;
            mean = next_mean;
            f_prev = f;
            q_prev = q;
        }

        if psi.iter().chain(mean.iter()).any(|v| !v.is_finite()) {
            return Err(LabError::BlowUp { t: self.t + dt });
        }
        self.psi = psi;
        self.mean = mean;
        self.t += dt;
        self.steps += 1;
        self.dt = dt;
        Ok(StepInfo { dt, cfl })
    }
}

/// Advances `s` by one step, re-deriving the spectral state from the
/// velocity field. Convenient for tests; runs should keep a [`Solver`].
pub fn step(s: &SolverState, p: &SolverParams) -> Result<SolverState> {
    let mut solver = Solver::new(s, *p)?;
    solver.step()?;
    Ok(solver.state())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::l2_norm;
    use crate::grid::make_grid;

    #[test]
    fn params_validation() {
        assert_eq!(
            SolverParams::new(0.0, DtPolicy::default(), true).bc,
            BcMode::NonPenetration
        );
        assert_eq!(
            SolverParams::new(1e-4, DtPolicy::default(), true).bc,
            BcMode::NoSlip
        );
        let mut p = SolverParams::new(1e-4, DtPolicy::default(), true);
        p.bc = BcMode::NonPenetration;
        assert!(p.validate().is_err());
        assert!(SolverParams::new(-1.0, DtPolicy::default(), true)
            .validate()
            .is_err());
        assert!(SolverParams::new(1e-4, DtPolicy::Fixed { dt: 0.0 }, true)
            .validate()
            .is_err());
    }

    #[test]
    fn couette_is_steady() {
        let g = make_grid(2.0, 16, 17).unwrap();
        let s = SolverState::new(FlowField::couette(&g));
        let p = SolverParams::new(1e-3, DtPolicy::Fixed { dt: 0.05 }, true);
        let mut solver = Solver::new(&s, p).unwrap();
        for _ in 0..5 {
            solver.step().unwrap();
        }
        let dev = &solver.velocity() - &FlowField::couette(&g);
        assert!(l2_norm(&dev) < 1e-14);
        assert!((solver.time() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn fixed_dt_cfl_violation_suggests_smaller_step() {
        let g = make_grid(2.0, 16, 17).unwrap();
        let mut u = FlowField::couette(&g);
        // uniform streamwise perturbation in the interior
        for j in 1..16 {
            for i in 0..16 {
                u.u1.values_mut()[j * 16 + i] += 0.5;
            }
        }
        let p = SolverParams::new(1e-3, DtPolicy::Fixed { dt: 1.0 }, true);
        let mut solver = Solver::new(&SolverState::new(u), p).unwrap();
        match solver.step() {
            Err(LabError::Cfl { suggested, .. }) => assert!(suggested < 1.0),
            other => panic!("expected CFL error, got {other:?}"),
        }
    }

    #[test]
    fn velocity_round_trips_through_spectral_state() {
        let g = make_grid(2.0, 32, 33).unwrap();
        let mut spec = PerturbationSpec::new(0.01, 11);
        spec.max_kx = 4;
        spec.max_ky = 4;
        let pert = random_perturbation(&spec, &g).unwrap();
        let u = &FlowField::couette(&g) + &pert;
        let p = SolverParams::new(1e-4, DtPolicy::default(), true);
        let solver = Solver::new(&SolverState::new(u.clone()), p).unwrap();
        let back = solver.velocity();
        assert!(l2_norm(&(&back - &u)) < 1e-12);
    }
}
