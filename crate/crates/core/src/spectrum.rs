//! Temporal normal-mode spectra of wall-bounded shear profiles.
//!
//! Perturbation streamfunction `phi(y) exp(i alpha (x - c t))`:
//!
//! * Rayleigh: `(U - c)(phi'' - alpha^2 phi) = U'' phi`, `phi = 0` at walls.
//! * Orr–Sommerfeld: `(U - c)(phi'' - alpha^2 phi) - U'' phi =
//!   (i alpha R)^-1 (phi'''' - 2 alpha^2 phi'' + alpha^4 phi)`,
//!   `phi = phi' = 0` at walls.
//!
//! Both are discretized by Chebyshev collocation on the interior nodes with
//! the wall conditions built into the basis, so the mass operator
//! `phi'' - alpha^2 phi` is nonsingular and the problem reduces to a
//! standard eigenproblem without infinite modes. The temporal growth rate is
//! `alpha * Im(c)`.
//!
//! Every solve is done at `Ny` and `2 Ny - 1` nodes; only eigenvalues with a
//! partner at the other resolution survive (see [`filter_spurious`]).

use crate::cheb;
use crate::error::{LabError, Result};
use crate::shear::{DriftState, ShearProfile};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default absolute tolerance on `c` for the resolution-pair filter.
pub const FILTER_TOL: f64 = 1e-6;

/// Base flows the eigen-solvers know how to sample at any resolution.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseProfile {
    Couette,
    Oscillatory(ShearProfile),
    Drifted(DriftState),
    /// Values of `U` on the Chebyshev nodes of some resolution; `U''` is
    /// obtained by collocation differentiation and resampling uses
    /// polynomial interpolation.
    Tabulated(Vec<f64>),
}

impl BaseProfile {
    /// Samples `U` and `U''` on the `ny` Chebyshev nodes.
    pub fn sample(&self, ny: usize) -> ProfileSample {
        let y = cheb::nodes(ny - 1);
        let (u, upp): (Vec<f64>, Vec<f64>) = match self {
            BaseProfile::Couette => (y.clone(), vec![0.0; ny]),
            BaseProfile::Oscillatory(p) => y
                .iter()
                .map(|&t| (p.velocity(t), p.velocity_dyy(t)))
                .unzip(),
            BaseProfile::Drifted(d) => {
                let a = d.amplitude();
                let k = d.profile.wavenumber();
                y.iter()
                    .map(|&t| (t + a * (k * t).sin(), -a * k * k * (k * t).sin()))
                    .unzip()
            }
            BaseProfile::Tabulated(values) => {
                let src_n = values.len() - 1;
                let interp = cheb::interpolation_matrix(src_n, &y);
                let src = DVector::from_column_slice(values);
                let d = cheb::diff_matrix(src_n);
                let d2src = &d * (&d * &src);
                let u = &interp * &src;
                let upp = &interp * d2src;
                (u.iter().copied().collect(), upp.iter().copied().collect())
            }
        };
        ProfileSample { y, u, upp }
    }
}

/// `U` and `U''` on the Chebyshev nodes used by one eigen-solve.
#[derive(Debug, Clone)]
pub struct ProfileSample {
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub upp: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Rayleigh,
    OrrSommerfeld,
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProblemKind::Rayleigh => write!(f, "rayleigh"),
            ProblemKind::OrrSommerfeld => write!(f, "orr-sommerfeld"),
        }
    }
}

/// Converged part of a spectrum.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub kind: ProblemKind,
    pub alpha: f64,
    pub reynolds: Option<f64>,
    /// Retained phase speeds (fine-resolution values), sorted by descending
    /// imaginary part.
    pub eigenvalues: Vec<Complex64>,
    /// Coarse-resolution partner of each retained eigenvalue.
    pub partners: Vec<Complex64>,
    /// Eigenfunctions `phi` on the fine nodes, walls included.
    pub eigenfunctions: Vec<DVector<Complex64>>,
    /// Normwise backward error `||A phi - c B phi|| / ((||A|| + |c| ||B||) ||phi||)`.
    pub residuals: Vec<f64>,
    /// `(Ny, 2 Ny - 1)`.
    pub resolution: (usize, usize),
    /// Coarse-resolution eigenvalues without a fine partner.
    pub spurious: Vec<Complex64>,
    /// Set when nothing survived the filter.
    pub diagnostic: Option<String>,
}

impl SpectrumResult {
    pub fn growth_rates(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|c| self.alpha * c.im).collect()
    }

    /// Largest temporal growth rate `alpha Im(c)` among retained modes.
    pub fn leading_growth_rate(&self) -> Option<f64> {
        self.eigenvalues.first().map(|c| self.alpha * c.im)
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

/// Output of the resolution-pair filter.
#[derive(Debug, Clone, Default)]
pub struct FilterOutcome {
    /// `(low, high)` index pairs of matched eigenvalues.
    pub retained: Vec<(usize, usize)>,
    /// Indices into `low` without a partner.
    pub spurious: Vec<usize>,
}

/// Keeps eigenvalues of `low` that have a partner in `high` within `tol`
/// (absolute distance in the complex `c` plane).
pub fn filter_spurious(low: &[Complex64], high: &[Complex64], tol: f64) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for (i, a) in low.iter().enumerate() {
        let best = high
            .iter()
            .enumerate()
            .map(|(j, b)| (j, (a - b).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1));
        match best {
            Some((j, d)) if d <= tol => out.retained.push((i, j)),
            _ => out.spurious.push(i),
        }
    }
    out
}

/// Raw (unfiltered) discrete problem `A phi = c B phi` on interior unknowns.
struct Discretization {
    a: DMatrix<Complex64>,
    b: DMatrix<Complex64>,
    /// Maps interior unknowns to nodal values of `phi` on all nodes.
    to_nodes: DMatrix<f64>,
}

fn rayleigh_operators(s: &ProfileSample, alpha: f64) -> Discretization {
    let n = s.y.len() - 1;
    let d = cheb::derivative_powers(n, 2);
    let m = n - 1;
    let d2 = d[2].view((1, 1), (m, m)).into_owned();
    let b = d2 - DMatrix::<f64>::identity(m, m) * (alpha * alpha);
    let mut a = b.clone();
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] *= s.u[i + 1];
        }
        a[(i, i)] -= s.upp[i + 1];
    }
    let mut to_nodes = DMatrix::zeros(n + 1, m);
    for i in 0..m {
        to_nodes[(i + 1, i)] = 1.0;
    }
    Discretization {
        a: a.map(|v| Complex64::new(v, 0.0)),
        b: b.map(|v| Complex64::new(v, 0.0)),
        to_nodes,
    }
}

fn orr_sommerfeld_operators(s: &ProfileSample, alpha: f64, reynolds: f64) -> Discretization {
    let n = s.y.len() - 1;
    let c = cheb::clamped_derivatives(n, 4);
    let m = n - 1;
    let rows = |k: usize| c[k].rows(1, m).into_owned();
    let d2 = rows(2);
    let d4 = rows(4);
    let eye = DMatrix::<f64>::identity(m, m);
    let a2 = alpha * alpha;
    let b = &d2 - &eye * a2;
    let bilap = &d4 - &d2 * (2.0 * a2) + &eye * (a2 * a2);
    // 1 / (i alpha R) = -i / (alpha R)
    let visc = Complex64::new(0.0, -1.0 / (alpha * reynolds));
    let mut a = DMatrix::<Complex64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            a[(i, j)] = Complex64::new(s.u[i + 1] * b[(i, j)], 0.0) - visc * bilap[(i, j)];
        }
        a[(i, i)] -= s.upp[i + 1];
    }
    Discretization {
        a,
        b: b.map(|v| Complex64::new(v, 0.0)),
        to_nodes: c[0].clone(),
    }
}

/// Eigenpairs of `B^-1 A` via a complex Schur decomposition.
fn solve_standard(
    disc: &Discretization,
    want_vectors: bool,
) -> Result<(
    Vec<Complex64>,
    Option<(DMatrix<Complex64>, DMatrix<Complex64>)>,
)> {
    let m = disc.b.nrows();
    let lu = disc.b.clone().lu();
    if !lu.is_invertible() {
        return Err(LabError::Singular("mass operator is not invertible".into()));
    }
    let op = lu
        .solve(&disc.a)
        .ok_or_else(|| LabError::Singular("mass operator solve failed".into()))?;
    if op.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(LabError::Singular("non-finite operator entries".into()));
    }
    let schur = op
        .try_schur(f64::EPSILON, 200 * m.max(10))
        .ok_or_else(|| LabError::EigenFailure(format!("Schur iteration, size {m}")))?;
    let (q, t) = schur.unpack();
    let values: Vec<Complex64> = (0..m).map(|i| t[(i, i)]).collect();
    Ok((values, want_vectors.then_some((q, t))))
}

/// Eigenvector of the upper-triangular `t` for its `k`-th diagonal entry,
/// rotated back with `q`.
fn schur_eigenvector(
    q: &DMatrix<Complex64>,
    t: &DMatrix<Complex64>,
    k: usize,
) -> DVector<Complex64> {
    let lambda = t[(k, k)];
    let scale = t.iter().fold(0.0f64, |m, v| m.max(v.norm())).max(1.0);
    let floor = f64::EPSILON * scale;
    let mut x = DVector::<Complex64>::zeros(t.nrows());
    x[k] = Complex64::new(1.0, 0.0);
    for i in (0..k).rev() {
        let mut s = t[(i, k)];
        for j in i + 1..k {
            s += t[(i, j)] * x[j];
        }
        let mut d = t[(i, i)] - lambda;
        if d.norm() < floor {
            d = Complex64::new(floor, 0.0);
        }
        x[i] = -s / d;
    }
    let v = q * x;
    let nrm = v.norm();
    v / Complex64::new(nrm, 0.0)
}

fn backward_error(disc: &Discretization, c: Complex64, phi: &DVector<Complex64>) -> f64 {
    let r = &disc.a * phi - (&disc.b * phi) * c;
    let na = disc.a.norm();
    let nb = disc.b.norm();
    r.norm() / ((na + c.norm() * nb) * phi.norm())
}

fn solve_pair(
    kind: ProblemKind,
    profile: &BaseProfile,
    alpha: f64,
    reynolds: Option<f64>,
    ny: usize,
    tol: f64,
) -> Result<SpectrumResult> {
    let ny_fine = 2 * ny - 1;
    let build = |n: usize| -> Discretization {
        let s = profile.sample(n);
        match (kind, reynolds) {
            (ProblemKind::OrrSommerfeld, Some(r)) => orr_sommerfeld_operators(&s, alpha, r),
            _ => rayleigh_operators(&s, alpha),
        }
    };
    let coarse = build(ny);
    let fine = build(ny_fine);
    let (low, _) = solve_standard(&coarse, false)?;
    let (high, vecs) = solve_standard(&fine, true)?;
    let (q, t) = vecs.expect("vectors requested");

    let filt = filter_spurious(&low, &high, tol);
    let mut fine_used: Vec<(usize, usize)> = Vec::new();
    for &(i, j) in &filt.retained {
        if !fine_used.iter().any(|&(_, jj)| jj == j) {
            fine_used.push((i, j));
        }
    }
    fine_used.sort_by(|a, b| high[b.1].im.total_cmp(&high[a.1].im));

    let mut result = SpectrumResult {
        kind,
        alpha,
        reynolds,
        eigenvalues: Vec::with_capacity(fine_used.len()),
        partners: Vec::with_capacity(fine_used.len()),
        eigenfunctions: Vec::with_capacity(fine_used.len()),
        residuals: Vec::with_capacity(fine_used.len()),
        resolution: (ny, ny_fine),
        spurious: filt.spurious.iter().map(|&i| low[i]).collect(),
        diagnostic: None,
    };
    let to_nodes = fine.to_nodes.map(|v| Complex64::new(v, 0.0));
    for (i, j) in fine_used {
        let c = high[j];
        let v = schur_eigenvector(&q, &t, j);
        result.residuals.push(backward_error(&fine, c, &v));
        result.eigenfunctions.push(&to_nodes * v);
        result.eigenvalues.push(c);
        result.partners.push(low[i]);
    }
    if result.eigenvalues.is_empty() {
        result.diagnostic = Some(format!(
            "no eigenvalue converged between Ny={ny} and Ny={ny_fine} within {tol:e}"
        ));
    }
    Ok(result)
}

/// Inviscid spectrum of `profile` at streamwise wavenumber `alpha`.
pub fn rayleigh_spectrum(profile: &BaseProfile, alpha: f64, ny: usize) -> Result<SpectrumResult> {
    rayleigh_spectrum_with_tol(profile, alpha, ny, FILTER_TOL)
}

pub fn rayleigh_spectrum_with_tol(
    profile: &BaseProfile,
    alpha: f64,
    ny: usize,
    tol: f64,
) -> Result<SpectrumResult> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "alpha must be > 0, got {alpha}"
        )));
    }
    if ny < 33 {
        return Err(LabError::InvalidParameter(format!(
            "Rayleigh needs Ny >= 33, got {ny}"
        )));
    }
    solve_pair(ProblemKind::Rayleigh, profile, alpha, None, ny, tol)
}

/// Viscous spectrum at Reynolds number `reynolds`.
pub fn orr_sommerfeld_spectrum(
    profile: &BaseProfile,
    alpha: f64,
    reynolds: f64,
    ny: usize,
) -> Result<SpectrumResult> {
    orr_sommerfeld_spectrum_with_tol(profile, alpha, reynolds, ny, FILTER_TOL)
}

pub fn orr_sommerfeld_spectrum_with_tol(
    profile: &BaseProfile,
    alpha: f64,
    reynolds: f64,
    ny: usize,
    tol: f64,
) -> Result<SpectrumResult> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "alpha must be > 0, got {alpha}"
        )));
    }
    if !(reynolds > 0.0 && reynolds.is_finite()) {
        return Err(LabError::InvalidParameter(format!(
            "R must be > 0, got {reynolds}"
        )));
    }
    if ny < 65 {
        return Err(LabError::InvalidParameter(format!(
            "Orr-Sommerfeld needs Ny >= 65, got {ny}"
        )));
    }
    solve_pair(
        ProblemKind::OrrSommerfeld,
        profile,
        alpha,
        Some(reynolds),
        ny,
        tol,
    )
}

/// One row of an `alpha` scan.
#[derive(Debug, Clone)]
pub struct ScanEntry {
    pub alpha: f64,
    /// Leading growth rate; `None` when nothing converged.
    pub max_growth: Option<f64>,
    pub result: Option<SpectrumResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct AlphaScan {
    pub entries: Vec<ScanEntry>,
    /// Index of the entry with the largest growth rate.
    pub maximizer: Option<usize>,
}

impl AlphaScan {
    pub fn best(&self) -> Option<&ScanEntry> {
        self.maximizer.map(|i| &self.entries[i])
    }
}

/// Leading growth rate for each `alpha`; Orr–Sommerfeld when `reynolds` is
/// given, Rayleigh otherwise. Per-`alpha` failures are recorded and the
/// scan carries on.
pub fn scan_alpha(
    profile: &BaseProfile,
    alphas: &[f64],
    reynolds: Option<f64>,
    ny: usize,
) -> Result<AlphaScan> {
    if alphas.is_empty() {
        return Err(LabError::InvalidParameter("empty alpha list".into()));
    }
    let entries: Vec<ScanEntry> = alphas
        .par_iter()
        .map(|&alpha| {
            let res = match reynolds {
                Some(r) => orr_sommerfeld_spectrum(profile, alpha, r, ny),
                None => rayleigh_spectrum(profile, alpha, ny),
            };
            match res {
                Ok(r) => ScanEntry {
                    alpha,
                    max_growth: r.leading_growth_rate(),
                    result: Some(r),
                    error: None,
                },
                Err(e) => ScanEntry {
                    alpha,
                    max_growth: None,
                    result: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let maximizer = entries
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.max_growth.map(|g| (i, g)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i);
    Ok(AlphaScan { entries, maximizer })
}

/// Admissible wavenumbers `2 pi j / Lx` for `j = 1..=jmax`.
pub fn admissible_alphas(lx: f64, jmax: usize) -> Vec<f64> {
    (1..=jmax)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / lx)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn filter_identical_and_disjoint() {
        let a = vec![c(0.1, 0.2), c(0.5, -0.1)];
        let f = filter_spurious(&a, &a, 1e-6);
        assert_eq!(f.retained.len(), 2);
        assert!(f.spurious.is_empty());
        let b = vec![c(1.1, 0.2), c(1.5, -0.1)];
        let f = filter_spurious(&a, &b, 1e-6);
        assert!(f.retained.is_empty());
        assert_eq!(f.spurious.len(), 2);
    }

    #[test]
    fn couette_rayleigh_has_no_growth() {
        let r = rayleigh_spectrum(&BaseProfile::Couette, 1.0, 33).unwrap();
        assert!(!r.is_empty());
        for g in r.growth_rates() {
            assert!(g.abs() <= 1e-8, "{g}");
        }
        // discrete continuous spectrum lies in [0, 1]
        for e in &r.eigenvalues {
            assert!(e.re > -1e-8 && e.re < 1.0 + 1e-8);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(rayleigh_spectrum(&BaseProfile::Couette, 0.0, 65).is_err());
        assert!(rayleigh_spectrum(&BaseProfile::Couette, 1.0, 17).is_err());
        assert!(orr_sommerfeld_spectrum(&BaseProfile::Couette, 1.0, 100.0, 33).is_err());
        assert!(orr_sommerfeld_spectrum(&BaseProfile::Couette, 1.0, -5.0, 65).is_err());
        assert!(scan_alpha(&BaseProfile::Couette, &[], None, 33).is_err());
    }

    #[test]
    fn tabulated_profile_matches_analytic() {
        let p = ShearProfile::new(0.07, 1).unwrap();
        let tab: Vec<f64> = cheb::nodes(64).iter().map(|&y| p.velocity(y)).collect();
        let a = BaseProfile::Oscillatory(p).sample(49);
        let b = BaseProfile::Tabulated(tab).sample(49);
        for j in 0..49 {
            assert!((a.u[j] - b.u[j]).abs() < 1e-12);
            assert!((a.upp[j] - b.upp[j]).abs() < 1e-6 * 16.0 * std::f64::consts::PI.powi(2));
        }
    }
}
