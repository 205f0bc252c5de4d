//! Discrete scalar and velocity fields with the shared differential
//! operators, quadrature and norms.
//!
//! Derivatives are Fourier-spectral in `x` and Chebyshev collocation in `y`.
//! Integrals use the trapezoid rule in `x` (spectrally exact for periodic
//! data) and Clenshaw–Curtis in `y`. Norms are unnormalized integrals over
//! the whole box, not area averages.

use crate::error::{LabError, Result};
use crate::fourier::XTransform;
use crate::grid::ChannelGrid;
use nalgebra::DVector;
use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

/// Default relative tolerance on the discrete divergence of solver states.
pub const TOL_DIV: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<ChannelGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<ChannelGrid>) -> Self {
        ScalarField {
            grid: Arc::clone(grid),
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: &Arc<ChannelGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::InvalidParameter(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabError::NonFinite(format!("value at flat index {p}")));
        }
        Ok(ScalarField {
            grid: Arc::clone(grid),
            values,
        })
    }

    /// Samples `f(x, y)` on every node.
    pub fn from_fn(grid: &Arc<ChannelGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for &y in grid.y() {
            for &x in grid.x() {
                values.push(f(x, y));
            }
        }
        ScalarField {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<ChannelGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        let nx = self.grid.nx();
        &self.values[j * nx..(j + 1) * nx]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !self.grid.same_shape(&other.grid) {
            return Err(LabError::GridMismatch);
        }
        Ok(ScalarField {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Spectral `d/dx`. The Nyquist mode is discarded.
    pub fn ddx(&self) -> ScalarField {
        let g = &self.grid;
        let xt = XTransform::new(g.nx());
        let mut out = vec![0.0; g.len()];
        let mut coeffs = vec![Complex64::default(); xt.modes()];
        let mut buf = Vec::with_capacity(g.nx());
        for j in 0..g.ny() {
            xt.forward(self.row(j), &mut coeffs, &mut buf);
            for (k, c) in coeffs.iter_mut().enumerate() {
                *c *= Complex64::new(0.0, g.wavenumber(k));
            }
            let nx = g.nx();
            xt.inverse(&coeffs, &mut out[j * nx..(j + 1) * nx], &mut buf);
        }
        ScalarField {
            grid: Arc::clone(g),
            values: out,
        }
    }

    /// Collocation `d/dy` along each wall-normal line.
    pub fn ddy(&self) -> ScalarField {
        let g = &self.grid;
        let (nx, ny) = (g.nx(), g.ny());
        let d = g.dy_matrix();
        let mut out = vec![0.0; g.len()];
        for i in 0..nx {
            let col = DVector::from_iterator(ny, (0..ny).map(|j| self.values[j * nx + i]));
            let dcol = d * col;
            for j in 0..ny {
                out[j * nx + i] = dcol[j];
            }
        }
        ScalarField {
            grid: Arc::clone(g),
            values: out,
        }
    }

    /// Returns `[f]_x`, the `x`-average at each wall-normal node.
    pub fn x_mean(&self) -> Vec<f64> {
        (0..self.grid.ny())
            .map(|j| self.row(j).iter().sum::<f64>() / self.grid.nx() as f64)
            .collect()
    }
}

impl<'a> Add<&'a ScalarField> for &'a ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &'a ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a + b)
            .expect("grid mismatch in add")
    }
}

impl<'a> Sub<&'a ScalarField> for &'a ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &'a ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a - b)
            .expect("grid mismatch in sub")
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.map(|v| v * rhs)
    }
}

/// Velocity pair `(u1, u2)` on a shared grid.
#[derive(Debug, Clone)]
pub struct FlowField {
    pub u1: ScalarField,
    pub u2: ScalarField,
}

impl FlowField {
    pub fn new(u1: ScalarField, u2: ScalarField) -> Result<Self> {
        if !u1.grid.same_shape(&u2.grid) {
            return Err(LabError::GridMismatch);
        }
        Ok(FlowField { u1, u2 })
    }

    pub fn zeros(grid: &Arc<ChannelGrid>) -> Self {
        FlowField {
            u1: ScalarField::zeros(grid),
            u2: ScalarField::zeros(grid),
        }
    }

    /// The linear shear `(y, 0)`.
    pub fn couette(grid: &Arc<ChannelGrid>) -> Self {
        FlowField {
            u1: ScalarField::from_fn(grid, |_, y| y),
            u2: ScalarField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Arc<ChannelGrid> {
        self.u1.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.u1.max_abs().max(self.u2.max_abs())
    }

    /// Largest wall-condition violation: `|u2|` at both walls plus, when
    /// `no_slip` holds, `|u1 - 0|` at `y = 0` and `|u1 - 1|` at `y = 1`.
    pub fn wall_residual(&self, no_slip: bool) -> f64 {
        let ny = self.grid().ny();
        let mut r: f64 = 0.0;
        for &v in self.u2.row(0).iter().chain(self.u2.row(ny - 1)) {
            r = r.max(v.abs());
        }
        if no_slip {
            for &v in self.u1.row(0) {
                r = r.max(v.abs());
            }
            for &v in self.u1.row(ny - 1) {
                r = r.max((v - 1.0).abs());
            }
        }
        r
    }

    /// Relative divergence `||div u|| / (||d1 u1|| + ||d2 u2||)`; absolute
    /// when both gradient norms vanish.
    pub fn relative_divergence(&self) -> f64 {
        let a = self.u1.ddx();
        let b = self.u2.ddy();
        let div = &a + &b;
        let scale = l2_norm(&a) + l2_norm(&b);
        let d = l2_norm(&div);
        if scale > 0.0 {
            d / scale
        } else {
            d
        }
    }
}

impl<'a> Add<&'a FlowField> for &'a FlowField {
    type Output = FlowField;
    fn add(self, rhs: &'a FlowField) -> FlowField {
        FlowField {
            u1: &self.u1 + &rhs.u1,
            u2: &self.u2 + &rhs.u2,
        }
    }
}

impl<'a> Sub<&'a FlowField> for &'a FlowField {
    type Output = FlowField;
    fn sub(self, rhs: &'a FlowField) -> FlowField {
        FlowField {
            u1: &self.u1 - &rhs.u1,
            u2: &self.u2 - &rhs.u2,
        }
    }
}

impl Mul<f64> for &FlowField {
    type Output = FlowField;
    fn mul(self, rhs: f64) -> FlowField {
        FlowField {
            u1: &self.u1 * rhs,
            u2: &self.u2 * rhs,
        }
    }
}

/// Anything with an integral `L^2` norm over the channel.
pub trait Norm {
    fn squared_norm(&self) -> f64;
}

impl Norm for ScalarField {
    fn squared_norm(&self) -> f64 {
        integrate_with(self, |v| v * v)
    }
}

impl Norm for FlowField {
    fn squared_norm(&self) -> f64 {
        self.u1.squared_norm() + self.u2.squared_norm()
    }
}

/// `sqrt(int_0^Lx int_0^1 |f|^2 dy dx)`.
pub fn l2_norm<F: Norm + ?Sized>(f: &F) -> f64 {
    f.squared_norm().sqrt()
}

/// `int_0^Lx int_0^1 f dy dx`.
pub fn integrate(f: &ScalarField) -> f64 {
    integrate_with(f, |v| v)
}

fn integrate_with(f: &ScalarField, g: impl Fn(f64) -> f64) -> f64 {
    let grid = f.grid();
    let wx = grid.x_weight();
    grid.y_weights()
        .iter()
        .enumerate()
        .map(|(j, wy)| wy * f.row(j).iter().map(|&v| g(v)).sum::<f64>())
        .sum::<f64>()
        * wx
}

/// `Omega = d_x u2 - d_y u1`.
pub fn vorticity(u: &FlowField) -> ScalarField {
    &u.u2.ddx() - &u.u1.ddy()
}

/// `d_x u1 + d_y u2`.
pub fn divergence(u: &FlowField) -> ScalarField {
    &u.u1.ddx() + &u.u2.ddy()
}

/// Velocity `(d_y psi, -d_x psi)` of a streamfunction sampled on the grid.
pub fn curl_of_streamfunction(psi: &ScalarField) -> FlowField {
    FlowField {
        u1: psi.ddy(),
        u2: &psi.ddx() * -1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    #[test]
    fn zero_field_has_zero_norm() {
        let g = make_grid(2.0, 16, 17).unwrap();
        assert_eq!(l2_norm(&ScalarField::zeros(&g)), 0.0);
        assert_eq!(l2_norm(&FlowField::zeros(&g)), 0.0);
    }

    #[test]
    fn sine_norm_is_one_on_lx_two() {
        // int_0^2 int_0^1 sin^2(4 pi y) = 2 * 1/2
        let g = make_grid(2.0, 16, 65).unwrap();
        let f = ScalarField::from_fn(&g, |_, y| (4.0 * PI * y).sin());
        assert!((l2_norm(&f) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn couette_norm() {
        let g = make_grid(2.0, 16, 33).unwrap();
        let u = FlowField::couette(&g);
        assert!((l2_norm(&u) - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn integrals() {
        let g = make_grid(2.0, 16, 33).unwrap();
        assert!((integrate(&ScalarField::from_fn(&g, |_, _| 1.0)) - 2.0).abs() < 1e-14);
        assert!((integrate(&ScalarField::from_fn(&g, |_, y| y * y)) - 2.0 / 3.0).abs() < 1e-14);
        assert!(integrate(&ScalarField::from_fn(&g, |_, y| (4.0 * PI * y).cos())).abs() < 1e-14);
    }

    #[test]
    fn vorticity_of_shears() {
        let g = make_grid(2.0, 16, 65).unwrap();
        let w = vorticity(&FlowField::couette(&g));
        assert!(w.values().iter().all(|v| (v + 1.0).abs() < 1e-12));
        let c = 0.07;
        let u = FlowField::new(
            ScalarField::from_fn(&g, |_, y| y + c * (4.0 * PI * y).sin()),
            ScalarField::zeros(&g),
        )
        .unwrap();
        let w = vorticity(&u);
        for j in 0..g.ny() {
            let exact = -1.0 - 4.0 * PI * c * (4.0 * PI * g.y()[j]).cos();
            assert!((w.at(3, j) - exact).abs() < 1e-10);
        }
        assert_eq!(vorticity(&FlowField::zeros(&g)).max_abs(), 0.0);
    }

    #[test]
    fn divergence_examples() {
        let g = make_grid(2.0 * PI, 32, 33).unwrap();
        let shear = FlowField::new(
            ScalarField::from_fn(&g, |_, y| y * y * (1.0 - y)),
            ScalarField::zeros(&g),
        )
        .unwrap();
        assert!(divergence(&shear).max_abs() < 1e-15);

        let u = FlowField::new(
            ScalarField::from_fn(&g, |x, _| x.sin()),
            ScalarField::zeros(&g),
        )
        .unwrap();
        let d = divergence(&u);
        for i in 0..g.nx() {
            assert!((d.at(i, 5) - g.x()[i].cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn streamfunction_curl_is_solenoidal() {
        let g = make_grid(2.0, 32, 33).unwrap();
        let psi = ScalarField::from_fn(&g, |x, y| {
            (PI * x).sin() * (PI * y).sin().powi(2) + (2.0 * PI * x).cos() * y * (1.0 - y)
        });
        let u = curl_of_streamfunction(&psi);
        assert!(u.relative_divergence() < TOL_DIV);
        assert!(u.u2.row(0).iter().all(|v| v.abs() < 1e-15));
    }
}
