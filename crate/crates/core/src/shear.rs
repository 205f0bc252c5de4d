//! The oscillatory shear family `U(y) = y + (c/n) sin(4 n pi y)`, its
//! viscous drift, the inviscid instability window and the time at which the
//! drifting profile leaves that window.

use crate::error::{LabError, Result};
use crate::field::{FlowField, ScalarField};
use crate::grid::ChannelGrid;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Lower edge of the instability window, `1/(8 pi)`.
pub const WINDOW_LOW: f64 = 1.0 / (8.0 * PI);
/// Upper edge of the instability window, `1/(4 pi)`.
pub const WINDOW_HIGH: f64 = 1.0 / (4.0 * PI);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShearProfile {
    c: f64,
    n: u32,
}

impl ShearProfile {
    pub fn new(c: f64, n: u32) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(LabError::InvalidParameter(format!(
                "c must be > 0, got {c}"
            )));
        }
        if n < 1 {
            return Err(LabError::InvalidParameter("n must be >= 1".into()));
        }
        Ok(ShearProfile { c, n })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Wall-normal wavenumber `4 n pi`.
    pub fn wavenumber(&self) -> f64 {
        4.0 * self.n as f64 * PI
    }

    /// Oscillation amplitude `c / n`.
    pub fn amplitude(&self) -> f64 {
        self.c / self.n as f64
    }

    /// `U(y)` for oscillation amplitude `a` (the undrifted profile uses `c/n`).
    pub fn velocity_with_amplitude(&self, a: f64, y: f64) -> f64 {
        y + a * (self.wavenumber() * y).sin()
    }

    pub fn velocity(&self, y: f64) -> f64 {
        self.velocity_with_amplitude(self.amplitude(), y)
    }

    pub fn velocity_dy(&self, y: f64) -> f64 {
        1.0 + self.c * 4.0 * PI * (self.wavenumber() * y).cos()
    }

    pub fn velocity_dyy(&self, y: f64) -> f64 {
        let k = self.wavenumber();
        -self.amplitude() * k * k * (k * y).sin()
    }
}

/// A shear profile drifting under viscosity `epsilon = 1/R` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftState {
    pub profile: ShearProfile,
    pub epsilon: f64,
    pub t: f64,
}

impl DriftState {
    pub fn new(profile: ShearProfile, epsilon: f64, t: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(LabError::InvalidParameter(format!(
                "epsilon must be >= 0, got {epsilon}"
            )));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(LabError::InvalidParameter(format!(
                "t must be >= 0, got {t}"
            )));
        }
        Ok(DriftState {
            profile,
            epsilon,
            t,
        })
    }

    pub fn at(&self, t: f64) -> Self {
        DriftState { t, ..*self }
    }

    /// `a(t) = (c/n) exp(-epsilon (4 n pi)^2 t)`.
    pub fn amplitude(&self) -> f64 {
        let k = self.profile.wavenumber();
        self.profile.amplitude() * (-self.epsilon * k * k * self.t).exp()
    }

    /// Effective window parameter `n a(t)`, comparable with `c`.
    pub fn effective_c(&self) -> f64 {
        self.amplitude() * self.profile.n() as f64
    }
}

/// `u1 = y + (c/n) sin(4 n pi y)`, `u2 = 0`.
pub fn shear_field(p: &ShearProfile, grid: &Arc<ChannelGrid>) -> FlowField {
    profile_field(grid, |y| p.velocity(y))
}

/// The drifting profile at time `d.t`.
pub fn drift_field(d: &DriftState, grid: &Arc<ChannelGrid>) -> FlowField {
    let a = d.amplitude();
    profile_field(grid, |y| d.profile.velocity_with_amplitude(a, y))
}

fn profile_field(grid: &Arc<ChannelGrid>, u: impl Fn(f64) -> f64) -> FlowField {
    let mut u1 = ScalarField::from_fn(grid, |_, y| u(y));
    // sin(4 n pi y) vanishes at the walls only up to rounding; pin them.
    let (nx, ny) = (grid.nx(), grid.ny());
    let v = u1.values_mut();
    for i in 0..nx {
        v[i] = 0.0;
        v[(ny - 1) * nx + i] = 1.0;
    }
    FlowField {
        u1,
        u2: ScalarField::zeros(grid),
    }
}

/// True iff `1/(8 pi) < c < 1/(4 pi)`.
pub fn in_instability_window(c: f64) -> bool {
    c > WINDOW_LOW && c < WINDOW_HIGH
}

/// Time for the drifting amplitude `c exp(-epsilon (4 n pi)^2 T)` to reach
/// the window's lower edge: `T = ln(8 pi c) / (epsilon (4 n pi)^2)`.
pub fn drift_exit_time(c: f64, n: u32, epsilon: f64) -> Result<f64> {
    if c <= WINDOW_LOW {
        return Err(LabError::OutsideWindow { c });
    }
    if !(epsilon > 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "epsilon must be > 0, got {epsilon}"
        )));
    }
    if n < 1 {
        return Err(LabError::InvalidParameter("n must be >= 1".into()));
    }
    let k = 4.0 * n as f64 * PI;
    Ok((8.0 * PI * c).ln() / (epsilon * k * k))
}

/// `||U - y|| = (c/n) sqrt(Lx/2)`.
pub fn velocity_deviation_norm(p: &ShearProfile, lx: f64) -> f64 {
    p.amplitude() * (lx / 2.0).sqrt()
}

/// `||U' - 1|| = 4 pi c sqrt(Lx/2)`, independent of `n`.
pub fn vorticity_deviation_norm(p: &ShearProfile, lx: f64) -> f64 {
    4.0 * PI * p.c() * (lx / 2.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn shear_field_examples() {
        let g = make_grid(2.0, 8, 65).unwrap();
        let p = ShearProfile::new(0.07, 1).unwrap();
        let u = shear_field(&p, &g);
        assert_eq!(u.u1.at(0, 0), 0.0);
        assert_eq!(u.u1.at(0, 64), 1.0);
        assert!((p.velocity(0.125) - (0.125 + 0.07)).abs() < 1e-15);
        let p2 = ShearProfile::new(0.07, 2).unwrap();
        assert!((p2.velocity(1.0 / 16.0) - (1.0 / 16.0 + 0.035)).abs() < 1e-15);
    }

    #[test]
    fn drift_reduces_to_shear() {
        let g = make_grid(2.0, 8, 33).unwrap();
        let p = ShearProfile::new(0.07, 1).unwrap();
        let s = shear_field(&p, &g);
        for d in [
            DriftState::new(p, 1e-4, 0.0).unwrap(),
            DriftState::new(p, 0.0, 17.0).unwrap(),
        ] {
            let f = drift_field(&d, &g);
            assert_eq!(f.u1.values(), s.u1.values());
        }
    }

    #[test]
    fn drift_amplitude_at_window_edge() {
        let p = ShearProfile::new(0.07, 1).unwrap();
        let d = DriftState::new(p, 1e-4, 35.44).unwrap();
        let expected = 0.07 * (-1e-4 * (4.0 * PI).powi(2) * 35.44f64).exp();
        assert!((d.amplitude() - expected).abs() < 1e-15);
        // 35.44 is the exit time from the rounded ln(7/4), so the amplitude
        // lands on 0.07 * 4/7 = 0.04 rather than exactly on 1/(8 pi).
        assert!((d.amplitude() - 0.04).abs() < 1e-5);
        assert!(d.amplitude() > WINDOW_LOW);
    }

    #[test]
    fn window() {
        assert!(in_instability_window(0.07));
        assert!(!in_instability_window(WINDOW_HIGH));
        assert!(!in_instability_window(WINDOW_LOW));
        assert!(!in_instability_window(0.03));
    }

    #[test]
    fn exit_time() {
        let t = drift_exit_time(0.07, 1, 1e-4).unwrap();
        assert!(t > 35.0 && t < 36.0, "{t}");
        let t2 = drift_exit_time(0.07, 1, 2e-4).unwrap();
        assert!((t2 - t / 2.0).abs() < 1e-12);
        let tn = drift_exit_time(0.07, 2, 1e-4).unwrap();
        assert!((tn - t / 4.0).abs() < 1e-12);
        assert!(matches!(
            drift_exit_time(0.03, 1, 1e-4),
            Err(LabError::OutsideWindow { .. })
        ));
        assert!(drift_exit_time(0.07, 1, 0.0).is_err());
        // amplitude at the exit time sits on the lower edge
        let p = ShearProfile::new(0.07, 1).unwrap();
        let d = DriftState::new(p, 1e-4, t).unwrap();
        assert!((d.effective_c() - WINDOW_LOW).abs() < 1e-15);
    }

    #[test]
    fn analytic_norms() {
        let p1 = ShearProfile::new(0.07, 1).unwrap();
        let p7 = ShearProfile::new(0.07, 7).unwrap();
        assert!((velocity_deviation_norm(&p1, 2.0) - 0.07).abs() < 1e-15);
        assert!((velocity_deviation_norm(&p7, 2.0) - 0.01).abs() < 1e-15);
        let p2 = ShearProfile::new(0.07, 2).unwrap();
        assert!(
            (velocity_deviation_norm(&p2, 2.0) * 2.0 - velocity_deviation_norm(&p1, 2.0)).abs()
                < 1e-15
        );
        assert!((vorticity_deviation_norm(&p1, 2.0) - 4.0 * PI * 0.07).abs() < 1e-15);
        let p100 = ShearProfile::new(0.07, 100).unwrap();
        assert_eq!(
            vorticity_deviation_norm(&p1, 2.0),
            vorticity_deviation_norm(&p100, 2.0)
        );
        let pc = ShearProfile::new(0.14, 1).unwrap();
        assert!(
            (vorticity_deviation_norm(&pc, 2.0) - 2.0 * vorticity_deviation_norm(&p1, 2.0)).abs()
                < 1e-15
        );
    }

    #[test]
    fn rejects_invalid_profiles() {
        assert!(ShearProfile::new(0.0, 1).is_err());
        assert!(ShearProfile::new(0.07, 0).is_err());
        let p = ShearProfile::new(0.07, 1).unwrap();
        assert!(DriftState::new(p, -1.0, 0.0).is_err());
        assert!(DriftState::new(p, 1e-4, -1.0).is_err());
    }
}
