use crate::error::{LabError, Result};
use crate::field::{curl_of_streamfunction, l2_norm, FlowField, ScalarField};
use crate::grid::ChannelGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Random solenoidal perturbation with prescribed `L^2` norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    pub amplitude: f64,
    pub seed: u64,
    /// Largest streamwise mode index `j` (wavenumber `2 pi j / Lx`).
    #[serde(default = "default_band")]
    pub max_kx: usize,
    /// Largest wall-normal mode index `m`.
    #[serde(default = "default_band")]
    pub max_ky: usize,
    /// Coefficient magnitudes fall off as `(1 + j^2 + m^2)^(-decay/2)`.
    #[serde(default = "default_decay")]
    pub decay: f64,
}

fn default_band() -> usize {
    8
}

fn default_decay() -> f64 {
    2.0
}

impl PerturbationSpec {
    pub fn new(amplitude: f64, seed: u64) -> Self {
        PerturbationSpec {
            amplitude,
            seed,
            max_kx: default_band(),
            max_ky: default_band(),
            decay: default_decay(),
        }
    }

    pub fn validate(&self, grid: &ChannelGrid, max_resolved_kx: usize) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(LabError::InvalidParameter(format!(
                "perturbation amplitude must be >= 0, got {}",
                self.amplitude
            )));
        }
        if !self.decay.is_finite() {
            return Err(LabError::InvalidParameter("decay must be finite".into()));
        }
        if self.amplitude == 0.0 {
            // the band is irrelevant for an empty perturbation
            return Ok(());
        }
        if self.max_kx > max_resolved_kx {
            return Err(LabError::InvalidParameter(format!(
                "max_kx = {} exceeds the resolved band ({max_resolved_kx})",
                self.max_kx
            )));
        }
        if self.max_ky + 1 > (grid.ny() - 1) / 3 {
            return Err(LabError::InvalidParameter(format!(
                "max_ky = {} is not resolved by Ny = {}",
                self.max_ky,
                grid.ny()
            )));
        }
        Ok(())
    }
}

/// `psi = sum_{j,m} Re(a_jm exp(i 2 pi j x / Lx)) sin(pi y) sin(m pi y)`,
/// velocity `= (d_y psi, -d_x psi)`, rescaled to `spec.amplitude`.
///
/// The wall-normal basis has a double zero at each wall, so the result
/// satisfies both no-slip and non-penetration and leaves the Couette wall
/// values untouched. Deterministic in `spec.seed`.
pub fn random_perturbation(spec: &PerturbationSpec, grid: &Arc<ChannelGrid>) -> Result<FlowField> {
    let max_resolved = (grid.nx() - 1) / 3;
    spec.validate(grid, max_resolved)?;
    if spec.amplitude == 0.0 {
        return Ok(FlowField::zeros(grid));
    }
    if spec.max_ky == 0 {
        return Err(LabError::InvalidParameter(
            "nonzero amplitude with an empty wall-normal band".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut terms = Vec::new();
    for j in 0..=spec.max_kx {
        for m in 1..=spec.max_ky {
            let mag = (1.0 + (j * j + m * m) as f64).powf(-spec.decay / 2.0);
            let phase: f64 = rng.random::<f64>() * 2.0 * PI;
            terms.push((j, m, mag, phase));
        }
    }
    let lx = grid.lx();
    let psi = ScalarField::from_fn(grid, |x, y| {
        let envelope = (PI * y).sin();
        terms
            .iter()
            .map(|&(j, m, mag, phase)| {
                let kx = 2.0 * PI * j as f64 / lx;
                mag * (kx * x + phase).cos() * envelope * (m as f64 * PI * y).sin()
            })
            .sum()
    });
    let u = curl_of_streamfunction(&psi);
    let norm = l2_norm(&u);
    if norm == 0.0 {
        return Err(LabError::InvalidParameter(
            "perturbation band produced a zero field".into(),
        ));
    }
    Ok(&u * (spec.amplitude / norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn zero_amplitude_gives_zero_field() {
        let g = make_grid(2.0, 32, 33).unwrap();
        let u = random_perturbation(&PerturbationSpec::new(0.0, 1), &g).unwrap();
        assert_eq!(l2_norm(&u), 0.0);
    }

    #[test]
    fn norm_and_walls() {
        let g = make_grid(2.0, 64, 65).unwrap();
        let u = random_perturbation(&PerturbationSpec::new(0.01, 7), &g).unwrap();
        assert!((l2_norm(&u) - 0.01).abs() < 1e-12 * 0.01);
        assert!(u.wall_residual(false) < 1e-15);
        let ny = g.ny();
        for &v in u.u1.row(0).iter().chain(u.u1.row(ny - 1)) {
            assert!(v.abs() < 1e-13);
        }
        assert!(u.relative_divergence() < crate::field::TOL_DIV);
    }

    #[test]
    fn deterministic_in_seed() {
        let g = make_grid(2.0, 32, 33).unwrap();
        let mut spec = PerturbationSpec::new(0.01, 3);
        spec.max_ky = 4;
        let a = random_perturbation(&spec, &g).unwrap();
        let b = random_perturbation(&spec, &g).unwrap();
        assert_eq!(a.u1.values(), b.u1.values());
        spec.seed = 4;
        let c = random_perturbation(&spec, &g).unwrap();
        assert!(l2_norm(&(&a - &c)) > 0.0);
    }

    #[test]
    fn empty_band_is_an_error() {
        let g = make_grid(2.0, 32, 33).unwrap();
        let mut spec = PerturbationSpec::new(0.01, 3);
        spec.max_ky = 0;
        assert!(random_perturbation(&spec, &g).is_err());
        let mut spec = PerturbationSpec::new(0.01, 3);
        spec.max_kx = 40;
        assert!(random_perturbation(&spec, &g).is_err());
    }
}
