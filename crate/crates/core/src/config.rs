//! Experiment configuration: a TOML file describing one run.
//!
//! ```toml
//! [flow]
//! n = 1
//! c = 0.07
//! reynolds = 10000.0      # or: epsilon = 1e-4 (exactly one of the two)
//!
//! [domain]
//! lx = 2.0
//! nx = 128
//! ny = 129
//!
//! [time]
//! horizon = 25.0
//! output_interval = 0.1
//! snapshot_times = [0.0, 4.9, 14.9, 24.9]
//! dt = { kind = "adaptive", safety = 0.5, dt_max = 0.05 }
//!
//! [perturbation]
//! amplitude = 0.01
//! seed = 1
//!
//! [numerics]
//! dealias = true
//! ```
//!
//! Unknown keys are rejected. The viscosity is stored canonically as
//! `epsilon = 1/R`; the wall condition follows from it unless given.

use crate::error::{LabError, Result};
use crate::grid::ChannelGrid;
use crate::shear::{in_instability_window, DriftState, ShearProfile};
use crate::solver::{BcMode, DtPolicy, PerturbationSpec, SolverParams};
use crate::spectrum::{admissible_alphas, BaseProfile};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub n: u32,
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reynolds: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    #[serde(default = "default_lx")]
    pub lx: f64,
    #[serde(default = "default_nx")]
    pub nx: usize,
    #[serde(default = "default_ny")]
    pub ny: usize,
}

impl Default for DomainSection {
    fn default() -> Self {
        DomainSection {
            lx: default_lx(),
            nx: default_nx(),
            ny: default_ny(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub horizon: f64,
    #[serde(default = "default_output_interval")]
    pub output_interval: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    #[serde(default)]
    pub dt: DtPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsSection {
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc: Option<BcMode>,
}

impl Default for NumericsSection {
    fn default() -> Self {
        NumericsSection {
            dealias: true,
            bc: None,
        }
    }
}

/// Full specification of one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub flow: FlowSection,
    #[serde(default)]
    pub domain: DomainSection,
    pub time: TimeSection,
    pub perturbation: PerturbationSpec,
    #[serde(default)]
    pub numerics: NumericsSection,
}

fn default_lx() -> f64 {
    2.0
}
fn default_nx() -> usize {
    128
}
fn default_ny() -> usize {
    129
}
fn default_output_interval() -> f64 {
    0.1
}
fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    /// A reference-matrix run with the default numerics.
    pub fn standard(
        n: u32,
        c: f64,
        reynolds: f64,
        amplitude: f64,
        seed: u64,
        horizon: f64,
    ) -> Self {
        ExperimentConfig {
            flow: FlowSection {
                n,
                c,
                reynolds: None,
                epsilon: Some(1.0 / reynolds),
            },
            domain: DomainSection::default(),
            time: TimeSection {
                horizon,
                output_interval: default_output_interval(),
                snapshot_times: Vec::new(),
                dt: DtPolicy::default(),
            },
            perturbation: PerturbationSpec::new(amplitude, seed),
            numerics: NumericsSection::default(),
        }
    }

    /// Parses and validates; errors carry the 1-based line of the
    /// offending key where it can be located.
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let mut cfg: ExperimentConfig = toml::from_str(src).map_err(|e| config_error(src, &e))?;
        cfg.normalize().map_err(|(key, message)| LabError::Config {
            line: line_of(src, key),
            message,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_toml_str(&src)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Folds `reynolds` into the canonical `epsilon` and checks every field,
    /// reporting the key at fault.
    pub(crate) fn normalize(&mut self) -> std::result::Result<(), (&'static str, String)> {
        let f = &mut self.flow;
        let eps = match (f.reynolds, f.epsilon) {
            (Some(_), Some(_)) => {
                return Err((
                    "reynolds",
                    "give either reynolds or epsilon, not both".into(),
                ))
            }
            (None, None) => return Err(("flow", "one of reynolds or epsilon is required".into())),
            (Some(r), None) if !(r > 0.0 && r.is_finite()) => {
                return Err(("reynolds", format!("reynolds must be > 0, got {r}")))
            }
            (Some(r), None) => 1.0 / r,
            (None, Some(e)) if !(e >= 0.0 && e.is_finite()) => {
                return Err(("epsilon", format!("epsilon must be >= 0, got {e}")))
            }
            (None, Some(e)) => e,
        };
        f.reynolds = None;
        f.epsilon = Some(eps);
        self.validate()
    }

    fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        let f = &self.flow;
        if f.n < 1 {
            return Err(("n", "n must be >= 1".into()));
        }
        if !(f.c > 0.0 && f.c.is_finite()) {
            return Err(("c", format!("c must be > 0, got {}", f.c)));
        }
        let d = &self.domain;
        ChannelGrid::new(d.lx, d.nx, d.ny).map_err(|e| ("domain", e.to_string()))?;
        let t = &self.time;
        if !(t.horizon > 0.0 && t.horizon.is_finite()) {
            return Err(("horizon", format!("horizon must be > 0, got {}", t.horizon)));
        }
        if !(t.output_interval > 0.0 && t.output_interval <= t.horizon) {
            return Err((
                "output_interval",
                format!(
                    "output_interval must be in (0, horizon], got {}",
                    t.output_interval
                ),
            ));
        }
        if let Some(bad) = t
            .snapshot_times
            .iter()
            .find(|&&s| !(0.0..=t.horizon).contains(&s))
        {
            return Err((
                "snapshot_times",
                format!("snapshot time {bad} is outside [0, horizon]"),
            ));
        }
        if t.snapshot_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(("snapshot_times", "snapshot times must increase".into()));
        }
        self.solver_params()
            .validate()
            .map_err(|e| ("numerics", e.to_string()))?;
        let kmax = if self.numerics.dealias {
            (d.nx - 1) / 3
        } else {
            d.nx / 2 - 1
        };
        let grid = ChannelGrid::new(d.lx, d.nx, d.ny).expect("checked above");
        self.perturbation
            .validate(&grid, kmax)
            .map_err(|e| ("perturbation", e.to_string()))?;
        if self.perturbation.amplitude > 0.0 && self.perturbation.max_ky == 0 {
            return Err(("max_ky", "nonzero amplitude needs max_ky >= 1".into()));
        }
        Ok(())
    }

    pub fn epsilon(&self) -> f64 {
        self.flow.epsilon.expect("normalized config")
    }

    /// `1/epsilon`, infinite for inviscid runs.
    pub fn reynolds(&self) -> f64 {
        1.0 / self.epsilon()
    }

    pub fn profile(&self) -> Result<ShearProfile> {
        ShearProfile::new(self.flow.c, self.flow.n)
    }

    pub fn solver_params(&self) -> SolverParams {
        let eps = self
            .flow
            .epsilon
            .or(self.flow.reynolds.map(|r| 1.0 / r))
            .unwrap_or(0.0);
        let mut p = SolverParams::new(eps, self.time.dt, self.numerics.dealias);
        if let Some(bc) = self.numerics.bc {
            p.bc = bc;
        }
        p
    }

    /// False when `c` lies outside the instability window; recorded, not an
    /// error.
    pub fn in_window(&self) -> bool {
        in_instability_window(self.flow.c)
    }

    /// SHA-256 of the canonical serialization, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Short stable run label, e.g. `n1-R10000-s3-1a2b3c4d`.
    pub fn label(&self) -> String {
        let r = self.reynolds();
        let rs = if r.is_finite() {
            format!("R{}", r.round())
        } else {
            "Rinf".into()
        };
        format!(
            "n{}-{}-s{}-{}",
            self.flow.n,
            rs,
            self.perturbation.seed,
            &self.hash()[..8]
        )
    }
}

/// Base flow of a spectrum run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    Couette,
    Oscillatory {
        c: f64,
        n: u32,
    },
    /// The oscillatory shear after viscous drift to time `t`.
    Drifted {
        c: f64,
        n: u32,
        epsilon: f64,
        t: f64,
    },
}

impl ProfileSpec {
    pub fn build(&self) -> Result<BaseProfile> {
        Ok(match *self {
            ProfileSpec::Couette => BaseProfile::Couette,
            ProfileSpec::Oscillatory { c, n } => BaseProfile::Oscillatory(ShearProfile::new(c, n)?),
            ProfileSpec::Drifted { c, n, epsilon, t } => {
                BaseProfile::Drifted(DriftState::new(ShearProfile::new(c, n)?, epsilon, t)?)
            }
        })
    }
}

/// A stability scan: Rayleigh when `reynolds` is empty, otherwise one
/// Orr–Sommerfeld scan per Reynolds number.
///
/// ```toml
/// profile = { kind = "oscillatory", c = 0.07, n = 1 }
/// modes = 8            # alpha = 2 pi j / lx, j = 1..=modes
/// # alphas = [3.14159] # or an explicit list (the two are merged)
/// reynolds = [10000.0]
/// ny = 129
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub profile: ProfileSpec,
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub modes: usize,
    #[serde(default = "default_lx")]
    pub lx: f64,
    #[serde(default)]
    pub reynolds: Vec<f64>,
    #[serde(default = "default_ny")]
    pub ny: usize,
}

impl SpectrumConfig {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let cfg: SpectrumConfig = toml::from_str(src).map_err(|e| config_error(src, &e))?;
        let fail = |key: &str, message: String| LabError::Config {
            line: line_of(src, key),
            message,
        };
        if cfg.alpha_list().is_empty() {
            return Err(fail(
                "alphas",
                "no wavenumbers: give `alphas` or `modes`".into(),
            ));
        }
        if let Some(a) = cfg.alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(fail("alphas", format!("wavenumbers must be > 0, got {a}")));
        }
        if !(cfg.lx > 0.0) {
            return Err(fail("lx", format!("lx must be > 0, got {}", cfg.lx)));
        }
        if let Some(r) = cfg.reynolds.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(fail("reynolds", format!("reynolds must be > 0, got {r}")));
        }
        let min_ny = if cfg.reynolds.is_empty() { 33 } else { 65 };
        if cfg.ny < min_ny {
            return Err(fail(
                "ny",
                format!("ny must be >= {min_ny}, got {}", cfg.ny),
            ));
        }
        cfg.profile
            .build()
            .map_err(|e| fail("profile", e.to_string()))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_toml_str(&src)
    }

    /// Explicit wavenumbers followed by the admissible ones.
    pub fn alpha_list(&self) -> Vec<f64> {
        let mut a = self.alphas.clone();
        a.extend(admissible_alphas(self.lx, self.modes));
        a
    }
}

/// A TOML error located by its span.
pub(crate) fn config_error(src: &str, e: &toml::de::Error) -> LabError {
    let line = e
        .span()
        .map(|s| src[..s.start.min(src.len())].matches('\n').count() + 1)
        .unwrap_or(0);
    LabError::Config {
        line,
        message: e.message().to_string(),
    }
}

/// Line of the first `key =` (or `[key]`) in `src`, 0 when absent.
pub(crate) fn line_of(src: &str, key: &str) -> usize {
    src.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key).is_some_and(|rest| {
                let rest = rest.trim_start();
                rest.starts_with('=') || rest.starts_with(']')
            }) || l
                .strip_prefix('[')
                .is_some_and(|r| r.trim_start().starts_with(key))
        })
        .map(|i| i + 1)
        .unwrap_or(0)
}
