//! Parameter sweeps: a base configuration crossed with lists of `n`, `c`,
//! Reynolds numbers and seeds, run concurrently and summarized by the first
//! pulse of each run.
//!
//! ```toml
//! [matrix]
//! n = [1, 2, 3]
//! reynolds = [10000.0, 20000.0]
//! seeds = [1, 2, 3]
//!
//! [base.flow]
//! n = 1
//! c = 0.07
//! reynolds = 10000.0
//! # ... the rest of an ordinary run configuration under `base`
//! ```

use crate::artifact::{run_to_dir, RunArtifact, RunStatus};
use crate::config::{config_error, line_of, ExperimentConfig};
use crate::diagnostics::{Channel, PulseReport, DEFAULT_SMOOTH_WINDOW};
use crate::error::{LabError, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Matrix {
    #[serde(default)]
    pub n: Vec<u32>,
    #[serde(default)]
    pub c: Vec<f64>,
    #[serde(default)]
    pub reynolds: Vec<f64>,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub matrix: Matrix,
    pub base: ExperimentConfig,
    /// Moving-average window for pulse detection, in output samples.
    #[serde(default = "default_window")]
    pub smooth_window: usize,
}

fn default_window() -> usize {
    DEFAULT_SMOOTH_WINDOW
}

impl SweepConfig {
    pub fn from_toml_str(src: &str) -> Result<Self> {
        let mut cfg: SweepConfig = toml::from_str(src).map_err(|e| config_error(src, &e))?;
        cfg.base
            .normalize()
            .map_err(|(key, message)| LabError::Config {
                line: line_of(src, key),
                message,
            })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::from_toml_str(&src)
    }

    /// Cartesian product over the non-empty axes, deduplicated by config
    /// hash in first-seen order.
    pub fn expand(&self) -> Result<Vec<ExperimentConfig>> {
        let b = &self.base;
        let ns = if self.matrix.n.is_empty() {
            vec![b.flow.n]
        } else {
            self.matrix.n.clone()
        };
        let cs = if self.matrix.c.is_empty() {
            vec![b.flow.c]
        } else {
            self.matrix.c.clone()
        };
        let eps: Vec<f64> = if self.matrix.reynolds.is_empty() {
            vec![b.epsilon()]
        } else {
            self.matrix.reynolds.iter().map(|r| 1.0 / r).collect()
        };
        let seeds = if self.matrix.seeds.is_empty() {
            vec![b.perturbation.seed]
        } else {
            self.matrix.seeds.clone()
        };
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for &n in &ns {
            for &c in &cs {
                for &e in &eps {
                    for &seed in &seeds {
                        let mut cfg = b.clone();
                        cfg.flow.n = n;
                        cfg.flow.c = c;
                        cfg.flow.epsilon = Some(e);
                        cfg.flow.reynolds = None;
                        cfg.perturbation.seed = seed;
                        // re-validate each cell (e.g. n = 0 in the matrix)
                        let cfg = ExperimentConfig::from_toml_str(&cfg.to_toml_string())?;
                        if seen.insert(cfg.hash()) {
                            out.push(cfg);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

/// One summary row.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub config: ExperimentConfig,
    pub dir: PathBuf,
    pub status: RunStatus,
    pub error: Option<String>,
    pub pulse: Option<PulseReport>,
    pub modulation_ratio: Option<f64>,
}

/// Runs every cell into `out_dir/<label>` with at most `workers` concurrent
/// runs, then writes `out_dir/summary.csv`. Individual failures are
/// recorded, not propagated.
pub fn run_sweep(cfg: &SweepConfig, out_dir: &Path, workers: usize) -> Result<Vec<SweepRow>> {
    let cells = cfg.expand()?;
    std::fs::create_dir_all(out_dir).map_err(|e| LabError::io(out_dir, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| LabError::InvalidParameter(e.to_string()))?;
    let window = cfg.smooth_window;
    let rows: Vec<SweepRow> = pool.install(|| {
        cells
            .par_iter()
            .map(|c| run_cell(c, &out_dir.join(c.label()), window))
            .collect()
    });
    let path = out_dir.join("summary.csv");
    let f = std::fs::File::create(&path).map_err(|e| LabError::io(&path, e))?;
    write_summary(std::io::BufWriter::new(f), &rows)?;
    Ok(rows)
}

fn run_cell(c: &ExperimentConfig, dir: &Path, window: usize) -> SweepRow {
    log::info!("sweep cell {}", c.label());
    let mut row = SweepRow {
        config: c.clone(),
        dir: dir.to_path_buf(),
        status: RunStatus::Failed,
        error: None,
        pulse: None,
        modulation_ratio: None,
    };
    let artifact: Result<RunArtifact> = run_to_dir(c, dir);
    match artifact {
        Ok(a) => {
            row.status = a.status.status;
            row.error = a.status.error.clone();
            match a.series() {
                Ok(s) => {
                    row.modulation_ratio = s.modulation_ratio();
                    match s.first_pulse(Channel::DevDrift, window) {
                        Ok(p) => row.pulse = Some(p),
                        Err(e) if row.error.is_none() => row.error = Some(e.to_string()),
                        Err(_) => {}
                    }
                }
                Err(e) => row.error = Some(e.to_string()),
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

pub fn write_summary<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let fmt = |e: csv::Error| LabError::Format(e.to_string());
    wr.write_record([
        "label",
        "config_hash",
        "n",
        "c",
        "epsilon",
        "reynolds",
        "seed",
        "status",
        "t_min",
        "m",
        "t_max",
        "M",
        "dt",
        "sigma",
        "window",
        "t_end",
        "modulation_ratio",
        "error",
    ])
    .map_err(fmt)?;
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        let c = &r.config;
        let p = r.pulse.as_ref();
        wr.write_record([
            c.label(),
            c.hash(),
            c.flow.n.to_string(),
            c.flow.c.to_string(),
            c.epsilon().to_string(),
            c.reynolds().to_string(),
            c.perturbation.seed.to_string(),
            format!("{:?}", r.status).to_lowercase(),
            opt(p.map(|p| p.t_min)),
            opt(p.map(|p| p.m)),
            opt(p.map(|p| p.t_max)),
            opt(p.map(|p| p.big_m)),
            opt(p.map(|p| p.dt)),
            opt(p.map(|p| p.sigma)),
            p.map(|p| p.window.to_string()).unwrap_or_default(),
            opt(p.and_then(|p| p.t_end)),
            opt(r.modulation_ratio),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(fmt)?;
    }
    wr.flush().map_err(|e| LabError::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SWEEP: &str = r#"
[matrix]
n = [1, 2, 3]
reynolds = [10000.0, 20000.0]
seeds = [1, 1, 2]

[base.flow]
n = 1
c = 0.07
reynolds = 10000.0

[base.time]
horizon = 40.0

[base.perturbation]
amplitude = 0.01
seed = 1
"#;

    #[test]
    fn expands_and_deduplicates() {
        let s = SweepConfig::from_toml_str(SWEEP).unwrap();
        let cells = s.expand().unwrap();
        assert_eq!(cells.len(), 12);
        let hashes: HashSet<String> = cells.iter().map(|c| c.hash()).collect();
        assert_eq!(hashes.len(), 12);
        assert_eq!(cells[0].flow.n, 1);
        assert_eq!(cells[0].epsilon(), 1e-4);
    }

    #[test]
    fn empty_matrix_is_the_base_run() {
        let src = SWEEP.replace(
            "n = [1, 2, 3]\nreynolds = [10000.0, 20000.0]\nseeds = [1, 1, 2]\n",
            "",
        );
        let s = SweepConfig::from_toml_str(&src).unwrap();
        let cells = s.expand().unwrap();
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0], s.base);
    }

    #[test]
    fn invalid_cells_are_rejected() {
        let src = SWEEP.replace("n = [1, 2, 3]", "n = [0]");
        let s = SweepConfig::from_toml_str(&src).unwrap();
        assert!(s.expand().is_err());
        assert!(
            SweepConfig::from_toml_str(&SWEEP.replace("[matrix]", "[matrix]\nbogus = 1")).is_err()
        );
    }
}
