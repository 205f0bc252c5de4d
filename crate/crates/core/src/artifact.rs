//! On-disk run artifacts.
//!
//! ```text
//! <run>/config.toml        canonical copy of the configuration
//! <run>/diagnostics.csv    t,dev_linear,dev_drift,E,G,E_t,G_t
//! <run>/status.json        completion status, error, wall clock
//! <run>/snapshots/t_<t>/   meta.json + u1.bin + u2.bin
//! <run>/spectrum.csv       alpha,reynolds,c_re,c_im,growth,retained
//! ```
//!
//! Snapshot arrays are little-endian `f64`, `Nx * Ny` values, `x` fastest
//! (`index = j * Nx + i`); `meta.json` carries the grid and node coordinates.

use crate::config::ExperimentConfig;
use crate::diagnostics::{DiagnosticSample, DiagnosticSeries};
use crate::error::{LabError, Result};
use crate::field::{FlowField, ScalarField};
use crate::grid::make_grid;
use crate::run::{simulate_with, RunObserver, RunSummary};
use crate::solver::SolverState;
use crate::spectrum::SpectrumResult;
use serde::{Deserialize, Serialize};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const CONFIG_FILE: &str = "config.toml";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const STATUS_FILE: &str = "status.json";
pub const SNAPSHOT_DIR: &str = "snapshots";
pub const SPECTRUM_FILE: &str = "spectrum.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Running,
    Completed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusRecord {
    pub status: RunStatus,
    #[serde(default)]
    pub error: Option<String>,
    pub config_hash: String,
    pub wall_clock_seconds: f64,
    pub steps: u64,
    pub final_t: f64,
    pub in_instability_window: bool,
}

/// Metadata stored next to each snapshot's arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub t: f64,
    pub config_hash: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dtype: String,
    pub layout: String,
}

/// A run directory, readable without the producing process.
#[derive(Debug, Clone)]
pub struct RunArtifact {
    pub dir: PathBuf,
    pub config: ExperimentConfig,
    pub diagnostics_csv: PathBuf,
    pub snapshot_dir: PathBuf,
    pub spectrum_csvs: Vec<PathBuf>,
    pub status: StatusRecord,
}

impl RunArtifact {
    pub fn load(dir: &Path) -> Result<Self> {
        let config = ExperimentConfig::load(&dir.join(CONFIG_FILE))?;
        let status = read_json(&dir.join(STATUS_FILE))?;
        let spectrum = dir.join(SPECTRUM_FILE);
        Ok(RunArtifact {
            dir: dir.to_path_buf(),
            config,
            diagnostics_csv: dir.join(DIAGNOSTICS_FILE),
            snapshot_dir: dir.join(SNAPSHOT_DIR),
            spectrum_csvs: if spectrum.exists() {
                vec![spectrum]
            } else {
                Vec::new()
            },
            status,
        })
    }

    pub fn series(&self) -> Result<DiagnosticSeries> {
        DiagnosticSeries::load(&self.diagnostics_csv)
    }

    /// Snapshot directories in time order.
    pub fn snapshots(&self) -> Result<Vec<PathBuf>> {
        if !self.snapshot_dir.exists() {
            return Ok(Vec::new());
        }
        let mut dirs: Vec<PathBuf> = fs::read_dir(&self.snapshot_dir)
            .map_err(|e| LabError::io(&self.snapshot_dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_dir())
            .collect();
        dirs.sort();
        Ok(dirs)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| LabError::Format(e.to_string()))?;
    fs::write(path, text).map_err(|e| LabError::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| LabError::Format(format!("{}: {e}", path.display())))
}

fn write_f64s(path: &Path, values: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| LabError::io(path, e))
}

fn read_f64s(path: &Path, expected: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| LabError::io(path, e))?;
    if bytes.len() != expected * 8 {
        return Err(LabError::Format(format!(
            "{}: expected {} values, found {} bytes",
            path.display(),
            expected,
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

/// Directory name for a snapshot at `t`; sorts lexically in time order.
pub fn snapshot_name(t: f64) -> String {
    format!("t_{t:012.6}")
}

pub fn write_snapshot(dir: &Path, s: &SolverState, config_hash: &str) -> Result<PathBuf> {
    let g = s.u.grid();
    let path = dir.join(snapshot_name(s.t));
    fs::create_dir_all(&path).map_err(|e| LabError::io(&path, e))?;
    let meta = SnapshotMeta {
        nx: g.nx(),
        ny: g.ny(),
        lx: g.lx(),
        t: s.t,
        config_hash: config_hash.to_string(),
        x: g.x().to_vec(),
        y: g.y().to_vec(),
        dtype: "float64-le".into(),
        layout: "x-fastest".into(),
    };
    write_json(&path.join("meta.json"), &meta)?;
    write_f64s(&path.join("u1.bin"), s.u.u1.values())?;
    write_f64s(&path.join("u2.bin"), s.u.u2.values())?;
    Ok(path)
}

pub fn read_snapshot(path: &Path) -> Result<(SnapshotMeta, FlowField)> {
    let meta: SnapshotMeta = read_json(&path.join("meta.json"))?;
    let grid = make_grid(meta.lx, meta.nx, meta.ny)?;
    let n = meta.nx * meta.ny;
    let u1 = ScalarField::from_values(&grid, read_f64s(&path.join("u1.bin"), n)?)?;
    let u2 = ScalarField::from_values(&grid, read_f64s(&path.join("u2.bin"), n)?)?;
    Ok((meta, FlowField::new(u1, u2)?))
}

/// Streams diagnostics rows (flushed per row) and snapshots into a run
/// directory.
struct ArtifactWriter {
    csv: csv::Writer<BufWriter<File>>,
    snapshot_dir: PathBuf,
    hash: String,
}

impl RunObserver for ArtifactWriter {
    fn sample(&mut self, s: &DiagnosticSample) -> Result<()> {
        self.csv
            .serialize(s)
            .map_err(|e| LabError::Format(e.to_string()))?;
        self.csv
            .flush()
            .map_err(|e| LabError::Format(e.to_string()))
    }

    fn snapshot(&mut self, s: &SolverState) -> Result<()> {
        write_snapshot(&self.snapshot_dir, s, &self.hash).map(|_| ())
    }
}

/// Runs `config` writing its artifact into `dir` (created if needed). A
/// stepper failure still yields an artifact, with status `failed`.
pub fn run_to_dir(config: &ExperimentConfig, dir: &Path) -> Result<RunArtifact> {
    fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    let hash = config.hash();
    fs::write(dir.join(CONFIG_FILE), config.to_toml_string()).map_err(|e| LabError::io(dir, e))?;
    let mut status = StatusRecord {
        status: RunStatus::Running,
        error: None,
        config_hash: hash.clone(),
        wall_clock_seconds: 0.0,
        steps: 0,
        final_t: 0.0,
        in_instability_window: config.in_window(),
    };
    write_json(&dir.join(STATUS_FILE), &status)?;

    let csv_path = dir.join(DIAGNOSTICS_FILE);
    let file = File::create(&csv_path).map_err(|e| LabError::io(&csv_path, e))?;
    let mut writer = ArtifactWriter {
        csv: csv::Writer::from_writer(BufWriter::new(file)),
        snapshot_dir: dir.join(SNAPSHOT_DIR),
        hash,
    };
    let start = Instant::now();
    let result = simulate_with(config, &mut writer);
    let _ = writer.csv.flush();
    status.wall_clock_seconds = start.elapsed().as_secs_f64();
    match result {
        Ok(RunSummary {
            steps,
            final_t,
            failure,
        }) => {
            status.steps = steps;
            status.final_t = final_t;
            match failure {
                None => status.status = RunStatus::Completed,
                Some(e) => {
                    status.status = RunStatus::Failed;
                    status.error = Some(e.to_string());
                }
            }
        }
        Err(e) => {
            status.status = RunStatus::Failed;
            status.error = Some(e.to_string());
            write_json(&dir.join(STATUS_FILE), &status)?;
            return Err(e);
        }
    }
    write_json(&dir.join(STATUS_FILE), &status)?;
    RunArtifact::load(dir)
}

/// One CSV row per eigenvalue: retained (fine-resolution) values followed
/// by the coarse-resolution values rejected as spurious.
pub fn write_spectrum_csv<W: Write>(w: W, results: &[SpectrumResult]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let fmt = |e: csv::Error| LabError::Format(e.to_string());
    wr.write_record(["alpha", "reynolds", "c_re", "c_im", "growth", "retained"])
        .map_err(fmt)?;
    for r in results {
        let re = r.reynolds.map(|v| v.to_string()).unwrap_or_default();
        let rows = r
            .eigenvalues
            .iter()
            .map(|c| (c, true))
            .chain(r.spurious.iter().map(|c| (c, false)));
        for (c, retained) in rows {
            wr.write_record([
                r.alpha.to_string(),
                re.clone(),
                c.re.to_string(),
                c.im.to_string(),
                (r.alpha * c.im).to_string(),
                retained.to_string(),
            ])
            .map_err(fmt)?;
        }
    }
    wr.flush().map_err(|e| LabError::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::shear::{shear_field, ShearProfile};

    #[test]
    fn snapshot_round_trip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let g = make_grid(2.0, 16, 17).unwrap();
        let u = shear_field(&ShearProfile::new(0.07, 1).unwrap(), &g);
        let s = SolverState {
            t: 4.9,
            u,
            steps: 3,
            dt: 0.05,
        };
        let path = write_snapshot(dir.path(), &s, "abc").unwrap();
        assert!(path.ends_with("t_00004.900000"));
        let raw = fs::read(path.join("u1.bin")).unwrap();
        assert_eq!(raw.len(), 16 * 17 * 8);
        // x-fastest: the second value is (i=1, j=0), a wall node
        assert_eq!(f64::from_le_bytes(raw[8..16].try_into().unwrap()), 0.0);
        let (meta, back) = read_snapshot(&path).unwrap();
        assert_eq!(meta.t, 4.9);
        assert_eq!(meta.y.len(), 17);
        assert_eq!(back.u1.values(), s.u.u1.values());
        assert_eq!(back.u2.values(), s.u.u2.values());
    }

    #[test]
    fn snapshot_names_sort_in_time() {
        assert!(snapshot_name(4.9) < snapshot_name(14.9));
        assert!(snapshot_name(0.0) < snapshot_name(0.1));
    }

    #[test]
    fn completed_run_artifact() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = ExperimentConfig::standard(1, 0.07, 1e4, 0.01, 2, 0.5);
        c.domain.nx = 16;
        c.domain.ny = 33;
        c.perturbation.max_kx = 3;
        c.perturbation.max_ky = 4;
        c.time.snapshot_times = vec![0.0, 0.5];
        let a = run_to_dir(&c, dir.path()).unwrap();
        assert_eq!(a.status.status, RunStatus::Completed);
        assert_eq!(a.status.config_hash, c.hash());
        assert_eq!(a.config, c);
        let s = a.series().unwrap();
        assert_eq!(s.len(), 6);
        assert_eq!(a.snapshots().unwrap().len(), 2);
        let text = fs::read_to_string(&a.diagnostics_csv).unwrap();
        assert!(text.starts_with("t,dev_linear,dev_drift,E,G,E_t,G_t\n"));
    }

    #[test]
    fn failed_run_keeps_partial_output() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = ExperimentConfig::standard(1, 0.07, 1e4, 0.5, 2, 1.0);
        c.domain.nx = 16;
        c.domain.ny = 33;
        c.perturbation.max_kx = 4;
        c.perturbation.max_ky = 4;
        c.time.dt = crate::solver::DtPolicy::Fixed { dt: 0.5 };
        let a = run_to_dir(&c, dir.path()).unwrap();
        assert_eq!(a.status.status, RunStatus::Failed);
        assert!(a.status.error.as_deref().unwrap().contains("CFL"));
        assert_eq!(a.series().unwrap().len(), 1);
    }
}
