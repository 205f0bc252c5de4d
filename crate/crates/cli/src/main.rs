//! `couette-lab`: run, scan, sweep, validate and inspect channel-flow
//! experiments.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use couette_core::artifact::{
    run_to_dir, write_spectrum_csv, RunArtifact, RunStatus, SPECTRUM_FILE,
};
use couette_core::config::SpectrumConfig;
use couette_core::diagnostics::{Channel, DEFAULT_SMOOTH_WINDOW};
use couette_core::spectrum::scan_alpha;
use couette_core::sweep::{run_sweep, SweepConfig};
use couette_core::validation::{Suite, Tolerances, Validator};
use couette_core::{ExperimentConfig, LabError};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "couette-lab",
    version,
    about = "2D channel-flow laboratory for oscillatory shears"
)]
struct Cli {
    /// Root directory for run output.
    #[arg(long, global = true, env = "COUETTE_LAB_OUT", default_value = "runs")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation into <out-dir>/<label>.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Replace the perturbation seed from the config.
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Rayleigh or Orr-Sommerfeld scan over wavenumbers.
    Spectrum {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a parameter matrix and write a summary of first pulses.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Concurrent runs (defaults to the number of CPUs).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run validation suites and print a JSON report.
    Validate {
        /// Suite to run (repeatable); all suites when omitted.
        #[arg(long)]
        suite: Vec<String>,
        /// TOML file overriding individual tolerances.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Summarize an existing run directory.
    Report {
        /// Run directory produced by `simulate`.
        artifact: PathBuf,
        /// Moving-average window for pulse detection, in samples.
        #[arg(long, default_value_t = DEFAULT_SMOOTH_WINDOW)]
        window: usize,
    },
}

/// An error together with the exit code it maps to.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

/// Configuration problems are usage errors; I/O on the config is too.
fn usage<T>(r: couette_core::Result<T>, path: &Path) -> Result<T, Failure> {
    r.map_err(|e| match e {
        LabError::Config { line, message } => {
            Failure::Usage(anyhow!("{}:{line}: {message}", path.display()))
        }
        e => Failure::Usage(anyhow!("{}: {e}", path.display())),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Simulate {
            config,
            seed_override,
        } => simulate(&config, seed_override, &cli.out_dir),
        Command::Spectrum { config } => spectrum(&config, &cli.out_dir),
        Command::Sweep { config, workers } => sweep(&config, workers, &cli.out_dir),
        Command::Validate { suite, config } => validate(&suite, config.as_deref()),
        Command::Report { artifact, window } => report(&artifact, window),
    }
}

fn simulate(path: &Path, seed: Option<u64>, out: &Path) -> Result<ExitCode, Failure> {
    let mut config = usage(ExperimentConfig::load(path), path)?;
    if let Some(s) = seed {
        config.perturbation.seed = s;
    }
    let dir = out.join(config.label());
    let artifact =
        run_to_dir(&config, &dir).with_context(|| format!("run in {}", dir.display()))?;
    println!("{}", dir.display());
    let st = &artifact.status;
    match st.status {
        RunStatus::Completed => {
            eprintln!(
                "completed: {} steps to t = {} in {:.1}s",
                st.steps, st.final_t, st.wall_clock_seconds
            );
            Ok(ExitCode::SUCCESS)
        }
        _ => Err(Failure::Runtime(anyhow!(
            "run failed at t = {}: {}",
            st.final_t,
            st.error.as_deref().unwrap_or("unknown error")
        ))),
    }
}

fn spectrum(path: &Path, out: &Path) -> Result<ExitCode, Failure> {
    let cfg = usage(SpectrumConfig::load(path), path)?;
    let profile = usage(cfg.profile.build(), path)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("spectrum");
    let dir = out.join(format!("spectrum-{stem}"));
    std::fs::create_dir_all(&dir).with_context(|| format!("create {}", dir.display()))?;
    std::fs::copy(path, dir.join("spectrum.toml")).context("copy config")?;

    let alphas = cfg.alpha_list();
    let reynolds: Vec<Option<f64>> = if cfg.reynolds.is_empty() {
        vec![None]
    } else {
        cfg.reynolds.iter().map(|&r| Some(r)).collect()
    };
    let mut results = Vec::new();
    let mut scan_rows = String::from("alpha,reynolds,max_growth,error\n");
    for re in reynolds {
        let scan =
            scan_alpha(&profile, &alphas, re, cfg.ny).map_err(|e| Failure::Runtime(e.into()))?;
        let re_text = re.map(|r| r.to_string()).unwrap_or_default();
        for e in &scan.entries {
            let g = e.max_growth.map(|g| g.to_string()).unwrap_or_default();
            let err = e.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
            scan_rows.push_str(&format!("{},{re_text},{g},{err}\n", e.alpha));
            if let Some(msg) = &e.error {
                log::warn!("alpha = {}: {msg}", e.alpha);
            }
        }
        let label = re
            .map(|r| format!("R = {r}"))
            .unwrap_or_else(|| "inviscid".into());
        match scan.best() {
            Some(b) => eprintln!(
                "{label}: leading growth rate {:.6} at alpha = {:.6}",
                b.max_growth.unwrap_or(f64::NAN),
                b.alpha
            ),
            None => eprintln!("{label}: no converged eigenvalues"),
        }
        results.extend(scan.entries.into_iter().filter_map(|e| e.result));
    }
    let csv_path = dir.join(SPECTRUM_FILE);
    let f = std::fs::File::create(&csv_path)
        .with_context(|| format!("create {}", csv_path.display()))?;
    write_spectrum_csv(std::io::BufWriter::new(f), &results)
        .map_err(|e| Failure::Runtime(e.into()))?;
    std::fs::write(dir.join("scan.csv"), scan_rows).context("write scan.csv")?;
    println!("{}", dir.display());
    Ok(ExitCode::SUCCESS)
}

fn sweep(path: &Path, workers: Option<usize>, out: &Path) -> Result<ExitCode, Failure> {
    let cfg = usage(SweepConfig::load(path), path)?;
    // surface invalid cells before anything is written
    usage(cfg.expand(), path)?;
    let workers = workers
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1);
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    let dir = out.join(stem);
    let rows = run_sweep(&cfg, &dir, workers).map_err(|e| Failure::Runtime(e.into()))?;
    let mut stderr = std::io::stderr().lock();
    let _ = writeln!(
        stderr,
        "{:<36} {:>9} {:>8} {:>8}  status",
        "run", "sigma", "t_max", "t_end"
    );
    let fmt =
        |v: Option<f64>, p: usize| v.map(|v| format!("{v:.p$}")).unwrap_or_else(|| "-".into());
    let mut failed = 0;
    for r in &rows {
        let p = r.pulse.as_ref();
        let _ = writeln!(
            stderr,
            "{:<36} {:>9} {:>8} {:>8}  {:?}{}",
            r.config.label(),
            fmt(p.map(|p| p.sigma), 4),
            fmt(p.map(|p| p.t_max), 1),
            fmt(p.and_then(|p| p.t_end), 1),
            r.status,
            r.error
                .as_deref()
                .map(|e| format!(" ({e})"))
                .unwrap_or_default()
        );
        if r.status != RunStatus::Completed {
            failed += 1;
        }
    }
    println!("{}", dir.join("summary.csv").display());
    if failed > 0 {
        return Err(Failure::Runtime(anyhow!(
            "{failed} of {} runs failed",
            rows.len()
        )));
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(names: &[String], tol: Option<&Path>) -> Result<ExitCode, Failure> {
    let suites = if names.is_empty() {
        Suite::ALL.to_vec()
    } else {
        names
            .iter()
            .map(|n| n.parse::<Suite>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::Usage(e.into()))?
    };
    let tolerances = match tol {
        Some(p) => usage(Tolerances::load(p), p)?,
        None => Tolerances::default(),
    };
    let v = Validator::new(tolerances);
    let reports: Vec<_> = suites
        .into_iter()
        .map(|s| {
            let r = v.run(s);
            eprintln!(
                "{:<21} {}  {}",
                s.name(),
                if r.passed { "PASS" } else { "FAIL" },
                r.summary
            );
            r
        })
        .collect();
    let passed = reports.iter().all(|r| r.passed);
    let doc = serde_json::json!({ "passed": passed, "suites": reports });
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).context("serialize report")?
    );
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn report(dir: &Path, window: usize) -> Result<ExitCode, Failure> {
    let a =
        RunArtifact::load(dir).map_err(|e| Failure::Usage(anyhow!("{}: {e}", dir.display())))?;
    let series = a.series().map_err(|e| Failure::Runtime(e.into()))?;
    let pulse = series.first_pulse(Channel::DevDrift, window);
    let snapshots = a.snapshots().map_err(|e| Failure::Runtime(e.into()))?;
    let doc = serde_json::json!({
        "label": a.config.label(),
        "status": a.status,
        "samples": series.len(),
        "snapshots": snapshots.len(),
        "modulation_ratio": series.modulation_ratio(),
        "first_pulse": pulse.as_ref().ok(),
        "first_pulse_error": pulse.as_ref().err().map(|e| e.to_string()),
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).context("serialize report")?
    );
    Ok(ExitCode::SUCCESS)
}
