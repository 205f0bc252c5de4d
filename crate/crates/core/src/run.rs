//! Drives one configured simulation: builds the initial condition, steps to
//! the horizon, and reports diagnostics and snapshots to an observer as they
//! are produced.

use crate::config::ExperimentConfig;
use crate::diagnostics::{DiagnosticSample, DiagnosticSeries};
use crate::error::{LabError, Result};
use crate::grid::make_grid;
use crate::shear::{shear_field, DriftState};
use crate::solver::{random_perturbation, Solver, SolverState};

/// Receives run output as it is produced.
pub trait RunObserver {
    fn sample(&mut self, _s: &DiagnosticSample) -> Result<()> {
        Ok(())
    }

    fn snapshot(&mut self, _s: &SolverState) -> Result<()> {
        Ok(())
    }
}

/// Discards everything.
pub struct NullObserver;

impl RunObserver for NullObserver {}

/// How a run ended.
#[derive(Debug)]
pub struct RunSummary {
    pub steps: u64,
    pub final_t: f64,
    /// Set when the stepper failed part-way; earlier output stays valid.
    pub failure: Option<LabError>,
}

/// A run kept in memory.
#[derive(Debug)]
pub struct RunOutcome {
    pub series: DiagnosticSeries,
    pub snapshots: Vec<SolverState>,
    pub summary: RunSummary,
}

impl RunOutcome {
    pub fn succeeded(&self) -> bool {
        self.summary.failure.is_none()
    }
}

#[derive(Default)]
struct Collector {
    series: DiagnosticSeries,
    snapshots: Vec<SolverState>,
}

impl RunObserver for Collector {
    fn sample(&mut self, s: &DiagnosticSample) -> Result<()> {
        self.series.push(*s)
    }

    fn snapshot(&mut self, s: &SolverState) -> Result<()> {
        self.snapshots.push(s.clone());
        Ok(())
    }
}

/// `shear_field(c, n) + random_perturbation(amplitude, seed)`.
pub fn initial_state(config: &ExperimentConfig) -> Result<SolverState> {
    let d = &config.domain;
    let grid = make_grid(d.lx, d.nx, d.ny)?;
    let base = shear_field(&config.profile()?, &grid);
    let pert = random_perturbation(&config.perturbation, &grid)?;
    Ok(SolverState::new(&base + &pert))
}

#[derive(Debug, Clone, Copy)]
struct Event {
    t: f64,
    output: bool,
    snapshot: bool,
}

/// Output times `k * interval` up to the horizon (inclusive), merged with
/// the snapshot times.
fn schedule(config: &ExperimentConfig) -> Vec<Event> {
    let t = &config.time;
    let tol = 1e-9 * t.horizon.max(1.0);
    let count = ((t.horizon + tol) / t.output_interval).floor() as usize;
    let mut events: Vec<Event> = (0..=count)
        .map(|k| Event {
            t: k as f64 * t.output_interval,
            output: true,
            snapshot: false,
        })
        .collect();
    if events.last().is_some_and(|e| e.t < t.horizon - tol) {
        events.push(Event {
            t: t.horizon,
            output: true,
            snapshot: false,
        });
    }
    for &s in &t.snapshot_times {
        match events.iter_mut().find(|e| (e.t - s).abs() <= tol) {
            Some(e) => e.snapshot = true,
            None => events.push(Event {
                t: s,
                output: false,
                snapshot: true,
            }),
        }
    }
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    events
}

/// Runs `config` to its horizon, streaming output to `obs`. Setup errors
/// (invalid config, observer I/O) are returned as `Err`; a stepper failure
/// ends the run early and is reported in [`RunSummary::failure`].
pub fn simulate_with(config: &ExperimentConfig, obs: &mut dyn RunObserver) -> Result<RunSummary> {
    let params = config.solver_params();
    let eps = params.epsilon;
    let drift = DriftState::new(config.profile()?, eps, 0.0)?;
    let mut solver = Solver::new(&initial_state(config)?, params)?;
    if !config.in_window() {
        log::warn!(
            "c = {} lies outside the instability window; running anyway",
            config.flow.c
        );
    }
    for ev in schedule(config) {
        if let Err(e) = solver.advance_to(ev.t) {
            log::error!("run stopped at t = {}: {e}", solver.time());
            return Ok(RunSummary {
                steps: solver.steps(),
                final_t: solver.time(),
                failure: Some(e),
            });
        }
        let state = solver.state();
        if ev.output {
            obs.sample(&DiagnosticSample::measure(&state, &drift, eps)?)?;
            log::debug!("t = {:.3}, dt = {}", state.t, solver.dt());
        }
        if ev.snapshot {
            obs.snapshot(&state)?;
        }
    }
    Ok(RunSummary {
        steps: solver.steps(),
        final_t: solver.time(),
        failure: None,
    })
}

/// Runs `config` and keeps everything in memory.
pub fn simulate(config: &ExperimentConfig) -> Result<RunOutcome> {
    let mut c = Collector {
        series: DiagnosticSeries::new(config.time.output_interval),
        ..Default::default()
    };
    let summary = simulate_with(config, &mut c)?;
    Ok(RunOutcome {
        series: c.series,
        snapshots: c.snapshots,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(horizon: f64) -> ExperimentConfig {
        let mut c = ExperimentConfig::standard(1, 0.07, 1e4, 0.0, 1, horizon);
        c.domain.nx = 16;
        c.domain.ny = 33;
        c
    }

    #[test]
    fn schedule_merges_snapshots() {
        let mut c = small(1.0);
        c.time.output_interval = 0.25;
        c.time.snapshot_times = vec![0.0, 0.3, 1.0];
        let ev = schedule(&c);
        let t: Vec<f64> = ev.iter().map(|e| e.t).collect();
        assert_eq!(t, vec![0.0, 0.25, 0.3, 0.5, 0.75, 1.0]);
        assert!(ev[0].snapshot && ev[0].output);
        assert!(ev[2].snapshot && !ev[2].output);
        assert!(ev[5].snapshot);
    }

    #[test]
    fn schedule_includes_unaligned_horizon() {
        let mut c = small(1.05);
        c.time.output_interval = 0.5;
        let t: Vec<f64> = schedule(&c).iter().map(|e| e.t).collect();
        assert_eq!(t, vec![0.0, 0.5, 1.0, 1.05]);
    }

    #[test]
    fn unperturbed_run_samples_on_the_output_grid() {
        let mut c = small(1.0);
        c.time.snapshot_times = vec![0.45];
        let out = simulate(&c).unwrap();
        assert!(out.succeeded());
        assert_eq!(out.series.len(), 11);
        for (k, t) in out.series.times().iter().enumerate() {
            assert_eq!(*t, k as f64 * 0.1);
        }
        assert_eq!(out.snapshots.len(), 1);
        assert_eq!(out.snapshots[0].t, 0.45);
        assert!(out.series.samples().iter().all(|s| s.dev_drift < 1e-8));
    }

    #[test]
    fn failure_is_reported_not_raised() {
        let mut c = small(1.0);
        c.perturbation.amplitude = 0.5;
        c.perturbation.max_kx = 4;
        c.perturbation.max_ky = 4;
        c.time.dt = crate::solver::DtPolicy::Fixed { dt: 0.5 };
        let out = simulate(&c).unwrap();
        assert!(matches!(out.summary.failure, Some(LabError::Cfl { .. })));
        assert_eq!(out.series.len(), 1);
    }
}
