//! Oracle, invariant and reproduction suites. Each suite returns a
//! [`SuiteReport`]; tolerances come from [`Tolerances`], which can be loaded
//! from TOML to tighten or loosen individual checks.
//!
//! Simulation-backed suites share one cache of runs, so the pulse, sigma,
//! modulation and dissipation checks reuse the same sweep.

use crate::config::ExperimentConfig;
use crate::diagnostics::{
    deviation_from_linear, energy, enstrophy, Channel, DiagnosticSeries, PulseReport,
};
use crate::error::{LabError, Result};
use crate::field::FlowField;
use crate::grid::make_grid;
use crate::run::{simulate, RunOutcome};
use crate::shear::{drift_exit_time, drift_field, shear_field, DriftState, ShearProfile};
use crate::solver::{
    random_perturbation, DtPolicy, PerturbationSpec, Solver, SolverParams, SolverState,
};
use crate::spectrum::{
    admissible_alphas, orr_sommerfeld_spectrum, rayleigh_spectrum, scan_alpha, BaseProfile,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Max-norm error against the drifting shear at `t = 10`.
    pub drift_max_error: f64,
    /// Smallest accepted observed temporal order under refinement.
    pub drift_min_order: f64,
    pub couette_max_deviation: f64,
    pub euler_relative_drift: f64,
    /// Growth rates at or below this count as stable.
    pub growth_threshold: f64,
    /// Largest accepted ratio between the best growth rates across `n`.
    pub growth_ratio_max: f64,
    /// Relative gap to the Rayleigh rate accepted at the largest `R`.
    pub inviscid_limit_band: f64,
    pub pulse_target: f64,
    pub pulse_band: f64,
    pub exit_time_range: [f64; 2],
    pub sigma_range: [f64; 2],
    pub sigma_spread: f64,
    pub modulation_range: [f64; 2],
    pub dissipation_band: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            drift_max_error: 1e-6,
            drift_min_order: 1.8,
            couette_max_deviation: 1e-10,
            euler_relative_drift: 1e-4,
            growth_threshold: 1e-6,
            growth_ratio_max: 1.5,
            inviscid_limit_band: 0.10,
            pulse_target: 35.0,
            pulse_band: 0.30,
            exit_time_range: [35.0, 36.0],
            sigma_range: [0.05, 0.25],
            sigma_spread: 0.30,
            modulation_range: [30.0, 300.0],
            dissipation_band: 0.05,
        }
    }
}

impl Tolerances {
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        toml::from_str(&src).map_err(|e| crate::config::config_error(&src, &e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    DriftOracle,
    CouetteSteady,
    EulerConservation,
    Romanov,
    InstabilityWindow,
    InviscidLimit,
    PulseTiming,
    SigmaBand,
    EnstrophyModulation,
    DissipationIdentity,
    Determinism,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::DriftOracle,
        Suite::CouetteSteady,
        Suite::EulerConservation,
        Suite::Romanov,
        Suite::InstabilityWindow,
        Suite::InviscidLimit,
        Suite::PulseTiming,
        Suite::SigmaBand,
        Suite::EnstrophyModulation,
        Suite::DissipationIdentity,
        Suite::Determinism,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::DriftOracle => "drift-oracle",
            Suite::CouetteSteady => "couette-steady",
            Suite::EulerConservation => "euler-conservation",
            Suite::Romanov => "romanov",
            Suite::InstabilityWindow => "instability-window",
            Suite::InviscidLimit => "inviscid-limit",
            Suite::PulseTiming => "pulse-timing",
            Suite::SigmaBand => "sigma-band",
            Suite::EnstrophyModulation => "enstrophy-modulation",
            Suite::DissipationIdentity => "dissipation-identity",
            Suite::Determinism => "determinism",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| LabError::InvalidParameter(format!("unknown suite '{s}'")))
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub summary: String,
    pub metrics: BTreeMap<String, f64>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport {
            suite,
            passed: true,
            summary: String::new(),
            metrics: BTreeMap::new(),
        }
    }

    fn metric(&mut self, key: impl Into<String>, v: f64) {
        self.metrics.insert(key.into(), v);
    }

    /// Records a check; the suite fails if any check fails.
    fn check(&mut self, ok: bool, what: impl AsRef<str>) {
        if !self.summary.is_empty() {
            self.summary.push_str("; ");
        }
        self.summary.push_str(what.as_ref());
        if !ok {
            self.summary.push_str(" [FAIL]");
            self.passed = false;
        }
    }

    fn error(suite: Suite, e: LabError) -> Self {
        SuiteReport {
            suite,
            passed: false,
            summary: format!("error: {e}"),
            metrics: BTreeMap::new(),
        }
    }
}

/// Reynolds numbers and seeds of the reproduction sweep.
pub const SWEEP_N: [u32; 3] = [1, 2, 3];
pub const SWEEP_REYNOLDS: [f64; 2] = [1e4, 2e4];
pub const SWEEP_SEEDS: [u64; 3] = [1, 2, 3];
/// Horizon of the sweep runs; long enough for the first pulse of every
/// cell to rise, peak and decay.
pub const SWEEP_HORIZON: f64 = 50.0;

/// Runs suites, caching simulations shared between them.
pub struct Validator {
    pub tol: Tolerances,
    runs: Mutex<HashMap<String, Arc<RunOutcome>>>,
}

impl Default for Validator {
    fn default() -> Self {
        Self::new(Tolerances::default())
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `max |fd - mid| / max |mid|` between the forward difference of `value`
/// and the midpoint average of `rate`, over samples with `t` in `[t0, t1]`.
pub fn rate_mismatch(
    series: &DiagnosticSeries,
    value: Channel,
    rate: Channel,
    t0: f64,
    t1: f64,
) -> f64 {
    let t = series.times();
    let v = series.channel(value);
    let r = series.channel(rate);
    let (mut err, mut scale) = (0.0f64, 0.0f64);
    for i in 0..t.len().saturating_sub(1) {
        if t[i] < t0 || t[i + 1] > t1 {
            continue;
        }
        let fd = (v[i + 1] - v[i]) / (t[i + 1] - t[i]);
        let mid = 0.5 * (r[i] + r[i + 1]);
        err = err.max((fd - mid).abs());
        scale = scale.max(mid.abs());
    }
    if scale > 0.0 {
        err / scale
    } else {
        f64::INFINITY
    }
}

impl Validator {
    pub fn new(tol: Tolerances) -> Self {
        Validator {
            tol,
            runs: Mutex::new(HashMap::new()),
        }
    }

    pub fn run(&self, suite: Suite) -> SuiteReport {
        let r = match suite {
            Suite::DriftOracle => self.drift_oracle(),
            Suite::CouetteSteady => self.couette_steady(),
            Suite::EulerConservation => self.euler_conservation(),
            Suite::Romanov => self.romanov(),
            Suite::InstabilityWindow => self.instability_window(),
            Suite::InviscidLimit => self.inviscid_limit(),
            Suite::PulseTiming => self.pulse_timing(),
            Suite::SigmaBand => self.sigma_band(),
            Suite::EnstrophyModulation => self.enstrophy_modulation(),
            Suite::DissipationIdentity => self.dissipation_identity(),
            Suite::Determinism => self.determinism(),
        };
        r.unwrap_or_else(|e| SuiteReport::error(suite, e))
    }

    /// The reference-matrix run for one sweep cell, simulated once.
    pub fn sweep_run(&self, n: u32, reynolds: f64, seed: u64) -> Result<Arc<RunOutcome>> {
        let cfg = ExperimentConfig::standard(n, 0.07, reynolds, 0.01, seed, SWEEP_HORIZON);
        let key = cfg.hash();
        if let Some(r) = self.runs.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(r));
        }
        log::info!("validation run {}", cfg.label());
        let out = Arc::new(simulate(&cfg)?);
        if let Some(e) = &out.summary.failure {
            return Err(LabError::InvalidParameter(format!(
                "run {} failed: {e}",
                cfg.label()
            )));
        }
        self.runs
            .lock()
            .expect("cache lock")
            .insert(key, Arc::clone(&out));
        Ok(out)
    }

    fn first_pulse(&self, n: u32, reynolds: f64, seed: u64) -> Result<PulseReport> {
        self.sweep_run(n, reynolds, seed)?
            .series
            .first_pulse(Channel::DevDrift, crate::diagnostics::DEFAULT_SMOOTH_WINDOW)
    }

    fn drift_oracle(&self) -> Result<SuiteReport> {
        let mut rep = SuiteReport::new(Suite::DriftOracle);
        let p = ShearProfile::new(0.07, 1)?;
        let eps = 1e-4;
        let run = |nx: usize, ny: usize, dt: DtPolicy| -> Result<f64> {
            let g = make_grid(2.0, nx, ny)?;
            let mut s = Solver::new(
                &SolverState::new(shear_field(&p, &g)),
                SolverParams::new(eps, dt, true),
            )?;
            s.advance_to(10.0)?;
            let exact = drift_field(&DriftState::new(p, eps, s.time())?, &g);
            Ok((&s.velocity() - &exact).max_abs())
        };
        let err = run(128, 129, DtPolicy::default())?;
        rep.metric("max_error", err);
        rep.check(
            err <= self.tol.drift_max_error,
            format!(
                "max error at t=10 (128x129) {err:.3e} <= {:.0e}",
                self.tol.drift_max_error
            ),
        );
        // dt halves and Ny doubles at each level; the flow is x-independent
        let levels = [(1.0, 65), (0.5, 129), (0.25, 257)];
        let errs = levels
            .iter()
            .map(|&(dt, ny)| run(16, ny, DtPolicy::Fixed { dt }))
            .collect::<Result<Vec<_>>>()?;
        for (i, w) in errs.windows(2).enumerate() {
            let order = (w[0] / w[1]).log2();
            rep.metric(format!("order_{}", i + 1), order);
            rep.check(
                order >= self.tol.drift_min_order,
                format!(
                    "refinement {}->{}: error {:.2e}->{:.2e}, order {order:.2}",
                    levels[i].0,
                    levels[i + 1].0,
                    w[0],
                    w[1]
                ),
            );
        }
        Ok(rep)
    }

    fn couette_steady(&self) -> Result<SuiteReport> {
        let mut rep = SuiteReport::new(Suite::CouetteSteady);
        let g = make_grid(2.0, 128, 129)?;
        let mut s = Solver::new(
            &SolverState::new(FlowField::couette(&g)),
            SolverParams::new(1e-4, DtPolicy::default(), true),
        )?;
        let mut worst = 0.0f64;
        for k in 0..=100 {
            s.advance_to(k as f64 * 0.1)?;
            worst = worst.max(deviation_from_linear(&s.velocity()));
        }
        rep.metric("max_deviation", worst);
        rep.check(
            worst <= self.tol.couette_max_deviation,
            format!(
                "max deviation over [0,10] {worst:.3e} <= {:.0e}",
                self.tol.couette_max_deviation
            ),
        );
        Ok(rep)
    }

    fn euler_conservation(&self) -> Result<SuiteReport> {
        let mut rep = SuiteReport::new(Suite::EulerConservation);
        let g = make_grid(2.0, 128, 129)?;
        let pert = random_perturbation(&PerturbationSpec::new(0.01, 1), &g)?;
        let u0 = &shear_field(&ShearProfile::new(0.07, 1)?, &g) + &pert;
        let (e0, g0) = (energy(&u0), enstrophy(&u0));
        let mut s = Solver::new(
            &SolverState::new(u0),
            SolverParams::new(0.0, DtPolicy::default(), true),
        )?;
        let (mut de, mut dg) = (0.0f64, 0.0f64);
        for k in 1..=50 {
            s.advance_to(k as f64 * 0.1)?;
            let u = s.velocity();
            de = de.max((energy(&u) - e0).abs() / e0);
            dg = dg.max((enstrophy(&u) - g0).abs() / g0);
        }
        rep.metric("energy_drift", de);
        rep.metric("enstrophy_drift", dg);
        let tol = self.tol.euler_relative_drift;
        rep.check(de <= tol, format!("max |E-E0|/E0 {de:.2e} <= {tol:.0e}"));
        rep.check(dg <= tol, format!("max |G-G0|/G0 {dg:.2e} <= {tol:.0e}"));
        Ok(rep)
    }

    fn romanov(&self) -> Result<SuiteReport> {
        let mut rep = SuiteReport::new(Suite::Romanov);
        let mut c_fit = f64::INFINITY;
        let mut all_negative = true;
        let mut worst = f64::NEG_INFINITY;
        for &r in &[1e3, 1e4, 2e4] {
            for &alpha in &[0.5, 1.0, 2.0] {
                let res = orr_sommerfeld_spectrum(&BaseProfile::Couette, alpha, r, 65)?;
                let lead = res.leading_growth_rate().ok_or_else(|| {
                    LabError::EigenFailure(format!(
                        "no converged Couette mode at R={r}, alpha={alpha}"
                    ))
                })?;
                all_negative &= res.growth_rates().iter().all(|&g| g < 0.0);
                worst = worst.max(lead);
                // the largest C with lead <= -C/R over the grid
                c_fit = c_fit.min(-lead * r);
                rep.metric(format!("lead_R{r}_a{alpha}"), lead);
            }
        }
        rep.metric("least_damped", worst);
        rep.metric("fitted_C", c_fit);
        rep.check(
            all_negative,
            format!("all retained growth rates < 0 (least damped {worst:.4e})"),
        );
        rep.check(
            c_fit > 0.0,
            format!("bound lead <= -C/R holds with C = {c_fit:.3}"),
        );
        Ok(rep)
    }

    fn instability_window(&self) -> Result<SuiteReport> {
        let mut rep = SuiteReport::new(Suite::InstabilityWindow);
        let alphas = admissible_alphas(2.0, 8);
        let thr = self.tol.growth_threshold;
        let mut best = Vec::new();
        for &n in &[1u32, 2, 3] {
            let scan = scan_alpha(
                &BaseProfile::Oscillatory(ShearProfile::new(0.07, n)?),
                &alphas,
                None,
                129,
            )?;
            let b = scan.best().and_then(|e| e.max_growth.map(|g| (e.alpha, g)));
            match b {
                Some((a, g)) => {
                    rep.metric(format!("best_growth_n{n}"), g);
                    rep.metric(format!("best_alpha_n{n}"), a);
                    rep.check(
                        g > thr,
                        format!("c=0.07 n={n}: growth {g:.4} at alpha={a:.4}"),
                    );
                    best.push(g);
                }
                None => rep.check(false, format!("c=0.07 n={n}: no converged eigenvalue")),
            }
        }
        if best.len() == 3 {
            let ratio = best.iter().cloned().fold(f64::MIN, f64::max)
                / best.iter().cloned().fold(f64::MAX, f64::min);
            rep.metric("growth_ratio", ratio);
            rep.check(
                ratio <= self.tol.growth_ratio_max,
                format!(
                    "max/min growth across n {ratio:.3} <= {}",
                    self.tol.growth_ratio_max
                ),
            );
        }
        for &n in &[1u32, 2, 3] {
            let scan = scan_alpha(
                &BaseProfile::Oscillatory(ShearProfile::new(0.03, n)?),
                &alphas,
                None,
                129,
            )?;
            let worst = scan
                .entries
                .iter()
                .filter_map(|e| e.max_growth.map(|g| (e.alpha, g)))
                .max_by(|a, b| a.1.total_cmp(&b.1));
            let (a, g) = worst.unwrap_or((f64::NAN, f64::NEG_INFINITY));
            rep.metric(format!("below_window_growth_n{n}"), g);
            rep.check(
                g <= thr,
                format!("c=0.03 n={n}: largest growth {g:.4} (alpha={a:.4}) <= {thr:.0e}"),
            );
        }
        Ok(rep)
    }

    fn inviscid_limit(&self) -> Result<SuiteReport> {
        let mut rep = SuiteReport::new(Suite::InviscidLimit);
        let profile = BaseProfile::Oscillatory(ShearProfile::new(0.07, 1)?);
        let scan = scan_alpha(&profile, &admissible_alphas(2.0, 8), None, 129)?;
        let best = scan
            .best()
            .and_then(|e| e.max_growth.map(|g| (e.alpha, g)))
            .ok_or_else(|| LabError::EigenFailure("no unstable Rayleigh mode".into()))?;
        let (alpha, rayleigh) = best;
        let rayleigh = rayleigh_spectrum(&profile, alpha, 129)?
            .leading_growth_rate()
            .unwrap_or(rayleigh);
        rep.metric("alpha", alpha);
        rep.metric("rayleigh", rayleigh);
        let mut gaps = Vec::new();
        for &r in &[1e3, 1e4, 1e5] {
            let g = orr_sommerfeld_spectrum(&profile, alpha, r, 129)?
                .leading_growth_rate()
                .ok_or_else(|| LabError::EigenFailure(format!("no converged OS mode at R={r}")))?;
            rep.metric(format!("os_R{r}"), g);
            gaps.push(((g - rayleigh) / rayleigh).abs());
        }
        let monotone = gaps.windows(2).all(|w| w[1] < w[0]);
        rep.check(
            monotone,
            format!(
                "relative gaps to Rayleigh {:.4} {:.4} {:.4} decrease",
                gaps[0], gaps[1], gaps[2]
            ),
        );
        rep.check(
            gaps[2] <= self.tol.inviscid_limit_band,
            format!(
                "gap at R=1e5 {:.4} <= {}",
                gaps[2], self.tol.inviscid_limit_band
            ),
        );
        Ok(rep)
    }

    fn pulse_timing(&self) -> Result<SuiteReport> {
        let mut rep = SuiteReport::new(Suite::PulseTiming);
        let t = drift_exit_time(0.07, 1, 1e-4)?;
        rep.metric("exit_time", t);
        let [lo, hi] = self.tol.exit_time_range;
        rep.check(
            (lo..=hi).contains(&t),
            format!("drift exit time {t:.3} in [{lo}, {hi}]"),
        );
        let mut ends = Vec::new();
        for &seed in &SWEEP_SEEDS {
            let p = self.first_pulse(1, 1e4, seed)?;
            match p.t_end {
                Some(e) => {
                    rep.metric(format!("t_end_seed{seed}"), e);
                    ends.push(e);
                }
                None => rep.check(
                    false,
                    format!("seed {seed}: first pulse does not end before the horizon"),
                ),
            }
        }
        if !ends.is_empty() {
            let m = median(ends.clone());
            let (lo, hi) = (
                self.tol.pulse_target * (1.0 - self.tol.pulse_band),
                self.tol.pulse_target * (1.0 + self.tol.pulse_band),
            );
            rep.metric("median_t_end", m);
            let listed: Vec<String> = ends.iter().map(|e| format!("{e:.1}")).collect();
            rep.check(
                (lo..=hi).contains(&m),
                format!(
                    "median first-pulse end {m:.2} (seeds: {}) in [{lo:.1}, {hi:.1}]",
                    listed.join(", ")
                ),
            );
        }
        Ok(rep)
    }

    fn sigma_band(&self) -> Result<SuiteReport> {
        let mut rep = SuiteReport::new(Suite::SigmaBand);
        let [lo, hi] = self.tol.sigma_range;
        for &n in &SWEEP_N {
            let mut medians = Vec::new();
            for &r in &SWEEP_REYNOLDS {
                let sig = SWEEP_SEEDS
                    .iter()
                    .map(|&s| self.first_pulse(n, r, s).map(|p| p.sigma))
                    .collect::<Result<Vec<_>>>()?;
                let m = median(sig);
                rep.metric(format!("sigma_n{n}_R{r}"), m);
                rep.check(
                    (lo..=hi).contains(&m),
                    format!("n={n} R={r}: median sigma {m:.4}"),
                );
                medians.push(m);
            }
            let (mx, mn) = (
                medians.iter().cloned().fold(f64::MIN, f64::max),
                medians.iter().cloned().fold(f64::MAX, f64::min),
            );
            let spread = (mx - mn) / mn;
            rep.metric(format!("spread_n{n}"), spread);
            rep.check(
                spread <= self.tol.sigma_spread,
                format!("n={n}: spread across R {:.1}%", 100.0 * spread),
            );
        }
        Ok(rep)
    }

    fn enstrophy_modulation(&self) -> Result<SuiteReport> {
        let mut rep = SuiteReport::new(Suite::EnstrophyModulation);
        let mut ratios = Vec::new();
        for &seed in &SWEEP_SEEDS {
            let ratio = self
                .sweep_run(1, 1e4, seed)?
                .series
                .modulation_ratio()
                .ok_or_else(|| LabError::InvalidParameter("E_t vanishes identically".into()))?;
            rep.metric(format!("ratio_seed{seed}"), ratio);
            ratios.push(ratio);
        }
        let m = median(ratios.clone());
        rep.metric("median_ratio", m);
        let [lo, hi] = self.tol.modulation_range;
        let listed: Vec<String> = ratios.iter().map(|r| format!("{r:.0}")).collect();
        rep.check(
            (lo..=hi).contains(&m),
            format!(
                "median max|G_t|/max|E_t| {m:.1} (seeds: {}) in [{lo}, {hi}]",
                listed.join(", ")
            ),
        );
        Ok(rep)
    }

    fn dissipation_identity(&self) -> Result<SuiteReport> {
        let mut rep = SuiteReport::new(Suite::DissipationIdentity);
        let run = self.sweep_run(1, 1e4, SWEEP_SEEDS[0])?;
        let p = run
            .series
            .first_pulse(Channel::DevDrift, crate::diagnostics::DEFAULT_SMOOTH_WINDOW)?;
        let (t0, t1) = (p.t_min, p.t_end.unwrap_or(p.t_max));
        let me = rate_mismatch(&run.series, Channel::Energy, Channel::EnergyRate, t0, t1);
        let mg = rate_mismatch(
            &run.series,
            Channel::Enstrophy,
            Channel::EnstrophyRate,
            t0,
            t1,
        );
        rep.metric("energy_mismatch", me);
        rep.metric("enstrophy_mismatch", mg);
        let b = self.tol.dissipation_band;
        rep.check(
            me <= b,
            format!("dE/dt vs E_t on [{t0:.1}, {t1:.1}]: {:.2}%", 100.0 * me),
        );
        rep.check(mg <= b, format!("dG/dt vs G_t: {:.2}%", 100.0 * mg));
        Ok(rep)
    }

    fn determinism(&self) -> Result<SuiteReport> {
        let mut rep = SuiteReport::new(Suite::Determinism);
        let cfg = ExperimentConfig::standard(1, 0.07, 1e4, 0.01, 7, 5.0);
        let csv = || -> Result<Vec<u8>> {
            let out = simulate(&cfg)?;
            let mut buf = Vec::new();
            out.series.write_csv(&mut buf)?;
            Ok(buf)
        };
        let (a, b) = (csv()?, csv()?);
        rep.metric("bytes", a.len() as f64);
        rep.check(
            a == b,
            format!(
                "two runs of {} give identical CSV ({} bytes)",
                cfg.label(),
                a.len()
            ),
        );
        Ok(rep)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn tolerances_load_partial_overrides() {
        let t: Tolerances = toml::from_str("drift_max_error = 1e-20").unwrap();
        assert_eq!(t.drift_max_error, 1e-20);
        assert_eq!(t.sigma_range, [0.05, 0.25]);
        assert!(toml::from_str::<Tolerances>("bogus = 1").is_err());
    }

    #[test]
    fn median_of_odd_and_even() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn rate_mismatch_is_zero_for_consistent_series() {
        use crate::diagnostics::DiagnosticSample;
        let mut s = DiagnosticSeries::new(0.1);
        for k in 0..20 {
            let t = k as f64 * 0.1;
            s.push(DiagnosticSample {
                t,
                dev_linear: 0.0,
                dev_drift: 0.0,
                energy: 2.0 * t,
                enstrophy: t * t,
                energy_rate: 2.0,
                enstrophy_rate: 2.0 * t,
            })
            .unwrap();
        }
        assert!(rate_mismatch(&s, Channel::Energy, Channel::EnergyRate, 0.0, 2.0) < 1e-12);
        assert!(rate_mismatch(&s, Channel::Enstrophy, Channel::EnstrophyRate, 0.0, 2.0) < 1e-12);
    }

    #[test]
    fn suites_with_a_perturbed_tolerance_fail_in_a_targeted_way() {
        let v = Validator::new(Tolerances {
            couette_max_deviation: -1.0,
            ..Tolerances::default()
        });
        let r = v.run(Suite::CouetteSteady);
        assert!(!r.passed);
        assert!(r.summary.contains("[FAIL]"));
    }
}
