//! Scalar observables of a run: deviations from the linear and the drifting
//! shear, kinetic energy, enstrophy and their viscous rates, plus detection
//! of the first growth pulse and its exponential rate.

use crate::error::{LabError, Result};
use crate::field::{integrate, l2_norm, vorticity, FlowField, ScalarField};
use crate::shear::{drift_field, DriftState};
use crate::solver::SolverState;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

/// Default moving-average window, in output samples.
pub const DEFAULT_SMOOTH_WINDOW: usize = 5;

/// `||u - (y, 0)||`.
pub fn deviation_from_linear(u: &FlowField) -> f64 {
    l2_norm(&(u - &FlowField::couette(u.grid())))
}

/// `||u - U(t)||` against the drifting shear. The state's time must match
/// `d.t`.
pub fn deviation_from_drift(s: &SolverState, d: &DriftState) -> Result<f64> {
    if (s.t - d.t).abs() > 1e-9 * s.t.abs().max(1.0) {
        return Err(LabError::TimeMismatch {
            field_t: s.t,
            drift_t: d.t,
        });
    }
    Ok(l2_norm(&(&s.u - &drift_field(d, s.u.grid()))))
}

/// `E = int (u1^2 + u2^2)`.
pub fn energy(u: &FlowField) -> f64 {
    integrate(&u.u1.map(|v| v * v)) + integrate(&u.u2.map(|v| v * v))
}

/// `G = int Omega^2`.
pub fn enstrophy(u: &FlowField) -> f64 {
    integrate(&vorticity(u).map(|v| v * v))
}

fn laplacian(f: &ScalarField) -> ScalarField {
    &f.ddx().ddx() + &f.ddy().ddy()
}

fn inner(a: &ScalarField, b: &ScalarField) -> f64 {
    integrate(&a.zip_with(b, |x, y| x * y).expect("fields share a grid"))
}

/// `E_t = 2 eps int u_i lap(u_i)`; equals `dE/dt` for the Navier–Stokes
/// flow since advection, pressure and the moving wall contribute nothing.
pub fn energy_rate(u: &FlowField, epsilon: f64) -> f64 {
    if epsilon == 0.0 {
        return 0.0;
    }
    2.0 * epsilon * (inner(&u.u1, &laplacian(&u.u1)) + inner(&u.u2, &laplacian(&u.u2)))
}

/// `G_t = 2 eps int Omega lap(Omega)`.
pub fn enstrophy_rate(u: &FlowField, epsilon: f64) -> f64 {
    if epsilon == 0.0 {
        return 0.0;
    }
    let w = vorticity(u);
    2.0 * epsilon * inner(&w, &laplacian(&w))
}

/// Eq.-style growth rate `ln(M/m) / dt`.
pub fn growth_rate(m: f64, big_m: f64, dt: f64) -> Result<f64> {
    if !(m > 0.0 && big_m > 0.0 && dt > 0.0) {
        return Err(LabError::InvalidParameter(format!(
            "growth rate needs m, M, dt > 0 (got {m}, {big_m}, {dt})"
        )));
    }
    Ok((big_m / m).ln() / dt)
}

/// One row of the diagnostics table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSample {
    pub t: f64,
    pub dev_linear: f64,
    pub dev_drift: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "G")]
    pub enstrophy: f64,
    #[serde(rename = "E_t")]
    pub energy_rate: f64,
    #[serde(rename = "G_t")]
    pub enstrophy_rate: f64,
}

impl DiagnosticSample {
    /// Evaluates every channel on `s`, with the drift reference built from
    /// `d` at the state's time.
    pub fn measure(s: &SolverState, d: &DriftState, epsilon: f64) -> Result<Self> {
        let d = d.at(s.t);
        Ok(DiagnosticSample {
            t: s.t,
            dev_linear: deviation_from_linear(&s.u),
            dev_drift: deviation_from_drift(s, &d)?,
            energy: energy(&s.u),
            enstrophy: enstrophy(&s.u),
            energy_rate: energy_rate(&s.u, epsilon),
            enstrophy_rate: enstrophy_rate(&s.u, epsilon),
        })
    }

    fn values(&self) -> [f64; 7] {
        [
            self.t,
            self.dev_linear,
            self.dev_drift,
            self.energy,
            self.enstrophy,
            self.energy_rate,
            self.enstrophy_rate,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    #[serde(rename = "dev_linear")]
    DevLinear,
    #[serde(rename = "dev_drift")]
    DevDrift,
    #[serde(rename = "E")]
    Energy,
    #[serde(rename = "G")]
    Enstrophy,
    #[serde(rename = "E_t")]
    EnergyRate,
    #[serde(rename = "G_t")]
    EnstrophyRate,
}

impl Channel {
    pub const ALL: [Channel; 6] = [
        Channel::DevLinear,
        Channel::DevDrift,
        Channel::Energy,
        Channel::Enstrophy,
        Channel::EnergyRate,
        Channel::EnstrophyRate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Channel::DevLinear => "dev_linear",
            Channel::DevDrift => "dev_drift",
            Channel::Energy => "E",
            Channel::Enstrophy => "G",
            Channel::EnergyRate => "E_t",
            Channel::EnstrophyRate => "G_t",
        }
    }

    fn of(self, s: &DiagnosticSample) -> f64 {
        match self {
            Channel::DevLinear => s.dev_linear,
            Channel::DevDrift => s.dev_drift,
            Channel::Energy => s.energy,
            Channel::Enstrophy => s.enstrophy,
            Channel::EnergyRate => s.energy_rate,
            Channel::EnstrophyRate => s.enstrophy_rate,
        }
    }
}

impl std::str::FromStr for Channel {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Channel::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| LabError::InvalidParameter(format!("unknown channel '{s}'")))
    }
}

/// Time-stamped diagnostics at a nominal sampling interval.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticSeries {
    pub interval: f64,
    samples: Vec<DiagnosticSample>,
}

impl DiagnosticSeries {
    pub fn new(interval: f64) -> Self {
        DiagnosticSeries {
            interval,
            samples: Vec::new(),
        }
    }

    /// Appends a sample; stamps must increase strictly and values be finite.
    pub fn push(&mut self, s: DiagnosticSample) -> Result<()> {
        if s.values().iter().any(|v| !v.is_finite()) {
            return Err(LabError::NonFinite(format!("diagnostics at t = {}", s.t)));
        }
        if let Some(last) = self.samples.last() {
            if s.t <= last.t {
                return Err(LabError::InvalidParameter(format!(
                    "diagnostic stamps must increase ({} after {})",
                    s.t, last.t
                )));
            }
        }
        self.samples.push(s);
        Ok(())
    }

    pub fn samples(&self) -> &[DiagnosticSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn channel(&self, c: Channel) -> Vec<f64> {
        self.samples.iter().map(|s| c.of(s)).collect()
    }

    /// `max |G_t| / max |E_t|` over the series.
    pub fn modulation_ratio(&self) -> Option<f64> {
        let peak = |c| self.channel(c).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let (e, g) = (peak(Channel::EnergyRate), peak(Channel::EnstrophyRate));
        (e > 0.0).then(|| g / e)
    }

    /// CSV with header `t,dev_linear,dev_drift,E,G,E_t,G_t`; values are
    /// written in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for s in &self.samples {
            wr.serialize(s)
                .map_err(|e| LabError::Format(e.to_string()))?;
        }
        if self.samples.is_empty() {
            wr.write_record(["t", "dev_linear", "dev_drift", "E", "G", "E_t", "G_t"])
                .map_err(|e| LabError::Format(e.to_string()))?;
        }
        wr.flush().map_err(|e| LabError::Format(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut series = DiagnosticSeries::default();
        for row in rd.deserialize() {
            let s: DiagnosticSample = row.map_err(|e| LabError::Format(e.to_string()))?;
            series.push(s)?;
        }
        if series.len() >= 2 {
            series.interval = series.samples[1].t - series.samples[0].t;
        }
        Ok(series)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| LabError::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path).map_err(|e| LabError::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}

/// The first growth pulse of a channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseReport {
    pub t_min: f64,
    pub m: f64,
    pub t_max: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub dt: f64,
    pub sigma: f64,
    pub window: usize,
    /// First local minimum after the maximum, where the pulse has decayed;
    /// absent when the series ends still decaying.
    pub t_end: Option<f64>,
}

/// Centered moving average; the window shrinks symmetrically at the ends.
pub fn smooth(values: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let n = values.len();
    (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            let s = &values[i - h..=i + h];
            s.iter().sum::<f64>() / s.len() as f64
        })
        .collect()
}

/// Index of the first strict local extremum at or after `from`. A plateau
/// counts as one point, reported at its first index; index `from` itself
/// qualifies when the series moves the right way after it.
fn first_extremum(s: &[f64], from: usize, minimum: bool) -> Option<usize> {
    let better = |a: f64, b: f64| if minimum { a < b } else { a > b };
    let mut i = from;
    while i < s.len() {
        let mut j = i;
        while j + 1 < s.len() && s[j + 1] == s[i] {
            j += 1;
        }
        let left_ok = i == from || better(s[i], s[i - 1]);
        let right_ok = j + 1 < s.len() && better(s[i], s[j + 1]);
        if left_ok && right_ok {
            return Some(i);
        }
        i = j + 1;
    }
    None
}

/// First minimum (from `t[0]` inclusive) and the following maximum of the
/// smoothed channel, with `sigma = ln(M/m) / (t_max - t_min)`.
pub fn detect_first_pulse(t: &[f64], values: &[f64], window: usize) -> Result<PulseReport> {
    if t.len() != values.len() {
        return Err(LabError::InvalidParameter(
            "time and value lengths differ".into(),
        ));
    }
    let window = window.max(1);
    if values.len() < 3 * window {
        return Err(LabError::InvalidParameter(format!(
            "pulse detection needs at least {} samples, got {}",
            3 * window,
            values.len()
        )));
    }
    let s = smooth(values, window);
    let i_min = first_extremum(&s, 0, true)
        .ok_or_else(|| LabError::NoPulse("series has no local minimum".into()))?;
    let i_max = first_extremum(&s, i_min + 1, false)
        .ok_or_else(|| LabError::NoPulse("no maximum after the first minimum".into()))?;
    let i_end = first_extremum(&s, i_max + 1, true);
    let (m, big_m) = (s[i_min], s[i_max]);
    let dt = t[i_max] - t[i_min];
    Ok(PulseReport {
        t_min: t[i_min],
        m,
        t_max: t[i_max],
        big_m,
        dt,
        sigma: growth_rate(m, big_m, dt)?,
        window,
        t_end: i_end.map(|i| t[i]),
    })
}

impl DiagnosticSeries {
    pub fn first_pulse(&self, c: Channel, window: usize) -> Result<PulseReport> {
        detect_first_pulse(&self.times(), &self.channel(c), window)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::shear::{shear_field, ShearProfile};
    use proptest::prelude::*;

    fn sample(t: f64, v: f64) -> DiagnosticSample {
        DiagnosticSample {
            t,
            dev_linear: v,
            dev_drift: v,
            energy: 1.0,
            enstrophy: 2.0,
            energy_rate: -1e-3,
            enstrophy_rate: -0.1,
        }
    }

    #[test]
    fn deviation_examples() {
        let g = make_grid(2.0, 16, 65).unwrap();
        assert_eq!(deviation_from_linear(&FlowField::couette(&g)), 0.0);
        let p = ShearProfile::new(0.07, 1).unwrap();
        assert!((deviation_from_linear(&shear_field(&p, &g)) - 0.07).abs() < 1e-10);
        let d = DriftState::new(p, 1e-4, 3.0).unwrap();
        let s = SolverState {
            t: 3.0,
            u: drift_field(&d, &g),
            steps: 0,
            dt: 0.0,
        };
        assert!(deviation_from_drift(&s, &d).unwrap() < 1e-15);
        assert!(matches!(
            deviation_from_drift(&s, &d.at(4.0)),
            Err(LabError::TimeMismatch { .. })
        ));
    }

    #[test]
    fn energy_enstrophy_examples() {
        let g = make_grid(2.0, 16, 33).unwrap();
        let c = FlowField::couette(&g);
        assert!((energy(&c) - 2.0 / 3.0).abs() < 1e-12);
        assert!((enstrophy(&c) - 2.0).abs() < 1e-12);
        assert_eq!(energy(&FlowField::zeros(&g)), 0.0);
        assert_eq!(enstrophy(&FlowField::zeros(&g)), 0.0);
        let g = make_grid(2.0, 16, 65).unwrap();
        let p = ShearProfile::new(0.07, 1).unwrap();
        let expected = 2.0 * (1.0 + (4.0 * std::f64::consts::PI * 0.07f64).powi(2) / 2.0);
        assert!((enstrophy(&shear_field(&p, &g)) - expected).abs() < 1e-10);
    }

    #[test]
    fn rates_vanish_for_couette_and_euler() {
        let g = make_grid(2.0, 16, 33).unwrap();
        let c = FlowField::couette(&g);
        assert!(energy_rate(&c, 1e-3).abs() < 1e-12);
        assert!(enstrophy_rate(&c, 1e-3).abs() < 1e-12);
        let p = ShearProfile::new(0.07, 1).unwrap();
        let s = shear_field(&p, &g);
        assert_eq!(energy_rate(&s, 0.0), 0.0);
        assert_eq!(enstrophy_rate(&s, 0.0), 0.0);
    }

    #[test]
    fn shear_rates_match_analytic_values() {
        // U = y + a sin(ky): E_t = 2 eps Lx int U U'' and G_t = 2 eps Lx int U' U'''
        let g = make_grid(2.0, 16, 129).unwrap();
        let p = ShearProfile::new(0.07, 1).unwrap();
        let u = shear_field(&p, &g);
        let (a, k, eps) = (0.07, 4.0 * std::f64::consts::PI, 1e-4);
        // int y sin(ky) = -1/k, int sin^2 = 1/2
        let e_t = 2.0 * eps * 2.0 * (-a * k * k) * (-1.0 / k + a / 2.0);
        // U' = 1 + ak cos, U''' = -a k^3 cos; int cos = 0, int cos^2 = 1/2
        let g_t = 2.0 * eps * 2.0 * (-a * a * k.powi(4) / 2.0);
        assert!((energy_rate(&u, eps) - e_t).abs() < 1e-9 * e_t.abs());
        assert!((enstrophy_rate(&u, eps) - g_t).abs() < 1e-8 * g_t.abs());
        assert!((enstrophy_rate(&u, eps) / energy_rate(&u, eps)).abs() > 100.0);
    }

    #[test]
    fn growth_rate_examples() {
        assert_eq!(growth_rate(0.01, 0.01, 5.0).unwrap(), 0.0);
        assert!((growth_rate(0.01, 0.03, 10.0).unwrap() - 3f64.ln() / 10.0).abs() < 1e-15);
        assert!(growth_rate(0.0, 0.03, 10.0).is_err());
        assert!(growth_rate(0.01, 0.03, 0.0).is_err());
        assert!(growth_rate(0.01, -1.0, 1.0).is_err());
    }

    #[test]
    fn synthetic_pulse_recovers_sigma() {
        let (m, sigma, t_max) = (0.01, 0.12, 30.0);
        let t: Vec<f64> = (0..600).map(|i| i as f64 * 0.1).collect();
        let v: Vec<f64> = t
            .iter()
            .map(|&t| {
                if t <= t_max {
                    m * (sigma * t).exp()
                } else {
                    m * (sigma * t_max).exp() * (-0.2 * (t - t_max)).exp()
                }
            })
            .collect();
        let r = detect_first_pulse(&t, &v, DEFAULT_SMOOTH_WINDOW).unwrap();
        assert!((r.sigma - sigma).abs() < 0.02 * sigma, "{r:?}");
        assert_eq!(r.t_min, 0.0);
        assert!((r.t_max - t_max).abs() < 0.25);
        assert!(r.t_end.is_none());
        assert_eq!(r.window, DEFAULT_SMOOTH_WINDOW);
    }

    #[test]
    fn pulse_end_is_the_next_minimum() {
        let t: Vec<f64> = (0..400).map(|i| i as f64 * 0.1).collect();
        let v: Vec<f64> = t.iter().map(|&t| 2.0 + (0.2 * t).sin()).collect();
        let r = detect_first_pulse(&t, &v, 5).unwrap();
        assert!((r.t_max - 7.85).abs() < 0.11);
        assert!((r.t_end.unwrap() - 23.56).abs() < 0.11);
    }

    #[test]
    fn monotone_or_short_series_has_no_pulse() {
        let t: Vec<f64> = (0..50).map(|i| i as f64).collect();
        assert!(matches!(
            detect_first_pulse(&t, &vec![1.0; 50], 5),
            Err(LabError::NoPulse(_))
        ));
        let rising: Vec<f64> = t.iter().map(|t| t + 1.0).collect();
        assert!(matches!(
            detect_first_pulse(&t, &rising, 5),
            Err(LabError::NoPulse(_))
        ));
        assert!(detect_first_pulse(&t[..10], &rising[..10], 5).is_err());
    }

    #[test]
    fn series_rejects_bad_samples_and_round_trips_csv() {
        let mut s = DiagnosticSeries::new(0.1);
        s.push(sample(0.0, 0.01)).unwrap();
        s.push(sample(0.1, 0.1 + 0.2)).unwrap();
        s.push(sample(0.2, 1.0 / 3.0)).unwrap();
        assert!(s.push(sample(0.2, 1.0)).is_err());
        assert!(s.push(sample(0.3, f64::NAN)).is_err());
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,dev_linear,dev_drift,E,G,E_t,G_t\n"));
        let back = DiagnosticSeries::read_csv(&buf[..]).unwrap();
        assert_eq!(back.samples(), s.samples());
        assert!((back.interval - 0.1).abs() < 1e-15);
        assert_eq!(s.modulation_ratio().unwrap(), 100.0);
        assert_eq!("G_t".parse::<Channel>().unwrap(), Channel::EnstrophyRate);
        assert!("H".parse::<Channel>().is_err());
    }

    proptest! {
        #[test]
        fn sigma_ratio_invariance(m in 1e-4f64..1.0, r in 1.0f64..100.0, dt in 0.1f64..100.0, k in 1e-3f64..1e3) {
            let s = growth_rate(m, m * r, dt).unwrap();
            let scaled = growth_rate(k * m, k * m * r, dt).unwrap();
            prop_assert!((s - scaled).abs() <= 1e-12 * s.abs().max(1e-12));
        }

        #[test]
        fn sigma_time_scaling(m in 1e-4f64..1.0, r in 1.0f64..100.0, dt in 0.1f64..100.0, k in 0.01f64..100.0) {
            let s = growth_rate(m, m * r, dt).unwrap();
            let scaled = growth_rate(m, m * r, k * dt).unwrap();
            prop_assert!((scaled - s / k).abs() <= 1e-12 * s.abs().max(1e-12));
        }
    }
}
