//! Real-valued periodic transforms along `x`.
//!
//! Convention: `f(x_i) = sum_{|k| < N/2} f_k exp(i 2 pi k x_i / Lx)` with
//! `f_{-k} = conj(f_k)`. Only `k = 0..=N/2` is stored; the Nyquist mode is
//! kept by the forward transform but ignored by derivatives.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

#[derive(Clone)]
pub struct XTransform {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for XTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("XTransform").field("n", &self.n).finish()
    }
}

impl XTransform {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        XTransform {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of stored half-spectrum modes, `N/2 + 1`.
    pub fn modes(&self) -> usize {
        self.n / 2 + 1
    }

    /// Physical samples to half-spectrum coefficients `f_0 ..= f_{N/2}`.
    pub fn forward(&self, values: &[f64], out: &mut [Complex64], buf: &mut Vec<Complex64>) {
        debug_assert_eq!(values.len(), self.n);
        buf.clear();
        buf.extend(values.iter().map(|&v| Complex64::new(v, 0.0)));
        self.forward.process(buf);
        let scale = 1.0 / self.n as f64;
        for (k, o) in out.iter_mut().enumerate().take(self.modes()) {
            *o = buf[k] * scale;
        }
    }

    /// Half-spectrum coefficients to physical samples. Modes beyond
    /// `coeffs.len()` are treated as zero; the Nyquist entry is dropped.
    pub fn inverse(&self, coeffs: &[Complex64], out: &mut [f64], buf: &mut Vec<Complex64>) {
        debug_assert_eq!(out.len(), self.n);
        buf.clear();
        buf.resize(self.n, Complex64::new(0.0, 0.0));
        let kmax = coeffs.len().min(self.n / 2);
        buf[0] = Complex64::new(coeffs[0].re, 0.0);
        for k in 1..kmax {
            buf[k] = coeffs[k];
            buf[self.n - k] = coeffs[k].conj();
        }
        self.inverse.process(buf);
        for (o, b) in out.iter_mut().zip(buf.iter()) {
            *o = b.re;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn round_trip_and_mode_placement() {
        let n = 16;
        let t = XTransform::new(n);
        let lx = 2.0;
        let x: Vec<f64> = (0..n).map(|i| lx * i as f64 / n as f64).collect();
        let f: Vec<f64> = x
            .iter()
            .map(|&x| 0.5 + (2.0 * PI * 3.0 * x / lx).cos())
            .collect();
        let mut c = vec![Complex64::default(); t.modes()];
        let mut buf = Vec::new();
        t.forward(&f, &mut c, &mut buf);
        assert!((c[0].re - 0.5).abs() < 1e-14);
        assert!((c[3].re - 0.5).abs() < 1e-14);
        let mut back = vec![0.0; n];
        t.inverse(&c, &mut back, &mut buf);
        for (a, b) in back.iter().zip(&f) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
