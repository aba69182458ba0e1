//! Fourier-spectral differentiation on uniform periodic grids.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

#[derive(Clone)]
pub struct SpectralAxis {
    pub n: usize,
    pub period: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralAxis").field("n", &self.n).field("period", &self.period).finish()
    }
}

impl SpectralAxis {
    pub fn new(n: usize, period: f64) -> Self {
        let mut planner = FftPlanner::new();
        SpectralAxis {
            n,
            period,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Signed integer mode for bin m.
    fn mode(&self, m: usize) -> i64 {
        if m <= self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }

    /// In-place spectral derivative of the given order. The Nyquist bin is
    /// zeroed for odd orders, which keeps first-derivative matrices exactly
    /// skew-symmetric on even grids.
    pub fn differentiate(&self, values: &mut [Complex64], order: u32) {
        assert_eq!(values.len(), self.n);
        if order == 0 {
            return;
        }
        self.forward.process(values);
        let base = 2.0 * std::f64::consts::PI / self.period;
        let nyquist = if self.n % 2 == 0 { Some(self.n / 2) } else { None };
        for (m, v) in values.iter_mut().enumerate() {
            if order % 2 == 1 && Some(m) == nyquist {
                *v = Complex64::new(0.0, 0.0);
                continue;
            }
            let k = base * self.mode(m) as f64;
            let factor = Complex64::new(0.0, k).powu(order);
            *v *= factor;
        }
        self.inverse.process(values);
        let scale = 1.0 / self.n as f64;
        for v in values.iter_mut() {
            *v *= scale;
        }
    }
}
