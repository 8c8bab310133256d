//! Holomorphic functions on the closed disk as truncated power series, plus
//! FFT helpers for boundary densities.

use std::cell::RefCell;
use std::f64::consts::TAU;

use rustfft::FftPlanner;

use crate::C64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward DFT `X_m = Σ_k x_k e^{−2πikm/n}` (unnormalised).
pub fn fft_forward(data: &mut [C64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(data.len()));
    fft.process(data);
}

/// In-place inverse DFT `x_k = Σ_m X_m e^{2πikm/n}` (unnormalised).
pub fn fft_inverse(data: &mut [C64]) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(data.len()));
    fft.process(data);
}

/// Fourier coefficients `ρ̂_m = (1/2π)∫ρ e^{−imθ}dθ` of uniform samples
/// `ρ(2πk/n)`, in FFT order.
pub fn fourier_coefficients(samples: &[C64]) -> Vec<C64> {
    let mut c = samples.to_vec();
    fft_forward(&mut c);
    let s = 1.0 / samples.len() as f64;
    c.iter_mut().for_each(|v| *v *= s);
    c
}

/// `f(z) = Σ c_k z^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries {
    coeffs: Vec<C64>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<C64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: C64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == C64::new(0.0, 0.0))
    }

    /// Cauchy integral `(1/2π)∫ρ(θ)/(e^{iθ} − z) dθ` of a density sampled at
    /// `2πk/n`; the result is `Σ_k ρ̂_{k+1} z^k`.
    pub fn cauchy_integral(samples: &[C64]) -> Self {
        let c = fourier_coefficients(samples);
        let half = samples.len() / 2;
        Self::new(c[1..half].to_vec())
    }

    /// Schwarz integral `β̂₀ + 2Σ_{k≥1} β̂_k z^k` of a real boundary density,
    /// whose real part has boundary values `β`.
    pub fn schwarz(samples: &[f64]) -> Self {
        let z: Vec<C64> = samples.iter().map(|v| C64::new(*v, 0.0)).collect();
        let c = fourier_coefficients(&z);
        let half = samples.len() / 2;
        let mut coeffs = Vec::with_capacity(half);
        coeffs.push(C64::new(c[0].re, 0.0));
        coeffs.extend(c[1..half].iter().map(|v| 2.0 * v));
        Self::new(coeffs)
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// Value and first two derivatives at `z`.
    pub fn eval_derivs(&self, z: C64) -> [C64; 3] {
        let zero = C64::new(0.0, 0.0);
        let (mut f, mut d1, mut d2) = (zero, zero, zero);
        for c in self.coeffs.iter().rev() {
            d2 = d2 * z + 2.0 * d1;
            d1 = d1 * z + f;
            f = f * z + c;
        }
        [f, d1, d2]
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    /// Values on the ring `r e^{2πik/n}`, `k = 0..n`, by folding coefficients
    /// modulo `n` and one inverse FFT.
    pub fn eval_ring(&self, r: f64, n: usize) -> Vec<C64> {
        let mut bins = vec![C64::new(0.0, 0.0); n];
        let mut rk = 1.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            if rk == 0.0 {
                break;
            }
            bins[k % n] += c * rk;
            rk *= r;
        }
        fft_inverse(&mut bins);
        bins
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = C64::new(0.0, 0.0);
        Self::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(zero) + other.coeffs.get(k).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }

    /// Product truncated to at most `max_len` coefficients.
    pub fn mul(&self, other: &Self, max_len: usize) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::zero();
        }
        let n = (self.coeffs.len() + other.coeffs.len() - 1).min(max_len);
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            for (j, b) in other.coeffs.iter().enumerate().take(n - i) {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    /// Drops trailing coefficients below `rel_tol · max|c_k|`.
    pub fn trimmed(mut self, rel_tol: f64) -> Self {
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while let Some(c) = self.coeffs.last() {
            if c.norm() <= rel_tol * max {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        self
    }

    /// Uniform boundary samples `f(e^{2πik/n})`.
    pub fn boundary_samples(&self, n: usize) -> Vec<C64> {
        self.eval_ring(1.0, n)
    }
}

/// Angles `2πk/n`.
pub fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}
