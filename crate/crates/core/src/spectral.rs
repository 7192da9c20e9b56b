//! FFT helpers shared by the kernel, evolution and operator modules.
//!
//! Transforms follow the engineering convention `û(κ) = Σ u_j e^{-iκ x_j}`; a
//! Fourier symbol ψ stated in the probabilistic convention `∫ e^{+ikx} u dx`
//! therefore acts on these coefficients as the multiplier `ψ(-κ)`.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::levy_ops::{rf_symbol, RieszFellerParams};

/// Angular wavenumbers of an `n`-point periodic grid with spacing `h`, in FFT order.
pub fn wavenumbers(n: usize, h: f64) -> Vec<f64> {
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * h);
    (0..n)
        .map(|m| {
            let mm = if m < n.div_ceil(2) { m as f64 } else { m as f64 - n as f64 };
            mm * dk
        })
        .collect()
}

/// Multiplier of the Riesz-Feller operator on engineering-convention coefficients.
pub fn rf_multiplier(p: &RieszFellerParams, kappa: f64) -> Complex64 {
    rf_symbol(p, -kappa)
}

/// Multiplier `(iκ)^α` of the left-sided Caputo derivative.
pub fn caputo_multiplier(alpha: f64, kappa: f64) -> Complex64 {
    if kappa == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let phase = alpha * std::f64::consts::FRAC_PI_2 * kappa.signum();
    Complex64::from_polar(kappa.abs().powf(alpha), phase)
}

/// Reusable forward/inverse FFT pair of fixed length.
pub struct Fft {
    forward: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inverse: std::sync::Arc<dyn rustfft::Fft<f64>>,
    scratch: Vec<Complex64>,
    n: usize,
}

impl Fft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self { forward, inverse, scratch: vec![Complex64::new(0.0, 0.0); len], n }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&mut self, buf: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, &mut self.scratch);
    }

    /// Inverse transform including the `1/n` normalization.
    pub fn inverse(&mut self, buf: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, &mut self.scratch);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }

    pub fn forward_real(&mut self, x: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    pub fn inverse_real(&mut self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }
}

/// Full linear convolution `c_k = Σ_j a_j b_{k-j}` of two real sequences.
pub fn linear_convolution(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let out_len = a.len() + b.len() - 1;
    if a.len().min(b.len()) <= 32 {
        let mut out = vec![0.0; out_len];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        return out;
    }
    let n = out_len.next_power_of_two();
    let mut fft = Fft::new(n);
    let mut pa = vec![Complex64::new(0.0, 0.0); n];
    let mut pb = pa.clone();
    a.iter().enumerate().for_each(|(i, &v)| pa[i].re = v);
    b.iter().enumerate().for_each(|(i, &v)| pb[i].re = v);
    fft.forward(&mut pa);
    fft.forward(&mut pb);
    pa.iter_mut().zip(&pb).for_each(|(x, y)| *x *= y);
    fft.inverse(&mut pa);
    pa.truncate(out_len);
    pa.into_iter().map(|z| z.re).collect()
}
