//! Riesz-Feller, Caputo and convolution operators acting on front-like grids.
//!
//! Symbols follow the probabilistic Fourier convention `F[u](k) = ∫ e^{ikx} u dx`,
//! in which the Riesz-Feller operator `D^a_θ` has symbol
//! `ψ(k) = -|k|^a exp(i sgn(k) θ π/2)`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{invalid, unsupported, FrontError, Result};
use crate::grid::ProfileGrid;
use crate::spectral::linear_convolution;

const DIAMOND_SLACK: f64 = 1e-12;

/// Order `a` and asymmetry `θ` of a Riesz-Feller operator, restricted to the
/// Feller-Takayasu diamond `0 < a <= 2`, `|θ| <= min(a, 2 - a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszFellerParams {
    a: f64,
    theta: f64,
}

impl RieszFellerParams {
    pub fn new(a: f64, theta: f64) -> Result<Self> {
        if !a.is_finite() || !theta.is_finite() {
            return invalid("Riesz-Feller parameters must be finite");
        }
        if !(a > 0.0 && a <= 2.0) {
            return invalid(format!("order a = {a} outside (0, 2]"));
        }
        let bound = a.min(2.0 - a);
        if theta.abs() > bound + DIAMOND_SLACK {
            return invalid(format!("asymmetry θ = {theta} outside the diamond |θ| <= {bound}"));
        }
        Ok(Self { a, theta: theta.clamp(-bound, bound) })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `|θ| < 1`; excludes the two transport kernels at `(1, ±1)`.
    pub fn is_nontrivial(&self) -> bool {
        self.theta.abs() < 1.0
    }

    pub fn is_nonlocal(&self) -> bool {
        self.a < 2.0 && self.is_nontrivial()
    }

    pub fn is_nonextremal(&self) -> bool {
        self.theta.abs() < self.a.min(2.0 - self.a)
    }
}

/// `sin(π x)`, exactly zero at integers.
fn sin_pi(x: f64) -> f64 {
    if x == x.round() {
        0.0
    } else {
        (std::f64::consts::PI * x).sin()
    }
}

/// Fourier symbol `ψ^a_θ(k) = -|k|^a exp(i sgn(k) θ π/2)`.
pub fn rf_symbol(p: &RieszFellerParams, k: f64) -> Complex64 {
    if k == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let phase = k.signum() * p.theta * std::f64::consts::FRAC_PI_2;
    -Complex64::from_polar(k.abs().powf(p.a), phase)
}

/// Densities `c_± / |y|^{1+a}` of the Lévy measure on the two half-lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyDensityCoeffs {
    pub c_plus: f64,
    pub c_minus: f64,
}

pub fn levy_density_coeffs(p: &RieszFellerParams) -> Result<LevyDensityCoeffs> {
    if p.a >= 2.0 {
        return Err(FrontError::Degenerate("a = 2 has no jump part (Lévy measure vanishes)".into()));
    }
    let g = gamma(1.0 + p.a) / std::f64::consts::PI;
    let c_plus = (g * sin_pi((p.a + p.theta) / 2.0)).max(0.0);
    let c_minus = (g * sin_pi((p.a - p.theta) / 2.0)).max(0.0);
    Ok(LevyDensityCoeffs { c_plus, c_minus })
}

/// Right-hand side of the supremum estimate for `1 < a < 2`:
/// `K ‖u''‖ M^{2-a}/(2-a) + 4 K ‖u'‖ M^{1-a}/(a-1)` with
/// `K = Γ(1+a)/π |sin((a+θ)π/2) + sin((a-θ)π/2)|`.
pub fn rf_sup_bound(p: &RieszFellerParams, m: f64, norm_u1: f64, norm_u2: f64) -> Result<f64> {
    let a = p.a;
    if !(a > 1.0 && a < 2.0) {
        return unsupported(format!("sup bound requires 1 < a < 2, got a = {a}"));
    }
    if !(m > 0.0) || !(norm_u1 >= 0.0) || !(norm_u2 >= 0.0) {
        return invalid("sup bound needs M > 0 and non-negative norms");
    }
    let k = gamma(1.0 + a) / std::f64::consts::PI
        * (sin_pi((a + p.theta) / 2.0) + sin_pi((a - p.theta) / 2.0)).abs();
    Ok(k * norm_u2 * m.powf(2.0 - a) / (2.0 - a) + 4.0 * k * norm_u1 * m.powf(1.0 - a) / (a - 1.0))
}

fn check_finite(u: &ProfileGrid) -> Result<()> {
    if u.values.iter().any(|v| !v.is_finite()) || !u.left_state.is_finite() || !u.right_state.is_finite() {
        return invalid("non-finite samples");
    }
    Ok(())
}

/// `D^a_θ u` on the grid nodes.
///
/// For `a < 2` each one-sided singular integral is split at `Y0 ≈ 1`: on
/// `[0, Y0]` the cubic Taylor polynomial of `u` is subtracted and integrated
/// in closed form while the remainder (which vanishes like `y^{3-a}`) is
/// integrated by the trapezoidal rule; on `[Y0, Y_end]` the trapezoidal rule
/// runs over grid nodes; beyond the grid the constant far field contributes
/// `(state - u(x)) Y_end^{-a}/a`. Both trapezoidal pieces carry their first
/// Euler-Maclaurin end correction. At `a = 2` this is the fourth-order
/// centred Laplacian.
pub fn apply_riesz_feller(p: &RieszFellerParams, u: &ProfileGrid) -> Result<ProfileGrid> {
    check_finite(u)?;
    if p.a >= 2.0 {
        return u.with_values(u.second_derivative(), 0.0, 0.0);
    }
    if p.a == 1.0 && p.theta != 0.0 {
        return unsupported("a = 1 with θ ≠ 0 has no singular-integral representation");
    }
    let c = levy_density_coeffs(p)?;
    let a = p.a;
    let n = u.len();
    let h = u.h;
    let m = ((1.0 / h).round() as usize).max(4);
    let y0 = m as f64 * h;
    let jmax = n + m;
    // y^{-1-a} on the nodes y = j h.
    let w: Vec<f64> = (0..=jmax).map(|j| if j == 0 { 0.0 } else { (j as f64 * h).powf(-1.0 - a) }).collect();
    let comp = if a == 1.0 { y0.ln() } else { (y0.powf(1.0 - a) - 1.0) / (1.0 - a) };
    let near2 = y0.powf(2.0 - a) / (2.0 - a);
    let near3 = y0.powf(3.0 - a) / (3.0 - a);
    let drift = if a == 1.0 { 0.0 } else { (c.c_plus - c.c_minus) / (1.0 - a) };
    let h2_12 = h * h / 12.0;
    let du = u.derivative();

    let side = |i: usize, s: isize, d1: f64, d2: f64, d3: f64| -> f64 {
        let ui = u.values[i];
        let sf = s as f64;
        let at = |j: usize| u.ext(i as isize + s * j as isize);
        // Near field: trapezoid of the Taylor remainder, value 0 at y = 0.
        let mut near = 0.0;
        for j in 1..=m {
            let y = j as f64 * h;
            let taylor = sf * d1 * y + 0.5 * d2 * y * y + sf * d3 * y * y * y / 6.0;
            let wt = if j == m { 0.5 } else { 1.0 };
            near += wt * (at(j) - ui - taylor) * w[j];
        }
        near *= h;
        near += 0.5 * d2 * near2 + sf * d3 / 6.0 * near3 + sf * d1 * comp;
        // Analytic end correction at Y0 coming from the subtracted polynomial.
        let dpw = -a * sf * d1 * y0.powf(-1.0 - a)
            + (1.0 - a) * 0.5 * d2 * y0.powf(-a)
            + (2.0 - a) * sf * d3 / 6.0 * y0.powf(1.0 - a);
        near += h2_12 * dpw;
        // Grid field.
        let steps_to_end = if s > 0 { n - 1 - i } else { i };
        let jend = steps_to_end.max(m);
        let mut grid = 0.0;
        if jend > m {
            for j in m..=jend {
                let wt = if j == m || j == jend { 0.5 } else { 1.0 };
                grid += wt * (at(j) - ui) * w[j];
            }
            grid *= h;
            let yend = jend as f64 * h;
            let k = i as isize + s * jend as isize;
            let dend = if k >= 0 && (k as usize) < n { du[k as usize] } else { 0.0 };
            let gprime = sf * dend * yend.powf(-1.0 - a) - (1.0 + a) * (at(jend) - ui) * yend.powf(-2.0 - a);
            grid -= h2_12 * gprime;
        }
        // Far field beyond the grid.
        let state = if s > 0 { u.right_state } else { u.left_state };
        let yend = jend as f64 * h;
        let far = (state - ui) * yend.powf(-a) / a;
        near + grid + far
    };

    let out: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let e = |k: isize| u.ext(i as isize + k);
            let d1 = (e(-2) - 8.0 * e(-1) + 8.0 * e(1) - e(2)) / (12.0 * h);
            let d2 = (-e(-2) + 16.0 * e(-1) - 30.0 * e(0) + 16.0 * e(1) - e(2)) / (12.0 * h * h);
            let d3 = (e(2) - 2.0 * e(1) + 2.0 * e(-1) - e(-2)) / (2.0 * h * h * h);
            let mut v = drift * d1;
            if c.c_plus > 0.0 {
                v += c.c_plus * side(i, 1, d1, d2, d3);
            }
            if c.c_minus > 0.0 {
                v += c.c_minus * side(i, -1, d1, d2, d3);
            }
            v
        })
        .collect();
    u.with_values(out, 0.0, 0.0)
}

/// Behaviour of a profile to the left of its grid, `u(x) = left_state + amplitude e^{rate (x - xi0)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LeftTail {
    Constant,
    Exponential { amplitude: f64, rate: f64 },
}

/// Grünwald-Letnikov weights of `(1 - z)^α`.
pub fn gl_weights(alpha: f64, n: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n);
    let mut cur = 1.0;
    for j in 0..n {
        if j > 0 {
            cur *= 1.0 - (1.0 + alpha) / j as f64;
        }
        w.push(cur);
    }
    w
}

/// Left-sided Caputo derivative `D^α_+ u`, `0 < α < 1`, for a profile that is
/// constant to the left of its grid.
pub fn apply_caputo(alpha: f64, u: &ProfileGrid) -> Result<ProfileGrid> {
    apply_caputo_with_tail(alpha, u, LeftTail::Constant)
}

/// Grünwald-Letnikov approximation of `D^α_+ u` with an explicit left tail.
/// First-order accurate in the grid spacing.
pub fn apply_caputo_with_tail(alpha: f64, u: &ProfileGrid, tail: LeftTail) -> Result<ProfileGrid> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return unsupported(format!("Caputo order must lie in (0, 1), got {alpha}"));
    }
    check_finite(u)?;
    let n = u.len();
    let h = u.h;
    let w = gl_weights(alpha, n);
    let shifted: Vec<f64> = u.values.iter().map(|v| v - u.left_state).collect();
    let conv = linear_convolution(&w, &shifted);
    let scale = h.powf(-alpha);
    let mut out: Vec<f64> = conv[..n].iter().map(|v| v * scale).collect();
    if let LeftTail::Exponential { amplitude, rate } = tail {
        if !(rate > 0.0) || !amplitude.is_finite() {
            return invalid("exponential tail needs a positive rate and finite amplitude");
        }
        // T_i = Σ_{k>=1} w_{i+k} q^k satisfies T_{i-1} = q (w_i + T_i).
        let q = (-rate * h).exp();
        let mut wj = w[n - 1];
        let mut j = n - 1;
        let mut qk = 1.0;
        let mut t = 0.0;
        while j < n - 1 + 50_000_000 {
            j += 1;
            wj *= 1.0 - (1.0 + alpha) / j as f64;
            qk *= q;
            let term = wj * qk;
            t += term;
            if qk < 1e-18 || (term.abs() < 1e-19 * t.abs() && qk < 1e-6) {
                break;
            }
        }
        for i in (0..n).rev() {
            out[i] += scale * amplitude * t;
            if i > 0 {
                t = q * (w[i] + t);
            }
        }
    }
    u.with_values(out, 0.0, 0.0)
}

/// Symmetric convolution kernel `J` sampled on `x_k = k h`, `k = -K..=K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub h: f64,
    pub samples: Vec<f64>,
    /// Trapezoidal mass of the samples.
    pub mass: f64,
    /// Whether `∫ J(y) e^{λ y} dy < ∞` for some `λ > 0` (user declared).
    pub exponential_moment: bool,
}

impl KernelSpec {
    /// Validates `J >= 0`, evenness and unit trapezoidal mass (to `1e-6`).
    pub fn new(h: f64, samples: Vec<f64>) -> Result<Self> {
        Self::with_mass_tolerance(h, samples, 1e-6)
    }

    pub fn with_mass_tolerance(h: f64, samples: Vec<f64>, tol: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return invalid("kernel spacing must be positive");
        }
        if samples.len().is_multiple_of(2) || samples.len() < 3 {
            return invalid("kernel needs an odd number (>= 3) of centred samples");
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return invalid("kernel samples must be finite");
        }
        let peak = samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if samples.iter().any(|&v| v < -1e-14 * peak.max(1.0)) {
            return invalid("kernel must be non-negative");
        }
        let n = samples.len();
        for k in 0..n / 2 {
            if (samples[k] - samples[n - 1 - k]).abs() > 1e-10 * peak.max(1e-300) {
                return invalid("kernel must be even, J(x) = J(-x)");
            }
        }
        let mass = trapezoid_mass(h, &samples);
        if (mass - 1.0).abs() > tol {
            return invalid(format!("kernel trapezoidal mass {mass} differs from 1 by more than {tol}"));
        }
        Ok(Self { h, samples, mass, exponential_moment: true })
    }

    /// Samples `f` on `k h`, `|k| <= half_nodes`, rescaled to unit trapezoidal mass.
    pub fn from_fn(h: f64, half_nodes: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let raw: Vec<f64> = (-(half_nodes as isize)..=half_nodes as isize).map(|k| f(k as f64 * h)).collect();
        let m = trapezoid_mass(h, &raw);
        if !(m > 0.0) {
            return invalid("kernel has no mass");
        }
        Self::new(h, raw.into_iter().map(|v| v / m).collect())
    }

    /// Normalized indicator of `[-w, w]`; `w` must be a multiple of `h`.
    pub fn indicator(h: f64, w: f64) -> Result<Self> {
        let k = (w / h).round() as usize;
        Self::from_fn(h, k, |_| 1.0)
    }

    /// Hat function of half-width `w`.
    pub fn hat(h: f64, w: f64) -> Result<Self> {
        let k = (w / h).round() as usize;
        Self::from_fn(h, k, |x| (1.0 - x.abs() / w).max(0.0))
    }

    pub fn with_exponential_moment(mut self, flag: bool) -> Self {
        self.exponential_moment = flag;
        self
    }

    pub fn half_nodes(&self) -> usize {
        self.samples.len() / 2
    }

    fn weights(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        let kk = self.half_nodes() as isize;
        self.samples.iter().enumerate().map(move |(idx, &v)| {
            let k = idx as isize - kk;
            let end = if k.abs() == kk { 0.5 } else { 1.0 };
            (k, end * v * self.h)
        })
    }

    /// `∫ |y|^p J(y) dy` by the trapezoidal rule.
    pub fn moment(&self, p: i32) -> f64 {
        self.weights().map(|(k, w)| w * (k as f64 * self.h).abs().powi(p)).sum()
    }

    /// True if the outermost samples are not negligible, i.e. the kernel was
    /// probably truncated in its tail.
    pub fn truncated_tail(&self) -> bool {
        let peak = self.samples.iter().fold(0.0_f64, |m, v| m.max(*v));
        self.samples[0] > 1e-8 * peak
    }
}

fn trapezoid_mass(h: f64, s: &[f64]) -> f64 {
    let n = s.len();
    h * (s.iter().sum::<f64>() - 0.5 * (s[0] + s[n - 1]))
}

/// `J ∗ u - (∫J) u` with the constant extension of `u` outside its grid.
pub fn apply_convolution_op(j: &KernelSpec, u: &ProfileGrid) -> Result<ProfileGrid> {
    check_finite(u)?;
    if ((j.h - u.h) / u.h).abs() > 1e-9 {
        return invalid(format!("kernel spacing {} differs from grid spacing {}", j.h, u.h));
    }
    let weights: Vec<(isize, f64)> = j.weights().collect();
    let mass: f64 = weights.iter().map(|(_, w)| w).sum();
    let out: Vec<f64> = (0..u.len() as isize)
        .into_par_iter()
        .map(|i| weights.iter().map(|&(k, w)| w * u.ext(i - k)).sum::<f64>() - mass * u.values[i as usize])
        .collect();
    u.with_values(out, 0.0, 0.0)
}
