//! Nonlocal fronts by direct time evolution, and marching of the fractional
//! traveling-wave equation `ε D^α_+ ū = h(ū)` of the fractal KdV-Burgers
//! equation.
//!
//! Evolution works on the decomposition `u = φ + v` where `φ` is a fixed
//! tanh ramp between the end states. The operator acts on `φ` through
//! whole-line quadrature (computed once) and on the localized remainder `v`
//! through its Fourier multiplier, so the front never has to be periodic.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{invalid, FrontError, Result};
use crate::grid::ProfileGrid;
use crate::levy_ops::{apply_caputo, apply_caputo_with_tail, apply_convolution_op, apply_riesz_feller};
use crate::levy_ops::{KernelSpec, LeftTail, RieszFellerParams};
use crate::nonlinearity::{FluxSpec, ReactionSpec};
use crate::phase_plane::{TWSResult, TailGeometry};
use crate::quadrature::{gauss_legendre, scaled_upper_gamma};
use crate::shock_classify::{classify_reaction, rh_residual, ReactionClass, ShockTriple};
use crate::spectral::{caputo_multiplier, rf_multiplier, wavenumbers, Fft};

/// Width of the tanh background ramp.
pub const BACKGROUND_WIDTH: f64 = 1.0;
/// Sup-norm agreement required between co-moving late snapshots.
pub const AGREEMENT_TOL: f64 = 1e-3;
/// Minimum coefficient of determination for a converged speed fit.
pub const MIN_R2: f64 = 0.999;
/// Discrete differences against the front direction tolerated by the monotonicity check.
pub const MONOTONE_TOL: f64 = 1e-6;

/// Linear part of an evolution equation `u_t = A u + r(u) [- f(u)_x]`.
#[derive(Debug, Clone)]
pub enum EvolutionOperator {
    /// `σ D^a_θ`.
    RieszFeller { params: RieszFellerParams, sigma: f64 },
    /// `J ∗ u - u`.
    Convolution { kernel: KernelSpec },
    /// `γ₁ D^α_+ + γ₂ ∂²`, a diffusion only for `γ₁ <= 0 <= γ₂`.
    CaputoPlusLaplacian { alpha: f64, gamma1: f64, gamma2: f64 },
    /// `δ ∂² - ε ∂ D^α_+` together with the transport term `-f(u)_x`.
    Fowler { alpha: f64, delta: f64, eps: f64, flux: FluxSpec },
}

impl EvolutionOperator {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::RieszFeller { params, sigma } => {
                if !(*sigma > 0.0) || !sigma.is_finite() {
                    return invalid(format!("diffusion coefficient must be positive, got {sigma}"));
                }
                if !params.is_nontrivial() {
                    return Err(FrontError::Unsupported(
                        "Riesz-Feller parameters generate a pure translation, not a diffusion".into(),
                    ));
                }
            }
            Self::Convolution { .. } => {}
            Self::CaputoPlusLaplacian { alpha, gamma1, gamma2 } => {
                check_order(*alpha)?;
                if !(gamma1.is_finite() && gamma2.is_finite()) {
                    return invalid("operator coefficients must be finite");
                }
                if *gamma1 > 0.0 || *gamma2 < 0.0 {
                    return Err(FrontError::Unsupported(format!(
                        "γ₁ D^α + γ₂ ∂² with γ₁ = {gamma1}, γ₂ = {gamma2} is not a Lévy operator \
                         (needs γ₁ <= 0 and γ₂ >= 0)"
                    )));
                }
                if *gamma1 == 0.0 && *gamma2 == 0.0 {
                    return invalid("operator vanishes identically");
                }
            }
            Self::Fowler { alpha, delta, eps, .. } => {
                check_order(*alpha)?;
                if !(*delta > 0.0 && *eps >= 0.0) || !delta.is_finite() || !eps.is_finite() {
                    return invalid(format!("Fowler evolution needs δ > 0 and ε >= 0, got δ = {delta}, ε = {eps}"));
                }
            }
        }
        Ok(())
    }

    /// Fourier multiplier acting on engineering-convention coefficients.
    pub fn multiplier(&self, kappa: f64) -> Complex64 {
        match self {
            Self::RieszFeller { params, sigma } => *sigma * rf_multiplier(params, kappa),
            Self::Convolution { kernel } => {
                let kk = kernel.half_nodes() as isize;
                let mut s = 0.0;
                let mut mass = 0.0;
                for (idx, &v) in kernel.samples.iter().enumerate() {
                    let k = idx as isize - kk;
                    let w = if k.abs() == kk { 0.5 } else { 1.0 } * v * kernel.h;
                    s += w * (kappa * k as f64 * kernel.h).cos();
                    mass += w;
                }
                Complex64::new(s - mass, 0.0)
            }
            Self::CaputoPlusLaplacian { alpha, gamma1, gamma2 } => {
                *gamma1 * caputo_multiplier(*alpha, kappa) - *gamma2 * kappa * kappa
            }
            Self::Fowler { alpha, delta, eps, .. } => {
                let dx_caputo = Complex64::new(0.0, kappa) * caputo_multiplier(*alpha, kappa);
                -*delta * kappa * kappa - *eps * dx_caputo
            }
        }
    }

    /// Whether the evolution is order preserving. Fowler's operator is not.
    pub fn has_comparison_principle(&self) -> bool {
        !matches!(self, Self::Fowler { .. })
    }

    fn flux(&self) -> Option<&FluxSpec> {
        match self {
            Self::Fowler { flux, .. } => Some(flux),
            _ => None,
        }
    }

    /// `(order, coefficient)` of the stiffest part, for the explicit step bound.
    fn stiffness(&self) -> (f64, f64) {
        match self {
            Self::RieszFeller { params, sigma } => (params.a(), *sigma),
            Self::Convolution { .. } => (0.0, 1.0),
            Self::CaputoPlusLaplacian { alpha, gamma1, gamma2 } => {
                if *gamma2 > 0.0 {
                    (2.0, *gamma2)
                } else {
                    (*alpha, gamma1.abs())
                }
            }
            Self::Fowler { delta, .. } => (2.0, *delta),
        }
    }
}

fn check_order(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FrontError::Unsupported(format!("fractional order must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stepper {
    /// Implicit linear part, explicit nonlinearity, first order.
    ImexEuler,
    /// Exponential time differencing with a second-order Runge-Kutta stage.
    Etd2,
}

/// A full evolution problem on `[-l, l]` with `n` nodes.
#[derive(Debug, Clone)]
pub struct EvolutionSpec {
    pub operator: EvolutionOperator,
    pub reaction: ReactionSpec,
    pub u_minus: f64,
    pub u_plus: f64,
    pub l: f64,
    pub n: usize,
    /// Time step; `None` selects [`EvolutionSpec::default_dt`].
    pub dt: Option<f64>,
    pub t_end: f64,
    pub snapshot_every: f64,
    pub stepper: Stepper,
}

impl EvolutionSpec {
    pub fn new(operator: EvolutionOperator, reaction: ReactionSpec, u_minus: f64, u_plus: f64) -> Self {
        Self {
            operator,
            reaction,
            u_minus,
            u_plus,
            l: 60.0,
            n: 2401,
            dt: None,
            t_end: 40.0,
            snapshot_every: 0.5,
            stepper: Stepper::Etd2,
        }
    }

    pub fn with_domain(mut self, l: f64, n: usize) -> Self {
        self.l = l;
        self.n = n;
        self
    }

    pub fn with_horizon(mut self, t_end: f64, snapshot_every: f64) -> Self {
        self.t_end = t_end;
        self.snapshot_every = snapshot_every;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_stepper(mut self, stepper: Stepper) -> Self {
        self.stepper = stepper;
        self
    }

    pub fn h(&self) -> f64 {
        2.0 * self.l / (self.n - 1) as f64
    }

    pub fn validate(&self) -> Result<()> {
        self.operator.validate()?;
        if !(self.l > 0.0) || !self.l.is_finite() || self.n < 16 {
            return invalid("domain needs l > 0 and at least 16 nodes");
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() || !(self.snapshot_every > 0.0) {
            return invalid("time horizon and snapshot interval must be positive");
        }
        if !self.u_minus.is_finite() || !self.u_plus.is_finite() {
            return invalid("end states must be finite");
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) || !dt.is_finite() {
                return invalid(format!("time step must be positive, got {dt}"));
            }
        }
        if let EvolutionOperator::Convolution { kernel } = &self.operator {
            if ((kernel.h - self.h()) / self.h()).abs() > 1e-9 {
                return invalid(format!("kernel spacing {} differs from grid spacing {}", kernel.h, self.h()));
            }
        }
        self.reaction.check_endstates(self.u_minus, self.u_plus)
    }

    /// `min(0.25 h^a / σ, 0.1 / Lip(r))` for the first-order scheme. The
    /// exponential integrator treats the linear part exactly and only keeps
    /// the reaction and transport bounds, capped at `0.05`.
    pub fn default_dt(&self) -> f64 {
        let lip = self.reaction.lipschitz_on(self.u_minus, self.u_plus);
        let mut dt = if lip > 0.0 { 0.1 / lip } else { f64::INFINITY };
        if let Some(f) = self.operator.flux() {
            let (lo, hi) = (self.u_minus.min(self.u_plus), self.u_minus.max(self.u_plus));
            let speed = (0..=200).map(|k| f.df(lo + (hi - lo) * k as f64 / 200.0).abs()).fold(0.0, f64::max);
            if speed > 0.0 {
                dt = dt.min(0.4 * self.h() / speed);
            }
        }
        match self.stepper {
            Stepper::ImexEuler => {
                let (a, sigma) = self.operator.stiffness();
                dt.min(0.25 * self.h().powf(a) / sigma)
            }
            Stepper::Etd2 => dt.min(0.05),
        }
    }

    /// Tanh ramp of the given width centred at `center`, sampled on the evolution grid.
    pub fn ramp_initial(&self, width: f64, center: f64) -> Result<ProfileGrid> {
        if !(width > 0.0) {
            return invalid("ramp width must be positive");
        }
        let ramp = Ramp { u_minus: self.u_minus, u_plus: self.u_plus, width };
        ProfileGrid::from_fn(-self.l, self.h(), self.n, self.u_minus, self.u_plus, |x| ramp.value(x - center))
    }
}

/// `u_- + (u_+ - u_-)(1 + tanh(x / w)) / 2` and its derivatives.
#[derive(Debug, Clone, Copy)]
struct Ramp {
    u_minus: f64,
    u_plus: f64,
    width: f64,
}

impl Ramp {
    fn value(&self, x: f64) -> f64 {
        self.u_minus + 0.5 * (self.u_plus - self.u_minus) * (1.0 + (x / self.width).tanh())
    }

    fn d1(&self, x: f64) -> f64 {
        let s = 1.0 / (x / self.width).cosh();
        0.5 * (self.u_plus - self.u_minus) / self.width * s * s
    }

    fn d2(&self, x: f64) -> f64 {
        let t = (x / self.width).tanh();
        -2.0 * t * self.d1(x) / self.width
    }
}

/// `D^α_+ g` at `x` for a smooth `g` whose derivative is concentrated within
/// `radius` of the origin.
fn caputo_of_localized(alpha: f64, g_prime: impl Fn(f64) -> f64, x: f64, radius: f64) -> f64 {
    let hi = x + radius;
    if hi <= 0.0 {
        return 0.0;
    }
    let lo = x - radius;
    if lo > 0.0 {
        gauss_legendre(lo, hi, 160, |y| g_prime(x - y) * y.powf(-alpha)) / gamma(1.0 - alpha)
    } else {
        // y = s^p removes the y^{-α} singularity.
        let p = 1.0 / (1.0 - alpha);
        gauss_legendre(0.0, hi.powf(1.0 - alpha), 240, |s| g_prime(x - s.powf(p))) / gamma(2.0 - alpha)
    }
}

/// `A φ` for the background ramp, by whole-line quadrature.
fn background_action(op: &EvolutionOperator, ramp: &Ramp, phi: &ProfileGrid) -> Result<Vec<f64>> {
    let radius = 40.0 * ramp.width;
    Ok(match op {
        EvolutionOperator::RieszFeller { params, sigma } => {
            apply_riesz_feller(params, phi)?.values.into_iter().map(|v| sigma * v).collect()
        }
        EvolutionOperator::Convolution { kernel } => apply_convolution_op(kernel, phi)?.values,
        EvolutionOperator::CaputoPlusLaplacian { alpha, gamma1, gamma2 } => phi
            .xs()
            .into_par_iter()
            .map(|x| {
                let frac = if *gamma1 != 0.0 { caputo_of_localized(*alpha, |y| ramp.d1(y), x, radius) } else { 0.0 };
                gamma1 * frac + gamma2 * ramp.d2(x)
            })
            .collect(),
        EvolutionOperator::Fowler { alpha, delta, eps, .. } => phi
            .xs()
            .into_par_iter()
            .map(|x| {
                // ∂ D^α φ = D^α φ' since φ is constant at -∞.
                let frac = caputo_of_localized(*alpha, |y| ramp.d2(y), x, radius);
                delta * ramp.d2(x) - eps * frac
            })
            .collect(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub u: ProfileGrid,
}

/// Snapshots of one evolution run, in increasing time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub dt: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory holds at least the initial snapshot")
    }

    /// CSV with columns `t,x,u`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,u\n");
        for s in &self.snapshots {
            for (i, u) in s.u.values.iter().enumerate() {
                out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", s.t, s.u.x(i), u));
            }
        }
        out
    }
}

fn phi_functions(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 0.1 {
        // Taylor series of (e^z - 1)/z and (e^z - 1 - z)/z^2.
        let mut p1 = Complex64::new(0.0, 0.0);
        let mut p2 = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        for k in 0..14 {
            p1 += term / factorial(k + 1);
            p2 += term / factorial(k + 2);
            term *= z;
        }
        (p1, p2)
    } else {
        let e = z.exp();
        ((e - 1.0) / z, (e - 1.0 - z) / (z * z))
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// Evolves `u0` (resampled on the spec grid) up to `spec.t_end`.
pub fn evolve(spec: &EvolutionSpec, u0: &ProfileGrid) -> Result<Trajectory> {
    spec.validate()?;
    let n = spec.n;
    let h = spec.h();
    let x0 = -spec.l;
    let (um, up) = (spec.u_minus, spec.u_plus);
    let ramp = Ramp { u_minus: um, u_plus: up, width: BACKGROUND_WIDTH };
    let phi_grid = ProfileGrid::from_fn(x0, h, n, um, up, |x| ramp.value(x))?;
    let phi = phi_grid.values.clone();
    let b_phi = background_action(&spec.operator, &ramp, &phi_grid)?;

    let dt0 = spec.dt.unwrap_or_else(|| spec.default_dt());
    let steps = (spec.t_end / dt0).ceil().max(1.0) as usize;
    let dt = spec.t_end / steps as f64;
    let snap_every = ((spec.snapshot_every / dt).round() as usize).max(1);

    let mult: Vec<Complex64> = wavenumbers(n, h).into_iter().map(|k| spec.operator.multiplier(k)).collect();
    let (e_lin, p1, p2): (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) = match spec.stepper {
        Stepper::Etd2 => {
            let mut e = Vec::with_capacity(n);
            let mut a = Vec::with_capacity(n);
            let mut b = Vec::with_capacity(n);
            for &m in &mult {
                let z = m * dt;
                let (f1, f2) = phi_functions(z);
                e.push(z.exp());
                a.push(f1 * dt);
                b.push(f2 * dt);
            }
            (e, a, b)
        }
        Stepper::ImexEuler => {
            let inv: Vec<Complex64> = mult.iter().map(|&m| 1.0 / (1.0 - dt * m)).collect();
            (inv.clone(), inv.iter().map(|z| z * dt).collect(), Vec::new())
        }
    };

    let flux = spec.operator.flux().cloned();
    let reaction = spec.reaction.clone();
    let nonlinear = |v: &[f64]| -> Result<Vec<f64>> {
        let u: Vec<f64> = phi.iter().zip(v).map(|(p, w)| p + w).collect();
        let mut out: Vec<f64> = u.iter().zip(&b_phi).map(|(&uu, b)| b + reaction.r(uu)).collect();
        if let Some(f) = &flux {
            let fu = ProfileGrid::new(x0, h, u.iter().map(|&uu| f.f(uu)).collect(), f.f(um), f.f(up))?;
            out.iter_mut().zip(fu.derivative()).for_each(|(o, d)| *o -= d);
        }
        Ok(out)
    };
    let pin = |v: &mut [f64]| {
        v[0] = um - phi[0];
        v[n - 1] = up - phi[n - 1];
    };

    let mut fft = Fft::new(n);
    let mut v: Vec<f64> = phi_grid.xs().iter().zip(&phi).map(|(&x, p)| u0.sample(x) - p).collect();
    pin(&mut v);
    let snapshot = |t: f64, v: &[f64]| -> Result<Snapshot> {
        let u = phi.iter().zip(v).map(|(p, w)| p + w).collect();
        Ok(Snapshot { t, u: ProfileGrid::new(x0, h, u, um, up)? })
    };
    let mut snapshots = vec![snapshot(0.0, &v)?];
    let mid = 0.5 * (um + up);
    let bound = 10.0 * (um - up).abs().max(1e-12 * (1.0 + mid.abs()));

    for step in 1..=steps {
        let n0 = fft.forward_real(&nonlinear(&v)?);
        let vh = fft.forward_real(&v);
        let next: Vec<Complex64> = match spec.stepper {
            Stepper::ImexEuler => vh.iter().zip(&n0).enumerate().map(|(k, (a, b))| e_lin[k] * a + p1[k] * b).collect(),
            Stepper::Etd2 => {
                let stage: Vec<Complex64> =
                    vh.iter().zip(&n0).enumerate().map(|(k, (a, b))| e_lin[k] * a + p1[k] * b).collect();
                let a_real = fft.inverse_real(stage.clone());
                let n1 = fft.forward_real(&nonlinear(&a_real)?);
                stage.iter().enumerate().map(|(k, s)| s + p2[k] * (n1[k] - n0[k])).collect()
            }
        };
        v = fft.inverse_real(next);
        pin(&mut v);
        let worst = phi.iter().zip(&v).map(|(p, w)| (p + w - mid).abs()).fold(0.0, |m: f64, d| {
            if d.is_nan() {
                f64::INFINITY
            } else {
                m.max(d)
            }
        });
        if !(worst <= bound) {
            return Err(FrontError::Instability(format!(
                "sup|u - mid| = {worst:.3e} exceeds 10 times the state range at t = {:.4e}; retry with dt < {dt:.3e}",
                step as f64 * dt
            )));
        }
        if step % snap_every == 0 || step == steps {
            snapshots.push(snapshot(step as f64 * dt, &v)?);
        }
    }
    Ok(Trajectory { snapshots, dt, steps })
}

/// Mid-level crossing positions of a trajectory and a linear speed fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrontTrace {
    pub times: Vec<f64>,
    pub positions: Vec<f64>,
    /// `(slope, r²)` of the least-squares fit over the last half of the window.
    pub speed_fit: (f64, f64),
    /// Some snapshot crossed the level more than once; the leftmost crossing was used.
    pub ambiguous: bool,
    pub converged: bool,
}

impl FrontTrace {
    pub fn speed(&self) -> f64 {
        self.speed_fit.0
    }

    pub fn r2(&self) -> f64 {
        self.speed_fit.1
    }
}

/// Tracks the leftmost crossing of `level` in every snapshot.
pub fn track_front(traj: &Trajectory, level: f64) -> Result<FrontTrace> {
    let mut times = Vec::new();
    let mut positions = Vec::new();
    let mut ambiguous = false;
    for s in &traj.snapshots {
        let c = s.u.crossings(level);
        let Some(&first) = c.first() else {
            return invalid(format!("snapshot at t = {} does not cross the level {level}", s.t));
        };
        ambiguous |= c.len() > 1;
        times.push(s.t);
        positions.push(first);
    }
    let t_last = *times.last().unwrap_or(&0.0);
    let t_first = times.first().copied().unwrap_or(0.0);
    let start = times.iter().position(|&t| t >= t_last - 0.5 * (t_last - t_first)).unwrap_or(0);
    let (ts, xs) = (&times[start..], &positions[start..]);
    if ts.len() < 3 {
        return invalid("speed fit needs at least three snapshots in the last half of the window");
    }
    let (slope, r2) = linear_fit(ts, xs);
    Ok(FrontTrace { converged: r2 >= MIN_R2 && !ambiguous, times, positions, speed_fit: (slope, r2), ambiguous })
}

/// Least-squares slope and `r²`. A position series that is constant to
/// within round-off counts as a perfect fit.
fn linear_fit(t: &[f64], x: &[f64]) -> (f64, f64) {
    let m = t.len() as f64;
    let tm = t.iter().sum::<f64>() / m;
    let xm = x.iter().sum::<f64>() / m;
    let stt: f64 = t.iter().map(|a| (a - tm).powi(2)).sum();
    let stx: f64 = t.iter().zip(x).map(|(a, b)| (a - tm) * (b - xm)).sum();
    let sxx: f64 = x.iter().map(|b| (b - xm).powi(2)).sum();
    let slope = stx / stt;
    let ss_res: f64 = t.iter().zip(x).map(|(a, b)| (b - xm - slope * (a - tm)).powi(2)).sum();
    let scale = 1.0 + xm.abs();
    if sxx <= m * (1e-10 * scale).powi(2) {
        return (slope, 1.0);
    }
    (slope, 1.0 - ss_res / sxx)
}

/// Final snapshot re-centred so its mid-level crossing sits at `ξ = 0`,
/// after checking that two late snapshots agree in the co-moving frame.
pub fn extract_profile(traj: &Trajectory, speed: f64) -> Result<ProfileGrid> {
    extract_profile_with_gap(traj, speed).map(|(p, _)| p)
}

fn extract_profile_with_gap(traj: &Trajectory, speed: f64) -> Result<(ProfileGrid, f64)> {
    let last = traj.last();
    let first_t = traj.snapshots[0].t;
    let target = last.t - 0.25 * (last.t - first_t);
    let early = traj
        .snapshots
        .iter()
        .min_by(|a, b| (a.t - target).abs().total_cmp(&(b.t - target).abs()))
        .expect("non-empty trajectory");
    if early.t >= last.t {
        return invalid("need at least two snapshots to test co-moving convergence");
    }
    let shift = speed * (last.t - early.t);
    let u = &last.u;
    let margin = 0.1 * (u.x_end() - u.xi0);
    let (lo, hi) = (u.xi0 + margin, u.x_end() - margin);
    let gap = (0..u.len())
        .filter(|&i| {
            let x = u.x(i);
            x >= lo && x <= hi && x - shift >= lo && x - shift <= hi
        })
        .map(|i| (u.values[i] - early.u.sample(u.x(i) - shift)).abs())
        .fold(0.0, f64::max);
    if gap > AGREEMENT_TOL {
        return Err(FrontError::NotConverged(format!(
            "snapshots at t = {:.3} and t = {:.3} differ by {gap:.3e} in the co-moving frame (tolerance {AGREEMENT_TOL:e})",
            early.t, last.t
        )));
    }
    let mid = 0.5 * (u.left_state + u.right_state);
    let pos = *u
        .crossings(mid)
        .first()
        .ok_or_else(|| FrontError::NotConverged("final snapshot has no mid-level crossing".into()))?;
    Ok((u.shifted(-pos), gap))
}

/// Options shared by the evolve → track → extract front solvers.
#[derive(Debug, Clone)]
pub struct FrontRunConfig {
    pub l: f64,
    pub n: usize,
    pub t_end: f64,
    pub snapshot_every: f64,
    pub dt: Option<f64>,
    pub stepper: Stepper,
    pub init_width: f64,
    pub init_center: f64,
    /// Residual and monotonicity are judged on nodes at least this fraction
    /// of the half-width away from the grid ends.
    pub edge_fraction: f64,
}

impl Default for FrontRunConfig {
    fn default() -> Self {
        Self {
            l: 60.0,
            n: 2401,
            t_end: 40.0,
            snapshot_every: 0.5,
            dt: None,
            stepper: Stepper::Etd2,
            init_width: 1.0,
            init_center: 0.0,
            edge_fraction: 0.25,
        }
    }
}

/// A front obtained by time evolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolvedFront {
    pub result: TWSResult,
    pub trace: FrontTrace,
    /// Sup-norm gap between the co-moving late snapshots.
    pub co_moving_gap: f64,
    pub dt: f64,
}

fn run_front(
    op: EvolutionOperator,
    r: &ReactionSpec,
    u_minus: f64,
    u_plus: f64,
    n: usize,
    cfg: &FrontRunConfig,
    apply_op: impl Fn(&ProfileGrid) -> Result<Vec<f64>>,
) -> Result<EvolvedFront> {
    let mut spec = EvolutionSpec::new(op, r.clone(), u_minus, u_plus)
        .with_domain(cfg.l, n)
        .with_horizon(cfg.t_end, cfg.snapshot_every)
        .with_stepper(cfg.stepper);
    spec.dt = cfg.dt;
    let u0 = spec.ramp_initial(cfg.init_width, cfg.init_center)?;
    let traj = evolve(&spec, &u0)?;
    let trace = track_front(&traj, 0.5 * (u_minus + u_plus))?;
    let mut warnings = Vec::new();
    if trace.ambiguous {
        warnings.push("multiple mid-level crossings; the leftmost one was tracked".to_string());
    }
    if !trace.converged {
        return Err(FrontError::NotConverged(format!(
            "front position fit has r² = {:.6} < {MIN_R2}",
            trace.r2()
        )));
    }
    let c = trace.speed();
    let (profile, gap) = extract_profile_with_gap(&traj, c)?;
    let lu = apply_op(&profile)?;
    let du = profile.derivative();
    let edge = cfg.edge_fraction * cfg.l;
    let inner: Vec<usize> =
        (0..profile.len()).filter(|&i| profile.x(i) - profile.xi0 >= edge && profile.x_end() - profile.x(i) >= edge).collect();
    let residual_sup =
        inner.iter().map(|&i| (c * du[i] + lu[i] + r.r(profile.values[i])).abs()).fold(0.0, f64::max);
    let dir = (u_plus - u_minus).signum();
    let wrong = inner
        .windows(2)
        .map(|w| -dir * (profile.values[w[1]] - profile.values[w[0]]))
        .fold(f64::NEG_INFINITY, f64::max);
    let monotone = wrong <= MONOTONE_TOL;
    Ok(EvolvedFront {
        result: TWSResult {
            derivative: du,
            speed: c,
            residual_sup,
            monotone,
            tail: if monotone { TailGeometry::Monotone } else { TailGeometry::Oscillatory },
            iterations: traj.steps,
            conjectural: false,
            warnings,
            profile,
        },
        trace,
        co_moving_gap: gap,
        dt: traj.dt,
    })
}

/// Describes why a requested front speed is excluded for `r`, if it is.
pub fn rd_speed_obstruction(r: &ReactionSpec, u_minus: f64, u_plus: f64, c: f64) -> Result<Option<String>> {
    let class = classify_reaction(r, u_minus, u_plus)?;
    Ok((class == ReactionClass::NegativeOnInterval && c > 0.0).then(|| {
        format!("r < 0 between the end states: no traveling wave with positive speed c = {c} (necessary condition)")
    }))
}

fn require_bistable(r: &ReactionSpec, u_minus: f64, u_plus: f64) -> Result<()> {
    match classify_reaction(r, u_minus, u_plus)? {
        ReactionClass::Bistable => Ok(()),
        ReactionClass::NegativeOnInterval => Err(FrontError::ProvablyNoTws(
            "r < 0 between the end states; no traveling wave with positive speed".into(),
        )),
        other => Err(FrontError::InvalidReaction(format!("front evolution solver needs a bistable reaction, got {other}"))),
    }
}

/// Front of `u_t = σ D^a_θ u + r(u)` for bistable `r`, `1 < a <= 2`.
pub fn solve_rd_riesz_feller_tw(
    p: &RieszFellerParams,
    sigma: f64,
    r: &ReactionSpec,
    u_minus: f64,
    u_plus: f64,
    cfg: &FrontRunConfig,
) -> Result<EvolvedFront> {
    if !(p.a() > 1.0 && p.a() <= 2.0) {
        return Err(FrontError::Unsupported(format!("front solver needs 1 < a <= 2, got a = {}", p.a())));
    }
    require_bistable(r, u_minus, u_plus)?;
    let op = EvolutionOperator::RieszFeller { params: *p, sigma };
    run_front(op, r, u_minus, u_plus, cfg.n, cfg, |u| {
        Ok(apply_riesz_feller(p, u)?.values.into_iter().map(|v| sigma * v).collect())
    })
}

/// Front of `u_t = J ∗ u - u + r(u)`. The grid spacing is taken from `J`.
pub fn solve_convolution_rd_tw(
    j: &KernelSpec,
    r: &ReactionSpec,
    u_minus: f64,
    u_plus: f64,
    cfg: &FrontRunConfig,
) -> Result<EvolvedFront> {
    let class = classify_reaction(r, u_minus, u_plus)?;
    let mut warnings = Vec::new();
    match class {
        ReactionClass::Bistable => {
            if j.truncated_tail() {
                warnings.push("kernel looks truncated; the first moment may not be finite".to_string());
            }
        }
        ReactionClass::Monostable => {
            if !j.exponential_moment {
                warnings.push(
                    "kernel without exponential moment: traveling waves exist only for bistable, \
                     not for monostable reactions"
                        .to_string(),
                );
            }
        }
        ReactionClass::NegativeOnInterval => {
            return Err(FrontError::ProvablyNoTws("r < 0 between the end states".into()));
        }
        other => {
            return Err(FrontError::InvalidReaction(format!("convolution front solver cannot handle {other} reactions")));
        }
    }
    let n = (2.0 * cfg.l / j.h).round() as usize + 1;
    let mut cfg = cfg.clone();
    cfg.l = 0.5 * (n - 1) as f64 * j.h;
    let op = EvolutionOperator::Convolution { kernel: j.clone() };
    let mut out = run_front(op, r, u_minus, u_plus, n, &cfg, |u| Ok(apply_convolution_op(j, u)?.values))?;
    out.result.warnings.extend(warnings);
    Ok(out)
}

/// Running energy integrals behind the necessary conditions of the
/// fractional traveling-wave equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NecessaryConditions {
    /// `∫_{u_-}^{u_+} h(u) du`.
    pub global: f64,
    /// `min_ξ ∫_{-∞}^ξ h(ū) ū' dy`, including the limits at `±∞`.
    pub running_min: f64,
    /// `∫ ū' D^α_+ ū dξ` over the grid.
    pub caputo_global: f64,
    /// Minimum of the running Caputo energy.
    pub caputo_running_min: f64,
}

impl NecessaryConditions {
    pub fn as_pair(&self) -> (f64, f64) {
        (self.global, self.running_min)
    }

    pub fn satisfied(&self, tol: f64) -> bool {
        self.global >= -tol && self.running_min >= -tol
    }
}

/// `∫ h(ū) ū'` is evaluated as `∫_{u_-}^{ū(ξ)} h(u) du`, exactly for
/// polynomial `h`. The Caputo energy uses the Grünwald-Letnikov derivative
/// with a constant left extension.
pub fn necessary_condition_integrals(profile: &ProfileGrid, alpha: f64, h: &ReactionSpec) -> Result<NecessaryConditions> {
    check_order(alpha)?;
    let base = profile.left_state;
    let global = h.integral(base, profile.right_state);
    let running_min = profile.values.iter().map(|&u| h.integral(base, u)).fold(global.min(0.0), f64::min);
    let d = apply_caputo(alpha, profile)?.values;
    let du = profile.derivative();
    let mut acc = 0.0;
    let mut cmin: f64 = 0.0;
    for i in 1..profile.len() {
        acc += 0.5 * profile.h * (du[i] * d[i] + du[i - 1] * d[i - 1]);
        cmin = cmin.min(acc);
    }
    Ok(NecessaryConditions { global, running_min, caputo_global: acc, caputo_running_min: cmin })
}

/// `ε D^α_+ ū + δ ū'' - h(ū)` with `h(u) = f(u) - f(u_-) - c (u - u_-)`.
pub fn fkdvb_twe_residual(
    f: &FluxSpec,
    eps: f64,
    delta: f64,
    alpha: f64,
    c: f64,
    profile: &ProfileGrid,
) -> Result<Vec<f64>> {
    let h = f.h_function(profile.left_state, c);
    let d = apply_caputo(alpha, profile)?.values;
    let d2 = profile.second_derivative();
    Ok((0..profile.len()).map(|i| eps * d[i] + delta * d2[i] - h.r(profile.values[i])).collect())
}

/// `h(ū) - δ ū' + ε D^α_+ ū`, the residual of Fowler's traveling-wave equation.
pub fn fowler_twe_residual(
    f: &FluxSpec,
    eps: f64,
    delta: f64,
    alpha: f64,
    c: f64,
    profile: &ProfileGrid,
) -> Result<Vec<f64>> {
    let h = f.h_function(profile.left_state, c);
    let d = apply_caputo(alpha, profile)?.values;
    let d1 = profile.derivative();
    Ok((0..profile.len()).map(|i| h.r(profile.values[i]) - delta * d1[i] + eps * d[i]).collect())
}

#[derive(Debug, Clone)]
pub struct MarchOptions {
    /// Uniform step; defaults to `0.01 / λ`. Must satisfy `λ h <= 0.05`.
    pub h: Option<f64>,
    /// Offset of the first node from `u_-`, relative to `|u_+ - u_-|`.
    pub tail_amplitude: f64,
    /// Length of the uniform stretch beyond the departure, in units of `1/λ`.
    pub uniform_decay_lengths: f64,
    /// Step growth factor of the graded stretch.
    pub growth: f64,
    pub endstate_tol: f64,
    pub xi_cap: f64,
}

impl Default for MarchOptions {
    fn default() -> Self {
        Self { h: None, tail_amplitude: 1e-8, uniform_decay_lengths: 30.0, growth: 1.01, endstate_tol: 1e-3, xi_cap: 1e12 }
    }
}

/// Profile of `ε D^α_+ ū = h(ū)` marched on a uniform-then-graded mesh.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarchedFront {
    /// Uniform stretch of the profile, mid-level crossing at `ξ = 0`.
    pub result: TWSResult,
    /// All mesh nodes on the same `ξ` axis.
    pub xi: Vec<f64>,
    pub u: Vec<f64>,
    pub endstate_error: f64,
    /// Exponent of the left tail `u_- - A e^{λ ξ}`.
    pub lambda: f64,
    pub conditions: NecessaryConditions,
}

/// Solves `ε D^α_+ ū = h(ū)`, `h(u) = f(u) - f(u_-) - c (u - u_-)`, by L1
/// forward marching from the linearized left tail.
pub fn march_fractional_twe(
    f: &FluxSpec,
    eps: f64,
    alpha: f64,
    triple: &ShockTriple,
    opts: &MarchOptions,
) -> Result<MarchedFront> {
    check_order(alpha)?;
    if !(eps > 0.0) || !eps.is_finite() {
        return invalid(format!("ε must be positive, got {eps}"));
    }
    let (um, up, c) = (triple.u_minus, triple.u_plus, triple.c);
    let delta = (up - um).abs();
    if delta == 0.0 {
        return Err(FrontError::Degenerate("equal end states".into()));
    }
    let scale = 1.0 + f.f(um).abs() + f.f(up).abs() + c.abs() * (um.abs() + up.abs());
    let rh = rh_residual(f, triple);
    if rh > 1e-9 * scale {
        return Err(FrontError::InconsistentTriple(format!("Rankine-Hugoniot residual {rh:.3e}")));
    }
    let convex = f.is_strictly_convex_on(um, up);
    if convex && um <= up {
        return Err(FrontError::ProvablyNoTws(
            "Lax entropy condition fails (u_- <= u_+ for a strictly convex flux): the necessary condition \
             ∫ h du >= 0 is violated"
                .into(),
        ));
    }
    let h = f.h_function(um, c);
    let dir = (up - um).signum();
    if (1..400).any(|k| h.r(um + (up - um) * k as f64 / 400.0) * dir <= 0.0) {
        return Err(FrontError::ProvablyNoTws(
            "h does not keep the sign of u_+ - u_- between the end states; the running necessary condition fails".into(),
        ));
    }
    let slope = h.dr(um) / eps;
    if !(slope > 0.0) {
        return Err(FrontError::Degenerate(format!("h'(u_-)/ε = {slope:.3e} gives no unstable left tail")));
    }
    let lambda = slope.powf(1.0 / alpha);
    let h0 = opts.h.unwrap_or(0.01 / lambda);
    if !(h0 > 0.0) || lambda * h0 > 0.05 {
        return invalid(format!("step {h0} violates λ h <= 0.05 with λ = {lambda:.4e}"));
    }
    let amp = opts.tail_amplitude * delta;
    let s = -dir;
    let n_uniform = (((1.0 / opts.tail_amplitude).ln() + opts.uniform_decay_lengths) / lambda / h0).ceil() as usize;

    let g1 = gamma(1.0 - alpha);
    let g2 = gamma(2.0 - alpha);
    let one_m = 1.0 - alpha;
    let table: Vec<f64> = (0..=n_uniform + 1).map(|j| (j as f64).powf(one_m)).collect();
    let hpow = h0.powf(one_m);
    let tail_term = |x: f64| -s * amp * lambda.powf(alpha) * scaled_upper_gamma(one_m, lambda * x) / g1;

    let mut xi = vec![0.0];
    let mut u = vec![um - s * amp];
    // (u_{k+1} - u_k) / Δ_k for completed intervals.
    let mut slopes: Vec<f64> = Vec::new();
    let mut step = h0;
    let mut iterations = 0usize;
    loop {
        let k = xi.len();
        if k > n_uniform {
            step *= opts.growth;
        }
        let x_new = xi[k - 1] + step;
        // History sum over all intervals except the last one.
        let mut hist = 0.0;
        if k <= n_uniform {
            for (j, sl) in slopes.iter().enumerate() {
                hist += sl * hpow * (table[k - j] - table[k - j - 1]);
            }
        } else {
            for (j, sl) in slopes.iter().enumerate() {
                hist += sl * ((x_new - xi[j]).powf(one_m) - (x_new - xi[j + 1]).powf(one_m));
            }
        }
        let s_n = tail_term(x_new) + hist / g2;
        let b = step.powf(-alpha) / g2;
        let prev = u[k - 1];
        let mut w = if k >= 2 { prev + (prev - u[k - 2]) * step / (xi[k - 1] - xi[k - 2]) } else { prev };
        let mut ok = false;
        for _ in 0..60 {
            iterations += 1;
            let g = eps * (s_n + b * (w - prev)) - h.r(w);
            let dg = eps * b - h.dr(w);
            let dw = g / dg;
            w -= dw;
            if !w.is_finite() {
                break;
            }
            if dw.abs() <= 1e-15 * (1.0 + w.abs()) {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(FrontError::NoConvergence(format!("Newton iteration failed at ξ = {x_new:.6e}")));
        }
        slopes.push((w - prev) / step);
        xi.push(x_new);
        u.push(w);
        if k > n_uniform && (w - up).abs() <= 0.5 * opts.endstate_tol {
            break;
        }
        if x_new > opts.xi_cap {
            return Err(FrontError::NoConvergence(format!(
                "profile still {:.3e} away from u_+ at ξ = {x_new:.3e}",
                (w - up).abs()
            )));
        }
    }
    let endstate_error = (u[u.len() - 1] - up).abs();

    // Uniform window as a grid; independent Grünwald-Letnikov residual.
    let window = ProfileGrid::new(0.0, h0, u[..=n_uniform].to_vec(), um, up)?;
    let d = apply_caputo_with_tail(alpha, &window, LeftTail::Exponential { amplitude: -s * amp, rate: lambda })?.values;
    let residual_sup = (0..window.len()).map(|i| (eps * d[i] - h.r(window.values[i])).abs()).fold(0.0, f64::max);
    let mid = 0.5 * (um + up);
    let xmid = *window
        .crossings(mid)
        .first()
        .ok_or_else(|| FrontError::NoConvergence("uniform stretch does not reach the mid level".into()))?;
    let wrong = u.windows(2).map(|p| -dir * (p[1] - p[0])).fold(f64::NEG_INFINITY, f64::max);
    let monotone = wrong <= MONOTONE_TOL;
    let mut warnings = Vec::new();
    if convex && !monotone {
        warnings.push(format!("profile not monotone (wrong-direction step {wrong:.3e}) although the flux is convex"));
    }
    let profile = window.shifted(-xmid);
    let conditions = necessary_condition_integrals(&profile, alpha, &h)?;
    let running_min = u.iter().map(|&v| h.integral(um, v)).fold(conditions.global.min(0.0), f64::min);
    let conditions = NecessaryConditions { running_min, ..conditions };
    let derivative = profile.derivative();
    Ok(MarchedFront {
        result: TWSResult {
            profile,
            derivative,
            speed: c,
            residual_sup,
            monotone,
            tail: TailGeometry::Monotone,
            iterations,
            conjectural: !convex,
            warnings,
        },
        xi: xi.iter().map(|x| x - xmid).collect(),
        u,
        endstate_error,
        lambda,
        conditions,
    })
}

/// Both sides of the energy identity of Fowler's traveling-wave equation
/// evaluated on an evolved profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FowlerReport {
    pub trace: Option<FrontTrace>,
    pub profile: ProfileGrid,
    /// `∫_{u_-}^{u_+} h(u) du`.
    pub lhs: f64,
    /// `∫ (ū')² dξ`.
    pub diffusion_integral: f64,
    /// `∫ ū' D^α_+ ū dξ`.
    pub caputo_integral: f64,
    /// `δ ∫ (ū')² - ε ∫ ū' D^α_+ ū`.
    pub rhs: f64,
    /// Largest excursion of the final snapshot outside the end-state range.
    pub overshoot: f64,
    pub conjectural: bool,
    pub warnings: Vec<String>,
}

/// Evolves `u_t + f(u)_x = δ u_xx - ε ∂_x D^α_+ u` from `u0` (default: unit
/// tanh ramp) and reports the terms of the traveling-wave energy identity.
/// No existence claim is attached to the outcome.
pub fn fowler_experiment(
    f: &FluxSpec,
    eps: f64,
    delta: f64,
    alpha: f64,
    triple: &ShockTriple,
    u0: Option<&ProfileGrid>,
    cfg: &FrontRunConfig,
) -> Result<FowlerReport> {
    let (um, up, c) = (triple.u_minus, triple.u_plus, triple.c);
    let scale = 1.0 + f.f(um).abs() + f.f(up).abs() + c.abs() * (um.abs() + up.abs());
    let rh = rh_residual(f, triple);
    if rh > 1e-9 * scale {
        return Err(FrontError::InconsistentTriple(format!("Rankine-Hugoniot residual {rh:.3e}")));
    }
    let op = EvolutionOperator::Fowler { alpha, delta, eps, flux: f.clone() };
    let zero = ReactionSpec::polynomial(vec![0.0])?;
    let mut spec = EvolutionSpec::new(op, zero, um, up)
        .with_domain(cfg.l, cfg.n)
        .with_horizon(cfg.t_end, cfg.snapshot_every)
        .with_stepper(cfg.stepper);
    spec.dt = cfg.dt;
    let init = match u0 {
        Some(g) => g.clone(),
        None => spec.ramp_initial(cfg.init_width, cfg.init_center)?,
    };
    let traj = evolve(&spec, &init)?;
    let mut warnings = vec!["Fowler's equation has no comparison principle; results are exploratory".to_string()];
    let mid = 0.5 * (um + up);
    let trace = match track_front(&traj, mid) {
        Ok(t) => {
            if !t.converged {
                warnings.push(format!("front position fit not converged (r² = {:.6})", t.r2()));
            }
            if t.ambiguous {
                warnings.push("multiple mid-level crossings; the leftmost one was tracked".into());
            }
            Some(t)
        }
        Err(e) => {
            warnings.push(format!("no front tracked: {e}"));
            None
        }
    };
    let last = &traj.last().u;
    let profile = match last.crossings(mid).first() {
        Some(&p) => last.shifted(-p),
        None => last.clone(),
    };
    let h = f.h_function(um, c);
    let lhs = h.integral(um, up);
    let du = profile.derivative();
    let d = apply_caputo(alpha, &profile)?.values;
    let trap = |g: &dyn Fn(usize) -> f64| -> f64 {
        (1..profile.len()).map(|i| 0.5 * profile.h * (g(i) + g(i - 1))).sum()
    };
    let diffusion_integral = trap(&|i| du[i] * du[i]);
    let caputo_integral = trap(&|i| du[i] * d[i]);
    let (lo, hi) = (um.min(up), um.max(up));
    let overshoot = last.values.iter().map(|&v| (v - hi).max(lo - v)).fold(0.0, f64::max);
    Ok(FowlerReport {
        trace,
        profile,
        lhs,
        diffusion_integral,
        caputo_integral,
        rhs: delta * diffusion_integral - eps * caputo_integral,
        overshoot,
        conjectural: true,
        warnings,
    })
}
