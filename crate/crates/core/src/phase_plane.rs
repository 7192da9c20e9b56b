//! The local traveling-wave ODE `σ ū'' + c ū' + r(ū) = 0` as a planar system,
//! heteroclinic shooting for bistable and monostable reactions, and the
//! reduction of viscous-dispersive conservation laws to it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FrontError, Result};
use crate::grid::ProfileGrid;
use crate::nonlinearity::{FluxSpec, ReactionSpec};
use crate::ode::{integrate, Control, DenseTrajectory, OdeOptions, State};
use crate::shock_classify::{classify_reaction, potential_gap, rh_residual, ReactionClass, ShockTriple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailGeometry {
    Monotone,
    Oscillatory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StationaryType {
    Saddle,
    StableNode,
    UnstableNode,
    StableSpiral,
    UnstableSpiral,
    NonHyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryStateReport {
    pub state: Option<f64>,
    /// `(λ_+, λ_-)`.
    pub eigenvalues: [Complex64; 2],
    pub kind: StationaryType,
}

/// A traveling wave profile with its speed and diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TWSResult {
    pub profile: ProfileGrid,
    /// `ū'` on the profile grid.
    pub derivative: Vec<f64>,
    pub speed: f64,
    /// Sup norm of the traveling-wave equation residual on the grid.
    pub residual_sup: f64,
    pub monotone: bool,
    pub tail: TailGeometry,
    pub iterations: usize,
    pub conjectural: bool,
    pub warnings: Vec<String>,
}

impl TWSResult {
    /// CSV with columns `xi,u,v`.
    pub fn profile_csv(&self) -> String {
        let mut out = String::from("xi,u,v\n");
        for (i, (u, v)) in self.profile.values.iter().zip(&self.derivative).enumerate() {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", self.profile.x(i), u, v));
        }
        out
    }
}

pub fn twe_vector_field(r: &ReactionSpec, sigma: f64, c: f64, state: (f64, f64)) -> (f64, f64) {
    let (u, v) = state;
    (v, (-r.r(u) - c * v) / sigma)
}

/// Eigenvalues `λ_± = -c/(2σ) ± sqrt(c²/(4σ²) - r'/σ)` of the linearization
/// at a stationary state.
pub fn eigen_report(rprime: f64, sigma: f64, c: f64) -> StationaryStateReport {
    let mu = -c / (2.0 * sigma);
    let disc = mu * mu - rprime / sigma;
    let root = Complex64::new(disc, 0.0).sqrt();
    let eigenvalues = [mu + root, mu - root];
    let kind = if rprime < 0.0 {
        StationaryType::Saddle
    } else if rprime == 0.0 || (disc < 0.0 && mu == 0.0) {
        StationaryType::NonHyperbolic
    } else if disc >= 0.0 {
        if mu < 0.0 {
            StationaryType::StableNode
        } else {
            StationaryType::UnstableNode
        }
    } else if mu < 0.0 {
        StationaryType::StableSpiral
    } else {
        StationaryType::UnstableSpiral
    };
    StationaryStateReport { state: None, eigenvalues, kind }
}

pub fn stationary_report(r: &ReactionSpec, sigma: f64, c: f64, state: f64) -> StationaryStateReport {
    StationaryStateReport { state: Some(state), ..eigen_report(r.dr(state), sigma, c) }
}

/// `c² - 4σ r'(u_+) >= 0` gives a monotone approach to `u_+`.
pub fn tail_geometry(sigma: f64, c: f64, rprime_at_uplus: f64) -> TailGeometry {
    if c * c - 4.0 * sigma * rprime_at_uplus >= 0.0 {
        TailGeometry::Monotone
    } else {
        TailGeometry::Oscillatory
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShootOptions {
    /// Target accuracy of the profile; also sets the integrator tolerances.
    pub tol: f64,
    /// Initial offset from the saddle relative to `|u_- - u_+|`.
    pub eps0_rel: f64,
    /// Largest speed magnitude tried when bracketing.
    pub c_max: f64,
    pub max_bisections: usize,
}

impl ShootOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, eps0_rel: 1e-6, c_max: 1e3, max_bisections: 200 }
    }
}

fn check_common(sigma: f64, u_minus: f64, u_plus: f64, tol: f64) -> Result<()> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(FrontError::InvalidInput(format!("diffusion coefficient must be positive, got {sigma}")));
    }
    if !(tol > 0.0) {
        return Err(FrontError::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    if u_minus == u_plus || !u_minus.is_finite() || !u_plus.is_finite() {
        return Err(FrontError::Degenerate("end states must be finite and distinct".into()));
    }
    Ok(())
}

fn ode_options(tol: f64, delta: f64) -> OdeOptions {
    let t = (tol * 1e-2).min(1e-10);
    OdeOptions { rtol: t, atol: t * delta, h_init: 1e-3, h_max: f64::INFINITY, max_steps: 2_000_000 }
}

/// Linear flow of `w'' + (c/σ) w' + (r'/σ) w = 0` from `(w0, v0)` after time `s`.
fn linear_flow(mu: f64, eta2: f64, w0: f64, v0: f64, s: f64) -> (f64, f64) {
    let b = v0 - mu * w0;
    if eta2 > 0.0 {
        let eta = eta2.sqrt();
        let ep = ((mu + eta) * s).exp();
        let em = ((mu - eta) * s).exp();
        let ch = 0.5 * (ep + em);
        let sh = 0.5 * (ep - em);
        let w = w0 * ch + b * sh / eta;
        (w, mu * w + w0 * eta * sh + b * ch)
    } else if eta2 < 0.0 {
        let om = (-eta2).sqrt();
        let e = (mu * s).exp();
        let (sn, cs) = (om * s).sin_cos();
        let w = e * (w0 * cs + b * sn / om);
        (w, mu * w + e * (-w0 * om * sn + b * cs))
    } else {
        let e = (mu * s).exp();
        let w = e * (w0 + b * s);
        (w, mu * w + e * b)
    }
}

enum Outcome {
    Overshoot,
    Undershoot,
}

struct Shot {
    outcome: Outcome,
    traj: DenseTrajectory,
}

/// Unstable eigenvalue of the saddle `left`.
fn unstable_eigenvalue(r: &ReactionSpec, sigma: f64, c: f64, at: f64) -> f64 {
    let mu = -c / (2.0 * sigma);
    mu + (mu * mu - r.dr(at) / sigma).sqrt()
}

#[allow(clippy::too_many_arguments)]
fn shoot_once(
    r: &ReactionSpec,
    sigma: f64,
    c: f64,
    left: f64,
    right: f64,
    eps0: f64,
    opts: &OdeOptions,
    record: bool,
) -> Result<Shot> {
    let d = (right - left).signum();
    let delta = (right - left).abs();
    let lp = unstable_eigenvalue(r, sigma, c, left);
    let y0 = [left + d * eps0, d * eps0 * lp];
    let t_max = 1e4 / lp.max(1e-3);
    let mut traj = DenseTrajectory::default();
    let mut outcome = None;
    let rhs = |_: f64, y: &State| [y[1], (-r.r(y[0]) - c * y[1]) / sigma];
    integrate(rhs, 0.0, y0, t_max, opts, |s| {
        if record {
            traj.push(*s);
        }
        let w = (s.y1[0] - right) * (-d);
        if w < 0.0 {
            outcome = Some(Outcome::Overshoot);
            return Control::Stop;
        }
        if s.y1[1] * d <= 0.0 {
            outcome = Some(Outcome::Undershoot);
            return Control::Stop;
        }
        if (s.y1[0] - left) * d < -delta {
            outcome = Some(Outcome::Undershoot);
            return Control::Stop;
        }
        Control::Continue
    })?;
    // A trajectory that neither crosses nor turns back has stalled short of u_+.
    Ok(Shot { outcome: outcome.unwrap_or(Outcome::Undershoot), traj })
}

/// Monotone heteroclinic connection between two saddles; the speed is found
/// by bisection between overshooting and undershooting trial speeds.
pub fn shoot_bistable(r: &ReactionSpec, sigma: f64, u_minus: f64, u_plus: f64, tol: f64) -> Result<TWSResult> {
    shoot_bistable_with(r, sigma, u_minus, u_plus, &ShootOptions::new(tol))
}

pub fn shoot_bistable_with(
    r: &ReactionSpec,
    sigma: f64,
    u_minus: f64,
    u_plus: f64,
    so: &ShootOptions,
) -> Result<TWSResult> {
    check_common(sigma, u_minus, u_plus, so.tol)?;
    let class = classify_reaction(r, u_minus, u_plus)?;
    if class != ReactionClass::Bistable {
        return Err(FrontError::InvalidInput(format!("bistable shooting needs a bistable reaction, got {class}")));
    }
    let delta = (u_minus - u_plus).abs();
    let eps0 = so.eps0_rel * delta;
    let opts = ode_options(so.tol, delta);
    let lip = r.lipschitz_on(u_minus, u_plus);
    let mut c0 = 1.0 + 2.0 * lip.max((sigma * lip).sqrt());
    let (mut c_lo, mut c_hi);
    let mut iterations = 0;
    loop {
        let lo = shoot_once(r, sigma, -c0, u_minus, u_plus, eps0, &opts, false)?;
        let hi = shoot_once(r, sigma, c0, u_minus, u_plus, eps0, &opts, false)?;
        iterations += 2;
        if matches!(lo.outcome, Outcome::Overshoot) && matches!(hi.outcome, Outcome::Undershoot) {
            c_lo = -c0;
            c_hi = c0;
            break;
        }
        c0 *= 2.0;
        if c0 > so.c_max {
            return Err(FrontError::NoConvergence(format!(
                "no overshoot/undershoot bracket for |c| <= {}",
                so.c_max
            )));
        }
    }
    for _ in 0..so.max_bisections {
        let c = 0.5 * (c_lo + c_hi);
        if c <= c_lo || c >= c_hi {
            break;
        }
        iterations += 1;
        match shoot_once(r, sigma, c, u_minus, u_plus, eps0, &opts, false)?.outcome {
            Outcome::Overshoot => c_lo = c,
            Outcome::Undershoot => c_hi = c,
        }
    }
    let c = 0.5 * (c_lo + c_hi);
    let shot = shoot_once(r, sigma, c, u_minus, u_plus, eps0, &opts, true)?;
    let mut res = profile_from_shot(r, sigma, c, u_minus, u_plus, eps0, &shot.traj, Target::Saddle, so.tol)?;
    res.iterations = iterations;
    Ok(res)
}

#[derive(Clone, Copy, PartialEq)]
enum Target {
    Saddle,
    Node,
}

/// Builds the sampled profile from a recorded trajectory starting at the
/// saddle `left`, attaching analytic linear tails at both ends.
#[allow(clippy::too_many_arguments)]
fn profile_from_shot(
    r: &ReactionSpec,
    sigma: f64,
    c: f64,
    left: f64,
    right: f64,
    eps0: f64,
    traj: &DenseTrajectory,
    target: Target,
    tol: f64,
) -> Result<TWSResult> {
    let d = (right - left).signum();
    let delta = (right - left).abs();
    let lp = unstable_eigenvalue(r, sigma, c, left);
    let mu = -c / (2.0 * sigma);
    let eta2 = mu * mu - r.dr(right) / sigma;
    let w_switch = 1e-6 * delta;
    let steps = traj.steps();
    if steps.is_empty() {
        return Err(FrontError::NoConvergence("empty trajectory".into()));
    }
    // Switch time: first approach of (u_+, 0) within w_switch.
    let freq = (r.dr(right).abs() / sigma).sqrt().max(mu.abs()).max(1e-12);
    let dist = |y: &State| ((y[0] - right).powi(2) + (y[1] / freq).powi(2)).sqrt();
    let mut t_sw = None;
    for s in steps {
        if target == Target::Saddle {
            if let Some(t) = s.find_root(|y| (y[0] - right) * (-d) - w_switch) {
                t_sw = Some(t);
                break;
            }
        } else if dist(&s.y1) <= w_switch {
            t_sw = Some(s.t1);
            break;
        }
    }
    let t_sw = match t_sw {
        Some(t) => t,
        None => {
            if target == Target::Node {
                return Err(FrontError::NoConvergence("trajectory did not reach the end state".into()));
            }
            // Closest approach before the trajectory left the saddle.
            let best = steps
                .iter()
                .min_by(|a, b| dist(&a.y1).total_cmp(&dist(&b.y1)))
                .expect("non-empty");
            best.t1
        }
    };
    let y_sw = traj.eval(t_sw);
    let (w0, v0) = (y_sw[0] - right, y_sw[1]);
    let lm = mu - eta2.max(0.0).sqrt();
    let right_tail = |s: f64| -> (f64, f64) {
        match target {
            Target::Saddle => {
                let w = w0 * (lm * s).exp();
                (right + w, lm * w)
            }
            Target::Node => {
                let (w, v) = linear_flow(mu, eta2, w0, v0, s);
                (right + w, v)
            }
        }
    };
    // Mid-level crossing fixes the origin of ξ.
    let mid = 0.5 * (left + right);
    let t_mid = steps
        .iter()
        .take_while(|s| s.t0 < t_sw)
        .find_map(|s| s.find_root(|y| y[0] - mid))
        .ok_or_else(|| FrontError::NoConvergence("profile never crosses the mid level".into()))?;
    let slow_right = match target {
        Target::Saddle => lm,
        Target::Node => {
            if eta2 > 0.0 {
                mu + eta2.sqrt()
            } else {
                mu
            }
        }
    };
    let floor = 1e-13 * delta;
    let t_left = (floor / eps0).ln() / lp;
    let amp = dist(&y_sw).max(floor);
    let t_right = t_sw + ((floor / amp).ln() / slow_right).max(0.0);
    let lam_max = lp.abs().max(lm.abs()).max((r.dr(right).abs() / sigma).sqrt());
    let mut h = 0.02 / lam_max;
    const MAX_POINTS: f64 = 400_000.0;
    if (t_right - t_left) / h > MAX_POINTS {
        h = (t_right - t_left) / MAX_POINTS;
    }
    let k_lo = ((t_left - t_mid) / h).floor() as i64;
    let k_hi = ((t_right - t_mid) / h).ceil() as i64;
    let n = (k_hi - k_lo + 1) as usize;
    let mut u = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for k in k_lo..=k_hi {
        let t = k as f64 * h + t_mid;
        let (uu, vv) = if t < 0.0 {
            let w = d * eps0 * (lp * t).exp();
            (left + w, lp * w)
        } else if t > t_sw {
            right_tail(t - t_sw)
        } else {
            let y = traj.eval(t);
            (y[0], y[1])
        };
        u.push(uu);
        v.push(vv);
    }
    let profile = ProfileGrid::new(k_lo as f64 * h, h, u, left, right)?;
    let residual_sup = system_residual(r, sigma, c, &profile, &v);
    let wrong = profile.values.windows(2).map(|p| (p[1] - p[0]) * (-d)).fold(0.0, f64::max);
    let monotone = wrong <= 1e-8 * delta;
    let tail = tail_geometry(sigma, c, r.dr(right));
    let mut warnings = Vec::new();
    if residual_sup > 10.0 * tol {
        warnings.push(format!("residual {residual_sup:.3e} exceeds 10 tol"));
    }
    Ok(TWSResult {
        profile,
        derivative: v,
        speed: c,
        residual_sup,
        monotone,
        tail,
        iterations: 0,
        conjectural: false,
        warnings,
    })
}

/// `sup |-c ū' - r(ū) - σ ū''|` over the interior of the grid, using
/// fourth-order differences of the samples.
pub fn twe_residual(r: &ReactionSpec, sigma: f64, c: f64, u: &ProfileGrid) -> f64 {
    let d1 = u.derivative();
    let d2 = u.second_derivative();
    (2..u.len().saturating_sub(2))
        .map(|i| (-c * d1[i] - r.r(u.values[i]) - sigma * d2[i]).abs())
        .fold(0.0, f64::max)
}

/// Residual of the first-order system: the larger of `sup |ū' - v|` and
/// `sup |-c v - r(ū) - σ v'|`, with one fourth-order difference each.
pub fn system_residual(r: &ReactionSpec, sigma: f64, c: f64, u: &ProfileGrid, v: &[f64]) -> f64 {
    let du = u.derivative();
    let vg = ProfileGrid { values: v.to_vec(), left_state: 0.0, right_state: 0.0, ..u.clone() };
    let dv = vg.derivative();
    (2..u.len().saturating_sub(2))
        .map(|i| (du[i] - v[i]).abs().max((-c * v[i] - r.r(u.values[i]) - sigma * dv[i]).abs()))
        .fold(0.0, f64::max)
}

/// Heteroclinic connection from a saddle to a node at the prescribed speed
/// `c`. Whichever end state is the saddle must lie at `ξ = -∞` for `c > 0`
/// and at `ξ = +∞` for `c < 0`; the other orientation has no connection.
pub fn shoot_monostable(
    r: &ReactionSpec,
    sigma: f64,
    c: f64,
    u_minus: f64,
    u_plus: f64,
    tol: f64,
) -> Result<TWSResult> {
    shoot_monostable_with(r, sigma, c, u_minus, u_plus, &ShootOptions::new(tol))
}

pub fn shoot_monostable_with(
    r: &ReactionSpec,
    sigma: f64,
    c: f64,
    u_minus: f64,
    u_plus: f64,
    so: &ShootOptions,
) -> Result<TWSResult> {
    check_common(sigma, u_minus, u_plus, so.tol)?;
    if !c.is_finite() {
        return Err(FrontError::InvalidInput("wave speed must be finite".into()));
    }
    r.check_endstates(u_minus, u_plus)?;
    let (dm, dp) = (r.dr(u_minus), r.dr(u_plus));
    if !(dm * dp < 0.0) {
        return Err(FrontError::InvalidInput(format!(
            "saddle-to-node shooting needs r'(u_-) and r'(u_+) of opposite signs, got {dm:.3e} and {dp:.3e}"
        )));
    }
    let saddle_left = dm < 0.0;
    if saddle_left && c <= 0.0 || !saddle_left && c >= 0.0 {
        return Err(FrontError::ProvablyNoTws(format!(
            "the node end state repels trajectories for c = {c}; no connection in this orientation"
        )));
    }
    if saddle_left {
        saddle_to_node(r, sigma, c, u_minus, u_plus, so)
    } else {
        // ξ -> -ξ maps the problem to a saddle on the left with speed -c.
        let mut res = saddle_to_node(r, sigma, -c, u_plus, u_minus, so)?;
        let p = &res.profile;
        let n = p.len();
        let values: Vec<f64> = p.values.iter().rev().copied().collect();
        let xi0 = -p.x(n - 1);
        res.profile = ProfileGrid::new(xi0, p.h, values, u_minus, u_plus)?;
        res.derivative = res.derivative.iter().rev().map(|v| -v).collect();
        res.speed = c;
        res.residual_sup = system_residual(r, sigma, c, &res.profile, &res.derivative);
        Ok(res)
    }
}

fn saddle_to_node(r: &ReactionSpec, sigma: f64, c: f64, left: f64, right: f64, so: &ShootOptions) -> Result<TWSResult> {
    let delta = (right - left).abs();
    let d = (right - left).signum();
    let eps0 = so.eps0_rel * delta;
    let opts = ode_options(so.tol, delta);
    let lp = unstable_eigenvalue(r, sigma, c, left);
    let y0 = [left + d * eps0, d * eps0 * lp];
    let freq = (r.dr(right).abs() / sigma).sqrt().max(c.abs() / (2.0 * sigma)).max(1e-12);
    let (lo, hi) = (left.min(right) - delta, left.max(right) + delta);
    let mu = -c / (2.0 * sigma);
    let t_max = 1e3 / lp.min(-mu).max(1e-3) + 1e3;
    let mut traj = DenseTrajectory::default();
    let mut status: Option<Result<()>> = None;
    let rhs = |_: f64, y: &State| [y[1], (-r.r(y[0]) - c * y[1]) / sigma];
    let steps = integrate(rhs, 0.0, y0, t_max, &opts, |s| {
        traj.push(*s);
        let y = s.y1;
        if y[0] < lo || y[0] > hi {
            status = Some(Err(FrontError::NoConvergence(format!(
                "trajectory escapes the state interval at u = {:.6e}; no connection to u_+ = {right}",
                y[0]
            ))));
            return Control::Stop;
        }
        if ((y[0] - right).powi(2) + (y[1] / freq).powi(2)).sqrt() <= 1e-6 * delta {
            status = Some(Ok(()));
            return Control::Stop;
        }
        Control::Continue
    })?;
    match status {
        Some(Ok(())) => {}
        Some(Err(e)) => return Err(e),
        None => return Err(FrontError::NoConvergence("trajectory did not settle at u_+".into())),
    }
    let mut res = profile_from_shot(r, sigma, c, left, right, eps0, &traj, Target::Node, so.tol)?;
    res.iterations = steps;
    Ok(res)
}

/// Integrates the saddle-to-node trajectory in the shifted variable
/// `w = u - right` without linearizing, and reports whether `w` changes sign
/// before decaying below the floating-point range.
pub fn trajectory_crosses_endstate(r: &ReactionSpec, sigma: f64, c: f64, left: f64, right: f64) -> Result<bool> {
    if !(c > 0.0) || r.dr(left) >= 0.0 || r.dr(right) <= 0.0 {
        return Err(FrontError::InvalidInput("needs c > 0, a saddle at `left` and a node at `right`".into()));
    }
    let delta = (right - left).abs();
    let d = (right - left).signum();
    let eps0 = 1e-6 * delta;
    let lp = unstable_eigenvalue(r, sigma, c, left);
    let (r1, r2) = (r.dr(right), r.d2r(right));
    let react = |w: f64| if w.abs() < 1e-6 * delta { r1 * w + 0.5 * r2 * w * w } else { r.r(right + w) };
    let w_init = left - right + d * eps0;
    let s0 = w_init.signum();
    let opts = OdeOptions { rtol: 1e-10, atol: 1e-300, h_init: 1e-3, h_max: 10.0, max_steps: 5_000_000 };
    let mut crossed = false;
    let mut escaped = false;
    let mu = -c / (2.0 * sigma);
    let t_max = 2e4 / (-mu).min(lp).max(1e-3);
    integrate(
        |_, y| [y[1], (-react(y[0]) - c * y[1]) / sigma],
        0.0,
        [w_init, d * eps0 * lp],
        t_max,
        &opts,
        |s| {
            let w = s.y1[0];
            if w.abs() > 2.0 * delta {
                escaped = true;
                return Control::Stop;
            }
            if w.signum() != s0 && w != 0.0 {
                crossed = true;
                return Control::Stop;
            }
            if w.abs() < 1e-280 {
                return Control::Stop;
            }
            Control::Continue
        },
    )?;
    if escaped {
        return Err(FrontError::NoConvergence("trajectory escapes before reaching the node".into()));
    }
    Ok(crossed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinSpeedEstimate {
    /// `2 sqrt(σ r'(u_+))`, available when r is concave on the interval.
    pub closed_form: Option<f64>,
    /// Monotone/oscillatory transition found by bisection on shooting.
    pub shooting: f64,
}

/// Minimal speed of monotone fronts for a monostable reaction with the
/// saddle at `u_minus`.
pub fn min_speed_estimate(r: &ReactionSpec, sigma: f64, u_minus: f64, u_plus: f64) -> Result<MinSpeedEstimate> {
    check_common(sigma, u_minus, u_plus, 1.0)?;
    let class = classify_reaction(r, u_minus, u_plus)?;
    if class != ReactionClass::Monostable {
        return Err(FrontError::InvalidInput(format!("minimal speed needs a monostable reaction, got {class}")));
    }
    let concave = (0..=200).all(|k| r.d2r(u_plus + (u_minus - u_plus) * k as f64 / 200.0) <= 1e-12);
    let linear = 2.0 * (sigma * r.dr(u_plus)).sqrt();
    let closed_form = concave.then_some(linear);
    let mut c_lo = 1e-3 * linear;
    let mut c_hi = 2.0 * linear;
    while !trajectory_crosses_endstate(r, sigma, c_lo, u_minus, u_plus)? {
        c_lo *= 0.1;
        if c_lo < 1e-12 {
            return Err(FrontError::NoConvergence("no oscillatory speed found".into()));
        }
    }
    while trajectory_crosses_endstate(r, sigma, c_hi, u_minus, u_plus)? {
        c_hi *= 2.0;
        if c_hi > 1e6 {
            return Err(FrontError::NoConvergence("no monotone speed found".into()));
        }
    }
    for _ in 0..40 {
        let c = 0.5 * (c_lo + c_hi);
        if trajectory_crosses_endstate(r, sigma, c, u_minus, u_plus)? {
            c_lo = c;
        } else {
            c_hi = c;
        }
    }
    Ok(MinSpeedEstimate { closed_form, shooting: 0.5 * (c_lo + c_hi) })
}

/// Traveling wave of `u_t + f(u)_x = ε u_xx + δ u_xxx` for a Rankine-Hugoniot
/// triple, via the identification with the reaction-diffusion problem
/// `r = -h`, `σ = δ`, speed `ε` (sign flipped for `δ < 0`). For `δ = 0` the
/// first-order equation `ε ū' = h(ū)` is solved directly. The returned speed
/// is the shock speed `c` of the triple.
pub fn solve_kdvb_tw(f: &FluxSpec, eps: f64, delta: f64, triple: &ShockTriple, tol: f64) -> Result<TWSResult> {
    if !(eps > 0.0) || !eps.is_finite() || !delta.is_finite() {
        return Err(FrontError::InvalidInput(format!("need eps > 0 and finite delta, got ({eps}, {delta})")));
    }
    let res = rh_residual(f, triple);
    if res > 1e-9 {
        return Err(FrontError::InconsistentTriple(format!("Rankine-Hugoniot residual {res:.3e}")));
    }
    let (um, up) = (triple.u_minus, triple.u_plus);
    let h = f.h_function(um, triple.c);
    if delta == 0.0 {
        return solve_first_order(&h, eps, um, up, triple.c, tol);
    }
    let kdvb_r = f.kdvb_reaction(um, up, triple.c);
    let (r, sigma, c_rd) = if delta > 0.0 { (kdvb_r, delta, eps) } else { (kdvb_r.negated(), -delta, -eps) };
    let class = classify_reaction(&r, um, up)?;
    let gap = potential_gap(&r, um, up);
    let gap_tol = 1e-12 * (1.0 + r.lipschitz_on(um, up)) * (um - up).abs().powi(2);
    if gap.abs() > gap_tol && gap.signum() == c_rd.signum() {
        return Err(FrontError::ProvablyNoTws(format!(
            "potential balance requires sgn(speed) = -sgn(∫ r) but ∫ r = {gap:.6e} and the speed is {c_rd}; reaction class {class}"
        )));
    }
    let mut out = match class {
        ReactionClass::Bistable => {
            let res = shoot_bistable(&r, sigma, um, up, tol)?;
            if (res.speed - c_rd).abs() > 1e-6 * (1.0 + c_rd.abs()) {
                return Err(FrontError::ProvablyNoTws(format!(
                    "bistable reaction admits only the speed {:.10}, but the equation fixes {c_rd}",
                    res.speed
                )));
            }
            res
        }
        ReactionClass::Monostable | ReactionClass::NegativeOnInterval => shoot_monostable(&r, sigma, c_rd, um, up, tol)?,
        ReactionClass::ReversedMonostable => {
            if c_rd < 0.0 {
                shoot_monostable(&r, sigma, c_rd, um, up, tol)?
            } else {
                let mut res = shoot_monostable(&r, sigma, c_rd, up, um, tol)?;
                res.warnings.push("reversed orientation: the profile connects u_plus at -inf to u_minus at +inf".into());
                res
            }
        }
        ReactionClass::Unstable => {
            return Err(FrontError::ProvablyNoTws(format!(
                "reaction is unstable at both end states (r'(u_-) = {:.6e}, r'(u_+) = {:.6e})",
                r.dr(um),
                r.dr(up)
            )))
        }
        ReactionClass::Degenerate => {
            return Err(FrontError::Degenerate("reaction has a multiple root at an end state".into()))
        }
    };
    out.speed = triple.c;
    Ok(out)
}

fn solve_first_order(h: &ReactionSpec, eps: f64, um: f64, up: f64, c: f64, tol: f64) -> Result<TWSResult> {
    let delta = (um - up).abs();
    let d = (up - um).signum();
    // ū moves from u_- towards u_+, so h must carry the sign of d on the open interval.
    let interior_ok = (1..400).all(|k| h.r(um + (up - um) * k as f64 / 400.0) * d > 0.0);
    if !interior_ok {
        return Err(FrontError::ProvablyNoTws(
            "h changes sign or has the wrong sign between the end states; no heteroclinic orbit of eps u' = h(u)".into(),
        ));
    }
    let (gm, gp) = (h.dr(um) / eps, h.dr(up) / eps);
    if !(gm > 0.0 && gp < 0.0) {
        return Err(FrontError::Degenerate(format!(
            "end states are not hyperbolic for eps u' = h(u): h'(u_-)/eps = {gm:.3e}, h'(u_+)/eps = {gp:.3e}"
        )));
    }
    let opts = ode_options(tol, delta);
    let mid = 0.5 * (um + up);
    let w_switch = 1e-7 * delta;
    let rhs = |_: f64, y: &State| [h.r(y[0]) / eps, 0.0];
    let run = |target: f64, t_end: f64| -> Result<(DenseTrajectory, f64)> {
        let mut traj = DenseTrajectory::default();
        let mut t_sw = None;
        integrate(rhs, 0.0, [mid, 0.0], t_end, &opts, |s| {
            traj.push(*s);
            let sgn = (mid - target).signum();
            if let Some(t) = s.find_root(|y| (y[0] - target) * sgn - w_switch) {
                t_sw = Some(t);
                return Control::Stop;
            }
            Control::Continue
        })?;
        let t = t_sw.ok_or_else(|| FrontError::NoConvergence("first-order profile did not reach an end state".into()))?;
        Ok((traj, t))
    };
    let (fwd, t_r) = run(up, 1e4 / gp.abs())?;
    let (bwd, t_l) = run(um, -1e4 / gm)?;
    let floor = 1e-13 * delta;
    let xi_r = t_r + (floor / w_switch).ln() / gp;
    let xi_l = t_l + (floor / w_switch).ln() / gm;
    let h_grid = 0.02 / gm.max(-gp);
    let k_lo = (xi_l / h_grid).floor() as i64;
    let k_hi = (xi_r / h_grid).ceil() as i64;
    let (wl, wr) = (bwd.eval(t_l)[0] - um, fwd.eval(t_r)[0] - up);
    let mut u = Vec::new();
    let mut v = Vec::new();
    for k in k_lo..=k_hi {
        let x = k as f64 * h_grid;
        let uu = if x < t_l {
            um + wl * (gm * (x - t_l)).exp()
        } else if x > t_r {
            up + wr * (gp * (x - t_r)).exp()
        } else if x >= 0.0 {
            fwd.eval(x)[0]
        } else {
            bwd.eval(x)[0]
        };
        u.push(uu);
        v.push(h.r(uu) / eps);
    }
    let profile = ProfileGrid::new(k_lo as f64 * h_grid, h_grid, u, um, up)?;
    let d1 = profile.derivative();
    let residual_sup = (2..profile.len() - 2)
        .map(|i| (eps * d1[i] - h.r(profile.values[i])).abs())
        .fold(0.0, f64::max);
    let wrong = profile.values.windows(2).map(|p| (p[1] - p[0]) * (-d)).fold(0.0, f64::max);
    Ok(TWSResult {
        profile,
        derivative: v,
        speed: c,
        residual_sup,
        monotone: wrong <= 1e-8 * delta,
        tail: TailGeometry::Monotone,
        iterations: fwd.steps().len() + bwd.steps().len(),
        conjectural: false,
        warnings: Vec::new(),
    })
}
