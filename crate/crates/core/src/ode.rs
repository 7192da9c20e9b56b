//! Dormand-Prince 5(4) integrator for planar systems with dense output.

use crate::error::{FrontError, Result};

pub type State = [f64; 2];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_init: 1e-3, h_max: f64::INFINITY, max_steps: 2_000_000 }
    }
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub t0: f64,
    pub t1: f64,
    pub y0: State,
    pub y1: State,
    rcont: [State; 5],
}

impl Step {
    /// Fifth-order dense output at `t` in `[t0, t1]` (either orientation).
    pub fn eval(&self, t: f64) -> State {
        let th = (t - self.t0) / (self.t1 - self.t0);
        let th1 = 1.0 - th;
        let r = &self.rcont;
        std::array::from_fn(|i| r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i]))))
    }

    /// Locates a sign change of `g` inside the step by bisection on the dense
    /// output. Returns the time of the crossing if `g` changes sign.
    pub fn find_root(&self, g: impl Fn(&State) -> f64) -> Option<f64> {
        let (mut a, mut b) = (self.t0, self.t1);
        let (ga, gb) = (g(&self.y0), g(&self.y1));
        if ga == 0.0 {
            return Some(a);
        }
        if ga.signum() == gb.signum() && gb != 0.0 {
            return None;
        }
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if m == a || m == b {
                break;
            }
            let gm = g(&self.eval(m));
            if gm.signum() == ga.signum() && gm != 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        Some(0.5 * (a + b))
    }
}

pub enum Control {
    Continue,
    Stop,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Integrates `y' = f(t, y)` from `t0` towards `t_end` (which may lie on
/// either side of `t0`). Every accepted step is passed to `on_step`; the
/// integration ends when `on_step` returns `Stop`, at `t_end`, or with an
/// error when the step size collapses or the step budget runs out.
/// Returns the number of accepted steps.
pub fn integrate(
    mut f: impl FnMut(f64, &State) -> State,
    t0: f64,
    y0: State,
    t_end: f64,
    opts: &OdeOptions,
    mut on_step: impl FnMut(&Step) -> Control,
) -> Result<usize> {
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.h_init.abs().min(opts.h_max).min((t_end - t0).abs()) * dir;
    let mut k1 = f(t, &y);
    let mut accepted = 0;
    for _ in 0..opts.max_steps {
        if (t_end - t) * dir <= 0.0 {
            return Ok(accepted);
        }
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        let mut k = [[0.0; 2]; 7];
        k[0] = k1;
        for s in 1..7 {
            let ys: State = std::array::from_fn(|i| y[i] + h * (0..s).map(|j| A[s][j] * k[j][i]).sum::<f64>());
            k[s] = f(t + C[s] * h, &ys);
        }
        let y_new: State = std::array::from_fn(|i| y[i] + h * (0..6).map(|j| A[6][j] * k[j][i]).sum::<f64>());
        let err = (0..2)
            .map(|i| {
                let e = h * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
                let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                (e / sc).powi(2)
            })
            .sum::<f64>()
            .sqrt()
            / std::f64::consts::SQRT_2;
        if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
            h *= 0.2;
        } else if err <= 1.0 {
            let ydiff: State = std::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: State = std::array::from_fn(|i| h * k[0][i] - ydiff[i]);
            let rcont = [
                y,
                ydiff,
                bspl,
                std::array::from_fn(|i| ydiff[i] - h * k[6][i] - bspl[i]),
                std::array::from_fn(|i| h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>()),
            ];
            let step = Step { t0: t, t1: t + h, y0: y, y1: y_new, rcont };
            t += h;
            y = y_new;
            k1 = k[6];
            accepted += 1;
            if let Control::Stop = on_step(&step) {
                return Ok(accepted);
            }
            let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 10.0);
            h = (h * fac).abs().min(opts.h_max) * dir;
        } else {
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            h *= fac;
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(FrontError::NoConvergence(format!("step size underflow at t = {t}")));
        }
    }
    Err(FrontError::NoConvergence(format!("step budget of {} exhausted at t = {t}", opts.max_steps)))
}

/// Sequence of accepted steps, searchable by time.
#[derive(Debug, Clone, Default)]
pub struct DenseTrajectory {
    steps: Vec<Step>,
}

impl DenseTrajectory {
    pub fn push(&mut self, s: Step) {
        self.steps.push(s);
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn truncate(&mut self, len: usize) {
        self.steps.truncate(len);
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Time span covered, ordered `(min, max)`.
    pub fn span(&self) -> Option<(f64, f64)> {
        let first = self.steps.first()?;
        let last = self.steps.last()?;
        Some((first.t0.min(last.t1), first.t0.max(last.t1)))
    }

    /// Dense output at `t`; clamps to the covered span.
    pub fn eval(&self, t: f64) -> State {
        let forward = self.steps[0].t1 > self.steps[0].t0;
        let idx = self.steps.partition_point(|s| if forward { s.t1 < t } else { s.t1 > t });
        let s = &self.steps[idx.min(self.steps.len() - 1)];
        let lo = s.t0.min(s.t1);
        let hi = s.t0.max(s.t1);
        s.eval(t.clamp(lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_with_dense_output() {
        let opts = OdeOptions { rtol: 1e-11, atol: 1e-13, ..Default::default() };
        let mut traj = DenseTrajectory::default();
        integrate(|_, y| [y[1], -y[0]], 0.0, [0.0, 1.0], 10.0, &opts, |s| {
            traj.push(*s);
            Control::Continue
        })
        .unwrap();
        for k in 0..=100 {
            let t = 0.1 * k as f64;
            let y = traj.eval(t);
            assert!((y[0] - t.sin()).abs() < 1e-9, "t = {t}");
            assert!((y[1] - t.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn backward_integration_and_root() {
        let opts = OdeOptions::default();
        let mut root = None;
        integrate(|_, y| [-y[0], 0.0], 0.0, [1.0, 0.0], -5.0, &opts, |s| {
            if let Some(t) = s.find_root(|y| y[0] - 2.0_f64.exp()) {
                root = Some(t);
                return Control::Stop;
            }
            Control::Continue
        })
        .unwrap();
        assert!((root.unwrap() + 2.0).abs() < 1e-9);
    }
}
