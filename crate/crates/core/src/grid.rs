//! Uniform one-dimensional grids carrying front-like samples.
//!
//! A [`ProfileGrid`] stands for a function on the whole real line: inside
//! `[xi0, xi0 + (n-1) h]` it is given by the samples, to the left it equals
//! `left_state` and to the right `right_state`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Minimum number of samples a grid must carry.
pub const MIN_GRID_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileGrid {
    pub xi0: f64,
    pub h: f64,
    pub values: Vec<f64>,
    pub left_state: f64,
    pub right_state: f64,
}

impl ProfileGrid {
    pub fn new(xi0: f64, h: f64, values: Vec<f64>, left_state: f64, right_state: f64) -> Result<Self> {
        if values.len() < MIN_GRID_LEN {
            return invalid(format!("grid needs at least {MIN_GRID_LEN} samples, got {}", values.len()));
        }
        if !(h > 0.0) || !h.is_finite() {
            return invalid(format!("grid spacing must be positive and finite, got {h}"));
        }
        if !xi0.is_finite() || !left_state.is_finite() || !right_state.is_finite() {
            return invalid("grid origin and far-field states must be finite");
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("non-finite sample at index {i}"));
        }
        Ok(Self { xi0, h, values, left_state, right_state })
    }

    /// Samples `f` at `xi0 + i h` for `i < n`.
    pub fn from_fn(
        xi0: f64,
        h: f64,
        n: usize,
        left_state: f64,
        right_state: f64,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let values = (0..n).map(|i| f(xi0 + i as f64 * h)).collect();
        Self::new(xi0, h, values, left_state, right_state)
    }

    /// Grid covering `[a, b]` with `n` nodes including both endpoints.
    pub fn on_interval(
        a: f64,
        b: f64,
        n: usize,
        left_state: f64,
        right_state: f64,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if n < 2 || !(b > a) {
            return invalid("interval grid needs b > a and n >= 2");
        }
        Self::from_fn(a, (b - a) / (n - 1) as f64, n, left_state, right_state, f)
    }

    pub fn constant(xi0: f64, h: f64, n: usize, value: f64) -> Result<Self> {
        Self::new(xi0, h, vec![value; n], value, value)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.xi0 + i as f64 * self.h
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.len() - 1)
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    /// Sample at a possibly out-of-range index, using the constant extension.
    #[inline]
    pub fn ext(&self, i: isize) -> f64 {
        if i < 0 {
            self.left_state
        } else if i as usize >= self.values.len() {
            self.right_state
        } else {
            self.values[i as usize]
        }
    }

    /// Same grid geometry with new samples.
    pub fn with_values(&self, values: Vec<f64>, left_state: f64, right_state: f64) -> Result<Self> {
        Self::new(self.xi0, self.h, values, left_state, right_state)
    }

    /// Translates the grid so that the node positions become `x + shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self { xi0: self.xi0 + shift, ..self.clone() }
    }

    /// Four-point Lagrange interpolation with the constant extension outside
    /// the sampled range.
    pub fn sample(&self, x: f64) -> f64 {
        let s = (x - self.xi0) / self.h;
        if s < 0.0 {
            return if s > -1e-12 { self.values[0] } else { self.left_state };
        }
        let last = (self.len() - 1) as f64;
        if s > last {
            return if s < last + 1e-12 { self.values[self.len() - 1] } else { self.right_state };
        }
        let i = (s.floor() as usize).min(self.len() - 2);
        let t = s - i as f64;
        if i == 0 || i + 2 >= self.len() {
            let (a, b) = (self.values[i], self.values[i + 1]);
            return a + t * (b - a);
        }
        let (p0, p1, p2, p3) = (self.values[i - 1], self.values[i], self.values[i + 1], self.values[i + 2]);
        let w0 = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let w1 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let w2 = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let w3 = (t + 1.0) * t * (t - 1.0) / 6.0;
        w0 * p0 + w1 * p1 + w2 * p2 + w3 * p3
    }

    /// Fourth-order centred first derivative, constant extension at the ends.
    pub fn derivative(&self) -> Vec<f64> {
        let h = self.h;
        (0..self.len() as isize)
            .map(|i| {
                (self.ext(i - 2) - 8.0 * self.ext(i - 1) + 8.0 * self.ext(i + 1) - self.ext(i + 2)) / (12.0 * h)
            })
            .collect()
    }

    /// Fourth-order centred second derivative, constant extension at the ends.
    pub fn second_derivative(&self) -> Vec<f64> {
        let h2 = self.h * self.h;
        (0..self.len() as isize)
            .map(|i| {
                (-self.ext(i - 2) + 16.0 * self.ext(i - 1) - 30.0 * self.ext(i) + 16.0 * self.ext(i + 1)
                    - self.ext(i + 2))
                    / (12.0 * h2)
            })
            .collect()
    }

    /// First index `i` with the level crossed between `i` and `i + 1`, and
    /// the linearly interpolated crossing position.
    pub fn crossings(&self, level: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for i in 0..self.len() - 1 {
            let (a, b) = (self.values[i] - level, self.values[i + 1] - level);
            if a == 0.0 {
                out.push(self.x(i));
            } else if a * b < 0.0 {
                out.push(self.x(i) + self.h * a / (a - b));
            }
        }
        if self.values[self.len() - 1] == level {
            out.push(self.x_end());
        }
        out
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest increase `u[i+1] - u[i]`; non-positive for a non-increasing profile.
    pub fn max_increase(&self) -> f64 {
        self.values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Maximum absolute difference on the index range `[lo, hi)`.
pub fn sup_diff(a: &[f64], b: &[f64], lo: usize, hi: usize) -> f64 {
    a[lo..hi].iter().zip(&b[lo..hi]).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
