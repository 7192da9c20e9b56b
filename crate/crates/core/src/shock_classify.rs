//! Admissibility of shock triples and classification of reaction terms.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FrontError, Result};
use crate::nonlinearity::{FluxSpec, ReactionKind, ReactionSpec};

/// Margin used to decide sign tests on boundaries deterministically.
pub const MARGIN: f64 = 1e-12;
/// Default number of sample points for the Oleinik chord test.
pub const OLEINIK_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockTriple {
    pub u_minus: f64,
    pub u_plus: f64,
    pub c: f64,
}

impl ShockTriple {
    pub fn new(u_minus: f64, u_plus: f64, c: f64) -> Result<Self> {
        if !(u_minus.is_finite() && u_plus.is_finite() && c.is_finite()) {
            return Err(FrontError::InvalidInput("shock triple entries must be finite".into()));
        }
        if u_minus == u_plus {
            return Err(FrontError::Degenerate(format!("equal states u_minus = u_plus = {u_minus}")));
        }
        Ok(Self { u_minus, u_plus, c })
    }

    /// Triple with the Rankine-Hugoniot speed of `f`.
    pub fn with_rh_speed(f: &FluxSpec, u_minus: f64, u_plus: f64) -> Result<Self> {
        Self::new(u_minus, u_plus, rh_speed(f, u_minus, u_plus)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShockClass {
    Classical,
    SlowUndercompressive,
    FastUndercompressive,
    Expansive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReactionClass {
    Monostable,
    Bistable,
    Unstable,
    NegativeOnInterval,
    ReversedMonostable,
    Degenerate,
}

macro_rules! display_as_debug {
    ($($t:ty),*) => {$(
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Debug::fmt(self, f)
            }
        }
    )*};
}
display_as_debug!(ShockClass, ReactionClass);

pub fn rh_speed(f: &FluxSpec, u_minus: f64, u_plus: f64) -> Result<f64> {
    if u_minus == u_plus {
        return Err(FrontError::Degenerate(format!("equal states u_minus = u_plus = {u_minus}")));
    }
    Ok((f.f(u_plus) - f.f(u_minus)) / (u_plus - u_minus))
}

/// Residual of the Rankine-Hugoniot relation relative to the size of its terms.
pub fn rh_residual(f: &FluxSpec, t: &ShockTriple) -> f64 {
    let lhs = f.f(t.u_plus) - f.f(t.u_minus);
    let rhs = t.c * (t.u_plus - t.u_minus);
    (lhs - rhs).abs() / (1.0 + lhs.abs().max(rhs.abs()))
}

/// Lax' entropy condition `f'(u_+) < c < f'(u_-)`.
pub fn lax_condition(f: &FluxSpec, t: &ShockTriple) -> bool {
    f.df(t.u_plus) < t.c && t.c < f.df(t.u_minus)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OleinikReport {
    pub holds: bool,
    /// Minimum over the sample of `(f(w) - f(u_-)) / (w - u_-) - c`.
    pub min_margin: f64,
}

/// Oleinik's chord condition sampled on `max(n_samples, 100)` uniform points
/// of `(u_-, u_+]` plus two points next to `u_-`.
pub fn oleinik_condition(f: &FluxSpec, t: &ShockTriple, n_samples: usize) -> OleinikReport {
    let n = n_samples.max(100);
    let d = t.u_plus - t.u_minus;
    let chord = |w: f64| (f.f(w) - f.f(t.u_minus)) / (w - t.u_minus) - t.c;
    let near = [1e-9, 1e-6].into_iter();
    let min_margin = (1..=n)
        .map(|k| k as f64 / n as f64)
        .chain(near)
        .map(|s| chord(t.u_minus + s * d))
        .fold(f64::INFINITY, f64::min);
    let scale = 1.0 + t.c.abs() + f.df(t.u_minus).abs();
    OleinikReport { holds: min_margin >= -MARGIN * scale, min_margin }
}

fn sign_with_margin(x: f64, scale: f64) -> i8 {
    if x > MARGIN * scale {
        1
    } else if x < -MARGIN * scale {
        -1
    } else {
        0
    }
}

pub fn classify_shock(f: &FluxSpec, t: &ShockTriple) -> Result<ShockClass> {
    let res = rh_residual(f, t);
    if res > 1e-9 {
        return Err(FrontError::InconsistentTriple(format!(
            "Rankine-Hugoniot violated: relative residual {res:.3e} for c = {}",
            t.c
        )));
    }
    let scale = 1.0 + t.c.abs();
    let sp = sign_with_margin(f.df(t.u_plus) - t.c, scale);
    let sm = sign_with_margin(f.df(t.u_minus) - t.c, scale);
    Ok(match (sp, sm) {
        (1, 1) => ShockClass::SlowUndercompressive,
        (-1, -1) => ShockClass::FastUndercompressive,
        (p, m) if p <= 0 && m >= 0 => ShockClass::Classical,
        _ => ShockClass::Expansive,
    })
}

/// Reaction class per the sign definitions, oriented so that the larger
/// state plays the role of `u_-`. For `u_- < u_+` the pair is swapped and a
/// monostable result is reported as `ReversedMonostable`.
///
/// For cubic reactions built from a cubic-flux shock the label follows from
/// the ordering of the roots `u_+`, `u_* = -u_- - u_+` and `u_-`.
pub fn classify_reaction(r: &ReactionSpec, u_minus: f64, u_plus: f64) -> Result<ReactionClass> {
    if u_minus == u_plus {
        return Err(FrontError::Degenerate(format!("equal states u_minus = u_plus = {u_minus}")));
    }
    r.check_endstates(u_minus, u_plus)?;
    if let ReactionKind::CubicFromShock { u_minus: a, u_plus: b, u_star } = r.kind() {
        if a == u_minus && b == u_plus {
            return Ok(classify_cubic_ordering(u_minus, u_plus, u_star));
        }
    }
    Ok(classify_reaction_numeric(r, u_minus, u_plus))
}

fn reorient(class: ReactionClass, swapped: bool) -> ReactionClass {
    match (class, swapped) {
        (ReactionClass::Monostable, true) => ReactionClass::ReversedMonostable,
        (c, _) => c,
    }
}

fn classify_cubic_ordering(u_minus: f64, u_plus: f64, u_star: f64) -> ReactionClass {
    let swapped = u_minus < u_plus;
    let (hi, lo) = if swapped { (u_plus, u_minus) } else { (u_minus, u_plus) };
    let tol = MARGIN * (1.0 + hi.abs().max(lo.abs()));
    if (u_star - hi).abs() <= tol || (u_star - lo).abs() <= tol {
        return ReactionClass::Degenerate;
    }
    let class = if u_star < lo {
        ReactionClass::Monostable
    } else if u_star < hi {
        ReactionClass::Bistable
    } else {
        ReactionClass::NegativeOnInterval
    };
    reorient(class, swapped)
}

/// Classification from sampled values of `r` and `r'` only. Used for
/// general reactions and as an independent check of the cubic ordering rule.
pub fn classify_reaction_numeric(r: &ReactionSpec, u_minus: f64, u_plus: f64) -> ReactionClass {
    let swapped = u_minus < u_plus;
    let (hi, lo) = if swapped { (u_plus, u_minus) } else { (u_minus, u_plus) };
    let width = hi - lo;
    let slope_scale = r.lipschitz_on(lo, hi).max(1e-300);
    let d_hi = sign_with_margin(r.dr(hi) / slope_scale, 1.0);
    let d_lo = sign_with_margin(r.dr(lo) / slope_scale, 1.0);
    const N: usize = 2000;
    let interior: Vec<f64> = (1..N).map(|k| r.r(lo + width * k as f64 / N as f64)).collect();
    let class = match (d_hi, d_lo) {
        (-1, 1) if interior.iter().all(|&v| v > 0.0) => ReactionClass::Monostable,
        (-1, -1) => {
            // One sign change from negative (near lo) to positive (near hi).
            let changes = interior.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count();
            if changes == 1 && interior[0] < 0.0 && interior[N - 2] > 0.0 {
                ReactionClass::Bistable
            } else {
                ReactionClass::Degenerate
            }
        }
        (1, 1) => ReactionClass::Unstable,
        (1, -1) if interior.iter().all(|&v| v < 0.0) => ReactionClass::NegativeOnInterval,
        _ => ReactionClass::Degenerate,
    };
    reorient(class, swapped)
}

/// `∫_{u_-}^{u_+} r(υ) dυ = R(u_+) - R(u_-)`.
pub fn potential_gap(r: &ReactionSpec, u_minus: f64, u_plus: f64) -> f64 {
    r.integral(u_minus, u_plus)
}

/// Sign of the wave speed implied by the potential gap: `sgn c = -sgn(gap)`,
/// and 0 when `|gap| <= tol`.
pub fn predicted_speed_sign(gap: f64, tol: f64) -> i8 {
    if gap.abs() <= tol {
        0
    } else if gap > 0.0 {
        -1
    } else {
        1
    }
}

/// `β = (√2/3) ε / √δ`.
pub fn jms_beta(eps: f64, delta: f64) -> f64 {
    std::f64::consts::SQRT_2 / 3.0 * eps / delta.sqrt()
}

/// The set of right states reachable from `u_-` by traveling waves of the
/// cubic KdVB equation with `ε, δ > 0`. Intervals are closed on the left and
/// open on the right.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum JmsSet {
    Interval { lo: f64, hi: f64 },
    PointAndInterval { point: f64, lo: f64, hi: f64 },
}

impl JmsSet {
    pub fn interval(&self) -> (f64, f64) {
        match *self {
            JmsSet::Interval { lo, hi } | JmsSet::PointAndInterval { lo, hi, .. } => (lo, hi),
        }
    }

    pub fn isolated_point(&self) -> Option<f64> {
        match *self {
            JmsSet::PointAndInterval { point, .. } => Some(point),
            JmsSet::Interval { .. } => None,
        }
    }

    pub fn interval_contains(&self, u_plus: f64) -> bool {
        let (lo, hi) = self.interval();
        (lo..hi).contains(&u_plus)
    }

    /// Membership, with the isolated point matched within `point_tol`.
    pub fn contains(&self, u_plus: f64, point_tol: f64) -> bool {
        self.interval_contains(u_plus) || self.isolated_point().is_some_and(|p| (u_plus - p).abs() <= point_tol)
    }
}

pub fn jms_admissible_set(u_minus: f64, eps: f64, delta: f64) -> Result<JmsSet> {
    if !(eps > 0.0 && delta > 0.0) {
        return Err(FrontError::Unsupported(format!("admissible-set formula needs eps > 0 and delta > 0, got ({eps}, {delta})")));
    }
    if !(u_minus > 0.0) || !u_minus.is_finite() {
        return Err(FrontError::InvalidInput(format!("admissible-set formula needs u_minus > 0, got {u_minus}")));
    }
    let beta = jms_beta(eps, delta);
    Ok(if u_minus <= 2.0 * beta {
        JmsSet::Interval { lo: -u_minus / 2.0, hi: u_minus }
    } else {
        JmsSet::PointAndInterval { point: -u_minus + beta, lo: -beta, hi: u_minus }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub u_minus: f64,
    pub u_plus: f64,
    /// `None` on the diagonal `u_- = u_+`.
    pub reaction: Option<ReactionClass>,
    pub shock: Option<ShockClass>,
    /// `None` where the admissible-set formula does not apply (`u_- <= 0`).
    pub admissible: Option<bool>,
    /// The cell contains a point of the undercompressive half-line `u_+ = -u_- + β`, `u_- > 2β`.
    pub on_halfline: bool,
    /// Sign of the potential gap of the cubic reaction.
    pub gap_sign: i8,
}

/// Classification of the cubic flux `f(u) = u^3` over a rectangle of end states,
/// sampled at cell centres.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionMap {
    pub u_minus_range: (f64, f64),
    pub u_plus_range: (f64, f64),
    pub resolution: usize,
    pub eps: f64,
    pub delta: f64,
    pub beta: f64,
    /// Row-major in `u_minus`: cell `(i, j)` is at index `i * resolution + j`.
    pub cells: Vec<RegionCell>,
}

pub const MIN_REGION_RESOLUTION: usize = 32;

pub fn region_map(
    u_minus_range: (f64, f64),
    u_plus_range: (f64, f64),
    eps: f64,
    delta: f64,
    resolution: usize,
) -> Result<RegionMap> {
    if resolution < MIN_REGION_RESOLUTION {
        return Err(FrontError::InvalidInput(format!(
            "region resolution {resolution} is below {MIN_REGION_RESOLUTION}"
        )));
    }
    let ok_range = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a < b;
    if !ok_range(u_minus_range) || !ok_range(u_plus_range) {
        return Err(FrontError::InvalidInput("ranges must be finite with lo < hi".into()));
    }
    let beta = jms_beta(eps, delta);
    if !(eps > 0.0 && delta > 0.0) {
        return Err(FrontError::InvalidInput(format!("eps and delta must be positive, got ({eps}, {delta})")));
    }
    let du_m = (u_minus_range.1 - u_minus_range.0) / resolution as f64;
    let du_p = (u_plus_range.1 - u_plus_range.0) / resolution as f64;
    let flux = FluxSpec::cubic();
    let cells: Vec<RegionCell> = (0..resolution * resolution)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / resolution, idx % resolution);
            let um = u_minus_range.0 + (i as f64 + 0.5) * du_m;
            let up = u_plus_range.0 + (j as f64 + 0.5) * du_p;
            region_cell(&flux, um, up, eps, delta, beta, du_p)
        })
        .collect();
    Ok(RegionMap { u_minus_range, u_plus_range, resolution, eps, delta, beta, cells })
}

fn region_cell(flux: &FluxSpec, um: f64, up: f64, eps: f64, delta: f64, beta: f64, du_p: f64) -> RegionCell {
    if um == up {
        return RegionCell {
            u_minus: um,
            u_plus: up,
            reaction: None,
            shock: None,
            admissible: None,
            on_halfline: false,
            gap_sign: 0,
        };
    }
    let r = ReactionSpec::cubic_from_shock(um, up);
    let reaction = classify_reaction(&r, um, up).ok();
    let shock = ShockTriple::with_rh_speed(flux, um, up).ok().and_then(|t| classify_shock(flux, &t).ok());
    let on_halfline = um > 2.0 * beta && (up - (beta - um)).abs() <= 0.5 * du_p;
    let admissible = jms_admissible_set(um, eps, delta).ok().map(|s| s.interval_contains(up) || on_halfline);
    let gap = potential_gap(&r, um, up);
    let gap_tol = 1e-12 * (1.0 + (um - up).abs().powi(4));
    let gap_sign = if gap.abs() <= gap_tol { 0 } else { gap.signum() as i8 };
    RegionCell { u_minus: um, u_plus: up, reaction, shock, admissible, on_halfline, gap_sign }
}

fn admissible_label(a: Option<bool>) -> &'static str {
    match a {
        Some(true) => "true",
        Some(false) => "false",
        None => "na",
    }
}

fn label<T: fmt::Display>(x: Option<T>) -> String {
    x.map_or_else(|| "na".to_string(), |v| v.to_string())
}

impl RegionMap {
    pub fn cell(&self, i: usize, j: usize) -> &RegionCell {
        &self.cells[i * self.resolution + j]
    }

    /// Cell containing `(u_minus, u_plus)`, if inside the mapped rectangle.
    pub fn query(&self, u_minus: f64, u_plus: f64) -> Option<&RegionCell> {
        let n = self.resolution as f64;
        let si = (u_minus - self.u_minus_range.0) / (self.u_minus_range.1 - self.u_minus_range.0) * n;
        let sj = (u_plus - self.u_plus_range.0) / (self.u_plus_range.1 - self.u_plus_range.0) * n;
        if !(0.0..n).contains(&si) || !(0.0..n).contains(&sj) {
            return None;
        }
        Some(self.cell(si as usize, sj as usize))
    }

    pub fn halfline_cells(&self) -> impl Iterator<Item = &RegionCell> {
        self.cells.iter().filter(|c| c.on_halfline)
    }

    /// CSV with columns `u_minus,u_plus,reaction_class,shock_class,admissible,on_halfline`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u_minus,u_plus,reaction_class,shock_class,admissible,on_halfline\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{:.16e},{:.16e},{},{},{},{}\n",
                c.u_minus,
                c.u_plus,
                label(c.reaction),
                label(c.shock),
                admissible_label(c.admissible),
                c.on_halfline
            ));
        }
        out
    }

    /// Static SVG: cells coloured by reaction class, admissible cells
    /// overlaid in grey, the undercompressive half-line drawn thick and the
    /// balance line `u_+ = -u_-` dashed.
    pub fn to_svg(&self) -> String {
        let size = 640.0;
        let margin = 48.0;
        let n = self.resolution as f64;
        let cw = size / n;
        let (m0, m1) = self.u_minus_range;
        let (p0, p1) = self.u_plus_range;
        let px = |um: f64| margin + (um - m0) / (m1 - m0) * size;
        let py = |up: f64| margin + size - (up - p0) / (p1 - p0) * size;
        let mut s = String::new();
        s.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{w}\" viewBox=\"0 0 {w} {w}\">\n",
            w = size + 2.0 * margin
        ));
        s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        for (idx, c) in self.cells.iter().enumerate() {
            let (i, j) = ((idx / self.resolution) as f64, (idx % self.resolution) as f64);
            let colour = match c.reaction {
                Some(ReactionClass::Monostable) => "#9ecae1",
                Some(ReactionClass::Bistable) => "#fdae6b",
                Some(ReactionClass::NegativeOnInterval) => "#a1d99b",
                Some(ReactionClass::ReversedMonostable) => "#bcbddc",
                Some(ReactionClass::Unstable) => "#fb6a4a",
                _ => "#ffffff",
            };
            let x = margin + i * cw;
            let y = margin + size - (j + 1.0) * cw;
            s.push_str(&format!(
                "<rect x=\"{x:.3}\" y=\"{y:.3}\" width=\"{w:.3}\" height=\"{w:.3}\" fill=\"{colour}\"/>\n",
                w = cw + 0.05
            ));
            if c.admissible == Some(true) && !c.on_halfline {
                s.push_str(&format!(
                    "<rect x=\"{x:.3}\" y=\"{y:.3}\" width=\"{w:.3}\" height=\"{w:.3}\" fill=\"#404040\" fill-opacity=\"0.35\"/>\n",
                    w = cw + 0.05
                ));
            }
        }
        // Balance line u_+ = -u_-.
        s.push_str(&format!(
            "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"black\" stroke-dasharray=\"6,4\" stroke-width=\"1\"/>\n",
            px(m0),
            py(-m0),
            px(m1),
            py(-m1)
        ));
        // Undercompressive half-line u_+ = -u_- + β for u_- > 2β.
        let start = (2.0 * self.beta).max(m0);
        if start < m1 {
            s.push_str(&format!(
                "<line x1=\"{:.3}\" y1=\"{:.3}\" x2=\"{:.3}\" y2=\"{:.3}\" stroke=\"black\" stroke-width=\"4\"/>\n",
                px(start),
                py(self.beta - start),
                px(m1),
                py(self.beta - m1)
            ));
        }
        s.push_str(&format!(
            "<rect x=\"{margin}\" y=\"{margin}\" width=\"{size}\" height=\"{size}\" fill=\"none\" stroke=\"black\"/>\n"
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"14\" text-anchor=\"middle\">u_minus</text>\n",
            margin + size / 2.0,
            size + 1.7 * margin
        ));
        s.push_str(&format!(
            "<text x=\"14\" y=\"{:.1}\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1})\">u_plus</text>\n",
            margin + size / 2.0,
            margin + size / 2.0
        ));
        for (v, lab) in [(m0, format!("{m0}")), (m1, format!("{m1}"))] {
            s.push_str(&format!("<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">{lab}</text>\n", px(v), size + margin + 16.0));
        }
        for (v, lab) in [(p0, format!("{p0}")), (p1, format!("{p1}"))] {
            s.push_str(&format!("<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"end\">{lab}</text>\n", margin - 4.0, py(v) + 4.0));
        }
        s.push_str("</svg>\n");
        s
    }
}
