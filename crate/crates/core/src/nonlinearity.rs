//! Flux functions f(u) and reaction terms r(u).
//!
//! Both come either as polynomials (exact derivatives and antiderivatives) or
//! as user callables with explicitly supplied derivatives; callables are
//! spot-checked against finite differences at construction.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, FrontError, Result};
use crate::quadrature::gauss_legendre;

/// Polynomial with coefficients in ascending order of degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    /// `leading * prod (u - root)`.
    pub fn from_roots(leading: f64, roots: &[f64]) -> Self {
        let mut c = vec![leading];
        for &r in roots {
            let mut next = vec![0.0; c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= r * ck;
            }
            c = next;
        }
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::new(vec![0.0]);
        }
        Self::new(self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect())
    }

    /// Antiderivative vanishing at zero.
    pub fn antiderivative(&self) -> Self {
        let mut c = vec![0.0];
        c.extend(self.coeffs.iter().enumerate().map(|(k, &ck)| ck / (k + 1) as f64));
        Self::new(c)
    }

    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        let p = self.antiderivative();
        p.eval(b) - p.eval(a)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            (0..n)
                .map(|k| self.coeffs.get(k).copied().unwrap_or(0.0) + other.coeffs.get(k).copied().unwrap_or(0.0))
                .collect(),
        )
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Poly { p: Polynomial, dp: Polynomial, d2p: Polynomial },
    Callable { f: ScalarFn, df: ScalarFn, d2f: Option<ScalarFn> },
}

impl Repr {
    fn poly(p: Polynomial) -> Self {
        let dp = p.derivative();
        let d2p = dp.derivative();
        Repr::Poly { p, dp, d2p }
    }

    fn eval(&self, u: f64) -> f64 {
        match self {
            Repr::Poly { p, .. } => p.eval(u),
            Repr::Callable { f, .. } => f(u),
        }
    }

    fn d1(&self, u: f64) -> f64 {
        match self {
            Repr::Poly { dp, .. } => dp.eval(u),
            Repr::Callable { df, .. } => df(u),
        }
    }

    fn d2(&self, u: f64) -> f64 {
        match self {
            Repr::Poly { d2p, .. } => d2p.eval(u),
            Repr::Callable { df, d2f, .. } => match d2f {
                Some(g) => g(u),
                None => {
                    let e = 1e-5 * (1.0 + u.abs());
                    (df(u + e) - df(u - e)) / (2.0 * e)
                }
            },
        }
    }

    fn integrate(&self, a: f64, b: f64) -> f64 {
        match self {
            Repr::Poly { p, .. } => p.integrate(a, b),
            Repr::Callable { f, .. } => gauss_legendre(a, b, 64, |u| f(u)),
        }
    }

    fn polynomial(&self) -> Option<&Polynomial> {
        match self {
            Repr::Poly { p, .. } => Some(p),
            Repr::Callable { .. } => None,
        }
    }
}

fn spot_check(f: &ScalarFn, df: &ScalarFn, what: &str) -> Result<()> {
    for &u in &[-1.3, -0.4, 0.0, 0.35, 0.8, 1.7] {
        let e = 1e-6 * (1.0 + f64::abs(u));
        let fd = (f(u + e) - f(u - e)) / (2.0 * e);
        let d = df(u);
        if !fd.is_finite() || !d.is_finite() {
            return invalid(format!("{what}: non-finite value near u = {u}"));
        }
        if (fd - d).abs() > 1e-5 * (1.0 + d.abs()) {
            return invalid(format!("{what}: derivative inconsistent at u = {u} (supplied {d}, finite difference {fd})"));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxKind {
    /// f(u) = u^2 / 2
    Burgers,
    /// f(u) = u^3
    Cubic,
    Polynomial,
    Callable,
}

/// Flux function of a scalar conservation law.
#[derive(Clone)]
pub struct FluxSpec {
    kind: FluxKind,
    repr: Repr,
}

impl fmt::Debug for FluxSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.repr.polynomial() {
            Some(p) => write!(f, "FluxSpec({:?}, {:?})", self.kind, p.coeffs()),
            None => write!(f, "FluxSpec({:?})", self.kind),
        }
    }
}

impl FluxSpec {
    pub fn burgers() -> Self {
        Self { kind: FluxKind::Burgers, repr: Repr::poly(Polynomial::new(vec![0.0, 0.0, 0.5])) }
    }

    pub fn cubic() -> Self {
        Self { kind: FluxKind::Cubic, repr: Repr::poly(Polynomial::new(vec![0.0, 0.0, 0.0, 1.0])) }
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return invalid("flux coefficients must be finite");
        }
        Ok(Self { kind: FluxKind::Polynomial, repr: Repr::poly(Polynomial::new(coeffs)) })
    }

    pub fn callable(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let (f, df, d2f): (ScalarFn, ScalarFn, ScalarFn) = (Arc::new(f), Arc::new(df), Arc::new(d2f));
        spot_check(&f, &df, "flux f'")?;
        spot_check(&df, &d2f, "flux f''")?;
        Ok(Self { kind: FluxKind::Callable, repr: Repr::Callable { f, df, d2f: Some(d2f) } })
    }

    pub fn kind(&self) -> FluxKind {
        self.kind
    }

    pub fn polynomial_coeffs(&self) -> Option<&[f64]> {
        self.repr.polynomial().map(|p| p.coeffs())
    }

    pub fn f(&self, u: f64) -> f64 {
        self.repr.eval(u)
    }

    pub fn df(&self, u: f64) -> f64 {
        self.repr.d1(u)
    }

    pub fn d2f(&self, u: f64) -> f64 {
        self.repr.d2(u)
    }

    /// Samples `f''` on `[a, b]` and reports whether it is positive throughout.
    pub fn is_strictly_convex_on(&self, a: f64, b: f64) -> bool {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        (0..=200).all(|k| self.d2f(lo + (hi - lo) * k as f64 / 200.0) > 0.0)
    }

    /// The integrated traveling-wave nonlinearity
    /// `h(u) = f(u) - c u - (f(u_minus) - c u_minus)`.
    pub fn h_function(&self, u_minus: f64, c: f64) -> ReactionSpec {
        match &self.repr {
            Repr::Poly { p, .. } => {
                let shift = -(p.eval(u_minus) - c * u_minus);
                let q = p.add(&Polynomial::new(vec![shift, -c]));
                ReactionSpec { kind: ReactionKind::Polynomial, repr: Repr::poly(q) }
            }
            Repr::Callable { f, df, d2f } => {
                let (f0, f1) = (f.clone(), f.clone());
                let df = df.clone();
                let base = f1(u_minus) - c * u_minus;
                ReactionSpec {
                    kind: ReactionKind::Callable,
                    repr: Repr::Callable {
                        f: Arc::new(move |u| f0(u) - c * u - base),
                        df: Arc::new(move |u| df(u) - c),
                        d2f: d2f.clone(),
                    },
                }
            }
        }
    }

    /// Reaction `r = -h` of the traveling-wave problem of the viscous or
    /// dispersive conservation law. For the pure cubic flux this is tagged as
    /// the cubic-from-shock reaction with its exact factorization.
    pub fn kdvb_reaction(&self, u_minus: f64, u_plus: f64, c: f64) -> ReactionSpec {
        if self.kind == FluxKind::Cubic {
            return ReactionSpec::cubic_from_shock(u_minus, u_plus);
        }
        self.h_function(u_minus, c).negated()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReactionKind {
    Polynomial,
    /// `r(u) = -(u - u_minus)(u - u_plus)(u - u_star)`, `u_star = -u_minus - u_plus`,
    /// the reaction of the cubic-flux traveling-wave problem.
    CubicFromShock { u_minus: f64, u_plus: f64, u_star: f64 },
    Callable,
}

/// Reaction term r(u).
#[derive(Clone)]
pub struct ReactionSpec {
    kind: ReactionKind,
    repr: Repr,
}

impl fmt::Debug for ReactionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.repr.polynomial() {
            Some(p) => write!(f, "ReactionSpec({:?}, {:?})", self.kind, p.coeffs()),
            None => write!(f, "ReactionSpec({:?})", self.kind),
        }
    }
}

impl ReactionSpec {
    pub fn polynomial(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return invalid("reaction coefficients must be finite");
        }
        Ok(Self { kind: ReactionKind::Polynomial, repr: Repr::poly(Polynomial::new(coeffs)) })
    }

    /// `leading * prod (u - root)`.
    pub fn from_roots(leading: f64, roots: &[f64]) -> Result<Self> {
        if !leading.is_finite() || roots.iter().any(|r| !r.is_finite()) {
            return invalid("reaction roots must be finite");
        }
        Ok(Self { kind: ReactionKind::Polynomial, repr: Repr::poly(Polynomial::from_roots(leading, roots)) })
    }

    /// The bistable cubic `u (1 - u) (u - a0)`.
    pub fn bistable_cubic(a0: f64) -> Self {
        Self::from_roots(-1.0, &[0.0, 1.0, a0]).expect("finite roots")
    }

    /// The logistic (KPP) reaction `u (1 - u)`.
    pub fn logistic() -> Self {
        Self::from_roots(-1.0, &[0.0, 1.0]).expect("finite roots")
    }

    pub fn cubic_from_shock(u_minus: f64, u_plus: f64) -> Self {
        let u_star = -u_minus - u_plus;
        Self {
            kind: ReactionKind::CubicFromShock { u_minus, u_plus, u_star },
            repr: Repr::poly(Polynomial::from_roots(-1.0, &[u_minus, u_plus, u_star])),
        }
    }

    pub fn callable(
        r: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dr: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let (f, df): (ScalarFn, ScalarFn) = (Arc::new(r), Arc::new(dr));
        spot_check(&f, &df, "reaction r'")?;
        Ok(Self { kind: ReactionKind::Callable, repr: Repr::Callable { f, df, d2f: None } })
    }

    pub fn kind(&self) -> ReactionKind {
        self.kind
    }

    pub fn polynomial_coeffs(&self) -> Option<&[f64]> {
        self.repr.polynomial().map(|p| p.coeffs())
    }

    pub fn r(&self, u: f64) -> f64 {
        self.repr.eval(u)
    }

    pub fn dr(&self, u: f64) -> f64 {
        self.repr.d1(u)
    }

    pub fn d2r(&self, u: f64) -> f64 {
        self.repr.d2(u)
    }

    /// `∫_a^b r(u) du`; exact for polynomials.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        self.repr.integrate(a, b)
    }

    pub fn negated(&self) -> Self {
        let repr = match &self.repr {
            Repr::Poly { p, .. } => Repr::poly(p.scaled(-1.0)),
            Repr::Callable { f, df, d2f } => {
                let (f, df) = (f.clone(), df.clone());
                Repr::Callable {
                    f: Arc::new(move |u| -f(u)),
                    df: Arc::new(move |u| -df(u)),
                    d2f: d2f.clone().map(|g| -> ScalarFn { Arc::new(move |u| -g(u)) }),
                }
            }
        };
        let kind = match self.kind {
            ReactionKind::Callable => ReactionKind::Callable,
            _ => ReactionKind::Polynomial,
        };
        Self { kind, repr }
    }

    /// Largest `|r'|` over a uniform sample of the interval between `a` and `b`.
    pub fn lipschitz_on(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        (0..=400).map(|k| self.dr(lo + (hi - lo) * k as f64 / 400.0).abs()).fold(0.0, f64::max)
    }

    /// Checks `r(u_minus) = r(u_plus) = 0` relative to the size of r on the interval.
    pub fn check_endstates(&self, u_minus: f64, u_plus: f64) -> Result<()> {
        let scale = 1.0 + self.lipschitz_on(u_minus, u_plus) * (u_minus - u_plus).abs();
        for (name, u) in [("u_minus", u_minus), ("u_plus", u_plus)] {
            let v = self.r(u);
            if !v.is_finite() || v.abs() > 1e-9 * scale {
                return Err(FrontError::InvalidReaction(format!("r({name} = {u}) = {v:e} is not zero")));
            }
        }
        Ok(())
    }
}
