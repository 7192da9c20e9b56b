//! Composite Gauss-Legendre quadrature and a few special functions that the
//! standard crates do not provide in the needed form.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

fn rule16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(16).expect("nonzero")))
}

/// Integral of `f` over `[a, b]` using `panels` equal 16-point Gauss-Legendre panels.
pub fn gauss_legendre(a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let rule = rule16();
    let panels = panels.max(1);
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * w;
            rule.integrate(lo, lo + w, &mut f)
        })
        .sum()
}

/// Bernoulli numbers B_2, B_4, ..., B_16.
const BERNOULLI_EVEN: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Hurwitz zeta function `sum_{m >= 0} (m + q)^(-s)` for `s > 1`, `q > 0`,
/// evaluated by Euler-Maclaurin summation.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    debug_assert!(s > 1.0 && q > 0.0);
    const N: usize = 12;
    let mut sum = 0.0;
    for m in 0..N {
        sum += (m as f64 + q).powf(-s);
    }
    let a = N as f64 + q;
    sum += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // Derivatives of x^(-s): d^(2k-1)/dx^(2k-1) x^(-s) = -s(s+1)...(s+2k-2) x^(-s-2k+1).
    let mut rising = s;
    let mut fact = 1.0;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let k = k + 1;
        if k > 1 {
            rising *= (s + (2 * k - 3) as f64) * (s + (2 * k - 2) as f64);
        }
        fact *= ((2 * k - 1) * (2 * k)) as f64;
        sum += b / fact * rising * a.powf(-s - (2 * k - 1) as f64);
    }
    sum
}

/// Scaled upper incomplete gamma function `e^x Γ(a, x)` for `0 < a < 1`, `x >= 0`.
///
/// Uses the regularized series from `statrs` for small `x` and a Lentz
/// continued fraction otherwise, so that large `x` neither underflows nor
/// loses relative accuracy.
pub fn scaled_upper_gamma(a: f64, x: f64) -> f64 {
    use statrs::function::gamma::{gamma, gamma_ur};
    if x <= 1.5 {
        return x.exp() * gamma(a) * gamma_ur(a, x);
    }
    // Γ(a,x) = e^{-x} x^a / (x + 1 - a - 1(1-a)/(x + 3 - a - 2(2-a)/(x + 5 - a - ...)))
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    x.powf(a) * h
}
