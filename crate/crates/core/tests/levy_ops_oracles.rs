//! Cross-validation of the singular-integral quadrature against an
//! independent Fourier-integral evaluation.

use frontlab::grid::ProfileGrid;
use frontlab::levy_ops::{apply_riesz_feller, rf_sup_bound, RieszFellerParams};
use frontlab::quadrature::gauss_legendre;

/// Test function `u(x) = ∂^d exp(-b (x - x0)^2)`, `d ∈ {0, 1}`.
#[derive(Clone, Copy)]
struct Gauss {
    b: f64,
    x0: f64,
    d: u8,
}

impl Gauss {
    fn eval(&self, x: f64) -> f64 {
        let y = x - self.x0;
        let g = (-self.b * y * y).exp();
        if self.d == 0 { g } else { -2.0 * self.b * y * g }
    }

    /// `D^a_θ u(x)` from the inverse Fourier integral with symbol `ψ(-κ)`
    /// applied to `û(κ) = sqrt(π/b) e^{-κ²/(4b)} e^{-iκ x0} (iκ)^d`.
    fn spectral(&self, p: (f64, f64), x: f64) -> f64 {
        let (a, th) = p;
        let y = x - self.x0;
        let shift = th * std::f64::consts::FRAC_PI_2;
        let pref = (std::f64::consts::PI / self.b).sqrt();
        let smax = (4.0 * self.b * 45.0).powf(0.25);
        // κ = s², dκ = 2 s ds
        let val = gauss_legendre(0.0, smax, 600, |s| {
            let k = s * s;
            let env = 2.0 * s * k.powf(a) * pref * (-k * k / (4.0 * self.b)).exp();
            if self.d == 0 { env * (k * y - shift).cos() } else { -env * k * (k * y - shift).sin() }
        });
        -val / std::f64::consts::PI
    }
}

fn grid(g: Gauss, h: f64) -> ProfileGrid {
    let n = (40.0 / h).round() as usize + 1;
    ProfileGrid::from_fn(-20.0, h, n, 0.0, 0.0, |x| g.eval(x)).unwrap()
}

fn sup_error(p: (f64, f64), g: Gauss, h: f64) -> f64 {
    let u = grid(g, h);
    let params = RieszFellerParams::new(p.0, p.1).unwrap();
    let d = apply_riesz_feller(&params, &u).unwrap();
    let mut err = 0.0_f64;
    for i in 0..u.len() {
        let x = u.x(i);
        if x.abs() <= 5.0 && (i % 7 == 0) {
            err = err.max((d.values[i] - g.spectral(p, x)).abs());
        }
    }
    err
}

const FUNCS: [Gauss; 3] = [
    Gauss { b: 1.0, x0: 0.0, d: 0 },
    Gauss { b: 2.0, x0: 0.5, d: 0 },
    Gauss { b: 1.0, x0: -0.3, d: 1 },
];

#[test]
fn quadrature_matches_fourier_integral_over_parameter_set() {
    let mut worst = 0.0_f64;
    for a in [0.5f64, 1.5, 1.9] {
        let t = a.min(2.0 - a) / 2.0;
        for th in [0.0, t, -t] {
            for g in FUNCS {
                let e = sup_error((a, th), g, 0.01);
                eprintln!("a={a} θ={th:+.3} b={} d={}: sup error {e:.3e}", g.b, g.d);
                worst = worst.max(e);
            }
        }
    }
    assert!(worst <= 1e-4, "worst error {worst:e}");
}

#[test]
fn gaussian_example_a15_theta03() {
    let e = sup_error((1.5, 0.3), FUNCS[0], 0.01);
    assert!(e <= 1e-4, "{e:e}");
}

#[test]
fn sup_bound_holds_for_gaussian() {
    let g = FUNCS[0];
    let u = grid(g, 0.01);
    let d1 = u.derivative().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let d2 = u.second_derivative().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    for (a, th) in [(1.5, 0.0), (1.5, 0.3), (1.2, -0.8), (1.9, 0.05)] {
        let p = RieszFellerParams::new(a, th).unwrap();
        let bound = rf_sup_bound(&p, 1.0, d1, d2).unwrap();
        let sup = apply_riesz_feller(&p, &u).unwrap().sup_norm();
        assert!(sup <= bound, "a={a} θ={th}: {sup} > {bound}");
    }
}
