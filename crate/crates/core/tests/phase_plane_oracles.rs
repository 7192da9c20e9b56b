use frontlab::error::FrontError;
use frontlab::nonlinearity::{FluxSpec, ReactionSpec};
use frontlab::phase_plane::*;
use frontlab::shock_classify::*;

fn logistic_front(x: f64) -> f64 {
    1.0 / (1.0 + (x / std::f64::consts::SQRT_2).exp())
}

fn sup_error(res: &TWSResult, exact: impl Fn(f64) -> f64) -> f64 {
    (0..res.profile.len()).map(|i| (res.profile.values[i] - exact(res.profile.x(i))).abs()).fold(0.0, f64::max)
}

#[test]
fn bistable_logistic_front() {
    let tol = 1e-8;
    let r = ReactionSpec::bistable_cubic(0.3);
    let res = shoot_bistable(&r, 1.0, 1.0, 0.0, tol).unwrap();
    let c_exact = 0.4 / std::f64::consts::SQRT_2;
    assert!((res.speed - c_exact).abs() < 1e-8, "c = {}", res.speed);
    let err = sup_error(&res, logistic_front);
    assert!(err < 1e-6, "profile error {err:e}");
    assert!(res.residual_sup <= 10.0 * tol, "residual {:e}", res.residual_sup);
    assert!(res.monotone);
    assert_eq!(res.profile.left_state, 1.0);
    assert_eq!(res.profile.right_state, 0.0);
}

#[test]
fn bistable_speed_signs_follow_potential() {
    for a0 in [0.2, 0.5, 0.7, 0.85] {
        let r = ReactionSpec::bistable_cubic(a0);
        let res = shoot_bistable(&r, 1.0, 1.0, 0.0, 1e-8).unwrap();
        let expected = (1.0 - 2.0 * a0) / std::f64::consts::SQRT_2;
        assert!((res.speed - expected).abs() < 1e-7, "a0 = {a0}: {}", res.speed);
        let gap = potential_gap(&r, 1.0, 0.0);
        let sign = predicted_speed_sign(gap, 1e-12);
        if sign == 0 {
            assert!(res.speed.abs() < 1e-7);
        } else {
            assert_eq!(res.speed.signum() as i8, sign);
        }
    }
}

#[test]
fn bistable_with_diffusion_scaling() {
    // ū(ξ / sqrt(σ)) solves the problem with diffusion σ at speed c sqrt(σ).
    let r = ReactionSpec::bistable_cubic(0.3);
    let res = shoot_bistable(&r, 4.0, 1.0, 0.0, 1e-8).unwrap();
    assert!((res.speed - 2.0 * 0.4 / std::f64::consts::SQRT_2).abs() < 1e-7);
    assert!(sup_error(&res, |x| logistic_front(x / 2.0)) < 1e-6);
}

#[test]
fn shooting_offset_invariance() {
    let r = ReactionSpec::bistable_cubic(0.3);
    let mut so = ShootOptions::new(1e-8);
    let a = shoot_bistable_with(&r, 1.0, 1.0, 0.0, &so).unwrap();
    so.eps0_rel = 3e-7;
    let b = shoot_bistable_with(&r, 1.0, 1.0, 0.0, &so).unwrap();
    let diff = (0..a.profile.len()).map(|i| (a.profile.values[i] - b.profile.sample(a.profile.x(i))).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-7, "{diff:e}");
}

#[test]
fn bistable_rejects_other_classes() {
    assert!(matches!(shoot_bistable(&ReactionSpec::logistic(), 1.0, 1.0, 0.0, 1e-8), Err(FrontError::InvalidInput(_))));
}

#[test]
fn monostable_kpp_fronts() {
    let r = ReactionSpec::logistic();
    let res = shoot_monostable(&r, 1.0, 2.0, 1.0, 0.0, 1e-8).unwrap();
    assert_eq!(res.tail, TailGeometry::Monotone);
    assert!(res.monotone);
    assert!(res.residual_sup < 1e-7, "{:e}", res.residual_sup);
    let res = shoot_monostable(&r, 1.0, 1.0, 1.0, 0.0, 1e-8).unwrap();
    assert_eq!(res.tail, TailGeometry::Oscillatory);
    assert!(!res.monotone);
    assert!(res.residual_sup < 1e-7);
    assert!(matches!(shoot_monostable(&r, 1.0, -1.0, 1.0, 0.0, 1e-8), Err(FrontError::ProvablyNoTws(_))));
}

#[test]
fn monostable_with_saddle_on_the_right() {
    // Mirror of the logistic front: saddle at u_+ = 1, node at u_- = 0, c < 0.
    let r = ReactionSpec::logistic();
    let res = shoot_monostable(&r, 1.0, -2.5, 0.0, 1.0, 1e-8).unwrap();
    assert_eq!(res.profile.left_state, 0.0);
    assert!(res.profile.values[0] < 1e-6);
    assert!(res.profile.values[res.profile.len() - 1] > 1.0 - 1e-6);
    assert!(res.residual_sup < 1e-7, "{:e}", res.residual_sup);
}

#[test]
fn minimal_speed_oracles() {
    let r = ReactionSpec::logistic();
    let est = min_speed_estimate(&r, 1.0, 1.0, 0.0).unwrap();
    assert_eq!(est.closed_form, Some(2.0));
    assert!((est.shooting - 2.0).abs() < 1e-2, "{}", est.shooting);
    let est4 = min_speed_estimate(&r, 4.0, 1.0, 0.0).unwrap();
    assert!((est4.closed_form.unwrap() - 4.0).abs() < 1e-14);
    assert!((est4.shooting - 2.0 * est.shooting).abs() < 2e-2);
    // Burgers: r = -h = u(1-u)/2 for the triple (1, 0, 1/2).
    let rb = FluxSpec::burgers().kdvb_reaction(1.0, 0.0, 0.5);
    let eb = min_speed_estimate(&rb, 1.0, 1.0, 0.0).unwrap();
    assert!((eb.closed_form.unwrap() - std::f64::consts::SQRT_2).abs() < 1e-14);
    assert!((eb.shooting - std::f64::consts::SQRT_2).abs() < 1e-2);
}

#[test]
fn burgers_viscous_shock() {
    for eps in [1.0, 0.3] {
        let t = ShockTriple::new(1.0, 0.0, 0.5).unwrap();
        let res = solve_kdvb_tw(&FluxSpec::burgers(), eps, 0.0, &t, 1e-10).unwrap();
        let err = sup_error(&res, |x| 0.5 - 0.5 * (0.5 * x / (2.0 * eps)).tanh());
        assert!(err < 1e-6, "eps {eps}: {err:e}");
        assert!(res.residual_sup < 1e-8, "{:e}", res.residual_sup);
        assert_eq!(res.speed, 0.5);
    }
    let bad = ShockTriple::new(0.0, 1.0, 0.5).unwrap();
    assert!(matches!(solve_kdvb_tw(&FluxSpec::burgers(), 1.0, 0.0, &bad, 1e-10), Err(FrontError::ProvablyNoTws(_))));
}

#[test]
fn cubic_undercompressive_kink() {
    let beta = jms_beta(1.0, 1.0);
    let (um, up) = (1.2, -1.2 + beta);
    let f = FluxSpec::cubic();
    let t = ShockTriple::with_rh_speed(&f, um, up).unwrap();
    let (m, n) = (beta / 2.0, (up - um) / 2.0);
    assert!((t.c - (3.0 * m * m + n * n)).abs() < 1e-12);
    assert_eq!(classify_shock(&f, &t).unwrap(), ShockClass::SlowUndercompressive);
    let res = solve_kdvb_tw(&f, 1.0, 1.0, &t, 1e-8).unwrap();
    let k = n.abs() / std::f64::consts::SQRT_2;
    let err = sup_error(&res, |x| m + n * (k * x).tanh());
    assert!(err < 1e-6, "{err:e}");
    // Off the line the bistable speed differs from ε.
    let t2 = ShockTriple::with_rh_speed(&f, 1.2, -0.9).unwrap();
    assert!(matches!(solve_kdvb_tw(&f, 1.0, 1.0, &t2, 1e-8), Err(FrontError::ProvablyNoTws(_))));
}

#[test]
fn cubic_negative_dispersion_bistable_has_no_wave() {
    let f = FluxSpec::cubic();
    let t = ShockTriple::with_rh_speed(&f, 1.0, -0.8).unwrap();
    assert!(matches!(solve_kdvb_tw(&f, 1.0, -1.0, &t, 1e-8), Err(FrontError::ProvablyNoTws(_))));
}

#[test]
fn cubic_negative_on_interval_rejected_for_positive_speed() {
    let f = FluxSpec::cubic();
    let t = ShockTriple::with_rh_speed(&f, 0.2, -1.0).unwrap();
    assert!(matches!(solve_kdvb_tw(&f, 1.0, 1.0, &t, 1e-8), Err(FrontError::ProvablyNoTws(_))));
}

#[test]
fn cubic_monostable_classical_shock() {
    let f = FluxSpec::cubic();
    let t = ShockTriple::with_rh_speed(&f, 1.0, 0.5).unwrap();
    let res = solve_kdvb_tw(&f, 1.0, 1.0, &t, 1e-8).unwrap();
    assert!(res.residual_sup < 1e-6);
    // With δ < 0 the same triple connects through the saddle at u_+.
    let res = solve_kdvb_tw(&f, 1.0, -1.0, &t, 1e-8).unwrap();
    assert!(res.residual_sup < 1e-6, "{:e}", res.residual_sup);
}

#[test]
fn kdvb_tail_transition_matches_discriminant() {
    // Convex flux, δ fixed: oscillations behind the shock vanish at ε² = -4 δ h'(u_+).
    let f = FluxSpec::burgers();
    for delta in [0.5, 1.0, 2.0] {
        let r = f.kdvb_reaction(1.0, 0.0, 0.5);
        let est = min_speed_estimate(&r, delta, 1.0, 0.0).unwrap();
        let h_prime = f.df(0.0) - 0.5;
        let eps_star = (-4.0 * delta * h_prime).sqrt();
        assert!((est.shooting - eps_star).abs() < 1e-2, "delta {delta}: {} vs {eps_star}", est.shooting);
    }
}

#[test]
fn eigenvalue_identities() {
    for (rp, s, c) in [(-1.0, 1.0, 0.3), (0.7, 2.0, -1.1), (2.0, 0.5, 0.1)] {
        let e = eigen_report(rp, s, c);
        let sum = e.eigenvalues[0] + e.eigenvalues[1];
        let prod = e.eigenvalues[0] * e.eigenvalues[1];
        assert!((sum.re + c / s).abs() < 1e-12 && sum.im.abs() < 1e-12);
        assert!((prod.re - rp / s).abs() < 1e-12 && prod.im.abs() < 1e-12);
    }
}
