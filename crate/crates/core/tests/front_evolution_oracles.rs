use frontlab::error::FrontError;
use frontlab::front_evolution::*;
use frontlab::grid::ProfileGrid;
use frontlab::heat_kernel::evolve_linear;
use frontlab::levy_ops::{KernelSpec, RieszFellerParams};
use frontlab::nonlinearity::{FluxSpec, ReactionSpec};
use frontlab::phase_plane::{shoot_bistable, solve_kdvb_tw};
use frontlab::shock_classify::ShockTriple;

fn rf(a: f64, theta: f64) -> RieszFellerParams {
    RieszFellerParams::new(a, theta).unwrap()
}

fn bistable() -> ReactionSpec {
    ReactionSpec::bistable_cubic(0.3)
}

fn synthetic(speed: f64, h: f64, dt: f64, steps: usize) -> Trajectory {
    let snapshots = (0..=steps)
        .map(|k| {
            let t = k as f64 * dt;
            let u = ProfileGrid::from_fn(-20.0, h, 801, 1.0, 0.0, |x| 1.0 / (1.0 + ((x - speed * t) / 2f64.sqrt()).exp()))
                .unwrap();
            Snapshot { t, u }
        })
        .collect();
    Trajectory { snapshots, dt, steps }
}

#[test]
fn heat_equation_evolution_matches_the_linear_kernel() {
    let zero = ReactionSpec::polynomial(vec![0.0]).unwrap();
    let op = EvolutionOperator::RieszFeller { params: rf(2.0, 0.0), sigma: 1.0 };
    let spec = EvolutionSpec::new(op, zero, 1.0, 0.0).with_horizon(1.0, 0.5);
    let u0 = spec.ramp_initial(0.7, 0.3).unwrap();
    let traj = evolve(&spec, &u0).unwrap();
    let lin = evolve_linear(&rf(2.0, 0.0), &u0, 1.0).unwrap();
    let got = &traj.last().u;
    let err = (0..got.len()).map(|i| (got.values[i] - lin.values[i]).abs()).fold(0.0, f64::max);
    assert!(err <= 1e-6, "sup difference {err:e}");
}

#[test]
fn equilibrium_initial_data_stays_constant() {
    let op = EvolutionOperator::RieszFeller { params: rf(1.5, 0.2), sigma: 1.0 };
    let spec = EvolutionSpec::new(op, bistable(), 1.0, 1.0).with_horizon(5.0, 1.0);
    let u0 = ProfileGrid::constant(-60.0, spec.h(), spec.n, 1.0).unwrap();
    let traj = evolve(&spec, &u0).unwrap();
    for s in &traj.snapshots {
        assert!(s.u.values.iter().all(|v| (v - 1.0).abs() < 1e-13));
    }
}

#[test]
fn local_bistable_evolution_speed_matches_the_exact_front() {
    let exact = (1.0 - 2.0 * 0.3) / 2f64.sqrt();
    let front = solve_rd_riesz_feller_tw(&rf(2.0, 0.0), 1.0, &bistable(), 1.0, 0.0, &FrontRunConfig::default()).unwrap();
    assert!((front.result.speed - exact).abs() <= 1e-2, "speed {}", front.result.speed);
    let shot = shoot_bistable(&bistable(), 1.0, 1.0, 0.0, 1e-10).unwrap();
    assert!((front.result.speed - shot.speed).abs() <= 1e-2);
    // The extracted profile is the logistic front itself.
    let p = &front.result.profile;
    let err = (0..p.len())
        .filter(|&i| p.x(i).abs() < 15.0)
        .map(|i| (p.values[i] - 1.0 / (1.0 + (p.x(i) / 2f64.sqrt()).exp())).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-3, "profile error {err:e}");
    assert!(front.result.monotone && front.result.residual_sup <= 1e-3);
}

#[test]
fn track_front_recovers_injected_speed() {
    // Shifts per snapshot are whole cells, so linear interpolation is exact.
    let trace = track_front(&synthetic(0.5, 0.05, 0.1, 40), 0.5).unwrap();
    assert!((trace.speed() - 0.5).abs() <= 1e-10);
    assert!(trace.converged && !trace.ambiguous);
    let p = extract_profile(&synthetic(0.5, 0.05, 0.1, 40), 0.5).unwrap();
    assert!(p.crossings(0.5)[0].abs() < 1e-12);
}

#[test]
fn extract_profile_rejects_wrong_speed() {
    let err = extract_profile(&synthetic(0.5, 0.05, 0.1, 40), 0.3).unwrap_err();
    assert!(matches!(err, FrontError::NotConverged(_)));
}

#[test]
fn oscillating_crossings_are_flagged() {
    let snapshots = (0..=10)
        .map(|k| {
            let t = k as f64;
            let u = ProfileGrid::from_fn(-10.0, 0.1, 201, 1.0, 0.0, |x| {
                let base = 1.0 / (1.0 + (x - 0.1 * t).exp());
                base + 0.5 * (-(x - 0.1 * t + 1.0).powi(2)).exp() * (3.0 * x).sin()
            })
            .unwrap();
            Snapshot { t, u }
        })
        .collect();
    let trace = track_front(&Trajectory { snapshots, dt: 1.0, steps: 10 }, 0.5).unwrap();
    assert!(trace.ambiguous && !trace.converged);
}

#[test]
fn riesz_feller_front_converges_with_stable_speed_under_dt_halving() {
    let p = rf(1.5, 0.3);
    let base = solve_rd_riesz_feller_tw(&p, 1.0, &bistable(), 1.0, 0.0, &FrontRunConfig::default()).unwrap();
    assert!(base.trace.r2() >= 0.999);
    let finer = FrontRunConfig { dt: Some(0.025), ..Default::default() };
    let half = solve_rd_riesz_feller_tw(&p, 1.0, &bistable(), 1.0, 0.0, &finer).unwrap();
    assert!((base.result.speed - half.result.speed).abs() < 1e-3);
    let refined = FrontRunConfig { dt: Some(0.025), n: 4801, ..Default::default() };
    let fine = solve_rd_riesz_feller_tw(&p, 1.0, &bistable(), 1.0, 0.0, &refined).unwrap();
    assert!((base.result.speed - fine.result.speed).abs() < 1e-2);
}

#[test]
fn balanced_symmetric_front_is_stationary() {
    let r = ReactionSpec::bistable_cubic(0.5);
    let front = solve_rd_riesz_feller_tw(&rf(1.5, 0.0), 1.0, &r, 1.0, 0.0, &FrontRunConfig::default()).unwrap();
    assert!(front.result.speed.abs() <= 1e-3, "speed {}", front.result.speed);
    assert!(front.result.profile.crossings(0.5)[0].abs() < 1e-12);
}

#[test]
fn riesz_feller_fronts_are_monotone_and_independent_of_initialization() {
    for theta in [0.0, 0.4] {
        let p = rf(1.5, theta);
        let smooth = solve_rd_riesz_feller_tw(&p, 1.0, &bistable(), 1.0, 0.0, &FrontRunConfig::default()).unwrap();
        let steep_cfg = FrontRunConfig { init_width: 0.25, init_center: 5.0, ..Default::default() };
        let steep = solve_rd_riesz_feller_tw(&p, 1.0, &bistable(), 1.0, 0.0, &steep_cfg).unwrap();
        for f in [&smooth, &steep] {
            assert!(f.result.monotone, "θ = {theta}");
            assert!(f.result.residual_sup <= 1e-3, "θ = {theta}: residual {:e}", f.result.residual_sup);
            assert!(f.co_moving_gap <= 1e-3);
        }
        assert!((smooth.result.speed - steep.result.speed).abs() <= 1e-2, "θ = {theta}");
    }
}

#[test]
fn non_bistable_reactions_are_rejected_by_the_front_solver() {
    // u_+ < u_- < u_*: r is negative between the end states.
    let r_neg = ReactionSpec::from_roots(-1.0, &[0.0, 1.0, 2.0]).unwrap();
    assert!(rd_speed_obstruction(&r_neg, 1.0, 0.0, 0.3).unwrap().is_some());
    let e = solve_rd_riesz_feller_tw(&rf(1.5, 0.0), 1.0, &r_neg, 1.0, 0.0, &FrontRunConfig::default()).unwrap_err();
    assert!(matches!(e, FrontError::ProvablyNoTws(_)), "{e:?}");
    let logistic = solve_rd_riesz_feller_tw(&rf(1.5, 0.0), 1.0, &ReactionSpec::logistic(), 1.0, 0.0, &FrontRunConfig::default());
    assert!(matches!(logistic, Err(FrontError::InvalidReaction(_))));
}

#[test]
fn large_time_steps_trip_the_instability_guard() {
    let stiff = ReactionSpec::from_roots(-200.0, &[0.0, 1.0, 0.3]).unwrap();
    let op = EvolutionOperator::RieszFeller { params: rf(2.0, 0.0), sigma: 1.0 };
    let spec = EvolutionSpec::new(op, stiff, 1.0, 0.0).with_horizon(5.0, 1.0).with_dt(0.5);
    let u0 = spec.ramp_initial(1.0, 0.0).unwrap();
    assert!(matches!(evolve(&spec, &u0), Err(FrontError::Instability(_))));
}

fn scaled_bistable(k: f64, a0: f64) -> ReactionSpec {
    ReactionSpec::from_roots(-k, &[0.0, 1.0, a0]).unwrap()
}

#[test]
fn narrow_hat_convolution_recovers_the_local_speed() {
    let (k, a0) = (0.05, 0.2);
    let j = KernelSpec::hat(0.05, 1.0).unwrap();
    let sigma = 0.5 * j.moment(2);
    let local = shoot_bistable(&scaled_bistable(k, a0), sigma, 1.0, 0.0, 1e-10).unwrap().speed;
    let cfg = FrontRunConfig { t_end: 700.0, snapshot_every: 2.0, dt: Some(0.2), ..Default::default() };
    let front = solve_convolution_rd_tw(&j, &scaled_bistable(k, a0), 1.0, 0.0, &cfg).unwrap();
    let rel = (front.result.speed - local).abs() / local.abs();
    assert!(rel <= 5e-2, "nonlocal {} vs local {local}", front.result.speed);
    assert!(front.result.residual_sup <= 1e-3 && front.result.monotone);
}

#[test]
fn convolution_balanced_front_is_stationary_and_translation_invariant() {
    let j = KernelSpec::hat(0.05, 1.0).unwrap();
    let cfg = FrontRunConfig { t_end: 80.0, dt: Some(0.1), ..Default::default() };
    let still = solve_convolution_rd_tw(&j, &scaled_bistable(1.0, 0.5), 1.0, 0.0, &cfg).unwrap();
    assert!(still.result.speed.abs() <= 1e-3);
    let r = scaled_bistable(1.0, 0.25);
    let a = solve_convolution_rd_tw(&j, &r, 1.0, 0.0, &cfg).unwrap();
    let shifted = FrontRunConfig { init_center: -7.0, ..cfg.clone() };
    let b = solve_convolution_rd_tw(&j, &r, 1.0, 0.0, &shifted).unwrap();
    assert!((a.result.speed - b.result.speed).abs() <= 1e-3);
}

#[test]
fn heavy_tailed_kernel_with_monostable_reaction_warns() {
    let j = KernelSpec::from_fn(0.05, 400, |x| 1.0 / (1.0 + x * x)).unwrap().with_exponential_moment(false);
    let cfg = FrontRunConfig { t_end: 4.0, ..Default::default() };
    match solve_convolution_rd_tw(&j, &ReactionSpec::logistic(), 1.0, 0.0, &cfg) {
        Ok(f) => assert!(f.result.warnings.iter().any(|w| w.contains("monostable"))),
        Err(e) => assert!(matches!(e, FrontError::NotConverged(_))),
    }
}

fn burgers_march(alpha: f64, opts: &MarchOptions) -> MarchedFront {
    let t = ShockTriple::new(1.0, 0.0, 0.5).unwrap();
    march_fractional_twe(&FluxSpec::burgers(), 1.0, alpha, &t, opts).unwrap()
}

#[test]
fn burgers_fractional_front_is_monotone_and_reaches_the_right_state() {
    let m = burgers_march(0.5, &MarchOptions::default());
    assert!(m.result.monotone);
    assert!(m.endstate_error <= 1e-3);
    assert!(m.result.residual_sup <= 1e-3, "residual {:e}", m.result.residual_sup);
    assert!(m.conditions.global >= -1e-8 && m.conditions.running_min >= -1e-8);
    assert!(m.conditions.caputo_running_min >= -1e-8);
    assert!(!m.result.conjectural);
    // Marching and refinement agree on the profile.
    let fine = burgers_march(0.5, &MarchOptions { h: Some(0.5 * 0.01 / m.lambda), ..Default::default() });
    let p = &m.result.profile;
    let diff = (0..p.len())
        .filter(|&i| p.x(i) < fine.result.profile.x_end())
        .map(|i| (p.values[i] - fine.result.profile.sample(p.x(i))).abs()).fold(0.0, f64::max);
    assert!(diff <= 1e-3, "refinement difference {diff:e}");
}

#[test]
fn anti_lax_triples_are_rejected_for_convex_flux() {
    let t = ShockTriple::new(0.0, 1.0, 0.5).unwrap();
    let e = march_fractional_twe(&FluxSpec::burgers(), 1.0, 0.5, &t, &MarchOptions::default()).unwrap_err();
    assert!(matches!(e, FrontError::ProvablyNoTws(_)));
    let bad = ShockTriple::new(1.0, 0.0, 0.7).unwrap();
    let e = march_fractional_twe(&FluxSpec::burgers(), 1.0, 0.5, &bad, &MarchOptions::default()).unwrap_err();
    assert!(matches!(e, FrontError::InconsistentTriple(_)));
}

#[test]
fn fractional_front_approaches_the_viscous_shock_as_alpha_tends_to_one() {
    let t = ShockTriple::new(1.0, 0.0, 0.5).unwrap();
    let viscous = solve_kdvb_tw(&FluxSpec::burgers(), 1.0, 0.0, &t, 1e-10).unwrap().profile;
    let gap = |alpha: f64| {
        let m = burgers_march(alpha, &MarchOptions::default());
        let p = &m.result.profile;
        (0..p.len()).filter(|&i| p.x(i).abs() < 20.0).map(|i| (p.values[i] - viscous.sample(p.x(i))).abs()).fold(0.0, f64::max)
    };
    let (g1, g2) = (gap(0.9), gap(0.98));
    assert!(g2 < g1 && g2 < 0.1, "gaps {g1:e}, {g2:e}");
}

#[test]
fn necessary_condition_integrals_on_synthetic_profiles() {
    let h = FluxSpec::burgers().h_function(1.0, 0.5);
    let front = ProfileGrid::from_fn(-30.0, 0.01, 6001, 1.0, 0.0, |x| 0.5 - 0.5 * (0.7 * x).tanh()).unwrap();
    let nc = necessary_condition_integrals(&front, 0.5, &h).unwrap();
    assert!(nc.global >= 0.0 && nc.caputo_global >= 0.0 && nc.caputo_running_min >= -1e-8);
    let flat = ProfileGrid::constant(-5.0, 0.1, 100, 1.0).unwrap();
    let z = necessary_condition_integrals(&flat, 0.5, &h).unwrap();
    assert_eq!(z.as_pair(), (0.0, 0.0));
    assert!(z.caputo_global.abs() < 1e-14);
    // h > 0 on (0, 1) while the profile decreases: the running integral turns negative.
    let violator = ReactionSpec::logistic();
    let v = necessary_condition_integrals(&front, 0.5, &violator).unwrap();
    assert!(v.running_min < 0.0 && !v.satisfied(1e-8));
}

#[test]
fn fowler_dune_experiment_reports_nonnegative_energy_terms() {
    let f = FluxSpec::polynomial(vec![0.0, 0.0, 1.0]).unwrap();
    let t = ShockTriple::with_rh_speed(&f, 1.0, 0.0).unwrap();
    let cfg = FrontRunConfig { t_end: 10.0, ..Default::default() };
    let rep = fowler_experiment(&f, 1.0, 1.0, 1.0 / 3.0, &t, None, &cfg).unwrap();
    assert!(rep.conjectural);
    assert!(rep.diffusion_integral >= 0.0 && rep.caputo_integral >= 0.0);
    assert!((rep.rhs - (rep.diffusion_integral - rep.caputo_integral)).abs() < 1e-14);
    assert!((rep.lhs - f.h_function(1.0, t.c).integral(1.0, 0.0)).abs() < 1e-14);
    assert!(!EvolutionOperator::Fowler { alpha: 1.0 / 3.0, delta: 1.0, eps: 1.0, flux: f }.has_comparison_principle());
}

#[test]
fn fowler_equation_without_diffusion_is_the_sign_flipped_fractional_equation() {
    let f = FluxSpec::burgers();
    let minus_f = FluxSpec::polynomial(vec![0.0, 0.0, -0.5]).unwrap();
    let p = ProfileGrid::from_fn(-10.0, 0.02, 1001, 1.0, 0.0, |x| 0.5 - 0.5 * x.tanh()).unwrap();
    let fowler = fowler_twe_residual(&f, 0.8, 0.0, 0.5, 0.5, &p).unwrap();
    let fkdvb = fkdvb_twe_residual(&minus_f, 0.8, 0.0, 0.5, -0.5, &p).unwrap();
    for (a, b) in fowler.iter().zip(&fkdvb) {
        assert!((a - b).abs() < 1e-12);
    }
}
