use frontlab::grid::ProfileGrid;
use frontlab::heat_kernel::*;
use frontlab::levy_ops::RieszFellerParams;

const SWEEP: [(f64, f64); 12] = [
    (2.0, 0.0),
    (1.5, 0.0),
    (1.5, 0.3),
    (1.5, -0.5),
    (1.2, -0.4),
    (1.9, 0.05),
    (1.0, 0.0),
    (0.8, 0.2),
    (0.7, -0.3),
    (0.5, -0.5),
    (0.5, 0.0),
    (1.8, -0.2),
];

fn rf(a: f64, th: f64) -> RieszFellerParams {
    RieszFellerParams::new(a, th).unwrap()
}

#[test]
fn mass_and_positivity_over_sweep() {
    for (a, th) in SWEEP {
        let p = rf(a, th);
        let g = compute_kernel_auto(&p, 0.7).unwrap();
        let mass = g.mass();
        let min = g.min_density();
        eprintln!("({a},{th}) n={} mass dev {:e} min {:e} imag {:e}", g.n, (mass - 1.0).abs(), min, g.imag_residue);
        assert!((mass - 1.0).abs() <= 1e-6, "mass at ({a},{th}): {mass}");
        assert!(min >= -1e-8, "positivity at ({a},{th}): {min:e}");
    }
}

#[test]
fn strict_positivity_for_nonextremal() {
    for (a, th) in SWEEP {
        if (th.abs() - a).abs() < 1e-12 {
            continue;
        }
        let g = compute_kernel_auto(&rf(a, th), 1.0).unwrap();
        assert!(g.min_density_within(5.0) > 0.0, "({a},{th})");
    }
}

#[test]
fn scaling_over_sweep() {
    for (a, th) in SWEEP {
        let dev = check_scaling(&rf(a, th), 2.0).unwrap();
        eprintln!("scaling ({a},{th}): {dev:e}");
        assert!(dev <= 1e-4, "({a},{th}) {dev:e}");
    }
}

#[test]
fn semigroup_over_sweep() {
    for (a, th) in SWEEP {
        let dev = check_semigroup(&rf(a, th), 0.3, 0.7).unwrap();
        eprintln!("semigroup ({a},{th}): {dev:e}");
        assert!(dev <= 1e-5, "({a},{th}) {dev:e}");
    }
}

#[test]
fn gaussian_semigroup_is_tight() {
    assert!(check_semigroup(&rf(2.0, 0.0), 0.5, 0.5).unwrap() <= 1e-8);
}

#[test]
fn semigroup_small_time_limit() {
    let p = rf(1.5, 0.2);
    let dev = check_semigroup(&p, 1e-3, 1.0).unwrap();
    assert!(dev < 1e-5, "{dev:e}");
}

#[test]
fn one_sided_kernel_matches_levy_smirnov() {
    let p = rf(0.5, -0.5);
    let g = compute_kernel_auto(&p, 1.0).unwrap();
    let leak = g.wrong_side_mass().unwrap();
    eprintln!("leak {leak:e}");
    assert!(leak <= 1e-6);
    // The mirrored kernel sits on the other half-line.
    let gm = compute_kernel_auto(&rf(0.5, 0.5), 1.0).unwrap();
    assert!(gm.wrong_side_mass().unwrap() <= 1e-6);
}

fn erfc_front(x: f64, t: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / (2.0 * t.sqrt()))
}

#[test]
fn heat_equation_step_evolves_to_erfc() {
    let u0 = ProfileGrid::from_fn(-20.0, 0.02, 2001, 1.0, 0.0, |x| if x < 0.0 { 1.0 } else if x > 0.0 { 0.0 } else { 0.5 })
        .unwrap();
    let t = 0.8;
    let u = evolve_linear(&rf(2.0, 0.0), &u0, t).unwrap();
    let err = (0..u.len()).map(|i| (u.values[i] - erfc_front(u.x(i), t)).abs()).fold(0.0, f64::max);
    assert!(err < 1e-3, "{err:e}");
}

#[test]
fn heat_equation_smooth_front() {
    let u0 = ProfileGrid::from_fn(-20.0, 0.02, 2001, 1.0, 0.0, |x| erfc_front(x, 0.2)).unwrap();
    let u = evolve_linear(&rf(2.0, 0.0), &u0, 0.6).unwrap();
    let err = (0..u.len()).map(|i| (u.values[i] - erfc_front(u.x(i), 0.8)).abs()).fold(0.0, f64::max);
    assert!(err < 1e-5, "{err:e}");
}

#[test]
fn linear_evolution_preserves_nonnegativity() {
    for (a, th) in [(1.5, 0.3), (0.7, -0.3), (0.5, -0.5)] {
        let u0 = ProfileGrid::from_fn(-10.0, 0.05, 401, 1.0, 0.0, |x| 0.5 - 0.5 * (2.0 * x).tanh()).unwrap();
        let u = evolve_linear(&rf(a, th), &u0, 0.5).unwrap();
        assert!(u.values.iter().all(|&v| v >= -1e-8));
        assert_eq!((u.left_state, u.right_state), (1.0, 0.0));
    }
}

#[test]
fn doubling_resolution_does_not_increase_mass_error() {
    for (a, th) in [(1.5, 0.3), (0.8, 0.2)] {
        let p = rf(a, th);
        let (l, n) = default_resolution(&p, 1.0).unwrap();
        let e1 = (compute_kernel(&p, 1.0, l, n).unwrap().mass() - 1.0).abs();
        let e2 = (compute_kernel(&p, 1.0, 2.0 * l, 2 * n).unwrap().mass() - 1.0).abs();
        assert!(e2 <= e1.max(1e-12), "({a},{th}) {e1:e} -> {e2:e}");
    }
}
