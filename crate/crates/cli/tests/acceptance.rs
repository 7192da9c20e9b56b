//! Acceptance checks, one PASS/FAIL line per criterion.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::path::Path;
use std::process::Command;

use frontlab::front_evolution::{march_fractional_twe, solve_rd_riesz_feller_tw, FrontRunConfig, MarchOptions};
use frontlab::heat_kernel::kernel_report;
use frontlab::levy_ops::{apply_caputo_with_tail, apply_riesz_feller, rf_sup_bound, LeftTail};
use frontlab::phase_plane::{min_speed_estimate, shoot_bistable, solve_kdvb_tw};
use frontlab::quadrature::gauss_legendre;
use frontlab::shock_classify::{
    classify_reaction, classify_shock, jms_admissible_set, jms_beta, region_map, JmsSet, ShockClass,
};
use frontlab::{FluxSpec, ProfileGrid, ReactionClass, ReactionSpec, RieszFellerParams, ShockTriple, TWSResult};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn sup_error(res: &TWSResult, exact: impl Fn(f64) -> f64) -> f64 {
    (0..res.profile.len()).map(|i| (res.profile.values[i] - exact(res.profile.x(i))).abs()).fold(0.0, f64::max)
}

fn rf(a: f64, theta: f64) -> RieszFellerParams {
    RieszFellerParams::new(a, theta).unwrap()
}

fn bistable_front() -> Outcome {
    let r = ReactionSpec::bistable_cubic(0.3);
    let exact = (1.0 - 2.0 * 0.3) / SQRT_2;
    let shot = shoot_bistable(&r, 1.0, 1.0, 0.0, 1e-10).map_err(|e| e.to_string())?;
    let profile_err = sup_error(&shot, |x| 1.0 / (1.0 + (x / SQRT_2).exp()));
    let evolved = solve_rd_riesz_feller_tw(&rf(2.0, 0.0), 1.0, &r, 1.0, 0.0, &FrontRunConfig::default())
        .map_err(|e| e.to_string())?;
    let d_shot = (shot.speed - exact).abs();
    let d_evo = (evolved.result.speed - exact).abs();
    let detail = format!("shooting |dc| = {d_shot:.2e}, evolution |dc| = {d_evo:.2e}, profile error {profile_err:.2e}");
    check(d_shot <= 1e-4 && d_evo <= 1e-2 && profile_err <= 1e-4, detail.clone())?;
    Ok(detail)
}

fn burgers_viscous_shock() -> Outcome {
    let mut worst = (0.0_f64, 0.0_f64);
    for eps in [1.0, 0.3] {
        let t = ShockTriple::new(1.0, 0.0, 0.5).unwrap();
        let res = solve_kdvb_tw(&FluxSpec::burgers(), eps, 0.0, &t, 1e-10).map_err(|e| e.to_string())?;
        let (m, n) = (0.5, 0.5);
        let err = sup_error(&res, |x| m - n * (n * x / (2.0 * eps)).tanh());
        worst = (worst.0.max(err), worst.1.max(res.residual_sup));
    }
    let detail = format!("profile error {:.2e}, residual {:.2e}", worst.0, worst.1);
    check(worst.0 <= 1e-6 && worst.1 <= 1e-8, detail.clone())?;
    Ok(detail)
}

fn cubic_kink() -> Outcome {
    let beta = jms_beta(1.0, 1.0);
    let (um, up) = (1.2, -1.2 + SQRT_2 / 3.0);
    let f = FluxSpec::cubic();
    let t = ShockTriple::with_rh_speed(&f, um, up).map_err(|e| e.to_string())?;
    let (m, n) = (beta / 2.0, (up - um) / 2.0);
    let k = n.abs() / SQRT_2;
    let class = classify_shock(&f, &t).map_err(|e| e.to_string())?;
    let res = solve_kdvb_tw(&f, 1.0, 1.0, &t, 1e-8).map_err(|e| e.to_string())?;
    let err = sup_error(&res, |x| m + n * (k * x).tanh());
    let drh = (t.c - (3.0 * m * m + n * n)).abs();
    let detail = format!("kink error {err:.2e}, class {class}, RH speed deviation {drh:.1e}");
    check(err <= 1e-6 && class == ShockClass::SlowUndercompressive && drh <= 1e-12, detail.clone())?;
    Ok(detail)
}

fn jms_set() -> Outcome {
    let beta = jms_beta(1.0, 1.0);
    let expected = [
        (0.4, JmsSet::Interval { lo: -0.2, hi: 0.4 }),
        (0.9428, JmsSet::Interval { lo: -0.4714, hi: 0.9428 }),
        (1.2, JmsSet::PointAndInterval { point: -1.2 + beta, lo: -beta, hi: 1.2 }),
    ];
    for (um, want) in expected {
        let got = jms_admissible_set(um, 1.0, 1.0).map_err(|e| e.to_string())?;
        check(got == want, format!("u_- = {um}: {got:?} != {want:?}"))?;
    }
    // Both branches meet at u_- = 2β: the point and the interval end coincide at -β.
    let below = jms_admissible_set(2.0 * beta, 1.0, 1.0).unwrap();
    let above = jms_admissible_set(2.0 * beta * (1.0 + 1e-12), 1.0, 1.0).unwrap();
    let (lo_b, _) = below.interval();
    let (lo_a, _) = above.interval();
    let p = above.isolated_point().ok_or("no isolated point above the branch point")?;
    let jump = (lo_a - lo_b).abs().max((p - lo_b).abs());
    check(jump <= 1e-11, format!("branch-point jump {jump:e}"))?;
    Ok(format!("three branches exact, branch-point jump {jump:.1e}"))
}

const DIAMOND: [(f64, f64); 12] = [
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

fn heat_kernel_suite() -> Outcome {
    let (mut mass, mut scale, mut semi, mut minimum) = (0.0_f64, 0.0_f64, 0.0_f64, f64::INFINITY);
    for (a, th) in DIAMOND {
        let (_, r) = kernel_report(&rf(a, th), 1.0).map_err(|e| e.to_string())?;
        mass = mass.max(r.mass_deviation);
        scale = scale.max(r.scaling_deviation);
        semi = semi.max(r.semigroup_deviation);
        minimum = minimum.min(r.min_density);
    }
    let (g, _) = kernel_report(&rf(2.0, 0.0), 1.0).unwrap();
    let gauss = (0..g.n)
        .map(|j| (g.density[j] - (-g.x(j).powi(2) / 4.0).exp() / (4.0 * PI).sqrt()).abs())
        .fold(0.0, f64::max);
    let (_, one_sided) = kernel_report(&rf(0.5, -0.5), 1.0).unwrap();
    let leak = one_sided.wrong_side_mass.ok_or("no leakage figure for the extremal kernel")?;
    let detail = format!(
        "{} points: mass {mass:.1e}, scaling {scale:.1e}, semigroup {semi:.1e}, min {minimum:.1e}, Gaussian {gauss:.1e}, leakage {leak:.1e}",
        DIAMOND.len()
    );
    check(
        mass <= 1e-6 && scale <= 1e-4 && semi <= 1e-5 && minimum >= -1e-8 && gauss <= 1e-8 && leak <= 1e-6,
        detail.clone(),
    )?;
    Ok(detail)
}

fn caputo_error(alpha: f64, lambda: f64, h: f64) -> f64 {
    let xi0 = -4.0 / lambda;
    let n = (5.0 / (lambda * h)) as usize + 1;
    let g = ProfileGrid::from_fn(xi0, h, n, 0.0, 0.0, |x| (lambda * x).exp()).unwrap();
    let tail = LeftTail::Exponential { amplitude: (lambda * xi0).exp(), rate: lambda };
    let d = apply_caputo_with_tail(alpha, &g, tail).unwrap();
    (0..n).map(|i| (d.values[i] / (lambda.powf(alpha) * (lambda * g.x(i)).exp()) - 1.0).abs()).fold(0.0, f64::max)
}

fn caputo_identity() -> Outcome {
    let mut parts = Vec::new();
    for (alpha, lambda) in [(0.5, 1.0), (0.5, 2.0), (0.3, 1.0)] {
        let coarse = caputo_error(alpha, lambda, 1e-3);
        let fine = caputo_error(alpha, lambda, 5e-4);
        let ratio = coarse / fine;
        parts.push(format!("({alpha},{lambda}) {coarse:.1e} ratio {ratio:.2}"));
        check(coarse <= 1e-3 && (1.8..=2.2).contains(&ratio), parts.join("; "))?;
    }
    Ok(parts.join("; "))
}

/// `D^a_θ` of `exp(-(x - x0)^2)` by direct inverse Fourier quadrature.
fn gaussian_spectral(a: f64, th: f64, x0: f64, x: f64) -> f64 {
    let y = x - x0;
    let shift = th * FRAC_PI_2;
    let smax = 180f64.powf(0.25);
    let val = gauss_legendre(0.0, smax, 600, |s| {
        let k = s * s;
        2.0 * s * k.powf(a) * PI.sqrt() * (-k * k / 4.0).exp() * (k * y - shift).cos()
    });
    -val / PI
}

fn operator_cross_validation() -> Outcome {
    let h = 0.01;
    let n = (40.0 / h) as usize + 1;
    let mut worst = 0.0_f64;
    for x0 in [0.0, 0.5] {
        let u = ProfileGrid::from_fn(-20.0, h, n, 0.0, 0.0, |x| (-(x - x0) * (x - x0)).exp()).unwrap();
        let d1 = u.derivative().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let d2 = u.second_derivative().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for a in [0.5f64, 1.5, 1.9] {
            let t = a.min(2.0 - a) / 2.0;
            for th in [0.0, t, -t] {
                let p = rf(a, th);
                let d = apply_riesz_feller(&p, &u).map_err(|e| e.to_string())?;
                for i in (0..n).step_by(7).filter(|&i| u.x(i).abs() <= 5.0) {
                    worst = worst.max((d.values[i] - gaussian_spectral(a, th, x0, u.x(i))).abs());
                }
                // The sup bound is stated for 1 < a < 2 only.
                if a > 1.0 {
                    let bound = rf_sup_bound(&p, 1.0, d1, d2).map_err(|e| e.to_string())?;
                    check(d.sup_norm() <= bound, format!("sup bound violated at a = {a}, θ = {th}"))?;
                }
            }
        }
    }
    let detail = format!("worst sup difference {worst:.2e}, sup bound respected");
    check(worst <= 1e-4, detail.clone())?;
    Ok(detail)
}

fn cli(args: &[&str], config: &str, out: &Path) -> (i32, serde_json::Value) {
    let cfg = out.join("run.cfg");
    std::fs::write(&cfg, config).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_frontlab"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    (o.status.code().unwrap_or(-1), serde_json::from_slice(&o.stdout).unwrap_or(serde_json::Value::Null))
}

fn fkdvb_march() -> Outcome {
    let t = ShockTriple::new(1.0, 0.0, 0.5).unwrap();
    let m = march_fractional_twe(&FluxSpec::burgers(), 1.0, 0.5, &t, &MarchOptions::default())
        .map_err(|e| e.to_string())?;
    let c = m.conditions;
    let min_cond = c.global.min(c.running_min).min(c.caputo_global).min(c.caputo_running_min);
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = cli(
        &["tw"],
        "mode = fkdvb-march\nflux.kind = burgers\nshock.u_minus = 0\nshock.u_plus = 1\neps = 1\nalpha = 0.5\n",
        dir.path(),
    );
    let detail = format!(
        "monotone {}, endstate error {:.1e}, residual {:.1e}, min condition {min_cond:.1e}, anti-Lax exit {code}",
        m.result.monotone, m.endstate_error, m.result.residual_sup
    );
    check(
        m.result.monotone && m.endstate_error <= 1e-3 && m.result.residual_sup <= 1e-3 && min_cond >= -1e-8 && code == 4,
        detail.clone(),
    )?;
    Ok(detail)
}

fn riesz_feller_evolution() -> Outcome {
    let r = ReactionSpec::bistable_cubic(0.3);
    let mut parts = Vec::new();
    for theta in [0.0, 0.4] {
        let p = rf(1.5, theta);
        let smooth = solve_rd_riesz_feller_tw(&p, 1.0, &r, 1.0, 0.0, &FrontRunConfig::default()).map_err(|e| e.to_string())?;
        let steep_cfg = FrontRunConfig { init_width: 0.25, init_center: 5.0, ..Default::default() };
        let steep = solve_rd_riesz_feller_tw(&p, 1.0, &r, 1.0, 0.0, &steep_cfg).map_err(|e| e.to_string())?;
        let dc = (smooth.result.speed - steep.result.speed).abs();
        let res = smooth.result.residual_sup.max(steep.result.residual_sup);
        let mono = smooth.result.monotone && steep.result.monotone;
        parts.push(format!("θ = {theta}: c = {:.4}, |dc| = {dc:.1e}, residual {res:.1e}", smooth.result.speed));
        check(mono && res <= 1e-3 && dc <= 1e-2, parts.join("; "))?;
    }
    Ok(parts.join("; "))
}

fn tail_threshold() -> Outcome {
    let f = FluxSpec::burgers();
    let mut worst = 0.0_f64;
    for delta in [0.5, 1.0, 2.0] {
        let r = f.kdvb_reaction(1.0, 0.0, 0.5);
        let est = min_speed_estimate(&r, delta, 1.0, 0.0).map_err(|e| e.to_string())?;
        let eps_star = (-4.0 * delta * (f.df(0.0) - 0.5)).sqrt();
        worst = worst.max((est.shooting - eps_star).abs());
    }
    let detail = format!("worst |ε_shoot - ε_disc| = {worst:.1e}");
    check(worst <= 1e-2, detail.clone())?;
    Ok(detail)
}

fn region_scan() -> Outcome {
    let beta = jms_beta(1.0, 1.0);
    let map = region_map((-2.0, 2.0), (-2.0, 2.0), 1.0, 1.0, 128).map_err(|e| e.to_string())?;
    let count = |c: ReactionClass| map.cells.iter().filter(|x| x.reaction == Some(c)).count();
    let (mono, bi) = (count(ReactionClass::Monostable), count(ReactionClass::Bistable));
    // Potential balance flips sign across u_+ = -u_-.
    let flips = map
        .cells
        .iter()
        .filter(|c| c.reaction == Some(ReactionClass::Bistable) && (c.u_plus + c.u_minus).abs() > 0.05)
        .all(|c| c.gap_sign == -(c.u_plus + c.u_minus).signum() as i8 * (c.u_minus - c.u_plus).signum() as i8);
    let width = 4.0 / 128.0;
    let start = map.halfline_cells().map(|c| c.u_minus).fold(f64::INFINITY, f64::min);
    let halfline_ok = (start - 2.0 * beta).abs() <= width;
    for c in &map.cells {
        if c.u_minus < 2.0 * beta - width {
            check(!c.on_halfline, format!("half-line cell at u_- = {}", c.u_minus))?;
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let (code, json) = cli(&["region-scan"], "scan.resolution = 128\neps = 1\ndelta = 1\ncheck.points = 1000\n", dir.path());
    let mismatches = json["consistency"]["mismatches"].as_u64();
    let svg = std::fs::read_to_string(dir.path().join("region.svg")).unwrap_or_default();
    let csv_rows = std::fs::read_to_string(dir.path().join("region.csv")).map(|s| s.lines().count()).unwrap_or(0);
    let point = map.query(1.0, 0.5).and_then(|c| c.reaction);
    let direct = classify_reaction(&ReactionSpec::cubic_from_shock(1.0, 0.5), 1.0, 0.5).ok();
    let detail = format!(
        "monostable {mono}, bistable {bi}, gap sign flips {flips}, half-line from u_- = {start:.4} (2β = {:.4}), CLI exit {code}, mismatches {mismatches:?}/1000",
        2.0 * beta
    );
    check(
        mono > 0
            && bi > 0
            && flips
            && halfline_ok
            && code == 0
            && mismatches == Some(0)
            && svg.contains("<svg")
            && csv_rows == 128 * 128 + 1
            && point == direct,
        detail.clone(),
    )?;
    Ok(detail)
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("bistable exact front", bistable_front),
        ("Burgers viscous shock", burgers_viscous_shock),
        ("cubic undercompressive kink", cubic_kink),
        ("admissible set branches", jms_set),
        ("heat-kernel suite", heat_kernel_suite),
        ("Caputo exponential identity", caputo_identity),
        ("operator cross-validation", operator_cross_validation),
        ("fractional KdV-Burgers marching", fkdvb_march),
        ("Riesz-Feller bistable evolution", riesz_feller_evolution),
        ("tail-geometry threshold", tail_threshold),
        ("region map", region_scan),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
