use std::fmt;
use std::path::Path;

use frontlab::front_evolution::{
    fowler_experiment, march_fractional_twe, rd_speed_obstruction, solve_convolution_rd_tw, solve_rd_riesz_feller_tw,
    FrontRunConfig, MarchOptions,
};
use frontlab::heat_kernel::kernel_report;
use frontlab::phase_plane::{shoot_bistable, shoot_monostable, solve_kdvb_tw};
use frontlab::shock_classify::{
    classify_reaction, classify_shock, jms_admissible_set, jms_beta, lax_condition, oleinik_condition, potential_gap,
    predicted_speed_sign, region_map, rh_residual, OLEINIK_SAMPLES,
};
use frontlab::{FluxSpec, FrontError, KernelSpec, ReactionClass, ReactionSpec, RieszFellerParams, ShockTriple, TWSResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{ConfigError, RunConfig};
use crate::output::{profile_svg, to_json, write_atomic};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(FrontError),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(e) => match e {
                FrontError::InvalidInput(_) | FrontError::Unsupported(_) | FrontError::Resolution { .. } => 2,
                FrontError::InconsistentTriple(_) | FrontError::InvalidReaction(_) | FrontError::Degenerate(_) => 3,
                FrontError::ProvablyNoTws(_) => 4,
                FrontError::NoConvergence(_) | FrontError::Instability(_) | FrontError::NotConverged(_) => 5,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Core(e) => match e {
                FrontError::InvalidInput(_) => "invalid_input",
                FrontError::Unsupported(_) => "unsupported",
                FrontError::Resolution { .. } => "resolution",
                FrontError::InconsistentTriple(_) => "inconsistent_triple",
                FrontError::InvalidReaction(_) => "invalid_reaction",
                FrontError::Degenerate(_) => "degenerate",
                FrontError::ProvablyNoTws(_) => "provably_no_tws",
                FrontError::NoConvergence(_) => "no_convergence",
                FrontError::Instability(_) => "instability",
                FrontError::NotConverged(_) => "not_converged",
            },
        }
    }

    pub fn report(&self) -> String {
        to_json(&json!({
            "schema": "frontlab.error.v1",
            "status": "error",
            "exit_code": self.exit_code(),
            "kind": self.kind(),
            "reason": self.to_string(),
        }))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<FrontError> for CliError {
    fn from(e: FrontError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub struct Context<'a> {
    pub out: &'a Path,
    pub seed: u64,
    pub svg: bool,
}

impl Context<'_> {
    fn write(&self, name: &str, contents: &str) -> CliResult<()> {
        Ok(write_atomic(&self.out.join(name), contents)?)
    }
}

const FLUX_KEYS: [&str; 2] = ["flux.kind", "flux.coeffs"];
const SHOCK_KEYS: [&str; 3] = ["shock.u_minus", "shock.u_plus", "shock.c"];
const REACTION_KEYS: [&str; 3] = ["reaction.kind", "reaction.a0", "reaction.coeffs"];
const STATE_KEYS: [&str; 2] = ["states.u_minus", "states.u_plus"];
const GRID_KEYS: [&str; 7] =
    ["grid.l", "grid.n", "time.t_end", "time.dt", "time.snapshot_every", "init.width", "init.center"];

fn flux_from(cfg: &RunConfig) -> CliResult<FluxSpec> {
    Ok(match cfg.str("flux.kind").unwrap_or("burgers") {
        "burgers" => FluxSpec::burgers(),
        "cubic" => FluxSpec::cubic(),
        "polynomial" => {
            let c = cfg.list_f64("flux.coeffs")?.ok_or_else(|| ConfigError("flux.coeffs is required".into()))?;
            FluxSpec::polynomial(c)?
        }
        other => return Err(CliError::Config(format!("flux.kind must be burgers, cubic or polynomial, got {other}"))),
    })
}

fn reaction_from(cfg: &RunConfig) -> CliResult<ReactionSpec> {
    Ok(match cfg.require_str("reaction.kind")? {
        "bistable" => {
            let a0 = cfg.require_f64("reaction.a0")?;
            if !(a0 > 0.0 && a0 < 1.0) {
                return Err(CliError::Config(format!("reaction.a0 must lie in (0, 1), got {a0}")));
            }
            ReactionSpec::bistable_cubic(a0)
        }
        "logistic" => ReactionSpec::logistic(),
        "polynomial" => {
            let c = cfg.list_f64("reaction.coeffs")?.ok_or_else(|| ConfigError("reaction.coeffs is required".into()))?;
            ReactionSpec::polynomial(c)?
        }
        other => {
            return Err(CliError::Config(format!("reaction.kind must be bistable, logistic or polynomial, got {other}")))
        }
    })
}

fn states_from(cfg: &RunConfig) -> CliResult<(f64, f64)> {
    Ok((cfg.f64_or("states.u_minus", 1.0)?, cfg.f64_or("states.u_plus", 0.0)?))
}

fn triple_from(cfg: &RunConfig, f: &FluxSpec) -> CliResult<ShockTriple> {
    let um = cfg.require_f64("shock.u_minus")?;
    let up = cfg.require_f64("shock.u_plus")?;
    Ok(match cfg.f64("shock.c")? {
        Some(c) => ShockTriple::new(um, up, c)?,
        None => ShockTriple::with_rh_speed(f, um, up)?,
    })
}

fn run_config_from(cfg: &RunConfig) -> CliResult<FrontRunConfig> {
    let d = FrontRunConfig::default();
    Ok(FrontRunConfig {
        l: cfg.positive_or("grid.l", d.l)?,
        n: cfg.usize_or("grid.n", d.n)?,
        t_end: cfg.positive_or("time.t_end", d.t_end)?,
        snapshot_every: cfg.positive_or("time.snapshot_every", d.snapshot_every)?,
        dt: cfg.f64("time.dt")?,
        init_width: cfg.positive_or("init.width", d.init_width)?,
        init_center: cfg.f64_or("init.center", d.init_center)?,
        ..d
    })
}

fn keys<'a>(groups: &[&[&'a str]]) -> Vec<&'a str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

pub fn cmd_classify(cfg: &RunConfig, ctx: &Context) -> CliResult<Value> {
    cfg.check_keys(&keys(&[&FLUX_KEYS, &SHOCK_KEYS, &["eps", "delta", "jms.point_tol"]]))?;
    let f = flux_from(cfg)?;
    let t = triple_from(cfg, &f)?;
    let shock = classify_shock(&f, &t)?;
    let r = f.kdvb_reaction(t.u_minus, t.u_plus, t.c);
    let reaction = classify_reaction(&r, t.u_minus, t.u_plus)?;
    let gap = potential_gap(&r, t.u_minus, t.u_plus);
    let oleinik = oleinik_condition(&f, &t, OLEINIK_SAMPLES);
    let point_tol = cfg.positive_or("jms.point_tol", 1e-4)?;
    let (eps, delta) = (cfg.f64("eps")?, cfg.f64("delta")?);
    let jms = match (f.kind(), eps, delta) {
        (frontlab::nonlinearity::FluxKind::Cubic, Some(eps), Some(delta)) if t.u_minus > 0.0 => {
            let set = jms_admissible_set(t.u_minus, eps, delta)?;
            let beta = jms_beta(eps, delta);
            let (lo, hi) = set.interval();
            Some(json!({
                "eps": eps,
                "delta": delta,
                "beta": beta,
                "lo": lo,
                "hi": hi,
                "point": set.isolated_point(),
                "admissible": set.contains(t.u_plus, point_tol),
                "on_halfline": set.isolated_point().is_some_and(|p| (t.u_plus - p).abs() <= point_tol),
            }))
        }
        _ => None,
    };
    let admissible = match &jms {
        Some(j) => j["admissible"].as_bool().unwrap_or(false),
        None => oleinik.holds,
    };
    let summary = json!({
        "schema": "frontlab.classify.v1",
        "status": "ok",
        "flux": format!("{:?}", f.kind()).to_lowercase(),
        "u_minus": t.u_minus,
        "u_plus": t.u_plus,
        "c": t.c,
        "rh_residual": rh_residual(&f, &t),
        "shock_class": shock.to_string(),
        "lax": lax_condition(&f, &t),
        "oleinik": oleinik.holds,
        "oleinik_margin": oleinik.min_margin,
        "reaction_class": reaction.to_string(),
        "potential_gap": gap,
        "predicted_speed_sign": predicted_speed_sign(gap, 1e-12),
        "jms": jms,
        "admissible": admissible,
    });
    ctx.write("classify.json", &to_json(&summary))?;
    Ok(summary)
}

pub fn cmd_kernel(cfg: &RunConfig, ctx: &Context) -> CliResult<Value> {
    cfg.check_keys(&["kernel.a", "kernel.theta", "kernel.t", "kernel.csv_half_width"])?;
    let p = RieszFellerParams::new(cfg.require_f64("kernel.a")?, cfg.f64_or("kernel.theta", 0.0)?)?;
    let t = cfg.positive_or("kernel.t", 1.0)?;
    if !p.is_nontrivial() {
        return Err(FrontError::Unsupported("trivial parameters: the kernel is a moving point mass".into()).into());
    }
    let (g, report) = kernel_report(&p, t)?;
    let half = cfg.f64("kernel.csv_half_width")?.unwrap_or(f64::INFINITY);
    let mut csv = String::from("x,density\n");
    for (j, d) in g.density.iter().enumerate() {
        let x = g.x(j);
        if x.abs() <= half {
            csv.push_str(&format!("{x:.16e},{d:.16e}\n"));
        }
    }
    ctx.write("kernel.csv", &csv)?;
    let mut summary = serde_json::to_value(&report).expect("report serializes");
    summary["schema"] = json!("frontlab.kernel.v1");
    summary["status"] = json!("ok");
    summary["half_line_support"] = json!(!p.is_nonextremal() && p.a() < 1.0);
    ctx.write("kernel_report.json", &to_json(&summary))?;
    Ok(summary)
}

fn tw_summary(mode: &str, r: &TWSResult) -> Value {
    json!({
        "schema": "frontlab.tw.v1",
        "status": "ok",
        "mode": mode,
        "speed": r.speed,
        "residual_sup": r.residual_sup,
        "monotone": r.monotone,
        "tail": format!("{:?}", r.tail),
        "conjectural": r.conjectural,
        "warnings": r.warnings,
        "points": r.profile.len(),
        "iterations": r.iterations,
    })
}

fn write_profile(ctx: &Context, r: &TWSResult, title: &str) -> CliResult<()> {
    ctx.write("profile.csv", &r.profile_csv())?;
    if ctx.svg {
        ctx.write("profile.svg", &profile_svg(&r.profile.xs(), &r.profile.values, title))?;
    }
    Ok(())
}

pub fn cmd_tw(cfg: &RunConfig, ctx: &Context) -> CliResult<Value> {
    let mode = cfg.require_str("mode")?;
    let summary = match mode {
        "local-shoot" => tw_local_shoot(cfg, ctx)?,
        "kdvb-shoot" => tw_kdvb_shoot(cfg, ctx)?,
        "rd-evolve" => tw_rd_evolve(cfg, ctx)?,
        "fkdvb-march" => tw_fkdvb_march(cfg, ctx)?,
        "fowler" => tw_fowler(cfg, ctx)?,
        other => {
            return Err(CliError::Config(format!(
                "mode must be local-shoot, kdvb-shoot, rd-evolve, fkdvb-march or fowler, got {other}"
            )))
        }
    };
    ctx.write("tw.json", &to_json(&summary))?;
    Ok(summary)
}

fn tw_local_shoot(cfg: &RunConfig, ctx: &Context) -> CliResult<Value> {
    cfg.check_keys(&keys(&[&["mode", "sigma", "speed", "tol"], &REACTION_KEYS, &STATE_KEYS]))?;
    let r = reaction_from(cfg)?;
    let (um, up) = states_from(cfg)?;
    let sigma = cfg.positive_or("sigma", 1.0)?;
    let tol = cfg.positive_or("tol", 1e-8)?;
    let res = match classify_reaction(&r, um, up)? {
        ReactionClass::Bistable => shoot_bistable(&r, sigma, um, up, tol)?,
        ReactionClass::Monostable => {
            let c = cfg.require_f64("speed")?;
            shoot_monostable(&r, sigma, c, um, up, tol)?
        }
        other => {
            return Err(FrontError::InvalidReaction(format!("local shooting needs a bistable or monostable reaction, got {other}")).into())
        }
    };
    write_profile(ctx, &res, "local traveling wave")?;
    Ok(tw_summary("local-shoot", &res))
}

fn tw_kdvb_shoot(cfg: &RunConfig, ctx: &Context) -> CliResult<Value> {
    cfg.check_keys(&keys(&[&["mode", "eps", "delta", "tol"], &FLUX_KEYS, &SHOCK_KEYS]))?;
    let f = flux_from(cfg)?;
    let t = triple_from(cfg, &f)?;
    let res = solve_kdvb_tw(&f, cfg.positive_or("eps", 1.0)?, cfg.f64_or("delta", 0.0)?, &t, cfg.positive_or("tol", 1e-8)?)?;
    write_profile(ctx, &res, "KdV-Burgers traveling wave")?;
    Ok(tw_summary("kdvb-shoot", &res))
}

fn tw_rd_evolve(cfg: &RunConfig, ctx: &Context) -> CliResult<Value> {
    cfg.check_keys(&keys(&[
        &["mode", "sigma", "speed", "operator.kind", "operator.a", "operator.theta"],
        &["kernel.shape", "kernel.width", "kernel.h"],
        &REACTION_KEYS,
        &STATE_KEYS,
        &GRID_KEYS,
    ]))?;
    let r = reaction_from(cfg)?;
    let (um, up) = states_from(cfg)?;
    if let Some(c) = cfg.f64("speed")? {
        if let Some(reason) = rd_speed_obstruction(&r, um, up, c)? {
            return Err(FrontError::ProvablyNoTws(reason).into());
        }
    }
    let run = run_config_from(cfg)?;
    let front = match cfg.str("operator.kind").unwrap_or("riesz-feller") {
        "riesz-feller" => {
            let p = RieszFellerParams::new(cfg.f64_or("operator.a", 2.0)?, cfg.f64_or("operator.theta", 0.0)?)?;
            solve_rd_riesz_feller_tw(&p, cfg.positive_or("sigma", 1.0)?, &r, um, up, &run)?
        }
        "convolution" => {
            let h = cfg.positive_or("kernel.h", 0.05)?;
            let w = cfg.positive_or("kernel.width", 1.0)?;
            let j = match cfg.str("kernel.shape").unwrap_or("hat") {
                "hat" => KernelSpec::hat(h, w)?,
                "indicator" => KernelSpec::indicator(h, w)?,
                other => return Err(CliError::Config(format!("kernel.shape must be hat or indicator, got {other}"))),
            };
            solve_convolution_rd_tw(&j, &r, um, up, &run)?
        }
        other => return Err(CliError::Config(format!("operator.kind must be riesz-feller or convolution, got {other}"))),
    };
    write_profile(ctx, &front.result, "evolved front")?;
    let mut s = tw_summary("rd-evolve", &front.result);
    s["evolution"] = json!({
        "r2": front.trace.r2(),
        "co_moving_gap": front.co_moving_gap,
        "dt": front.dt,
        "ambiguous": front.trace.ambiguous,
    });
    Ok(s)
}

fn tw_fkdvb_march(cfg: &RunConfig, ctx: &Context) -> CliResult<Value> {
    cfg.check_keys(&keys(&[&["mode", "eps", "alpha", "march.h", "march.endstate_tol"], &FLUX_KEYS, &SHOCK_KEYS]))?;
    let f = flux_from(cfg)?;
    let t = triple_from(cfg, &f)?;
    let opts = MarchOptions {
        h: cfg.f64("march.h")?,
        endstate_tol: cfg.positive_or("march.endstate_tol", 1e-3)?,
        ..Default::default()
    };
    let m = march_fractional_twe(&f, cfg.positive_or("eps", 1.0)?, cfg.require_f64("alpha")?, &t, &opts)?;
    write_profile(ctx, &m.result, "fractional KdV-Burgers front")?;
    let mut graded = String::from("xi,u\n");
    for (x, u) in m.xi.iter().zip(&m.u) {
        graded.push_str(&format!("{x:.16e},{u:.16e}\n"));
    }
    ctx.write("profile_graded.csv", &graded)?;
    let mut s = tw_summary("fkdvb-march", &m.result);
    s["march"] = json!({
        "endstate_error": m.endstate_error,
        "lambda": m.lambda,
        "nodes": m.u.len(),
        "xi_max": m.xi.last().copied(),
    });
    s["necessary_conditions"] = serde_json::to_value(m.conditions).expect("serializable");
    Ok(s)
}

fn tw_fowler(cfg: &RunConfig, ctx: &Context) -> CliResult<Value> {
    cfg.check_keys(&keys(&[&["mode", "eps", "delta", "alpha"], &FLUX_KEYS, &SHOCK_KEYS, &GRID_KEYS]))?;
    let f = flux_from(cfg)?;
    let t = triple_from(cfg, &f)?;
    let run = run_config_from(cfg)?;
    let rep = fowler_experiment(
        &f,
        cfg.positive_or("eps", 1.0)?,
        cfg.positive_or("delta", 1.0)?,
        cfg.require_f64("alpha")?,
        &t,
        None,
        &run,
    )?;
    let xs = rep.profile.xs();
    let mut csv = String::from("xi,u\n");
    for (x, u) in xs.iter().zip(&rep.profile.values) {
        csv.push_str(&format!("{x:.16e},{u:.16e}\n"));
    }
    ctx.write("profile.csv", &csv)?;
    if ctx.svg {
        ctx.write("profile.svg", &profile_svg(&xs, &rep.profile.values, "Fowler equation, final snapshot"))?;
    }
    let (speed, r2) = rep.trace.as_ref().map_or((None, None), |t| (Some(t.speed()), Some(t.r2())));
    Ok(json!({
        "schema": "frontlab.tw.v1",
        "status": "ok",
        "mode": "fowler",
        "speed": speed,
        "conjectural": rep.conjectural,
        "warnings": rep.warnings,
        "points": rep.profile.len(),
        "fowler": {
            "rh_speed": t.c,
            "r2": r2,
            "lhs": rep.lhs,
            "diffusion_integral": rep.diffusion_integral,
            "caputo_integral": rep.caputo_integral,
            "rhs": rep.rhs,
            "overshoot": rep.overshoot,
        },
    }))
}

pub fn cmd_region_scan(cfg: &RunConfig, ctx: &Context) -> CliResult<Value> {
    cfg.check_keys(&[
        "scan.u_minus_min",
        "scan.u_minus_max",
        "scan.u_plus_min",
        "scan.u_plus_max",
        "scan.resolution",
        "eps",
        "delta",
        "check.points",
    ])?;
    let um_range = (cfg.f64_or("scan.u_minus_min", -2.0)?, cfg.f64_or("scan.u_minus_max", 2.0)?);
    let up_range = (cfg.f64_or("scan.u_plus_min", -2.0)?, cfg.f64_or("scan.u_plus_max", 2.0)?);
    let res = cfg.usize_or("scan.resolution", 128)?;
    let (eps, delta) = (cfg.positive_or("eps", 1.0)?, cfg.positive_or("delta", 1.0)?);
    let map = region_map(um_range, up_range, eps, delta, res)?;
    ctx.write("region.csv", &map.to_csv())?;
    ctx.write("region.svg", &map.to_svg())?;

    // Point queries against an independent cell lookup and classification.
    let points = cfg.usize_or("check.points", 1000)?;
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let (dm, dp) = ((um_range.1 - um_range.0) / res as f64, (up_range.1 - up_range.0) / res as f64);
    let mut mismatches = 0usize;
    let mut boundary = 0usize;
    for _ in 0..points {
        let um = rng.random_range(um_range.0..um_range.1);
        let up = rng.random_range(up_range.0..up_range.1);
        let i = (((um - um_range.0) / dm) as usize).min(res - 1);
        let j = (((up - up_range.0) / dp) as usize).min(res - 1);
        let (cm, cp) = (um_range.0 + (i as f64 + 0.5) * dm, up_range.0 + (j as f64 + 0.5) * dp);
        let expected = classify_reaction(&ReactionSpec::cubic_from_shock(cm, cp), cm, cp).ok();
        let got = map.query(um, up).and_then(|c| c.reaction);
        if got != expected {
            mismatches += 1;
        }
        if classify_reaction(&ReactionSpec::cubic_from_shock(um, up), um, up).ok() != expected {
            boundary += 1;
        }
    }
    let mut counts = std::collections::BTreeMap::new();
    for c in &map.cells {
        *counts.entry(c.reaction.map_or("na".to_string(), |r| r.to_string())).or_insert(0usize) += 1;
    }
    let summary = json!({
        "schema": "frontlab.region_scan.v1",
        "status": "ok",
        "resolution": res,
        "u_minus_range": [um_range.0, um_range.1],
        "u_plus_range": [up_range.0, up_range.1],
        "eps": eps,
        "delta": delta,
        "beta": map.beta,
        "halfline_start": 2.0 * map.beta,
        "halfline_cells": map.halfline_cells().count(),
        "reaction_counts": counts,
        "consistency": {
            "seed": ctx.seed,
            "points": points,
            "mismatches": mismatches,
            "cell_boundary_disagreements": boundary,
        },
    });
    ctx.write("region.json", &to_json(&summary))?;
    Ok(summary)
}
