//! Subcommand drivers: thin orchestration over the library returning
//! process exit codes. 0 = success, 1 = well-posed run that fails its
//! certificates (infeasible model, failed checks, broken iteration),
//! 2 = unusable input (config, grid, IO, CSV).

use std::path::Path;

use crate::bounds::{
    check_compatibility, check_gamma_membership, residual_lower, residual_upper, verify_bound,
    BoundSide, LowerSolution, UpperSolution,
};
use crate::config::RunConfig;
use crate::csvio;
use crate::error::{Error, Result};
use crate::iterate::iterate;
use crate::model::{check_hypotheses, check_params, derive_constants, DerivedConstants, ModelParams};
use crate::profile::{GridSpec, Profile};
use crate::verify::{asymptotic_check, dde_residual, method_of_steps};

/// Floating-point allowance when certifying residual signs on a grid.
const BOUND_TOL: f64 = 1e-9;
/// Spans used for the weighted-monotonicity membership checks.
const GAMMA_SPANS: [f64; 3] = [0.1, 1.0, 5.0];

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

fn load(config: &Path, sets: &[String]) -> Result<RunConfig> {
    let mut cfg = RunConfig::from_file(config)?;
    cfg.apply_sets(sets)?;
    Ok(cfg)
}

struct Setup {
    params: ModelParams<f64>,
    consts: DerivedConstants<f64>,
    grid: GridSpec<f64>,
    cfg: RunConfig,
}

fn setup(config: &Path, sets: &[String]) -> Result<Setup> {
    let cfg = load(config, sets)?;
    let params = cfg.params()?;
    let consts = derive_constants(&params, &cfg.overrides())?;
    let grid = cfg.grid()?;
    Ok(Setup { params, consts, grid, cfg })
}

pub fn cmd_check(config: &Path, sets: &[String]) -> i32 {
    let cfg = match load(config, sets) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let params = match cfg.params() {
        Ok(p) => p,
        Err(e) => return fail(&e),
    };
    match derive_constants(&params, &cfg.overrides()) {
        Ok(consts) => {
            let rep = check_hypotheses(&params, &consts);
            print!("{rep}");
            if rep.required_pass() {
                println!("check: OK");
                0
            } else {
                println!("check: FAILED ({})", rep.failed_names().join(", "));
                1
            }
        }
        Err(e) => {
            // constant derivation died; show what is still computable so
            // the failing condition has a named line
            let rep = check_params(&params);
            print!("{rep}");
            println!("check: FAILED");
            fail(&e)
        }
    }
}

pub fn cmd_bounds(config: &Path, sets: &[String], out: Option<&Path>) -> i32 {
    let s = match setup(config, sets) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let c = &s.consts;
    let upper = UpperSolution::new(c.kappa, c.lambda, c.beta);
    let lower = LowerSolution::new(c.alpha, c.epsilon, c.lambda, c.t0);

    let rep_u = verify_bound(BoundSide::Upper(&upper), &s.params, &s.grid, BOUND_TOL);
    let rep_l = verify_bound(BoundSide::Lower(&lower), &s.params, &s.grid, BOUND_TOL);
    let gamma = check_gamma_membership(
        |t| upper.value(t),
        c.kappa,
        c.beta,
        &GAMMA_SPANS,
        &s.grid,
    );
    let compat = check_compatibility(&upper, &lower, c.beta, &s.grid);
    println!("residual sign certificates:");
    print!("{rep_u}{rep_l}");
    println!("profile-set membership of the upper solution:");
    print!("{gamma}");
    println!("pair compatibility:");
    print!("{compat}");

    if let Some(dir) = out {
        if let Err(e) = write_bounds_files(dir, &s, &upper, &lower) {
            return fail(&e);
        }
        println!("wrote upper/lower/residual/compat CSV files to {}", dir.display());
    }
    if rep_u.all_pass() && rep_l.all_pass() && gamma.all_pass() && compat.all_pass() {
        0
    } else {
        1
    }
}

fn write_bounds_files(
    dir: &Path,
    s: &Setup,
    upper: &UpperSolution<f64>,
    lower: &LowerSolution<f64>,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let g = &s.grid;
    let n = g.num_nodes();
    let ts: Vec<f64> = (0..n).map(|i| g.node(i)).collect();

    let uv: Vec<f64> = ts.iter().map(|&t| upper.value(t)).collect();
    let lv: Vec<f64> = ts.iter().map(|&t| lower.value(t)).collect();
    csvio::write_columns(&dir.join("upper.csv"), &["t", "value"], &[&ts, &uv])?;
    csvio::write_columns(&dir.join("lower.csv"), &["t", "value"], &[&ts, &lv])?;

    // residual tables skip the nodes inside each kink window, like the checks
    let mut tu = Vec::new();
    let mut ru = Vec::new();
    let mut tl = Vec::new();
    let mut rl = Vec::new();
    for &t in &ts {
        if (t - 0.0).abs() >= g.h() {
            tu.push(t);
            ru.push(residual_upper(upper, &s.params, t).expect("kink skipped"));
        }
        if (t - lower.t0).abs() >= g.h() {
            tl.push(t);
            rl.push(residual_lower(lower, &s.params, t).expect("kink skipped"));
        }
    }
    csvio::write_columns(&dir.join("residual_upper.csv"), &["t", "value"], &[&tu, &ru])?;
    csvio::write_columns(&dir.join("residual_lower.csv"), &["t", "value"], &[&tl, &rl])?;

    let wgap: Vec<f64> = ts
        .iter()
        .zip(uv.iter().zip(&lv))
        .map(|(&t, (&u, &l))| (s.consts.beta * t).exp() * (u - l))
        .collect();
    csvio::write_columns(&dir.join("compat.csv"), &["t", "value"], &[&ts, &wgap])?;
    Ok(())
}

pub fn cmd_iterate(config: &Path, sets: &[String], out: Option<&Path>) -> i32 {
    let s = match setup(config, sets) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let run = match iterate(&s.params, &s.consts, &s.grid, &s.cfg.options()) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let res = dde_residual(&run.final_profile, &s.params);
    println!(
        "steps = {}, converged = {}, last gap = {}",
        run.steps,
        run.converged,
        run.gaps.last().map_or(0.0, |g| *g)
    );
    println!(
        "residual sup = {:.6e} at t = {:.4}, endpoints = ({:.3e}, {:.3e})",
        res.sup_residual, res.argmax_t, res.endpoint_errors.0, res.endpoint_errors.1
    );
    if !run.converged {
        eprintln!(
            "warning: gap still {:.3e} after {} steps (tolerance {:.1e})",
            run.gaps.last().map_or(f64::NAN, |g| *g),
            run.steps,
            s.cfg.tol
        );
    }

    if let Some(dir) = out {
        if let Err(e) = write_iterate_files(dir, &s, &run, &res) {
            return fail(&e);
        }
        println!("wrote final.csv, iterates.csv, metadata.txt to {}", dir.display());
    }
    0
}

fn write_iterate_files(
    dir: &Path,
    s: &Setup,
    run: &crate::iterate::IterationResult<f64>,
    res: &crate::verify::ResidualReport<f64>,
) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    csvio::write_profile(&dir.join("final.csv"), &run.final_profile)?;

    let g = run.final_profile.spec();
    let ts: Vec<f64> = (0..g.num_nodes()).map(|i| g.node(i)).collect();
    let mut header: Vec<String> = vec!["t".into()];
    let mut cols: Vec<&[f64]> = vec![&ts];
    for (i, p) in run.saved.iter().enumerate() {
        header.push(format!("x{i}"));
        cols.push(p.values());
    }
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    csvio::write_columns(&dir.join("iterates.csv"), &header_refs, &cols)?;

    let c = &s.consts;
    let mut meta = String::new();
    let mut kv = |k: &str, v: String| {
        meta.push_str(k);
        meta.push_str(" = ");
        meta.push_str(&v);
        meta.push('\n');
    };
    let f = |x: f64| format!("{x:.16e}");
    kv("delta", f(s.params.delta));
    kv("harvest", f(s.params.harvest));
    kv("rho", f(s.params.rho));
    kv("sigma", f(s.params.sigma));
    kv("r", f(s.params.r));
    kv("kappa", f(c.kappa));
    kv("lambda", f(c.lambda));
    kv("beta", f(c.beta));
    kv("epsilon", f(c.epsilon));
    kv("alpha", f(c.alpha));
    kv("t0", f(c.t0));
    kv("grid.t_min", f(s.grid.t_min()));
    kv("grid.t_max", f(s.grid.t_max()));
    kv("grid.h", f(s.grid.h()));
    kv("tol", f(s.cfg.tol));
    kv("max_iter", s.cfg.max_iter.to_string());
    kv("steps", run.steps.to_string());
    kv("converged", run.converged.to_string());
    kv("seed_tail_budget", f(run.seed_tail_budget));
    kv("residual.sup", f(res.sup_residual));
    kv("residual.argmax_t", f(res.argmax_t));
    kv("residual.left_end", f(res.endpoint_errors.0));
    kv("residual.right_end", f(res.endpoint_errors.1));
    let all = |pick: fn(&crate::iterate::StepCheck) -> Option<bool>| {
        run.p_checks.iter().all(|s| pick(s) != Some(false))
    };
    kv("ordering_held", run.p_checks.iter().all(|s| s.ordering).to_string());
    kv("monotone_held", run.p_checks.iter().all(|s| s.monotone).to_string());
    kv("p3_held", all(|s| s.p3).to_string());
    kv("p4_held", all(|s| s.p4).to_string());
    for (i, gap) in run.gaps.iter().enumerate() {
        kv(&format!("gap.{}", i + 1), f(*gap));
    }
    std::fs::write(dir.join("metadata.txt"), meta)?;
    Ok(())
}

pub fn cmd_verify(config: &Path, sets: &[String], out: Option<&Path>) -> i32 {
    let s = match setup(config, sets) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let profile = match out {
        Some(dir) => match csvio::read_profile(&dir.join("final.csv"), s.consts.lambda) {
            Ok(p) => p,
            Err(e) => return fail(&e),
        },
        None => match iterate(&s.params, &s.consts, &s.grid, &s.cfg.options()) {
            Ok(run) => run.final_profile,
            Err(e) => return fail(&e),
        },
    };

    let res = dde_residual(&profile, &s.params);
    println!(
        "residual sup = {:.6e} at t = {:.4}",
        res.sup_residual, res.argmax_t
    );
    println!(
        "endpoint errors = ({:.3e}, {:.3e})",
        res.endpoint_errors.0, res.endpoint_errors.1
    );

    match cross_check_deviation(&profile, &s) {
        Ok(dev) => println!("cross-check deviation on [0, {:.1}] = {:.6e}", dev.1, dev.0),
        Err(e) => return fail(&e),
    }

    let kappa = s.consts.kappa;
    let asym = asymptotic_check(&profile, kappa, 1e-3 * kappa, 1e-3 * kappa);
    print!("{asym}");
    if asym.all_pass() {
        0
    } else {
        1
    }
}

/// Reintegrate the profile from its own history by the method of steps and
/// measure the worst disagreement past the transition point.
fn cross_check_deviation(profile: &Profile<f64>, s: &Setup) -> Result<(f64, f64)> {
    let dt = 0.5 * profile.spec().h();
    let seg = GridSpec::new(-s.params.r, 0.0, dt)?;
    let history = Profile::sample(|t| profile.eval(t), &seg, s.consts.lambda, s.consts.kappa)?;
    let horizon = 10.0_f64.min(profile.spec().t_max());
    let t_end = (horizon / dt).floor() * dt;
    let traj = method_of_steps(&history, &s.params, t_end, dt)?;
    let mut dev = 0.0_f64;
    for i in 0..traj.len() {
        let t = traj.spec().node(i);
        if t >= 0.0 {
            dev = dev.max((traj.values()[i] - profile.eval(t)).abs());
        }
    }
    Ok((dev, t_end))
}
