use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use aamr::bench::{
    self, angle_profile, default_profile_methods, rates, sweep_alpha, sweep_beta, Artifact,
    InstanceSampling, SweepConfig,
};
use aamr::geometry::{principal_angles, SubspacePair};
use aamr::sets::{project_intersection_oracle, Problem};
use aamr::{ConvexSet, MethodSpec, Status, StoppingPolicy, TargetError, Vector};

use crate::args::{AngleArgs, BenchArgs, MethodName, SolveArgs, Sweep};
use crate::parse;

type CmdResult = Result<u8, String>;

/// Exit code for a finished solve.
pub fn exit_code(status: Status) -> u8 {
    match status {
        Status::Converged => 0,
        Status::Diverged => 2,
        Status::BudgetExhausted => 3,
        Status::NumericalFailure => 4,
    }
}

fn load_problem(path: &Path) -> Result<Vec<ConvexSet>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let problem = Problem::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    problem
        .build()
        .map_err(|e| format!("{}: {e}", path.display()))
}

fn fmt_vec(v: &Vector) -> String {
    v.iter()
        .map(|x| format!("{x:.9}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn method_spec(a: &SolveArgs) -> Result<MethodSpec, String> {
    let reject = |flag: &str, value: Option<f64>| match value {
        Some(_) => Err(format!("{flag} does not apply to --method {:?}", a.method).to_lowercase()),
        None => Ok(()),
    };
    let spec = match a.method {
        MethodName::Aamr => {
            reject("--mu", a.mu)?;
            reject("--gamma", a.gamma)?;
            MethodSpec::aamr(a.alpha.unwrap_or(0.9), a.beta.unwrap_or(0.7))
        }
        MethodName::Drm => {
            reject("--beta", a.beta)?;
            reject("--mu", a.mu)?;
            reject("--gamma", a.gamma)?;
            MethodSpec::Drm {
                alpha: a.alpha.unwrap_or(0.5),
            }
        }
        MethodName::Map | MethodName::Haugazeau | MethodName::Hlwb => {
            for (flag, v) in [
                ("--alpha", a.alpha),
                ("--beta", a.beta),
                ("--mu", a.mu),
                ("--gamma", a.gamma),
            ] {
                reject(flag, v)?;
            }
            match a.method {
                MethodName::Map => MethodSpec::Map,
                MethodName::Haugazeau => MethodSpec::Haugazeau,
                _ => MethodSpec::hlwb(),
            }
        }
        MethodName::Rap => {
            for (flag, v) in [
                ("--alpha", a.alpha),
                ("--beta", a.beta),
                ("--gamma", a.gamma),
            ] {
                reject(flag, v)?;
            }
            MethodSpec::Rap {
                mu: a.mu.ok_or("--method rap needs --mu")?,
            }
        }
        MethodName::Cm => {
            reject("--mu", a.mu)?;
            let gamma = match (a.gamma, a.beta) {
                (Some(_), Some(_)) => {
                    return Err("give either --gamma or --beta for cm, not both".into())
                }
                (Some(g), None) => g,
                (None, Some(b)) if b > 0.0 && b < 1.0 => 1.0 / b - 1.0,
                (None, Some(b)) => return Err(format!("beta must lie in (0,1), got {b}")),
                (None, None) => 0.25,
            };
            parse::cm_spec(gamma, a.alpha.unwrap_or(0.9))
        }
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

pub fn solve(a: SolveArgs) -> CmdResult {
    let method = method_spec(&a)?;
    let sets = load_problem(&a.problem)?;
    let dim = sets[0].dim();
    let check = |v: Vector, flag: &str| {
        if v.len() == dim {
            Ok(v)
        } else {
            Err(format!(
                "{flag}: expected {dim} components, got {}",
                v.len()
            ))
        }
    };
    let q = check(parse::vector(&a.q, "--q")?, "--q")?;
    let x0 = if a.random_start {
        if !(a.start_norm > 0.0 && a.start_norm.is_finite()) {
            return Err(format!(
                "--start-norm must be positive, got {}",
                a.start_norm
            ));
        }
        Some(bench::random_point(dim, a.start_norm, a.seed))
    } else {
        a.x0.as_deref()
            .map(|t| parse::vector(t, "--x0").and_then(|v| check(v, "--x0")))
            .transpose()?
    };

    let (target, target_source) = if a.residual {
        (None, "step norm")
    } else if let Some(t) = &a.target {
        (
            Some(check(parse::vector(t, "--target")?, "--target")?),
            "distance to --target",
        )
    } else {
        match project_intersection_oracle(&sets, &q, 1e-9) {
            Ok(p) => (Some(p), "distance to closed-form projection"),
            Err(_) => (None, "step norm"),
        }
    };
    let policy = match &target {
        Some(t) => StoppingPolicy::true_error(TargetError::Point(t.clone()), a.eps, a.max_iter),
        None => StoppingPolicy::residual(a.eps, a.max_iter),
    }
    .with_divergence_threshold(a.divergence_threshold)
    .with_trace(a.trace);

    let r = method
        .solve_from(&sets, &q, x0.as_ref(), &policy)
        .map_err(|e| e.to_string())?;
    println!("method: {}", method.label());
    println!("status: {}", r.status);
    println!("iterations: {}", r.iterations);
    println!("shadow: {}", fmt_vec(&r.shadow));
    println!("stopping: {target_source}");
    println!("final_error: {:e}", r.final_error);
    println!("iterate_norm: {:e}", r.iterate.norm());
    if a.trace {
        fs::create_dir_all(&a.out).map_err(|e| format!("{}: {e}", a.out.display()))?;
        let mut csv = String::from("iteration,error,step_norm\n");
        for t in r.trace.as_deref().unwrap_or_default() {
            let _ = writeln!(csv, "{},{},{}", t.iteration, t.error, t.step_norm);
        }
        let path = a.out.join("trace.csv");
        fs::write(&path, csv).map_err(|e| format!("{}: {e}", path.display()))?;
        println!("trace: {}", path.display());
    }
    Ok(exit_code(r.status))
}

pub fn angle(a: AngleArgs) -> CmdResult {
    let sets = load_problem(&a.problem)?;
    let (u, v) = match sets.as_slice() {
        [ConvexSet::Subspace(u), ConvexSet::Subspace(v)] => (u.clone(), v.clone()),
        _ => {
            return Err(format!(
                "{}: expected exactly two sets of type \"subspace\"",
                a.problem.display()
            ))
        }
    };
    let angles = principal_angles(u.basis(), v.basis()).map_err(|e| e.to_string())?;
    let list: Vec<String> = angles.iter().map(|t| format!("{t:.6}")).collect();
    println!("principal_angles: {}", list.join(", "));
    let pair = SubspacePair::new(u, v).map_err(|e| e.to_string())?;
    println!("theta_F: {:.6}", pair.theta());
    println!("intersection_dim: {}", pair.intersection().rank());
    Ok(0)
}

fn sweep_config(a: &BenchArgs) -> Result<SweepConfig, String> {
    let mut c = SweepConfig {
        n: a.n,
        n_instances: a.instances,
        n_starts: a.starts,
        start_norm: a.start_norm,
        eps: a.eps,
        max_iter: a.max_iter,
        aamr_alpha: a.aamr_alpha,
        angle_bins: a.angle_bins,
        seed: a.seed,
        jobs: a.jobs,
        ..SweepConfig::default()
    };
    if a.fine_alpha_grid {
        c.alpha_grid = SweepConfig::fine_alpha_grid();
    } else if !a.alpha_grid.is_empty() {
        c.alpha_grid = a.alpha_grid.clone();
    }
    if !a.beta_grid.is_empty() {
        match a.sweep {
            Sweep::Alpha => c.alpha_sweep_betas = a.beta_grid.clone(),
            _ => c.beta_grid = a.beta_grid.clone(),
        }
    }
    if !a.gamma_grid.is_empty() {
        c.gamma_grid = a.gamma_grid.clone();
    }
    if !a.mu_grid.is_empty() {
        c.mu_grid = a.mu_grid.clone();
    }
    if a.random_instances {
        c.sampling = InstanceSampling::Random;
    }
    c.validate().map_err(|e| e.to_string())?;
    Ok(c)
}

fn write_artifacts(dir: &Path, prefix: &str, artifacts: &[Artifact]) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    for art in artifacts {
        let path = dir.join(format!("{prefix}{}", art.name));
        fs::write(&path, &art.contents).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(())
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.prec$}"))
}

pub fn bench(a: BenchArgs) -> CmdResult {
    let config = sweep_config(&a)?;
    let err = |e: aamr::Error| e.to_string();
    match a.sweep {
        Sweep::Alpha => {
            let families = if a.methods.is_empty() {
                vec![bench::AlphaFamily::Aamr]
            } else {
                a.methods
                    .iter()
                    .map(|m| parse::alpha_family(m))
                    .collect::<Result<Vec<_>, _>>()?
            };
            for family in families {
                let s = sweep_alpha(&config, family).map_err(err)?;
                write_artifacts(&a.out, &format!("{}_", family.name()), &s.artifacts())?;
                println!(
                    "{:>8} {:>10} {:>8} {:>8} {:>10} {:>10}",
                    "instance", "theta_F", "method", "beta", "best_alpha", "iters"
                );
                for r in &s.rows {
                    println!(
                        "{:>8} {:>10.6} {:>8} {:>8} {:>10} {:>10}",
                        r.instance_id,
                        r.theta_f,
                        family.name(),
                        opt(r.beta, 3),
                        opt(r.best_alpha, 2),
                        opt(r.iterations, 1)
                    );
                }
                for (key, mean) in s.mean_best_alpha() {
                    println!(
                        "mean best alpha ({}, param {}): {mean:.3}",
                        family.name(),
                        opt(key, 3)
                    );
                }
            }
        }
        Sweep::AngleProfile => {
            let methods = if a.methods.is_empty() {
                default_profile_methods(&config)
            } else {
                a.methods
                    .iter()
                    .map(|m| parse::profile_method(m))
                    .collect::<Result<Vec<_>, _>>()?
            };
            let p = angle_profile(&config, &methods).map_err(err)?;
            write_artifacts(&a.out, "", &p.artifacts())?;
            let mut header = format!("{:>8} {:>10}", "instance", "theta_F");
            for l in &p.labels {
                let _ = write!(header, " {l:>18}");
            }
            println!("{header}  (median iterations; - = no converged start)");
            for i in 0..config.n_instances {
                let theta = p
                    .records
                    .iter()
                    .find(|r| r.instance_id == i)
                    .map_or(f64::NAN, |r| r.theta_f);
                let mut line = format!("{i:>8} {theta:>10.6}");
                for l in &p.labels {
                    let _ = write!(
                        line,
                        " {:>18}",
                        opt(p.record(i, l).and_then(|r| r.median_iters), 1)
                    );
                }
                println!("{line}");
            }
        }
        Sweep::Beta => {
            let s = sweep_beta(&config).map_err(err)?;
            write_artifacts(&a.out, "", &s.artifacts())?;
            println!(
                "{:>4} {:>18} {:>10} {:>9} {:>10}",
                "bin", "range", "theta", "best_beta", "median"
            );
            for (i, b) in s.bins.iter().enumerate() {
                println!(
                    "{i:>4} {:>18} {:>10} {:>9} {:>10}",
                    format!("[{:.3}, {:.3})", b.lo, b.hi),
                    opt(b.theta_mean, 4),
                    opt(b.best_beta, 2),
                    opt(b.median_iters, 1)
                );
            }
            match &s.fit {
                Ok(f) => println!(
                    "fit: beta = {:.4} exp({:.4} theta) + {:.4}  (rmse {})",
                    f.a,
                    f.b,
                    f.c,
                    opt(s.fit_rmse, 4)
                ),
                Err(e) => println!("fit: failed ({e})"),
            }
            let p = bench::ExpFit::PUBLISHED;
            println!(
                "published: beta = {} exp({} theta) + {}  (rmse {:.4})",
                p.a, p.b, p.c, s.published_rmse
            );
        }
        Sweep::Rates => {
            let s = rates(&config, &a.theta).map_err(err)?;
            write_artifacts(&a.out, "", &s.artifacts())?;
            println!(
                "{:>8} {:>12} {:>12} {:>12} {:>10}",
                "theta", "method", "estimated", "expected", "rel_err"
            );
            for r in &s.rows {
                println!(
                    "{:>8.4} {:>12} {:>12} {:>12.6} {:>10}",
                    r.theta,
                    r.method,
                    opt(r.estimated, 6),
                    r.expected,
                    opt(r.relative_error(), 4)
                );
            }
        }
    }
    println!("artifacts: {}", a.out.display());
    Ok(0)
}
