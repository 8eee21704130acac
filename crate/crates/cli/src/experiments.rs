//! Experiment runners. Each returns an [`Outcome`]; nothing here touches the
//! file system.

use std::f64::consts::PI;

use manifold_stein::bounds::{
    fisher_watson_bound, haar_sqrt_mean, mean_distance_to, so_uniform_bound, vmf_vmf_bound, BoundReport,
};
use manifold_stein::coupling::{fit_decay_rate, run_ensemble, CouplingConfig, Mode};
use manifold_stein::functions::{named, registry, TestFunction};
use manifold_stein::geometry::{ManifoldKind, Point};
use manifold_stein::potentials::Potential;
use manifold_stein::rng::rng_stream;
use manifold_stein::sde::{simulate, SdeConfig};
use manifold_stein::stats::{mean_stderr, MeanEstimate};
use manifold_stein::stein::{
    circle_solve, solve_fh, stein_identity_check, stein_residual, IdentityConfig, MonteCarloFh, Reference, SteinConfig,
};
use manifold_stein::transport::{sample_diffusion, sample_exact, w1_empirical, DiffusionConfig};

use crate::config::{ConfigError, Experiment, Result, RunConfig};
use crate::svg::{Plot, Series};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    /// The property the check stands for.
    pub anchor: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ bound` (a NaN value fails).
    pub fn at_most(name: &str, anchor: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            anchor: anchor.into(),
            value,
            bound,
            pass: value <= bound,
        }
    }
}

/// Everything a run produces, as rows and rendered text.
#[derive(Default)]
pub struct Outcome {
    /// `(t, mean_dist, stderr, mode_fraction)`.
    pub decay: Option<Vec<[f64; 4]>>,
    /// `(x, f_h, stderr, residual)`; `x` is the space-separated coordinates.
    pub stein: Option<Vec<(String, f64, f64, f64)>>,
    pub bounds: Option<Vec<BoundReport>>,
    pub checks: Vec<Check>,
    /// Extra files relative to the output directory, e.g. `plots/decay.svg`.
    pub files: Vec<(String, String)>,
}

/// Names of the checks an experiment can produce, and those enabled when
/// `[checks]` is absent.
pub fn available_checks(cfg: &RunConfig) -> Result<(Vec<String>, Vec<String>)> {
    let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let (all, default) = match cfg.experiment {
        Experiment::Simulate => (own(&["on_manifold", "stein_identity"]), own(&["on_manifold", "stein_identity"])),
        Experiment::Couple => {
            let all = own(&["mean_decay", "pathwise_decay", "decay_rate"]);
            let default = if cfg.kind()?.is_compact() {
                own(&["mean_decay", "decay_rate"])
            } else {
                all.clone()
            };
            (all, default)
        }
        Experiment::Stein => {
            if cfg.kind()? == ManifoldKind::Circle {
                let all = own(&["stein_residual", "quadrature_residual", "quadrature_agreement"]);
                (all.clone(), all)
            } else {
                (own(&["stein_residual"]), own(&["stein_residual"]))
            }
        }
        Experiment::Bound => {
            let kinds = bound_kinds(cfg)?;
            (kinds.clone(), kinds)
        }
        Experiment::Compare => (own(&["diffusion_vs_exact"]), own(&["diffusion_vs_exact"])),
        Experiment::Selftest => {
            let all = crate::selftest::CHECKS.iter().map(|s| s.to_string()).collect::<Vec<_>>();
            (all.clone(), all)
        }
    };
    Ok((all, default))
}

/// The enabled check names, validated against [`available_checks`].
pub fn enabled_checks(cfg: &RunConfig) -> Result<Vec<String>> {
    let (all, default) = available_checks(cfg)?;
    match &cfg.enabled {
        None => Ok(default),
        Some(list) => {
            for name in list {
                if !all.contains(name) {
                    return Err(ConfigError(format!(
                        "[checks] `{name}` is not produced by this experiment (available: {})",
                        all.join(", ")
                    )));
                }
            }
            Ok(list.clone())
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let enabled = enabled_checks(cfg)?;
    let mut out = match cfg.experiment {
        Experiment::Simulate => simulate_experiment(cfg)?,
        Experiment::Couple => couple(cfg)?,
        Experiment::Stein => stein(cfg)?,
        Experiment::Bound => bound(cfg)?,
        Experiment::Compare => compare(cfg)?,
        Experiment::Selftest => crate::selftest::run(cfg.seed)?,
    };
    out.checks.retain(|c| enabled.contains(&c.name));
    out.checks.sort_by_key(|c| enabled.iter().position(|n| *n == c.name));
    Ok(out)
}

fn sde_config(cfg: &RunConfig, horizon: f64) -> Result<SdeConfig> {
    let s = SdeConfig::new(cfg.or("sde", "step", 0.01)?, cfg.or("sde", "horizon", horizon)?, cfg.seed);
    s.validate()?;
    Ok(s)
}

fn required_point(cfg: &RunConfig, section: &str, key: &str) -> Result<Point> {
    cfg.point(section, key)?
        .ok_or_else(|| ConfigError(format!("missing `{key}` in [{section}]")))
}

fn coords_label(x: &Point) -> String {
    x.coords().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

fn simulate_experiment(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.potential()?;
    let kappa = cfg.kappa(&p)?;
    let x0 = cfg.point("simulate", "x0")?.unwrap_or_else(|| p.center());
    let sde = sde_config(cfg, 10.0)?;
    let path = simulate(&x0, &p, &sde, &mut rng_stream(cfg.seed, 0))?;
    let worst = path.points.iter().map(|x| x.constraint_residual()).fold(0.0, f64::max);

    let f = function(cfg, "simulate", p.kind())?;
    let id = stein_identity_check(&f, &p, &IdentityConfig::new(kappa, cfg.seed))?;
    let budget = IdentityConfig::new(kappa, cfg.seed).budget;

    let mut csv = String::from("t");
    for i in 0..p.kind().ambient_len() {
        csv.push_str(&format!(",x{i}"));
    }
    csv.push('\n');
    for (t, x) in path.times.iter().zip(&path.points) {
        csv.push_str(&t.to_string());
        for c in x.coords() {
            csv.push(',');
            csv.push_str(&c.to_string());
        }
        csv.push('\n');
    }
    let colors = ["black", "steelblue", "firebrick", "darkgreen"];
    let plot = Plot {
        title: format!("{} path", p.kind()),
        x_label: "t".into(),
        y_label: "coordinate".into(),
        log_y: false,
        series: (0..p.kind().ambient_len().min(4))
            .map(|i| Series {
                label: format!("x{i}"),
                points: path.times.iter().zip(&path.points).map(|(t, x)| (*t, x.coords()[i])).collect(),
                color: colors[i],
                dashed: false,
            })
            .collect(),
    };
    Ok(Outcome {
        checks: vec![
            Check::at_most("on_manifold", "iterates stay on the manifold", worst, 1e-9),
            Check {
                pass: id.pass,
                ..Check::at_most(
                    "stein_identity",
                    "ergodic mean of the generator vanishes",
                    id.mean.abs(),
                    3.0 * id.stderr + budget,
                )
            },
        ],
        files: vec![("path.csv".into(), csv), ("plots/path.svg".into(), plot.render())],
        ..Default::default()
    })
}

fn function(cfg: &RunConfig, section: &str, kind: ManifoldKind) -> Result<TestFunction> {
    match cfg.get_str(section, "function") {
        Some(name) => Ok(named(kind, &name)?),
        None if kind == ManifoldKind::Circle => Ok(named(kind, "cos")?),
        None => Ok(registry(kind).swap_remove(0)),
    }
}

fn couple(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.potential()?;
    let kappa = cfg.kappa(&p)?;
    let runs: usize = cfg.or("couple", "runs", 200)?;
    if runs < 30 {
        return Err(ConfigError(format!("[couple] runs must be at least 30, got {runs}")));
    }
    let x0 = required_point(cfg, "couple", "x0")?;
    let y0 = required_point(cfg, "couple", "y0")?;
    let cc = CouplingConfig::for_potential(&p, sde_config(cfg, 5.0)?)?;
    let ens = run_ensemble(&x0, &y0, &p, &cc, runs)?;
    let n = cc.sde.n_steps();
    let h = cc.sde.step;
    let traj: Vec<Vec<f64>> = ens.iter().map(|r| r.padded_dists(n)).collect();
    let modes: Vec<Vec<Mode>> = ens.iter().map(|r| r.padded_modes(n)).collect();
    let times: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
    let d0 = traj[0][0];

    let mut rows = Vec::with_capacity(n + 1);
    let mut mean_excess = f64::NEG_INFINITY;
    for (k, t) in times.iter().enumerate() {
        let d: Vec<f64> = traj.iter().map(|r| r[k]).collect();
        let e = mean_stderr(&d);
        let indep = modes.iter().filter(|m| m[k] == Mode::Independent).count() as f64 / runs as f64;
        rows.push([*t, e.mean, e.stderr, indep]);
        if k > 0 {
            mean_excess = mean_excess.max(e.mean - d0 * (-kappa * t).exp() - 3.0 * e.stderr);
        }
    }
    let path_excess = ens
        .iter()
        .flat_map(|r| {
            let d0 = r.dists[0];
            r.times
                .iter()
                .zip(&r.dists)
                .map(move |(t, d)| d.ln() - (d0.ln() - kappa * t + 5.0 * h * t))
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let rate = fit_decay_rate(&traj, &times, 1.0, cfg.seed).map_or(f64::NAN, |f| f.rate);

    let plot = Plot {
        title: format!("coupled distance on {}", p.kind()),
        x_label: "t".into(),
        y_label: "mean distance".into(),
        log_y: true,
        series: vec![
            Series {
                label: "mean distance".into(),
                points: rows.iter().map(|r| (r[0], r[1])).collect(),
                color: "steelblue",
                dashed: false,
            },
            Series {
                label: format!("d0 exp(-{kappa} t)"),
                points: times.iter().map(|t| (*t, d0 * (-kappa * t).exp())).collect(),
                color: "black",
                dashed: true,
            },
        ],
    };
    Ok(Outcome {
        decay: Some(rows),
        checks: vec![
            Check::at_most("mean_decay", "mean distance below d0 exp(-kappa t) + 3 se", mean_excess, 0.0),
            Check::at_most("pathwise_decay", "every path below log d0 - kappa t + 5ht", path_excess, 0.0),
            Check::at_most("decay_rate", "fitted decay rate at most -kappa + 0.1", rate, -kappa + 0.1),
        ],
        files: vec![("plots/decay.svg".into(), plot.render())],
        ..Default::default()
    })
}

fn stein(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.potential()?;
    let kappa = cfg.kappa(&p)?;
    let kind = p.kind();
    let h = function(cfg, "stein", kind)?;
    let points = match cfg.points("stein", "points")? {
        Some(v) if !v.is_empty() => v,
        _ if kind == ManifoldKind::Circle => (0..8).map(|k| Point::angle(-PI + (k as f64 + 0.5) * PI / 4.0)).collect(),
        _ => return Err(ConfigError("missing `points` in [stein]".into())),
    };
    let mut sc = SteinConfig::new(cfg.or("stein", "paths", 400)?, cfg.or("stein", "step", 0.01)?, cfg.seed);
    if let Some(t) = cfg.get::<f64>("stein", "horizon")? {
        sc = sc.with_horizon(t);
    }
    let eps = cfg.or("stein", "eps", 0.05)?;
    let reference = if kind == ManifoldKind::Circle {
        Reference::circle(&p)?
    } else {
        Reference::chain(&p, kappa, SdeConfig::DEFAULT_STEP, cfg.seed)?
    };
    let eh = reference.mean(&h);
    let est = MonteCarloFh {
        h: &h,
        p: &p,
        kappa,
        reference: &reference,
        cfg: sc,
    };
    let mut rows = Vec::new();
    let mut ratio = 0.0f64;
    let mut values = Vec::new();
    for x in &points {
        let e = solve_fh(x, &h, &p, kappa, &reference, &sc)?;
        let r = stein_residual(x, &h, &est, &p, eps, eh)?;
        ratio = ratio.max(r.residual / f64::max(0.05, 5.0 * r.noise));
        rows.push((coords_label(x), e.value, e.stderr, r.residual));
        values.push(e);
    }
    let mut checks = vec![Check::at_most(
        "stein_residual",
        "Stein equation residual within max(0.05, 5 noise)",
        ratio,
        1.0,
    )];
    let mut files = Vec::new();
    if kind == ManifoldKind::Circle {
        let sol = circle_solve(&h, &p)?;
        let z = points
            .iter()
            .zip(&values)
            .map(|(x, e)| (e.value - sol.f(x.coords()[0])).abs() / e.stderr)
            .fold(0.0, f64::max);
        checks.push(Check::at_most("quadrature_residual", "circle quadrature solves the equation", sol.residual_sup(), 1e-8));
        checks.push(Check::at_most("quadrature_agreement", "Monte-Carlo f_h within 3 se of quadrature", z, 3.0));
        let grid: Vec<f64> = (0..=200).map(|k| -PI + 2.0 * PI * k as f64 / 200.0).collect();
        let mut mc: Vec<(f64, f64)> = points.iter().zip(&values).map(|(x, e)| (x.coords()[0], e.value)).collect();
        mc.sort_by(|a, b| a.0.total_cmp(&b.0));
        let plot = Plot {
            title: format!("Stein solution for {}", h.id()),
            x_label: "theta".into(),
            y_label: "f_h".into(),
            log_y: false,
            series: vec![
                Series {
                    label: "quadrature".into(),
                    points: grid.iter().map(|t| (*t, sol.f(*t))).collect(),
                    color: "black",
                    dashed: false,
                },
                Series {
                    label: "Monte Carlo".into(),
                    points: mc,
                    color: "firebrick",
                    dashed: true,
                },
            ],
        };
        files.push(("plots/stein.svg".into(), plot.render()));
    }
    Ok(Outcome {
        stein: Some(rows),
        checks,
        files,
        ..Default::default()
    })
}

fn bound_kinds(cfg: &RunConfig) -> Result<Vec<String>> {
    let s = cfg.req_str("bound", "kinds")?;
    let kinds: Vec<String> = s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect();
    for k in &kinds {
        if !["haar", "so_uniform", "vmf_vmf", "fisher_watson"].contains(&k.as_str()) {
            return Err(ConfigError(format!("[bound] unknown kind `{k}`")));
        }
    }
    if kinds.is_empty() {
        return Err(ConfigError("[bound] kinds is empty".into()));
    }
    Ok(kinds)
}

/// Mean and standard error of `reps` W1 estimates between exact samples.
fn empirical_w1(p: &Potential, q: &Potential, n: usize, reps: u64, seed: u64, base: u64) -> Result<MeanEstimate> {
    let vals = (0..reps)
        .map(|r| {
            let a = sample_exact(p, n, &mut rng_stream(seed, base + 2 * r))?;
            let b = sample_exact(q, n, &mut rng_stream(seed, base + 2 * r + 1))?;
            Ok(w1_empirical(&a, &b)?.value)
        })
        .collect::<manifold_stein::Result<Vec<f64>>>()?;
    Ok(mean_stderr(&vals))
}

/// Mean of `W1(p̂, p̂′) + W1(q̂, q̂′)`: the finite-sample floor of the
/// empirical distance between the two laws.
fn self_baseline(p: &Potential, q: &Potential, n: usize, reps: u64, seed: u64, base: u64) -> Result<f64> {
    let a = empirical_w1(p, p, n, reps, seed, base)?;
    let b = empirical_w1(q, q, n, reps, seed, base + 2 * reps)?;
    Ok(a.mean + b.mean)
}

fn bound(cfg: &RunConfig) -> Result<Outcome> {
    let draws: usize = cfg.or("bound", "draws", 100_000)?;
    let n: usize = cfg.or("bound", "n", 256)?;
    let reps: u64 = cfg.or("bound", "reps", 8)?;
    let mut reports = Vec::new();
    let mut checks = Vec::new();
    for (i, kind) in bound_kinds(cfg)?.iter().enumerate() {
        let base = 1_000_000 * (i as u64 + 1);
        let rep = match kind.as_str() {
            "haar" => {
                let e = haar_sqrt_mean(draws, &mut rng_stream(cfg.seed, base))?;
                let mut r = BoundReport::compare("haar", 4.0 / PI, Some(e.mean), e.stderr, &[("draws", draws as f64)]);
                r.pass = (e.mean - 4.0 / PI).abs() <= 3.0 * e.stderr;
                checks.push(Check {
                    pass: r.pass,
                    ..Check::at_most("haar", "E sqrt(3 - tr Z^2) = 4/pi", (e.mean - 4.0 / PI).abs(), 3.0 * e.stderr)
                });
                reports.push(r);
                continue;
            }
            "so_uniform" => {
                let c: f64 = cfg.req("bound", "c")?;
                let kappa: f64 = cfg.req("bound", "kappa")?;
                let b = so_uniform_bound(c, kappa, draws, &mut rng_stream(cfg.seed, base))?;
                let so3 = ManifoldKind::Rotations(3);
                let vmf = Potential::vmf_rotations(Point::origin(so3)?, c)?;
                let uniform = Potential::uniform(so3)?;
                let emp = empirical_w1(&uniform, &vmf, n, reps, cfg.seed, base + 1)?;
                let floor = self_baseline(&uniform, &vmf, n, reps, cfg.seed, base + 1000)?;
                BoundReport::compare(
                    "so_uniform",
                    b.mean,
                    Some(emp.mean),
                    emp.stderr,
                    &[("c", c), ("kappa", kappa), ("n", n as f64), ("bound_stderr", b.stderr), ("w1_self_baseline", floor)],
                )
            }
            "vmf_vmf" => {
                let x1 = required_point(cfg, "bound", "x1")?;
                let x2 = required_point(cfg, "bound", "x2")?;
                let c1: f64 = cfg.req("bound", "c1")?;
                let c2: f64 = cfg.req("bound", "c2")?;
                let kappa: f64 = cfg.req("bound", "kappa")?;
                let p1 = Potential::vmf_sphere(x1.clone(), c1)?;
                let p2 = Potential::vmf_sphere(x2.clone(), c2)?;
                let r1 = mean_distance_to(&x1, &sample_exact(&p1, draws.min(20_000), &mut rng_stream(cfg.seed, base))?)?;
                let r2 = mean_distance_to(&x2, &sample_exact(&p2, draws.min(20_000), &mut rng_stream(cfg.seed, base + 1))?)?;
                let b = vmf_vmf_bound(&x1, c1, &x2, c2, kappa, r1.mean, r2.mean)?;
                let emp = empirical_w1(&p1, &p2, n, reps, cfg.seed, base + 2)?;
                let floor = self_baseline(&p1, &p2, n, reps, cfg.seed, base + 1000)?;
                BoundReport::compare(
                    "vmf_vmf",
                    b,
                    Some(emp.mean),
                    emp.stderr,
                    &[
                        ("c1", c1),
                        ("c2", c2),
                        ("kappa", kappa),
                        ("mean_rho_1", r1.mean),
                        ("mean_rho_2", r2.mean),
                        ("n", n as f64),
                        ("w1_self_baseline", floor),
                    ],
                )
            }
            "fisher_watson" => {
                let x1 = required_point(cfg, "bound", "x1")?;
                let x2 = required_point(cfg, "bound", "x2")?;
                let c1: f64 = cfg.req("bound", "c1")?;
                let c2: f64 = cfg.req("bound", "c2")?;
                let kappa: f64 = cfg.req("bound", "kappa")?;
                let fw = Potential::fisher_watson(x1.clone(), x2.clone(), c1, c2)?;
                let vmf = Potential::vmf_sphere(x1, c1)?;
                let z = sample_exact(&fw, draws.min(20_000), &mut rng_stream(cfg.seed, base))?;
                let b = fisher_watson_bound(&x2, c2, kappa, &z)?;
                let emp = empirical_w1(&fw, &vmf, n, reps, cfg.seed, base + 1)?;
                let floor = self_baseline(&fw, &vmf, n, reps, cfg.seed, base + 1000)?;
                BoundReport::compare(
                    "fisher_watson",
                    b.mean,
                    Some(emp.mean),
                    emp.stderr,
                    &[("c1", c1), ("c2", c2), ("kappa", kappa), ("n", n as f64), ("bound_stderr", b.stderr), ("w1_self_baseline", floor)],
                )
            }
            _ => unreachable!("kinds are validated"),
        };
        checks.push(Check {
            pass: rep.pass,
            ..Check::at_most(
                &rep.name,
                "W1 bound dominates the empirical distance",
                rep.empirical.unwrap_or(f64::NAN),
                rep.bound + 3.0 * rep.stderr,
            )
        });
        reports.push(rep);
    }
    Ok(Outcome {
        bounds: Some(reports),
        checks,
        ..Default::default()
    })
}

fn compare(cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.potential()?;
    let kappa = cfg.kappa(&p)?;
    let n: usize = cfg.or("compare", "n", 256)?;
    let tol: f64 = cfg.or("compare", "tolerance", 0.05)?;
    let dc = DiffusionConfig {
        step: cfg.or("compare", "step", 0.01)?,
        kappa: Some(kappa),
    };
    let exact = sample_exact(&p, n, &mut rng_stream(cfg.seed, 0))?;
    let exact2 = sample_exact(&p, n, &mut rng_stream(cfg.seed, 1))?;
    let diff = sample_diffusion(&p, n, &dc, &mut rng_stream(cfg.seed, 2))?;
    let baseline = w1_empirical(&exact, &exact2)?.value;
    let w = w1_empirical(&diff, &exact)?.value;
    let mut a = Vec::new();
    let mut b = Vec::new();
    exact.write_csv(&mut a)?;
    diff.write_csv(&mut b)?;
    Ok(Outcome {
        checks: vec![Check::at_most(
            "diffusion_vs_exact",
            "thinned diffusion within tolerance of the exact-sample W1 baseline",
            w,
            baseline + tol,
        )],
        files: vec![
            ("samples_exact.csv".into(), String::from_utf8_lossy(&a).into_owned()),
            ("samples_diffusion.csv".into(), String::from_utf8_lossy(&b).into_owned()),
        ],
        ..Default::default()
    })
}
