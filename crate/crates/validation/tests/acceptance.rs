//! Acceptance criteria, run in order without the libtest harness so that every
//! `PASS criterion N: ...` or `FAIL criterion N: ...` line is printed. The
//! process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;

use manifold_stein::bounds::{
    eta_star, fh_constant_bounds, haar_sqrt_mean, mean_distance_to, so_uniform_bound, vmf_vmf_bound, BoundConstants,
};
use manifold_stein::coupling::{fit_decay_rate, run_ensemble, CouplingConfig, Mode};
use manifold_stein::functions::named;
use manifold_stein::geometry::{random_point, ManifoldKind, Point, TangentVector};
use manifold_stein::potentials::Potential;
use manifold_stein::rng::rng_stream;
use manifold_stein::sde::{flow_derivative_fd, mean_flow_derivative, SdeConfig};
use manifold_stein::stats::{linear_fit, mean_stderr, MeanEstimate};
use manifold_stein::stein::{
    circle_solve, lipschitz_probe, probe_pairs, solve_fh, stein_identity_check, IdentityConfig, Reference, SteinConfig,
};
use manifold_stein::transport::{sample_exact, solve_assignment, w1_empirical, Provenance, SampleSet};
use manifold_stein_validation::verdict;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

fn sphere_vmf(c: f64) -> Potential {
    Potential::vmf_sphere(Point::sphere(vec![0.0, 0.0, 1.0]).unwrap(), c).unwrap()
}

/// Mean and standard error of `reps` independent W1 estimates between
/// exact samples of size `n` from `p` and `q`.
fn empirical_w1(p: &Potential, q: &Potential, n: usize, reps: u64, seed: u64) -> MeanEstimate {
    let vals: Vec<f64> = (0..reps)
        .map(|r| {
            let a = sample_exact(p, n, &mut rng_stream(seed, 2 * r)).unwrap();
            let b = sample_exact(q, n, &mut rng_stream(seed, 2 * r + 1)).unwrap();
            w1_empirical(&a, &b).unwrap().value
        })
        .collect();
    mean_stderr(&vals)
}

fn criterion_01_hyperbolic_pathwise_decay() -> bool {
    let o = Point::origin(ManifoldKind::Hyperbolic(2)).unwrap();
    let p = Potential::sq_dist_hyperbolic(o, 1.0).unwrap();
    let (kappa, h) = (0.5, 0.005);
    let cfg = CouplingConfig::for_potential(&p, SdeConfig::new(h, 6.0, 101)).unwrap();
    let x0 = Point::hyperbolic_from_spatial(&[0.5, 0.0]).unwrap();
    let y0 = Point::hyperbolic_from_spatial(&[-0.5, 0.0]).unwrap();
    let runs = run_ensemble(&x0, &y0, &p, &cfg, 200).unwrap();
    let mut worst = f64::NEG_INFINITY;
    let mut good = 0;
    for r in &runs {
        let d0 = r.dists[0];
        let excess = r
            .times
            .iter()
            .zip(&r.dists)
            .map(|(t, d)| d.ln() - (d0.ln() - kappa * t + 5.0 * h * t))
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(excess);
        if excess <= 0.0 {
            good += 1;
        }
    }
    let pass = good == runs.len();
    verdict(
        1,
        pass,
        &format!(
            "{good}/{} trajectories within log d0 - 0.5t + 5ht; worst excess {worst:.4}",
            runs.len()
        ),
    );
    pass
}

fn criterion_02_sphere_mean_decay_with_guard() -> bool {
    let p = sphere_vmf(0.5);
    let kappa = 0.25;
    let cfg = CouplingConfig::for_potential(&p, SdeConfig::new(0.01, 8.0, 102)).unwrap();
    let a: f64 = 0.05;
    let x0 = Point::sphere(vec![1.0, 0.0, 0.0]).unwrap();
    let y0 = Point::sphere(vec![-a.cos(), a.sin(), 0.0]).unwrap();
    let runs = run_ensemble(&x0, &y0, &p, &cfg, 1000).unwrap();
    let n = cfg.sde.n_steps();
    let d0 = runs[0].dists[0];
    let padded: Vec<Vec<f64>> = runs.iter().map(|r| r.padded_dists(n)).collect();
    // At t = 0 every run sits at d0 and the comparison is equality up to
    // summation rounding.
    let mut worst = mean_stderr(&padded.iter().map(|d| d[0]).collect::<Vec<_>>()).mean - d0 - 1e-12 * d0;
    let mut worst_t = 0.0;
    for k in 1..=n {
        let t = k as f64 * cfg.sde.step;
        let d: Vec<f64> = padded.iter().map(|r| r[k]).collect();
        let e = mean_stderr(&d);
        let excess = e.mean - d0 * (-kappa * t).exp() - 3.0 * e.stderr;
        if excess > worst {
            worst = excess;
            worst_t = t;
        }
    }
    let indep = runs.iter().filter(|r| r.padded_modes(n)[1] == Mode::Independent).count() as f64 / runs.len() as f64;
    let pass = worst <= 0.0 && indep > 0.0;
    verdict(
        2,
        pass,
        &format!("d0 = {d0:.4}; max over t of mean - d0 e^(-t/4) - 3se = {worst:.4} at t = {worst_t:.2}; independent fraction at first step {indep:.3}"),
    );
    pass
}

fn criterion_03_euclidean_exact_contraction() -> bool {
    let p = Potential::gaussian(Point::euclidean(vec![0.0, 0.0]).unwrap(), DMatrix::identity(2, 2)).unwrap();
    let h = 0.01;
    let cfg = CouplingConfig::for_potential(&p, SdeConfig::new(h, 5.0, 103)).unwrap();
    let x0 = Point::euclidean(vec![1.0, -0.5]).unwrap();
    let y0 = Point::euclidean(vec![-1.0, 0.7]).unwrap();
    let runs = run_ensemble(&x0, &y0, &p, &cfg, 100).unwrap();
    let mut worst = 0.0f64;
    for r in &runs {
        let d0 = r.dists[0];
        for (t, d) in r.times.iter().zip(&r.dists) {
            let exact = d0 * (-t / 2.0).exp();
            worst = worst.max((d - exact).abs() / exact);
        }
    }
    let full = runs.iter().all(|r| r.dists.len() == cfg.sde.n_steps() + 1);
    let pass = full && worst < 10.0 * h;
    verdict(3, pass, &format!("max relative error {worst:.2e} (limit {:.2e}) over 100 trajectories", 10.0 * h));
    pass
}

fn criterion_04_circle_stein_solver() -> bool {
    let p = Potential::von_mises(0.0, 1.0).unwrap();
    let h = named(ManifoldKind::Circle, "cos").unwrap();
    let sol = circle_solve(&h, &p).unwrap();
    let res = sol.residual_sup();
    let factor2 = [-2.5, -1.0, 0.3, 1.7]
        .iter()
        .map(|&t| (sol.f_prime(t) - 2.0 * sol.g(t)).abs())
        .fold(0.0, f64::max);
    let r = Reference::circle(&p).unwrap();
    let cfg = SteinConfig::new(2000, 0.005, 104);
    let mut worst_z = 0.0f64;
    for k in 0..8 {
        let t = -PI + (k as f64 + 0.5) * 2.0 * PI / 8.0;
        let e = solve_fh(&Point::angle(t), &h, &p, 0.5, &r, &cfg).unwrap();
        worst_z = worst_z.max((e.value - sol.f(t)).abs() / e.stderr);
    }
    let pass = res < 1e-8 && factor2 < 1e-8 && worst_z <= 3.0;
    verdict(
        4,
        pass,
        &format!("quadrature residual sup {res:.2e}; |f' - 2g| {factor2:.1e}; max |MC - quadrature|/stderr {worst_z:.2} at 8 points"),
    );
    pass
}

fn criterion_05_stein_identity_on_sphere() -> bool {
    let p = sphere_vmf(0.5);
    let mut lines = Vec::new();
    let mut pass = true;
    for (i, name) in ["coord2", "cos_dist0", "bump0"].iter().enumerate() {
        let f = named(ManifoldKind::Sphere(2), name).unwrap();
        let rep = stein_identity_check(&f, &p, &IdentityConfig::new(0.25, 105 + i as u64)).unwrap();
        pass &= rep.pass;
        lines.push(format!("{name} {:.4}±{:.4}", rep.mean, rep.stderr));
    }
    verdict(5, pass, &format!("ergodic generator means {}", lines.join(", ")));
    pass
}

fn criterion_06_circle_lipschitz_bound() -> bool {
    let p = Potential::von_mises(0.0, 1.0).unwrap();
    let h = named(ManifoldKind::Circle, "cos").unwrap();
    let sol = circle_solve(&h, &p).unwrap();
    let kappa_eff = 0.5;
    let c0h = h.c0().unwrap();
    let pairs = probe_pairs(ManifoldKind::Circle, 500, &mut rng_stream(106, 0)).unwrap();
    let probe = lipschitz_probe(&sol, &pairs, kappa_eff, c0h, 0.0).unwrap();
    let limit = c0h / kappa_eff * (1.0 + 1e-6);
    let pass = probe.max_ratio <= limit && probe.violations.is_empty();
    verdict(
        6,
        pass,
        &format!("max ratio {:.6} vs C0(h)/kappa {limit:.6}; {} violations", probe.max_ratio, probe.violations.len()),
    );
    pass
}

fn criterion_07_vmf_pair_bound() -> bool {
    let (c, kappa) = (0.3, 0.25);
    let x1 = Point::sphere(vec![0.0, 0.0, 1.0]).unwrap();
    let x2 = Point::sphere(vec![1.0, 0.0, 0.0]).unwrap();
    let p1 = Potential::vmf_sphere(x1.clone(), c).unwrap();
    let p2 = Potential::vmf_sphere(x2.clone(), c).unwrap();
    let r1 = mean_distance_to(&x1, &sample_exact(&p1, 10_000, &mut rng_stream(107, 100)).unwrap()).unwrap();
    let r2 = mean_distance_to(&x2, &sample_exact(&p2, 10_000, &mut rng_stream(107, 101)).unwrap()).unwrap();
    let bound = vmf_vmf_bound(&x1, c, &x2, c, kappa, r1.mean, r2.mean).unwrap();
    let emp = empirical_w1(&p1, &p2, 256, 8, 107);
    let pass = bound >= emp.mean - 3.0 * emp.stderr;
    verdict(
        7,
        pass,
        &format!(
            "bound {bound:.4} (E rho {:.4}, {:.4}) vs empirical W1 {:.4}±{:.4} at n=256",
            r1.mean, r2.mean, emp.mean, emp.stderr
        ),
    );
    pass
}

fn criterion_08_haar_constant_and_so3_bound() -> bool {
    let haar = haar_sqrt_mean(100_000, &mut rng_stream(108, 0)).unwrap();
    let (c, kappa) = (0.25, 0.125);
    let bound = so_uniform_bound(c, kappa, 100_000, &mut rng_stream(108, 1)).unwrap();
    let uniform = Potential::uniform(ManifoldKind::Rotations(3)).unwrap();
    let vmf = Potential::vmf_rotations(Point::origin(ManifoldKind::Rotations(3)).unwrap(), c).unwrap();
    let emp = empirical_w1(&uniform, &vmf, 256, 8, 108);
    let haar_ok = (haar.mean - 4.0 / PI).abs() <= 0.01;
    let pass = haar_ok && bound.mean >= emp.mean;
    verdict(
        8,
        pass,
        &format!(
            "E sqrt(3 - tr Z^2) = {:.4}±{:.4} vs 4/pi = {:.4}; bound {:.4} vs empirical W1 {:.4}±{:.4} at n=256",
            haar.mean,
            haar.stderr,
            4.0 / PI,
            bound.mean,
            emp.mean,
            emp.stderr
        ),
    );
    pass
}

fn criterion_09_constant_calculators() -> bool {
    // Double-precision evaluation of the printed formulas, computed
    // independently of this crate.
    let bc = BoundConstants::new(2, 1.0, 0.1, 0.5, 0.5, 0.5).unwrap();
    let c2f = fh_constant_bounds(1.0, 1.0, 1.0, &bc).c2f.unwrap();
    let eta = eta_star(&bc).unwrap();
    let golden = (c2f - 3.116_852_525_189_283).abs() < 1e-12 && (eta - 5.558_426_262_594_641).abs() < 1e-12;

    let mut grid_err = 0.0f64;
    let mut cases = 0;
    for &m in &[1usize, 2, 3, 5, 8] {
        for &kappa in &[0.1, 0.5, 1.0, 3.0] {
            for &c2_phi in &[0.0, 0.2, 1.0, 4.0] {
                for &(c1h, c2h) in &[(1.0, 1.0), (0.3, 0.0), (0.0, 2.0)] {
                    let bc = BoundConstants::new(m, kappa, 0.0, 0.7, 0.4, c2_phi).unwrap();
                    let f = fh_constant_bounds(1.0, c1h, c2h, &bc);
                    if 6.0 * kappa > c2_phi {
                        let want = 2.0 / kappa * ((c2_phi / (4.0 * kappa + c2_phi)).sqrt() * c1h + c2h);
                        grid_err = grid_err.max((f.c2f.unwrap() - want).abs() / want.max(1.0));
                    } else if f.c2f.is_some() {
                        grid_err = f64::INFINITY;
                    }
                    cases += 1;
                }
            }
        }
    }
    let pass = golden && grid_err <= 1e-14;
    verdict(
        9,
        pass,
        &format!("C2f = {c2f:.13}, eta* = {eta:.13} (goldens to 1e-12); c2 = 0 grid of {cases} cases, max rel error {grid_err:.1e}"),
    );
    pass
}

fn criterion_10_flow_derivative() -> bool {
    // Small A keeps the Euler–Maruyama bias t·h·|A|²/8 well below 1e−4.
    let a = DMatrix::from_row_slice(2, 2, &[0.08, 0.02, 0.02, 0.05]);
    let p = Potential::gaussian(Point::euclidean(vec![0.0, 0.0]).unwrap(), a.clone()).unwrap();
    let x = Point::euclidean(vec![0.3, -0.7]).unwrap();
    let v = TangentVector::new(x.clone(), vec![1.0, 0.5]).unwrap();
    let cfg = SdeConfig::new(1e-3, 5.0, 110);
    let fd = flow_derivative_fd(&x, &v, &p, &cfg, 1e-4, &mut rng_stream(110, 0)).unwrap();
    let v0 = DVector::from_vec(vec![1.0, 0.5]);
    let mut worst = 0.0f64;
    for (t, n) in fd.times.iter().zip(&fd.norms) {
        let exact = ((-(&a * (*t / 2.0))).exp() * &v0).norm();
        worst = worst.max((n.unwrap() - exact).abs() / exact);
    }

    let ps = sphere_vmf(0.5);
    let kappa = ps.a1_certificate().kappa.unwrap();
    let xs = Point::sphere(vec![(PI / 3.0).sin(), 0.0, (PI / 3.0).cos()]).unwrap();
    let vs = TangentVector::new(xs.clone(), vec![0.0, 1.0, 0.0]).unwrap();
    let sfd = mean_flow_derivative(&xs, &vs, &ps, &SdeConfig::new(0.01, 5.0, 111), 1e-4, 400).unwrap();
    let (t, y): (Vec<f64>, Vec<f64>) = sfd.times.iter().zip(&sfd.norms).map(|(t, n)| (*t, n.unwrap().ln())).unzip();
    let (rate, _) = linear_fit(&t, &y);

    // Decay rate of the coupled distance as a cross-check on the same law.
    let cc = CouplingConfig::for_potential(&ps, SdeConfig::new(0.01, 6.0, 112)).unwrap();
    let runs = run_ensemble(
        &Point::sphere(vec![1.0, 0.0, 0.0]).unwrap(),
        &Point::sphere(vec![0.0, 1.0, 0.0]).unwrap(),
        &ps,
        &cc,
        200,
    )
    .unwrap();
    let n = cc.sde.n_steps();
    let traj: Vec<Vec<f64>> = runs.iter().map(|r| r.padded_dists(n)).collect();
    let times: Vec<f64> = (0..=n).map(|k| k as f64 * cc.sde.step).collect();
    let fit = fit_decay_rate(&traj, &times, 1.0, 112).unwrap();

    let pass = worst < 1e-4 && rate <= -kappa + 0.1;
    verdict(
        10,
        pass,
        &format!(
            "euclidean max relative error {worst:.2e}; sphere flow rate {rate:.4} <= {:.4} (coupled-distance rate {:.4})",
            -kappa + 0.1,
            fit.rate
        ),
    );
    pass
}

fn brute_force(cost: &[Vec<f64>]) -> f64 {
    fn rec(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
        if row == cost.len() {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for j in 0..cost.len() {
            if !used[j] {
                used[j] = true;
                best = best.min(cost[row][j] + rec(cost, row + 1, used));
                used[j] = false;
            }
        }
        best
    }
    rec(cost, 0, &mut vec![false; cost.len()])
}

fn random_set(kind: ManifoldKind, n: usize, rng: &mut impl Rng) -> SampleSet {
    let pts = (0..n).map(|_| random_point(kind, 1.0, rng).unwrap()).collect();
    SampleSet::new(kind, pts, Provenance::External).unwrap()
}

fn criterion_11_transport_solver() -> bool {
    let mut rng = rng_stream(113, 0);
    let kinds = [
        ManifoldKind::Circle,
        ManifoldKind::Sphere(2),
        ManifoldKind::Euclidean(3),
        ManifoldKind::Hyperbolic(2),
        ManifoldKind::Rotations(3),
    ];
    let mut brute_err = 0.0f64;
    let mut instances = 0;
    for n in 1..=7 {
        for _ in 0..20 {
            let cost: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
            let perm = solve_assignment(&cost);
            let got: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
            brute_err = brute_err.max((got - brute_force(&cost)).abs());
            instances += 1;
        }
        for kind in kinds {
            let a = random_set(kind, n, &mut rng);
            let b = random_set(kind, n, &mut rng);
            let cost: Vec<Vec<f64>> = a
                .points()
                .iter()
                .map(|x| b.points().iter().map(|y| manifold_stein::geometry::distance(x, y).unwrap()).collect())
                .collect();
            let w = w1_empirical(&a, &b).unwrap().value;
            brute_err = brute_err.max((w - brute_force(&cost) / n as f64).abs());
            instances += 1;
        }
    }

    let mut metric_err = 0.0f64;
    for kind in kinds {
        for _ in 0..5 {
            let a = random_set(kind, 24, &mut rng);
            let b = random_set(kind, 24, &mut rng);
            let c = random_set(kind, 24, &mut rng);
            let ab = w1_empirical(&a, &b).unwrap().value;
            let ba = w1_empirical(&b, &a).unwrap().value;
            let bc = w1_empirical(&b, &c).unwrap().value;
            let ac = w1_empirical(&a, &c).unwrap().value;
            let aa = w1_empirical(&a, &a).unwrap().value;
            metric_err = metric_err
                .max(aa.abs())
                .max((ab - ba).abs())
                .max(ac - ab - bc)
                .max(-ab);
        }
    }
    let pass = brute_err <= 1e-12 && metric_err <= 1e-9;
    verdict(
        11,
        pass,
        &format!("{instances} instances with n <= 7, max gap to brute force {brute_err:.1e}; max metric-axiom violation {metric_err:.1e}"),
    );
    pass
}

fn main() -> ExitCode {
    let criteria: [fn() -> bool; 11] = [
        criterion_01_hyperbolic_pathwise_decay,
        criterion_02_sphere_mean_decay_with_guard,
        criterion_03_euclidean_exact_contraction,
        criterion_04_circle_stein_solver,
        criterion_05_stein_identity_on_sphere,
        criterion_06_circle_lipschitz_bound,
        criterion_07_vmf_pair_bound,
        criterion_08_haar_constant_and_so3_bound,
        criterion_09_constant_calculators,
        criterion_10_flow_derivative,
        criterion_11_transport_solver,
    ];
    let passed = criteria.iter().filter(|c| c()).count();
    println!("{passed} of {} criteria passed", criteria.len());
    if passed == criteria.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
