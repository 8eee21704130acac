//! Fast checks against exact oracles; the whole set runs in seconds.

use std::f64::consts::PI;

use manifold_stein::bounds::{eta_star, fh_constant_bounds, haar_sqrt_mean, vmf_vmf_bound, BoundConstants};
use manifold_stein::coupling::{run_ensemble, CouplingConfig};
use manifold_stein::functions::named;
use manifold_stein::geometry::{random_point, ManifoldKind, Point, TangentVector};
use manifold_stein::potentials::Potential;
use manifold_stein::rng::rng_stream;
use manifold_stein::sde::{flow_derivative_fd, SdeConfig};
use manifold_stein::stein::{circle_solve, lipschitz_probe, probe_pairs};
use manifold_stein::transport::{solve_assignment, w1_empirical, Provenance, SampleSet};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::config::Result;
use crate::experiments::{Check, Outcome};

pub const CHECKS: &[&str] = &[
    "euclidean_contraction",
    "circle_quadrature",
    "circle_lipschitz",
    "constant_goldens",
    "zero_c2_formula",
    "assignment_brute_force",
    "w1_metric",
    "haar_constant",
    "flow_derivative",
    "equal_laws_bound",
    "determinism",
];

pub fn run(seed: u64) -> Result<Outcome> {
    let checks = vec![
        euclidean_contraction(seed)?,
        circle_quadrature()?,
        circle_lipschitz(seed)?,
        constant_goldens()?,
        zero_c2_formula()?,
        assignment_brute_force(seed),
        w1_metric(seed)?,
        haar_constant(seed)?,
        flow_derivative(seed)?,
        equal_laws_bound()?,
        determinism(seed)?,
    ];
    debug_assert_eq!(checks.len(), CHECKS.len());
    Ok(Outcome {
        checks,
        ..Default::default()
    })
}

fn euclidean_contraction(seed: u64) -> Result<Check> {
    let p = Potential::gaussian(Point::euclidean(vec![0.0, 0.0])?, DMatrix::identity(2, 2))?;
    let h = 0.01;
    let cc = CouplingConfig::for_potential(&p, SdeConfig::new(h, 5.0, seed))?;
    let runs = run_ensemble(&Point::euclidean(vec![1.0, 0.0])?, &Point::euclidean(vec![-1.0, 0.5])?, &p, &cc, 30)?;
    let worst = runs
        .iter()
        .flat_map(|r| {
            let d0 = r.dists[0];
            r.times.iter().zip(&r.dists).map(move |(t, d)| (d / (d0 * (-t / 2.0).exp()) - 1.0).abs())
        })
        .fold(0.0, f64::max);
    Ok(Check::at_most("euclidean_contraction", "coupled Gaussian distance is d0 exp(-t/2)", worst, 10.0 * h))
}

fn circle_quadrature() -> Result<Check> {
    let p = Potential::von_mises(0.0, 1.0)?;
    let sol = circle_solve(&named(ManifoldKind::Circle, "cos")?, &p)?;
    Ok(Check::at_most("circle_quadrature", "circle quadrature solves the equation", sol.residual_sup(), 1e-8))
}

fn circle_lipschitz(seed: u64) -> Result<Check> {
    let p = Potential::von_mises(0.0, 1.0)?;
    let sol = circle_solve(&named(ManifoldKind::Circle, "cos")?, &p)?;
    let pairs = probe_pairs(ManifoldKind::Circle, 500, &mut rng_stream(seed, 1))?;
    let probe = lipschitz_probe(&sol, &pairs, 0.5, 1.0, 0.0)?;
    Ok(Check::at_most(
        "circle_lipschitz",
        "Lipschitz constant of f_h at most C0(h)/kappa",
        probe.max_ratio,
        2.0 * (1.0 + 1e-6),
    ))
}

fn constant_goldens() -> Result<Check> {
    let bc = BoundConstants::new(2, 1.0, 0.1, 0.5, 0.5, 0.5)?;
    let c2f = fh_constant_bounds(1.0, 1.0, 1.0, &bc).c2f.unwrap_or(f64::NAN);
    let err = (c2f - 3.116_852_525_189_283).abs().max((eta_star(&bc)? - 5.558_426_262_594_641).abs());
    Ok(Check::at_most("constant_goldens", "second-order constants on the reference instance", err, 1e-12))
}

fn zero_c2_formula() -> Result<Check> {
    let mut worst = 0.0f64;
    for m in [1usize, 2, 4] {
        for kappa in [0.2, 1.0, 2.5] {
            for c2_phi in [0.0, 0.5, 3.0] {
                let bc = BoundConstants::new(m, kappa, 0.0, 0.3, 0.6, c2_phi)?;
                let got = fh_constant_bounds(1.0, 0.7, 0.4, &bc).c2f;
                let err = if 6.0 * kappa > c2_phi {
                    let want = 2.0 / kappa * ((c2_phi / (4.0 * kappa + c2_phi)).sqrt() * 0.7 + 0.4);
                    got.map_or(f64::INFINITY, |g| (g - want).abs() / want)
                } else if got.is_some() {
                    f64::INFINITY
                } else {
                    0.0
                };
                worst = worst.max(err);
            }
        }
    }
    Ok(Check::at_most("zero_c2_formula", "flat-frame simplification of C2(f_h)", worst, 1e-14))
}

fn brute_force(cost: &[Vec<f64>]) -> f64 {
    fn rec(cost: &[Vec<f64>], row: usize, used: &mut [bool]) -> f64 {
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

fn assignment_brute_force(seed: u64) -> Check {
    let mut rng = rng_stream(seed, 2);
    let mut worst = 0.0f64;
    for n in 1..=6 {
        for _ in 0..10 {
            let cost: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect();
            let perm = solve_assignment(&cost);
            let got: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
            worst = worst.max((got - brute_force(&cost)).abs());
        }
    }
    Check::at_most("assignment_brute_force", "assignment optimum equals brute force", worst, 1e-12)
}

fn w1_metric(seed: u64) -> Result<Check> {
    let mut rng = rng_stream(seed, 3);
    let kind = ManifoldKind::Sphere(2);
    let mut set = || -> Result<SampleSet> {
        let pts = (0..16).map(|_| random_point(kind, 1.0, &mut rng)).collect::<manifold_stein::Result<_>>()?;
        Ok(SampleSet::new(kind, pts, Provenance::External)?)
    };
    let (a, b, c) = (set()?, set()?, set()?);
    let ab = w1_empirical(&a, &b)?.value;
    let worst = w1_empirical(&a, &a)?
        .value
        .abs()
        .max((ab - w1_empirical(&b, &a)?.value).abs())
        .max(w1_empirical(&a, &c)?.value - ab - w1_empirical(&b, &c)?.value);
    Ok(Check::at_most("w1_metric", "empirical W1 is a metric", worst, 1e-9))
}

fn haar_constant(seed: u64) -> Result<Check> {
    let e = haar_sqrt_mean(20_000, &mut rng_stream(seed, 4))?;
    Ok(Check::at_most(
        "haar_constant",
        "E sqrt(3 - tr Z^2) = 4/pi",
        (e.mean - 4.0 / PI).abs(),
        3.0 * e.stderr,
    ))
}

fn flow_derivative(seed: u64) -> Result<Check> {
    let a = DMatrix::from_row_slice(2, 2, &[0.08, 0.02, 0.02, 0.05]);
    let p = Potential::gaussian(Point::euclidean(vec![0.0, 0.0])?, a.clone())?;
    let x = Point::euclidean(vec![0.3, -0.7])?;
    let v = TangentVector::new(x.clone(), vec![1.0, 0.5])?;
    let fd = flow_derivative_fd(&x, &v, &p, &SdeConfig::new(1e-3, 2.0, seed), 1e-4, &mut rng_stream(seed, 5))?;
    let v0 = DVector::from_vec(vec![1.0, 0.5]);
    let worst = fd
        .times
        .iter()
        .zip(&fd.norms)
        .map(|(t, n)| {
            let exact = ((-(&a * (*t / 2.0))).exp() * &v0).norm();
            n.map_or(f64::INFINITY, |n| (n - exact).abs() / exact)
        })
        .fold(0.0, f64::max);
    Ok(Check::at_most("flow_derivative", "derivative flow is exp(-tA/2) v", worst, 1e-4))
}

fn equal_laws_bound() -> Result<Check> {
    let x = Point::sphere(vec![0.0, 0.0, 1.0])?;
    let b = vmf_vmf_bound(&x, 0.4, &x, 0.4, 0.3, 1.0, 1.0)?;
    Ok(Check::at_most("equal_laws_bound", "bound vanishes for equal laws", b.abs(), 0.0))
}

fn determinism(seed: u64) -> Result<Check> {
    let p = Potential::vmf_sphere(Point::sphere(vec![0.0, 0.0, 1.0])?, 0.5)?;
    let cc = CouplingConfig::for_potential(&p, SdeConfig::new(0.01, 1.0, seed))?;
    let x = Point::sphere(vec![1.0, 0.0, 0.0])?;
    let y = Point::sphere(vec![0.0, 1.0, 0.0])?;
    let a = run_ensemble(&x, &y, &p, &cc, 16)?;
    let b = run_ensemble(&x, &y, &p, &cc, 16)?;
    let diff = a
        .iter()
        .zip(&b)
        .flat_map(|(r, s)| r.dists.iter().zip(&s.dists).map(|(u, v)| (u - v).abs()))
        .fold(if a.len() == b.len() { 0.0 } else { f64::INFINITY }, f64::max);
    Ok(Check::at_most("determinism", "identical seeds give identical ensembles", diff, 0.0))
}
