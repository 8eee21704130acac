//! Solutions of the Stein equation `h − E h(X) = L_φ f`, with
//! `L_φ = ½(Δ − ⟨∇φ, ∇·⟩)`, and checks of their regularity.
//!
//! * [`solve_fh`] estimates `f_h(x) = ∫₀^∞ (E h(X) − E h(X_{x,t})) dt` by
//!   Monte Carlo over Langevin paths started at `x`.
//! * [`circle_solve`] integrates the first-order equation
//!   `g' − φ'g = h − E h` exactly on the circle; then `f_h' = 2g`.
//! * [`stein_residual`], [`lipschitz_probe`] and [`stein_identity_check`]
//!   verify a candidate `f` through a finite-difference generator.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::functions::TestFunction;
use crate::geometry::{
    curvature_constants, distance, exp_map, gaussian_tangent, orthonormal_frame, parallel_transport, random_point,
    wrap_angle, ManifoldKind, Point, TangentVector,
};
use crate::potentials::{circle_normalizer, Potential, CIRCLE_GRID};
use crate::quadrature::{cumulative, simpson};
use crate::rng::rng_stream;
use crate::sde::{em_step, run_chain, SdeConfig};
use crate::stats::{batch_means, bootstrap_mean, mean_stderr, MeanEstimate};

pub use crate::functions::{named, registry};

/// Source of `E h(X)` and `E ρ(X, x)` under the invariant law.
#[derive(Clone, Debug)]
pub enum Reference {
    /// Exact quadrature on the circle.
    Circle(Potential),
    /// States of one long chain (or any sample of the law).
    Samples(Vec<Point>),
}

impl Reference {
    pub fn circle(p: &Potential) -> Result<Self> {
        if p.kind() != ManifoldKind::Circle {
            return invalid("quadrature reference needs a circle potential");
        }
        Ok(Reference::Circle(p.clone()))
    }

    /// One chain of duration `200/κ` after a burn-in of `20/κ`, started at
    /// the potential's centre; every node is kept.
    pub fn chain(p: &Potential, kappa: f64, step: f64, seed: u64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::MissingKappa("a long reference chain needs kappa > 0".into()));
        }
        let burn = (20.0 / kappa / step).round() as usize;
        let n = (200.0 / kappa / step).round() as usize;
        let mut rng = rng_stream(seed, u64::MAX - 7);
        let mut samples = Vec::with_capacity(n);
        run_chain(&p.center(), p, step, burn + n, &mut rng, |k, x| {
            if k > burn {
                samples.push(x.clone());
            }
        })?;
        Ok(Reference::Samples(samples))
    }

    pub fn mean(&self, h: &TestFunction) -> MeanEstimate {
        match self {
            Reference::Circle(p) => MeanEstimate {
                mean: circle_integral(p, |t| h.eval(&Point::angle(t))),
                stderr: 0.0,
            },
            Reference::Samples(s) => {
                let v: Vec<f64> = s.iter().map(|x| h.eval(x)).collect();
                batch_means(&v, 16)
            }
        }
    }

    pub fn mean_distance(&self, x: &Point) -> f64 {
        match self {
            Reference::Circle(p) => circle_integral(p, |t| wrap_angle(t - x.coords()[0]).abs()),
            Reference::Samples(s) => {
                s.iter().map(|y| distance(x, y).unwrap_or(f64::NAN)).sum::<f64>() / s.len() as f64
            }
        }
    }
}

fn circle_integral<F: Fn(f64) -> f64>(p: &Potential, f: F) -> f64 {
    let z = circle_normalizer(p).unwrap_or(f64::NAN);
    simpson(
        |t| f(t) * (-p.value(&Point::angle(t)).unwrap_or(f64::NAN)).exp(),
        -PI,
        PI,
        CIRCLE_GRID,
    ) / z
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteinConfig {
    pub n_paths: usize,
    pub step: f64,
    /// Defaults to `max(10/κ, 5)`.
    pub horizon: Option<f64>,
    pub seed: u64,
}

impl SteinConfig {
    pub fn new(n_paths: usize, step: f64, seed: u64) -> Self {
        SteinConfig {
            n_paths,
            step,
            horizon: None,
            seed,
        }
    }

    pub fn with_horizon(mut self, t: f64) -> Self {
        self.horizon = Some(t);
        self
    }

    pub fn horizon_for(&self, kappa: f64) -> f64 {
        self.horizon.unwrap_or((10.0 / kappa).max(5.0))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SteinEstimate {
    pub value: f64,
    pub stderr: f64,
    /// `C0(h)·Ê ρ(X, x)·e^{−κT}/κ`.
    pub truncation_bound: f64,
    pub horizon: f64,
    pub n_paths: usize,
    /// Set when `T < 3/κ`.
    pub short_horizon: bool,
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa > 0.0 && kappa.is_finite() {
        Ok(())
    } else {
        Err(Error::MissingKappa(format!("kappa must be positive, got {kappa}")))
    }
}

/// Trapezoidal integral of `E h(X) − h(X_t)` along one path.
fn path_integral<R: Rng + ?Sized>(x: &Point, h: &TestFunction, p: &Potential, eh: f64, step: f64, n: usize, rng: &mut R) -> Result<f64> {
    let mut acc = 0.0;
    run_chain(x, p, step, n, rng, |k, y| {
        let w = if k == 0 || k == n { 0.5 } else { 1.0 };
        acc += w * (eh - h.eval(y));
    })?;
    Ok(acc * step)
}

/// Monte-Carlo value of `f_h(x)`. Path `i` uses stream `(cfg.seed, i)`, so
/// calls at different `x` share their noise.
pub fn solve_fh(x: &Point, h: &TestFunction, p: &Potential, kappa: f64, reference: &Reference, cfg: &SteinConfig) -> Result<SteinEstimate> {
    check_kappa(kappa)?;
    if cfg.n_paths < 2 {
        return invalid("solve_fh needs at least two paths");
    }
    let t = cfg.horizon_for(kappa);
    let sde = SdeConfig::new(cfg.step, t, cfg.seed);
    sde.validate()?;
    let n = sde.n_steps();
    let eh = reference.mean(h).mean;
    let vals: Vec<f64> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| path_integral(x, h, p, eh, cfg.step, n, &mut rng_stream(cfg.seed, i)))
        .collect::<Result<_>>()?;
    let est = bootstrap_mean(&vals, 200, &mut rng_stream(cfg.seed, u64::MAX - 1));
    let c0 = h.c0().unwrap_or(f64::INFINITY);
    let truncation_bound = if c0 == 0.0 {
        0.0
    } else {
        c0 * reference.mean_distance(x) * (-kappa * t).exp() / kappa
    };
    Ok(SteinEstimate {
        value: est.mean,
        stderr: est.stderr,
        truncation_bound,
        horizon: t,
        n_paths: cfg.n_paths,
        short_horizon: t < 3.0 / kappa,
    })
}

/// Exact solution of the first-order equation on the circle, tabulated on
/// `CIRCLE_GRID` cells of `[−π, π]`:
///
/// `g(x) = e^{φ(x)} ∫_{−π}^x (h − E h) e^{−φ} dy`, `f' = 2g`, `∫ f dμ = 0`.
#[derive(Clone, Debug)]
pub struct CircleSolution {
    potential: Potential,
    h: TestFunction,
    mean_h: f64,
    delta: f64,
    nodes: Vec<f64>,
    g: Vec<f64>,
    dg: Vec<f64>,
    /// `∫_{−π}^{θ_k} 2g` minus its μ-mean.
    f: Vec<f64>,
}

pub fn circle_solve(h: &TestFunction, p: &Potential) -> Result<CircleSolution> {
    if p.kind() != ManifoldKind::Circle {
        return invalid("circle_solve needs a circle potential");
    }
    let n = CIRCLE_GRID;
    let delta = 2.0 * PI / n as f64;
    let nodes: Vec<f64> = (0..=n).map(|k| -PI + k as f64 * delta).collect();
    let phi = |t: f64| p.value(&Point::angle(t)).unwrap_or(f64::NAN);
    let dphi = |t: f64| p.gradient(&Point::angle(t)).map(|g| g.comps()[0]).unwrap_or(f64::NAN);
    let hv = |t: f64| h.eval(&Point::angle(t));
    let z = circle_normalizer(p)?;
    let mean_h = simpson(|t| hv(t) * (-phi(t)).exp(), -PI, PI, n) / z;
    let integral = cumulative(|t| (hv(t) - mean_h) * (-phi(t)).exp(), &nodes);
    let g: Vec<f64> = nodes.iter().zip(&integral).map(|(t, i)| phi(*t).exp() * i).collect();
    let dg: Vec<f64> = nodes
        .iter()
        .zip(&g)
        .map(|(t, gv)| dphi(*t) * gv + hv(*t) - mean_h)
        .collect();
    let mut f = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    f.push(0.0);
    for k in 0..n {
        acc += 2.0 * (delta / 2.0 * (g[k] + g[k + 1]) + delta * delta / 12.0 * (dg[k] - dg[k + 1]));
        f.push(acc);
    }
    let weights = |k: usize| -> f64 {
        if k == 0 || k == n {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mean_f = (0..=n).map(|k| weights(k) * f[k] * (-phi(nodes[k])).exp()).sum::<f64>() * delta / 3.0 / z;
    f.iter_mut().for_each(|v| *v -= mean_f);
    Ok(CircleSolution {
        potential: p.clone(),
        h: h.clone(),
        mean_h,
        delta,
        nodes,
        g,
        dg,
        f,
    })
}

impl CircleSolution {
    pub fn mean_h(&self) -> f64 {
        self.mean_h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn g_nodes(&self) -> &[f64] {
        &self.g
    }

    fn locate(&self, theta: f64) -> (usize, f64) {
        let t = wrap_angle(theta);
        let s = (t + PI) / self.delta;
        let k = (s.floor() as usize).min(self.nodes.len() - 2);
        (k, s - k as f64)
    }

    /// Cubic Hermite interpolant of `g`.
    pub fn g(&self, theta: f64) -> f64 {
        let (k, u) = self.locate(theta);
        let (u2, u3) = (u * u, u * u * u);
        (2.0 * u3 - 3.0 * u2 + 1.0) * self.g[k]
            + (u3 - 2.0 * u2 + u) * self.delta * self.dg[k]
            + (-2.0 * u3 + 3.0 * u2) * self.g[k + 1]
            + (u3 - u2) * self.delta * self.dg[k + 1]
    }

    /// `g'` from the equation itself, `φ'g + h − E h`.
    pub fn g_prime(&self, theta: f64) -> f64 {
        let x = Point::angle(theta);
        let dphi = self.potential.gradient(&x).map(|v| v.comps()[0]).unwrap_or(f64::NAN);
        dphi * self.g(theta) + self.h.eval(&x) - self.mean_h
    }

    /// `f_h`, normalised to zero mean under the invariant law.
    pub fn f(&self, theta: f64) -> f64 {
        let (k, u) = self.locate(theta);
        let (u2, u3, u4) = (u * u, u * u * u, u * u * u * u);
        let int = (u4 / 2.0 - u3 + u) * self.g[k]
            + (u4 / 4.0 - 2.0 * u3 / 3.0 + u2 / 2.0) * self.delta * self.dg[k]
            + (-u4 / 2.0 + u3) * self.g[k + 1]
            + (u4 / 4.0 - u3 / 3.0) * self.delta * self.dg[k + 1];
        self.f[k] + 2.0 * self.delta * int
    }

    pub fn f_prime(&self, theta: f64) -> f64 {
        2.0 * self.g(theta)
    }

    pub fn f_second(&self, theta: f64) -> f64 {
        2.0 * self.g_prime(theta)
    }

    /// `sup_k |g'(θ_k) − φ'(θ_k)g(θ_k) − (h(θ_k) − E h)|` with `g'` from
    /// sixth-order periodic central differences of the tabulated values.
    pub fn residual_sup(&self) -> f64 {
        let n = self.nodes.len() - 1;
        let gp = |k: isize| self.g[k.rem_euclid(n as isize) as usize];
        (0..n as isize)
            .map(|k| {
                let d = (-gp(k - 3) + 9.0 * gp(k - 2) - 45.0 * gp(k - 1) + 45.0 * gp(k + 1) - 9.0 * gp(k + 2) + gp(k + 3))
                    / (60.0 * self.delta);
                let t = self.nodes[k as usize];
                let x = Point::angle(t);
                let dphi = self.potential.gradient(&x).map(|v| v.comps()[0]).unwrap_or(f64::NAN);
                (d - dphi * self.g[k as usize] - (self.h.eval(&x) - self.mean_h)).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// A candidate solution `f` that can be evaluated at points, possibly with
/// Monte-Carlo replicates.
pub trait Estimator: Sync {
    fn value(&self, x: &Point) -> Result<f64>;

    /// Replicated values at `points` (one row per replicate, one column per
    /// point). Deterministic estimators return a single row.
    fn replicates(&self, points: &[Point]) -> Result<Vec<Vec<f64>>> {
        Ok(vec![points.iter().map(|x| self.value(x)).collect::<Result<_>>()?])
    }

    /// Values at `points`, averaged over replicates.
    fn values(&self, points: &[Point]) -> Result<Vec<f64>> {
        let rows = self.replicates(points)?;
        let n = rows.len() as f64;
        Ok((0..points.len()).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect())
    }
}

impl Estimator for CircleSolution {
    fn value(&self, x: &Point) -> Result<f64> {
        if x.kind() != ManifoldKind::Circle {
            return invalid("circle solution evaluated off the circle");
        }
        Ok(self.f(x.coords()[0]))
    }
}

/// A deterministic function used as an estimator.
pub struct FnEstimator<F>(pub F);

impl<F: Fn(&Point) -> f64 + Sync> Estimator for FnEstimator<F> {
    fn value(&self, x: &Point) -> Result<f64> {
        Ok((self.0)(x))
    }
}

/// [`solve_fh`] as an [`Estimator`]. Replicates drive the first point's
/// path with fresh noise and every other point's path with that noise
/// transported along the minimal geodesic, so stencil differences are
/// resolved far below the single-point standard error.
pub struct MonteCarloFh<'a> {
    pub h: &'a TestFunction,
    pub p: &'a Potential,
    pub kappa: f64,
    pub reference: &'a Reference,
    pub cfg: SteinConfig,
}

impl Estimator for MonteCarloFh<'_> {
    fn value(&self, x: &Point) -> Result<f64> {
        Ok(solve_fh(x, self.h, self.p, self.kappa, self.reference, &self.cfg)?.value)
    }

    fn replicates(&self, points: &[Point]) -> Result<Vec<Vec<f64>>> {
        check_kappa(self.kappa)?;
        let t = self.cfg.horizon_for(self.kappa);
        let sde = SdeConfig::new(self.cfg.step, t, self.cfg.seed);
        sde.validate()?;
        let n = sde.n_steps();
        let eh = self.reference.mean(self.h).mean;
        (0..self.cfg.n_paths as u64)
            .into_par_iter()
            .map(|i| bundle_integrals(points, self.h, self.p, eh, self.cfg.step, n, &mut rng_stream(self.cfg.seed, i)))
            .collect()
    }
}

fn bundle_integrals<R: Rng + ?Sized>(
    points: &[Point],
    h: &TestFunction,
    p: &Potential,
    eh: f64,
    step: f64,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let mut xs: Vec<Point> = points.to_vec();
    let mut acc: Vec<f64> = xs.iter().map(|x| 0.5 * (eh - h.eval(x))).collect();
    for k in 1..=n {
        let xi = gaussian_tangent(&xs[0], rng);
        let mut next = Vec::with_capacity(xs.len());
        for (j, x) in xs.iter().enumerate() {
            let noise = if j == 0 {
                xi.clone()
            } else {
                match parallel_transport(&xs[0], x, &xi) {
                    Ok(v) => v,
                    Err(Error::CutLocus { .. }) => orthonormal_frame(x).combine(&orthonormal_frame(&xs[0]).coefficients(&xi)),
                    Err(e) => return Err(e),
                }
            };
            next.push(em_step(x, p, step, &noise)?);
        }
        xs = next;
        let w = if k == n { 0.5 } else { 1.0 };
        for (a, x) in acc.iter_mut().zip(&xs) {
            *a += w * (eh - h.eval(x));
        }
    }
    Ok(acc.into_iter().map(|a| a * step).collect())
}

/// Stencil `x, exp_x(±ε e_i)` in the deterministic frame at `x`.
pub fn stencil(x: &Point, eps: f64) -> Result<(Vec<Point>, Vec<TangentVector>)> {
    let frame = orthonormal_frame(x);
    let mut pts = vec![x.clone()];
    for e in frame.basis() {
        pts.push(exp_map(x, &e.scaled(eps))?);
    }
    for e in frame.basis() {
        pts.push(exp_map(x, &e.scaled(-eps))?);
    }
    Ok((pts, frame.basis().to_vec()))
}

/// `L̂f = ½(Δ̂f − ⟨∇φ, ∇̂f⟩)` from values on [`stencil`] points.
fn generator_from_values(vals: &[f64], basis: &[TangentVector], grad: &TangentVector, eps: f64) -> Result<f64> {
    let m = basis.len();
    let mut lap = 0.0;
    let mut drift = 0.0;
    for (i, e) in basis.iter().enumerate() {
        let (fp, fm) = (vals[1 + i], vals[1 + m + i]);
        lap += (fp - 2.0 * vals[0] + fm) / (eps * eps);
        drift += grad.inner(e)? * (fp - fm) / (2.0 * eps);
    }
    Ok(0.5 * (lap - drift))
}

/// Finite-difference generator `L̂f(x)` with its Monte-Carlo standard error.
pub fn generator_fd(f: &dyn Estimator, p: &Potential, x: &Point, eps: f64) -> Result<MeanEstimate> {
    let (pts, basis) = stencil(x, eps)?;
    let grad = p.gradient(x)?;
    let rows = f.replicates(&pts)?;
    let vals: Vec<f64> = rows
        .iter()
        .map(|r| generator_from_values(r, &basis, &grad, eps))
        .collect::<Result<_>>()?;
    Ok(if vals.len() == 1 {
        MeanEstimate {
            mean: vals[0],
            stderr: 0.0,
        }
    } else {
        mean_stderr(&vals)
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualReport {
    /// `|h(x) − E h − L̂f(x)|` at `eps`.
    pub residual: f64,
    /// Standard error of `h(x) − Ê h − L̂f(x)`.
    pub noise: f64,
    /// The same residual at `eps/2`.
    pub residual_half_eps: f64,
    /// Residual below three noise units, so a zero residual cannot be
    /// distinguished from the estimator's noise.
    pub inconclusive: bool,
}

/// Residual of the Stein equation for a candidate `f` at `x`. The noise
/// combines the generator's replicate error with the error of `mean_h`.
pub fn stein_residual(x: &Point, h: &TestFunction, f: &dyn Estimator, p: &Potential, eps: f64, mean_h: MeanEstimate) -> Result<ResidualReport> {
    if !(eps > 0.0) {
        return invalid("eps must be positive");
    }
    let lhs = h.eval(x) - mean_h.mean;
    let full = generator_fd(f, p, x, eps)?;
    let half = generator_fd(f, p, x, eps / 2.0)?;
    let residual = (lhs - full.mean).abs();
    let noise = full.stderr.hypot(mean_h.stderr);
    Ok(ResidualReport {
        residual,
        noise,
        residual_half_eps: (lhs - half.mean).abs(),
        inconclusive: noise > 0.0 && residual < 3.0 * noise,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzProbe {
    pub max_ratio: f64,
    /// Indices of pairs whose ratio exceeds `bound`.
    pub violations: Vec<usize>,
    pub bound: f64,
}

/// Random pairs with distances spread uniformly over `[0.1, 0.9·inj]` (or
/// `[0.1, 5]` without a cut locus).
pub fn probe_pairs<R: Rng + ?Sized>(kind: ManifoldKind, n: usize, rng: &mut R) -> Result<Vec<(Point, Point)>> {
    let inj = curvature_constants(kind)?.injectivity_radius;
    let hi = if inj.is_finite() { 0.9 * inj } else { 5.0 };
    (0..n)
        .map(|_| {
            let x = random_point(kind, 1.0, rng)?;
            let v = gaussian_tangent(&x, rng);
            let r = 0.1 + (hi - 0.1) * rng.random::<f64>();
            let y = exp_map(&x, &v.scaled(r / v.norm()))?;
            Ok((x, y))
        })
        .collect()
}

/// Largest difference quotient `|f(x) − f(y)|/ρ(x, y)` over `pairs`,
/// compared with `c0h/κ + 3·noise`. All pair points are evaluated in one
/// [`Estimator::values`] call, so Monte-Carlo estimators share their paths.
pub fn lipschitz_probe(f: &dyn Estimator, pairs: &[(Point, Point)], kappa: f64, c0h: f64, noise: f64) -> Result<LipschitzProbe> {
    check_kappa(kappa)?;
    if pairs.len() < 200 {
        return invalid(format!("need at least 200 pairs, got {}", pairs.len()));
    }
    let bound = c0h / kappa + 3.0 * noise;
    let pts: Vec<Point> = pairs.iter().flat_map(|(x, y)| [x.clone(), y.clone()]).collect();
    let vals = f.values(&pts)?;
    let ratios: Vec<f64> = pairs
        .iter()
        .zip(vals.chunks(2))
        .map(|((x, y), v)| {
            let d = distance(x, y)?;
            if d <= 0.0 {
                return invalid("probe pair at distance zero");
            }
            Ok((v[0] - v[1]).abs() / d)
        })
        .collect::<Result<_>>()?;
    Ok(LipschitzProbe {
        max_ratio: ratios.iter().copied().fold(0.0, f64::max),
        violations: ratios
            .iter()
            .enumerate()
            .filter(|(_, r)| **r > bound)
            .map(|(i, _)| i)
            .collect(),
        bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityConfig {
    pub kappa: f64,
    pub step: f64,
    pub seed: u64,
    pub eps: f64,
    /// Allowance for the finite-difference and discretisation bias.
    pub budget: f64,
}

impl IdentityConfig {
    pub fn new(kappa: f64, seed: u64) -> Self {
        IdentityConfig {
            kappa,
            step: SdeConfig::DEFAULT_STEP,
            seed,
            eps: 0.05,
            budget: 0.01,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityReport {
    pub mean: f64,
    pub stderr: f64,
    pub pass: bool,
}

/// Ergodic average of `L̂_φ f` along a chain of duration `200/κ` after a
/// burn-in of `20/κ`; passes when `|mean| ≤ 3·stderr + budget`.
pub fn stein_identity_check(f: &TestFunction, p: &Potential, cfg: &IdentityConfig) -> Result<IdentityReport> {
    check_kappa(cfg.kappa)?;
    let burn = (20.0 / cfg.kappa / cfg.step).round() as usize;
    let n = (200.0 / cfg.kappa / cfg.step).round() as usize;
    let mut rng = rng_stream(cfg.seed, 0);
    let fe = FnEstimator(|x: &Point| f.eval(x));
    let mut vals = Vec::with_capacity(n);
    let mut err = None;
    run_chain(&p.center(), p, cfg.step, burn + n, &mut rng, |k, x| {
        if k > burn && err.is_none() {
            match generator_fd(&fe, p, x, cfg.eps) {
                Ok(v) => vals.push(v.mean),
                Err(e) => err = Some(e),
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    let est = batch_means(&vals, 16);
    Ok(IdentityReport {
        mean: est.mean,
        stderr: est.stderr,
        pass: est.mean.abs() <= 3.0 * est.stderr + cfg.budget,
    })
}

/// `∫ ½(f'' − φ'f') dμ` on the circle by quadrature, from closed-form
/// derivatives of `f`.
pub fn circle_generator_mean<F1, F2>(p: &Potential, df: F1, d2f: F2) -> Result<f64>
where
    F1: Fn(f64) -> f64,
    F2: Fn(f64) -> f64,
{
    if p.kind() != ManifoldKind::Circle {
        return invalid("circle_generator_mean needs a circle potential");
    }
    Ok(circle_integral(p, |t| {
        let dphi = p.gradient(&Point::angle(t)).map(|g| g.comps()[0]).unwrap_or(f64::NAN);
        0.5 * (d2f(t) - dphi * df(t))
    }))
}
