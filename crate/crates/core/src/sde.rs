//! Geodesic Euler–Maruyama integration of `dX = dB − ½∇φ(X) dt` and
//! single-chain ergodic estimates.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::functions::TestFunction;
use crate::geometry::{
    distance, exp_map, gaussian_tangent, orthonormal_frame, parallel_transport, Point, TangentVector,
};
use crate::potentials::Potential;
use crate::rng::rng_stream;
use crate::stats::{batch_means, MeanEstimate};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdeConfig {
    pub step: f64,
    pub horizon: f64,
    pub seed: u64,
    pub burn_in: f64,
    /// Largest step accepted by [`SdeConfig::validate`].
    pub max_step: f64,
}

impl SdeConfig {
    pub const DEFAULT_STEP: f64 = 0.005;
    pub const STEP_GUARD: f64 = 0.05;

    pub fn new(step: f64, horizon: f64, seed: u64) -> Self {
        SdeConfig {
            step,
            horizon,
            seed,
            burn_in: 0.0,
            max_step: Self::STEP_GUARD,
        }
    }

    pub fn with_burn_in(mut self, burn_in: f64) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    /// Lifts the step-size guard.
    pub fn unguarded(mut self) -> Self {
        self.max_step = f64::INFINITY;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return invalid(format!("step must be positive, got {}", self.step));
        }
        if !(self.horizon >= self.step && self.horizon.is_finite()) {
            return invalid(format!("horizon {} is shorter than the step {}", self.horizon, self.step));
        }
        if self.step > self.max_step {
            return Err(Error::StepGuard(format!(
                "step {} exceeds the guard {}",
                self.step, self.max_step
            )));
        }
        if !(self.burn_in >= 0.0) {
            return invalid("burn-in must be nonnegative");
        }
        Ok(())
    }

    /// Number of steps, `T/h` rounded to the nearest integer.
    pub fn n_steps(&self) -> usize {
        ((self.horizon / self.step).round() as usize).max(1)
    }
}

/// Burn-in of `20/κ` when `φ` has a curvature certificate, else a tenth of
/// the horizon.
pub fn default_burn_in(p: &Potential, horizon: f64) -> f64 {
    match p.a1_certificate().kappa {
        Some(k) => 20.0 / k,
        None => 0.1 * horizon,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub points: Vec<Point>,
}

/// One step `exp_x(√h·ξ − (h/2)∇φ(x))` with `ξ` a standard frame draw at `x`.
///
/// A cut-locus failure of the gradient is retried once from a point moved by
/// `1e−8` along the first frame vector.
pub fn em_step(x: &Point, p: &Potential, h: f64, xi: &TangentVector) -> Result<Point> {
    match p.gradient(x) {
        Ok(g) => exp_map(x, &xi.scaled(h.sqrt()).axpy(-0.5 * h, &g)?),
        Err(Error::CutLocus { .. }) => {
            let frame = orthonormal_frame(x);
            let x2 = exp_map(x, &frame.basis()[0].scaled(1e-8))?;
            let xi2 = orthonormal_frame(&x2).combine(&frame.coefficients(xi));
            let g = p.gradient(&x2)?;
            exp_map(&x2, &xi2.scaled(h.sqrt()).axpy(-0.5 * h, &g)?)
        }
        Err(e) => Err(e),
    }
}

/// Runs `n_steps` steps from `x0`, calling `visit(k, x_k)` at every node
/// including the start.
pub fn run_chain<R, F>(x0: &Point, p: &Potential, step: f64, n_steps: usize, rng: &mut R, mut visit: F) -> Result<Point>
where
    R: Rng + ?Sized,
    F: FnMut(usize, &Point),
{
    let mut x = x0.clone();
    visit(0, &x);
    for k in 1..=n_steps {
        let xi = gaussian_tangent(&x, rng);
        x = em_step(&x, p, step, &xi)?;
        visit(k, &x);
    }
    Ok(x)
}

pub fn simulate<R: Rng + ?Sized>(x0: &Point, p: &Potential, cfg: &SdeConfig, rng: &mut R) -> Result<PathSample> {
    cfg.validate()?;
    if x0.kind() != p.kind() {
        return Err(Error::KindMismatch {
            expected: p.kind(),
            found: x0.kind(),
        });
    }
    let n = cfg.n_steps();
    let mut points = Vec::with_capacity(n + 1);
    run_chain(x0, p, cfg.step, n, rng, |_, x| points.push(x.clone()))?;
    let times = (0..=n).map(|k| k as f64 * cfg.step).collect();
    Ok(PathSample { times, points })
}

/// Time average of `h` over the nodes with `t ≥ burn_in`, with a 16-batch
/// batch-means standard error.
pub fn ergodic_mean(h: &TestFunction, path: &PathSample, burn_in: f64) -> Result<MeanEstimate> {
    let values: Vec<f64> = path
        .times
        .iter()
        .zip(&path.points)
        .filter(|(t, _)| **t >= burn_in)
        .map(|(_, x)| h.eval(x))
        .collect();
    if values.is_empty() {
        return invalid(format!("no path nodes after burn-in {burn_in}"));
    }
    Ok(batch_means(&values, 16))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowDerivative {
    pub times: Vec<f64>,
    /// `None` where the noise transport hit a cut locus.
    pub norms: Vec<Option<f64>>,
}

/// Finite-difference estimate of `|v_t|` for the derivative flow: two chains
/// from `x` and `exp_x(eps·v)` driven by the same frame draws, transported
/// from the first chain to the second along the minimal geodesic.
pub fn flow_derivative_fd<R: Rng + ?Sized>(
    x: &Point,
    v: &TangentVector,
    p: &Potential,
    cfg: &SdeConfig,
    eps: f64,
    rng: &mut R,
) -> Result<FlowDerivative> {
    cfg.validate()?;
    if !(1e-6..=1e-3).contains(&eps) {
        return invalid(format!("eps {eps} outside [1e-6, 1e-3]"));
    }
    let n = cfg.n_steps();
    let mut a = x.clone();
    let mut b = exp_map(x, &v.scaled(eps))?;
    let mut times = Vec::with_capacity(n + 1);
    let mut norms = Vec::with_capacity(n + 1);
    times.push(0.0);
    norms.push(Some(distance(&a, &b)? / eps));
    for k in 1..=n {
        let xi = gaussian_tangent(&a, rng);
        let (xi_b, ok) = match parallel_transport(&a, &b, &xi) {
            Ok(w) => (w, true),
            Err(Error::CutLocus { .. }) => {
                let c = orthonormal_frame(&a).coefficients(&xi);
                (orthonormal_frame(&b).combine(&c), false)
            }
            Err(e) => return Err(e),
        };
        a = em_step(&a, p, cfg.step, &xi)?;
        b = em_step(&b, p, cfg.step, &xi_b)?;
        times.push(k as f64 * cfg.step);
        norms.push(if ok { Some(distance(&a, &b)? / eps) } else { None });
    }
    Ok(FlowDerivative { times, norms })
}

/// Mean of [`flow_derivative_fd`] over `n_paths` independent noise streams
/// (stream `i` seeded by `(cfg.seed, i)`), skipping flagged nodes.
pub fn mean_flow_derivative(
    x: &Point,
    v: &TangentVector,
    p: &Potential,
    cfg: &SdeConfig,
    eps: f64,
    n_paths: usize,
) -> Result<FlowDerivative> {
    let runs: Vec<FlowDerivative> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| flow_derivative_fd(x, v, p, cfg, eps, &mut rng_stream(cfg.seed, i)))
        .collect::<Result<_>>()?;
    let n = runs.first().map_or(0, |r| r.times.len());
    let norms = (0..n)
        .map(|k| {
            let vals: Vec<f64> = runs.iter().filter_map(|r| r.norms[k]).collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })
        .collect();
    Ok(FlowDerivative {
        times: runs.first().map(|r| r.times.clone()).unwrap_or_default(),
        norms,
    })
}
