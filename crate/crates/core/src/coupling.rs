//! Parallel-transport coupling of two Langevin chains with a distance-band
//! guard near the cut locus.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::{curvature_constants, distance, gaussian_tangent, parallel_transport, Point};
use crate::potentials::Potential;
use crate::rng::rng_stream;
use crate::sde::{em_step, SdeConfig};
use crate::stats::{linear_fit, quantile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Noise of `y` is the transported noise of `x`.
    Coupled,
    /// Independent noise; used inside the guard band.
    Independent,
    /// `x = y`; both legs share every draw from now on.
    Merged,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Coupled => "coupled",
            Mode::Independent => "independent",
            Mode::Merged => "merged",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingConfig {
    /// Distance at which the pair decouples (`ρ_hi`). Infinite when the
    /// manifold has no cut locus.
    pub guard_on: f64,
    /// Distance below which a decoupled pair is coupled again (`ρ_lo`).
    pub guard_off: f64,
    pub merge_tol: f64,
    pub sde: SdeConfig,
}

impl CouplingConfig {
    pub const DEFAULT_MERGE_TOL: f64 = 1e-6;

    /// Band `(0.8, 0.9)` times the injectivity radius; no guard when the
    /// radius is infinite.
    pub fn for_potential(p: &Potential, sde: SdeConfig) -> Result<Self> {
        let inj = curvature_constants(p.kind())?.injectivity_radius;
        Ok(CouplingConfig {
            guard_on: 0.9 * inj,
            guard_off: 0.8 * inj,
            merge_tol: Self::DEFAULT_MERGE_TOL,
            sde,
        })
    }

    pub fn validate(&self, p: &Potential) -> Result<()> {
        self.sde.validate()?;
        let inj = curvature_constants(p.kind())?.injectivity_radius;
        let ok = if inj.is_infinite() && self.guard_on.is_infinite() {
            self.merge_tol > 0.0 && (self.guard_off.is_infinite() || self.merge_tol < self.guard_off)
        } else {
            0.0 < self.merge_tol && self.merge_tol < self.guard_off && self.guard_off < self.guard_on && self.guard_on < inj
        };
        if ok {
            Ok(())
        } else {
            invalid(format!(
                "need 0 < merge_tol ({}) < guard_off ({}) < guard_on ({}) < injectivity radius ({inj})",
                self.merge_tol, self.guard_off, self.guard_on
            ))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoupledPairState {
    pub x: Point,
    pub y: Point,
    pub mode: Mode,
    pub dist: f64,
}

impl CoupledPairState {
    /// Initial state; the mode follows from the starting distance.
    pub fn new(x: Point, y: Point, cfg: &CouplingConfig) -> Result<Self> {
        let dist = distance(&x, &y)?;
        let mut s = CoupledPairState {
            x,
            y,
            mode: Mode::Coupled,
            dist,
        };
        s.classify(cfg, Mode::Coupled);
        Ok(s)
    }

    fn classify(&mut self, cfg: &CouplingConfig, from: Mode) {
        self.mode = if self.dist <= cfg.merge_tol {
            self.y = self.x.clone();
            self.dist = 0.0;
            Mode::Merged
        } else if self.dist >= cfg.guard_on {
            Mode::Independent
        } else if from == Mode::Independent && self.dist > cfg.guard_off {
            Mode::Independent
        } else {
            Mode::Coupled
        };
    }
}

/// One step of the coupled pair. `y` receives the noise of `x` transported
/// along the minimal geodesic; a cut-locus failure of the transport forces
/// the independent mode for this step.
pub fn coupled_step<R: Rng + ?Sized>(
    s: &CoupledPairState,
    p: &Potential,
    cfg: &CouplingConfig,
    rng: &mut R,
) -> Result<CoupledPairState> {
    match s.mode {
        Mode::Independent => return independent_step(s, p, cfg, rng),
        Mode::Merged => return merged_step(s, p, cfg, rng),
        Mode::Coupled => {}
    }
    let h = cfg.sde.step;
    let xi = gaussian_tangent(&s.x, rng);
    let xi_y = match parallel_transport(&s.x, &s.y, &xi) {
        Ok(v) => v,
        Err(Error::CutLocus { .. }) => {
            let forced = CoupledPairState {
                mode: Mode::Independent,
                ..s.clone()
            };
            return independent_step(&forced, p, cfg, rng);
        }
        Err(e) => return Err(e),
    };
    let x = em_step(&s.x, p, h, &xi)?;
    let y = em_step(&s.y, p, h, &xi_y)?;
    let mut out = CoupledPairState {
        dist: distance(&x, &y)?,
        x,
        y,
        mode: Mode::Coupled,
    };
    out.classify(cfg, Mode::Coupled);
    Ok(out)
}

/// One step with independent frame draws for the two legs (`x` first).
pub fn independent_step<R: Rng + ?Sized>(
    s: &CoupledPairState,
    p: &Potential,
    cfg: &CouplingConfig,
    rng: &mut R,
) -> Result<CoupledPairState> {
    let h = cfg.sde.step;
    let xi = gaussian_tangent(&s.x, rng);
    let eta = gaussian_tangent(&s.y, rng);
    let x = em_step(&s.x, p, h, &xi)?;
    let y = em_step(&s.y, p, h, &eta)?;
    let mut out = CoupledPairState {
        dist: distance(&x, &y)?,
        x,
        y,
        mode: Mode::Independent,
    };
    out.classify(cfg, Mode::Independent);
    Ok(out)
}

fn merged_step<R: Rng + ?Sized>(
    s: &CoupledPairState,
    p: &Potential,
    cfg: &CouplingConfig,
    rng: &mut R,
) -> Result<CoupledPairState> {
    let xi = gaussian_tangent(&s.x, rng);
    let x = em_step(&s.x, p, cfg.sde.step, &xi)?;
    Ok(CoupledPairState {
        y: x.clone(),
        x,
        mode: Mode::Merged,
        dist: 0.0,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoupledRun {
    pub times: Vec<f64>,
    pub dists: Vec<f64>,
    pub modes: Vec<Mode>,
}

impl CoupledRun {
    /// Distances on the full grid of `n_steps + 1` nodes, padding with zero
    /// after the merge.
    pub fn padded_dists(&self, n_steps: usize) -> Vec<f64> {
        let mut d = self.dists.clone();
        d.resize(n_steps + 1, 0.0);
        d
    }

    /// Modes on the full grid, padding with `Merged`.
    pub fn padded_modes(&self, n_steps: usize) -> Vec<Mode> {
        let mut m = self.modes.clone();
        m.resize(n_steps + 1, Mode::Merged);
        m
    }

    pub fn merge_time(&self) -> Option<f64> {
        self.modes
            .iter()
            .position(|m| *m == Mode::Merged)
            .map(|k| self.times[k])
    }
}

/// Runs the coupled pair up to the horizon, stopping at the first merge.
pub fn run_coupled<R: Rng + ?Sized>(
    x0: &Point,
    y0: &Point,
    p: &Potential,
    cfg: &CouplingConfig,
    rng: &mut R,
) -> Result<CoupledRun> {
    cfg.validate(p)?;
    let mut s = CoupledPairState::new(x0.clone(), y0.clone(), cfg)?;
    let n = cfg.sde.n_steps();
    let mut run = CoupledRun {
        times: vec![0.0],
        dists: vec![s.dist],
        modes: vec![s.mode],
    };
    for k in 1..=n {
        if s.mode == Mode::Merged {
            break;
        }
        s = coupled_step(&s, p, cfg, rng)?;
        run.times.push(k as f64 * cfg.sde.step);
        run.dists.push(s.dist);
        run.modes.push(s.mode);
    }
    Ok(run)
}

/// `n_runs` coupled runs, run `i` on stream `(cfg.sde.seed, i)`, in parallel.
pub fn run_ensemble(x0: &Point, y0: &Point, p: &Potential, cfg: &CouplingConfig, n_runs: usize) -> Result<Vec<CoupledRun>> {
    (0..n_runs as u64)
        .into_par_iter()
        .map(|i| run_coupled(x0, y0, p, cfg, &mut rng_stream(cfg.sde.seed, i)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub rate: f64,
    /// 95% bootstrap interval.
    pub ci: (f64, f64),
    /// End of the fitting window.
    pub window_end: f64,
}

/// Least-squares slope of `log E[dist^ℓ]` against time.
///
/// `trajectories` share the grid `times` (pad merged runs with zeros). The
/// window runs from 0 up to the 10% quantile of the merge times, and stops
/// earlier if the mean reaches zero. The interval comes from 200 bootstrap
/// resamples of whole trajectories.
pub fn fit_decay_rate(trajectories: &[Vec<f64>], times: &[f64], ell: f64, seed: u64) -> Result<DecayFit> {
    if trajectories.len() < 30 {
        return invalid(format!("need at least 30 trajectories, got {}", trajectories.len()));
    }
    if !(ell >= 1.0) {
        return invalid(format!("ell must be at least 1, got {ell}"));
    }
    if trajectories.iter().any(|t| t.len() != times.len()) {
        return invalid("trajectories must share the time grid");
    }
    let merge_times: Vec<f64> = trajectories
        .iter()
        .map(|d| d.iter().position(|v| *v == 0.0).map_or(f64::INFINITY, |k| times[k]))
        .collect();
    let t_q = quantile(&merge_times, 0.1);
    let window = |idx: &[usize]| -> Vec<(f64, f64)> {
        let mut pts = Vec::new();
        for (k, t) in times.iter().enumerate() {
            if *t >= t_q {
                break;
            }
            let m = idx.iter().map(|&i| trajectories[i][k].powf(ell)).sum::<f64>() / idx.len() as f64;
            if m <= 0.0 {
                break;
            }
            pts.push((*t, m.ln()));
        }
        pts
    };
    let slope = |pts: &[(f64, f64)]| {
        let (x, y): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
        linear_fit(&x, &y).0
    };
    let all: Vec<usize> = (0..trajectories.len()).collect();
    let pts = window(&all);
    if pts.len() < 3 {
        return Err(Error::Degenerate(format!("decay window holds {} points", pts.len())));
    }
    let rate = slope(&pts);
    let mut rng = rng_stream(seed, u64::MAX);
    let n = trajectories.len();
    let mut boots = Vec::with_capacity(200);
    for _ in 0..200 {
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let pts = window(&idx);
        if pts.len() >= 3 {
            boots.push(slope(&pts));
        }
    }
    let ci = if boots.is_empty() {
        (rate, rate)
    } else {
        (quantile(&boots, 0.025), quantile(&boots, 0.975))
    };
    Ok(DecayFit {
        rate,
        ci,
        window_end: pts.last().map_or(0.0, |p| p.0),
    })
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::functions::registry;
    use crate::geometry::{exp_map, ManifoldKind, TangentVector};
    use crate::stats::mean_stderr;

    fn sphere_vmf() -> Potential {
        Potential::vmf_sphere(Point::sphere(vec![0.0, 0.0, 1.0]).unwrap(), 0.5).unwrap()
    }

    fn gaussian(a: f64, m: usize) -> Potential {
        Potential::gaussian(Point::euclidean(vec![0.0; m]).unwrap(), DMatrix::identity(m, m) * a).unwrap()
    }

    #[test]
    fn default_band_and_validation() {
        let p = sphere_vmf();
        let cfg = CouplingConfig::for_potential(&p, SdeConfig::new(0.01, 1.0, 0)).unwrap();
        assert!((cfg.guard_on - 0.9 * std::f64::consts::PI).abs() < 1e-15);
        assert!(cfg.validate(&p).is_ok());
        let bad = CouplingConfig { guard_off: 3.0, ..cfg };
        assert!(bad.validate(&p).is_err());
        let g = gaussian(1.0, 2);
        let cfg = CouplingConfig::for_potential(&g, SdeConfig::new(0.01, 1.0, 0)).unwrap();
        assert!(cfg.guard_on.is_infinite() && cfg.validate(&g).is_ok());
    }

    #[test]
    fn identical_starts_merge_immediately() {
        let p = sphere_vmf();
        let cfg = CouplingConfig::for_potential(&p, SdeConfig::new(0.01, 1.0, 0)).unwrap();
        let x = Point::sphere(vec![1.0, 0.0, 0.0]).unwrap();
        let run = run_coupled(&x, &x, &p, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(run.modes, vec![Mode::Merged]);
        assert!(run.padded_dists(100).iter().all(|d| *d == 0.0));
    }

    #[test]
    fn merged_is_absorbing() {
        let p = sphere_vmf();
        let cfg = CouplingConfig::for_potential(&p, SdeConfig::new(0.01, 1.0, 0)).unwrap();
        let x = Point::sphere(vec![1.0, 0.0, 0.0]).unwrap();
        let mut s = CoupledPairState::new(x.clone(), x, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            s = coupled_step(&s, &p, &cfg, &mut rng).unwrap();
            assert_eq!(s.mode, Mode::Merged);
            assert_eq!(s.x, s.y);
        }
    }

    #[test]
    fn gaussian_noise_cancels() {
        let a = 1.0;
        let p = gaussian(a, 3);
        let cfg = CouplingConfig::for_potential(&p, SdeConfig::new(0.01, 5.0, 2)).unwrap();
        let x0 = Point::euclidean(vec![1.0, 0.0, 0.5]).unwrap();
        let y0 = Point::euclidean(vec![-0.5, 1.0, 0.0]).unwrap();
        let d0 = distance(&x0, &y0).unwrap();
        let run = run_coupled(&x0, &y0, &p, &cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        for (k, (t, d)) in run.times.iter().zip(&run.dists).enumerate() {
            let discrete = d0 * (1.0 - cfg.sde.step * a / 2.0).powi(k as i32);
            assert!((d - discrete).abs() < 1e-12 * d0);
            assert!((d - d0 * (-a * t / 2.0).exp()).abs() < 10.0 * cfg.sde.step * d);
        }
    }

    #[test]
    fn far_pair_decouples_and_band_has_hysteresis() {
        let p = sphere_vmf();
        let cfg = CouplingConfig::for_potential(&p, SdeConfig::new(0.01, 1.0, 0)).unwrap();
        let x = Point::sphere(vec![1.0, 0.0, 0.0]).unwrap();
        let y = Point::sphere(vec![-1.0, 0.05, 0.0].iter().map(|c| c / (1.0025f64).sqrt()).collect()).unwrap();
        let s = CoupledPairState::new(x.clone(), y, &cfg).unwrap();
        assert_eq!(s.mode, Mode::Independent);
        // A distance inside the band keeps whichever mode the pair had.
        let v = TangentVector::new(x.clone(), vec![0.0, 0.85 * std::f64::consts::PI, 0.0]).unwrap();
        let mid = exp_map(&x, &v).unwrap();
        let mut inside = CoupledPairState::new(x.clone(), mid.clone(), &cfg).unwrap();
        assert_eq!(inside.mode, Mode::Coupled);
        inside.mode = Mode::Independent;
        inside.classify(&cfg, Mode::Independent);
        assert_eq!(inside.mode, Mode::Independent);
        let mut coupled = CoupledPairState::new(x, mid, &cfg).unwrap();
        coupled.classify(&cfg, Mode::Coupled);
        assert_eq!(coupled.mode, Mode::Coupled);
    }

    #[test]
    fn coupled_step_from_beyond_guard_goes_independent() {
        let p = sphere_vmf();
        let cfg = CouplingConfig::for_potential(&p, SdeConfig::new(0.01, 1.0, 0)).unwrap();
        let x = Point::sphere(vec![1.0, 0.0, 0.0]).unwrap();
        let v = TangentVector::new(x.clone(), vec![0.0, 0.97 * std::f64::consts::PI, 0.0]).unwrap();
        let y = exp_map(&x, &v).unwrap();
        let s = CoupledPairState {
            dist: distance(&x, &y).unwrap(),
            x,
            y,
            mode: Mode::Coupled,
        };
        let out = coupled_step(&s, &p, &cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(out.mode, Mode::Independent);
    }

    #[test]
    fn runs_are_deterministic() {
        let p = sphere_vmf();
        let cfg = CouplingConfig::for_potential(&p, SdeConfig::new(0.01, 2.0, 9)).unwrap();
        let x = Point::sphere(vec![1.0, 0.0, 0.0]).unwrap();
        let y = Point::sphere(vec![0.0, 1.0, 0.0]).unwrap();
        let a = run_ensemble(&x, &y, &p, &cfg, 8).unwrap();
        let b = run_ensemble(&x, &y, &p, &cfg, 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn each_leg_has_the_invariant_law() {
        // Run pairs through both regimes and compare the legs' time averages
        // with a single chain.
        let p = sphere_vmf();
        let sde = SdeConfig::new(0.01, 400.0, 10);
        let cfg = CouplingConfig {
            merge_tol: 1e-300,
            ..CouplingConfig::for_potential(&p, sde).unwrap()
        };
        let h = &registry(ManifoldKind::Sphere(2))[2];
        let x0 = Point::sphere(vec![1.0, 0.0, 0.0]).unwrap();
        let y0 = Point::sphere(vec![-1.0, 0.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut s = CoupledPairState::new(x0.clone(), y0, &cfg).unwrap();
        let (mut hx, mut hy) = (Vec::new(), Vec::new());
        for k in 0..sde.n_steps() {
            s = if k % 2000 < 1000 {
                independent_step(&s, &p, &cfg, &mut rng).unwrap()
            } else {
                let forced = CoupledPairState { mode: Mode::Coupled, ..s.clone() };
                coupled_step(&forced, &p, &cfg, &mut rng).unwrap()
            };
            if k % 10 == 0 {
                hx.push(h.eval(&s.x));
                hy.push(h.eval(&s.y));
            }
        }
        let single = crate::sde::simulate(&x0, &p, &sde, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let e = crate::sde::ergodic_mean(h, &single, 0.0).unwrap();
        for v in [hx, hy] {
            let m = crate::stats::batch_means(&v, 16);
            let se = (m.stderr.powi(2) + e.stderr.powi(2)).sqrt();
            assert!((m.mean - e.mean).abs() < 3.0 * se, "{m:?} vs {e:?}");
        }
    }

    #[test]
    fn synthetic_decay_rate_is_exact() {
        let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.05).collect();
        let traj: Vec<Vec<f64>> = (0..30).map(|_| times.iter().map(|t| (-0.7 * t).exp()).collect()).collect();
        let fit = fit_decay_rate(&traj, &times, 1.0, 0).unwrap();
        assert!((fit.rate + 0.7).abs() < 1e-9);
        assert!(fit_decay_rate(&traj[..10], &times, 1.0, 0).is_err());
        assert!(fit_decay_rate(&traj, &times, 0.5, 0).is_err());
    }

    #[test]
    fn gaussian_decay_rates() {
        let a = 1.0;
        let p = gaussian(a, 2);
        let cfg = CouplingConfig::for_potential(&p, SdeConfig::new(0.005, 5.0, 12)).unwrap();
        let x0 = Point::euclidean(vec![1.0, 0.0]).unwrap();
        let y0 = Point::euclidean(vec![0.0, 1.0]).unwrap();
        let runs = run_ensemble(&x0, &y0, &p, &cfg, 40).unwrap();
        let n = cfg.sde.n_steps();
        let traj: Vec<Vec<f64>> = runs.iter().map(|r| r.padded_dists(n)).collect();
        for ell in [1.0, 2.0] {
            let fit = fit_decay_rate(&traj, &runs[0].times, ell, 1).unwrap();
            let want = -ell * a / 2.0;
            // Exact discrete contraction; its rate differs from the continuous one by O(h).
            assert!((fit.rate - want).abs() < 3e-3 * ell, "ell {ell}: {fit:?}");
            assert!(fit.ci.0 <= fit.rate && fit.rate <= fit.ci.1);
        }
    }

    #[test]
    fn hyperbolic_distance_rarely_increases() {
        let p = Potential::sq_dist_hyperbolic(Point::origin(ManifoldKind::Hyperbolic(2)).unwrap(), 1.0).unwrap();
        let cfg = CouplingConfig::for_potential(&p, SdeConfig::new(0.005, 4.0, 13)).unwrap();
        // The per-step fluctuation of the discrete coupled distance is about
        // ½h(χ²₁ − 1)tanh(ρ/2), so the 10·h^{3/2} threshold is only rarely
        // crossed for moderate distances; from ρ ≈ 1 upwards it is crossed in
        // more than 1% of steps at h = 0.005.
        let x0 = Point::hyperbolic_from_spatial(&[0.25, 0.0]).unwrap();
        let y0 = Point::hyperbolic_from_spatial(&[-0.25, 0.0]).unwrap();
        let runs = run_ensemble(&x0, &y0, &p, &cfg, 50).unwrap();
        let h = cfg.sde.step;
        let (mut jumps, mut total) = (0usize, 0usize);
        for r in &runs {
            for w in r.dists.windows(2) {
                total += 1;
                if w[1] > w[0] + 10.0 * h.sqrt() * h {
                    jumps += 1;
                }
            }
        }
        assert!((jumps as f64) < 0.01 * total as f64, "{jumps}/{total}");
    }

    #[test]
    fn sphere_fitted_rate_respects_curvature() {
        let p = sphere_vmf();
        let kappa = p.a1_certificate().kappa.unwrap();
        let cfg = CouplingConfig::for_potential(&p, SdeConfig::new(0.01, 6.0, 14)).unwrap();
        let x0 = Point::sphere(vec![1.0, 0.0, 0.0]).unwrap();
        let y0 = Point::sphere(vec![0.0, 1.0, 0.0]).unwrap();
        let runs = run_ensemble(&x0, &y0, &p, &cfg, 200).unwrap();
        let n = cfg.sde.n_steps();
        let traj: Vec<Vec<f64>> = runs.iter().map(|r| r.padded_dists(n)).collect();
        let times: Vec<f64> = (0..=n).map(|k| k as f64 * cfg.sde.step).collect();
        for ell in [1.0, 2.0] {
            let fit = fit_decay_rate(&traj, &times, ell, 2).unwrap();
            assert!(fit.rate <= -ell * kappa + 0.1, "ell {ell}: {fit:?}");
        }
        let d: Vec<f64> = traj.iter().map(|t| t[n]).collect();
        assert!(mean_stderr(&d).mean < 1.0);
    }
}
