//! Empirical 1-Wasserstein distances between equal-size samples, exact
//! samplers for the invariant laws that have one, and a thinned-diffusion
//! sampler for the rest.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::geometry::{distance, dot, random_point, wrap_angle, ManifoldKind, Point};
use crate::potentials::Potential;
use crate::quadrature::cumulative;
use crate::sde::{run_chain, SdeConfig};

/// Largest sample size accepted by [`w1_empirical`].
pub const MAX_ASSIGNMENT: usize = 2048;

/// Nodes in the radial inverse-CDF tables of the sphere sampler.
const RADIAL_NODES: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    DiffusionThinned,
    ExactSampler,
    External,
}

impl Provenance {
    pub fn name(&self) -> &'static str {
        match self {
            Provenance::DiffusionThinned => "diffusion_thinned",
            Provenance::ExactSampler => "exact_sampler",
            Provenance::External => "external",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s.trim() {
            "diffusion_thinned" => Ok(Provenance::DiffusionThinned),
            "exact_sampler" => Ok(Provenance::ExactSampler),
            "external" => Ok(Provenance::External),
            other => Err(Error::Parse(format!("unknown provenance `{other}`"))),
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct SampleSet {
    kind: ManifoldKind,
    points: Vec<Point>,
    provenance: Provenance,
}

impl SampleSet {
    pub fn new(kind: ManifoldKind, points: Vec<Point>, provenance: Provenance) -> Result<Self> {
        if points.is_empty() {
            return invalid("a sample set needs at least one point");
        }
        if let Some(p) = points.iter().find(|p| p.kind() != kind) {
            return Err(Error::KindMismatch {
                expected: kind,
                found: p.kind(),
            });
        }
        Ok(SampleSet {
            kind,
            points,
            provenance,
        })
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Writes a header `kind=<name>,dim=<d>,provenance=<p>` followed by one
    /// row of ambient coordinates per point.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "kind={},dim={},provenance={}",
            self.kind.name(),
            self.kind.dim_parameter(),
            self.provenance
        )?;
        for p in &self.points {
            let row: Vec<String> = p.coords().iter().map(|c| format!("{c:?}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Reads the format of [`write_csv`](Self::write_csv). A header without
    /// a provenance field marks the set as external.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty sample file".into()))??;
        let (mut kind, mut dim, mut provenance) = (None, None, Provenance::External);
        for field in header.split(',') {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field `{field}`")))?;
            match k.trim() {
                "kind" => kind = Some(v.trim().to_string()),
                "dim" => {
                    dim = Some(
                        v.trim()
                            .parse::<usize>()
                            .map_err(|e| Error::Parse(format!("bad dim `{v}`: {e}")))?,
                    )
                }
                "provenance" => provenance = Provenance::from_name(v)?,
                other => return Err(Error::Parse(format!("unknown header field `{other}`"))),
            }
        }
        let kind = ManifoldKind::from_name(
            &kind.ok_or_else(|| Error::Parse("header lacks kind".into()))?,
            dim.unwrap_or(1),
        )?;
        let mut points = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let coords = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", i + 2)))?;
            points.push(Point::new(kind, coords)?);
        }
        SampleSet::new(kind, points, provenance)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct W1Result {
    pub value: f64,
    /// `assignment[i] = σ(i)`: `a[i]` is matched with `b[σ(i)]`.
    pub assignment: Vec<usize>,
}

/// Exact empirical W1 between equal-size samples: the minimum mean geodesic
/// cost over all perfect matchings.
pub fn w1_empirical(a: &SampleSet, b: &SampleSet) -> Result<W1Result> {
    if a.kind != b.kind {
        return Err(Error::KindMismatch {
            expected: a.kind,
            found: b.kind,
        });
    }
    let n = a.len();
    if b.len() != n {
        return invalid(format!("sample sizes differ: {} vs {}", n, b.len()));
    }
    if n > MAX_ASSIGNMENT {
        return invalid(format!("sample size {n} exceeds {MAX_ASSIGNMENT}"));
    }
    let rows: Vec<Vec<f64>> = a
        .points
        .par_iter()
        .map(|x| b.points.iter().map(|y| distance(x, y)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let assignment = solve_assignment(&rows);
    let mut costs: Vec<f64> = assignment.iter().enumerate().map(|(i, &j)| rows[i][j]).collect();
    // A fixed summation order makes the value independent of which sample
    // is listed first.
    costs.sort_by(f64::total_cmp);
    Ok(W1Result {
        value: costs.iter().sum::<f64>() / n as f64,
        assignment,
    })
}

/// Minimum-cost perfect matching of a square cost matrix by successive
/// shortest augmenting paths with dual potentials. Returns the column
/// assigned to each row.
pub fn solve_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based arrays, column 0 is a virtual root.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        while j0 != 0 {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[row_of[j] - 1] = j - 1;
    }
    assignment
}

/// I.i.d. draws from `μ_φ` where a direct sampler exists.
///
/// * vMF sphere: inverse CDF of the polar angle, uniform direction in the
///   orthogonal complement of the pole.
/// * von Mises circle: wrapped-Cauchy rejection.
/// * Gaussian: `μ + L⁻ᵀz` with `A = LLᵀ`.
/// * uniform laws: see [`random_point`].
/// * vMF on SO(3): rejection from Haar.
/// * Fisher–Watson: rejection from vMF(x₁, c₁).
///
/// Hyperbolic potentials are unsupported; use [`sample_diffusion`].
pub fn sample_exact<R: Rng + ?Sized>(p: &Potential, n: usize, rng: &mut R) -> Result<SampleSet> {
    p.validate()?;
    let kind = p.kind();
    let points: Vec<Point> = match p {
        Potential::VmfSphere { pole, c } => {
            let table = RadialTable::new(*c, kind.dim());
            (0..n).map(|_| table.sample(pole, rng)).collect::<Result<_>>()?
        }
        Potential::VonMisesCircle { mode, c } => (0..n).map(|_| Point::angle(von_mises(*mode, *c, rng))).collect(),
        Potential::GaussianEuclidean { mean, a } => {
            let chol = a
                .clone()
                .cholesky()
                .ok_or_else(|| Error::Degenerate("precision matrix is not positive definite".into()))?;
            let lt = chol.l().transpose();
            let mu = DVector::from_column_slice(mean.coords());
            (0..n)
                .map(|_| {
                    let z = DVector::from_fn(mu.len(), |_, _| rng.sample::<f64, _>(StandardNormal));
                    let x = lt
                        .solve_upper_triangular(&z)
                        .ok_or_else(|| Error::Degenerate("singular Cholesky factor".into()))?;
                    Point::euclidean((x + &mu).as_slice().to_vec())
                })
                .collect::<Result<_>>()?
        }
        Potential::Uniform(kind) => (0..n).map(|_| random_point(*kind, 1.0, rng)).collect::<Result<_>>()?,
        Potential::VmfRotations { s0, c } => {
            let s0m = s0.matrix()?;
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let z = random_point(kind, 1.0, rng)?;
                let tr = (s0m * z.matrix()?).trace();
                if rng.random::<f64>() < (c * (tr - 3.0)).exp() {
                    out.push(z);
                }
            }
            out
        }
        Potential::FisherWatsonSphere { x1, x2, c1, c2 } => {
            let table = RadialTable::new(*c1, kind.dim());
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let z = table.sample(x1, rng)?;
                let t = dot(x2.coords(), z.coords());
                if rng.random::<f64>() < (c2 * (t * t - 1.0)).exp() {
                    out.push(z);
                }
            }
            out
        }
        Potential::SqDistHyperbolic { .. } => {
            return Err(Error::Unsupported(
                "no exact sampler on hyperbolic space; use diffusion thinning".into(),
            ))
        }
    };
    SampleSet::new(kind, points, Provenance::ExactSampler)
}

/// Inverse CDF of the polar angle `θ = ρ(x₀, X)` under vMF on `S^m`, whose
/// density is proportional to `e^{c cos θ} sin^{m−1} θ` on `[0, π]`.
struct RadialTable {
    theta: Vec<f64>,
    cdf: Vec<f64>,
}

impl RadialTable {
    fn new(c: f64, m: usize) -> Self {
        let theta: Vec<f64> = (0..=RADIAL_NODES).map(|k| PI * k as f64 / RADIAL_NODES as f64).collect();
        // Shifted by e^{−c} so the integrand stays bounded for large c.
        let mut cdf = cumulative(|t| (c * (t.cos() - 1.0)).exp() * t.sin().powi(m as i32 - 1), &theta);
        let total = *cdf.last().unwrap();
        cdf.iter_mut().for_each(|v| *v /= total);
        RadialTable { theta, cdf }
    }

    fn angle(&self, u: f64) -> f64 {
        let k = self.cdf.partition_point(|&v| v < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let s = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.theta[k - 1] + s * (self.theta[k] - self.theta[k - 1])
    }

    fn sample<R: Rng + ?Sized>(&self, pole: &Point, rng: &mut R) -> Result<Point> {
        let theta = self.angle(rng.random::<f64>());
        let x0 = pole.coords();
        let dir = loop {
            let mut g: Vec<f64> = (0..x0.len()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let a = dot(&g, x0);
            g.iter_mut().zip(x0).for_each(|(gi, xi)| *gi -= a * xi);
            let nrm = dot(&g, &g).sqrt();
            if nrm > 1e-8 {
                g.iter_mut().for_each(|gi| *gi /= nrm);
                break g;
            }
        };
        let (s, c) = theta.sin_cos();
        Point::project(pole.kind(), x0.iter().zip(&dir).map(|(x, d)| c * x + s * d).collect())
    }
}

/// Von Mises draw by rejection from a wrapped Cauchy envelope.
fn von_mises<R: Rng + ?Sized>(mode: f64, c: f64, rng: &mut R) -> f64 {
    if c < 1e-8 {
        return wrap_angle(PI * (2.0 * rng.random::<f64>() - 1.0));
    }
    let tau = 1.0 + (1.0 + 4.0 * c * c).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * c);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let w = c * (r - f);
        if w * (2.0 - w) - u2 > 0.0 || (w / u2).ln() + 1.0 - w >= 0.0 {
            let theta = f.clamp(-1.0, 1.0).acos();
            return wrap_angle(mode + if u3 < 0.5 { -theta } else { theta });
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffusionConfig {
    pub step: f64,
    /// Overrides the potential's certified κ.
    pub kappa: Option<f64>,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        DiffusionConfig {
            step: SdeConfig::DEFAULT_STEP,
            kappa: None,
        }
    }
}

/// `n` states of one chain started at the potential's centre, after a
/// burn-in of `20/κ` and spaced `2/κ` apart.
pub fn sample_diffusion<R: Rng + ?Sized>(p: &Potential, n: usize, cfg: &DiffusionConfig, rng: &mut R) -> Result<SampleSet> {
    let kappa = cfg
        .kappa
        .or(p.a1_certificate().kappa)
        .ok_or_else(|| Error::MissingKappa("thinning needs a curvature constant".into()))?;
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::MissingKappa(format!("kappa must be positive, got {kappa}")));
    }
    if n == 0 {
        return invalid("n must be positive");
    }
    SdeConfig::new(cfg.step, 1.0, 0).validate()?;
    let burn = (20.0 / kappa / cfg.step).round() as usize;
    let thin = ((2.0 / kappa / cfg.step).round() as usize).max(1);
    let mut points = Vec::with_capacity(n);
    run_chain(&p.center(), p, cfg.step, burn + thin * n, rng, |k, x| {
        if k > burn && (k - burn) % thin == 0 {
            points.push(x.clone());
        }
    })?;
    SampleSet::new(p.kind(), points, Provenance::DiffusionThinned)
}

/// Euclidean points of a matrix with one sample per row, for tests and
/// external data.
pub fn euclidean_samples(rows: &DMatrix<f64>) -> Result<SampleSet> {
    let m = rows.ncols();
    let pts = (0..rows.nrows())
        .map(|i| Point::euclidean(rows.row(i).iter().copied().collect()))
        .collect::<Result<_>>()?;
    SampleSet::new(ManifoldKind::Euclidean(m), pts, Provenance::External)
}
