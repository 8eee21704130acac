//! Closed-form Riemannian primitives on the supported manifolds.
//!
//! Every manifold is represented in a canonical embedding:
//!
//! | kind            | ambient coordinates                         | metric                      |
//! |-----------------|---------------------------------------------|-----------------------------|
//! | `Euclidean(m)`  | `m` reals                                   | dot product                 |
//! | `Sphere(m)`     | unit vector in `R^{m+1}`                    | induced dot product         |
//! | `Hyperbolic(m)` | upper hyperboloid sheet in Minkowski space  | Minkowski form on tangents  |
//! | `Rotations(3)`  | 3x3 rotation matrix, row-major              | `g(RA, RB) = -tr(AB)/2`     |
//! | `Circle`        | one angle in `(-pi, pi]`                    | `dθ²`                       |
//!
//! Tangent vectors are stored in the same ambient representation. On the
//! rotation group a tangent vector at `R` is the matrix `R E` with `E`
//! skew-symmetric, so the rotation by angle `θ` about a unit axis has
//! geodesic distance `θ` from the identity.

mod hyperbolic;
mod rotations;
mod sphere;

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

pub use rotations::{hat, vee};

/// Tolerance on the manifold constraint of a point (unit norm, hyperboloid
/// sheet, orthogonality), relative to the magnitude of the coordinates.
pub const TOL_POINT: f64 = 1e-9;
/// Tolerance on the tangency residual of a tangent vector.
pub const TOL_TANGENT: f64 = 1e-9;
/// Distance from the cut locus below which the minimal geodesic is treated as
/// non-unique.
pub const TOL_CUT: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ManifoldKind {
    Euclidean(usize),
    /// Unit sphere `S^m` in `R^{m+1}`.
    Sphere(usize),
    /// Hyperbolic space `H^m` of curvature -1, hyperboloid model.
    Hyperbolic(usize),
    /// `SO(n)`; only `n = 3` is supported.
    Rotations(usize),
    Circle,
}

impl ManifoldKind {
    /// Intrinsic dimension.
    pub fn dim(&self) -> usize {
        match *self {
            ManifoldKind::Euclidean(m) | ManifoldKind::Sphere(m) | ManifoldKind::Hyperbolic(m) => m,
            ManifoldKind::Rotations(n) => n * (n - 1) / 2,
            ManifoldKind::Circle => 1,
        }
    }

    /// Number of stored coordinates.
    pub fn ambient_len(&self) -> usize {
        match *self {
            ManifoldKind::Euclidean(m) => m,
            ManifoldKind::Sphere(m) | ManifoldKind::Hyperbolic(m) => m + 1,
            ManifoldKind::Rotations(n) => n * n,
            ManifoldKind::Circle => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ManifoldKind::Euclidean(0) | ManifoldKind::Sphere(0) | ManifoldKind::Hyperbolic(0) => {
                invalid("manifold dimension must be at least 1")
            }
            ManifoldKind::Rotations(n) if n != 3 => Err(Error::Unsupported(format!(
                "rotation group SO({n}); only SO(3) is implemented"
            ))),
            _ => Ok(()),
        }
    }

    pub fn is_compact(&self) -> bool {
        matches!(
            self,
            ManifoldKind::Sphere(_) | ManifoldKind::Rotations(_) | ManifoldKind::Circle
        )
    }

    /// Short lowercase name used in file headers and configs.
    pub fn name(&self) -> &'static str {
        match self {
            ManifoldKind::Euclidean(_) => "euclidean",
            ManifoldKind::Sphere(_) => "sphere",
            ManifoldKind::Hyperbolic(_) => "hyperbolic",
            ManifoldKind::Rotations(_) => "rotations",
            ManifoldKind::Circle => "circle",
        }
    }

    /// Inverse of [`name`](Self::name) together with the dimension parameter
    /// (`m` for Euclidean/sphere/hyperbolic, matrix size for rotations,
    /// ignored for the circle).
    pub fn from_name(name: &str, dim: usize) -> Result<Self> {
        let kind = match name.trim().to_ascii_lowercase().as_str() {
            "euclidean" => ManifoldKind::Euclidean(dim),
            "sphere" => ManifoldKind::Sphere(dim),
            "hyperbolic" => ManifoldKind::Hyperbolic(dim),
            "rotations" | "so" => ManifoldKind::Rotations(dim),
            "circle" => ManifoldKind::Circle,
            other => return Err(Error::Parse(format!("unknown manifold kind `{other}`"))),
        };
        kind.validate()?;
        Ok(kind)
    }

    /// The integer that [`from_name`](Self::from_name) expects back.
    pub fn dim_parameter(&self) -> usize {
        match *self {
            ManifoldKind::Euclidean(m)
            | ManifoldKind::Sphere(m)
            | ManifoldKind::Hyperbolic(m)
            | ManifoldKind::Rotations(m) => m,
            ManifoldKind::Circle => 1,
        }
    }
}

impl fmt::Display for ManifoldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldKind::Circle => write!(f, "circle"),
            k => write!(f, "{}({})", k.name(), k.dim_parameter()),
        }
    }
}

/// A location on a manifold, stored in the canonical embedding of its kind.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    kind: ManifoldKind,
    coords: Vec<f64>,
}

impl Point {
    /// Validated constructor: the coordinates must already satisfy the
    /// manifold constraint within [`TOL_POINT`].
    pub fn new(kind: ManifoldKind, coords: Vec<f64>) -> Result<Self> {
        kind.validate()?;
        if coords.len() != kind.ambient_len() {
            return invalid(format!(
                "{kind} expects {} coordinates, got {}",
                kind.ambient_len(),
                coords.len()
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return invalid("non-finite coordinate");
        }
        if let ManifoldKind::Circle = kind {
            let t = coords[0];
            if !(t > -std::f64::consts::PI && t <= std::f64::consts::PI) {
                return invalid(format!("circle angle {t} outside (-pi, pi]"));
            }
        }
        let p = Point { kind, coords };
        let r = p.constraint_residual();
        if r > TOL_POINT {
            return invalid(format!("coordinates are off {kind} by {r:.3e}"));
        }
        if let ManifoldKind::Hyperbolic(_) = kind {
            if p.coords[0] <= 0.0 {
                return invalid("hyperboloid point must lie on the upper sheet");
            }
        }
        Ok(p)
    }

    /// Maps arbitrary ambient coordinates onto the manifold: normalisation on
    /// the sphere, lifting of the spatial part onto the hyperboloid, polar
    /// factor on the rotation group, wrapping on the circle.
    pub fn project(kind: ManifoldKind, mut coords: Vec<f64>) -> Result<Self> {
        kind.validate()?;
        if coords.len() != kind.ambient_len() {
            return invalid(format!(
                "{kind} expects {} coordinates, got {}",
                kind.ambient_len(),
                coords.len()
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return invalid("non-finite coordinate");
        }
        match kind {
            ManifoldKind::Euclidean(_) => {}
            ManifoldKind::Sphere(_) => {
                let n = norm(&coords);
                if n == 0.0 {
                    return Err(Error::Degenerate("cannot project the zero vector onto the sphere".into()));
                }
                coords.iter_mut().for_each(|c| *c /= n);
            }
            ManifoldKind::Hyperbolic(_) => hyperbolic::lift(&mut coords),
            ManifoldKind::Rotations(_) => rotations::orthogonalize(&mut coords)?,
            ManifoldKind::Circle => coords[0] = wrap_angle(coords[0]),
        }
        Ok(Point { kind, coords })
    }

    pub(crate) fn from_raw(kind: ManifoldKind, coords: Vec<f64>) -> Self {
        Point { kind, coords }
    }

    /// Canonical base point: origin, first basis vector, hyperboloid vertex,
    /// identity matrix, angle zero.
    pub fn origin(kind: ManifoldKind) -> Result<Self> {
        kind.validate()?;
        let mut coords = vec![0.0; kind.ambient_len()];
        match kind {
            ManifoldKind::Euclidean(_) | ManifoldKind::Circle => {}
            ManifoldKind::Sphere(_) | ManifoldKind::Hyperbolic(_) => coords[0] = 1.0,
            ManifoldKind::Rotations(n) => (0..n).for_each(|i| coords[i * n + i] = 1.0),
        }
        Ok(Point { kind, coords })
    }

    pub fn angle(theta: f64) -> Self {
        Point {
            kind: ManifoldKind::Circle,
            coords: vec![wrap_angle(theta)],
        }
    }

    pub fn euclidean(coords: Vec<f64>) -> Result<Self> {
        Point::new(ManifoldKind::Euclidean(coords.len()), coords)
    }

    /// Unit vector of `R^{m+1}` (validated, not normalised).
    pub fn sphere(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return invalid("sphere points need at least 2 coordinates");
        }
        Point::new(ManifoldKind::Sphere(coords.len() - 1), coords)
    }

    /// Hyperboloid point whose spatial coordinates are `spatial`.
    pub fn hyperbolic_from_spatial(spatial: &[f64]) -> Result<Self> {
        let mut coords = Vec::with_capacity(spatial.len() + 1);
        coords.push(0.0);
        coords.extend_from_slice(spatial);
        Point::project(ManifoldKind::Hyperbolic(spatial.len()), coords)
    }

    pub fn rotation(m: &nalgebra::Matrix3<f64>) -> Result<Self> {
        Point::new(ManifoldKind::Rotations(3), rotations::to_row_major(m))
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Rotation matrix of a point on `Rotations(3)`.
    pub fn matrix(&self) -> Result<nalgebra::Matrix3<f64>> {
        match self.kind {
            ManifoldKind::Rotations(3) => Ok(rotations::from_row_major(&self.coords)),
            k => invalid(format!("{k} point has no matrix form")),
        }
    }

    /// Violation of the manifold constraint, scaled by the coordinate
    /// magnitude on the hyperboloid.
    pub fn constraint_residual(&self) -> f64 {
        match self.kind {
            ManifoldKind::Euclidean(_) | ManifoldKind::Circle => 0.0,
            ManifoldKind::Sphere(_) => (norm(&self.coords) - 1.0).abs(),
            ManifoldKind::Hyperbolic(_) => {
                let q = hyperbolic::minkowski(&self.coords, &self.coords);
                (q + 1.0).abs() / (self.coords[0] * self.coords[0]).max(1.0)
            }
            ManifoldKind::Rotations(_) => rotations::orthogonality_residual(&self.coords),
        }
    }

    fn same_location(&self, other: &Point) -> bool {
        self.kind == other.kind
            && self
                .coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()))
    }

    fn check_kind(&self, other: &Point) -> Result<()> {
        if self.kind != other.kind {
            return Err(Error::KindMismatch {
                expected: self.kind,
                found: other.kind,
            });
        }
        Ok(())
    }
}

/// A tangent vector, stored with its base point.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: Point,
    comps: Vec<f64>,
}

impl TangentVector {
    /// Validated constructor: `comps` must be tangent at `base` within
    /// [`TOL_TANGENT`].
    pub fn new(base: Point, comps: Vec<f64>) -> Result<Self> {
        if comps.len() != base.kind.ambient_len() {
            return invalid(format!(
                "tangent vector needs {} components, got {}",
                base.kind.ambient_len(),
                comps.len()
            ));
        }
        let v = TangentVector { base, comps };
        let r = v.tangency_residual();
        if r > TOL_TANGENT {
            return invalid(format!("vector is not tangent (residual {r:.3e})"));
        }
        Ok(v)
    }

    /// Orthogonal projection of an ambient vector onto the tangent space.
    pub fn project(base: Point, mut comps: Vec<f64>) -> Result<Self> {
        if comps.len() != base.kind.ambient_len() {
            return invalid(format!(
                "tangent vector needs {} components, got {}",
                base.kind.ambient_len(),
                comps.len()
            ));
        }
        project_tangent(&base, &mut comps);
        Ok(TangentVector { base, comps })
    }

    pub(crate) fn from_raw(base: Point, comps: Vec<f64>) -> Self {
        TangentVector { base, comps }
    }

    pub fn zero(base: Point) -> Self {
        let n = base.kind.ambient_len();
        TangentVector {
            base,
            comps: vec![0.0; n],
        }
    }

    /// The tangent vector `R E` at a rotation `R` for a skew matrix `E`.
    pub fn from_skew(base: Point, skew: &nalgebra::Matrix3<f64>) -> Result<Self> {
        let r = base.matrix()?;
        let comps = rotations::to_row_major(&(r * skew));
        TangentVector::new(base, comps)
    }

    /// Left-trivialised form `Rᵀ V` on the rotation group.
    pub fn skew(&self) -> Result<nalgebra::Matrix3<f64>> {
        let r = self.base.matrix()?;
        Ok(r.transpose() * rotations::from_row_major(&self.comps))
    }

    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn comps(&self) -> &[f64] {
        &self.comps
    }

    pub fn into_comps(self) -> Vec<f64> {
        self.comps
    }

    pub fn norm(&self) -> f64 {
        metric(&self.base, &self.comps, &self.comps).max(0.0).sqrt()
    }

    pub fn inner(&self, other: &TangentVector) -> Result<f64> {
        if !self.base.same_location(&other.base) {
            return invalid("inner product of vectors at different base points");
        }
        Ok(metric(&self.base, &self.comps, &other.comps))
    }

    pub fn scaled(&self, s: f64) -> TangentVector {
        TangentVector {
            base: self.base.clone(),
            comps: self.comps.iter().map(|c| c * s).collect(),
        }
    }

    /// `self + s * other`; both must share the base point.
    pub fn axpy(&self, s: f64, other: &TangentVector) -> Result<TangentVector> {
        if !self.base.same_location(&other.base) {
            return invalid("adding vectors at different base points");
        }
        Ok(TangentVector {
            base: self.base.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a + s * b)
                .collect(),
        })
    }

    pub fn tangency_residual(&self) -> f64 {
        let x = &self.base.coords;
        let v = &self.comps;
        match self.base.kind {
            ManifoldKind::Euclidean(_) | ManifoldKind::Circle => 0.0,
            ManifoldKind::Sphere(_) => dot(x, v).abs() / (1.0 + norm(v)),
            ManifoldKind::Hyperbolic(_) => {
                hyperbolic::minkowski(x, v).abs() / (1.0 + norm(x) * norm(v))
            }
            ManifoldKind::Rotations(_) => rotations::tangency_residual(x, v),
        }
    }
}

/// Orthonormal basis of a tangent space.
#[derive(Clone, Debug)]
pub struct Frame {
    base: Point,
    basis: Vec<TangentVector>,
}

impl Frame {
    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn basis(&self) -> &[TangentVector] {
        &self.basis
    }

    /// `Σ coeffs[i] e_i`.
    pub fn combine(&self, coeffs: &[f64]) -> TangentVector {
        let mut comps = vec![0.0; self.base.kind.ambient_len()];
        for (c, e) in coeffs.iter().zip(&self.basis) {
            for (out, ei) in comps.iter_mut().zip(&e.comps) {
                *out += c * ei;
            }
        }
        TangentVector {
            base: self.base.clone(),
            comps,
        }
    }

    /// Frame coordinates `⟨v, e_i⟩`.
    pub fn coefficients(&self, v: &TangentVector) -> Vec<f64> {
        self.basis
            .iter()
            .map(|e| metric(&self.base, &e.comps, &v.comps))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvatureConstants {
    /// Lower bound on the Ricci curvature, as a multiple of the metric.
    pub ricci_lb: f64,
    /// May be `f64::INFINITY`.
    pub injectivity_radius: f64,
}

pub fn exp_map(x: &Point, v: &TangentVector) -> Result<Point> {
    if !x.same_location(&v.base) {
        return invalid("tangent vector is not based at the given point");
    }
    let coords = match x.kind {
        ManifoldKind::Euclidean(_) => x.coords.iter().zip(&v.comps).map(|(a, b)| a + b).collect(),
        ManifoldKind::Circle => vec![wrap_angle(x.coords[0] + v.comps[0])],
        ManifoldKind::Sphere(_) => sphere::exp(&x.coords, &v.comps),
        ManifoldKind::Hyperbolic(_) => hyperbolic::exp(&x.coords, &v.comps),
        ManifoldKind::Rotations(_) => rotations::exp(&x.coords, &v.comps),
    };
    Ok(Point::from_raw(x.kind, coords))
}

/// Inverse of the exponential map along the minimal geodesic.
///
/// Returns [`Error::CutLocus`] when `y` is within [`TOL_CUT`] of the cut
/// locus of `x` (antipode on the sphere and circle, half-turn on the rotation
/// group).
pub fn log_map(x: &Point, y: &Point) -> Result<TangentVector> {
    x.check_kind(y)?;
    let comps = match x.kind {
        ManifoldKind::Euclidean(_) => y.coords.iter().zip(&x.coords).map(|(a, b)| a - b).collect(),
        ManifoldKind::Circle => {
            let d = wrap_angle(y.coords[0] - x.coords[0]);
            if d.abs() > std::f64::consts::PI - TOL_CUT {
                let pi = std::f64::consts::PI;
                return Err(Error::CutLocus {
                    candidates: vec![
                        TangentVector::from_raw(x.clone(), vec![-pi]),
                        TangentVector::from_raw(x.clone(), vec![pi]),
                    ],
                });
            }
            vec![d]
        }
        ManifoldKind::Sphere(_) => match sphere::log(&x.coords, &y.coords) {
            Some(v) => v,
            None => return Err(cut_locus(x, sphere::antipodal_candidates(x))),
        },
        ManifoldKind::Hyperbolic(_) => hyperbolic::log(&x.coords, &y.coords),
        ManifoldKind::Rotations(_) => match rotations::log(&x.coords, &y.coords) {
            Ok(v) => v,
            Err(cands) => return Err(cut_locus(x, cands)),
        },
    };
    Ok(TangentVector::from_raw(x.clone(), comps))
}

/// [`log_map`] with deterministic tie-breaking on the cut locus: the
/// candidate with lexicographically smallest ambient components wins.
pub fn log_map_tiebreak(x: &Point, y: &Point) -> Result<TangentVector> {
    match log_map(x, y) {
        Err(Error::CutLocus { mut candidates }) => Ok(candidates.swap_remove(0)),
        other => other,
    }
}

fn cut_locus(x: &Point, comps: Vec<Vec<f64>>) -> Error {
    let mut candidates: Vec<TangentVector> = comps
        .into_iter()
        .map(|c| TangentVector::from_raw(x.clone(), c))
        .collect();
    candidates.sort_by(|a, b| lexicographic(&a.comps, &b.comps));
    Error::CutLocus { candidates }
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

pub fn distance(x: &Point, y: &Point) -> Result<f64> {
    x.check_kind(y)?;
    Ok(match x.kind {
        ManifoldKind::Euclidean(_) => {
            x.coords
                .iter()
                .zip(&y.coords)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        }
        ManifoldKind::Circle => wrap_angle(y.coords[0] - x.coords[0]).abs(),
        ManifoldKind::Sphere(_) => sphere::distance(&x.coords, &y.coords),
        ManifoldKind::Hyperbolic(_) => hyperbolic::distance(&x.coords, &y.coords),
        ManifoldKind::Rotations(_) => rotations::distance(&x.coords, &y.coords),
    })
}

/// Parallel transport of `v ∈ T_x` to `T_y` along the minimal geodesic.
pub fn parallel_transport(x: &Point, y: &Point, v: &TangentVector) -> Result<TangentVector> {
    x.check_kind(y)?;
    if !x.same_location(&v.base) {
        return invalid("tangent vector is not based at the transport origin");
    }
    let mut comps = match x.kind {
        ManifoldKind::Euclidean(_) | ManifoldKind::Circle => {
            if let ManifoldKind::Circle = x.kind {
                // Uniqueness of the connecting geodesic is still required.
                log_map(x, y)?;
            }
            v.comps.clone()
        }
        ManifoldKind::Sphere(_) => match sphere::transport(&x.coords, &y.coords, &v.comps) {
            Some(c) => c,
            None => return Err(cut_locus(x, sphere::antipodal_candidates(x))),
        },
        ManifoldKind::Hyperbolic(_) => hyperbolic::transport(&x.coords, &y.coords, &v.comps),
        ManifoldKind::Rotations(_) => match rotations::transport(&x.coords, &y.coords, &v.comps) {
            Ok(c) => c,
            Err(cands) => return Err(cut_locus(x, cands)),
        },
    };
    project_tangent(y, &mut comps);
    Ok(TangentVector::from_raw(y.clone(), comps))
}

/// Deterministic orthonormal frame: Gram–Schmidt on a fixed ambient basis.
///
/// On the sphere the ambient axis with the largest `|x_i|` is dropped (ties
/// go to the lowest index); on the hyperboloid the spatial axes are
/// transported from the vertex; on the rotation group the frame is the
/// left-translated basis `R·hat(e_i)`.
pub fn orthonormal_frame(x: &Point) -> Frame {
    let basis: Vec<Vec<f64>> = match x.kind {
        ManifoldKind::Euclidean(m) => (0..m).map(|i| unit(m, i)).collect(),
        ManifoldKind::Circle => vec![vec![1.0]],
        ManifoldKind::Sphere(_) => sphere::frame(&x.coords),
        ManifoldKind::Hyperbolic(_) => hyperbolic::frame(&x.coords),
        ManifoldKind::Rotations(_) => rotations::frame(&x.coords),
    };
    Frame {
        base: x.clone(),
        basis: basis
            .into_iter()
            .map(|c| TangentVector::from_raw(x.clone(), c))
            .collect(),
    }
}

pub fn curvature_constants(kind: ManifoldKind) -> Result<CurvatureConstants> {
    kind.validate()?;
    let m = kind.dim() as f64;
    Ok(match kind {
        ManifoldKind::Euclidean(_) => CurvatureConstants {
            ricci_lb: 0.0,
            injectivity_radius: f64::INFINITY,
        },
        ManifoldKind::Circle => CurvatureConstants {
            ricci_lb: 0.0,
            injectivity_radius: std::f64::consts::PI,
        },
        ManifoldKind::Sphere(_) => CurvatureConstants {
            ricci_lb: m - 1.0,
            injectivity_radius: std::f64::consts::PI,
        },
        ManifoldKind::Hyperbolic(_) => CurvatureConstants {
            ricci_lb: -(m - 1.0),
            injectivity_radius: f64::INFINITY,
        },
        ManifoldKind::Rotations(n) => CurvatureConstants {
            ricci_lb: (n as f64 - 2.0) / 2.0,
            injectivity_radius: std::f64::consts::PI,
        },
    })
}

/// Standard Gaussian vector of the tangent space: `Σ ξ_i e_i` in the
/// deterministic frame, `ξ_i` i.i.d. standard normal.
pub fn gaussian_tangent<R: Rng + ?Sized>(x: &Point, rng: &mut R) -> TangentVector {
    let frame = orthonormal_frame(x);
    let xi: Vec<f64> = (0..frame.basis.len())
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    frame.combine(&xi)
}

/// Random point for tests and initialisation: uniform on the sphere, circle
/// and rotation group (Haar, via the polar factor of a Gaussian matrix), and
/// a Gaussian with standard deviation `scale` in the flat or hyperboloid
/// spatial coordinates otherwise.
pub fn random_point<R: Rng + ?Sized>(kind: ManifoldKind, scale: f64, rng: &mut R) -> Result<Point> {
    kind.validate()?;
    let mut g = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect() };
    match kind {
        ManifoldKind::Euclidean(m) => Ok(Point::from_raw(kind, g(m).into_iter().map(|v| scale * v).collect())),
        ManifoldKind::Hyperbolic(m) => {
            let spatial: Vec<f64> = g(m).into_iter().map(|v| scale * v).collect();
            Point::hyperbolic_from_spatial(&spatial)
        }
        ManifoldKind::Sphere(m) => loop {
            let v = g(m + 1);
            if norm(&v) > 1e-8 {
                return Point::project(kind, v);
            }
        },
        ManifoldKind::Rotations(_) => Point::project(kind, g(9)),
        ManifoldKind::Circle => {
            let u: f64 = rng.random::<f64>();
            Ok(Point::from_raw(kind, vec![wrap_angle(std::f64::consts::PI * (2.0 * u - 1.0))]))
        }
    }
}

/// Riemannian inner product of two ambient tangent representations at `x`.
pub(crate) fn metric(x: &Point, u: &[f64], v: &[f64]) -> f64 {
    match x.kind {
        ManifoldKind::Hyperbolic(_) => hyperbolic::minkowski(u, v),
        ManifoldKind::Rotations(_) => 0.5 * dot(u, v),
        _ => dot(u, v),
    }
}

pub(crate) fn project_tangent(x: &Point, v: &mut [f64]) {
    match x.kind {
        ManifoldKind::Euclidean(_) | ManifoldKind::Circle => {}
        ManifoldKind::Sphere(_) => {
            let a = dot(&x.coords, v);
            v.iter_mut().zip(&x.coords).for_each(|(vi, xi)| *vi -= a * xi);
        }
        ManifoldKind::Hyperbolic(_) => {
            let a = hyperbolic::minkowski(&x.coords, v);
            v.iter_mut().zip(&x.coords).for_each(|(vi, xi)| *vi += a * xi);
        }
        ManifoldKind::Rotations(_) => rotations::project_tangent(&x.coords, v),
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = theta.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r - two_pi
    } else {
        r
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// `sin(t)/t` with the removable singularity filled in.
pub(crate) fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-5 {
        1.0 - t * t / 6.0 + t.powi(4) / 120.0
    } else {
        t.sin() / t
    }
}

/// `sinh(t)/t`.
pub(crate) fn sinhc(t: f64) -> f64 {
    if t.abs() < 1e-5 {
        1.0 + t * t / 6.0 + t.powi(4) / 120.0
    } else {
        t.sinh() / t
    }
}
