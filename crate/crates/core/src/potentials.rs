//! Potentials `φ` with invariant density `∝ e^{−φ}` and their curvature data.

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::geometry::{
    curvature_constants, distance, dot, log_map, project_tangent, ManifoldKind, Point, TangentVector,
};
use crate::quadrature::simpson;

/// Quadrature intervals used for integrals over the circle.
pub const CIRCLE_GRID: usize = 4096;

#[derive(Clone, Debug)]
pub enum Potential {
    /// `φ(x) = −c⟨x₀, x⟩ = −c cos ρ(x₀, x)` on a sphere.
    VmfSphere { pole: Point, c: f64 },
    /// `φ(x) = c ρ(o, x)²` on hyperbolic space.
    SqDistHyperbolic { center: Point, c: f64 },
    /// `φ(S) = −c tr(S₀S)` on SO(3).
    VmfRotations { s0: Point, c: f64 },
    /// `φ(x) = ½(x − μ)ᵀA(x − μ)`.
    GaussianEuclidean { mean: Point, a: DMatrix<f64> },
    /// `φ(θ) = −c cos(θ − θ₀)`.
    VonMisesCircle { mode: f64, c: f64 },
    /// `φ(x) = −c₁⟨x₁, x⟩ − c₂⟨x₂, x⟩²` on a sphere, `x₁ ⊥ x₂`.
    FisherWatsonSphere { x1: Point, x2: Point, c1: f64, c2: f64 },
    /// `φ ≡ 0` on a compact kind (sphere, circle, SO(3)).
    Uniform(ManifoldKind),
}

#[derive(Clone, Debug, PartialEq)]
pub struct A1Certificate {
    /// `(ricci_lb + hess_lb)/2` when positive.
    pub kappa: Option<f64>,
    pub ricci_lb: f64,
    /// `−∞` when no Hessian bound is known.
    pub hess_lb: f64,
    /// Why `kappa` is absent.
    pub reason: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Sharp or rigorously derived.
    Exact,
    /// Valid but not sharp, or only partially justified.
    Conservative,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipschitzConstants {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub provenance: Provenance,
}

impl Potential {
    pub fn vmf_sphere(pole: Point, c: f64) -> Result<Self> {
        let p = Potential::VmfSphere { pole, c };
        p.validate()?;
        Ok(p)
    }

    pub fn sq_dist_hyperbolic(center: Point, c: f64) -> Result<Self> {
        let p = Potential::SqDistHyperbolic { center, c };
        p.validate()?;
        Ok(p)
    }

    pub fn vmf_rotations(s0: Point, c: f64) -> Result<Self> {
        let p = Potential::VmfRotations { s0, c };
        p.validate()?;
        Ok(p)
    }

    pub fn gaussian(mean: Point, a: DMatrix<f64>) -> Result<Self> {
        let p = Potential::GaussianEuclidean { mean, a };
        p.validate()?;
        Ok(p)
    }

    pub fn von_mises(mode: f64, c: f64) -> Result<Self> {
        let p = Potential::VonMisesCircle { mode, c };
        p.validate()?;
        Ok(p)
    }

    pub fn fisher_watson(x1: Point, x2: Point, c1: f64, c2: f64) -> Result<Self> {
        let p = Potential::FisherWatsonSphere { x1, x2, c1, c2 };
        p.validate()?;
        Ok(p)
    }

    pub fn uniform(kind: ManifoldKind) -> Result<Self> {
        let p = Potential::Uniform(kind);
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, c: f64| {
            if c > 0.0 && c.is_finite() {
                Ok(())
            } else {
                invalid(format!("{name} must be positive and finite, got {c}"))
            }
        };
        match self {
            Potential::VmfSphere { pole, c } => {
                expect_kind(pole, "sphere")?;
                positive("concentration", *c)
            }
            Potential::SqDistHyperbolic { center, c } => {
                expect_kind(center, "hyperbolic")?;
                positive("c", *c)
            }
            Potential::VmfRotations { s0, c } => {
                expect_kind(s0, "rotations")?;
                positive("c", *c)
            }
            Potential::GaussianEuclidean { mean, a } => {
                expect_kind(mean, "euclidean")?;
                let m = mean.kind().dim();
                if a.nrows() != m || a.ncols() != m {
                    return invalid(format!("precision matrix must be {m}x{m}"));
                }
                if (a - a.transpose()).amax() > 1e-12 {
                    return invalid("precision matrix is not symmetric");
                }
                if min_eigenvalue(a) <= 0.0 {
                    return invalid("precision matrix is not positive definite");
                }
                Ok(())
            }
            Potential::VonMisesCircle { mode, c } => {
                if !mode.is_finite() {
                    return invalid("mode must be finite");
                }
                positive("concentration", *c)
            }
            Potential::FisherWatsonSphere { x1, x2, c1, c2 } => {
                expect_kind(x1, "sphere")?;
                if x1.kind() != x2.kind() {
                    return invalid("Fisher-Watson poles live on different spheres");
                }
                if dot(x1.coords(), x2.coords()).abs() > 1e-9 {
                    return invalid("Fisher-Watson poles must be orthogonal");
                }
                positive("c1", *c1)?;
                positive("c2", *c2)
            }
            Potential::Uniform(kind) => match kind {
                ManifoldKind::Sphere(_) | ManifoldKind::Circle | ManifoldKind::Rotations(3) => Ok(()),
                k => invalid(format!("no uniform probability measure on {k}")),
            },
        }
    }

    pub fn kind(&self) -> ManifoldKind {
        match self {
            Potential::VmfSphere { pole, .. } => pole.kind(),
            Potential::SqDistHyperbolic { center, .. } => center.kind(),
            Potential::VmfRotations { s0, .. } => s0.kind(),
            Potential::GaussianEuclidean { mean, .. } => mean.kind(),
            Potential::VonMisesCircle { .. } => ManifoldKind::Circle,
            Potential::FisherWatsonSphere { x1, .. } => x1.kind(),
            Potential::Uniform(kind) => *kind,
        }
    }

    /// A natural starting point: the mode of the density, or the canonical
    /// origin for uniform laws. For `VmfRotations` this is `S₀ᵀ`.
    pub fn center(&self) -> Point {
        match self {
            Potential::VmfSphere { pole, .. } => pole.clone(),
            Potential::SqDistHyperbolic { center, .. } => center.clone(),
            Potential::VmfRotations { s0, .. } => {
                let m = s0.matrix().expect("rotation point");
                Point::rotation(&m.transpose()).expect("transpose of a rotation")
            }
            Potential::GaussianEuclidean { mean, .. } => mean.clone(),
            Potential::VonMisesCircle { mode, .. } => Point::angle(*mode),
            Potential::FisherWatsonSphere { x1, .. } => x1.clone(),
            Potential::Uniform(kind) => Point::origin(*kind).expect("validated kind"),
        }
    }

    fn check(&self, x: &Point) -> Result<()> {
        if x.kind() != self.kind() {
            return Err(Error::KindMismatch {
                expected: self.kind(),
                found: x.kind(),
            });
        }
        Ok(())
    }

    pub fn value(&self, x: &Point) -> Result<f64> {
        self.check(x)?;
        Ok(match self {
            Potential::VmfSphere { pole, c } => -c * dot(pole.coords(), x.coords()),
            Potential::SqDistHyperbolic { center, c } => c * distance(center, x)?.powi(2),
            Potential::VmfRotations { s0, c } => -c * (s0.matrix()? * x.matrix()?).trace(),
            Potential::GaussianEuclidean { mean, a } => {
                let d = diff(x, mean);
                0.5 * d.dot(&(a * &d))
            }
            Potential::VonMisesCircle { mode, c } => -c * (x.coords()[0] - mode).cos(),
            Potential::FisherWatsonSphere { x1, x2, c1, c2 } => {
                let t = dot(x2.coords(), x.coords());
                -c1 * dot(x1.coords(), x.coords()) - c2 * t * t
            }
            Potential::Uniform(_) => 0.0,
        })
    }

    /// Riemannian gradient at `x`.
    pub fn gradient(&self, x: &Point) -> Result<TangentVector> {
        self.check(x)?;
        let comps = match self {
            Potential::VmfSphere { pole, c } => ambient_sphere_gradient(x, pole.coords().iter().map(|p| -c * p).collect()),
            Potential::SqDistHyperbolic { center, c } => {
                log_map(x, center)?.scaled(-2.0 * c).into_comps()
            }
            Potential::VmfRotations { s0, c } => {
                let s = x.matrix()?;
                let m = s0.matrix()? * s;
                let e: Matrix3<f64> = *c * (m - m.transpose());
                return TangentVector::from_skew(x.clone(), &e);
            }
            Potential::GaussianEuclidean { mean, a } => (a * diff(x, mean)).iter().copied().collect(),
            Potential::VonMisesCircle { mode, c } => vec![c * (x.coords()[0] - mode).sin()],
            Potential::FisherWatsonSphere { x1, x2, c1, c2 } => {
                let t = dot(x2.coords(), x.coords());
                let g = x1
                    .coords()
                    .iter()
                    .zip(x2.coords())
                    .map(|(a, b)| -c1 * a - 2.0 * c2 * t * b)
                    .collect();
                ambient_sphere_gradient(x, g)
            }
            Potential::Uniform(kind) => vec![0.0; kind.ambient_len()],
        };
        TangentVector::new(x.clone(), comps)
    }

    pub fn a1_certificate(&self) -> A1Certificate {
        let kind = self.kind();
        let ricci_lb = curvature_constants(kind).map(|c| c.ricci_lb).unwrap_or(f64::NAN);
        let hess_lb = match self {
            Potential::VmfSphere { c, .. } => -c,
            Potential::SqDistHyperbolic { c, .. } => 2.0 * c,
            Potential::VmfRotations { c, .. } => -c,
            Potential::GaussianEuclidean { a, .. } => min_eigenvalue(a),
            Potential::VonMisesCircle { c, .. } => -c,
            Potential::Uniform(_) => 0.0,
            Potential::FisherWatsonSphere { .. } => {
                return A1Certificate {
                    kappa: None,
                    ricci_lb,
                    hess_lb: f64::NEG_INFINITY,
                    reason: Some("no Hessian lower bound is available for the squared cosine term; supply kappa".into()),
                }
            }
        };
        let k = 0.5 * (ricci_lb + hess_lb);
        if k > 0.0 {
            A1Certificate {
                kappa: Some(k),
                ricci_lb,
                hess_lb,
                reason: None,
            }
        } else {
            A1Certificate {
                kappa: None,
                ricci_lb,
                hess_lb,
                reason: Some(format!("Ric + Hess φ ≥ {:.6} g is not positive", 2.0 * k)),
            }
        }
    }

    /// Bounds on the sup-norms of `∇φ`, `D²φ`, `D³φ`.
    pub fn lipschitz_constants(&self) -> LipschitzConstants {
        let lc = |c0, c1, c2, provenance| LipschitzConstants { c0, c1, c2, provenance };
        match self {
            Potential::VmfSphere { c, .. } | Potential::VonMisesCircle { c, .. } => lc(*c, *c, *c, Provenance::Exact),
            Potential::GaussianEuclidean { a, .. } => {
                let op = SymmetricEigen::new(a.clone()).eigenvalues.amax();
                lc(f64::INFINITY, op, 0.0, Provenance::Exact)
            }
            Potential::SqDistHyperbolic { .. } => {
                lc(f64::INFINITY, f64::INFINITY, f64::INFINITY, Provenance::Exact)
            }
            Potential::VmfRotations { c, .. } => lc(2.0 * c, 2.0 * c, 2.0 * c, Provenance::Conservative),
            Potential::FisherWatsonSphere { c1, c2, .. } => lc(c1 + c2, c1 + 2.0 * c2, c1 + 4.0 * c2, Provenance::Conservative),
            Potential::Uniform(_) => lc(0.0, 0.0, 0.0, Provenance::Exact),
        }
    }
}

fn expect_kind(p: &Point, name: &str) -> Result<()> {
    if p.kind().name() == name {
        Ok(())
    } else {
        invalid(format!("expected a {name} point, got {}", p.kind()))
    }
}

fn diff(x: &Point, y: &Point) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_iterator(
        x.coords().len(),
        x.coords().iter().zip(y.coords()).map(|(a, b)| a - b),
    )
}

fn ambient_sphere_gradient(x: &Point, mut g: Vec<f64>) -> Vec<f64> {
    project_tangent(x, &mut g);
    g
}

fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(a.clone()).eigenvalues.min()
}

/// `c(φ) = ∫_{−π}^{π} e^{−φ(θ)} dθ` for a potential on the circle.
pub fn circle_normalizer(p: &Potential) -> Result<f64> {
    if p.kind() != ManifoldKind::Circle {
        return invalid("circle_normalizer needs a potential on the circle");
    }
    let pi = std::f64::consts::PI;
    let v = simpson(
        |t| (-p.value(&Point::angle(crate::geometry::wrap_angle(t))).unwrap_or(f64::NAN)).exp(),
        -pi,
        pi,
        CIRCLE_GRID,
    );
    Ok(v)
}

/// `E h(X)` for `X ∼ e^{−φ}/c(φ)` on the circle.
pub fn circle_expectation<F: Fn(f64) -> f64>(p: &Potential, h: F) -> Result<f64> {
    let z = circle_normalizer(p)?;
    let pi = std::f64::consts::PI;
    let v = simpson(
        |t| {
            let x = Point::angle(crate::geometry::wrap_angle(t));
            h(x.coords()[0]) * (-p.value(&x).unwrap_or(f64::NAN)).exp()
        },
        -pi,
        pi,
        CIRCLE_GRID,
    );
    Ok(v / z)
}
