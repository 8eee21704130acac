//! Test functions `h` with declared Lipschitz constants, and the built-in
//! registry of functions whose constants are all at most one.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::geometry::{distance, dot, random_point, ManifoldKind, Point};

type Callable = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// A real function on a manifold with optional bounds `C0, C1, C2` on the
/// sup-norms of its first three covariant derivatives.
#[derive(Clone)]
pub struct TestFunction {
    id: String,
    f: Callable,
    constants: [Option<f64>; 3],
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("id", &self.id)
            .field("constants", &self.constants)
            .finish()
    }
}

impl TestFunction {
    pub fn new<F>(id: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Point) -> f64 + Send + Sync + 'static,
    {
        TestFunction {
            id: id.into(),
            f: Arc::new(f),
            constants: [None; 3],
        }
    }

    pub fn with_constants(mut self, c0: f64, c1: f64, c2: f64) -> Self {
        self.constants = [Some(c0), Some(c1), Some(c2)];
        self
    }

    pub fn constant(value: f64) -> Self {
        TestFunction::new(format!("const({value})"), move |_| value).with_constants(0.0, 0.0, 0.0)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn eval(&self, x: &Point) -> f64 {
        (self.f)(x)
    }

    pub fn c0(&self) -> Option<f64> {
        self.constants[0]
    }

    pub fn c1(&self) -> Option<f64> {
        self.constants[1]
    }

    pub fn c2(&self) -> Option<f64> {
        self.constants[2]
    }

    /// `a·h₁ + b·h₂`, with constants added through the triangle inequality.
    pub fn linear_combination(a: f64, h1: &TestFunction, b: f64, h2: &TestFunction) -> Self {
        let (f1, f2) = (h1.f.clone(), h2.f.clone());
        let mut constants = [None; 3];
        for (i, c) in constants.iter_mut().enumerate() {
            if let (Some(x), Some(y)) = (h1.constants[i], h2.constants[i]) {
                *c = Some(a.abs() * x + b.abs() * y);
            }
        }
        TestFunction {
            id: format!("{a}*{}+{b}*{}", h1.id, h2.id),
            f: Arc::new(move |x| a * f1(x) + b * f2(x)),
            constants,
        }
    }

    pub fn scaled(&self, a: f64) -> Self {
        TestFunction::linear_combination(a, self, 0.0, &TestFunction::constant(0.0))
    }

    pub fn shifted(&self, s: f64) -> Self {
        let f = self.f.clone();
        TestFunction {
            id: format!("{}+{s}", self.id),
            f: Arc::new(move |x| f(x) + s),
            constants: self.constants,
        }
    }

    /// Checks `|h(x) − h(y)| ≤ C0·ρ(x, y)·(1 + 1e−6)` on random pairs.
    pub fn validate_c0<R: Rng + ?Sized>(&self, kind: ManifoldKind, pairs: usize, rng: &mut R) -> Result<()> {
        let Some(c0) = self.c0() else {
            return invalid(format!("{} declares no C0", self.id));
        };
        for _ in 0..pairs {
            let x = random_point(kind, 1.0, rng)?;
            let y = random_point(kind, 1.0, rng)?;
            let d = distance(&x, &y)?;
            let lhs = (self.eval(&x) - self.eval(&y)).abs();
            if lhs > c0 * d * (1.0 + 1e-6) + 1e-12 {
                return invalid(format!(
                    "{}: |h(x) - h(y)| = {lhs:.6e} exceeds C0·ρ = {:.6e}",
                    self.id,
                    c0 * d
                ));
            }
        }
        Ok(())
    }
}

/// Deterministic unit vectors in `R^n`: the first `min(n, k)` axes, then
/// fixed oblique directions.
fn directions(n: usize, k: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(k);
    for i in 0..n.min(k) {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        out.push(e);
    }
    let mut j = 0;
    while out.len() < k {
        let v: Vec<f64> = (0..n).map(|i| (1.0 + 0.7 * j as f64 + 1.3 * i as f64).cos()).collect();
        let nv = dot(&v, &v).sqrt();
        out.push(v.into_iter().map(|c| c / nv).collect());
        j += 1;
    }
    out
}

/// The twelve functions used as the class `H` for smooth-distance checks.
/// Every function has `C0, C1, C2 ≤ 1`:
///
/// * circle: `cos(θ − 2πj/12)`;
/// * sphere: `⟨p, x⟩` for axes and oblique poles (cosine of the distance to
///   the pole) and bumps `(1 + ⟨p, x⟩)²/8`;
/// * euclidean: coordinates and `sin(⟨w, x⟩ + b)` for unit `w`;
/// * rotations: the nine matrix entries and `tr(P R)/3` for cyclic
///   permutations `P`;
/// * hyperbolic: `1/cosh ρ(o_j, x)` for twelve centres.
pub fn registry(kind: ManifoldKind) -> Vec<TestFunction> {
    match kind {
        ManifoldKind::Circle => (0..12)
            .map(|j| {
                let s = 2.0 * PI * j as f64 / 12.0;
                TestFunction::new(format!("cos_shift{j}"), move |x: &Point| (x.coords()[0] - s).cos())
                    .with_constants(1.0, 1.0, 1.0)
            })
            .collect(),
        ManifoldKind::Sphere(m) => {
            let n = m + 1;
            let axes = n.min(3);
            let poles = directions(n, 12 - 3);
            let mut out: Vec<TestFunction> = poles
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    let id = if k < axes {
                        format!("coord{k}")
                    } else {
                        format!("cos_dist{}", k - axes)
                    };
                    let p = p.clone();
                    TestFunction::new(id, move |x: &Point| dot(&p, x.coords())).with_constants(1.0, 1.0, 1.0)
                })
                .collect();
            for (k, p) in poles.into_iter().skip(axes).take(3).enumerate() {
                out.push(
                    TestFunction::new(format!("bump{k}"), move |x: &Point| {
                        let t = 1.0 + dot(&p, x.coords());
                        t * t / 8.0
                    })
                    .with_constants(0.5, 1.0, 1.0),
                );
            }
            out
        }
        ManifoldKind::Euclidean(m) => {
            let ws = directions(m, 12);
            ws.into_iter()
                .enumerate()
                .map(|(j, w)| {
                    if j < m.min(3) {
                        TestFunction::new(format!("coord{j}"), move |x: &Point| x.coords()[j]).with_constants(1.0, 0.0, 0.0)
                    } else {
                        let b = 0.5 * j as f64;
                        TestFunction::new(format!("sin_proj{j}"), move |x: &Point| (dot(&w, x.coords()) + b).sin())
                            .with_constants(1.0, 1.0, 1.0)
                    }
                })
                .collect()
        }
        ManifoldKind::Rotations(_) => {
            let mut out: Vec<TestFunction> = (0..9)
                .map(|k| {
                    TestFunction::new(format!("entry{}{}", k / 3, k % 3), move |x: &Point| x.coords()[k])
                        .with_constants(1.0, 1.0, 1.0)
                })
                .collect();
            for s in 0..3 {
                // tr(P R) with P e_j = e_{j+s}: Σ_j R[j][(j + s) % 3].
                out.push(
                    TestFunction::new(format!("trace_perm{s}"), move |x: &Point| {
                        (0..3).map(|j| x.coords()[3 * j + (j + s) % 3]).sum::<f64>() / 3.0
                    })
                    .with_constants(1.0, 1.0, 1.0),
                );
            }
            out
        }
        ManifoldKind::Hyperbolic(m) => (0..12)
            .map(|j| {
                let spatial: Vec<f64> = (0..m).map(|i| 0.8 * ((j * (i + 1)) as f64 + 0.3).sin()).collect();
                let o = Point::hyperbolic_from_spatial(&spatial).expect("finite spatial part");
                TestFunction::new(format!("sech_dist{j}"), move |x: &Point| {
                    let c = o.coords();
                    let ip = -c[0] * x.coords()[0] + dot(&c[1..], &x.coords()[1..]);
                    -1.0 / ip
                })
                .with_constants(0.5, 1.0, 1.0)
            })
            .collect(),
    }
}

/// Looks a test function up by name: any registry id for the kind, plus
/// `const`, and on the circle `cos`, `sin`, and on the sphere
/// `sin_dist{k}` (sine of the distance to the registry pole, Lipschitz only).
pub fn named(kind: ManifoldKind, name: &str) -> Result<TestFunction> {
    if name == "const" {
        return Ok(TestFunction::constant(1.0));
    }
    if kind == ManifoldKind::Circle {
        match name {
            "cos" => return Ok(TestFunction::new("cos", |x: &Point| x.coords()[0].cos()).with_constants(1.0, 1.0, 1.0)),
            "sin" => return Ok(TestFunction::new("sin", |x: &Point| x.coords()[0].sin()).with_constants(1.0, 1.0, 1.0)),
            _ => {}
        }
    }
    if let (ManifoldKind::Sphere(m), Some(k)) = (kind, name.strip_prefix("sin_dist")) {
        if let Ok(k) = k.parse::<usize>() {
            let p = directions(m + 1, 12)[k.min(11)].clone();
            return Ok(TestFunction::new(name, move |x: &Point| {
                let t = dot(&p, x.coords()).clamp(-1.0, 1.0);
                (1.0 - t * t).sqrt()
            }));
        }
    }
    registry(kind)
        .into_iter()
        .find(|h| h.id() == name)
        .map_or_else(|| invalid(format!("unknown test function {name:?} on {kind}")), Ok)
}
