//! Hyperboloid model `{x : ⟨x, x⟩_L = −1, x₀ > 0}` of `H^m`.

use super::sinhc;

/// Minkowski form `−a₀b₀ + Σ aᵢbᵢ`.
pub(crate) fn minkowski(a: &[f64], b: &[f64]) -> f64 {
    -a[0] * b[0] + a[1..].iter().zip(&b[1..]).map(|(x, y)| x * y).sum::<f64>()
}

/// Recomputes `x₀` from the spatial part.
pub(super) fn lift(x: &mut [f64]) {
    let s: f64 = x[1..].iter().map(|c| c * c).sum();
    x[0] = (1.0 + s).sqrt();
}

pub(super) fn exp(x: &[f64], v: &[f64]) -> Vec<f64> {
    let t = minkowski(v, v).max(0.0).sqrt();
    let (c, s) = (t.cosh(), sinhc(t));
    let mut y: Vec<f64> = x.iter().zip(v).map(|(xi, vi)| c * xi + s * vi).collect();
    lift(&mut y);
    y
}

/// Tangential part `u = y + ⟨x, y⟩_L x` of `y` at `x`, its norm `sinh ρ`, and ρ.
fn radial(x: &[f64], y: &[f64]) -> (Vec<f64>, f64, f64) {
    let ip = minkowski(x, y);
    let u: Vec<f64> = y.iter().zip(x).map(|(yi, xi)| yi + ip * xi).collect();
    let n = minkowski(&u, &u).max(0.0).sqrt();
    let rho = if n < 1.0 {
        n.asinh()
    } else {
        (-ip).max(1.0).acosh()
    };
    (u, n, rho)
}

pub(super) fn log(x: &[f64], y: &[f64]) -> Vec<f64> {
    let (u, n, rho) = radial(x, y);
    if n == 0.0 {
        return vec![0.0; x.len()];
    }
    let k = rho / n;
    u.into_iter().map(|c| k * c).collect()
}

pub(super) fn distance(x: &[f64], y: &[f64]) -> f64 {
    radial(x, y).2
}

/// `v + ⟨y, v⟩_L / (1 − ⟨x, y⟩_L) · (x + y)`.
pub(super) fn transport(x: &[f64], y: &[f64], v: &[f64]) -> Vec<f64> {
    let k = minkowski(y, v) / (1.0 - minkowski(x, y));
    v.iter()
        .zip(x.iter().zip(y))
        .map(|(vi, (xi, yi))| vi + k * (xi + yi))
        .collect()
}

/// Frame at `x` obtained by transporting the spatial axes from the vertex
/// `o = (1, 0, …, 0)`: `e_j + x_j/(1 + x₀)·(o + x)`. Orthonormal by
/// construction and well conditioned far from the vertex.
pub(super) fn frame(x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    (1..n)
        .map(|j| {
            let k = x[j] / (1.0 + x[0]);
            let mut e: Vec<f64> = x.iter().map(|xi| k * xi).collect();
            e[0] += k;
            e[j] += 1.0;
            e
        })
        .collect()
}
