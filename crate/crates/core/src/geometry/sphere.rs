//! Unit sphere `S^m ⊂ R^{m+1}`.

use super::{dot, norm, sinc, TOL_CUT};

pub(super) fn exp(x: &[f64], v: &[f64]) -> Vec<f64> {
    let t = norm(v);
    let (c, s) = (t.cos(), sinc(t));
    let mut y: Vec<f64> = x.iter().zip(v).map(|(xi, vi)| c * xi + s * vi).collect();
    let n = norm(&y);
    y.iter_mut().for_each(|yi| *yi /= n);
    y
}

/// Minimal-geodesic log, or `None` within `TOL_CUT` of the antipode.
pub(super) fn log(x: &[f64], y: &[f64]) -> Option<Vec<f64>> {
    let c = dot(x, y);
    let perp: Vec<f64> = y.iter().zip(x).map(|(yi, xi)| yi - c * xi).collect();
    let s = norm(&perp);
    let theta = s.atan2(c);
    if theta > std::f64::consts::PI - TOL_CUT {
        return None;
    }
    if s == 0.0 {
        return Some(vec![0.0; x.len()]);
    }
    let k = theta / s;
    Some(perp.into_iter().map(|p| k * p).collect())
}

pub(super) fn distance(x: &[f64], y: &[f64]) -> f64 {
    // sin ρ = |x − y||x + y|/2, symmetric in x and y and exact at x = y.
    let c = dot(x, y);
    let (mut d2, mut s2) = (0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        d2 += (xi - yi) * (xi - yi);
        s2 += (xi + yi) * (xi + yi);
    }
    (0.5 * (d2 * s2).sqrt()).atan2(c)
}

/// Transport along the minimal geodesic:
/// `v − ⟨y, v⟩ / (1 + ⟨x, y⟩) · (x + y)`.
pub(super) fn transport(x: &[f64], y: &[f64], v: &[f64]) -> Option<Vec<f64>> {
    if distance(x, y) > std::f64::consts::PI - TOL_CUT {
        return None;
    }
    let k = dot(y, v) / (1.0 + dot(x, y));
    Some(
        v.iter()
            .zip(x.iter().zip(y))
            .map(|(vi, (xi, yi))| vi - k * (xi + yi))
            .collect(),
    )
}

/// Initial velocities of length π in the directions ±e_i of the frame at `x`.
pub(super) fn antipodal_candidates(x: &super::Point) -> Vec<Vec<f64>> {
    let pi = std::f64::consts::PI;
    frame(x.coords())
        .into_iter()
        .flat_map(|e| {
            let plus: Vec<f64> = e.iter().map(|c| pi * c).collect();
            let minus: Vec<f64> = e.iter().map(|c| -pi * c).collect();
            [plus, minus]
        })
        .collect()
}

pub(super) fn frame(x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut pivot = 0;
    for i in 1..n {
        if x[i].abs() > x[pivot].abs() {
            pivot = i;
        }
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n - 1);
    for j in (0..n).filter(|&j| j != pivot) {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        // Project out x and the vectors already accepted (modified Gram–Schmidt).
        let a = x[j];
        e.iter_mut().zip(x).for_each(|(ei, xi)| *ei -= a * xi);
        for b in &basis {
            let p = dot(&e, b);
            e.iter_mut().zip(b).for_each(|(ei, bi)| *ei -= p * bi);
        }
        let nn = norm(&e);
        e.iter_mut().for_each(|ei| *ei /= nn);
        basis.push(e);
    }
    basis
}
