//! `SO(3)` with the bi-invariant metric `g(E₁, E₂) = −tr(E₁E₂)/2`.
//!
//! Under this normalisation `|hat(w)|_g = |w|`, so the geodesic distance
//! between two rotations is their relative rotation angle in `[0, π]`.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};

use super::TOL_CUT;
use crate::error::{Error, Result};

pub fn hat(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0)
}

/// Axial vector of the skew part of `e`.
pub fn vee(e: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        0.5 * (e[(2, 1)] - e[(1, 2)]),
        0.5 * (e[(0, 2)] - e[(2, 0)]),
        0.5 * (e[(1, 0)] - e[(0, 1)]),
    )
}

pub(super) fn to_row_major(m: &Matrix3<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub(super) fn from_row_major(c: &[f64]) -> Matrix3<f64> {
    Matrix3::from_row_slice(c)
}

pub(super) fn orthogonality_residual(c: &[f64]) -> f64 {
    let r = from_row_major(c);
    let e = r.transpose() * r - Matrix3::identity();
    e.amax().max((r.determinant() - 1.0).abs())
}

/// Replaces `c` by the polar factor of its matrix, flipping to det +1 if needed.
pub(super) fn orthogonalize(c: &mut [f64]) -> Result<()> {
    let m = from_row_major(c);
    let svd = m.svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Degenerate("SVD failed while orthogonalizing".into())),
    };
    if svd.singular_values.min() <= 0.0 {
        return Err(Error::Degenerate("singular matrix cannot be projected onto SO(3)".into()));
    }
    let mut q = u * vt;
    if q.determinant() < 0.0 {
        let mut u2 = u;
        u2.column_mut(2).neg_mut();
        q = u2 * vt;
    }
    c.copy_from_slice(&to_row_major(&q));
    Ok(())
}

/// Two Newton steps of `R ← (R + R⁻ᵀ)/2`, which converge to the polar factor
/// for matrices already close to orthogonal.
fn reorthogonalize(mut r: Matrix3<f64>) -> Matrix3<f64> {
    for _ in 0..2 {
        match r.try_inverse() {
            Some(inv) => r = 0.5 * (r + inv.transpose()),
            None => break,
        }
    }
    r
}

pub(super) fn tangency_residual(x: &[f64], v: &[f64]) -> f64 {
    let e = from_row_major(x).transpose() * from_row_major(v);
    let sym = e + e.transpose();
    0.5 * sym.amax() / (1.0 + e.amax())
}

pub(super) fn project_tangent(x: &[f64], v: &mut [f64]) {
    let r = from_row_major(x);
    let e = r.transpose() * from_row_major(v);
    let skew = 0.5 * (e - e.transpose());
    v.copy_from_slice(&to_row_major(&(r * skew)));
}

pub(super) fn exp(x: &[f64], v: &[f64]) -> Vec<f64> {
    let r = from_row_major(x);
    let w = vee(&(r.transpose() * from_row_major(v)));
    let step = Rotation3::new(w);
    to_row_major(&reorthogonalize(r * step.matrix()))
}

/// Relative rotation `Rᵀ S` as (angle in `[0, π]`, unit axis). The axis is
/// zero when the angle is zero.
fn relative_angle_axis(x: &[f64], y: &[f64]) -> (f64, Vector3<f64>) {
    let q = from_row_major(x).transpose() * from_row_major(y);
    let quat = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(q));
    let c = quat.as_ref().coords; // (i, j, k, w)
    let (mut w, mut v) = (c[3], Vector3::new(c[0], c[1], c[2]));
    if w < 0.0 {
        w = -w;
        v = -v;
    }
    let s = v.norm();
    let theta = 2.0 * s.atan2(w);
    if s == 0.0 {
        (0.0, Vector3::zeros())
    } else {
        (theta, v / s)
    }
}

pub(super) fn distance(x: &[f64], y: &[f64]) -> f64 {
    relative_angle_axis(x, y).0
}

/// Skew `E` with `exp(E) = Rᵀ S`, or the two competing half-turn candidates.
fn relative_log(x: &[f64], y: &[f64]) -> std::result::Result<Matrix3<f64>, [Matrix3<f64>; 2]> {
    let (theta, axis) = relative_angle_axis(x, y);
    let e = hat(&(axis * theta));
    if theta > std::f64::consts::PI - TOL_CUT {
        return Err([e, -e]);
    }
    Ok(e)
}

pub(super) fn log(x: &[f64], y: &[f64]) -> std::result::Result<Vec<f64>, Vec<Vec<f64>>> {
    let r = from_row_major(x);
    match relative_log(x, y) {
        Ok(e) => Ok(to_row_major(&(r * e))),
        Err(cands) => Err(cands.iter().map(|e| to_row_major(&(r * e))).collect()),
    }
}

/// Along `t ↦ R exp(tE)` the left-trivialised field `W(t) = e^{−tE/2} W e^{tE/2}`
/// is parallel, so the transported ambient vector is `R e^{E/2} W e^{E/2}`.
pub(super) fn transport(
    x: &[f64],
    y: &[f64],
    v: &[f64],
) -> std::result::Result<Vec<f64>, Vec<Vec<f64>>> {
    let r = from_row_major(x);
    let e = match relative_log(x, y) {
        Ok(e) => e,
        Err(cands) => return Err(cands.iter().map(|e| to_row_major(&(r * e))).collect()),
    };
    let half = *Rotation3::new(vee(&e) * 0.5).matrix();
    let w = r.transpose() * from_row_major(v);
    Ok(to_row_major(&(r * half * w * half)))
}

pub(super) fn frame(x: &[f64]) -> Vec<Vec<f64>> {
    let r = from_row_major(x);
    (0..3)
        .map(|i| {
            let mut w = Vector3::zeros();
            w[i] = 1.0;
            to_row_major(&(r * hat(&w)))
        })
        .collect()
}
