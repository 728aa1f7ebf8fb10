//! Unit sphere `S^{d-1}` with the round metric (sectional curvature 1).

use nalgebra::DVector;

use super::sinc;
use crate::error::{Error, Result};

const POINT_TOL: f64 = 1e-10;
const TANGENT_TOL: f64 = 1e-10;
const ANTIPODAL_TOL: f64 = 1e-12;

pub fn check_point(x: &DVector<f64>) -> Result<()> {
    let norm = x.norm();
    if (norm - 1.0).abs() > POINT_TOL {
        return Err(Error::InvalidPoint(format!("sphere: |x| = {norm}, expected 1")));
    }
    Ok(())
}

pub fn check_tangent(x: &DVector<f64>, v: &DVector<f64>) -> Result<()> {
    let dot = x.dot(v);
    if dot.abs() > TANGENT_TOL * (1.0 + v.norm()) {
        return Err(Error::InvalidTangent(format!("sphere: <x, v> = {dot}, expected 0")));
    }
    Ok(())
}

pub fn project_point(x: DVector<f64>) -> DVector<f64> {
    let norm = x.norm();
    if norm == 0.0 {
        // Degenerate input; pick a deterministic pole.
        let mut e = DVector::zeros(x.len());
        e[0] = 1.0;
        return e;
    }
    x / norm
}

pub fn project_tangent(x: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
    w - x * x.dot(w)
}

pub fn exp(x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let theta = v.norm();
    x * theta.cos() + v * sinc(theta)
}

pub fn log(x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let c = x.dot(y).clamp(-1.0, 1.0);
    if c <= -1.0 + ANTIPODAL_TOL {
        return Err(Error::CutLocus("sphere: antipodal points".into()));
    }
    let u = y - x * c;
    let u_norm = u.norm();
    // |u| = sin(theta); the angle comes from atan2 rather than acos(c),
    // which would amplify rounding noise near theta = 0.
    let theta = u_norm.atan2(c);
    if u_norm < 1e-16 {
        return Ok(DVector::zeros(x.len()));
    }
    Ok(u * (theta / u_norm))
}

/// Transport along the minimizing geodesic; rank-2 correction of the identity.
pub fn transport(x: &DVector<f64>, y: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    let c = x.dot(y).clamp(-1.0, 1.0);
    if c <= -1.0 + ANTIPODAL_TOL {
        return Err(Error::CutLocus("sphere: antipodal points".into()));
    }
    let factor = y.dot(v) / (1.0 + c);
    Ok(v - (x + y) * factor)
}

pub fn distance(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let c = x.dot(y).clamp(-1.0, 1.0);
    (y - x * c).norm().atan2(c)
}
