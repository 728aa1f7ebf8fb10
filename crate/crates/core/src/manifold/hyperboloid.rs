//! Hyperboloid model `H^d` (sectional curvature -1), time coordinate last.
//!
//! The Minkowski form is `<x, y>_L = sum_{k<d} x_k y_k - x_d y_d`; the model
//! is the upper sheet `<x, x>_L = -1, x_d > 0`, and the form restricted to
//! tangent spaces is positive definite.

use nalgebra::DVector;

use super::sinhc;
use crate::error::{Error, Result};

const POINT_TOL: f64 = 1e-9;
const TANGENT_TOL: f64 = 1e-9;

pub fn minkowski(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let last = a.len() - 1;
    let mut acc = 0.0;
    for i in 0..last {
        acc += a[i] * b[i];
    }
    acc - a[last] * b[last]
}

pub fn check_point(x: &DVector<f64>) -> Result<()> {
    let q = minkowski(x, x);
    if (q + 1.0).abs() > POINT_TOL {
        return Err(Error::InvalidPoint(format!("hyperboloid: <x,x>_L = {q}, expected -1")));
    }
    if x[x.len() - 1] <= 0.0 {
        return Err(Error::InvalidPoint("hyperboloid: time coordinate must be positive".into()));
    }
    Ok(())
}

pub fn check_tangent(x: &DVector<f64>, v: &DVector<f64>) -> Result<()> {
    let q = minkowski(x, v);
    let scale = 1.0 + v.amax();
    if q.abs() > TANGENT_TOL * scale {
        return Err(Error::InvalidTangent(format!("hyperboloid: <x,v>_L = {q}, expected 0")));
    }
    Ok(())
}

/// Re-solves the time coordinate from the spatial part.
pub fn project_point(mut x: DVector<f64>) -> DVector<f64> {
    let last = x.len() - 1;
    let mut spatial_sq = 0.0;
    for i in 0..last {
        spatial_sq += x[i] * x[i];
    }
    x[last] = (1.0 + spatial_sq).sqrt();
    x
}

pub fn project_tangent(x: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
    // <x, x>_L = -1, so w + <x,w>_L x removes the component along x.
    w + x * minkowski(x, w)
}

pub fn exp(x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let theta = minkowski(v, v).max(0.0).sqrt();
    x * theta.cosh() + v * sinhc(theta)
}

pub fn log(x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let c = (-minkowski(x, y)).max(1.0);
    let u = y - x * c;
    let u_norm = minkowski(&u, &u).max(0.0).sqrt();
    // |u|_L = sinh(theta); asinh avoids the noise amplification acosh(c)
    // suffers near c = 1.
    let theta = u_norm.asinh();
    if u_norm < 1e-16 {
        return DVector::zeros(x.len());
    }
    u * (theta / u_norm)
}

/// Transport along the connecting geodesic; defined for every point pair.
pub fn transport(x: &DVector<f64>, y: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let c = (-minkowski(x, y)).max(1.0);
    let factor = minkowski(y, v) / (1.0 + c);
    v + (x + y) * factor
}

pub fn distance(x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    let c = (-minkowski(x, y)).max(1.0);
    let u = y - x * c;
    minkowski(&u, &u).max(0.0).sqrt().asinh()
}
