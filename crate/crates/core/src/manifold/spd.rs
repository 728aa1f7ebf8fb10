//! SPD(d) with the affine-invariant metric `<U, V>_P = tr(P^-1 U P^-1 V)`.
//!
//! Closed forms via congruence with `P^{1/2}`:
//!   exp_P(V)   = P^{1/2} mexp(P^{-1/2} V P^{-1/2}) P^{1/2}
//!   log_P(Q)   = P^{1/2} mlog(P^{-1/2} Q P^{-1/2}) P^{1/2}
//!   transport  = E V E^T with E = (Q P^-1)^{1/2}
//! Matrix functions are evaluated by symmetric eigendecomposition and the
//! results re-symmetrized to bound drift.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

const SYM_TOL: f64 = 1e-10;

fn to_matrix(n: usize, v: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(n, n, v.as_slice())
}

fn to_vector(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn asymmetry(n: usize, v: &DVector<f64>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((v[i + j * n] - v[j + i * n]).abs());
        }
    }
    worst
}

/// Applies `f` to the eigenvalues of a symmetric matrix.
fn matrix_function(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let scaled = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        eig.eigenvectors[(i, j)] * f(eig.eigenvalues[j])
    });
    symmetrize(&(scaled * eig.eigenvectors.transpose()))
}

pub fn check_point(n: usize, v: &DVector<f64>) -> Result<()> {
    let asym = asymmetry(n, v);
    let scale = 1.0 + v.amax();
    if asym > SYM_TOL * scale {
        return Err(Error::InvalidPoint(format!("spd: asymmetry {asym} exceeds tolerance")));
    }
    let eig = SymmetricEigen::new(symmetrize(&to_matrix(n, v)));
    let min_eig = eig.eigenvalues.min();
    if min_eig <= 0.0 {
        return Err(Error::InvalidPoint(format!("spd: minimum eigenvalue {min_eig} <= 0")));
    }
    Ok(())
}

pub fn check_tangent(n: usize, v: &DVector<f64>) -> Result<()> {
    let asym = asymmetry(n, v);
    let scale = 1.0 + v.amax();
    if asym > SYM_TOL * scale {
        return Err(Error::InvalidTangent(format!("spd: asymmetry {asym} exceeds tolerance")));
    }
    Ok(())
}

pub fn project_point(n: usize, v: DVector<f64>) -> DVector<f64> {
    to_vector(&symmetrize(&to_matrix(n, &v)))
}

pub fn project_tangent(n: usize, w: &DVector<f64>) -> DVector<f64> {
    to_vector(&symmetrize(&to_matrix(n, w)))
}

pub fn identity_coords(n: usize) -> DVector<f64> {
    to_vector(&DMatrix::identity(n, n))
}

/// `P^{1/2}` and `P^{-1/2}` from one eigendecomposition.
fn sqrt_pair(p: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(symmetrize(p));
    let n = p.nrows();
    let mut sqrt = DMatrix::zeros(n, n);
    let mut inv_sqrt = DMatrix::zeros(n, n);
    for j in 0..n {
        let root = eig.eigenvalues[j].max(f64::MIN_POSITIVE).sqrt();
        for i in 0..n {
            let q = eig.eigenvectors[(i, j)];
            sqrt[(i, j)] = q * root;
            inv_sqrt[(i, j)] = q / root;
        }
    }
    let qt = eig.eigenvectors.transpose();
    (symmetrize(&(sqrt * &qt)), symmetrize(&(inv_sqrt * &qt)))
}

pub fn metric(n: usize, p: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let (_, p_inv_sqrt) = sqrt_pair(&to_matrix(n, p));
    let a = &p_inv_sqrt * to_matrix(n, u) * &p_inv_sqrt;
    let b = &p_inv_sqrt * to_matrix(n, v) * &p_inv_sqrt;
    a.zip_fold(&b, 0.0, |acc, x, y| acc + x * y)
}

pub fn exp(n: usize, p: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let (p_sqrt, p_inv_sqrt) = sqrt_pair(&to_matrix(n, p));
    let inner = &p_inv_sqrt * to_matrix(n, v) * &p_inv_sqrt;
    let result = &p_sqrt * matrix_function(&inner, f64::exp) * &p_sqrt;
    to_vector(&symmetrize(&result))
}

pub fn log(n: usize, p: &DVector<f64>, q: &DVector<f64>) -> DVector<f64> {
    let (p_sqrt, p_inv_sqrt) = sqrt_pair(&to_matrix(n, p));
    let inner = &p_inv_sqrt * to_matrix(n, q) * &p_inv_sqrt;
    let result = &p_sqrt * matrix_function(&inner, f64::ln) * &p_sqrt;
    to_vector(&symmetrize(&result))
}

pub fn transport(n: usize, p: &DVector<f64>, q: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let (p_sqrt, p_inv_sqrt) = sqrt_pair(&to_matrix(n, p));
    let s = &p_inv_sqrt * to_matrix(n, q) * &p_inv_sqrt;
    let e = &p_sqrt * matrix_function(&s, f64::sqrt) * &p_inv_sqrt;
    let result = &e * to_matrix(n, v) * e.transpose();
    to_vector(&symmetrize(&result))
}

pub fn distance(n: usize, p: &DVector<f64>, q: &DVector<f64>) -> f64 {
    let (_, p_inv_sqrt) = sqrt_pair(&to_matrix(n, p));
    let inner = symmetrize(&(&p_inv_sqrt * to_matrix(n, q) * &p_inv_sqrt));
    let eig = SymmetricEigen::new(inner);
    eig.eigenvalues
        .iter()
        .map(|l| l.max(f64::MIN_POSITIVE).ln().powi(2))
        .sum::<f64>()
        .sqrt()
}
