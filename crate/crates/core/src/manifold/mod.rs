//! Manifold geometry: points, tangent vectors, and the exp/log/transport
//! operation set for the four supported spaces.
//!
//! All operations are pure functions of immutable values. Coordinates are
//! stored in ambient form: length-`d` vectors for `R^d` and the sphere
//! `S^{d-1}`, column-major `d x d` entries for SPD matrices, and length
//! `d+1` vectors for the hyperboloid `H^d` (time coordinate last).

mod hyperboloid;
mod sphere;
mod spd;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Which model space a point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManifoldKind {
    Euclidean,
    Sphere,
    Spd,
    Hyperboloid,
}

/// A manifold tag: the kind plus its size parameter.
///
/// `size` is the ambient vector length for Euclidean space, the ambient
/// length `d` for the sphere `S^{d-1}`, the matrix dimension for SPD, and
/// the intrinsic dimension `d` for the hyperboloid `H^d` (ambient `d+1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Manifold {
    kind: ManifoldKind,
    size: usize,
}

/// A point on a manifold, in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    manifold: Manifold,
    coords: DVector<f64>,
}

/// A tangent vector attached to a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: Point,
    coords: DVector<f64>,
}

impl Manifold {
    pub fn euclidean(dim: usize) -> Manifold {
        assert!(dim >= 1, "Euclidean space needs dimension >= 1");
        Manifold { kind: ManifoldKind::Euclidean, size: dim }
    }

    /// The unit sphere `S^{d-1}` embedded in `R^d`.
    pub fn sphere(ambient_dim: usize) -> Manifold {
        assert!(ambient_dim >= 2, "sphere needs ambient dimension >= 2");
        Manifold { kind: ManifoldKind::Sphere, size: ambient_dim }
    }

    /// Symmetric positive definite `d x d` matrices with the affine-invariant
    /// metric `<U, V>_P = tr(P^-1 U P^-1 V)`.
    pub fn spd(matrix_dim: usize) -> Manifold {
        assert!(matrix_dim >= 1, "SPD needs matrix dimension >= 1");
        Manifold { kind: ManifoldKind::Spd, size: matrix_dim }
    }

    /// The hyperboloid model `H^d = { x in R^{d+1} : <x,x>_L = -1, x_{d+1} > 0 }`.
    pub fn hyperboloid(dim: usize) -> Manifold {
        assert!(dim >= 1, "hyperboloid needs dimension >= 1");
        Manifold { kind: ManifoldKind::Hyperboloid, size: dim }
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    /// Length of the ambient coordinate vector.
    pub fn ambient_len(&self) -> usize {
        match self.kind {
            ManifoldKind::Euclidean | ManifoldKind::Sphere => self.size,
            ManifoldKind::Spd => self.size * self.size,
            ManifoldKind::Hyperboloid => self.size + 1,
        }
    }

    /// Intrinsic manifold dimension.
    pub fn intrinsic_dim(&self) -> usize {
        match self.kind {
            ManifoldKind::Euclidean => self.size,
            ManifoldKind::Sphere => self.size - 1,
            ManifoldKind::Spd => self.size * (self.size + 1) / 2,
            ManifoldKind::Hyperboloid => self.size,
        }
    }

    /// Size parameter as passed to the constructor.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            ManifoldKind::Euclidean => "euclidean",
            ManifoldKind::Sphere => "sphere",
            ManifoldKind::Spd => "spd",
            ManifoldKind::Hyperboloid => "hyperboloid",
        }
    }

    /// Exact sectional curvature bounds `(K_min, K_max)` of the model space.
    ///
    /// The SPD bounds are the standard choice for the affine-invariant metric.
    pub fn curvature_bounds(&self) -> (f64, f64) {
        match self.kind {
            ManifoldKind::Euclidean => (0.0, 0.0),
            ManifoldKind::Sphere => (1.0, 1.0),
            ManifoldKind::Spd => (-0.5, 0.0),
            ManifoldKind::Hyperboloid => (-1.0, -1.0),
        }
    }

    /// Injectivity radius: `pi` on the sphere, unbounded elsewhere.
    pub fn injectivity_radius(&self) -> f64 {
        match self.kind {
            ManifoldKind::Sphere => std::f64::consts::PI,
            _ => f64::INFINITY,
        }
    }

    /// Validates the point invariants for raw coordinates.
    pub fn check_point(&self, coords: &DVector<f64>) -> Result<()> {
        if coords.len() != self.ambient_len() {
            return Err(Error::InvalidPoint(format!(
                "{}: expected {} coordinates, got {}",
                self.name(),
                self.ambient_len(),
                coords.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoint(format!("{}: non-finite coordinate", self.name())));
        }
        match self.kind {
            ManifoldKind::Euclidean => Ok(()),
            ManifoldKind::Sphere => sphere::check_point(coords),
            ManifoldKind::Spd => spd::check_point(self.size, coords),
            ManifoldKind::Hyperboloid => hyperboloid::check_point(coords),
        }
    }

    /// Builds a point, validating the invariants.
    pub fn point(&self, coords: DVector<f64>) -> Result<Point> {
        self.check_point(&coords)?;
        Ok(Point { manifold: *self, coords })
    }

    /// Repairs floating-point drift: renormalizes sphere points, re-symmetrizes
    /// SPD coordinates, and re-solves the hyperboloid time coordinate.
    ///
    /// The input must already be close to the manifold; this is not a general
    /// metric projection.
    pub fn project_point(&self, coords: DVector<f64>) -> Point {
        let coords = match self.kind {
            ManifoldKind::Euclidean => coords,
            ManifoldKind::Sphere => sphere::project_point(coords),
            ManifoldKind::Spd => spd::project_point(self.size, coords),
            ManifoldKind::Hyperboloid => hyperboloid::project_point(coords),
        };
        Point { manifold: *self, coords }
    }

    /// Validates the tangency invariants of raw coordinates at `base`.
    pub fn check_tangent(&self, base: &Point, coords: &DVector<f64>) -> Result<()> {
        self.check_owns(base)?;
        if coords.len() != self.ambient_len() {
            return Err(Error::InvalidTangent(format!(
                "{}: expected {} coordinates, got {}",
                self.name(),
                self.ambient_len(),
                coords.len()
            )));
        }
        match self.kind {
            ManifoldKind::Euclidean => Ok(()),
            ManifoldKind::Sphere => sphere::check_tangent(&base.coords, coords),
            ManifoldKind::Spd => spd::check_tangent(self.size, coords),
            ManifoldKind::Hyperboloid => hyperboloid::check_tangent(&base.coords, coords),
        }
    }

    /// Builds a tangent vector at `base`, validating tangency.
    pub fn tangent(&self, base: &Point, coords: DVector<f64>) -> Result<TangentVector> {
        self.check_tangent(base, &coords)?;
        Ok(TangentVector { base: base.clone(), coords })
    }

    /// Orthogonally projects an ambient vector onto the tangent space at `x`.
    ///
    /// Idempotent; used to form Riemannian gradients from ambient gradients
    /// and to re-orthogonalize after transport.
    pub fn project_tangent(&self, x: &Point, ambient: &DVector<f64>) -> TangentVector {
        debug_assert_eq!(ambient.len(), self.ambient_len());
        let coords = match self.kind {
            ManifoldKind::Euclidean => ambient.clone(),
            ManifoldKind::Sphere => sphere::project_tangent(&x.coords, ambient),
            ManifoldKind::Spd => spd::project_tangent(self.size, ambient),
            ManifoldKind::Hyperboloid => hyperboloid::project_tangent(&x.coords, ambient),
        };
        TangentVector { base: x.clone(), coords }
    }

    /// The zero vector of `T_x M`.
    pub fn zero_tangent(&self, x: &Point) -> TangentVector {
        TangentVector { base: x.clone(), coords: DVector::zeros(self.ambient_len()) }
    }

    /// Riemannian inner product of two tangent vectors at the same base point.
    pub fn inner(&self, u: &TangentVector, v: &TangentVector) -> Result<f64> {
        if !u.base.same_point(&v.base) {
            return Err(Error::BaseMismatch(format!(
                "inner product requires a common base point on {}",
                self.name()
            )));
        }
        Ok(self.metric(&u.base, &u.coords, &v.coords))
    }

    /// Inner product of two vectors known to share a base point; skips the
    /// base check that [`Manifold::inner`] performs.
    pub(crate) fn metric_pairing(&self, u: &TangentVector, v: &TangentVector) -> f64 {
        self.metric(&u.base, &u.coords, &v.coords)
    }

    /// Metric evaluation on raw coordinate arrays (no base check).
    pub(crate) fn metric(&self, at: &Point, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        match self.kind {
            ManifoldKind::Euclidean | ManifoldKind::Sphere => u.dot(v),
            ManifoldKind::Spd => spd::metric(self.size, &at.coords, u, v),
            ManifoldKind::Hyperboloid => hyperboloid::minkowski(u, v),
        }
    }

    /// Exponential map: the endpoint of the unit-time geodesic leaving the
    /// base of `v` with initial velocity `v`.
    pub fn exp(&self, v: &TangentVector) -> Point {
        let coords = match self.kind {
            ManifoldKind::Euclidean => &v.base.coords + &v.coords,
            ManifoldKind::Sphere => sphere::exp(&v.base.coords, &v.coords),
            ManifoldKind::Spd => spd::exp(self.size, &v.base.coords, &v.coords),
            ManifoldKind::Hyperboloid => hyperboloid::exp(&v.base.coords, &v.coords),
        };
        self.project_point(coords)
    }

    /// Logarithm map: the tangent vector at `x` pointing to `y` with norm
    /// `distance(x, y)`. Fails on the sphere for antipodal inputs.
    pub fn log(&self, x: &Point, y: &Point) -> Result<TangentVector> {
        self.check_owns(x)?;
        self.check_owns(y)?;
        let coords = match self.kind {
            ManifoldKind::Euclidean => &y.coords - &x.coords,
            ManifoldKind::Sphere => sphere::log(&x.coords, &y.coords)?,
            ManifoldKind::Spd => spd::log(self.size, &x.coords, &y.coords),
            ManifoldKind::Hyperboloid => hyperboloid::log(&x.coords, &y.coords),
        };
        Ok(self.project_tangent(x, &coords))
    }

    /// Parallel transport of `v` along the minimizing geodesic from its base
    /// point to `to`.
    pub fn transport(&self, v: &TangentVector, to: &Point) -> Result<TangentVector> {
        self.check_owns(to)?;
        if v.base.same_point(to) {
            return Ok(TangentVector { base: to.clone(), coords: v.coords.clone() });
        }
        let coords = match self.kind {
            ManifoldKind::Euclidean => v.coords.clone(),
            ManifoldKind::Sphere => sphere::transport(&v.base.coords, &to.coords, &v.coords)?,
            ManifoldKind::Spd => spd::transport(self.size, &v.base.coords, &to.coords, &v.coords),
            ManifoldKind::Hyperboloid => {
                hyperboloid::transport(&v.base.coords, &to.coords, &v.coords)
            }
        };
        Ok(self.project_tangent(to, &coords))
    }

    /// Geodesic distance. Defined for all point pairs, including sphere
    /// antipodes where the logarithm map fails.
    pub fn distance(&self, x: &Point, y: &Point) -> f64 {
        match self.kind {
            ManifoldKind::Euclidean => (&y.coords - &x.coords).norm(),
            ManifoldKind::Sphere => sphere::distance(&x.coords, &y.coords),
            ManifoldKind::Spd => spd::distance(self.size, &x.coords, &y.coords),
            ManifoldKind::Hyperboloid => hyperboloid::distance(&x.coords, &y.coords),
        }
    }

    /// Draws a random point, spread over a moderate region of the manifold.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self.kind {
            ManifoldKind::Euclidean => {
                let coords = gaussian_vector(rng, self.size);
                Point { manifold: *self, coords }
            }
            ManifoldKind::Sphere => {
                let mut coords = gaussian_vector(rng, self.size);
                while coords.norm() < 1e-6 {
                    coords = gaussian_vector(rng, self.size);
                }
                self.project_point(coords)
            }
            ManifoldKind::Spd => {
                let identity = self.project_point(spd::identity_coords(self.size));
                let scale = 0.5 / (self.size as f64).sqrt();
                let ambient = gaussian_vector(rng, self.ambient_len()) * scale;
                let v = self.project_tangent(&identity, &ambient);
                self.exp(&v)
            }
            ManifoldKind::Hyperboloid => {
                let scale = 0.5 / (self.size as f64).sqrt();
                let mut coords = DVector::zeros(self.size + 1);
                for i in 0..self.size {
                    coords[i] = scale * rng.sample::<f64, _>(StandardNormal);
                }
                self.project_point(coords)
            }
        }
    }

    /// Draws a random tangent vector at `x` by projecting ambient Gaussian noise.
    pub fn random_tangent<R: Rng + ?Sized>(&self, x: &Point, rng: &mut R) -> TangentVector {
        let ambient = gaussian_vector(rng, self.ambient_len());
        self.project_tangent(x, &ambient)
    }

    /// Random tangent vector rescaled to the requested metric norm.
    pub fn random_tangent_with_norm<R: Rng + ?Sized>(
        &self,
        x: &Point,
        norm: f64,
        rng: &mut R,
    ) -> TangentVector {
        loop {
            let v = self.random_tangent(x, rng);
            let n = v.norm();
            if n > 1e-12 {
                return v.scale(norm / n);
            }
        }
    }

    fn check_owns(&self, p: &Point) -> Result<()> {
        if p.manifold != *self {
            return Err(Error::InvalidPoint(format!(
                "point belongs to {}({}), not {}({})",
                p.manifold.name(),
                p.manifold.size,
                self.name(),
                self.size
            )));
        }
        Ok(())
    }
}

impl Point {
    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    /// True when both points name the same location up to a small tolerance.
    pub fn same_point(&self, other: &Point) -> bool {
        if self.manifold != other.manifold {
            return false;
        }
        let scale = 1.0 + self.coords.amax().max(other.coords.amax());
        (&self.coords - &other.coords).amax() <= 1e-8 * scale
    }
}

impl TangentVector {
    pub fn base(&self) -> &Point {
        &self.base
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn manifold(&self) -> Manifold {
        self.base.manifold
    }

    /// Metric norm at the base point.
    pub fn norm(&self) -> f64 {
        let m = self.base.manifold;
        m.metric(&self.base, &self.coords, &self.coords).max(0.0).sqrt()
    }

    /// Metric inner product with another vector at the same base point.
    pub fn dot(&self, other: &TangentVector) -> Result<f64> {
        self.base.manifold.inner(self, other)
    }

    pub fn scale(&self, factor: f64) -> TangentVector {
        TangentVector { base: self.base.clone(), coords: &self.coords * factor }
    }

    /// Tangent-space addition. Panics if the base points differ; combining
    /// vectors from different tangent spaces is a programming error.
    pub fn add(&self, other: &TangentVector) -> TangentVector {
        assert!(
            self.base.same_point(&other.base),
            "tangent-space mismatch in add on {}",
            self.base.manifold.name()
        );
        TangentVector { base: self.base.clone(), coords: &self.coords + &other.coords }
    }

    /// Tangent-space subtraction; same base-point contract as `add`.
    pub fn sub(&self, other: &TangentVector) -> TangentVector {
        assert!(
            self.base.same_point(&other.base),
            "tangent-space mismatch in sub on {}",
            self.base.manifold.name()
        );
        TangentVector { base: self.base.clone(), coords: &self.coords - &other.coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.amax() == 0.0
    }
}

fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Series-guarded `sin(t)/t`.
pub(crate) fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

/// Series-guarded `sinh(t)/t`.
pub(crate) fn sinhc(t: f64) -> f64 {
    if t.abs() < 1e-8 {
        1.0 + t * t / 6.0
    } else {
        t.sinh() / t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::dvector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit(manifold: &Manifold, i: usize) -> Point {
        let mut c = DVector::zeros(manifold.ambient_len());
        c[i] = 1.0;
        manifold.point(c).unwrap()
    }

    #[test]
    fn inner_euclidean_unit_vector() {
        let m = Manifold::euclidean(2);
        let x = m.point(dvector![0.0, 0.0]).unwrap();
        let u = m.tangent(&x, dvector![1.0, 0.0]).unwrap();
        assert_eq!(m.inner(&u, &u).unwrap(), 1.0);
    }

    #[test]
    fn inner_spd_identity_base_is_frobenius() {
        let m = Manifold::spd(2);
        let id = m.point(dvector![1.0, 0.0, 0.0, 1.0]).unwrap();
        let u = m.tangent(&id, dvector![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_relative_eq!(m.inner(&u, &u).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn inner_hyperboloid_orthogonal_spatial_directions() {
        let m = Manifold::hyperboloid(2);
        let x = m.point(dvector![0.0, 0.0, 1.0]).unwrap();
        let u = m.tangent(&x, dvector![1.0, 0.0, 0.0]).unwrap();
        let v = m.tangent(&x, dvector![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(m.inner(&u, &v).unwrap(), 0.0);
    }

    #[test]
    fn inner_rejects_base_mismatch() {
        let m = Manifold::sphere(3);
        let u = m.project_tangent(&unit(&m, 0), &dvector![0.0, 1.0, 0.0]);
        let v = m.project_tangent(&unit(&m, 1), &dvector![0.0, 0.0, 1.0]);
        assert!(m.inner(&u, &v).is_err());
    }

    #[test]
    fn exp_zero_vector_is_identity_everywhere() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [
            Manifold::euclidean(4),
            Manifold::sphere(4),
            Manifold::spd(3),
            Manifold::hyperboloid(3),
        ] {
            let x = m.random_point(&mut rng);
            let y = m.exp(&m.zero_tangent(&x));
            assert!(x.same_point(&y), "exp_x(0) != x on {}", m.name());
        }
    }

    #[test]
    fn exp_sphere_quarter_great_circle() {
        let m = Manifold::sphere(3);
        let e1 = unit(&m, 0);
        let v = m.tangent(&e1, dvector![0.0, std::f64::consts::FRAC_PI_2, 0.0]).unwrap();
        let y = m.exp(&v);
        assert_relative_eq!(y.coords()[1], 1.0, epsilon = 1e-12);
        assert!(y.coords()[0].abs() < 1e-12);
    }

    #[test]
    fn exp_spd_identity_is_matrix_exponential() {
        let m = Manifold::spd(2);
        let id = m.point(dvector![1.0, 0.0, 0.0, 1.0]).unwrap();
        let v = m.tangent(&id, dvector![1.0, 0.0, 0.0, 0.0]).unwrap();
        let y = m.exp(&v);
        assert_relative_eq!(y.coords()[0], std::f64::consts::E, epsilon = 1e-12);
        assert_relative_eq!(y.coords()[3], 1.0, epsilon = 1e-12);
        assert!(y.coords()[1].abs() < 1e-12);
    }

    #[test]
    fn log_same_point_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for m in [
            Manifold::euclidean(4),
            Manifold::sphere(4),
            Manifold::spd(3),
            Manifold::hyperboloid(3),
        ] {
            let x = m.random_point(&mut rng);
            let v = m.log(&x, &x).unwrap();
            assert!(v.norm() < 1e-9, "log(x, x) != 0 on {}", m.name());
        }
    }

    #[test]
    fn log_sphere_inverts_quarter_circle() {
        let m = Manifold::sphere(3);
        let v = m.log(&unit(&m, 0), &unit(&m, 1)).unwrap();
        assert_relative_eq!(v.norm(), std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
        assert_relative_eq!(v.coords()[1], std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn log_spd_identity_is_matrix_logarithm() {
        let m = Manifold::spd(2);
        let id = m.point(dvector![1.0, 0.0, 0.0, 1.0]).unwrap();
        let q = m.point(dvector![std::f64::consts::E, 0.0, 0.0, 1.0]).unwrap();
        let v = m.log(&id, &q).unwrap();
        assert_relative_eq!(v.coords()[0], 1.0, epsilon = 1e-12);
        assert!(v.coords()[3].abs() < 1e-12);
    }

    #[test]
    fn log_sphere_antipodal_is_cut_locus() {
        let m = Manifold::sphere(3);
        let x = unit(&m, 0);
        let y = m.point(dvector![-1.0, 0.0, 0.0]).unwrap();
        match m.log(&x, &y) {
            Err(Error::CutLocus(_)) => {}
            other => panic!("expected CutLocus, got {other:?}"),
        }
        // Distance is still defined there.
        assert_relative_eq!(m.distance(&x, &y), std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn transport_to_same_point_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = Manifold::hyperboloid(4);
        let x = m.random_point(&mut rng);
        let v = m.random_tangent(&x, &mut rng);
        let w = m.transport(&v, &x).unwrap();
        assert!(v.sub(&w).norm() < 1e-12);
    }

    #[test]
    fn transport_sphere_normal_direction_is_fixed() {
        let m = Manifold::sphere(3);
        let e3 = m.tangent(&unit(&m, 0), dvector![0.0, 0.0, 1.0]).unwrap();
        let moved = m.transport(&e3, &unit(&m, 1)).unwrap();
        assert_relative_eq!(moved.coords()[2], 1.0, epsilon = 1e-12);
        assert!(moved.coords()[0].abs() < 1e-12 && moved.coords()[1].abs() < 1e-12);
    }

    #[test]
    fn transport_hyperboloid_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = Manifold::hyperboloid(4);
        for _ in 0..50 {
            let x = m.random_point(&mut rng);
            let y = m.random_point(&mut rng);
            let v = m.random_tangent(&x, &mut rng);
            let w = m.transport(&v, &y).unwrap();
            assert_relative_eq!(v.norm(), w.norm(), epsilon = 1e-9);
        }
    }

    #[test]
    fn distance_examples() {
        let sphere = Manifold::sphere(3);
        assert_relative_eq!(
            sphere.distance(&unit(&sphere, 0), &unit(&sphere, 1)),
            std::f64::consts::FRAC_PI_2,
            epsilon = 1e-12
        );
        let spd = Manifold::spd(2);
        let id = spd.point(dvector![1.0, 0.0, 0.0, 1.0]).unwrap();
        let q = spd.point(dvector![std::f64::consts::E, 0.0, 0.0, 1.0]).unwrap();
        assert_relative_eq!(spd.distance(&id, &q), 1.0, epsilon = 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for m in [Manifold::euclidean(3), sphere, spd, Manifold::hyperboloid(3)] {
            let x = m.random_point(&mut rng);
            assert!(m.distance(&x, &x) < 1e-9, "d(x, x) != 0 on {}", m.name());
        }
    }

    #[test]
    fn project_tangent_examples_and_idempotence() {
        let m = Manifold::sphere(3);
        let e1 = unit(&m, 0);
        assert!(m.project_tangent(&e1, &dvector![1.0, 0.0, 0.0]).norm() < 1e-15);
        let t = m.project_tangent(&e1, &dvector![0.0, 1.0, 0.0]);
        assert_relative_eq!(t.coords()[1], 1.0, epsilon = 1e-15);

        let h = Manifold::hyperboloid(2);
        let x = h.point(dvector![0.0, 0.0, 1.0]).unwrap();
        let killed = h.project_tangent(&x, &dvector![0.0, 0.0, 5.0]);
        assert!(killed.norm() < 1e-15, "time direction at the apex is normal");

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for m in [
            Manifold::euclidean(4),
            Manifold::sphere(4),
            Manifold::spd(3),
            Manifold::hyperboloid(3),
        ] {
            let x = m.random_point(&mut rng);
            let w = DVector::from_fn(m.ambient_len(), |i, _| (i as f64 * 0.7).sin());
            let once = m.project_tangent(&x, &w);
            let twice = m.project_tangent(&x, once.coords());
            assert!(
                once.sub(&twice).coords().amax() <= 1e-12 * (1.0 + once.coords().amax()),
                "projection not idempotent on {}",
                m.name()
            );
            assert!(m.check_tangent(&x, once.coords()).is_ok());
        }
    }

    #[test]
    fn point_invariants_are_enforced() {
        assert!(Manifold::sphere(3).point(dvector![1.0, 1.0, 0.0]).is_err());
        assert!(Manifold::spd(2).point(dvector![1.0, 0.5, 0.4, 1.0]).is_err());
        assert!(Manifold::spd(2).point(dvector![1.0, 2.0, 2.0, 1.0]).is_err(), "indefinite");
        assert!(Manifold::hyperboloid(2).point(dvector![0.0, 0.0, -1.0]).is_err());
        assert!(Manifold::hyperboloid(2).point(dvector![0.3, 0.0, 1.0]).is_err());
    }
}
