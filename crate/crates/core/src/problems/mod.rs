//! Concrete objectives with Riemannian gradients, curvature constants, and
//! seeded data generators, plus synthetic flat quadratics for oracle tests.

pub mod dataset;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::GeometryBounds;
use crate::manifold::{Manifold, Point, TangentVector};
use crate::optim;

type ObjectiveFn = dyn Fn(&Point) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&Point) -> TangentVector + Send + Sync;
type SamplerFn = dyn Fn(&mut ChaCha8Rng) -> Point + Send + Sync;

/// An objective with its Riemannian gradient and geometry metadata.
///
/// Immutable and cheaply cloneable; safe to share across threads.
#[derive(Clone)]
pub struct Problem {
    name: String,
    manifold: Manifold,
    bounds: GeometryBounds,
    smoothness: f64,
    strong_convexity: Option<f64>,
    optimum: Option<(Point, f64)>,
    objective: Arc<ObjectiveFn>,
    gradient: Arc<GradientFn>,
    sampler: Arc<SamplerFn>,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("manifold", &self.manifold)
            .field("bounds", &self.bounds)
            .field("smoothness", &self.smoothness)
            .field("strong_convexity", &self.strong_convexity)
            .field("has_optimum", &self.optimum.is_some())
            .finish()
    }
}

impl Problem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        manifold: Manifold,
        bounds: GeometryBounds,
        smoothness: f64,
        strong_convexity: Option<f64>,
        objective: Arc<ObjectiveFn>,
        gradient: Arc<GradientFn>,
        sampler: Arc<SamplerFn>,
    ) -> Problem {
        Problem {
            name: name.into(),
            manifold,
            bounds,
            smoothness,
            strong_convexity,
            optimum: None,
            objective,
            gradient,
            sampler,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    pub fn bounds(&self) -> GeometryBounds {
        self.bounds
    }

    /// Declared geodesic smoothness constant `L`.
    pub fn smoothness(&self) -> f64 {
        self.smoothness
    }

    /// Declared geodesic strong convexity constant `mu`, when known.
    pub fn strong_convexity(&self) -> Option<f64> {
        self.strong_convexity
    }

    pub fn optimum(&self) -> Option<(&Point, f64)> {
        self.optimum.as_ref().map(|(p, f)| (p, *f))
    }

    pub fn objective(&self, x: &Point) -> f64 {
        (self.objective)(x)
    }

    pub fn gradient(&self, x: &Point) -> TangentVector {
        (self.gradient)(x)
    }

    /// Draws a point from the problem's working domain.
    pub fn sample_domain(&self, rng: &mut ChaCha8Rng) -> Point {
        (self.sampler)(rng)
    }

    pub fn with_optimum(mut self, x_star: Point, f_star: f64) -> Problem {
        self.optimum = Some((x_star, f_star));
        self
    }

    /// Overrides the declared smoothness constant.
    pub fn with_smoothness(mut self, smoothness: f64) -> Problem {
        self.smoothness = smoothness;
        self
    }
}

/// Which benchmark family a dataset spec names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Rayleigh,
    KarcherSpd,
    KarcherHyperbolic,
    EuclideanQuadratic,
}

impl DatasetKind {
    pub fn name(&self) -> &'static str {
        match self {
            DatasetKind::Rayleigh => "rayleigh",
            DatasetKind::KarcherSpd => "karcher_spd",
            DatasetKind::KarcherHyperbolic => "karcher_hyperbolic",
            DatasetKind::EuclideanQuadratic => "euclidean_quadratic",
        }
    }

    pub fn parse(name: &str) -> Option<DatasetKind> {
        match name {
            "rayleigh" => Some(DatasetKind::Rayleigh),
            "karcher_spd" => Some(DatasetKind::KarcherSpd),
            "karcher_hyperbolic" => Some(DatasetKind::KarcherHyperbolic),
            "euclidean_quadratic" => Some(DatasetKind::EuclideanQuadratic),
            _ => None,
        }
    }
}

/// Seeded description of a benchmark instance. A fixed spec yields a
/// bit-identical dataset within one build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub dim: usize,
    /// Point count for the mean problems; unused by the others.
    pub count: usize,
    /// Condition number: eigenvalue spread for SPD data, `L/mu` for the
    /// flat quadratic (with `L = 1`).
    pub condition: f64,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn build(&self) -> Result<Problem> {
        match self.kind {
            DatasetKind::Rayleigh => make_rayleigh(self.dim, self.seed),
            DatasetKind::KarcherSpd => {
                make_karcher(KarcherManifold::Spd, self.dim, self.count, self.condition, self.seed)
            }
            DatasetKind::KarcherHyperbolic => make_karcher(
                KarcherManifold::Hyperbolic,
                self.dim,
                self.count,
                self.condition,
                self.seed,
            ),
            DatasetKind::EuclideanQuadratic => {
                make_euclidean_quadratic(self.dim, 1.0, 1.0 / self.condition, self.seed)
            }
        }
    }
}

/// Rayleigh quotient minimization `f(x) = -x^T A x / 2` on `S^{d-1}`, with
/// `A = (B + B^T)/2` and `B` entries drawn from `N(0, 1/d)`.
///
/// The gradient is the tangent projection of `-Ax`; the smoothness constant
/// is the spectral spread `lambda_max - lambda_min`, and the optimum is the
/// top eigenvector with value `-lambda_max / 2`.
pub fn make_rayleigh(dim: usize, seed: u64) -> Result<Problem> {
    if dim < 2 {
        return Err(Error::Config(format!("rayleigh needs d >= 2, got {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = (1.0 / dim as f64).sqrt();
    let b = DMatrix::from_fn(dim, dim, |_, _| sd * rng.sample::<f64, _>(StandardNormal));
    rayleigh_from_matrix((&b + b.transpose()) * 0.5)
}

/// Rayleigh quotient problem for an explicit symmetric matrix.
pub fn rayleigh_from_matrix(a: DMatrix<f64>) -> Result<Problem> {
    let dim = a.nrows();
    if dim < 2 || a.ncols() != dim {
        return Err(Error::Config("rayleigh matrix must be square with d >= 2".into()));
    }
    let eig = SymmetricEigen::new(a.clone());
    let mut top = 0;
    let mut bottom = 0;
    for i in 0..dim {
        if eig.eigenvalues[i] > eig.eigenvalues[top] {
            top = i;
        }
        if eig.eigenvalues[i] < eig.eigenvalues[bottom] {
            bottom = i;
        }
    }
    let lambda_max = eig.eigenvalues[top];
    let lambda_min = eig.eigenvalues[bottom];

    let manifold = Manifold::sphere(dim);
    let x_star = manifold.project_point(DVector::from(eig.eigenvectors.column(top).clone_owned()));
    let bounds = GeometryBounds::new(1.0, 1.0, std::f64::consts::PI - 1e-3)?;

    let a_obj = Arc::new(a);
    let a_grad = Arc::clone(&a_obj);
    let objective: Arc<ObjectiveFn> =
        Arc::new(move |x: &Point| -0.5 * x.coords().dot(&(&*a_obj * x.coords())));
    let gradient: Arc<GradientFn> = Arc::new(move |x: &Point| {
        let ambient = -(&*a_grad * x.coords());
        x.manifold().project_tangent(x, &ambient)
    });
    let sampler: Arc<SamplerFn> = Arc::new(move |rng: &mut ChaCha8Rng| manifold.random_point(rng));

    Ok(Problem::new(
        format!("rayleigh-d{dim}"),
        manifold,
        bounds,
        lambda_max - lambda_min,
        None,
        objective,
        gradient,
        sampler,
    )
    .with_optimum(x_star, -0.5 * lambda_max))
}

/// Which nonpositively curved manifold hosts a Karcher mean problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KarcherManifold {
    Spd,
    Hyperbolic,
}

/// Karcher mean objective `f(x) = sum_i d(x, p_i)^2 / (2n)`.
///
/// Geodesically 1-strongly convex on nonpositively curved manifolds; the
/// gradient is `-mean_i log_x(p_i)`. The smoothness constant defaults to 10
/// and can be overridden with [`Problem::with_smoothness`]. The optimum is
/// left unset; compute it with [`reference_optimum`].
pub fn make_karcher(
    which: KarcherManifold,
    dim: usize,
    count: usize,
    condition: f64,
    seed: u64,
) -> Result<Problem> {
    if dim < 1 || count < 1 {
        return Err(Error::Config(format!("karcher needs d, n >= 1, got d = {dim}, n = {count}")));
    }
    if condition < 1.0 {
        return Err(Error::Config(format!("condition number must be >= 1, got {condition}")));
    }
    let (manifold, points, k_min, k_max) = match which {
        KarcherManifold::Spd => {
            let manifold = Manifold::spd(dim);
            (manifold, generate_spd_dataset(dim, count, condition, seed)?, -0.5, 0.0)
        }
        KarcherManifold::Hyperbolic => {
            let manifold = Manifold::hyperboloid(dim);
            (manifold, generate_hyperbolic_dataset(dim, count, seed)?, -1.0, -1.0)
        }
    };
    karcher_from_points(manifold, points, k_min, k_max)
}

/// Builds a Karcher mean problem over explicit data points.
pub fn karcher_from_points(
    manifold: Manifold,
    points: Vec<Point>,
    k_min: f64,
    k_max: f64,
) -> Result<Problem> {
    let mut max_dist = 0.0_f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            max_dist = max_dist.max(manifold.distance(&points[i], &points[j]));
        }
    }
    // Coincident data would give a zero diameter; keep the bounds valid.
    let diameter = (1.05 * max_dist).max(1e-3);
    let bounds = GeometryBounds::new(k_min, k_max, diameter)?;

    let count = points.len();
    let inv_n = 1.0 / count as f64;
    let data_obj = Arc::new(points);
    let data_grad = Arc::clone(&data_obj);
    let data_sample = Arc::clone(&data_obj);

    let objective: Arc<ObjectiveFn> = Arc::new(move |x: &Point| {
        0.5 * inv_n * data_obj.iter().map(|p| manifold.distance(x, p).powi(2)).sum::<f64>()
    });
    let gradient: Arc<GradientFn> = Arc::new(move |x: &Point| {
        let mut acc = manifold.zero_tangent(x);
        for p in data_grad.iter() {
            let log = manifold
                .log(x, p)
                .expect("logarithm map is total on nonpositively curved manifolds");
            acc = acc.add(&log);
        }
        acc.scale(-inv_n)
    });
    let spread = 0.25 * diameter;
    let sampler: Arc<SamplerFn> = Arc::new(move |rng: &mut ChaCha8Rng| {
        let anchor = &data_sample[rng.random_range(0..data_sample.len())];
        let radius = spread * rng.random::<f64>();
        let v = manifold.random_tangent_with_norm(anchor, radius, rng);
        manifold.exp(&v)
    });

    Ok(Problem::new(
        format!("karcher-{}-d{}-n{}", manifold.name(), manifold.size(), count),
        manifold,
        bounds,
        10.0,
        Some(1.0),
        objective,
        gradient,
        sampler,
    ))
}

/// Diagonal quadratic `f(x) = x^T H x / 2` with a log-spaced spectrum on
/// `[mu, l]`, pinned at both ends. The optimum is the origin. The seed is
/// accepted for interface uniformity; the spectrum is deterministic.
pub fn make_euclidean_quadratic(dim: usize, l: f64, mu: f64, _seed: u64) -> Result<Problem> {
    if dim < 1 {
        return Err(Error::Config("quadratic needs d >= 1".into()));
    }
    if !(0.0 < mu && mu <= l) {
        return Err(Error::Config(format!("need 0 < mu <= L, got mu = {mu}, L = {l}")));
    }
    let spectrum: DVector<f64> = if dim == 1 {
        DVector::from_element(1, l)
    } else {
        let log_mu = mu.ln();
        let log_l = l.ln();
        DVector::from_fn(dim, |i, _| {
            if i == 0 {
                mu
            } else if i == dim - 1 {
                l
            } else {
                (log_mu + (log_l - log_mu) * i as f64 / (dim as f64 - 1.0)).exp()
            }
        })
    };

    let manifold = Manifold::euclidean(dim);
    let x_star = manifold.project_point(DVector::zeros(dim));
    let spec_obj = Arc::new(spectrum);
    let spec_grad = Arc::clone(&spec_obj);

    let objective: Arc<ObjectiveFn> = Arc::new(move |x: &Point| {
        0.5 * x.coords().iter().zip(spec_obj.iter()).map(|(xi, li)| li * xi * xi).sum::<f64>()
    });
    let gradient: Arc<GradientFn> = Arc::new(move |x: &Point| {
        let coords = DVector::from_fn(x.coords().len(), |i, _| spec_grad[i] * x.coords()[i]);
        manifold.project_tangent(x, &coords)
    });
    let sampler: Arc<SamplerFn> = Arc::new(move |rng: &mut ChaCha8Rng| manifold.random_point(rng));

    Ok(Problem::new(
        format!("quadratic-d{dim}"),
        manifold,
        GeometryBounds::flat(),
        l,
        Some(mu),
        objective,
        gradient,
        sampler,
    )
    .with_optimum(x_star, 0.0))
}

/// Random SPD matrices with eigenvalues log-uniform on `[1, condition]`,
/// the extremes pinned so every matrix attains the requested condition
/// number (for `d >= 2`), conjugated by random orthogonal factors.
pub fn generate_spd_dataset(
    dim: usize,
    count: usize,
    condition: f64,
    seed: u64,
) -> Result<Vec<Point>> {
    if condition < 1.0 {
        return Err(Error::Config(format!("condition number must be >= 1, got {condition}")));
    }
    let manifold = Manifold::spd(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log_c = condition.ln();
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let mut log_eigs: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * log_c).collect();
        if dim >= 2 {
            let (mut lo, mut hi) = (0, 0);
            for (i, v) in log_eigs.iter().enumerate() {
                if *v < log_eigs[lo] {
                    lo = i;
                }
                if *v > log_eigs[hi] {
                    hi = i;
                }
            }
            log_eigs[lo] = 0.0;
            log_eigs[hi] = log_c;
        }
        let gauss = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let q = gauss.qr().q();
        let scaled = DMatrix::from_fn(dim, dim, |i, j| q[(i, j)] * log_eigs[j].exp());
        let p = scaled * q.transpose();
        points.push(manifold.point(manifold.project_point(DVector::from_column_slice(p.as_slice())).coords().clone())?);
    }
    Ok(points)
}

/// Hyperboloid points whose first `d` coordinates are `N(0, 1/d)` draws;
/// the time coordinate is solved from the constraint.
pub fn generate_hyperbolic_dataset(dim: usize, count: usize, seed: u64) -> Result<Vec<Point>> {
    let manifold = Manifold::hyperboloid(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sd = (1.0 / dim as f64).sqrt();
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let mut coords = DVector::zeros(dim + 1);
        for i in 0..dim {
            coords[i] = sd * rng.sample::<f64, _>(StandardNormal);
        }
        points.push(manifold.project_point(coords));
    }
    Ok(points)
}

/// Computes a reference optimum by running gradient descent from `x0` until
/// the gradient norm falls below `grad_tol`, with the safe step size
/// `min(1/L, 1/(zeta mu))` when `mu` is declared and `1/L` otherwise.
pub fn reference_optimum(
    problem: &Problem,
    x0: &Point,
    grad_tol: f64,
    max_iters: usize,
) -> Result<(Point, f64)> {
    let step = match problem.strong_convexity() {
        Some(mu) => {
            let zeta = problem.bounds().zeta();
            (1.0 / problem.smoothness()).min(1.0 / (zeta * mu))
        }
        None => 1.0 / problem.smoothness(),
    };
    let mut x = x0.clone();
    let mut oracle = |p: &Point| problem.gradient(p);
    for _ in 0..max_iters {
        let (next, g) = optim::rgd_step(&x, step, &mut oracle)?;
        if g.norm() <= grad_tol {
            let value = problem.objective(&x);
            return Ok((x, value));
        }
        x = next;
    }
    let g = problem.gradient(&x);
    if g.norm() <= grad_tol {
        Ok((x.clone(), problem.objective(&x)))
    } else {
        Err(Error::Config(format!(
            "reference run did not reach gradient tolerance {grad_tol} in {max_iters} iterations \
             (final norm {})",
            g.norm()
        )))
    }
}

/// Ensures the problem carries an optimum, computing a reference one when
/// absent. The starting point is drawn from the domain sampler with `seed`.
pub fn ensure_optimum(problem: Problem, seed: u64) -> Result<Problem> {
    if problem.optimum().is_some() {
        return Ok(problem);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = problem.sample_domain(&mut rng);
    let (x_star, f_star) = reference_optimum(&problem, &x0, 1e-12, 100_000)?;
    Ok(problem.with_optimum(x_star, f_star))
}
