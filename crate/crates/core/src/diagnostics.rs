//! Runtime verification: potential-function monitors, sampled checks of the
//! metric-distortion inequalities, and gradient/smoothness validation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::GeometryBounds;
use crate::manifold::{Manifold, ManifoldKind, Point, TangentVector};
use crate::optim::StateView;
use crate::problems::Problem;

/// Which potential function a monitor evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    /// Convex momentum scheme: `s lambda_{k-1}^2 (f(x_k) - f*)
    /// + (xi/2) |vbar_k - log_{x_k}(x*)|^2 + (xi(xi-1)/2) |vbar_k|^2`.
    RnagC,
    /// Strongly convex momentum scheme, exponentially rescaled bracket
    /// `f(x_k) - f* + (mu/2) |v_k - log_{y_k}(x*)|^2 + (mu(xi-1)/2) |v_k|^2`.
    RnagSc,
    /// Gradient descent, convex regime:
    /// `s (k + zeta - 1)(f(x_k) - f*) + |log_{x_k}(x*)|^2 / 2`.
    RgdC,
    /// Gradient descent, strongly convex regime, rescaled bracket
    /// `f(x_k) - f* + (mu/2) |log_{x_k}(x*)|^2`.
    RgdSc,
}

impl PotentialKind {
    /// SC-kind potentials carry a `(1 - rate)^{-k}` factor and are monitored
    /// in log space to avoid overflow on long runs.
    pub fn log_space(&self) -> bool {
        matches!(self, PotentialKind::RnagSc | PotentialKind::RgdSc)
    }
}

/// Constants a potential monitor needs, plus the optimum it is anchored to.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub step_size: f64,
    pub xi: f64,
    pub t_param: f64,
    pub mu: f64,
    pub zeta: f64,
    pub x_star: Point,
    pub f_star: f64,
}

impl PotentialSpec {
    /// Assembles a spec from run parameters, pulling `zeta` from the
    /// problem's bounds and the optimum from its metadata.
    pub fn new(
        kind: PotentialKind,
        problem: &Problem,
        step_size: f64,
        xi: f64,
        t_param: f64,
        mu: f64,
    ) -> Result<PotentialSpec> {
        let (x_star, f_star) = problem
            .optimum()
            .ok_or_else(|| Error::Config("potential monitor needs a known optimum".into()))?;
        Ok(PotentialSpec {
            kind,
            step_size,
            xi,
            t_param,
            mu,
            zeta: problem.bounds().zeta(),
            x_star: x_star.clone(),
            f_star,
        })
    }

    /// Decay rate of the rescaling factor: `sqrt(q/xi)` for the momentum
    /// scheme, `mu s` for gradient descent, 0 for the convex kinds.
    fn rescale_rate(&self) -> f64 {
        match self.kind {
            PotentialKind::RnagSc => (self.mu * self.step_size / self.xi).sqrt(),
            PotentialKind::RgdSc => self.mu * self.step_size,
            _ => 0.0,
        }
    }
}

/// One potential evaluation.
///
/// For the convex kinds `monitor == bracket == phi_k`. For the SC kinds
/// `bracket` is the raw parenthesized term and `monitor` is
/// `ln(bracket) - k ln(1 - rate)`, the log of the rescaled potential; the
/// monitor value is the one to compare across iterations. Geometric failure
/// (cut locus) yields NaN fields rather than an error.
#[derive(Debug, Clone, Copy)]
pub struct PotentialValue {
    pub bracket: f64,
    pub monitor: f64,
    pub log_space: bool,
}

impl PotentialValue {
    fn nan(log_space: bool) -> PotentialValue {
        PotentialValue { bracket: f64::NAN, monitor: f64::NAN, log_space }
    }
}

/// Squared "distortion bracket" `|w - log_p(x*)|^2` plus `(c-1)|w|^2`,
/// shared by the momentum potentials. `None` on cut-locus failure.
fn anchored_bracket(
    manifold: &Manifold,
    p: &Point,
    w: &TangentVector,
    x_star: &Point,
    coeff: f64,
) -> Option<(f64, f64)> {
    let log = manifold.log(p, x_star).ok()?;
    let diff = w.sub(&log);
    Some((diff.norm().powi(2), coeff * w.norm().powi(2)))
}

/// Evaluates the potential named by `spec` on a state view.
///
/// The SC momentum potential is anchored at the step intermediates
/// `(v_k, y_k)` when the view carries them; at the final record (no further
/// step) it falls back to `(vbar_k, x_k)`, which the distortion inequalities
/// bound by the preceding mid-step value, so monotonicity is preserved.
pub fn potential(problem: &Problem, view: &StateView, spec: &PotentialSpec) -> PotentialValue {
    let manifold = problem.manifold();
    let log_space = spec.kind.log_space();
    let gap = problem.objective(view.x) - spec.f_star;
    let k = view.k as f64;

    let bracket = match spec.kind {
        PotentialKind::RnagC => {
            let Some(vbar) = view.vbar else {
                return PotentialValue::nan(log_space);
            };
            let lambda_prev = (k - 1.0 + 2.0 * spec.xi + spec.t_param) / 2.0;
            let Some((dist_sq, kinetic)) = anchored_bracket(
                &manifold,
                view.x,
                vbar,
                &spec.x_star,
                spec.xi * (spec.xi - 1.0),
            ) else {
                return PotentialValue::nan(log_space);
            };
            spec.step_size * lambda_prev * lambda_prev * gap
                + 0.5 * spec.xi * dist_sq
                + 0.5 * kinetic
        }
        PotentialKind::RnagSc => {
            let anchored = match (view.y, view.v) {
                (Some(y), Some(v)) => anchored_bracket(
                    &manifold,
                    y,
                    v,
                    &spec.x_star,
                    spec.xi - 1.0,
                ),
                _ => view.vbar.and_then(|vbar| {
                    anchored_bracket(&manifold, view.x, vbar, &spec.x_star, spec.xi - 1.0)
                }),
            };
            let Some((dist_sq, kinetic)) = anchored else {
                return PotentialValue::nan(log_space);
            };
            gap + 0.5 * spec.mu * dist_sq + 0.5 * spec.mu * kinetic
        }
        PotentialKind::RgdC => {
            let Ok(log) = manifold.log(view.x, &spec.x_star) else {
                return PotentialValue::nan(log_space);
            };
            spec.step_size * (k + spec.zeta - 1.0) * gap + 0.5 * log.norm().powi(2)
        }
        PotentialKind::RgdSc => {
            let Ok(log) = manifold.log(view.x, &spec.x_star) else {
                return PotentialValue::nan(log_space);
            };
            gap + 0.5 * spec.mu * log.norm().powi(2)
        }
    };

    if !log_space {
        return PotentialValue { bracket, monitor: bracket, log_space };
    }
    let rate = spec.rescale_rate();
    if !(rate > 0.0 && rate < 1.0) {
        return PotentialValue::nan(log_space);
    }
    // log phi_k = log(bracket) - k log(1 - rate); meaningful while the
    // bracket sits above the rounding noise of f(x) - f*.
    let monitor = bracket.max(f64::MIN_POSITIVE).ln() - k * (1.0 - rate).ln();
    PotentialValue { bracket, monitor, log_space }
}

/// Builds a monitor closure for [`crate::optim::run`] from a potential spec.
/// Takes the problem by value; it is cheaply cloneable.
pub fn potential_monitor(
    problem: Problem,
    spec: PotentialSpec,
) -> impl Fn(&StateView) -> f64 {
    move |view| potential(&problem, view, &spec).monitor
}

/// Configuration of a sampled distortion-inequality check.
#[derive(Debug, Clone)]
pub struct LemmaConfig {
    pub manifold: Manifold,
    pub samples: usize,
    /// Tangent norms and anchor offsets stay below this radius, keeping all
    /// sampled points inside the injectivity domain.
    pub radius_cap: f64,
    pub seed: u64,
    /// Geodesic fraction `r`; sampled uniformly when unset.
    pub r: Option<f64>,
    /// Override for `xi` in the second inequality; defaults to
    /// `zeta + 3(zeta - delta)` computed from the observed sample diameter.
    pub xi: Option<f64>,
}

impl LemmaConfig {
    pub fn new(manifold: Manifold, samples: usize, seed: u64) -> LemmaConfig {
        let radius_cap = match manifold.kind() {
            ManifoldKind::Sphere => 0.7,
            _ => 1.0,
        };
        LemmaConfig { manifold, samples, radius_cap, seed, r: None, xi: None }
    }
}

/// Outcome of a sampled inequality check.
#[derive(Debug, Clone)]
pub struct LemmaReport {
    pub samples: usize,
    /// Minimum of `(RHS - LHS) / (1 + RHS)` over the samples; the check
    /// passes when this stays above `-1e-8`.
    pub worst_slack: f64,
    pub worst_detail: String,
    pub zeta: f64,
    pub delta: f64,
    /// `xi` used by the second inequality; NaN for the first.
    pub xi: f64,
    pub observed_diameter: f64,
    pub hard_violations: usize,
    pub pass: bool,
}

const LEMMA_TOL: f64 = 1e-8;

struct LemmaSample {
    lhs_dist_sq: f64,
    lhs_norm_sq: f64,
    rhs_dist_sq: f64,
    rhs_norm_sq: f64,
    /// Extra slack term input of the second inequality: `(1/(1-r) - 1)|a|^2`.
    extra: f64,
    max_dist: f64,
    r: f64,
}

fn finish_report(
    config: &LemmaConfig,
    samples: Vec<LemmaSample>,
    use_xi: bool,
) -> Result<LemmaReport> {
    let observed = samples.iter().fold(0.0_f64, |m, s| m.max(s.max_dist));
    let (k_min, k_max) = config.manifold.curvature_bounds();
    let bounds = GeometryBounds::new(k_min, k_max, (1.05 * observed).max(1e-6))?;
    let zeta = bounds.zeta();
    let delta = bounds.delta()?;
    let coeff = if use_xi {
        config.xi.unwrap_or(zeta + 3.0 * (zeta - delta))
    } else {
        zeta
    };
    if use_xi && coeff < zeta {
        return Err(Error::DomainViolation(format!(
            "xi = {coeff} below zeta = {zeta}; the second inequality needs xi >= zeta"
        )));
    }

    let mut worst_slack = f64::INFINITY;
    let mut worst_detail = String::new();
    let mut hard_violations = 0;
    for (i, s) in samples.iter().enumerate() {
        let lhs = s.lhs_dist_sq + (coeff - 1.0) * s.lhs_norm_sq;
        let mut rhs = s.rhs_dist_sq + (coeff - 1.0) * s.rhs_norm_sq;
        if use_xi {
            rhs += 0.5 * (coeff - delta) * s.extra;
        }
        let slack = (rhs - lhs) / (1.0 + rhs);
        if slack < worst_slack {
            worst_slack = slack;
            worst_detail = format!(
                "sample {i}: r = {:.3}, lhs = {lhs:.6e}, rhs = {rhs:.6e}, max_dist = {:.3}",
                s.r, s.max_dist
            );
        }
        if slack < -LEMMA_TOL {
            hard_violations += 1;
        }
    }

    Ok(LemmaReport {
        samples: samples.len(),
        worst_slack,
        worst_detail,
        zeta,
        delta,
        xi: if use_xi { coeff } else { f64::NAN },
        observed_diameter: observed,
        hard_violations,
        pass: hard_violations == 0,
    })
}

/// Draws a reference point within `radius_cap` of `p`, rejecting cut-locus
/// configurations (which only arise on the sphere).
fn sample_target(
    manifold: &Manifold,
    p: &Point,
    cap: f64,
    rng: &mut ChaCha8Rng,
) -> (Point, TangentVector) {
    loop {
        let radius = cap * rng.random::<f64>();
        let w = manifold.random_tangent_with_norm(p, radius, rng);
        let x = manifold.exp(&w);
        if manifold.log(p, &x).is_ok() {
            return (x, w);
        }
    }
}

/// Checks the first distortion inequality on sampled configurations
/// `p_B = exp_{p_A}(r v_A)`, `r in [0, 1]`:
///
/// ```text
/// |v_B - log_{p_B}(x)|^2 + (zeta-1)|v_B|^2
///     <= |v_A - log_{p_A}(x)|^2 + (zeta-1)|v_A|^2,
/// v_B = transport(v_A - log_{p_A}(p_B)).
/// ```
///
/// `zeta` comes from the manifold curvature and 1.05x the observed sample
/// diameter.
pub fn check_lemma1(config: &LemmaConfig) -> Result<LemmaReport> {
    let manifold = config.manifold;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut samples = Vec::with_capacity(config.samples);
    while samples.len() < config.samples {
        let p_a = manifold.random_point(&mut rng);
        let norm_a = config.radius_cap * rng.random::<f64>();
        let v_a = manifold.random_tangent_with_norm(&p_a, norm_a, &mut rng);
        let r = config.r.unwrap_or_else(|| rng.random::<f64>());
        let (x, _) = sample_target(&manifold, &p_a, config.radius_cap, &mut rng);
        let p_b = manifold.exp(&v_a.scale(r));

        let (Ok(log_ab), Ok(log_ax), Ok(log_bx)) =
            (manifold.log(&p_a, &p_b), manifold.log(&p_a, &x), manifold.log(&p_b, &x))
        else {
            continue;
        };
        let Ok(v_b) = manifold.transport(&v_a.sub(&log_ab), &p_b) else {
            continue;
        };

        let max_dist = manifold
            .distance(&p_a, &x)
            .max(manifold.distance(&p_b, &x))
            .max(manifold.distance(&p_a, &p_b));
        samples.push(LemmaSample {
            lhs_dist_sq: v_b.sub(&log_bx).norm().powi(2),
            lhs_norm_sq: v_b.norm().powi(2),
            rhs_dist_sq: v_a.sub(&log_ax).norm().powi(2),
            rhs_norm_sq: v_a.norm().powi(2),
            extra: 0.0,
            max_dist,
            r,
        });
    }
    finish_report(config, samples, false)
}

/// Checks the second distortion inequality on sampled decompositions
/// `v_A = a + b`, `p_B = exp_{p_A}(r b)`, `r in (0, 1)`:
///
/// ```text
/// |v_B - log_{p_B}(x)|^2 + (xi-1)|v_B|^2
///     <= |v_A - log_{p_A}(x)|^2 + (xi-1)|v_A|^2
///        + (xi-delta)/2 (1/(1-r) - 1) |a|^2.
/// ```
pub fn check_lemma2(config: &LemmaConfig) -> Result<LemmaReport> {
    if let Some(r) = config.r {
        if !(0.0 < r && r < 1.0) {
            return Err(Error::DomainViolation(format!(
                "fixed r must lie in (0, 1), got {r}"
            )));
        }
    }
    let manifold = config.manifold;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut samples = Vec::with_capacity(config.samples);
    while samples.len() < config.samples {
        let p_a = manifold.random_point(&mut rng);
        let norm_a = config.radius_cap * rng.random::<f64>();
        let a = manifold.random_tangent_with_norm(&p_a, norm_a, &mut rng);
        let norm_b = config.radius_cap * rng.random::<f64>();
        let b = manifold.random_tangent_with_norm(&p_a, norm_b, &mut rng);
        let v_a = a.add(&b);
        let r = config.r.unwrap_or_else(|| 0.05 + 0.9 * rng.random::<f64>());
        let (x, _) = sample_target(&manifold, &p_a, config.radius_cap, &mut rng);
        let p_b = manifold.exp(&b.scale(r));

        let (Ok(log_ab), Ok(log_ax), Ok(log_bx)) =
            (manifold.log(&p_a, &p_b), manifold.log(&p_a, &x), manifold.log(&p_b, &x))
        else {
            continue;
        };
        let Ok(v_b) = manifold.transport(&v_a.sub(&log_ab), &p_b) else {
            continue;
        };

        let max_dist = manifold
            .distance(&p_a, &x)
            .max(manifold.distance(&p_b, &x))
            .max(manifold.distance(&p_a, &p_b));
        samples.push(LemmaSample {
            lhs_dist_sq: v_b.sub(&log_bx).norm().powi(2),
            lhs_norm_sq: v_b.norm().powi(2),
            rhs_dist_sq: v_a.sub(&log_ax).norm().powi(2),
            rhs_norm_sq: v_a.norm().powi(2),
            extra: (1.0 / (1.0 - r) - 1.0) * a.norm().powi(2),
            max_dist,
            r,
        });
    }
    finish_report(config, samples, true)
}

/// Compares the gradient oracle against geodesic central differences along
/// random unit directions; returns the largest relative error.
pub fn gradient_check(
    problem: &Problem,
    x: &Point,
    directions: usize,
    h: f64,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let manifold = problem.manifold();
    let grad = problem.gradient(x);
    let mut worst = 0.0_f64;
    for _ in 0..directions {
        let v = manifold.random_tangent_with_norm(x, 1.0, rng);
        let plus = problem.objective(&manifold.exp(&v.scale(h)));
        let minus = problem.objective(&manifold.exp(&v.scale(-h)));
        let finite_diff = (plus - minus) / (2.0 * h);
        let analytic = manifold.metric_pairing(&grad, &v);
        let err = (finite_diff - analytic).abs() / analytic.abs().max(1.0);
        worst = worst.max(err);
    }
    worst
}

/// Outcome of a sampled smoothness / strong-convexity probe.
#[derive(Debug, Clone)]
pub struct SmoothnessReport {
    pub pairs: usize,
    pub upper_violations: usize,
    pub lower_violations: usize,
    /// Most positive violation margin of the smoothness upper bound.
    pub worst_upper_margin: f64,
    /// Most positive violation margin of the strong-convexity lower bound.
    pub worst_lower_margin: f64,
    pub pass: bool,
}

/// Checks `f(y) <= f(x) + <grad f(x), log_x(y)> + (L/2)|log_x(y)|^2` on
/// random domain pairs, and the `mu`-strong-convexity lower counterpart when
/// `mu` is supplied. Margins are normalized by the terms' magnitude.
pub fn smoothness_probe(
    problem: &Problem,
    pairs: usize,
    l_claimed: f64,
    mu_claimed: Option<f64>,
    rng: &mut ChaCha8Rng,
) -> SmoothnessReport {
    let manifold = problem.manifold();
    let mut report = SmoothnessReport {
        pairs: 0,
        upper_violations: 0,
        lower_violations: 0,
        worst_upper_margin: f64::NEG_INFINITY,
        worst_lower_margin: f64::NEG_INFINITY,
        pass: true,
    };
    while report.pairs < pairs {
        let x = problem.sample_domain(rng);
        let y = problem.sample_domain(rng);
        let Ok(log) = manifold.log(&x, &y) else {
            continue;
        };
        let f_x = problem.objective(&x);
        let f_y = problem.objective(&y);
        let slope = manifold.metric_pairing(&problem.gradient(&x), &log);
        let sq = log.norm().powi(2);
        let scale = 1.0 + f_x.abs() + f_y.abs() + slope.abs() + l_claimed * sq;

        let upper = (f_y - (f_x + slope + 0.5 * l_claimed * sq)) / scale;
        report.worst_upper_margin = report.worst_upper_margin.max(upper);
        if upper > 1e-9 {
            report.upper_violations += 1;
        }
        if let Some(mu) = mu_claimed {
            let lower = ((f_x + slope + 0.5 * mu * sq) - f_y) / scale;
            report.worst_lower_margin = report.worst_lower_margin.max(lower);
            if lower > 1e-9 {
                report.lower_violations += 1;
            }
        }
        report.pairs += 1;
    }
    report.pass = report.upper_violations == 0 && report.lower_violations == 0;
    report
}
