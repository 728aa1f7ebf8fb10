//! Curvature-and-diameter distortion constants and the parameter conditions
//! under which the accelerated schemes admit a monotone potential.

use crate::error::{Error, Result};

/// Sectional-curvature bounds and a diameter bound for the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryBounds {
    pub k_min: f64,
    pub k_max: f64,
    pub diameter: f64,
}

/// Distortion constants derived from [`GeometryBounds`].
///
/// `zeta >= 1` bounds metric expansion (from the curvature lower bound),
/// `delta <= 1` bounds contraction (from the upper bound; it drops below
/// zero once `sqrt(K_max) * D` exceeds `pi/2`), and `xi >= zeta` is the
/// scheme's friction parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub zeta: f64,
    pub delta: f64,
    pub xi: f64,
}

impl GeometryBounds {
    /// Validates `k_min <= k_max`, `diameter > 0`, and the positively curved
    /// domain restriction `diameter < pi / sqrt(k_max)`.
    pub fn new(k_min: f64, k_max: f64, diameter: f64) -> Result<GeometryBounds> {
        if !(k_min <= k_max) {
            return Err(Error::DomainViolation(format!(
                "curvature bounds out of order: k_min = {k_min} > k_max = {k_max}"
            )));
        }
        if !(diameter > 0.0) || !diameter.is_finite() {
            return Err(Error::DomainViolation(format!(
                "diameter must be positive and finite, got {diameter}"
            )));
        }
        if k_max > 0.0 && diameter >= std::f64::consts::PI / k_max.sqrt() {
            return Err(Error::DomainViolation(format!(
                "diameter {diameter} >= pi / sqrt(k_max) = {}",
                std::f64::consts::PI / k_max.sqrt()
            )));
        }
        Ok(GeometryBounds { k_min, k_max, diameter })
    }

    /// Flat bounds with a nominal unit diameter.
    pub fn flat() -> GeometryBounds {
        GeometryBounds { k_min: 0.0, k_max: 0.0, diameter: 1.0 }
    }

    pub fn zeta(&self) -> f64 {
        compute_zeta(self)
    }

    pub fn delta(&self) -> Result<f64> {
        compute_delta(self)
    }

    /// All derived constants with the recommended `xi = zeta + 3(zeta - delta)`.
    pub fn derived(&self) -> Result<DerivedConstants> {
        let zeta = self.zeta();
        let delta = self.delta()?;
        Ok(DerivedConstants { zeta, delta, xi: zeta + 3.0 * (zeta - delta) })
    }
}

/// `zeta = sqrt(-K_min) D coth(sqrt(-K_min) D)` for `K_min < 0`, else 1.
pub fn compute_zeta(bounds: &GeometryBounds) -> f64 {
    if bounds.k_min >= 0.0 {
        return 1.0;
    }
    x_coth_x((-bounds.k_min).sqrt() * bounds.diameter)
}

/// `delta = sqrt(K_max) D cot(sqrt(K_max) D)` for `K_max > 0`, else 1.
///
/// Errors when `sqrt(K_max) D >= pi`, where the comparison geometry breaks
/// down. The value is 1 at zero, crosses 0 at `pi/2`, and is negative beyond.
pub fn compute_delta(bounds: &GeometryBounds) -> Result<f64> {
    if bounds.k_max <= 0.0 {
        return Ok(1.0);
    }
    let x = bounds.k_max.sqrt() * bounds.diameter;
    if x >= std::f64::consts::PI {
        return Err(Error::DomainViolation(format!(
            "sqrt(K_max) * D = {x} >= pi; diameter bound violated"
        )));
    }
    Ok(x_cot_x(x))
}

// Taylor guards: both series share the Bernoulli-number coefficients
//   x coth x = 1 + x^2/3 - x^4/45 + 2x^6/945 - x^8/4725 + ...
//   x cot  x = 1 - x^2/3 - x^4/45 - 2x^6/945 - x^8/4725 - ...
// and are used below |x| = 1e-4 where the direct quotient cancels.

fn x_coth_x(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 3.0 - x2 * x2 / 45.0 + 2.0 * x2 * x2 * x2 / 945.0
            - x2 * x2 * x2 * x2 / 4725.0
    } else {
        x / x.tanh()
    }
}

fn x_cot_x(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 3.0 - x2 * x2 / 45.0 - 2.0 * x2 * x2 * x2 / 945.0
            - x2 * x2 * x2 * x2 / 4725.0
    } else {
        x / x.tan()
    }
}

/// Convexity regime a parameter set targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexityMode {
    Convex,
    StronglyConvex,
}

/// Recommended algorithm parameters for the given bounds and regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecommendedParams {
    pub xi: f64,
    /// Offset parameter of the convex scheme; unset in the strongly convex one.
    pub t_param: Option<f64>,
    pub step_size: f64,
    /// `q = mu * s`; only set in the strongly convex regime.
    pub q: Option<f64>,
}

/// Parameter recipes: `xi = zeta + 3(zeta - delta)` with `T = 4 xi`,
/// `s = 1/L` in the convex regime and `s = 1/(9 xi L)` in the strongly
/// convex one (where `sqrt(xi q) = sqrt(mu/L)/3 < 1` automatically).
pub fn recommended_params(
    bounds: &GeometryBounds,
    mode: ConvexityMode,
    smoothness: f64,
    strong_convexity: Option<f64>,
) -> Result<RecommendedParams> {
    if !(smoothness > 0.0) {
        return Err(Error::Config(format!("smoothness L must be positive, got {smoothness}")));
    }
    let constants = bounds.derived()?;
    let xi = constants.xi;
    match mode {
        ConvexityMode::Convex => Ok(RecommendedParams {
            xi,
            t_param: Some(4.0 * xi),
            step_size: 1.0 / smoothness,
            q: None,
        }),
        ConvexityMode::StronglyConvex => {
            let mu = strong_convexity.ok_or_else(|| {
                Error::Config("strongly convex mode requires mu".into())
            })?;
            if !(mu > 0.0) {
                return Err(Error::Config(format!("mu must be positive, got {mu}")));
            }
            if mu > smoothness {
                return Err(Error::Config(format!("mu = {mu} exceeds L = {smoothness}")));
            }
            let step_size = 1.0 / (9.0 * xi * smoothness);
            Ok(RecommendedParams { xi, t_param: None, step_size, q: Some(mu * step_size) })
        }
    }
}

/// Outcome of a parameter-condition check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    pub pass: bool,
    /// Largest violation `LHS - RHS` seen over the scanned range (negative
    /// values mean the condition held with room to spare).
    pub worst_slack: f64,
    /// Iteration index attaining `worst_slack`, or `None` when the
    /// asymptotic comparison dominates.
    pub worst_k: Option<usize>,
}

const CONDITION_TOL: f64 = 1e-12;

/// Checks, for `k = 0..=k_max_iter` and in the `k -> infinity` limit, that
///
/// ```text
/// (xi - delta)/2 (1/(1 - xi/lambda_k) - 1)
///     <= (xi - zeta) (1/(1 - xi/(lambda_k + xi - 1))^2 - 1)
/// ```
///
/// with `lambda_k = (k + 2 xi + T)/2`. Both sides vanish as `k` grows; the
/// limit is compared through the leading `1/lambda_k` coefficients,
/// `(xi - delta) xi / 2` against `2 xi (xi - zeta)`.
pub fn check_thm1_condition(
    xi: f64,
    t_param: f64,
    zeta: f64,
    delta: f64,
    k_max_iter: usize,
) -> Result<ConditionReport> {
    if !(xi >= 1.0) || !(t_param > 0.0) {
        return Err(Error::DomainViolation(format!(
            "need xi >= 1 and T > 0, got xi = {xi}, T = {t_param}"
        )));
    }
    let lambda_0 = (2.0 * xi + t_param) / 2.0;
    if lambda_0 <= xi {
        return Err(Error::DomainViolation(format!(
            "lambda_0 = {lambda_0} <= xi = {xi}; momentum coefficient undefined"
        )));
    }

    let mut worst_slack = f64::NEG_INFINITY;
    let mut worst_k = None;
    for k in 0..=k_max_iter {
        let lambda = (k as f64 + 2.0 * xi + t_param) / 2.0;
        let lhs = (xi - delta) / 2.0 * (1.0 / (1.0 - xi / lambda) - 1.0);
        let rhs = (xi - zeta) * (1.0 / (1.0 - xi / (lambda + xi - 1.0)).powi(2) - 1.0);
        let slack = lhs - rhs;
        if slack > worst_slack {
            worst_slack = slack;
            worst_k = Some(k);
        }
    }

    let limit_slack = (xi - delta) * xi / 2.0 - 2.0 * xi * (xi - zeta);
    if limit_slack > worst_slack {
        worst_slack = limit_slack;
        worst_k = None;
    }

    Ok(ConditionReport { pass: worst_slack <= CONDITION_TOL, worst_slack, worst_k })
}

/// Checks the strongly convex parameter condition
///
/// ```text
/// (xi - delta)/2 (1/(1 - sqrt(xi q)) - 1)(1 - sqrt(q/xi))^2
///     - sqrt(xi q) (1 - sqrt(q/xi))
///     <= (xi - zeta) ((1 + sqrt(xi q))^2 - 1)
/// ```
///
/// valid for `0 < q`, `xi >= 1`, and `sqrt(xi q) < 1`.
pub fn check_thm2_condition(xi: f64, q: f64, zeta: f64, delta: f64) -> Result<ConditionReport> {
    if !(q > 0.0) || !(xi >= 1.0) {
        return Err(Error::DomainViolation(format!("need q > 0 and xi >= 1, got q = {q}, xi = {xi}")));
    }
    let root_xi_q = (xi * q).sqrt();
    if root_xi_q >= 1.0 {
        return Err(Error::DomainViolation(format!("sqrt(xi q) = {root_xi_q} >= 1")));
    }
    let root_q_over_xi = (q / xi).sqrt();
    let lhs = (xi - delta) / 2.0 * (1.0 / (1.0 - root_xi_q) - 1.0) * (1.0 - root_q_over_xi).powi(2)
        - root_xi_q * (1.0 - root_q_over_xi);
    // 1/(1 - t/(1+t)) = 1 + t.
    let rhs = (xi - zeta) * ((1.0 + root_xi_q).powi(2) - 1.0);
    let slack = lhs - rhs;
    Ok(ConditionReport { pass: slack <= CONDITION_TOL, worst_slack: slack, worst_k: None })
}
