//! Continuous-time limit flows of the momentum schemes and the
//! discrete-versus-flow deviation experiment.
//!
//! The convex flow is `D_t y' + ((1 + 2 xi)/t) y' + grad f(y) = 0`; the
//! strongly convex flow replaces the friction coefficient with the constant
//! `(1/sqrt(xi) + sqrt(xi)) sqrt(mu)`. Integration is first-order
//! semi-implicit: the friction term is handled implicitly (the velocity
//! update divides by `1 + h c(t)`, so friction can never overshoot), the
//! gradient explicitly, and the velocity is moved by parallel transport.

use crate::error::{Error, Result};
use crate::manifold::{Point, TangentVector};
use crate::optim::{rnag_c_step, rnag_sc_step, GradientOracle, RnagCParams, RnagScParams, RnagState};
use crate::problems::Problem;

/// Flow kind, matching the discrete scheme it is the limit of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowKind {
    Convex,
    StronglyConvex,
}

#[derive(Debug, Clone, Copy)]
pub struct FlowParams {
    pub kind: FlowKind,
    pub xi: f64,
    /// Strong convexity constant; only read by the strongly convex flow.
    pub mu: f64,
}

impl FlowParams {
    fn friction(&self, t: f64) -> f64 {
        match self.kind {
            FlowKind::Convex => (1.0 + 2.0 * self.xi) / t,
            FlowKind::StronglyConvex => {
                (1.0 / self.xi.sqrt() + self.xi.sqrt()) * self.mu.sqrt()
            }
        }
    }
}

/// Integrator state: time, position, and velocity attached at the position.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub y: Point,
    pub v: TangentVector,
}

impl FlowState {
    /// At-rest state: `v = 0` at `y0`.
    pub fn at_rest(t0: f64, y0: Point) -> FlowState {
        let v = y0.manifold().zero_tangent(&y0);
        FlowState { t: t0, y: y0, v }
    }
}

/// One semi-implicit integrator step of size `h`.
pub fn flow_step(
    state: &FlowState,
    h: f64,
    params: &FlowParams,
    grad: &mut GradientOracle,
) -> Result<FlowState> {
    if !(h > 0.0) {
        return Err(Error::Config(format!("flow step size must be positive, got {h}")));
    }
    if params.kind == FlowKind::Convex && !(state.t > 0.0) {
        return Err(Error::DomainViolation(format!(
            "convex flow friction is singular at t = {}",
            state.t
        )));
    }
    let manifold = state.y.manifold();
    let g = grad(&state.y);
    let c = params.friction(state.t);
    let v_tilde = state.v.sub(&g.scale(h)).scale(1.0 / (1.0 + h * c));
    let y_next = manifold.exp(&v_tilde.scale(h));
    let v_next = manifold.transport(&v_tilde, &y_next)?;
    Ok(FlowState { t: state.t + h, y: y_next, v: v_next })
}

/// Configuration of the discrete-to-continuous comparison.
#[derive(Debug, Clone, Copy)]
pub struct OdeComparison {
    pub kind: FlowKind,
    pub xi: f64,
    /// Offset parameter of the discrete convex scheme.
    pub t_param: f64,
    pub mu: f64,
    /// Final flow time; the discrete run at step size `s` takes
    /// `ceil(horizon / sqrt(s))` iterations.
    pub horizon: f64,
    /// Reference integrator step; must be at most `min(s) / 100`.
    pub flow_step_size: f64,
    /// Number of comparison times, uniformly spaced over the horizon.
    pub sample_count: usize,
}

/// One ladder rung: a step size and its measured trajectory deviation.
#[derive(Debug, Clone, Copy)]
pub struct DeviationRow {
    pub s: f64,
    pub horizon: f64,
    pub max_deviation: f64,
    pub final_gap_discrete: f64,
    pub final_gap_flow: f64,
}

/// Runs the discrete scheme at each step size in `s_list` and measures the
/// maximum distance between the momentum iterates `y_k` and the flow
/// trajectory at the matched times `t = k sqrt(s)`.
///
/// The flow starts at rest at `t_0 = sqrt(s)` (the `k = 1` time, matching
/// the zero initial momentum and avoiding the `1/t` singularity), so the
/// comparison covers `k >= 1`.
pub fn discrete_vs_flow(
    problem: &Problem,
    x0: &Point,
    comparison: &OdeComparison,
    s_list: &[f64],
) -> Result<Vec<DeviationRow>> {
    if s_list.is_empty() {
        return Err(Error::Config("step-size ladder is empty".into()));
    }
    for pair in s_list.windows(2) {
        if !(pair[1] < pair[0]) {
            return Err(Error::Config(format!(
                "step-size ladder must be strictly decreasing, got {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    let s_min = *s_list.last().unwrap();
    if !(comparison.flow_step_size > 0.0) || comparison.flow_step_size > s_min / 100.0 {
        return Err(Error::Config(format!(
            "flow reference step {} must satisfy 0 < h <= min(s)/100 = {}",
            comparison.flow_step_size,
            s_min / 100.0
        )));
    }
    if !(comparison.horizon > 0.0) {
        return Err(Error::Config("horizon must be positive".into()));
    }

    let mut rows = Vec::with_capacity(s_list.len());
    for &s in s_list {
        rows.push(compare_one(problem, x0, comparison, s)?);
    }
    Ok(rows)
}

fn compare_one(
    problem: &Problem,
    x0: &Point,
    comparison: &OdeComparison,
    s: f64,
) -> Result<DeviationRow> {
    let manifold = problem.manifold();
    let sqrt_s = s.sqrt();
    let steps = (comparison.horizon / sqrt_s).ceil() as usize;
    let mut oracle = |p: &Point| problem.gradient(p);

    // Discrete trajectory of momentum points y_k; y_0 = x_0.
    let mut y_discrete = Vec::with_capacity(steps + 1);
    let mut state = RnagState::initial(x0.clone());
    let c_params = RnagCParams { step_size: s, xi: comparison.xi, t_param: comparison.t_param };
    let sc_params = RnagScParams { step_size: s, xi: comparison.xi, mu: comparison.mu };
    for _ in 0..steps {
        let (next, info) = match comparison.kind {
            FlowKind::Convex => rnag_c_step(&state, &c_params, &mut oracle)?,
            FlowKind::StronglyConvex => rnag_sc_step(&state, &sc_params, &mut oracle)?,
        };
        y_discrete.push(info.y);
        state = next;
    }
    let final_discrete = state.x.clone();

    // Comparison indices: sample_count targets over [1, steps].
    let mut targets: Vec<usize> = (1..=comparison.sample_count)
        .map(|j| ((j * steps) as f64 / comparison.sample_count as f64).round() as usize)
        .map(|k| k.clamp(1, steps))
        .collect();
    targets.dedup();

    // Reference flow from rest at t0 = sqrt(s); snapshot at each target time.
    let params = FlowParams { kind: comparison.kind, xi: comparison.xi, mu: comparison.mu };
    let mut flow = FlowState::at_rest(sqrt_s, x0.clone());
    let h = comparison.flow_step_size;
    let mut max_deviation = 0.0_f64;
    for &k in &targets {
        let target_t = k as f64 * sqrt_s;
        while flow.t < target_t - h / 2.0 {
            flow = flow_step(&flow, h, &params, &mut oracle)?;
        }
        // y_discrete[k-1] is y_k (pushed once per step starting at k = 1).
        let deviation = manifold.distance(&y_discrete[k - 1], &flow.y);
        max_deviation = max_deviation.max(deviation);
    }
    while flow.t < comparison.horizon - h / 2.0 {
        flow = flow_step(&flow, h, &params, &mut oracle)?;
    }

    let gap = |p: &Point| {
        problem.optimum().map_or(f64::NAN, |(_, f_star)| problem.objective(p) - f_star)
    };
    Ok(DeviationRow {
        s,
        horizon: comparison.horizon,
        max_deviation,
        final_gap_discrete: gap(&final_discrete),
        final_gap_flow: gap(&flow.y),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::Manifold;
    use crate::problems::{make_euclidean_quadratic, make_rayleigh};
    use nalgebra::dvector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn equilibrium_is_fixed() {
        let m = Manifold::spd(3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let y0 = m.random_point(&mut rng);
        let mut state = FlowState::at_rest(0.5, y0.clone());
        let params = FlowParams { kind: FlowKind::Convex, xi: 2.0, mu: 0.0 };
        let mut oracle = |p: &crate::manifold::Point| p.manifold().zero_tangent(p);
        for _ in 0..20 {
            state = flow_step(&state, 0.01, &params, &mut oracle).unwrap();
        }
        assert!(state.y.same_point(&y0));
        assert!(state.v.norm() < 1e-15);
    }

    #[test]
    fn strongly_convex_flow_dissipates_energy() {
        // Critically damped scalar oscillator: friction 2 sqrt(mu) at xi = 1.
        let mu = 4.0;
        let problem = make_euclidean_quadratic(1, mu, mu, 0).unwrap();
        let m = problem.manifold();
        let y0 = m.point(dvector![1.0]).unwrap();
        let mut state = FlowState::at_rest(0.0, y0);
        let params = FlowParams { kind: FlowKind::StronglyConvex, xi: 1.0, mu };
        let mut oracle = |p: &crate::manifold::Point| problem.gradient(p);
        let mut energy = problem.objective(&state.y) + 0.5 * state.v.norm().powi(2);
        for _ in 0..3000 {
            state = flow_step(&state, 1e-3, &params, &mut oracle).unwrap();
            let next = problem.objective(&state.y) + 0.5 * state.v.norm().powi(2);
            assert!(next <= energy + 1e-12, "energy rose: {energy} -> {next}");
            energy = next;
        }
        // Critically damped decay: y(3) ~ (1 + 6) e^{-6}.
        assert!(problem.objective(&state.y) < 1e-2, "flow should make progress");
    }

    #[test]
    fn implicit_friction_bounds_velocity_for_large_steps() {
        let problem = make_euclidean_quadratic(2, 1.0, 1.0, 0).unwrap();
        let m = problem.manifold();
        let y0 = m.point(dvector![1.0, -1.0]).unwrap();
        let state = FlowState::at_rest(1e-3, y0);
        let params = FlowParams { kind: FlowKind::Convex, xi: 1.0, mu: 0.0 };
        let mut oracle = |p: &crate::manifold::Point| problem.gradient(p);
        // Friction (1 + 2 xi)/t = 3000 dominates: (1 + h c) = 31 at h = 0.01.
        let next = flow_step(&state, 1e-2, &params, &mut oracle).unwrap();
        let grad_norm = problem.gradient(&next.y).norm();
        assert!(next.v.norm() <= grad_norm * 1e-2, "friction denominator caps the velocity");
    }

    #[test]
    fn flat_step_matches_damped_oscillator_arithmetic() {
        let problem = make_euclidean_quadratic(3, 2.0, 0.5, 0).unwrap();
        let m = problem.manifold();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let y0 = problem.sample_domain(&mut rng);
        let v0 = m.random_tangent(&y0, &mut rng);
        let state = FlowState { t: 0.7, y: y0.clone(), v: v0.clone() };
        let params = FlowParams { kind: FlowKind::Convex, xi: 1.5, mu: 0.0 };
        let h = 0.01;
        let mut oracle = |p: &crate::manifold::Point| problem.gradient(p);
        let next = flow_step(&state, h, &params, &mut oracle).unwrap();

        let c = (1.0 + 2.0 * params.xi) / state.t;
        let g = problem.gradient(&y0);
        let v_tilde = (v0.coords() - g.coords() * h) / (1.0 + h * c);
        let y_expected = y0.coords() + &v_tilde * h;
        assert!((next.y.coords() - &y_expected).amax() < 1e-15);
        assert!((next.v.coords() - &v_tilde).amax() < 1e-15);
    }

    #[test]
    fn halving_the_step_changes_the_endpoint_at_first_order() {
        let problem = make_rayleigh(6, 3).unwrap();
        let m = problem.manifold();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let y0 = problem.sample_domain(&mut rng);
        let params = FlowParams { kind: FlowKind::Convex, xi: 2.0, mu: 0.0 };
        let horizon = 1.0;
        let endpoint = |h: f64| {
            let mut state = FlowState::at_rest(0.05, y0.clone());
            let mut oracle = |p: &crate::manifold::Point| problem.gradient(p);
            let steps = (horizon / h).round() as usize;
            for _ in 0..steps {
                state = flow_step(&state, h, &params, &mut oracle).unwrap();
            }
            state.y
        };
        let coarse = endpoint(1e-2);
        let medium = endpoint(5e-3);
        let fine = endpoint(2.5e-3);
        let d1 = m.distance(&coarse, &medium);
        let d2 = m.distance(&medium, &fine);
        let ratio = d1 / d2;
        assert!((0.3..=3.0 * 2.0).contains(&ratio), "first-order refinement ratio {ratio}");
        assert!(d2 < d1, "refinement must contract");
    }

    #[test]
    fn convex_flow_rejects_nonpositive_time() {
        let m = Manifold::euclidean(2);
        let y0 = m.point(dvector![1.0, 0.0]).unwrap();
        let state = FlowState::at_rest(0.0, y0);
        let params = FlowParams { kind: FlowKind::Convex, xi: 1.0, mu: 0.0 };
        let mut oracle = |p: &crate::manifold::Point| p.manifold().zero_tangent(p);
        assert!(flow_step(&state, 0.1, &params, &mut oracle).is_err());
    }

    #[test]
    fn ladder_validation() {
        let problem = make_euclidean_quadratic(2, 1.0, 0.5, 0).unwrap();
        let m = problem.manifold();
        let x0 = m.point(dvector![1.0, 1.0]).unwrap();
        let base = OdeComparison {
            kind: FlowKind::Convex,
            xi: 1.0,
            t_param: 4.0,
            mu: 0.0,
            horizon: 1.0,
            flow_step_size: 1e-6,
            sample_count: 10,
        };
        assert!(discrete_vs_flow(&problem, &x0, &base, &[]).is_err(), "empty ladder");
        assert!(
            discrete_vs_flow(&problem, &x0, &base, &[1e-3, 1e-2]).is_err(),
            "ladder must decrease"
        );
        let coarse = OdeComparison { flow_step_size: 1e-3, ..base };
        assert!(
            discrete_vs_flow(&problem, &x0, &coarse, &[1e-3]).is_err(),
            "flow reference step equal to the discrete step must be refused"
        );
    }

    #[test]
    fn deviation_shrinks_down_the_ladder_on_a_quadratic() {
        let problem = make_euclidean_quadratic(4, 1.0, 0.25, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x0 = problem.sample_domain(&mut rng);
        let comparison = OdeComparison {
            kind: FlowKind::Convex,
            xi: 1.0,
            t_param: 4.0,
            mu: 0.0,
            horizon: 2.0,
            flow_step_size: 1e-6,
            sample_count: 50,
        };
        let rows = discrete_vs_flow(&problem, &x0, &comparison, &[1e-2, 1e-3, 1e-4]).unwrap();
        assert_eq!(rows.len(), 3);
        for pair in rows.windows(2) {
            assert!(
                pair[1].max_deviation < pair[0].max_deviation,
                "deviation must shrink: {} -> {}",
                pair[0].max_deviation,
                pair[1].max_deviation
            );
        }
    }
}
