//! First-order optimizers: Riemannian gradient descent, the accelerated
//! momentum schemes for the convex and strongly convex regimes, and their
//! flat-space reference recursions.
//!
//! Each method is a stepwise state machine; `run` drives one and emits a
//! trace row per iteration. A single run is strictly sequential, but states
//! are plain values and distinct runs share nothing.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::manifold::{Manifold, ManifoldKind, Point, TangentVector};
use crate::problems::Problem;

/// Optimization method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rgd,
    RnagC,
    RnagSc,
    NagCEuclidean,
    NagScEuclidean,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Rgd => "rgd",
            Method::RnagC => "rnag_c",
            Method::RnagSc => "rnag_sc",
            Method::NagCEuclidean => "nag_c_euclidean",
            Method::NagScEuclidean => "nag_sc_euclidean",
        }
    }

    pub fn parse(name: &str) -> Option<Method> {
        match name {
            "rgd" => Some(Method::Rgd),
            "rnag_c" => Some(Method::RnagC),
            "rnag_sc" => Some(Method::RnagSc),
            "nag_c_euclidean" => Some(Method::NagCEuclidean),
            "nag_sc_euclidean" => Some(Method::NagScEuclidean),
            _ => None,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Full configuration of one optimizer run.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub method: Method,
    pub step_size: f64,
    /// Friction parameter; used by the momentum methods.
    pub xi: f64,
    /// Offset parameter of the convex momentum scheme.
    pub t_param: f64,
    /// Strong convexity parameter; used by the `*_sc` methods.
    pub mu: f64,
    pub max_iters: usize,
    /// Stop once the most recent oracle gradient norm falls below this
    /// value; zero disables the rule (fixed iteration budget).
    pub stop_grad_tol: f64,
    /// When set, the run tracks the max pairwise distance among visited
    /// points and flags records that exceed the bound.
    pub diameter_guard: Option<f64>,
}

impl OptimizerConfig {
    pub fn new(method: Method, step_size: f64, max_iters: usize) -> OptimizerConfig {
        OptimizerConfig {
            method,
            step_size,
            xi: 1.0,
            t_param: 4.0,
            mu: 0.0,
            max_iters,
            stop_grad_tol: 0.0,
            diameter_guard: None,
        }
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    pub fn with_t_param(mut self, t: f64) -> Self {
        self.t_param = t;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_stop_grad_tol(mut self, tol: f64) -> Self {
        self.stop_grad_tol = tol;
        self
    }

    pub fn with_diameter_guard(mut self, guard: f64) -> Self {
        self.diameter_guard = Some(guard);
        self
    }

    /// Validates parameter presence and theorem preconditions for `manifold`.
    pub fn validate(&self, manifold: &Manifold) -> Result<()> {
        if !(self.step_size > 0.0) {
            return Err(Error::Config(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        let needs_flat = matches!(self.method, Method::NagCEuclidean | Method::NagScEuclidean);
        if needs_flat && manifold.kind() != ManifoldKind::Euclidean {
            return Err(Error::Config(format!(
                "{} is defined on Euclidean space only, not {}",
                self.method,
                manifold.name()
            )));
        }
        match self.method {
            Method::Rgd => {}
            Method::RnagC | Method::NagCEuclidean => {
                if !(self.xi >= 1.0) {
                    return Err(Error::Config(format!(
                        "convex scheme needs xi >= 1, got {}",
                        self.xi
                    )));
                }
                if !(self.t_param > 0.0) {
                    return Err(Error::Config(format!(
                        "convex scheme needs T > 0, got {}",
                        self.t_param
                    )));
                }
            }
            Method::RnagSc | Method::NagScEuclidean => {
                if !(self.mu > 0.0) {
                    return Err(Error::Config(format!(
                        "strongly convex scheme needs mu > 0, got {}",
                        self.mu
                    )));
                }
                if !(self.xi >= 1.0) {
                    return Err(Error::Config(format!(
                        "strongly convex scheme needs xi >= 1, got {}",
                        self.xi
                    )));
                }
                let root_xi_q = (self.xi * self.mu * self.step_size).sqrt();
                if root_xi_q >= 1.0 {
                    return Err(Error::Config(format!(
                        "sqrt(xi * mu * s) = {root_xi_q} >= 1; shrink the step size"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Gradient oracle: returns the Riemannian gradient at the query point.
pub type GradientOracle<'a> = dyn FnMut(&Point) -> TangentVector + 'a;

/// Iterate state of the momentum schemes: the pair `(x_k, vbar_k)` plus the
/// previous step's intermediates, retained for the potential monitors.
#[derive(Debug, Clone)]
pub struct RnagState {
    pub k: usize,
    pub x: Point,
    /// Momentum vector attached at `x`; zero at `k = 0`.
    pub vbar: TangentVector,
    pub last_y: Option<Point>,
    /// The intermediate `v` of the previous step, attached at `last_y`.
    pub last_v: Option<TangentVector>,
    /// Norm of the most recent oracle gradient; NaN before the first call.
    pub last_grad_norm: f64,
}

impl RnagState {
    pub fn initial(x0: Point) -> RnagState {
        let vbar = x0.manifold().zero_tangent(&x0);
        RnagState { k: 0, x: x0, vbar, last_y: None, last_v: None, last_grad_norm: f64::NAN }
    }
}

/// Parameters of one convex-scheme step.
#[derive(Debug, Clone, Copy)]
pub struct RnagCParams {
    pub step_size: f64,
    pub xi: f64,
    pub t_param: f64,
}

/// Parameters of one strongly-convex-scheme step.
#[derive(Debug, Clone, Copy)]
pub struct RnagScParams {
    pub step_size: f64,
    pub xi: f64,
    pub mu: f64,
}

/// Intermediates of one momentum step, for monitors and invariant checks.
#[derive(Debug, Clone)]
pub struct RnagStepInfo {
    pub y: Point,
    /// `v_k`, attached at `y`.
    pub v: TangentVector,
    /// The pre-transport update vector, attached at `y`.
    pub vbarbar: TangentVector,
    /// Oracle gradient at `y`.
    pub grad: TangentVector,
    /// Largest tangent norm handed to the exponential map this step.
    pub max_exp_norm: f64,
}

/// One step of gradient descent: `x' = exp_x(-s grad f(x))`.
pub fn rgd_step(
    x: &Point,
    step_size: f64,
    grad: &mut GradientOracle,
) -> Result<(Point, TangentVector)> {
    let g = grad(x);
    let next = x.manifold().exp(&g.scale(-step_size));
    Ok((next, g))
}

/// One step of the convex momentum scheme, in the printed order: momentum
/// point, gradient, descent step, then the transported updates. The
/// intermediate `v` depends only on `(x, y, vbar)` and is computed right
/// after `y`. Exactly one gradient-oracle call.
pub fn rnag_c_step(
    state: &RnagState,
    params: &RnagCParams,
    grad: &mut GradientOracle,
) -> Result<(RnagState, RnagStepInfo)> {
    let lambda = (state.k as f64 + 2.0 * params.xi + params.t_param) / 2.0;
    if lambda <= params.xi {
        return Err(Error::Config(format!(
            "lambda_k = {lambda} <= xi = {}; momentum coefficient undefined",
            params.xi
        )));
    }
    let tau = params.xi / (lambda + params.xi - 1.0);
    let gamma_over_s = lambda / params.xi;
    momentum_step(state, params.step_size, tau, grad, |v, g| {
        v.sub(&g.scale(params.step_size * gamma_over_s))
    })
}

/// One step of the strongly convex momentum scheme.
///
/// The step itself tolerates the boundary `sqrt(xi q) = 1` (where the scheme
/// degenerates to exact one-step minimization when `mu = L`); the run-level
/// configuration check enforces the strict inequality the convergence
/// guarantee needs.
pub fn rnag_sc_step(
    state: &RnagState,
    params: &RnagScParams,
    grad: &mut GradientOracle,
) -> Result<(RnagState, RnagStepInfo)> {
    let q = params.mu * params.step_size;
    let root_xi_q = (params.xi * q).sqrt();
    if root_xi_q > 1.0 + 1e-12 {
        return Err(Error::Config(format!("sqrt(xi q) = {root_xi_q} > 1")));
    }
    let root_q_over_xi = (q / params.xi).sqrt();
    let tau = root_xi_q / (1.0 + root_xi_q);
    let mu = params.mu;
    momentum_step(state, params.step_size, tau, grad, |v, g| {
        v.scale(1.0 - root_q_over_xi).add(&g.scale(-root_q_over_xi / mu))
    })
}

/// Shared five-line skeleton of both momentum schemes; `mix` forms the
/// pre-transport update from `(v, grad)`.
fn momentum_step(
    state: &RnagState,
    step_size: f64,
    tau: f64,
    grad: &mut GradientOracle,
    mix: impl Fn(&TangentVector, &TangentVector) -> TangentVector,
) -> Result<(RnagState, RnagStepInfo)> {
    let manifold = state.x.manifold();

    let momentum = state.vbar.scale(tau);
    let y = manifold.exp(&momentum);
    let log_x_y = manifold.log(&state.x, &y)?;
    let v = manifold.transport(&state.vbar.sub(&log_x_y), &y)?;

    let g = grad(&y);
    let descent = g.scale(-step_size);
    let x_next = manifold.exp(&descent);

    let vbarbar = mix(&v, &g);
    let log_y_xn = manifold.log(&y, &x_next)?;
    let vbar_next = manifold.transport(&vbarbar.sub(&log_y_xn), &x_next)?;

    let max_exp_norm = momentum.norm().max(descent.norm());
    let next = RnagState {
        k: state.k + 1,
        x: x_next,
        vbar: vbar_next,
        last_y: Some(y.clone()),
        last_v: Some(v.clone()),
        last_grad_norm: g.norm(),
    };
    Ok((next, RnagStepInfo { y, v, vbarbar, grad: g, max_exp_norm }))
}

/// Flat-space `(x, z)` recursion state; `z_0 = x_0`.
#[derive(Debug, Clone)]
pub struct NagEuclideanState {
    pub k: usize,
    pub x: Point,
    pub z: Point,
    pub last_grad_norm: f64,
}

impl NagEuclideanState {
    pub fn initial(x0: Point) -> NagEuclideanState {
        NagEuclideanState { k: 0, x: x0.clone(), z: x0, last_grad_norm: f64::NAN }
    }
}

/// Convexity regime of the flat-space recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NagMode {
    Convex,
    StronglyConvex,
}

#[derive(Debug, Clone, Copy)]
pub struct NagEuclideanParams {
    pub mode: NagMode,
    pub step_size: f64,
    pub xi: f64,
    pub t_param: f64,
    pub mu: f64,
}

impl NagEuclideanParams {
    /// Coefficients `(tau_k, beta_k, gamma_k)` of the three-line form at
    /// iteration `k`: `y = x + tau (z - x)`, `x' = y - s g`, and
    /// `z' = y + beta (z - y) - gamma g`.
    pub fn coefficients(&self, k: usize) -> (f64, f64, f64) {
        match self.mode {
            NagMode::Convex => {
                let lambda = (k as f64 + 2.0 * self.xi + self.t_param) / 2.0;
                (self.xi / (lambda + self.xi - 1.0), 1.0, self.step_size * lambda / self.xi)
            }
            NagMode::StronglyConvex => {
                let q = self.mu * self.step_size;
                let root_xi_q = (self.xi * q).sqrt();
                let root_q_over_xi = (q / self.xi).sqrt();
                (
                    root_xi_q / (1.0 + root_xi_q),
                    1.0 - root_q_over_xi,
                    root_q_over_xi / self.mu,
                )
            }
        }
    }
}

/// One step of the flat-space reference recursion; the oracle for the
/// flat-space equivalence tests of the manifold schemes.
pub fn nag_euclidean_step(
    state: &NagEuclideanState,
    params: &NagEuclideanParams,
    grad: &mut GradientOracle,
) -> Result<(NagEuclideanState, Point)> {
    let manifold = state.x.manifold();
    if manifold.kind() != ManifoldKind::Euclidean {
        return Err(Error::Config(format!(
            "flat-space recursion invoked on {}",
            manifold.name()
        )));
    }
    let (tau, beta, gamma) = params.coefficients(state.k);
    let x = state.x.coords();
    let z = state.z.coords();

    let y = x + (z - x) * tau;
    let y_point = manifold.point(y.clone())?;
    let g = grad(&y_point);
    let x_next = &y - g.coords() * params.step_size;
    let z_next = &y + (z - &y) * beta - g.coords() * gamma;

    let next = NagEuclideanState {
        k: state.k + 1,
        x: manifold.point(x_next)?,
        z: manifold.point(z_next)?,
        last_grad_norm: g.norm(),
    };
    Ok((next, y_point))
}

/// One trace row. `potential` and `dist_to_opt` are NaN when not recorded;
/// `wall_time_s` is elapsed seconds since the start of the run.
#[derive(Debug, Clone)]
pub struct TraceRecord {
    pub iter: usize,
    pub wall_time_s: f64,
    pub f_gap: f64,
    pub grad_norm: f64,
    pub potential: f64,
    pub dist_to_opt: f64,
    pub warnings: String,
}

/// Full run output. A runtime fault (cut locus) aborts iteration and is
/// recorded here rather than returned as an error.
#[derive(Debug, Clone)]
pub struct Trace {
    pub method: Method,
    pub records: Vec<TraceRecord>,
    pub fault: Option<String>,
    pub fault_iter: Option<usize>,
    pub final_point: Point,
}

impl Trace {
    pub fn final_gap(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.f_gap)
    }

    /// First iteration whose recorded gap is at or below `threshold`.
    pub fn first_iter_below(&self, threshold: f64) -> Option<usize> {
        self.records.iter().find(|r| r.f_gap <= threshold).map(|r| r.iter)
    }
}

/// What a monitor callback sees at record time.
///
/// During step `k` the view carries the pre-step iterate together with the
/// step's momentum point `y_k` and intermediate `v_k`; at the final record
/// those are absent and monitors anchor on `(x, vbar)` instead.
pub struct StateView<'a> {
    pub k: usize,
    pub x: &'a Point,
    pub vbar: Option<&'a TangentVector>,
    pub y: Option<&'a Point>,
    pub v: Option<&'a TangentVector>,
}

/// Monitor callback: maps a state view to the value stored in the
/// `potential` trace column (NaN meaning "not available").
pub type Monitor<'a> = dyn Fn(&StateView) -> f64 + 'a;

struct DiameterTracker {
    guard: f64,
    visited: Vec<Point>,
    max_pairwise: f64,
}

impl DiameterTracker {
    fn new(guard: f64, x0: &Point) -> DiameterTracker {
        DiameterTracker { guard, visited: vec![x0.clone()], max_pairwise: 0.0 }
    }

    fn insert(&mut self, manifold: &Manifold, p: &Point) -> bool {
        for q in &self.visited {
            let d = manifold.distance(p, q);
            if d > self.max_pairwise {
                self.max_pairwise = d;
            }
        }
        self.visited.push(p.clone());
        self.max_pairwise > self.guard
    }
}

struct Recorder<'a> {
    problem: &'a Problem,
    monitor: Option<&'a Monitor<'a>>,
    started: Instant,
    records: Vec<TraceRecord>,
    diameter: Option<DiameterTracker>,
}

impl<'a> Recorder<'a> {
    fn new(
        problem: &'a Problem,
        config: &OptimizerConfig,
        monitor: Option<&'a Monitor<'a>>,
        x0: &Point,
    ) -> Recorder<'a> {
        Recorder {
            problem,
            monitor,
            started: Instant::now(),
            records: Vec::with_capacity(config.max_iters + 1),
            diameter: config.diameter_guard.map(|g| DiameterTracker::new(g, x0)),
        }
    }

    /// Feeds newly visited points to the diameter guard; true if exceeded.
    fn observe(&mut self, points: &[&Point]) -> bool {
        let manifold = self.problem.manifold();
        match self.diameter.as_mut() {
            None => false,
            Some(tracker) => {
                let mut exceeded = false;
                for p in points {
                    exceeded |= tracker.insert(&manifold, p);
                }
                exceeded
            }
        }
    }

    fn push(&mut self, view: StateView, grad_norm: f64, warnings: String) {
        let manifold = self.problem.manifold();
        let (f_gap, dist_to_opt) = match self.problem.optimum() {
            Some((x_star, f_star)) => (
                self.problem.objective(view.x) - f_star,
                manifold.distance(view.x, x_star),
            ),
            None => (f64::NAN, f64::NAN),
        };
        let potential = self.monitor.map_or(f64::NAN, |m| m(&view));
        self.records.push(TraceRecord {
            iter: view.k,
            wall_time_s: self.started.elapsed().as_secs_f64(),
            f_gap,
            grad_norm,
            potential,
            dist_to_opt,
            warnings,
        });
    }
}

/// Drives a configured method from `x0` until the iteration budget or the
/// gradient-norm rule stops it. Runtime faults (cut locus) abort iteration
/// and are recorded in the returned trace; configuration problems are
/// returned as errors. Deterministic given `x0` and `config`.
pub fn run(
    problem: &Problem,
    config: &OptimizerConfig,
    x0: Point,
    monitor: Option<&Monitor>,
) -> Result<Trace> {
    let manifold = problem.manifold();
    config.validate(&manifold)?;
    problem.manifold().check_point(x0.coords())?;

    let mut recorder = Recorder::new(problem, config, monitor, &x0);
    let mut fault = None;
    let mut fault_iter = None;
    let injectivity = manifold.injectivity_radius();
    let mut oracle = |p: &Point| problem.gradient(p);

    macro_rules! abort_on_fault {
        ($result:expr, $k:expr) => {
            match $result {
                Ok(value) => value,
                Err(err) => {
                    let wrapped = err.at_iteration($k);
                    fault = Some(wrapped.to_string());
                    fault_iter = Some($k);
                    break;
                }
            }
        };
    }

    let final_point = match config.method {
        Method::Rgd => {
            let mut x = x0;
            let mut last_grad_norm = f64::NAN;
            let mut k = 0;
            while k < config.max_iters {
                let (x_next, g) =
                    abort_on_fault!(rgd_step(&x, config.step_size, &mut oracle), k);
                let grad_norm = g.norm();
                let mut warnings = Vec::new();
                if injectivity.is_finite() && config.step_size * grad_norm >= injectivity {
                    warnings.push("inj");
                }
                if recorder.observe(&[&x_next]) {
                    warnings.push("diam");
                }
                recorder.push(
                    StateView { k, x: &x, vbar: None, y: None, v: None },
                    grad_norm,
                    warnings.join("|"),
                );
                x = x_next;
                last_grad_norm = grad_norm;
                k += 1;
                if config.stop_grad_tol > 0.0 && grad_norm <= config.stop_grad_tol {
                    break;
                }
            }
            recorder.push(
                StateView { k, x: &x, vbar: None, y: None, v: None },
                last_grad_norm,
                String::new(),
            );
            x
        }
        Method::RnagC | Method::RnagSc => {
            let c_params = RnagCParams {
                step_size: config.step_size,
                xi: config.xi,
                t_param: config.t_param,
            };
            let sc_params =
                RnagScParams { step_size: config.step_size, xi: config.xi, mu: config.mu };
            let mut state = RnagState::initial(x0);
            while state.k < config.max_iters {
                let step = if config.method == Method::RnagC {
                    rnag_c_step(&state, &c_params, &mut oracle)
                } else {
                    rnag_sc_step(&state, &sc_params, &mut oracle)
                };
                let (next, info) = abort_on_fault!(step, state.k);
                let grad_norm = info.grad.norm();
                let mut warnings = Vec::new();
                if injectivity.is_finite() && info.max_exp_norm >= injectivity {
                    warnings.push("inj");
                }
                if recorder.observe(&[&info.y, &next.x]) {
                    warnings.push("diam");
                }
                recorder.push(
                    StateView {
                        k: state.k,
                        x: &state.x,
                        vbar: Some(&state.vbar),
                        y: Some(&info.y),
                        v: Some(&info.v),
                    },
                    grad_norm,
                    warnings.join("|"),
                );
                state = next;
                if config.stop_grad_tol > 0.0 && grad_norm <= config.stop_grad_tol {
                    break;
                }
            }
            recorder.push(
                StateView {
                    k: state.k,
                    x: &state.x,
                    vbar: Some(&state.vbar),
                    y: state.last_y.as_ref(),
                    v: state.last_v.as_ref(),
                },
                state.last_grad_norm,
                String::new(),
            );
            state.x
        }
        Method::NagCEuclidean | Method::NagScEuclidean => {
            let params = NagEuclideanParams {
                mode: if config.method == Method::NagCEuclidean {
                    NagMode::Convex
                } else {
                    NagMode::StronglyConvex
                },
                step_size: config.step_size,
                xi: config.xi,
                t_param: config.t_param,
                mu: config.mu,
            };
            let mut state = NagEuclideanState::initial(x0);
            while state.k < config.max_iters {
                let (next, _y) =
                    abort_on_fault!(nag_euclidean_step(&state, &params, &mut oracle), state.k);
                let grad_norm = next.last_grad_norm;
                let warnings =
                    if recorder.observe(&[&next.x]) { "diam".to_string() } else { String::new() };
                recorder.push(
                    StateView { k: state.k, x: &state.x, vbar: None, y: None, v: None },
                    grad_norm,
                    warnings,
                );
                state = next;
                if config.stop_grad_tol > 0.0 && grad_norm <= config.stop_grad_tol {
                    break;
                }
            }
            recorder.push(
                StateView { k: state.k, x: &state.x, vbar: None, y: None, v: None },
                state.last_grad_norm,
                String::new(),
            );
            state.x
        }
    };

    Ok(Trace { method: config.method, records: recorder.records, fault, fault_iter, final_point })
}
