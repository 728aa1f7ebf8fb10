//! Accelerated first-order optimization on Riemannian manifolds.
//!
//! The crate provides four model geometries (Euclidean space, the unit
//! sphere, SPD matrices with the affine-invariant metric, and the
//! hyperboloid), gradient descent and two accelerated momentum schemes on
//! them, potential-function monitors certifying the convergence guarantees
//! at runtime, sampled checks of the underlying metric-distortion
//! inequalities, and the continuous-time limit flows of the momentum
//! schemes.

pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod manifold;
pub mod optim;
pub mod problems;

pub use error::{Error, Result};
pub use geometry::{ConvexityMode, DerivedConstants, GeometryBounds};
pub use manifold::{Manifold, ManifoldKind, Point, TangentVector};
pub use optim::{Method, OptimizerConfig, Trace, TraceRecord};
pub use problems::{DatasetKind, DatasetSpec, Problem};
