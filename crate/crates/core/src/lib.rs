//! Numerical toolkit for the convex Gaussian min-max theorem (CGMT).
//!
//! The crate pairs a *primary* optimization (a random-matrix min-max problem
//! such as the cone-constrained LASSO) with its *auxiliary* optimization,
//! which only involves two Gaussian vectors and scalarizes to a min-max over
//! `(alpha, beta)`. On top of both sides sit closed-form error predictions
//! and seeded Monte Carlo campaigns that check the comparison inequalities
//! empirically.
//!
//! Module map:
//!
//! * [`ensembles`]: seeded Gaussian sampling and the chi mean `gamma_m`.
//! * [`geometry`]: descent cones, Euclidean projection, `D(h)` and Gaussian width.
//! * [`proxcalc`]: losses, conjugates and proximal operators.
//! * [`posolvers`]: first-order solvers for the primary problems.
//! * [`aoengine`]: auxiliary-problem evaluators and the deterministic curve `d(alpha)`.
//! * [`experiments`]: Monte Carlo campaigns and report serialization.
//!
//! Trials run on rayon when the `parallel` feature (on by default) is
//! enabled; without it every campaign runs serially with identical output.

pub mod aoengine;
pub mod ensembles;
mod error;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod posolvers;
pub mod proxcalc;

pub use error::{Error, Result};

/// Crate version embedded in every experiment report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
