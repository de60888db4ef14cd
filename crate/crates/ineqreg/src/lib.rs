//! Inequality measurement for distributions of a positive resource.
//!
//! The crate computes the four classical inequality curves (Lorenz,
//! Bonferroni, and the below-quantile concentration curves C and D) and
//! their summary indices, checks star-shaped / e- / r-orderings between
//! two distributions, and fits regression models whose coefficients
//! quantify covariate effects on inequality:
//!
//! - parametric Pareto and log-normal transformation regressions with
//!   closed-form conditional Lorenz curves ([`parametric`]),
//! - a semiparametric generalized Pareto (Cox partial likelihood) model
//!   with a Breslow baseline and plug-in conditional curves
//!   ([`semiparametric`]).
//!
//! All estimators consume a [`Sample`]: strictly positive responses
//! paired with covariate rows (intercept column first).

// `!(x > 0.0)` is used throughout so NaN inputs fail validation; the
// special-function coefficients keep their published digit counts.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod curves;
pub mod numerics;
pub mod orderings;
pub mod parametric;
pub mod sample;
pub mod semiparametric;

pub use curves::{CurveGrid, CurveSet, IndexSet, StepDistribution};
pub use sample::Sample;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid input data or arguments.
    #[error("{0}")]
    Validation(String),
    /// An iterative fit failed to converge.
    #[error("{0}")]
    Convergence(String),
    /// A numerical operation left its valid domain.
    #[error("{0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;
