//! Hausdorff distances between norm balls, their linear images, and
//! linear-system reach sets.
//!
//! The two-sided Hausdorff distance between compact convex sets equals the
//! supremum over unit directions of their support-function difference. For
//! unit norm balls the support functions are dual norms, which makes the
//! distance a difference-of-norms maximization over the Euclidean sphere.
//! This crate provides:
//!
//! - [`norms`]: `ℓp`, `D`-norm and `k`-largest-magnitude norms, duals,
//!   subgradients and Hölder conjugation;
//! - [`closed_form`]: exact distances between `ℓp` balls and between
//!   `D`-norm balls, and their maximizer sets;
//! - [`sphere_opt`]: multistart projected subgradient ascent for the
//!   nonconvex sphere programs, plus spherical-coordinate landscape grids;
//! - [`opnorm`]: `2→q` induced operator norms (exact at `q = 2`, a convex
//!   program for elementwise-nonnegative maps with `1 < q < 2`, numerical
//!   lower estimates otherwise) and the operator-norm upper bound on the
//!   mapped-ball distance;
//! - [`random_maps`]: Monte Carlo estimates of the expected distance for
//!   random maps and the corresponding termwise bound expressions;
//! - [`reachset`]: the set-valued integral generalization, covering reach
//!   sets of linear systems with norm-ball input uncertainty.

pub mod closed_form;
pub mod error;
pub mod norms;
pub mod opnorm;
pub mod random_maps;
pub mod reachset;
pub mod sphere_opt;

pub use error::{Error, Result};
pub use norms::{ExtendedReal, NormKind, NormSpec};
pub use sphere_opt::{SphereObjective, SphereOptConfig, SphereOptReport};

/// Row-major dense real matrix used throughout the crate.
pub type DenseMatrix = nalgebra::DMatrix<f64>;
/// Dense real vector used throughout the crate.
pub type DenseVector = nalgebra::DVector<f64>;
