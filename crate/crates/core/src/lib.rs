//! Projection methods for vertical road profile design.
//!
//! A vertical profile is a piecewise-linear spline through stations
//! `t_1 < ... < t_n` with elevations `x_1, ..., x_n`. Design rules become
//! constraint sets (fixed elevations, bounded slopes, bounded slope changes)
//! and this crate provides closed-form projectors onto them, the classic
//! feasibility and best-approximation projection algorithms built on those
//! projectors, a seeded generator for random test problems, and the metrics
//! used to compare algorithms on a batch.
//!
//! Batch evaluation fans out over `(algorithm, problem)` pairs with rayon when
//! the `parallel` feature is enabled (the default); without it every
//! [`Exec`] request runs sequentially.

pub mod bestapprox;
mod error;
pub mod exec;
pub mod feasibility;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod probgen;
pub mod problem;
pub mod product;
pub mod runner;
pub mod sets;
pub mod superior;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
pub use geometry::{Breakpoints, ConstraintSet, CurvatureBounds, InterpolationSpec, Mode, Parity, SlopeBounds};
pub use problem::FeasibilityProblem;
pub use runner::{AlgorithmId, Family, RunRecord, RunStatus};
pub use sets::Constraint;
