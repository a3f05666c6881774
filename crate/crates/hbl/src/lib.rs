//! Hermitian metrics on twisted trivial bundles over flat complex tori:
//! generalized energy functionals, k-th power curvature equations,
//! positivity cones and a monotone metric flow.

pub mod config;
pub mod error;
pub mod bundle;
pub mod functional;
pub mod geometry;
pub mod hessian;
pub mod linalg;
pub mod report;
pub mod snapshot;
pub mod solver;
pub mod verify;

pub use error::{HblError, Result};
