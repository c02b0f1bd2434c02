//! Two-scale domain-decomposition solver for static Eikonal equations `r(x)|∇u| = 1`.
//!
//! A coarse skeleton solution and independent per-subdomain fine solves are
//! combined in a parareal-like correction loop with an adaptive relaxation
//! parameter θ.

// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod cli;
pub mod error;
pub mod grid;
pub mod metrics;
pub mod slowness;
pub mod sweep;
pub mod theta;
pub mod twoscale;

pub use error::{Error, Result};
