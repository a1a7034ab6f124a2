//! Nonlinear Perron-Frobenius analysis of homogeneous monotone maps.
//!
//! Functions are written in a small expression language (see [`fnmodel`])
//! that only admits homogeneous, order-preserving maps. On top of it the
//! crate builds the associated and aggregated graphs ([`graphs`]), the
//! Hilbert semi-norm and projective metric ([`metrics`]), orbit-based
//! eigenvector and cycle-time computations ([`solver`]) and recession-based
//! boundedness certificates ([`recession`]).

// Negated float comparisons are used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fnmodel;
pub mod graphs;
pub mod metrics;
pub mod recession;
pub mod solver;

pub use error::{ModelError, SolverError};
pub use fnmodel::{parse, ExprNode, PointAdd, PointMul, TopicalFn, TopicalMap};
