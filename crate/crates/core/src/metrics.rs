//! Order functionals, the supremum norm, the Hilbert semi-norm and
//! Hilbert's projective metric.

use serde::Serialize;

use crate::error::ModelError;
use crate::fnmodel::{PointAdd, PointMul};

/// Tolerance used by [`projectively_equal`].
pub const PROJECTIVE_TOL: f64 = 1e-10;

/// Largest coordinate, `⊤x`.
pub fn top(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest coordinate, `⊥x`.
pub fn bot(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn sup_norm(x: &[f64]) -> f64 {
    top(x).max(-bot(x))
}

/// `⊤x − ⊥x`; invariant under adding a constant to every coordinate.
pub fn hilbert_seminorm(x: &[f64]) -> f64 {
    top(x) - bot(x)
}

/// `‖x − y‖_∞`.
pub fn sup_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// `‖x − y‖_H`.
pub fn hilbert_distance(x: &[f64], y: &[f64]) -> f64 {
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    hilbert_seminorm(&diff)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeminormReport {
    pub top: f64,
    pub bot: f64,
    pub sup_norm: f64,
    pub hilbert: f64,
}

pub fn seminorms(x: &PointAdd) -> Result<SeminormReport, ModelError> {
    if x.is_empty() {
        return Err(ModelError::EmptyPoint);
    }
    let v = x.as_slice();
    let (t, b) = (top(v), bot(v));
    Ok(SeminormReport {
        top: t,
        bot: b,
        sup_norm: t.max(-b),
        hilbert: t - b,
    })
}

/// `d_H(y, z) = ‖log y − log z‖_H`.
pub fn hilbert_metric(y: &PointMul, z: &PointMul) -> Result<f64, ModelError> {
    if y.is_empty() {
        return Err(ModelError::EmptyPoint);
    }
    if y.len() != z.len() {
        return Err(ModelError::DimensionMismatch {
            expected: y.len(),
            got: z.len(),
        });
    }
    Ok(hilbert_distance(y.to_additive().as_slice(), z.to_additive().as_slice()))
}

/// Whether `y = λz` for some `λ > 0`, up to [`PROJECTIVE_TOL`].
pub fn projectively_equal(y: &PointMul, z: &PointMul) -> Result<bool, ModelError> {
    Ok(hilbert_metric(y, z)? <= PROJECTIVE_TOL)
}
