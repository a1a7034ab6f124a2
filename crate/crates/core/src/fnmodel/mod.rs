//! Homogeneous monotone maps of the positive cone and their additive
//! (topical) counterparts.
//!
//! A [`TopicalFn`] is a vector of [`ExprNode`] trees. All evaluation is done
//! in additive coordinates `x = log y`; the multiplicative view is obtained
//! by conjugation with `exp`/`log`.

mod expr;
mod parser;

use std::fmt;

pub use expr::{log_sum_exp, Coef, ExprNode, Term, GEO_WEIGHT_TOL};
pub use parser::{parse, parse_expr};

use crate::error::ModelError;

/// A point of `R^n` in additive coordinates. All coordinates are finite.
#[derive(Clone, Debug, PartialEq)]
pub struct PointAdd(Vec<f64>);

impl PointAdd {
    pub fn new(coords: Vec<f64>) -> Result<Self, ModelError> {
        if let Some(index) = coords.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite { index });
        }
        Ok(PointAdd(coords))
    }

    pub fn zeros(n: usize) -> Self {
        PointAdd(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `exp` of every coordinate.
    pub fn to_multiplicative(&self) -> PointMul {
        PointMul(self.0.iter().map(|v| v.exp()).collect())
    }

    /// Shifts the point so that its smallest coordinate is zero.
    pub fn normalized_bottom(&self) -> PointAdd {
        let bot = self.0.iter().copied().fold(f64::INFINITY, f64::min);
        PointAdd(self.0.iter().map(|v| v - bot).collect())
    }
}

/// A point of the open positive cone `(R+)^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointMul(Vec<f64>);

impl PointMul {
    pub fn new(coords: Vec<f64>) -> Result<Self, ModelError> {
        for (index, v) in coords.iter().enumerate() {
            if !v.is_finite() {
                return Err(ModelError::NonFinite { index });
            }
            if *v <= 0.0 {
                return Err(ModelError::NonPositive { index });
            }
        }
        Ok(PointMul(coords))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_additive(&self) -> PointAdd {
        PointAdd(self.0.iter().map(|v| v.ln()).collect())
    }
}

/// A self-map of `R^n` that commutes with constant shifts and preserves order.
///
/// The numerical routines are generic over this trait so they can run on
/// parsed functions as well as on derived maps such as iterates.
pub trait TopicalMap {
    fn dim(&self) -> usize;

    /// Writes the image of `x` into `out`. Both slices have length [`TopicalMap::dim`].
    fn apply(&self, x: &[f64], out: &mut [f64]);

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply(x, &mut out);
        out
    }
}

impl<M: TopicalMap + ?Sized> TopicalMap for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        (**self).apply(x, out)
    }
}

/// The `times`-fold composition of a map with itself.
#[derive(Clone, Copy, Debug)]
pub struct Iterated<M> {
    pub map: M,
    pub times: usize,
}

impl<M: TopicalMap> TopicalMap for Iterated<M> {
    fn dim(&self) -> usize {
        self.map.dim()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
        let mut tmp = vec![0.0; x.len()];
        for _ in 0..self.times {
            self.map.apply(out, &mut tmp);
            out.copy_from_slice(&tmp);
        }
    }
}

/// A homogeneous monotone function, given coordinate by coordinate.
#[derive(Clone, Debug)]
pub struct TopicalFn {
    dim: usize,
    coords: Vec<ExprNode>,
    pub source: Option<String>,
    pub name: Option<String>,
}

impl PartialEq for TopicalFn {
    /// Structural equality of the trees; metadata is ignored.
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.coords == other.coords
    }
}

impl TopicalFn {
    pub fn new(dim: usize, coords: Vec<ExprNode>) -> Result<Self, ModelError> {
        if dim == 0 {
            return Err(ModelError::ZeroDimension);
        }
        if coords.len() != dim {
            return Err(ModelError::DimensionMismatch {
                expected: dim,
                got: coords.len(),
            });
        }
        for c in &coords {
            c.validate(dim)?;
        }
        Ok(TopicalFn {
            dim,
            coords,
            source: None,
            name: None,
        })
    }

    pub fn identity(dim: usize) -> Self {
        TopicalFn::new(dim, (0..dim).map(ExprNode::Var).collect()).expect("identity is valid")
    }

    /// The additive image `x ↦ log(A exp(x))` of a nonnegative matrix with no zero row.
    pub fn from_matrix(a: &[Vec<f64>]) -> Result<Self, ModelError> {
        let n = a.len();
        let coords = a
            .iter()
            .map(|row| {
                if row.len() != n {
                    return Err(ModelError::DimensionMismatch {
                        expected: n,
                        got: row.len(),
                    });
                }
                let terms = row
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w != 0.0)
                    .map(|(j, &w)| Ok(Term::new(Coef::from_f64(w)?, ExprNode::Var(j))))
                    .collect::<Result<Vec<_>, ModelError>>()?;
                Ok(ExprNode::Lin(terms))
            })
            .collect::<Result<Vec<_>, _>>()?;
        TopicalFn::new(n, coords)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[ExprNode] {
        &self.coords
    }

    /// `E(f)(x) = log f(exp x)`, computed directly in log coordinates.
    pub fn eval_additive(&self, x: &PointAdd) -> Result<PointAdd, ModelError> {
        if x.len() != self.dim {
            return Err(ModelError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        PointAdd::new(self.apply_vec(x.as_slice()))
    }

    pub fn eval_multiplicative(&self, y: &PointMul) -> Result<PointMul, ModelError> {
        let out = self.eval_additive(&y.to_additive())?.to_multiplicative();
        if let Some(index) = out.0.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(ModelError::NonFinite { index });
        }
        Ok(out)
    }

    /// The dual function `x ↦ -f(-x)`, i.e. `y ↦ f(y^{-1})^{-1}` multiplicatively.
    pub fn dual(&self) -> TopicalFn {
        TopicalFn {
            dim: self.dim,
            coords: self.coords.iter().map(ExprNode::dual).collect(),
            source: None,
            name: self.name.as_ref().map(|n| format!("{n}-dual")),
        }
    }

    /// Sufficient test for convexity in additive coordinates: no `min` and no `har` node.
    pub fn is_convex_syntactic(&self) -> bool {
        self.coords.iter().all(ExprNode::is_convex_syntactic)
    }

    /// Replaces the trees, keeping the dimension. Used by derived constructions.
    pub(crate) fn map_coords(&self, op: impl Fn(&ExprNode) -> ExprNode) -> TopicalFn {
        TopicalFn {
            dim: self.dim,
            coords: self.coords.iter().map(op).collect(),
            source: None,
            name: self.name.clone(),
        }
    }
}

impl TopicalMap for TopicalFn {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.coords) {
            *o = c.eval(x);
        }
    }
}

impl fmt::Display for TopicalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = &self.name {
            writeln!(f, "# {name}")?;
        }
        writeln!(f, "dim {}", self.dim)?;
        for (i, c) in self.coords.iter().enumerate() {
            writeln!(f, "{}: {}", i + 1, c)?;
        }
        Ok(())
    }
}
