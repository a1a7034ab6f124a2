//! Expression trees for homogeneous monotone maps.
//!
//! Every constructor of [`ExprNode`] preserves homogeneity of degree one and
//! monotonicity on the positive cone, so any well-formed tree denotes a valid
//! coordinate function. Evaluation happens in additive (logarithmic)
//! coordinates, where these properties become `f(x + h) = f(x) + h` and
//! order preservation.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::ModelError;

/// A strictly positive coefficient.
///
/// The exact rational value is kept so that structural operations
/// (duality, pretty-printing, re-parsing) are lossless; the `f64` value
/// and its logarithm are cached for evaluation.
#[derive(Clone, Debug)]
pub struct Coef {
    ratio: BigRational,
    value: f64,
    ln: f64,
}

impl Coef {
    pub fn new(ratio: BigRational) -> Result<Self, ModelError> {
        if !ratio.is_positive() {
            return Err(ModelError::InvalidCoefficient(ratio.to_string()));
        }
        let value = ratio.to_f64().unwrap_or(f64::NAN);
        if !(value.is_finite() && value > 0.0) {
            return Err(ModelError::InvalidCoefficient(ratio.to_string()));
        }
        Ok(Coef {
            ln: value.ln(),
            ratio,
            value,
        })
    }

    /// Builds a coefficient from the shortest decimal representation of `v`.
    pub fn from_f64(v: f64) -> Result<Self, ModelError> {
        if !(v.is_finite() && v > 0.0) {
            return Err(ModelError::InvalidCoefficient(v.to_string()));
        }
        let ratio = parse_decimal(&format!("{v:e}"))
            .ok_or_else(|| ModelError::InvalidCoefficient(v.to_string()))?;
        Coef::new(ratio)
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self, ModelError> {
        if den == 0 {
            return Err(ModelError::InvalidCoefficient(format!("{num}/{den}")));
        }
        Coef::new(BigRational::new(num.into(), den.into()))
    }

    pub fn one() -> Self {
        Coef {
            ratio: BigRational::one(),
            value: 1.0,
            ln: 0.0,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn ln(&self) -> f64 {
        self.ln
    }

    pub fn ratio(&self) -> &BigRational {
        &self.ratio
    }

    pub fn recip(&self) -> Coef {
        let ratio = self.ratio.recip();
        let value = ratio.to_f64().unwrap_or(1.0 / self.value);
        Coef {
            ln: value.ln(),
            ratio,
            value,
        }
    }
}

impl PartialEq for Coef {
    fn eq(&self, other: &Self) -> bool {
        self.ratio == other.ratio
    }
}

impl Eq for Coef {}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_ratio(&self.ratio))
    }
}

/// Parses an unsigned decimal literal (`12`, `0.25`, `3e-2`) into an exact rational.
pub(crate) fn parse_decimal(text: &str) -> Option<BigRational> {
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i64>().ok()?),
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let scale = exponent - frac_part.len() as i64;
    if scale.unsigned_abs() > 4000 {
        return None;
    }
    let ten = BigInt::from(10u32);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    Some(if scale >= 0 {
        BigRational::from_integer(numer * pow)
    } else {
        BigRational::new(numer, pow)
    })
}

/// Exact decimal when the denominator has only factors 2 and 5, `n/d` otherwise.
fn format_ratio(r: &BigRational) -> String {
    let numer = r.numer();
    let denom = r.denom();
    if denom.is_one() {
        return numer.to_string();
    }
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let mut rest = denom.clone();
    let (mut twos, mut fives) = (0usize, 0usize);
    while rest.is_even() {
        rest /= &two;
        twos += 1;
    }
    while (&rest % &five).is_zero() {
        rest /= &five;
        fives += 1;
    }
    if !rest.is_one() {
        return format!("{numer}/{denom}");
    }
    let places = twos.max(fives);
    let scaled = numer * num_traits::pow(BigInt::from(10u32), places) / denom;
    let digits = scaled.to_string();
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    format!("{int_part}.{frac_part}")
}

/// A weighted child of a `lin`, `har` or `geo` node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub weight: Coef,
    pub expr: ExprNode,
}

impl Term {
    pub fn new(weight: Coef, expr: ExprNode) -> Self {
        Term { weight, expr }
    }
}

/// A node of the function grammar.
///
/// Variables are stored 0-based; the text format and all user-facing output
/// are 1-based. In multiplicative coordinates the nodes denote:
///
/// * `Var(k)`: `x_k`
/// * `Scale(c, e)`: `c·e`
/// * `Max`, `Min`: pointwise maximum and minimum
/// * `Lin`: `Σ w_i e_i`
/// * `Har`: `(Σ w_i / e_i)^{-1}`
/// * `Geo`: `Π e_i^{w_i}` with `Σ w_i = 1`
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprNode {
    Var(usize),
    Scale(Coef, Box<ExprNode>),
    Max(Vec<ExprNode>),
    Min(Vec<ExprNode>),
    Lin(Vec<Term>),
    Har(Vec<Term>),
    Geo(Vec<Term>),
}

/// Tolerance on `|Σ w - 1|` for geometric-mean weights.
pub const GEO_WEIGHT_TOL: f64 = 1e-12;

impl ExprNode {
    pub fn var(index: usize) -> Self {
        ExprNode::Var(index)
    }

    pub fn scale(c: Coef, e: ExprNode) -> Self {
        ExprNode::Scale(c, Box::new(e))
    }

    /// Evaluates the node in additive coordinates.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            ExprNode::Var(k) => x[*k],
            ExprNode::Scale(c, e) => c.ln() + e.eval(x),
            ExprNode::Max(es) => es
                .iter()
                .map(|e| e.eval(x))
                .fold(f64::NEG_INFINITY, f64::max),
            ExprNode::Min(es) => es.iter().map(|e| e.eval(x)).fold(f64::INFINITY, f64::min),
            ExprNode::Lin(ts) => log_sum_exp(ts.iter().map(|t| t.weight.ln() + t.expr.eval(x))),
            ExprNode::Har(ts) => {
                -log_sum_exp(ts.iter().map(|t| t.weight.ln() - t.expr.eval(x)))
            }
            ExprNode::Geo(ts) => ts.iter().map(|t| t.weight.value() * t.expr.eval(x)).sum(),
        }
    }

    /// Whether `lim_{u→∞} e(u·e_J) = ∞`, where `in_set[k]` marks membership of coordinate `k` in `J`.
    ///
    /// Exact for the grammar: `max`, `lin` and `geo` diverge as soon as one
    /// child does, `min` and `har` only when every child does.
    pub fn diverges(&self, in_set: &[bool]) -> bool {
        match self {
            ExprNode::Var(k) => in_set[*k],
            ExprNode::Scale(_, e) => e.diverges(in_set),
            ExprNode::Max(es) => es.iter().any(|e| e.diverges(in_set)),
            ExprNode::Min(es) => es.iter().all(|e| e.diverges(in_set)),
            ExprNode::Lin(ts) | ExprNode::Geo(ts) => ts.iter().any(|t| t.expr.diverges(in_set)),
            ExprNode::Har(ts) => ts.iter().all(|t| t.expr.diverges(in_set)),
        }
    }

    /// The dual node, denoting `x ↦ -e(-x)` in additive coordinates.
    pub fn dual(&self) -> ExprNode {
        let dual_terms =
            |ts: &[Term]| -> Vec<Term> { ts.iter().map(|t| Term::new(t.weight.clone(), t.expr.dual())).collect() };
        match self {
            ExprNode::Var(k) => ExprNode::Var(*k),
            ExprNode::Scale(c, e) => ExprNode::scale(c.recip(), e.dual()),
            ExprNode::Max(es) => ExprNode::Min(es.iter().map(ExprNode::dual).collect()),
            ExprNode::Min(es) => ExprNode::Max(es.iter().map(ExprNode::dual).collect()),
            ExprNode::Lin(ts) => ExprNode::Har(dual_terms(ts)),
            ExprNode::Har(ts) => ExprNode::Lin(dual_terms(ts)),
            ExprNode::Geo(ts) => ExprNode::Geo(dual_terms(ts)),
        }
    }

    /// True when no `min` or `har` node occurs below (and including) this node.
    pub fn is_convex_syntactic(&self) -> bool {
        match self {
            ExprNode::Var(_) => true,
            ExprNode::Scale(_, e) => e.is_convex_syntactic(),
            ExprNode::Max(es) => es.iter().all(ExprNode::is_convex_syntactic),
            ExprNode::Min(_) | ExprNode::Har(_) => false,
            ExprNode::Lin(ts) | ExprNode::Geo(ts) => {
                ts.iter().all(|t| t.expr.is_convex_syntactic())
            }
        }
    }

    /// Marks every variable occurring in the tree.
    pub fn collect_vars(&self, seen: &mut [bool]) {
        match self {
            ExprNode::Var(k) => {
                if let Some(slot) = seen.get_mut(*k) {
                    *slot = true;
                }
            }
            ExprNode::Scale(_, e) => e.collect_vars(seen),
            ExprNode::Max(es) | ExprNode::Min(es) => es.iter().for_each(|e| e.collect_vars(seen)),
            ExprNode::Lin(ts) | ExprNode::Har(ts) | ExprNode::Geo(ts) => {
                ts.iter().for_each(|t| t.expr.collect_vars(seen))
            }
        }
    }

    pub fn node_count(&self) -> usize {
        1 + match self {
            ExprNode::Var(_) => 0,
            ExprNode::Scale(_, e) => e.node_count(),
            ExprNode::Max(es) | ExprNode::Min(es) => es.iter().map(ExprNode::node_count).sum(),
            ExprNode::Lin(ts) | ExprNode::Har(ts) | ExprNode::Geo(ts) => {
                ts.iter().map(|t| t.expr.node_count()).sum()
            }
        }
    }

    /// Re-checks the structural conditions of the grammar against dimension `dim`.
    pub fn validate(&self, dim: usize) -> Result<(), ModelError> {
        match self {
            ExprNode::Var(k) => {
                if *k >= dim {
                    return Err(ModelError::VarOutOfRange { index: k + 1, dim });
                }
            }
            ExprNode::Scale(_, e) => e.validate(dim)?,
            ExprNode::Max(es) | ExprNode::Min(es) => {
                if es.is_empty() {
                    return Err(ModelError::EmptyNode(self.kind_name()));
                }
                for e in es {
                    e.validate(dim)?;
                }
            }
            ExprNode::Lin(ts) | ExprNode::Har(ts) | ExprNode::Geo(ts) => {
                if ts.is_empty() {
                    return Err(ModelError::EmptyNode(self.kind_name()));
                }
                if let ExprNode::Geo(_) = self {
                    let sum: BigRational = ts.iter().map(|t| t.weight.ratio().clone()).sum();
                    let sum = sum.to_f64().unwrap_or(f64::NAN);
                    if !((sum - 1.0).abs() <= GEO_WEIGHT_TOL) {
                        return Err(ModelError::GeoWeights { sum });
                    }
                }
                for t in ts {
                    t.expr.validate(dim)?;
                }
            }
        }
        Ok(())
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ExprNode::Var(_) => "var",
            ExprNode::Scale(..) => "scale",
            ExprNode::Max(_) => "max",
            ExprNode::Min(_) => "min",
            ExprNode::Lin(_) => "lin",
            ExprNode::Har(_) => "har",
            ExprNode::Geo(_) => "geo",
        }
    }
}

/// Max-shifted `log Σ exp(t)` computed in one streaming pass.
pub fn log_sum_exp(terms: impl IntoIterator<Item = f64>) -> f64 {
    let mut max = f64::NEG_INFINITY;
    let mut acc = 0.0;
    for t in terms {
        if t > max {
            acc = acc * (max - t).exp() + 1.0;
            max = t;
        } else {
            acc += (t - max).exp();
        }
    }
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + acc.ln()
}

impl fmt::Display for ExprNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list<T>(
            f: &mut fmt::Formatter<'_>,
            name: &str,
            items: &[T],
            item: impl Fn(&mut fmt::Formatter<'_>, &T) -> fmt::Result,
        ) -> fmt::Result {
            write!(f, "{name}(")?;
            for (i, it) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                item(f, it)?;
            }
            f.write_str(")")
        }
        match self {
            ExprNode::Var(k) => write!(f, "x{}", k + 1),
            ExprNode::Scale(c, e) => write!(f, "{c}*{e}"),
            ExprNode::Max(es) => list(f, "max", es, |f, e| write!(f, "{e}")),
            ExprNode::Min(es) => list(f, "min", es, |f, e| write!(f, "{e}")),
            ExprNode::Lin(ts) => list(f, "lin", ts, |f, t| write!(f, "{}*{}", t.weight, t.expr)),
            ExprNode::Har(ts) => list(f, "har", ts, |f, t| write!(f, "{}*{}", t.weight, t.expr)),
            ExprNode::Geo(ts) => list(f, "geo", ts, |f, t| write!(f, "{}:{}", t.expr, t.weight)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(parse_decimal("0.5").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_decimal("12").unwrap(), BigRational::from_integer(12.into()));
        assert_eq!(parse_decimal("2.5e-1").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(parse_decimal("3e2").unwrap(), BigRational::from_integer(300.into()));
        assert!(parse_decimal(".").is_none());
        assert!(parse_decimal("1.2.3").is_none());
    }

    #[test]
    fn ratio_formatting() {
        let c = |n: i64, d: i64| Coef::from_ratio(n, d).unwrap().to_string();
        assert_eq!(c(7, 1), "7");
        assert_eq!(c(1, 2), "0.5");
        assert_eq!(c(7, 4), "1.75");
        assert_eq!(c(1, 3), "1/3");
        assert_eq!(c(3, 40), "0.075");
        assert_eq!(Coef::from_f64(0.1).unwrap().to_string(), "0.1");
    }

    #[test]
    fn coefficient_must_be_positive() {
        assert!(Coef::from_ratio(0, 1).is_err());
        assert!(Coef::from_ratio(-1, 2).is_err());
        assert!(Coef::from_f64(f64::INFINITY).is_err());
        assert!(Coef::from_f64(-0.5).is_err());
    }

    #[test]
    fn recip_is_involutive() {
        let c = Coef::from_f64(0.3).unwrap();
        assert_eq!(c.recip().recip(), c);
        assert!((c.recip().value() - 1.0 / 0.3).abs() < 1e-15);
    }

    #[test]
    fn lse_is_stable() {
        assert!((log_sum_exp([0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        let big = log_sum_exp([700.0, 700.0, 1000.0]);
        assert!((big - 1000.0).abs() < 1e-12);
        let small = log_sum_exp([-1000.0, -1000.0]);
        assert!((small - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
