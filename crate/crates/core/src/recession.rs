//! Recession functions `f̂(x) = lim_{t→∞} f(t·x)/t` and the slice-space
//! boundedness certificate built on them.
//!
//! Within the grammar the limit always exists and is computed node by node:
//! additive constants vanish, `lin` becomes `max` and `har` becomes `min`.
//! If the only eigenvectors of `f̂` are constant vectors, every slice space
//! `S^λ_μ(f)` is bounded in the Hilbert semi-norm. That hypothesis cannot be
//! decided in general, so the certificate here is one-sided: a non-constant
//! fixed point of `f̂` is a proof of failure, while triviality is only ever
//! supported by the fixed points reached from a fixed family of starts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::fnmodel::{ExprNode, PointAdd, Term, TopicalFn, TopicalMap};
use crate::metrics::{bot, hilbert_seminorm, sup_distance};
use crate::solver::liminf_round;

/// Scale parameter of the numeric cross-check reported in [`RecessionResult`].
pub const AGREEMENT_SCALE: f64 = 1024.0;
const AGREEMENT_SAMPLES: usize = 20;
/// Fixed points farther than this from a constant vector count as nontrivial.
pub const NONTRIVIAL_SPREAD: f64 = 1e-6;
const FIXED_POINT_TOL: f64 = 1e-9;
/// Largest dimension for which every indicator start is enumerated.
pub const MAX_EXHAUSTIVE_DIM: usize = 16;
const FIXED_POINT_BUDGET: usize = 50_000;

#[derive(Clone, Debug)]
pub struct RecessionResult {
    pub fhat: TopicalFn,
    /// Always `"symbolic"`.
    pub method: &'static str,
    /// Largest `|f(t·x)/t − f̂(x)|` at `t = 1024` over seeded samples of `[-1, 1]^n`.
    pub numeric_agreement: f64,
}

/// The recession of one node.
pub fn recession_node(e: &ExprNode) -> ExprNode {
    let rec_terms = |ts: &[Term]| -> Vec<ExprNode> { ts.iter().map(|t| recession_node(&t.expr)).collect() };
    match e {
        ExprNode::Var(k) => ExprNode::Var(*k),
        ExprNode::Scale(_, child) => recession_node(child),
        ExprNode::Max(es) => ExprNode::Max(es.iter().map(recession_node).collect()),
        ExprNode::Min(es) => ExprNode::Min(es.iter().map(recession_node).collect()),
        ExprNode::Lin(ts) => ExprNode::Max(rec_terms(ts)),
        ExprNode::Har(ts) => ExprNode::Min(rec_terms(ts)),
        ExprNode::Geo(ts) => ExprNode::Geo(
            ts.iter()
                .map(|t| Term::new(t.weight.clone(), recession_node(&t.expr)))
                .collect(),
        ),
    }
}

pub fn recession(f: &TopicalFn) -> RecessionResult {
    let mut fhat = f.map_coords(recession_node);
    if let Some(name) = &f.name {
        fhat.name = Some(format!("{name} recession"));
    }
    let numeric_agreement = numeric_agreement(f, &fhat, AGREEMENT_SCALE, AGREEMENT_SAMPLES, 0);
    RecessionResult {
        fhat,
        method: "symbolic",
        numeric_agreement,
    }
}

/// `max |f(t·x)/t − f̂(x)|_∞` over `samples` seeded points of `[-1, 1]^n`.
pub fn numeric_agreement(f: &TopicalFn, fhat: &TopicalFn, t: f64, samples: usize, seed: u64) -> f64 {
    let n = f.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut x = vec![0.0; n];
    for _ in 0..samples {
        x.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..=1.0));
        let tx: Vec<f64> = x.iter().map(|v| v * t).collect();
        let scaled: Vec<f64> = f.apply_vec(&tx).iter().map(|v| v / t).collect();
        worst = worst.max(sup_distance(&scaled, &fhat.apply_vec(&x)));
    }
    worst
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Triviality {
    /// A non-constant fixed point was found and re-verified.
    CertifiedNontrivial,
    /// Every fixed point reached was constant. Not a proof.
    EvidenceTrivial,
}

impl Triviality {
    pub fn as_str(&self) -> &'static str {
        match self {
            Triviality::CertifiedNontrivial => "certified_nontrivial",
            Triviality::EvidenceTrivial => "evidence_trivial",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrivialityCheck {
    pub verdict: Triviality,
    /// Non-constant fixed point, normalized to `⊥ = 0`.
    pub witness: Option<PointAdd>,
    pub starts: usize,
    /// Indicator starts whose fixed-point iteration met the residual target.
    pub indicator_converged: usize,
    pub indicator_total: usize,
    /// Whether every fixed point reached from an indicator start was constant.
    pub indicators_collapse: bool,
    /// Whether all `2^n − 2` indicator starts were enumerated.
    pub exhaustive: bool,
}

/// Indicator vectors `1_J` (additive coordinates) for every nonempty proper `J`,
/// counting in binary with `x1` as the most significant bit.
fn indicator_starts(n: usize) -> impl Iterator<Item = Vec<f64>> {
    let total: u64 = 1u64 << n;
    (1..total - 1).map(move |mask| (0..n).map(|i| ((mask >> (n - 1 - i)) & 1) as f64).collect())
}

/// Drives `start` to a fixed point of a map with additive eigenvalue 0.
///
/// Returns the best point found (normalized to `⊥ = 0`) and its residual.
fn fixed_point<M: TopicalMap>(fhat: &M, start: &[f64]) -> (Vec<f64>, f64) {
    let n = start.len();
    let mut v = start.to_vec();
    let mut buf = vec![0.0; n];
    let mut window = 8usize;
    let mut used = 0usize;
    let mut best = (v.clone(), f64::INFINITY);
    loop {
        fhat.apply(&v, &mut buf);
        let res = sup_distance(&buf, &v);
        if res < best.1 {
            best = (v.clone(), res);
        }
        if res <= FIXED_POINT_TOL || used >= FIXED_POINT_BUDGET {
            break;
        }
        v = liminf_round(fhat, 0.0, &v, window, window);
        used += 2 * window;
        window = (2 * window).min(4096);
    }
    let (mut v, res) = best;
    let b = bot(&v);
    v.iter_mut().for_each(|x| *x -= b);
    (v, res)
}

/// Looks for a non-constant eigenvector of a recession function.
///
/// Starts from every indicator vector `1_J` (when `n ≤ 16`) and then from
/// `trials` seeded uniform points of `[-1, 1]^n`. Recession functions fix 0,
/// so their eigenvalue is 0 and fixed points of the unshifted map are sought.
pub fn trivial_eigenspace_check(fhat: &TopicalFn, trials: usize, seed: u64) -> TrivialityCheck {
    let n = fhat.dim();
    let exhaustive = n <= MAX_EXHAUSTIVE_DIM;
    let mut check = TrivialityCheck {
        verdict: Triviality::EvidenceTrivial,
        witness: None,
        starts: 0,
        indicator_converged: 0,
        indicator_total: 0,
        indicators_collapse: true,
        exhaustive,
    };
    let consider = |start: &[f64], indicator: bool, check: &mut TrivialityCheck| -> bool {
        check.starts += 1;
        let (v, res) = fixed_point(fhat, start);
        let converged = res <= FIXED_POINT_TOL;
        let spread = hilbert_seminorm(&v);
        if indicator {
            check.indicator_total += 1;
            if converged {
                check.indicator_converged += 1;
            }
            if !converged || spread > FIXED_POINT_TOL {
                check.indicators_collapse = false;
            }
        }
        if converged && spread > NONTRIVIAL_SPREAD {
            check.verdict = Triviality::CertifiedNontrivial;
            check.witness = Some(PointAdd::new(v).expect("finite fixed point"));
            return true;
        }
        false
    };
    if n >= 2 && exhaustive {
        for start in indicator_starts(n) {
            if consider(&start, true, &mut check) {
                return check;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let start: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if consider(&start, false, &mut check) {
            return check;
        }
    }
    check
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceStatus {
    /// Every slice space `S^λ_μ(f)` is bounded in the Hilbert semi-norm.
    BoundedCertified,
    Inconclusive,
}

impl SliceStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SliceStatus::BoundedCertified => "bounded_certified",
            SliceStatus::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SliceCertificate {
    pub status: SliceStatus,
    pub recession: RecessionResult,
    pub triviality: TrivialityCheck,
}

impl SliceCertificate {
    pub fn to_json(&self) -> serde_json::Value {
        let mut out = json!({
            "bounded_certified": self.status == SliceStatus::BoundedCertified,
            "status": self.status.as_str(),
            "triviality": self.triviality.verdict.as_str(),
            "fhat": self.recession.fhat.to_string(),
            "numeric_agreement": self.recession.numeric_agreement,
            "starts": self.triviality.starts,
            "exhaustive": self.triviality.exhaustive,
        });
        if let Some(w) = &self.triviality.witness {
            out["witness"] = json!(w.as_slice());
        }
        out
    }
}

/// Default number of random starts used by [`slice_bounded_certificate`].
pub const DEFAULT_TRIALS: usize = 64;

/// Certifies bounded slice spaces when `f̂` shows only constant fixed points.
///
/// Requires the triviality check to find no witness and, in addition, every
/// indicator start to converge to a constant vector. Dimensions above 16 are
/// always inconclusive, since the indicator family is then not enumerated.
pub fn slice_bounded_certificate(f: &TopicalFn, seed: u64) -> SliceCertificate {
    let recession = recession(f);
    let triviality = trivial_eigenspace_check(&recession.fhat, DEFAULT_TRIALS, seed);
    let certified = triviality.verdict == Triviality::EvidenceTrivial
        && triviality.exhaustive
        && triviality.indicators_collapse;
    SliceCertificate {
        status: if certified {
            SliceStatus::BoundedCertified
        } else {
            SliceStatus::Inconclusive
        },
        recession,
        triviality,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fnmodel::parse;

    const ILL: &str = "dim 3\n1: max(x2, x3)\n2: min(max(x1, x2), x3)\n3: min(max(x2, x3), x1)";
    const ILL2: &str = "dim 3\n1: lin(2*x2, 3*x3)\n2: har(1*lin(0.5*x1, 4*x2), 5*x3)\n3: har(1*lin(7*x2, 1/3*x3), 2*x1)";

    #[test]
    fn lin_recedes_to_max() {
        let f = parse("dim 2\n1: lin(1*x1, 1*x2)\n2: x2").unwrap();
        let r = recession(&f);
        assert_eq!(r.fhat, parse("dim 2\n1: max(x1, x2)\n2: x2").unwrap());
        assert!(r.numeric_agreement <= 2f64.ln() / 1024.0 + 1e-12);
    }

    #[test]
    fn ill_conditioned_pair() {
        let f = parse(ILL).unwrap();
        let g = parse(ILL2).unwrap();
        assert_eq!(recession(&g).fhat, f);
        assert_eq!(recession(&f).fhat, f);
        assert_eq!(slice_bounded_certificate(&g, 0).status, SliceStatus::BoundedCertified);
        assert_eq!(slice_bounded_certificate(&f, 0).status, SliceStatus::BoundedCertified);
    }

    #[test]
    fn identity_is_nontrivial() {
        let f = TopicalFn::identity(2);
        let c = trivial_eigenspace_check(&f, 4, 0);
        assert_eq!(c.verdict, Triviality::CertifiedNontrivial);
        assert_eq!(c.witness.unwrap().as_slice(), &[0.0, 1.0]);
        assert_eq!(slice_bounded_certificate(&f, 0).status, SliceStatus::Inconclusive);
    }

    #[test]
    fn swap_collapses_through_running_minimum() {
        let f = parse("dim 2\n1: x2\n2: x1").unwrap();
        let c = trivial_eigenspace_check(&f, 8, 3);
        assert_eq!(c.verdict, Triviality::EvidenceTrivial);
        assert!(c.indicators_collapse);
        assert_eq!(c.indicator_total, 2);
    }

    #[test]
    fn indicator_order() {
        let starts: Vec<Vec<f64>> = indicator_starts(2).collect();
        assert_eq!(starts, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(indicator_starts(4).count(), 14);
    }
}
