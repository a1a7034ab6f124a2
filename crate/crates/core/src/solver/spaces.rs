use serde::Serialize;

use super::eigen::{eigen_solve, EigenOptions};
use crate::error::SolverError;
use crate::fnmodel::{PointAdd, TopicalFn, TopicalMap};
use crate::graphs::associated_graph;
use crate::metrics::bot;

/// Absolute tolerance of the componentwise comparisons in [`membership`].
pub const MEMBERSHIP_TOL: f64 = 1e-12;

const BYK_PRE_TOL: f64 = 1e-12;
const BISECTION_STEPS: usize = 80;
const BRACKET_LIMIT: f64 = 1.152_921_504_606_847e18; // 2^60

fn check_dim<M: TopicalMap>(f: &M, x: &PointAdd) -> Result<(), SolverError> {
    if x.len() != f.dim() {
        return Err(SolverError::InvalidArgument(format!(
            "point has dimension {}, map has dimension {}",
            x.len(),
            f.dim()
        )));
    }
    Ok(())
}

/// Turns a point of `S^λ(f^k)` into a point of `S^{λ/k}(f)`.
///
/// Returns `y = min_{0≤m<k} (f^m(x) − mλ/k)`. Requires `f^k(x) ≤ λ + x`;
/// the first coordinate where this fails (beyond `1e-12`) is reported.
pub fn byk_reduce<M: TopicalMap>(f: &M, x: &PointAdd, k: usize, lambda: f64) -> Result<PointAdd, SolverError> {
    check_dim(f, x)?;
    if k == 0 {
        return Err(SolverError::InvalidArgument("k must be at least 1".into()));
    }
    let step = lambda / k as f64;
    let mut y = x.as_slice().to_vec();
    let mut cur = y.clone();
    let mut next = vec![0.0; y.len()];
    for m in 1..=k {
        f.apply(&cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
        if cur.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite { iteration: m });
        }
        if m < k {
            let shift = m as f64 * step;
            for (yi, ci) in y.iter_mut().zip(&cur) {
                *yi = yi.min(ci - shift);
            }
        }
    }
    for (i, (fk, xi)) in cur.iter().zip(x.as_slice()).enumerate() {
        let excess = fk - lambda - xi;
        if excess > BYK_PRE_TOL {
            return Err(SolverError::Precondition { coordinate: i, excess });
        }
    }
    Ok(PointAdd::new(y)?)
}

/// Position of a point relative to `S^λ(f)`, `S_μ(f)` and `S^λ_μ(f)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Membership {
    /// `f(x) − x`.
    pub slack: Vec<f64>,
    /// `f(x) ≤ λ + x`, when `λ` was given.
    pub in_super: Option<bool>,
    /// `μ + x ≤ f(x)`, when `μ` was given.
    pub in_sub: Option<bool>,
    /// Both of the above, when both bounds were given.
    pub in_slice: Option<bool>,
}

pub fn membership<M: TopicalMap>(
    f: &M,
    x: &PointAdd,
    lambda: Option<f64>,
    mu: Option<f64>,
) -> Result<Membership, SolverError> {
    check_dim(f, x)?;
    if lambda.is_none() && mu.is_none() {
        return Err(SolverError::InvalidArgument("give at least one of lambda and mu".into()));
    }
    let fx = f.apply_vec(x.as_slice());
    let slack: Vec<f64> = fx.iter().zip(x.as_slice()).map(|(a, b)| a - b).collect();
    let in_super = lambda.map(|l| slack.iter().all(|s| *s <= l + MEMBERSHIP_TOL));
    let in_sub = mu.map(|m| slack.iter().all(|s| *s >= m - MEMBERSHIP_TOL));
    let in_slice = match (in_super, in_sub) {
        (Some(a), Some(b)) => Some(a && b),
        _ => None,
    };
    Ok(Membership {
        slack,
        in_super,
        in_sub,
        in_slice,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiameterBound {
    /// Every `x ∈ S^λ(f)` has Hilbert semi-norm at most this value.
    Bounded(f64),
    /// The associated graph is not strongly connected; no claim is made.
    Unbounded,
}

/// `sup{t ≥ 0 : f_a(t·e_b) ≤ s}` in additive coordinates, rounded up.
///
/// Returns 0 when even `t = 0` exceeds `s`; such a level admits no
/// normalized point, so any value is a valid bound there.
fn h_edge(f: &TopicalFn, a: usize, b: usize, s: f64) -> Result<f64, SolverError> {
    let n = f.dim();
    let coord = &f.coords()[a];
    let mut point = vec![0.0; n];
    let mut value = |t: f64| {
        point[b] = t;
        coord.eval(&point)
    };
    if value(0.0) > s {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while value(hi) <= s {
        lo = hi;
        hi *= 2.0;
        if hi > BRACKET_LIMIT {
            return Err(SolverError::Bracket { from: a, to: b });
        }
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if value(mid) <= s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Upper bound on the Hilbert diameter of the super-eigenspace `S^λ(f)`.
///
/// For an edge `a → b` of the associated graph and a point with `⊥x = 0`,
/// `f_a(x) ≤ λ + x_a` forces `x_b ≤ h_ab(λ + x_a)`. Composing these bounds
/// along walks from the coordinate where the minimum is attained bounds
/// every other coordinate; the result is maximized over that base coordinate.
pub fn super_diameter_bound(f: &TopicalFn, lambda: f64) -> Result<DiameterBound, SolverError> {
    if !lambda.is_finite() {
        return Err(SolverError::InvalidArgument("lambda must be finite".into()));
    }
    let n = f.dim();
    if n == 1 {
        return Ok(DiameterBound::Bounded(0.0));
    }
    let g = associated_graph(f);
    if !g.is_strongly_connected() {
        return Ok(DiameterBound::Unbounded);
    }
    let edges: Vec<(usize, usize)> = g.edges().filter(|(a, b)| a != b).collect();
    let mut worst = 0.0f64;
    for base in 0..n {
        let mut d = vec![f64::INFINITY; n];
        d[base] = 0.0;
        for _ in 0..n {
            let mut changed = false;
            for &(a, b) in &edges {
                if !d[a].is_finite() {
                    continue;
                }
                let cand = h_edge(f, a, b, lambda + d[a])?;
                if cand < d[b] {
                    d[b] = cand;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        worst = d.iter().fold(worst, |w, v| w.max(*v));
    }
    Ok(DiameterBound::Bounded(worst.max(0.0)))
}

/// Outcome of checking that some coordinate grows at least at the cycle-time rate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealizationCheck {
    /// The rate used; a rigorous lower bound for the lower cycle time.
    pub chi_hat: f64,
    /// `min_{1≤k≤k_max} (f_i^k(x) − x_i − k·chi_hat)` for each coordinate.
    pub margins: Vec<f64>,
    /// First coordinate whose margin is at least `-tol`.
    pub coordinate: Option<usize>,
}

/// Looks for `i` with `f_i^k(x) ≥ x_i + k·χ̂ − tol` for every `k ≤ k_max`.
///
/// `χ̂` is the larger of `⊥(f(v) − v)` at the solver's best eigenvector
/// estimate `v` and `⊥(f^K(0))/K` at the end of the solver's orbit. Both
/// never exceed the lower cycle time, so a failure means the horizon or
/// tolerance was too tight rather than a wrong rate.
pub fn coordinate_realization_check<M: TopicalMap>(
    f: &M,
    x: &PointAdd,
    k_max: usize,
    tol: f64,
) -> Result<RealizationCheck, SolverError> {
    check_dim(f, x)?;
    if k_max == 0 {
        return Err(SolverError::InvalidArgument("k_max must be at least 1".into()));
    }
    let opts = EigenOptions::default();
    let report = eigen_solve(f, &opts)?;
    let chi_hat = report.cw_lower.max(orbit_bottom_rate(f, opts.k_max)?);

    let n = f.dim();
    let mut margins = vec![f64::INFINITY; n];
    let mut cur = x.as_slice().to_vec();
    let mut next = vec![0.0; n];
    for k in 1..=k_max {
        f.apply(&cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
        for i in 0..n {
            let m = cur[i] - x.as_slice()[i] - k as f64 * chi_hat;
            margins[i] = margins[i].min(m);
        }
    }
    let coordinate = margins.iter().position(|m| *m >= -tol);
    Ok(RealizationCheck {
        chi_hat,
        margins,
        coordinate,
    })
}

fn orbit_bottom_rate<M: TopicalMap>(f: &M, k: usize) -> Result<f64, SolverError> {
    let mut x = vec![0.0; f.dim()];
    let mut next = x.clone();
    for it in 1..=k {
        f.apply(&x, &mut next);
        std::mem::swap(&mut x, &mut next);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite { iteration: it });
        }
    }
    Ok(bot(&x) / k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fnmodel::parse;

    fn p(v: &[f64]) -> PointAdd {
        PointAdd::new(v.to_vec()).unwrap()
    }

    fn swap() -> TopicalFn {
        parse("dim 2\n1: x2\n2: x1").unwrap()
    }

    #[test]
    fn byk_on_shift_and_swap() {
        let e = std::f64::consts::E;
        let f = parse(&format!("dim 1\n1: {e}*x1")).unwrap();
        let y = byk_reduce(&f, &p(&[0.0]), 2, 2.0).unwrap();
        assert!(y.as_slice()[0].abs() < 1e-12);
        let fy = f.apply_vec(y.as_slice());
        assert!(fy[0] <= 1.0 + y.as_slice()[0] + 1e-9);

        let y = byk_reduce(&swap(), &p(&[0.0, 0.0]), 2, 0.0).unwrap();
        assert_eq!(y.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn byk_reports_violated_coordinate() {
        let err = byk_reduce(&swap(), &p(&[0.0, 1.0]), 1, 0.0).unwrap_err();
        assert_eq!(
            err,
            SolverError::Precondition {
                coordinate: 0,
                excess: 1.0
            }
        );
    }

    #[test]
    fn membership_flags() {
        let f = swap();
        let m = membership(&f, &p(&[0.0, 1.0]), Some(1.0), Some(-1.0)).unwrap();
        assert_eq!(m.slack, vec![1.0, -1.0]);
        assert_eq!((m.in_super, m.in_sub, m.in_slice), (Some(true), Some(true), Some(true)));
        let m = membership(&f, &p(&[0.0, 1.0]), Some(0.5), None).unwrap();
        assert_eq!((m.in_super, m.in_sub, m.in_slice), (Some(false), None, None));
        assert!(membership(&f, &p(&[0.0, 0.0]), None, None).is_err());
    }

    #[test]
    fn swap_diameter_bound() {
        match super_diameter_bound(&swap(), 1.0).unwrap() {
            DiameterBound::Bounded(b) => assert!((1.0..=2.0).contains(&b), "{b}"),
            DiameterBound::Unbounded => panic!("swap has a strongly connected graph"),
        }
        assert_eq!(
            super_diameter_bound(&TopicalFn::identity(2), 1.0).unwrap(),
            DiameterBound::Unbounded
        );
        assert_eq!(
            super_diameter_bound(&TopicalFn::identity(1), 1.0).unwrap(),
            DiameterBound::Bounded(0.0)
        );
    }

    #[test]
    fn realization_on_swap() {
        let r = coordinate_realization_check(&swap(), &p(&[0.0, 1.0]), 50, 1e-9).unwrap();
        assert!(r.chi_hat.abs() < 1e-9);
        assert_eq!(r.coordinate, Some(0));
        assert!(r.margins[1] < -0.5);
    }
}
