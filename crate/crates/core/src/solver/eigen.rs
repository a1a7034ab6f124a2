use serde::Serialize;
use serde_json::json;

use super::orbit::{estimate_from_sequences, tail_window};
use crate::error::SolverError;
use crate::fnmodel::{PointAdd, TopicalMap};
use crate::metrics::{bot, hilbert_seminorm, top};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenStatus {
    Converged,
    /// The orbit spread kept growing; no boundedness certificate at this horizon.
    DivergedOrbit,
    MaxIter,
}

impl EigenStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            EigenStatus::Converged => "converged",
            EigenStatus::DivergedOrbit => "diverged_orbit",
            EigenStatus::MaxIter => "max_iter",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    /// Target for `‖f(v) − v − λ‖_∞`.
    pub tol: f64,
    /// Length of the orbit used to estimate the eigenvalue; the refinement
    /// stage gets the same budget again.
    pub k_max: usize,
    /// Spread of `f^k(0)` beyond which the orbit is declared unbounded.
    pub d_cap: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-9,
            k_max: 10_000,
            d_cap: 1e6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenReport {
    pub status: EigenStatus,
    /// `λ` with `f(v) ≈ v + λ`; the multiplicative eigenvalue is `exp λ`.
    pub eigenvalue_additive: f64,
    /// Best eigenvector found, normalized so that its smallest coordinate is 0.
    pub eigenvector: PointAdd,
    pub residual_sup: f64,
    pub iterations: usize,
    /// `⊥(f(v) − v)`, a lower bound for the lower cycle time.
    pub cw_lower: f64,
    /// `⊤(f(v) − v)`, an upper bound for the upper cycle time.
    pub cw_upper: f64,
}

impl EigenReport {
    pub fn converged(&self) -> bool {
        self.status == EigenStatus::Converged
    }

    pub fn eigenvalue_multiplicative(&self) -> f64 {
        self.eigenvalue_additive.exp()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "status": self.status.as_str(),
            "eigenvalue_additive": self.eigenvalue_additive,
            "eigenvalue_multiplicative": self.eigenvalue_multiplicative(),
            "eigenvector_additive": self.eigenvector.as_slice(),
            "eigenvector_multiplicative": self.eigenvector.to_multiplicative().as_slice(),
            "residual_sup": self.residual_sup,
            "iterations": self.iterations,
            "cw_lower": self.cw_lower,
            "cw_upper": self.cw_upper,
        })
    }
}

fn shift_to_bottom(v: &mut [f64]) {
    let b = bot(v);
    v.iter_mut().for_each(|x| *x -= b);
}

/// `(mean, ⊥, ⊤, max |d − mean|)` of `d = f(v) − v`.
fn residual_stats<M: TopicalMap>(f: &M, v: &[f64], buf: &mut [f64]) -> (f64, f64, f64, f64) {
    f.apply(v, buf);
    for (b, x) in buf.iter_mut().zip(v) {
        *b -= x;
    }
    let mean = buf.iter().sum::<f64>() / buf.len() as f64;
    let res = buf.iter().map(|d| (d - mean).abs()).fold(0.0, f64::max);
    (mean, bot(buf), top(buf), res)
}

/// One application of the coordinatewise lim-inf construction with a fixed shift.
///
/// Iterates `g = f − shift` from `start` for `steps` steps, takes the
/// coordinatewise minimum over the second half of the orbit and then
/// iterates `g` from that minimum for `descent` further steps. With the exact
/// eigenvalue as shift, the minimum `u` satisfies `g(u) ≤ u` and the descent is
/// nonincreasing towards a fixed point of `g`, even when the raw orbit cycles.
pub(crate) fn liminf_round<M: TopicalMap>(
    f: &M,
    shift: f64,
    start: &[f64],
    steps: usize,
    descent: usize,
) -> Vec<f64> {
    let n = start.len();
    let mut w = start.to_vec();
    let mut next = vec![0.0; n];
    let mut low = vec![f64::INFINITY; n];
    let half = steps / 2;
    for step in 1..=steps {
        f.apply(&w, &mut next);
        for (a, b) in w.iter_mut().zip(&next) {
            *a = b - shift;
        }
        if step > half {
            for (l, a) in low.iter_mut().zip(&w) {
                *l = l.min(*a);
            }
        }
    }
    let mut w = if steps == 0 { w } else { low };
    for _ in 0..descent {
        f.apply(&w, &mut next);
        for (a, b) in w.iter_mut().zip(&next) {
            *a = b - shift;
        }
    }
    w
}

/// Computes an additive eigenvector `f(v) = v + λ` from a bounded orbit.
///
/// 1. Runs the orbit of 0 for `k_max` steps, estimating `λ` from the mean
///    increment of `⊤(f^k(0))` over the last quarter and watching the
///    spread `⊤ − ⊥` of the iterates.
/// 2. Takes the coordinatewise minimum of `f^k(0) − kλ` over the last half
///    of that orbit.
/// 3. Refines with rounds of the same lim-inf construction, re-estimating
///    `λ` from `f(v) − v` before each round, until `‖f(v) − v − λ‖_∞ ≤ tol`.
///
/// A failure to converge is reported as [`EigenStatus::DivergedOrbit`] when
/// the spread grew through the last quarter of the orbit (or passed
/// `d_cap`), and as [`EigenStatus::MaxIter`] otherwise. Neither is a proof
/// that no eigenvector exists.
pub fn eigen_solve<M: TopicalMap>(f: &M, opts: &EigenOptions) -> Result<EigenReport, SolverError> {
    if !(opts.tol > 0.0) {
        return Err(SolverError::InvalidArgument("tol must be positive".into()));
    }
    if opts.k_max == 0 {
        return Err(SolverError::InvalidArgument("k_max must be at least 1".into()));
    }
    let n = f.dim();
    let k_max = opts.k_max;
    let mut buf = vec![0.0; n];

    // Phase 1: orbit of 0.
    let keep_from = k_max - k_max / 2;
    let mut tops = Vec::with_capacity(k_max + 1);
    let mut bots = Vec::with_capacity(k_max + 1);
    let mut spreads = Vec::with_capacity(k_max + 1);
    tops.push(0.0);
    bots.push(0.0);
    spreads.push(0.0);
    let mut kept: Vec<f64> = Vec::with_capacity((k_max / 2 + 1) * n);
    let mut x = vec![0.0; n];
    let mut iterations = 0usize;
    let mut blew_up = false;
    for k in 1..=k_max {
        f.apply(&x, &mut buf);
        std::mem::swap(&mut x, &mut buf);
        iterations += 1;
        let (t, b) = (top(&x), bot(&x));
        if !(t.is_finite() && b.is_finite()) {
            return Err(SolverError::NonFinite { iteration: k });
        }
        tops.push(t);
        bots.push(b);
        spreads.push(t - b);
        if k >= keep_from {
            kept.extend_from_slice(&x);
        }
        if t - b > opts.d_cap {
            blew_up = true;
            break;
        }
    }

    if blew_up {
        let mut v = x.clone();
        shift_to_bottom(&mut v);
        return Ok(report(f, EigenStatus::DivergedOrbit, v, iterations, &mut buf));
    }

    let lambda_hat = estimate_from_sequences(&tops, &bots).upper_tail;

    // Phase 2: coordinatewise minimum of the shifted tail.
    let mut v = vec![f64::INFINITY; n];
    for (offset, chunk) in kept.chunks(n).enumerate() {
        let k = (keep_from + offset) as f64;
        for (m, xi) in v.iter_mut().zip(chunk) {
            *m = m.min(xi - k * lambda_hat);
        }
    }
    shift_to_bottom(&mut v);

    // Phase 3: refinement rounds.
    let budget = k_max;
    let max_window = (k_max / 8).max(16);
    let mut window = (4 * n).max(16).min(max_window);
    let mut used = 0usize;
    let mut best_v = v.clone();
    let mut best_res = f64::INFINITY;
    loop {
        let (_, lo, hi, res) = residual_stats(f, &v, &mut buf);
        used += 1;
        if !res.is_finite() {
            return Err(SolverError::NonFinite { iteration: iterations + used });
        }
        if res < best_res {
            best_res = res;
            best_v.copy_from_slice(&v);
        }
        if res <= opts.tol || used >= budget {
            break;
        }
        let shift = 0.5 * (lo + hi);
        v = liminf_round(f, shift, &v, window, window);
        used += 2 * window;
        shift_to_bottom(&mut v);
        window = (2 * window).min(max_window);
    }
    iterations += used;

    let status = if best_res <= opts.tol {
        EigenStatus::Converged
    } else if spread_grew(&spreads) {
        EigenStatus::DivergedOrbit
    } else {
        EigenStatus::MaxIter
    };
    Ok(report(f, status, best_v, iterations, &mut buf))
}

/// Spread nondecreasing over the last quarter of the orbit, with a visible net increase.
fn spread_grew(spreads: &[f64]) -> bool {
    let k = spreads.len() - 1;
    if k < 4 {
        return false;
    }
    let q = tail_window(k);
    let tail = &spreads[k - q..];
    let monotone = tail.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    monotone && tail[tail.len() - 1] - tail[0] > 1e-6
}

fn report<M: TopicalMap>(
    f: &M,
    status: EigenStatus,
    v: Vec<f64>,
    iterations: usize,
    buf: &mut [f64],
) -> EigenReport {
    let (mean, lo, hi, res) = residual_stats(f, &v, buf);
    EigenReport {
        status,
        eigenvalue_additive: mean,
        eigenvector: PointAdd::new(v).expect("finite eigenvector"),
        residual_sup: res,
        iterations,
        cw_lower: lo,
        cw_upper: hi,
    }
}

/// Checks `hilbert_seminorm` of every iterate is bounded by `cap` along `steps` steps from `start`.
pub fn orbit_spread_bounded<M: TopicalMap>(f: &M, start: &[f64], steps: usize, cap: f64) -> bool {
    let mut x = start.to_vec();
    let mut next = vec![0.0; x.len()];
    for _ in 0..steps {
        f.apply(&x, &mut next);
        std::mem::swap(&mut x, &mut next);
        if !(hilbert_seminorm(&x) <= cap) {
            return false;
        }
    }
    true
}
