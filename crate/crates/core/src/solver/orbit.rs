use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::SolverError;
use crate::fnmodel::{PointAdd, TopicalMap};
use crate::metrics::{bot, hilbert_seminorm, top};

/// The orbit `x0, f(x0), …, f^{k_max}(x0)` with per-step diagnostics.
#[derive(Clone, Debug)]
pub struct OrbitTrace {
    pub start: PointAdd,
    /// `iterates[k] = f^k(x0)`, `k = 0..=k_max`.
    pub iterates: Vec<PointAdd>,
    /// Hilbert semi-norm of each iterate (the spread of the normalized point).
    pub hilbert_diameters: Vec<f64>,
    /// `⊤(f^k(x0))/k` for `k = 1..=k_max`.
    pub top_over_k: Vec<f64>,
    /// `⊥(f^k(x0))/k` for `k = 1..=k_max`.
    pub bot_over_k: Vec<f64>,
}

fn check_dim<M: TopicalMap>(f: &M, x: &[f64]) -> Result<(), SolverError> {
    if x.len() != f.dim() {
        return Err(SolverError::InvalidArgument(format!(
            "point has dimension {}, map has dimension {}",
            x.len(),
            f.dim()
        )));
    }
    Ok(())
}

pub fn orbit<M: TopicalMap>(f: &M, x0: &PointAdd, k_max: usize) -> Result<OrbitTrace, SolverError> {
    if k_max == 0 {
        return Err(SolverError::InvalidArgument("k_max must be at least 1".into()));
    }
    check_dim(f, x0.as_slice())?;
    let mut iterates = Vec::with_capacity(k_max + 1);
    let mut hilbert_diameters = Vec::with_capacity(k_max + 1);
    let mut top_over_k = Vec::with_capacity(k_max);
    let mut bot_over_k = Vec::with_capacity(k_max);
    iterates.push(x0.clone());
    hilbert_diameters.push(hilbert_seminorm(x0.as_slice()));
    let mut x = x0.as_slice().to_vec();
    let mut next = vec![0.0; x.len()];
    for k in 1..=k_max {
        f.apply(&x, &mut next);
        std::mem::swap(&mut x, &mut next);
        let point = PointAdd::new(x.clone()).map_err(|_| SolverError::NonFinite { iteration: k })?;
        hilbert_diameters.push(hilbert_seminorm(&x));
        top_over_k.push(top(&x) / k as f64);
        bot_over_k.push(bot(&x) / k as f64);
        iterates.push(point);
    }
    Ok(OrbitTrace {
        start: x0.clone(),
        iterates,
        hilbert_diameters,
        top_over_k,
        bot_over_k,
    })
}

/// Estimates of the upper and lower cycle times from the orbit of 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CycleTimeEstimate {
    pub k: usize,
    /// `⊤(f^k(0))/k` at `k = k_max`. Always an upper bound for the upper cycle time.
    pub upper_at_k: f64,
    /// `⊥(f^k(0))/k` at `k = k_max`. Always a lower bound for the lower cycle time.
    pub lower_at_k: f64,
    /// Mean increment of `⊤(f^k(0))` over the last quarter of the orbit.
    pub upper_tail: f64,
    /// Mean increment of `⊥(f^k(0))` over the last quarter of the orbit.
    pub lower_tail: f64,
}

impl CycleTimeEstimate {
    /// `(chi_upper_est, chi_lower_est)` from the tail averages.
    pub fn estimates(&self) -> (f64, f64) {
        (self.upper_tail, self.lower_tail)
    }
}

pub(crate) fn tail_window(k_max: usize) -> usize {
    (k_max / 4).max(1)
}

/// Runs `f` from 0 for `k_max` steps and returns `⊤`, `⊥` of every iterate (index 0 is the start).
pub(crate) fn top_bot_sequence<M: TopicalMap>(
    f: &M,
    k_max: usize,
) -> Result<(Vec<f64>, Vec<f64>), SolverError> {
    let n = f.dim();
    let mut x = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut tops = Vec::with_capacity(k_max + 1);
    let mut bots = Vec::with_capacity(k_max + 1);
    tops.push(0.0);
    bots.push(0.0);
    for k in 1..=k_max {
        f.apply(&x, &mut next);
        std::mem::swap(&mut x, &mut next);
        let (t, b) = (top(&x), bot(&x));
        if !(t.is_finite() && b.is_finite()) {
            return Err(SolverError::NonFinite { iteration: k });
        }
        tops.push(t);
        bots.push(b);
    }
    Ok((tops, bots))
}

pub(crate) fn estimate_from_sequences(tops: &[f64], bots: &[f64]) -> CycleTimeEstimate {
    let k = tops.len() - 1;
    let q = tail_window(k);
    CycleTimeEstimate {
        k,
        upper_at_k: tops[k] / k as f64,
        lower_at_k: bots[k] / k as f64,
        upper_tail: (tops[k] - tops[k - q]) / q as f64,
        lower_tail: (bots[k] - bots[k - q]) / q as f64,
    }
}

/// Cycle-time estimates `⊤(f^k(0))/k`, `⊥(f^k(0))/k` at `k = k_max`, plus
/// tail-averaged increments that cancel the bounded offset of the orbit.
pub fn cycle_times<M: TopicalMap>(f: &M, k_max: usize) -> Result<CycleTimeEstimate, SolverError> {
    if k_max == 0 {
        return Err(SolverError::InvalidArgument("k_max must be at least 1".into()));
    }
    let (tops, bots) = top_bot_sequence(f, k_max)?;
    Ok(estimate_from_sequences(&tops, &bots))
}

/// Radius of the box `[-R, R]^n` sampled by [`collatz_wielandt_upper`].
pub const CW_SAMPLE_RADIUS: f64 = 10.0;

/// `⊤(f(x) − x)`: the smallest `λ` with `x` in the super-eigenspace `S^λ(f)`.
pub fn collatz_wielandt_value<M: TopicalMap>(f: &M, x: &[f64]) -> f64 {
    let fx = f.apply_vec(x);
    fx.iter().zip(x).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max)
}

/// Minimum of `⊤(f(x) − x)` over `0`, the given anchors and `samples`
/// uniform points of `[-10, 10]^n`. An upper bound of the upper cycle time.
pub fn collatz_wielandt_upper<M: TopicalMap>(
    f: &M,
    samples: usize,
    seed: u64,
    anchors: &[PointAdd],
) -> Result<f64, SolverError> {
    if samples == 0 {
        return Err(SolverError::InvalidArgument("samples must be at least 1".into()));
    }
    let n = f.dim();
    for a in anchors {
        check_dim(f, a.as_slice())?;
    }
    let mut best = collatz_wielandt_value(f, &vec![0.0; n]);
    for a in anchors {
        best = best.min(collatz_wielandt_value(f, a.as_slice()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0; n];
    for _ in 0..samples {
        for v in x.iter_mut() {
            *v = rng.gen_range(-CW_SAMPLE_RADIUS..=CW_SAMPLE_RADIUS);
        }
        best = best.min(collatz_wielandt_value(f, &x));
    }
    Ok(best)
}
