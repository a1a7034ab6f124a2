//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topical::{parse, TopicalFn};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn models_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("models")
}

pub fn model(name: &str) -> TopicalFn {
    let path = models_dir().join(format!("{name}.tfn"));
    parse(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

/// A coefficient in `[0.1, 10]` printed with three decimals.
fn coef(rng: &mut ChaCha8Rng) -> String {
    format!("{:.3}", rng.gen_range(0.1..10.0))
}

/// Geometric weights `a_i / s` with small integer numerators; they sum to exactly 1.
fn geo_weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<String> {
    let nums: Vec<u32> = (0..k).map(|_| rng.gen_range(1..=4)).collect();
    let s: u32 = nums.iter().sum();
    nums.iter().map(|a| format!("{a}/{s}")).collect()
}

/// Random expression text. `convex` excludes `min` and `har`.
pub fn expr_text(rng: &mut ChaCha8Rng, n: usize, depth: usize, convex: bool) -> String {
    if depth == 0 || rng.gen_bool(0.3) {
        let v = format!("x{}", rng.gen_range(1..=n));
        return if rng.gen_bool(0.3) { format!("{}*{v}", coef(rng)) } else { v };
    }
    let k = rng.gen_range(1..=3);
    let kinds: &[&str] = if convex {
        &["max", "lin", "geo", "scale"]
    } else {
        &["max", "min", "lin", "har", "geo", "scale"]
    };
    let kind = kinds[rng.gen_range(0..kinds.len())];
    let children: Vec<String> = (0..k).map(|_| expr_text(rng, n, depth - 1, convex)).collect();
    match kind {
        "scale" => format!("{}*{}", coef(rng), children[0]),
        "max" | "min" => format!("{kind}({})", children.join(", ")),
        "lin" | "har" => {
            let terms: Vec<String> = children.iter().map(|c| format!("{}*{c}", coef(rng))).collect();
            format!("{kind}({})", terms.join(", "))
        }
        "geo" => {
            let w = geo_weights(rng, k);
            let terms: Vec<String> = children.iter().zip(&w).map(|(c, w)| format!("{c}:{w}")).collect();
            format!("geo({})", terms.join(", "))
        }
        _ => unreachable!(),
    }
}

/// Source text of a random function of dimension `1..=max_dim`.
pub fn random_source(rng: &mut ChaCha8Rng, max_dim: usize, convex: bool) -> String {
    let n = rng.gen_range(1..=max_dim);
    let mut s = format!("dim {n}\n");
    for i in 1..=n {
        s.push_str(&format!("{i}: {}\n", expr_text(rng, n, 3, convex)));
    }
    s
}

pub fn random_fn(seed: u64, max_dim: usize, convex: bool) -> TopicalFn {
    let src = random_source(&mut rng(seed), max_dim, convex);
    parse(&src).unwrap_or_else(|e| panic!("generated source failed to parse: {e}\n{src}"))
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-r..=r)).collect()
}

/// The worked example with two geometric means per coordinate, parameters in order a, a', b, b', c, c'.
pub fn gex(p: [f64; 6]) -> TopicalFn {
    parse(&format!(
        "dim 3\n1: min({}*geo(x1:1/2, x2:1/2), {}*geo(x2:1/2, x3:1/2))\n2: max({}*geo(x2:1/2, x3:1/2), {}*geo(x3:1/2, x1:1/2))\n3: max({}*x1, {}*x3)",
        p[0], p[1], p[2], p[3], p[4], p[5]
    ))
    .unwrap()
}

/// The function whose recession is the ill-conditioned example.
pub fn ill2(p: [f64; 8]) -> TopicalFn {
    parse(&format!(
        "dim 3\n1: lin({}*x2, {}*x3)\n2: har(1*lin({}*x1, {}*x2), {}*x3)\n3: har(1*lin({}*x2, {}*x3), {}*x1)",
        p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7]
    ))
    .unwrap()
}

pub fn params<const K: usize>(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> [f64; K] {
    std::array::from_fn(|_| rng.gen_range(lo..=hi))
}

/// Divergence decided by evaluation: the coordinate at additive heights
/// `10^3` and `10^6` on `J` (0 elsewhere). Bounded coordinates stay below a
/// constant fixed by the coefficients; unbounded ones grow linearly.
pub fn probe_diverges(f: &TopicalFn, i: usize, j_set: &[usize]) -> bool {
    let at = |t: f64| {
        let mut x = vec![0.0; f.dim()];
        for &j in j_set {
            x[j] = t;
        }
        f.coords()[i].eval(&x)
    };
    at(1e6) - at(1e3) > 100.0
}

/// Random irreducible nonnegative matrix: entries in `{0} ∪ [0.1, 1]`, plus a full cycle.
pub fn irreducible_matrix(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for row in a.iter_mut() {
        for v in row.iter_mut() {
            if rng.gen_bool(0.4) {
                *v = rng.gen_range(0.1..=1.0);
            }
        }
    }
    for (i, row) in a.iter_mut().enumerate() {
        let j = (i + 1) % n;
        if row[j] == 0.0 {
            row[j] = rng.gen_range(0.1..=1.0);
        }
    }
    a
}

/// Spectral radius and positive eigenvector by normalized power iteration on `A + I`.
///
/// The shift makes the iteration converge for periodic matrices too; it
/// leaves the eigenvector unchanged and moves the eigenvalue by one.
pub fn power_iteration(a: &[Vec<f64>]) -> (f64, Vec<f64>) {
    let n = a.len();
    let mut v = vec![1.0; n];
    let mut rho = 0.0;
    for _ in 0..200_000 {
        let w: Vec<f64> = (0..n)
            .map(|i| v[i] + (0..n).map(|j| a[i][j] * v[j]).sum::<f64>())
            .collect();
        let norm = w.iter().cloned().fold(0.0, f64::max);
        let next: Vec<f64> = w.iter().map(|x| x / norm).collect();
        let change = next.iter().zip(&v).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        v = next;
        rho = norm - 1.0;
        if change < 1e-15 {
            break;
        }
    }
    (rho, v)
}

/// `f^k(x)` by plain repeated evaluation.
pub fn iterate(f: &TopicalFn, x: &[f64], k: usize) -> Vec<f64> {
    use topical::TopicalMap;
    let mut x = x.to_vec();
    for _ in 0..k {
        x = f.apply_vec(&x);
    }
    x
}
