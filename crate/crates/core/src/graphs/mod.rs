//! Graphs attached to a topical function.
//!
//! The associated graph has an edge `i → j` when `f_i(u·e_j) → ∞` as
//! `u → ∞`. Because the grammar is closed under a small set of
//! constructors, these limits are decided exactly on the expression tree
//! (see [`ExprNode::diverges`](crate::fnmodel::ExprNode::diverges)).
//!
//! Aggregation repeatedly condenses strongly connected components and
//! re-tests divergence against whole components; the function is
//! indecomposable exactly when the stable level is strongly connected.

mod digraph;

pub use digraph::{Digraph, SccPartition};

use crate::fnmodel::TopicalFn;

/// `lim_{u→∞} f_i(u·e_J) = ∞`, with `i` and the members of `J` 0-based.
pub fn diverges(f: &TopicalFn, i: usize, j_set: &[usize]) -> bool {
    let mut mask = vec![false; f.dim()];
    for &j in j_set {
        mask[j] = true;
    }
    f.coords()[i].diverges(&mask)
}

pub fn associated_graph(f: &TopicalFn) -> Digraph {
    let n = f.dim();
    let mut g = Digraph::new(n);
    let mut mask = vec![false; n];
    for j in 0..n {
        mask[j] = true;
        for i in 0..n {
            if f.coords()[i].diverges(&mask) {
                g.add_edge(i, j);
            }
        }
        mask[j] = false;
    }
    g
}

/// Edge `i → j` when `f_i(u·e_j) → 0` as `u → 0⁺`, i.e. the associated graph of the dual.
pub fn dual_graph(f: &TopicalFn) -> Digraph {
    associated_graph(&f.dual())
}

/// Edge `i → j` when `x_j` occurs in the tree of `f_i`.
pub fn syntactic_graph(f: &TopicalFn) -> Digraph {
    let n = f.dim();
    let mut g = Digraph::new(n);
    for (i, c) in f.coords().iter().enumerate() {
        let mut seen = vec![false; n];
        c.collect_vars(&mut seen);
        for (j, _) in seen.iter().enumerate().filter(|(_, s)| **s) {
            g.add_edge(i, j);
        }
    }
    g
}

pub fn scc_condense(g: &Digraph) -> SccPartition {
    g.scc()
}

/// The levels `G^1(f), …, G^N(f)` of the aggregation process.
#[derive(Clone, Debug)]
pub struct AggregationTower {
    pub levels: Vec<Digraph>,
}

impl AggregationTower {
    /// The least `N` with `G^N ≅ G^{N+1}`, counted from 1.
    pub fn stabilized_at(&self) -> usize {
        self.levels.len()
    }

    /// `G^∞(f)`, whose strongly connected components are all single vertices.
    pub fn stable(&self) -> &Digraph {
        self.levels.last().expect("tower has at least one level")
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "stabilized_at": self.stabilized_at(),
            "levels": self.levels.iter().map(Digraph::to_json).collect::<Vec<_>>(),
        })
    }
}

/// Builds the aggregated graphs until every strongly connected component is a single vertex.
pub fn aggregate(f: &TopicalFn) -> AggregationTower {
    let n = f.dim();
    let mut levels = vec![associated_graph(f)];
    loop {
        let current = levels.last().expect("nonempty");
        let partition = current.scc();
        if partition.all_singletons() {
            break;
        }
        let labels: Vec<Vec<usize>> = partition.condensation.labels().to_vec();
        let mut next = Digraph::with_labels(labels.clone());
        for (b, target) in labels.iter().enumerate() {
            let mut mask = vec![false; n];
            for &j in target {
                mask[j] = true;
            }
            for (a, source) in labels.iter().enumerate() {
                if source.iter().any(|&i| f.coords()[i].diverges(&mask)) {
                    next.add_edge(a, b);
                }
            }
        }
        levels.push(next);
    }
    debug_assert!(levels.len() <= n.max(1));
    AggregationTower { levels }
}

/// A partition `I ∪ J` of the coordinates with `f_i(u·e_J)` bounded for every `i ∈ I`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionWitness {
    pub i_set: Vec<usize>,
    pub j_set: Vec<usize>,
}

impl DecompositionWitness {
    /// Re-checks the defining property on the expression trees.
    pub fn verify(&self, f: &TopicalFn) -> bool {
        let n = f.dim();
        let mut all: Vec<usize> = self.i_set.iter().chain(&self.j_set).copied().collect();
        all.sort_unstable();
        !self.i_set.is_empty()
            && !self.j_set.is_empty()
            && all == (0..n).collect::<Vec<_>>()
            && self.i_set.iter().all(|&i| !diverges(f, i, &self.j_set))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "I": self.i_set.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "J": self.j_set.iter().map(|j| j + 1).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct Indecomposability {
    pub indecomposable: bool,
    pub witness: Option<DecompositionWitness>,
    pub tower: AggregationTower,
}

/// Decides indecomposability through the stable aggregated graph.
///
/// When `G^∞(f)` is not strongly connected, a component with no incoming
/// edge from another component gives `J`; every other coordinate stays
/// bounded as `J` blows up.
pub fn is_indecomposable(f: &TopicalFn) -> Indecomposability {
    let tower = aggregate(f);
    let stable = tower.stable();
    if stable.is_strongly_connected() {
        return Indecomposability {
            indecomposable: true,
            witness: None,
            tower,
        };
    }
    let m = stable.n_vertices();
    let mut has_incoming = vec![false; m];
    for (u, v) in stable.edges() {
        if u != v {
            has_incoming[v] = true;
        }
    }
    let source = (0..m)
        .rev()
        .find(|&v| !has_incoming[v])
        .expect("a finite acyclic condensation has a source");
    let j_set = stable.sigma(source).to_vec();
    let i_set: Vec<usize> = (0..f.dim()).filter(|i| !j_set.contains(i)).collect();
    let witness = DecompositionWitness { i_set, j_set };
    debug_assert!(witness.verify(f));
    Indecomposability {
        indecomposable: false,
        witness: Some(witness),
        tower,
    }
}
