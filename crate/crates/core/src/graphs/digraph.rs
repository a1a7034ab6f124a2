use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde_json::json;

/// A directed graph whose vertices carry a set of original coordinates.
///
/// For the associated graph each label is the singleton `{i}`; for an
/// aggregated level it is the union of the coordinates of the strongly
/// connected component the vertex stands for. Coordinates are 0-based
/// internally and 1-based in every export.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    sigma: Vec<Vec<usize>>,
    succ: Vec<BTreeSet<usize>>,
}

/// Strongly connected components of a [`Digraph`] and its condensation.
#[derive(Clone, Debug)]
pub struct SccPartition {
    /// Components as sorted vertex lists, ordered by their smallest vertex.
    pub components: Vec<Vec<usize>>,
    /// `component_of[v]` is the index of the component holding vertex `v`.
    pub component_of: Vec<usize>,
    /// One vertex per component (labels are the merged σ-images); an edge
    /// `A → B` for `A ≠ B` whenever some vertex of `A` has an edge into `B`.
    pub condensation: Digraph,
}

impl SccPartition {
    pub fn all_singletons(&self) -> bool {
        self.components.iter().all(|c| c.len() == 1)
    }
}

impl Digraph {
    /// A graph on `n` vertices with singleton labels `{0}, …, {n-1}` and no edges.
    pub fn new(n: usize) -> Self {
        Digraph {
            sigma: (0..n).map(|i| vec![i]).collect(),
            succ: vec![BTreeSet::new(); n],
        }
    }

    /// A graph with explicit labels. Labels are sorted and deduplicated.
    pub fn with_labels(labels: Vec<Vec<usize>>) -> Self {
        let n = labels.len();
        let sigma = labels
            .into_iter()
            .map(|mut l| {
                l.sort_unstable();
                l.dedup();
                l
            })
            .collect();
        Digraph {
            sigma,
            succ: vec![BTreeSet::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Digraph::new(n);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u < self.succ.len() && v < self.succ.len(), "edge endpoint out of range");
        self.succ[u].insert(v);
    }

    pub fn n_vertices(&self) -> usize {
        self.succ.len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.succ[u].contains(&v)
    }

    pub fn successors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.succ[u].iter().copied()
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, s)| s.iter().map(move |&v| (u, v)))
    }

    pub fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.edges().collect()
    }

    pub fn n_edges(&self) -> usize {
        self.succ.iter().map(BTreeSet::len).sum()
    }

    pub fn sigma(&self, v: usize) -> &[usize] {
        &self.sigma[v]
    }

    pub fn labels(&self) -> &[Vec<usize>] {
        &self.sigma
    }

    /// Iterative Tarjan. Components are returned sorted by smallest vertex.
    pub fn scc(&self) -> SccPartition {
        const UNVISITED: usize = usize::MAX;
        let n = self.n_vertices();
        let adj: Vec<Vec<usize>> = self.succ.iter().map(|s| s.iter().copied().collect()).collect();
        let mut index = vec![UNVISITED; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        let mut components: Vec<Vec<usize>> = Vec::new();
        let mut counter = 0usize;
        // (vertex, position of the next successor to visit)
        let mut call: Vec<(usize, usize)> = Vec::new();

        for root in 0..n {
            if index[root] != UNVISITED {
                continue;
            }
            call.push((root, 0));
            index[root] = counter;
            low[root] = counter;
            counter += 1;
            stack.push(root);
            on_stack[root] = true;

            while let Some(&(v, next)) = call.last() {
                if next < adj[v].len() {
                    let w = adj[v][next];
                    if let Some(top) = call.last_mut() {
                        top.1 += 1;
                    }
                    if index[w] == UNVISITED {
                        index[w] = counter;
                        low[w] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(parent, _)) = call.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack underflow");
                            on_stack[w] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        components.push(comp);
                    }
                }
            }
        }

        components.sort_by_key(|c| c[0]);
        let mut component_of = vec![0usize; n];
        for (ci, comp) in components.iter().enumerate() {
            for &v in comp {
                component_of[v] = ci;
            }
        }
        let labels = components
            .iter()
            .map(|comp| comp.iter().flat_map(|&v| self.sigma[v].iter().copied()).collect())
            .collect();
        let mut condensation = Digraph::with_labels(labels);
        for (u, v) in self.edges() {
            let (cu, cv) = (component_of[u], component_of[v]);
            if cu != cv {
                condensation.add_edge(cu, cv);
            }
        }
        SccPartition {
            components,
            component_of,
            condensation,
        }
    }

    /// True when every pair of vertices communicates. A single vertex always does.
    pub fn is_strongly_connected(&self) -> bool {
        self.n_vertices() <= 1 || self.scc().components.len() == 1
    }

    /// Vertices reachable from `start` (including `start`).
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n_vertices()];
        let mut todo = vec![start];
        seen[start] = true;
        while let Some(u) = todo.pop() {
            for v in self.successors(u) {
                if !seen[v] {
                    seen[v] = true;
                    todo.push(v);
                }
            }
        }
        seen
    }

    fn label_text(&self, v: usize) -> String {
        let items: Vec<String> = self.sigma[v].iter().map(|i| (i + 1).to_string()).collect();
        format!("{{{}}}", items.join(","))
    }

    /// Graphviz rendering; vertices are labelled by their σ-image, e.g. `{3,4}`.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"{}\" {{", name.replace('"', "\\\""));
        for v in 0..self.n_vertices() {
            let _ = writeln!(out, "  v{} [label=\"{}\"];", v + 1, self.label_text(v));
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "  v{} -> v{};", u + 1, v + 1);
        }
        out.push_str("}\n");
        out
    }

    /// `{"vertices":[{"id","sigma":[...]}], "edges":[[u,v],...]}` with 1-based ids and coordinates.
    pub fn to_json(&self) -> serde_json::Value {
        let vertices: Vec<_> = (0..self.n_vertices())
            .map(|v| {
                json!({
                    "id": v + 1,
                    "sigma": self.sigma[v].iter().map(|i| i + 1).collect::<Vec<_>>(),
                })
            })
            .collect();
        let edges: Vec<_> = self.edges().map(|(u, v)| json!([u + 1, v + 1])).collect();
        json!({ "vertices": vertices, "edges": edges })
    }
}
