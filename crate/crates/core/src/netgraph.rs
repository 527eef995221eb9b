//! Weighted digraphs and their Laplacians.
//!
//! Convention: an edge `i -> j` with weight `w` means vertex `i` is attracted
//! toward the state of `j`, so `L[i][j] = -w` and each diagonal entry is the
//! total outgoing weight. For a generator `π` every vertex `v` pulls from
//! `π⁻¹(v)`, which gives `L = Σ w_π (I − P_π)` with `P_π[v][π⁻¹(v)] = 1`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::permgroup::{generate_group, GeneratorSet, Permutation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// Simple weighted digraph: no self-loops, at most one edge per ordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    n_vertices: usize,
    edges: BTreeMap<(usize, usize), f64>,
}

impl WeightedDigraph {
    pub fn new(n_vertices: usize) -> Self {
        Self {
            n_vertices,
            edges: BTreeMap::new(),
        }
    }

    /// Builds a digraph from an edge list, rejecting self-loops, repeated
    /// ordered pairs and negative weights.
    pub fn from_edges(n_vertices: usize, edges: &[Edge]) -> Result<Self> {
        let mut g = Self::new(n_vertices);
        for e in edges {
            if g.edges.contains_key(&(e.from, e.to)) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate edge {} -> {}",
                    e.from + 1,
                    e.to + 1
                )));
            }
            g.add_weight(e.from, e.to, e.weight)?;
        }
        Ok(g)
    }

    /// Adds `weight` to edge `from -> to`, creating it if absent.
    pub fn add_weight(&mut self, from: usize, to: usize, weight: f64) -> Result<()> {
        if from >= self.n_vertices || to >= self.n_vertices {
            return Err(Error::InvalidArgument(format!(
                "edge {} -> {} outside {} vertices",
                from + 1,
                to + 1,
                self.n_vertices
            )));
        }
        if from == to {
            return Err(Error::InvalidArgument(format!("self-loop at {}", from + 1)));
        }
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "edge weight must be non-negative, got {weight}"
            )));
        }
        *self.edges.entry((from, to)).or_insert(0.0) += weight;
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().map(|(&(from, to), &weight)| Edge { from, to, weight })
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.edges.range((v, 0)..(v + 1, 0)).count()
    }
}

/// Dense Laplacian with zero row sums.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian(DMatrix<f64>);

impl Laplacian {
    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub(crate) fn from_matrix(m: DMatrix<f64>) -> Self {
        Self(m)
    }

    /// Accumulates `w (I − P)` where `pull[v]` is the vertex `v` pulls from.
    pub(crate) fn add_pull(&mut self, pull: &[usize], w: f64) {
        if w == 0.0 {
            return;
        }
        for (v, &u) in pull.iter().enumerate() {
            if u != v {
                self.0[(v, u)] -= w;
            }
        }
        settle_diagonal(&mut self.0);
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// Off-diagonal sum in column order plus the diagonal; exactly zero for
    /// every matrix built here.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim()).map(|r| off_diagonal_sum(&self.0, r) + self.0[(r, r)]).collect()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (&self.0 - self.0.transpose()).amax() <= tol
    }

    /// Row-major CSV, shortest round-trip decimal for every entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.0.row_iter() {
            let cells: Vec<String> = row.iter().map(|&x| full_precision(x)).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

pub(crate) fn full_precision(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x}")
    }
}

fn off_diagonal_sum(m: &DMatrix<f64>, r: usize) -> f64 {
    (0..m.ncols()).filter(|&c| c != r).map(|c| m[(r, c)]).sum()
}

/// Sets each diagonal entry to the negated off-diagonal row sum, which makes
/// [`Laplacian::row_sums`] exactly zero.
pub(crate) fn settle_diagonal(m: &mut DMatrix<f64>) {
    for r in 0..m.nrows() {
        m[(r, r)] = -off_diagonal_sum(m, r);
    }
}

pub fn laplacian_of(g: &WeightedDigraph) -> Laplacian {
    let mut m = DMatrix::zeros(g.n_vertices, g.n_vertices);
    for e in g.edges() {
        m[(e.from, e.to)] -= e.weight;
    }
    settle_diagonal(&mut m);
    Laplacian(m)
}

/// Pull table for the natural action on sites: `v` pulls from `π⁻¹(v)`.
pub(crate) fn site_pull(p: &Permutation) -> Vec<usize> {
    p.inverse().images().to_vec()
}

/// Digraph on the `N` sites with an edge `v -> π⁻¹(v)` of weight `w_π` for
/// every generator (weights of coinciding edges add up).
pub fn underlying_graph(gens: &GeneratorSet, weights: &[f64]) -> Result<WeightedDigraph> {
    gens.check_weights(weights)?;
    let mut g = WeightedDigraph::new(gens.degree());
    for (p, &w) in gens.perms().zip(weights) {
        for (v, u) in site_pull(p).into_iter().enumerate() {
            if u != v {
                g.add_weight(v, u, w)?;
            }
        }
    }
    Ok(g)
}

pub fn generator_laplacian(gens: &GeneratorSet, weights: &[f64]) -> Result<Laplacian> {
    gens.check_weights(weights)?;
    let mut l = Laplacian::zeros(gens.degree());
    for (p, &w) in gens.perms().zip(weights) {
        l.add_pull(&site_pull(p), w);
    }
    Ok(l)
}

fn reaches_all(n: usize, adj: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(v) = stack.pop() {
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Graph-search test over edges of strictly positive weight.
pub fn is_strongly_connected(g: &WeightedDigraph) -> bool {
    let n = g.n_vertices;
    if n <= 1 {
        return true;
    }
    let mut fwd = vec![Vec::new(); n];
    let mut rev = vec![Vec::new(); n];
    for e in g.edges().filter(|e| e.weight > 0.0) {
        fwd[e.from].push(e.to);
        rev[e.to].push(e.from);
    }
    reaches_all(n, &fwd) && reaches_all(n, &rev)
}

#[derive(Debug, Clone)]
pub struct CayleyGraph {
    /// Group elements; vertex `i` is `elements[i]`.
    pub elements: Vec<Permutation>,
    pub graph: WeightedDigraph,
}

/// Cayley graph of the generated group: edge `x -> x∘s` with weight `w_s`.
pub fn cayley_graph(gens: &GeneratorSet, weights: &[f64], cap: usize) -> Result<CayleyGraph> {
    gens.check_weights(weights)?;
    let elements = generate_group(gens, cap)?;
    let index: std::collections::HashMap<&Permutation, usize> =
        elements.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut graph = WeightedDigraph::new(elements.len());
    for (i, x) in elements.iter().enumerate() {
        for (s, &w) in gens.perms().zip(weights) {
            let j = index[&x.compose(s)];
            graph.add_weight(i, j, w)?;
        }
    }
    Ok(CayleyGraph { elements, graph })
}
