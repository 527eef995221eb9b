//! Partitions, Young tabloids and induced (Schreier-type) graphs.
//!
//! A tabloid of shape `(n_1, …, n_K)` assigns each site a row so that row `j`
//! holds `n_j` sites. A permutation `π` moves tabloid `t` to `t∘π`
//! (`row_of'[i] = row_of[π(i)]`), and in the induced graph `t` pulls from
//! `t∘π` with weight `w_π`. On shape `(N−1, 1)` this is the underlying graph
//! with each tabloid labelled by its singleton site.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::netgraph::Laplacian;
use crate::permgroup::{GeneratorSet, Permutation};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.contains(&0) {
            return Err(Error::InvalidPartition(format!(
                "parts must be positive, got {parts:?}"
            )));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!(
                "parts must be non-increasing, got {parts:?}"
            )));
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// The integer being partitioned.
    pub fn total(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    /// `N!/Π n_j!`, the number of tabloids of this shape.
    pub fn multinomial(&self) -> usize {
        let mut count = 1u128;
        let mut placed = 0u128;
        for &p in &self.parts {
            for k in 1..=p as u128 {
                placed += 1;
                count = count * placed / k;
            }
        }
        count as usize
    }

    /// `(N−1, 1)`, whose induced graph is the underlying graph.
    pub fn hook(n: usize) -> Self {
        Self {
            parts: vec![n - 1, 1],
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.parts.len() == 1
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.parts.iter().map(usize::to_string).collect();
        write!(f, "({})", body.join(","))
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Accepts `2,1,1`, `(2,1,1)` or whitespace separated parts.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts = inner
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::InvalidPartition(format!("bad part '{t}' in '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }
}

/// All partitions of `n` with at most `max_parts` parts, excluding `(n)`,
/// in reverse lexicographic order (a linear extension of dominance, most
/// dominant first).
pub fn partitions_of(n: usize, max_parts: usize) -> Vec<Partition> {
    fn rec(rest: usize, max_part: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        if slots == 0 {
            return;
        }
        for p in (1..=rest.min(max_part)).rev() {
            cur.push(p);
            rec(rest - p, p, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, max_parts, &mut Vec::new(), &mut out);
    out.into_iter()
        .filter(|p| p.len() > 1)
        .map(|parts| Partition { parts })
        .collect()
}

/// Prefix-sum dominance `a ⊵ b`.
pub fn dominates(a: &Partition, b: &Partition) -> Result<bool> {
    if a.total() != b.total() {
        return Err(Error::DifferentDegree(a.total(), b.total()));
    }
    let len = a.parts.len().max(b.parts.len());
    let (mut sa, mut sb) = (0, 0);
    for i in 0..len {
        sa += a.parts.get(i).copied().unwrap_or(0);
        sb += b.parts.get(i).copied().unwrap_or(0);
        if sa < sb {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct YoungTabloid {
    row_of: Vec<u8>,
}

impl YoungTabloid {
    /// Sites filled row by row in ascending order.
    pub fn canonical(p: &Partition) -> Self {
        let row_of = p
            .parts
            .iter()
            .enumerate()
            .flat_map(|(row, &len)| std::iter::repeat_n(row as u8, len))
            .collect();
        Self { row_of }
    }

    /// 0-based row of each 0-based site.
    pub fn rows(&self) -> &[u8] {
        &self.row_of
    }

    /// The tabloid `t∘π`.
    pub fn act(&self, p: &Permutation) -> Self {
        Self {
            row_of: (0..self.row_of.len()).map(|i| self.row_of[p.apply(i)]).collect(),
        }
    }
}

impl fmt::Display for YoungTabloid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.row_of.iter().map(|r| (r + 1).to_string()).collect();
        write!(f, "{}", body.join(" "))
    }
}

fn next_permutation(v: &mut [u8]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("pivot has a successor");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Every tabloid of the given shape, lexicographic on `row_of`.
pub fn enumerate_tabloids(p: &Partition) -> Vec<YoungTabloid> {
    let mut cur = YoungTabloid::canonical(p).row_of;
    let mut out = vec![YoungTabloid { row_of: cur.clone() }];
    while next_permutation(&mut cur) {
        out.push(YoungTabloid { row_of: cur.clone() });
    }
    out
}

/// One tabloid per line, 1-based rows.
pub fn tabloids_to_text(tabloids: &[YoungTabloid]) -> String {
    tabloids.iter().map(|t| format!("{t}\n")).collect()
}

/// Vertex set and generator action for one partition, reusable across weight
/// vectors.
#[derive(Debug, Clone)]
pub struct InducedStructure {
    partition: Partition,
    vertices: Vec<YoungTabloid>,
    /// `pulls[g][v]`: index of the vertex `v` pulls from under generator `g`.
    pulls: Vec<Vec<usize>>,
}

impl InducedStructure {
    /// Orbit of the canonical tabloid under the generated group. For
    /// `G_B = S_N` the action is transitive and this is every tabloid.
    pub fn new(p: &Partition, gens: &GeneratorSet) -> Result<Self> {
        if p.total() != gens.degree() {
            return Err(Error::DifferentDegree(p.total(), gens.degree()));
        }
        let start = YoungTabloid::canonical(p);
        let mut seen = HashMap::from([(start.clone(), ())]);
        let mut queue = VecDeque::from([start]);
        while let Some(t) = queue.pop_front() {
            for s in gens.perms() {
                let u = t.act(s);
                if seen.insert(u.clone(), ()).is_none() {
                    queue.push_back(u);
                }
            }
        }
        let mut vertices: Vec<YoungTabloid> = seen.into_keys().collect();
        vertices.sort();
        let index: HashMap<&YoungTabloid, usize> =
            vertices.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let pulls = gens
            .perms()
            .map(|s| vertices.iter().map(|t| index[&t.act(s)]).collect())
            .collect();
        Ok(Self {
            partition: p.clone(),
            vertices,
            pulls,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn vertices(&self) -> &[YoungTabloid] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// `Σ_π w_π (I − R_π)`; weights must already be validated.
    pub fn laplacian(&self, weights: &[f64]) -> Laplacian {
        let mut l = Laplacian::zeros(self.vertices.len());
        for (pull, &w) in self.pulls.iter().zip(weights) {
            l.add_pull(pull, w);
        }
        l
    }
}

#[derive(Debug, Clone)]
pub struct InducedGraph {
    pub partition: Partition,
    pub vertices: Vec<YoungTabloid>,
    pub laplacian: Laplacian,
}

pub fn induced_laplacian(p: &Partition, gens: &GeneratorSet, weights: &[f64]) -> Result<InducedGraph> {
    gens.check_weights(weights)?;
    let s = InducedStructure::new(p, gens)?;
    let laplacian = s.laplacian(weights);
    Ok(InducedGraph {
        partition: s.partition,
        vertices: s.vertices,
        laplacian,
    })
}
