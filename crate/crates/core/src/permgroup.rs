//! Permutations of `{1..n}`, cycle structure, and closure of generator sets.
//!
//! Points are stored 0-based; every user-facing format (cycle notation,
//! `Display`) is 1-based.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use crate::error::{Error, Result};

/// Default bound on the size of a generated group (2 * 7!).
pub const DEFAULT_GROUP_CAP: usize = 10_080;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    /// Builds a permutation from a 0-based image table, checking bijectivity.
    pub fn from_images(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &x in &map {
            if x >= n || seen[x] {
                return Err(Error::InvalidCycles(format!(
                    "image table {map:?} is not a bijection"
                )));
            }
            seen[x] = true;
        }
        Ok(Self { map })
    }

    /// Cycle notation with 1-based entries. Each entry maps to its successor,
    /// the last entry back to the first; unlisted points stay fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut map: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        for cycle in cycles {
            for &x in cycle {
                if x == 0 || x > n {
                    return Err(Error::InvalidCycles(format!(
                        "entry {x} outside 1..={n}"
                    )));
                }
                if used[x - 1] {
                    return Err(Error::InvalidCycles(format!(
                        "entry {x} appears more than once"
                    )));
                }
                used[x - 1] = true;
            }
            for (i, &x) in cycle.iter().enumerate() {
                map[x - 1] = cycle[(i + 1) % cycle.len()] - 1;
            }
        }
        Ok(Self { map })
    }

    pub fn degree(&self) -> usize {
        self.map.len()
    }

    /// Image of the 0-based point `i`.
    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    /// 0-based image table.
    pub fn images(&self) -> &[usize] {
        &self.map
    }

    /// 1-based image table, `map[i-1] = p(i)`.
    pub fn one_based(&self) -> Vec<usize> {
        self.map.iter().map(|&x| x + 1).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x] = i;
        }
        Self { map: inv }
    }

    /// `self ∘ other`, i.e. `other` is applied first.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.degree(), other.degree(), "degree mismatch in compose");
        Self {
            map: other.map.iter().map(|&x| self.map[x]).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// Disjoint cycles of length >= 2, 0-based, each starting at its least
    /// element, ordered by that element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.map.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.map[start];
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.map[x];
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    /// Sum of the lengths of all non-trivial cycles: the per-generator cost
    /// coefficient in the weight budget.
    pub fn effective_cycle_length(&self) -> usize {
        self.cycles().iter().map(Vec::len).sum()
    }

    /// +1 for even, -1 for odd permutations.
    pub fn sign(&self) -> i32 {
        let transpositions: usize = self.cycles().iter().map(|c| c.len() - 1).sum();
        if transpositions.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let body: Vec<String> = c.iter().map(|x| (x + 1).to_string()).collect();
            write!(f, "({})", body.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub perm: Permutation,
    pub label: String,
}

/// Ordered generator list; the order fixes weight-vector coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    n: usize,
    generators: Vec<Generator>,
}

impl GeneratorSet {
    pub fn new(n: usize, generators: Vec<Generator>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least two sites, got {n}"
            )));
        }
        let mut labels = HashSet::new();
        for g in &generators {
            if g.perm.degree() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: g.perm.degree(),
                });
            }
            if g.perm.is_identity() {
                return Err(Error::InvalidCycles(format!(
                    "generator '{}' is the identity",
                    g.label
                )));
            }
            if !labels.insert(g.label.clone()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate weight label '{}'",
                    g.label
                )));
            }
        }
        Ok(Self { n, generators })
    }

    /// Convenience constructor from `(cycles, label)` pairs.
    pub fn from_cycles(n: usize, gens: &[(&[Vec<usize>], &str)]) -> Result<Self> {
        let generators = gens
            .iter()
            .map(|(cycles, label)| {
                Ok(Generator {
                    perm: Permutation::from_cycles(n, cycles)?,
                    label: (*label).to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, generators)
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn perms(&self) -> impl Iterator<Item = &Permutation> {
        self.generators.iter().map(|g| &g.perm)
    }

    pub fn labels(&self) -> Vec<&str> {
        self.generators.iter().map(|g| g.label.as_str()).collect()
    }

    pub fn cycle_lengths(&self) -> Vec<usize> {
        self.perms().map(Permutation::effective_cycle_length).collect()
    }

    pub(crate) fn check_weights(&self, weights: &[f64]) -> Result<()> {
        if weights.len() != self.generators.len() {
            return Err(Error::DimensionMismatch {
                expected: self.generators.len(),
                got: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "weights must be finite and non-negative, got {w}"
            )));
        }
        Ok(())
    }
}

/// Breadth-first closure of the generators under composition. Elements are
/// returned in discovery order, identity first.
pub fn generate_group(gens: &GeneratorSet, cap: usize) -> Result<Vec<Permutation>> {
    let id = Permutation::identity(gens.degree());
    let mut seen = HashSet::from([id.clone()]);
    let mut order = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for s in gens.perms() {
            let y = x.compose(s);
            if seen.insert(y.clone()) {
                if seen.len() > cap {
                    return Err(Error::CapExceeded { what: "group order", cap });
                }
                order.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(order)
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

pub fn is_full_symmetric(gens: &GeneratorSet) -> bool {
    let full = factorial(gens.degree());
    generate_group(gens, full.max(1))
        .map(|g| g.len() == full)
        .unwrap_or(false)
}

/// True iff the set is closed under composition (finite sets closed under
/// composition are groups).
pub fn is_closed(set: &[Permutation]) -> bool {
    let members: HashSet<&Permutation> = set.iter().collect();
    set.iter()
        .all(|a| set.iter().all(|b| members.contains(&a.compose(b))))
}
