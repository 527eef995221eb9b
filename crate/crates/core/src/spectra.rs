//! Complex Laplacian spectra and the convergence rates derived from them.
//!
//! The rate toward the synchronous state is `Re λ₂` of the underlying graph
//! (shape `(N−1, 1)`); the rate toward consensus is the minimum `Re λ₂` over
//! the induced graphs of every partition with at most `d²` parts.

use std::cmp::Ordering;
use std::fmt::Write as _;

use faer::Mat;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::induced::{dominates, partitions_of, InducedStructure, Partition};
use crate::permgroup::GeneratorSet;
use crate::report::{fmt_complex, fmt_num};

/// Absolute tolerance for classifying an eigenvalue as zero.
pub const ZERO_TOL: f64 = 1e-9;
/// Per-element tolerance for spectrum inclusion.
pub const INCLUSION_TOL: f64 = 1e-7;
/// Agreement tolerance for the per-partition `λ₂` values.
pub const ALDOUS_TOL: f64 = 1e-7;

fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Eigenvalue multiset, sorted by real part then imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(mut values: Vec<Complex64>) -> Self {
        values.sort_by(cmp_complex);
        Self { values }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Index of the value closest to zero, if it is within [`ZERO_TOL`].
    fn trivial_index(&self) -> Option<usize> {
        self.values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .filter(|(_, z)| z.norm() < ZERO_TOL)
            .map(|(i, _)| i)
    }

    /// Copy with the value nearest to `z` removed.
    pub fn without_nearest(&self, z: Complex64) -> (Self, Option<Complex64>) {
        let mut values = self.values.clone();
        let nearest = values
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - z).norm().total_cmp(&(b.1 - z).norm()))
            .map(|(i, _)| i);
        let removed = nearest.map(|i| values.remove(i));
        (Self { values }, removed)
    }
}

/// Full complex spectrum of a dense real matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalFailure(format!(
            "non-finite entry in {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 0 {
        return Ok(Spectrum::new(Vec::new()));
    }
    let a = Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let values = a.eigenvalues().map_err(|e| {
        Error::NumericalFailure(format!(
            "eigenvalue iteration did not converge ({e:?}) for matrix\n{m}"
        ))
    })?;
    Ok(Spectrum::new(
        values.into_iter().map(|z| Complex64::new(z.re, z.im)).collect(),
    ))
}

/// The eigenvalue defining the rate: after removing one trivial zero, the
/// remaining value with least real part, or exactly zero when another
/// near-zero value remains (disconnected graph). `None` for a 1×1 Laplacian.
pub fn lambda2(s: &Spectrum) -> Result<Option<Complex64>> {
    let i = s.trivial_index().ok_or(Error::NotALaplacian { tol: ZERO_TOL })?;
    let rest = s
        .values
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, z)| *z);
    let mut best: Option<Complex64> = None;
    for z in rest {
        if z.norm() < ZERO_TOL {
            return Ok(Some(Complex64::new(0.0, 0.0)));
        }
        if best.is_none_or(|b| cmp_complex(&z, &b) == Ordering::Less) {
            best = Some(z);
        }
    }
    Ok(best)
}

pub fn lambda2_re(s: &Spectrum) -> Result<f64> {
    Ok(lambda2(s)?.map_or(0.0, |z| z.re))
}

/// Greedy nearest-unused matching of `small` into `big`; returns the values
/// of `small` left without a partner within `tol`.
pub fn multiset_inclusion(small: &Spectrum, big: &Spectrum, tol: f64) -> Vec<Complex64> {
    let mut used = vec![false; big.len()];
    let mut missing = Vec::new();
    for z in small.values() {
        let best = big
            .values()
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, w)| (j, (w - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((j, dist)) if dist <= tol => used[j] = true,
            _ => missing.push(*z),
        }
    }
    missing
}

/// Values of `small` with no value of `big` within `tol` (multiplicity ignored).
pub fn set_inclusion(small: &Spectrum, big: &Spectrum, tol: f64) -> Vec<Complex64> {
    small
        .values()
        .iter()
        .filter(|z| !big.values().iter().any(|w| (w - *z).norm() <= tol))
        .copied()
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionRate {
    pub partition: Partition,
    /// Size of the induced graph.
    pub vertices: usize,
    /// The minimizing eigenvalue (zero when the graph is disconnected).
    pub lambda2: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRates {
    pub lambda_synch: f64,
    pub lambda_cons: f64,
    /// Dominance-descending partition order.
    pub per_partition: Vec<PartitionRate>,
}

impl ConvergenceRates {
    /// Key-value text block.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.per_partition {
            let _ = writeln!(
                out,
                "lambda2{} = {}  # {} vertices, im = {}",
                r.partition,
                fmt_num(r.lambda2.re),
                r.vertices,
                fmt_num(r.lambda2.im)
            );
        }
        let _ = writeln!(out, "lambda_cons = {}", fmt_num(self.lambda_cons));
        let _ = writeln!(out, "lambda_synch = {}", fmt_num(self.lambda_synch));
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("partition,vertices,lambda2_re,lambda2_im\n");
        for r in &self.per_partition {
            let parts: Vec<String> = r.partition.parts().iter().map(usize::to_string).collect();
            let _ = writeln!(
                out,
                "{},{},{},{}",
                parts.join(" "),
                r.vertices,
                fmt_num(r.lambda2.re),
                fmt_num(r.lambda2.im)
            );
        }
        out
    }
}

/// Induced-graph structures for all partitions relevant at Hilbert
/// dimension `d`, built once and evaluated for many weight vectors.
#[derive(Debug, Clone)]
pub struct RateModel {
    gens: GeneratorSet,
    d: usize,
    structures: Vec<InducedStructure>,
}

impl RateModel {
    pub fn new(gens: &GeneratorSet, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("d must be >= 2, got {d}")));
        }
        let n = gens.degree();
        let structures = partitions_of(n, d * d)
            .iter()
            .map(|p| InducedStructure::new(p, gens))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            gens: gens.clone(),
            d,
            structures,
        })
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.gens
    }

    pub fn hilbert_dim(&self) -> usize {
        self.d
    }

    pub fn structures(&self) -> &[InducedStructure] {
        &self.structures
    }

    pub fn spectra(&self, weights: &[f64]) -> Result<Vec<(Partition, Spectrum)>> {
        self.gens.check_weights(weights)?;
        self.structures
            .iter()
            .map(|s| {
                let spec = eigenvalues(s.laplacian(weights).matrix())?;
                Ok((s.partition().clone(), spec))
            })
            .collect()
    }

    pub fn rates(&self, weights: &[f64]) -> Result<ConvergenceRates> {
        let spectra = self.spectra(weights)?;
        let hook = Partition::hook(self.gens.degree());
        let mut per_partition = Vec::with_capacity(spectra.len());
        let mut lambda_synch = f64::NAN;
        let mut lambda_cons = f64::INFINITY;
        for (p, spec) in spectra {
            let z = lambda2(&spec)?.unwrap_or_default();
            if p == hook {
                lambda_synch = z.re;
            }
            lambda_cons = lambda_cons.min(z.re);
            per_partition.push(PartitionRate {
                partition: p,
                vertices: spec.len(),
                lambda2: z,
            });
        }
        Ok(ConvergenceRates {
            lambda_synch,
            lambda_cons,
            per_partition,
        })
    }

    pub fn intertwining(&self, weights: &[f64]) -> Result<IntertwiningReport> {
        let spectra = self.spectra(weights)?;
        let mut checks = Vec::new();
        for (i, (pa, sa)) in spectra.iter().enumerate() {
            for (pb, sb) in spectra.iter().skip(i + 1) {
                if dominates(pa, pb)? {
                    checks.push(InclusionCheck {
                        dominant: pa.clone(),
                        other: pb.clone(),
                        kind: InclusionKind::Multiset,
                        removed: None,
                        violations: multiset_inclusion(sa, sb, INCLUSION_TOL),
                    });
                }
            }
        }
        let n = self.gens.degree();
        if n >= 3 {
            let regular = Partition::new(vec![1; n])?;
            let mut next = vec![2];
            next.extend(std::iter::repeat_n(1, n - 2));
            let next = Partition::new(next)?;
            let find = |p: &Partition| spectra.iter().find(|(q, _)| q == p).map(|(_, s)| s);
            if let (Some(sr), Some(sn)) = (find(&regular), find(&next)) {
                let sign_value: f64 = self
                    .gens
                    .perms()
                    .zip(weights)
                    .map(|(p, w)| w * f64::from(1 - p.sign()))
                    .sum();
                let (rest, removed) = sr.without_nearest(Complex64::new(sign_value, 0.0));
                checks.push(InclusionCheck {
                    dominant: next,
                    other: regular,
                    kind: InclusionKind::SetExceptSign,
                    removed,
                    violations: set_inclusion(&rest, sn, INCLUSION_TOL),
                });
            }
        }
        Ok(IntertwiningReport { checks })
    }

    pub fn aldous(&self, weights: &[f64]) -> Result<AldousReport> {
        let rates = self.rates(weights)?;
        let values: Vec<(Partition, f64)> = rates
            .per_partition
            .iter()
            .map(|r| (r.partition.clone(), r.lambda2.re))
            .collect();
        let lo = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        let hi = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
        let spread = if values.is_empty() { 0.0 } else { hi - lo };
        Ok(AldousReport {
            holds: spread <= ALDOUS_TOL,
            spread,
            per_partition: values,
        })
    }
}

pub fn convergence_rates(gens: &GeneratorSet, weights: &[f64], d: usize) -> Result<ConvergenceRates> {
    RateModel::new(gens, d)?.rates(weights)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InclusionKind {
    /// Spectrum of the dominant partition is a sub-multiset of the other.
    Multiset,
    /// Spectrum of `(1^N)` minus its sign-character eigenvalue is contained,
    /// as a set, in the spectrum of `(2, 1^{N−2})`.
    SetExceptSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InclusionCheck {
    pub dominant: Partition,
    pub other: Partition,
    pub kind: InclusionKind,
    pub removed: Option<Complex64>,
    pub violations: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntertwiningReport {
    pub checks: Vec<InclusionCheck>,
}

impl IntertwiningReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.violations.is_empty())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let (lhs, rhs) = match c.kind {
                InclusionKind::Multiset => (c.dominant.to_string(), c.other.to_string()),
                InclusionKind::SetExceptSign => (format!("{} minus sign value", c.other), c.dominant.to_string()),
            };
            let verdict = if c.violations.is_empty() { "holds" } else { "VIOLATED" };
            let _ = writeln!(out, "spec{lhs} in spec{rhs}: {verdict}");
            if let Some(z) = c.removed {
                let _ = writeln!(out, "  removed = {}", fmt_complex(z));
            }
            for z in &c.violations {
                let _ = writeln!(out, "  unmatched = {}", fmt_complex(*z));
            }
        }
        out
    }
}

pub fn intertwining_check(gens: &GeneratorSet, weights: &[f64], d: usize) -> Result<IntertwiningReport> {
    RateModel::new(gens, d)?.intertwining(weights)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AldousReport {
    pub holds: bool,
    pub spread: f64,
    pub per_partition: Vec<(Partition, f64)>,
}

pub fn aldous_check(gens: &GeneratorSet, weights: &[f64], d: usize) -> Result<AldousReport> {
    RateModel::new(gens, d)?.aldous(weights)
}
