//! Density matrices, Hamiltonians and single-site diagnostics.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_state_size, Cx};
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const EIGEN_FLOOR: f64 = -1e-9;

/// Mixing weight of the maximally mixed state in a generic initial state.
pub const GENERIC_MIXING: f64 = 1e-2;

fn c(re: f64) -> Cx {
    Complex64::new(re, 0.0)
}

pub(crate) fn hermitian_defect(m: &DMatrix<Cx>) -> f64 {
    (m - m.adjoint()).norm()
}

pub(crate) fn hermitize(m: &DMatrix<Cx>) -> DMatrix<Cx> {
    (m + m.adjoint()) * c(0.5)
}

/// Hermitian, unit-trace, positive semidefinite matrix on `(ℂ^d)^{⊗N}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    d: usize,
    n_sites: usize,
    m: DMatrix<Cx>,
}

impl DensityMatrix {
    pub fn new(d: usize, n_sites: usize, m: DMatrix<Cx>) -> Result<Self> {
        let dim = check_state_size(d, n_sites)?;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: m.nrows(),
            });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        let herm = hermitian_defect(&m);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = m.trace();
        if (tr - c(1.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_eig = hermitize(&m)
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < EIGEN_FLOOR {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { d, n_sites, m })
    }

    pub(crate) fn new_unchecked(d: usize, n_sites: usize, m: DMatrix<Cx>) -> Self {
        Self { d, n_sites, m }
    }

    pub fn maximally_mixed(d: usize, n_sites: usize) -> Result<Self> {
        let dim = check_state_size(d, n_sites)?;
        Ok(Self::new_unchecked(d, n_sites, DMatrix::identity(dim, dim) * c(1.0 / dim as f64)))
    }

    /// `|b⟩⟨b|` for a computational basis state given one digit per site.
    pub fn basis_state(d: usize, digits: &[usize]) -> Result<Self> {
        let dim = check_state_size(d, digits.len())?;
        if let Some(x) = digits.iter().find(|&&x| x >= d) {
            return Err(Error::InvalidState(format!("basis digit {x} out of range for d = {d}")));
        }
        let idx = digits.iter().fold(0, |acc, &x| acc * d + x);
        let mut m = DMatrix::zeros(dim, dim);
        m[(idx, idx)] = c(1.0);
        Ok(Self::new_unchecked(d, digits.len(), m))
    }

    /// `|ψ⟩⟨ψ|` for a normalized state vector.
    pub fn pure(d: usize, n_sites: usize, psi: &DVector<Cx>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("state vector has zero norm".into()));
        }
        let psi = psi / c(norm);
        Self::new(d, n_sites, &psi * psi.adjoint())
    }

    /// Random pure product state mixed with `I/d^N` at weight
    /// [`GENERIC_MIXING`].
    pub fn random_generic<R: Rng>(d: usize, n_sites: usize, rng: &mut R) -> Result<Self> {
        check_state_size(d, n_sites)?;
        let mut psi = DVector::from_element(1, c(1.0));
        for _ in 0..n_sites {
            let site = DVector::from_fn(d, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            psi = psi.kronecker(&site);
        }
        let pure = Self::pure(d, n_sites, &psi)?;
        let mixed = Self::maximally_mixed(d, n_sites)?;
        let m = pure.m * c(1.0 - GENERIC_MIXING) + mixed.m * c(GENERIC_MIXING);
        Self::new(d, n_sites, m)
    }

    /// Random full-rank state `G G† / tr(G G†)` with Gaussian `G`.
    pub fn random_mixed<R: Rng>(d: usize, n_sites: usize, rng: &mut R) -> Result<Self> {
        let dim = check_state_size(d, n_sites)?;
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let m = &g * g.adjoint();
        let tr = m.trace();
        Self::new(d, n_sites, hermitize(&(m / tr)))
    }

    /// Parses row-major `re,im` pairs separated by whitespace; `#` starts a
    /// comment. The number of sites is inferred from the entry count.
    pub fn from_text(text: &str, d: usize) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("");
            for tok in line.split_whitespace() {
                let (re, im) = tok
                    .split_once(',')
                    .ok_or_else(|| Error::Parse(format!("line {}: expected 're,im', got '{tok}'", lineno + 1)))?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Parse(format!("line {}: '{s}': {e}", lineno + 1)))
                };
                entries.push(Complex64::new(parse(re)?, parse(im)?));
            }
        }
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim * dim != entries.len() || dim == 0 {
            return Err(Error::Parse(format!("{} entries do not form a square matrix", entries.len())));
        }
        let mut n_sites = 0;
        let mut p = 1;
        while p < dim {
            p *= d;
            n_sites += 1;
        }
        if p != dim {
            return Err(Error::Parse(format!("matrix size {dim} is not a power of d = {d}")));
        }
        Self::new(d, n_sites, DMatrix::from_row_slice(dim, dim, &entries))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Cx> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Cx> {
        self.m
    }

    pub fn distance(&self, other: &Self) -> f64 {
        (&self.m - &other.m).norm()
    }
}

/// Hermitian system Hamiltonian on `(ℂ^d)^{⊗N}` (ħ = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    d: usize,
    n_sites: usize,
    m: DMatrix<Cx>,
}

impl Hamiltonian {
    pub fn new(d: usize, n_sites: usize, m: DMatrix<Cx>) -> Result<Self> {
        let dim = check_state_size(d, n_sites)?;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: m.nrows(),
            });
        }
        let herm = hermitian_defect(&m);
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidArgument(format!("Hamiltonian not Hermitian (defect {herm:e})")));
        }
        Ok(Self { d, n_sites, m })
    }

    pub fn zero(d: usize, n_sites: usize) -> Result<Self> {
        let dim = check_state_size(d, n_sites)?;
        Ok(Self {
            d,
            n_sites,
            m: DMatrix::zeros(dim, dim),
        })
    }

    /// `op` acting on site `k` (1-based), identity elsewhere.
    pub fn single_site(op: &DMatrix<Cx>, k: usize, n_sites: usize) -> Result<Self> {
        let m = embed(op, k, n_sites)?;
        Self::new(op.nrows(), n_sites, m)
    }

    /// `Σ_k op_k`, which commutes with every site permutation.
    pub fn site_sum(op: &DMatrix<Cx>, n_sites: usize) -> Result<Self> {
        let d = op.nrows();
        let mut h = Self::zero(d, n_sites)?;
        for k in 1..=n_sites {
            h.m += embed(op, k, n_sites)?;
        }
        Self::new(d, n_sites, h.m)
    }

    /// `Σ_k Z_k` with `Z = diag(d−1, d−3, …, 1−d)`; Pauli `σ_z` for qubits.
    pub fn z_sum(d: usize, n_sites: usize) -> Result<Self> {
        let z = DMatrix::from_diagonal(&DVector::from_fn(d, |j, _| c(d as f64 - 1.0 - 2.0 * j as f64)));
        Self::site_sum(&z, n_sites)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn matrix(&self) -> &DMatrix<Cx> {
        &self.m
    }

    pub fn is_zero(&self) -> bool {
        self.m.iter().all(|z| *z == c(0.0))
    }
}

fn embed(op: &DMatrix<Cx>, k: usize, n_sites: usize) -> Result<DMatrix<Cx>> {
    let d = op.nrows();
    if op.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: op.ncols(),
        });
    }
    if k == 0 || k > n_sites {
        return Err(Error::InvalidArgument(format!("site {k} out of range 1..={n_sites}")));
    }
    check_state_size(d, n_sites)?;
    let left = d.pow((k - 1) as u32);
    let right = d.pow((n_sites - k) as u32);
    Ok(DMatrix::<Cx>::identity(left, left)
        .kronecker(op)
        .kronecker(&DMatrix::<Cx>::identity(right, right)))
}

/// Partial trace onto site `k` (1-based).
pub fn reduced_state(rho: &DensityMatrix, k: usize) -> Result<DensityMatrix> {
    let n = rho.n_sites;
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("site {k} out of range 1..={n}")));
    }
    let d = rho.d;
    let left = d.pow((k - 1) as u32);
    let right = d.pow((n - k) as u32);
    let mut out = DMatrix::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let mut s = c(0.0);
            for l in 0..left {
                for r in 0..right {
                    let i = (l * d + a) * right + r;
                    let j = (l * d + b) * right + r;
                    s += rho.m[(i, j)];
                }
            }
            out[(a, b)] = s;
        }
    }
    Ok(DensityMatrix::new_unchecked(d, 1, out))
}

/// Largest Frobenius distance between two single-site reduced states.
pub fn sync_distance(rho: &DensityMatrix) -> f64 {
    let reduced: Vec<DensityMatrix> = (1..=rho.n_sites)
        .map(|k| reduced_state(rho, k).expect("site index in range"))
        .collect();
    let mut worst: f64 = 0.0;
    for (i, a) in reduced.iter().enumerate() {
        for b in &reduced[i + 1..] {
            worst = worst.max(a.distance(b));
        }
    }
    worst
}

/// Largest spread of `tr(ρ σ_k)` over sites `k`.
pub fn expectation_consensus_gap(rho: &DensityMatrix, sigma: &DMatrix<Cx>) -> Result<f64> {
    if sigma.nrows() != rho.d || sigma.ncols() != rho.d {
        return Err(Error::DimensionMismatch {
            expected: rho.d,
            got: sigma.nrows(),
        });
    }
    if hermitian_defect(sigma) > HERMITIAN_TOL {
        return Err(Error::InvalidArgument("observable is not Hermitian".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 1..=rho.n_sites {
        let e = (reduced_state(rho, k)?.m * sigma).trace().re;
        lo = lo.min(e);
        hi = hi.max(e);
    }
    Ok(hi - lo)
}
