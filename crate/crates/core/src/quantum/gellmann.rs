//! Generalized Gell-Mann basis and the real coefficient view of a density
//! matrix, `ρ = d^{-N} Σ_μ ρ_μ λ_{μ₁}⊗⋯⊗λ_{μ_N}`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::DensityMatrix;
use super::{check_state_size, Cx};
use crate::error::{Error, Result};

/// Imaginary parts of decomposition coefficients above this are reported as
/// a failure (the input was not Hermitian).
const IMAG_TOL: f64 = 1e-9;

/// `d²` Hermitian matrices, identity first, then the symmetric, antisymmetric
/// and diagonal families, scaled so `tr(λ_a λ_b) = d·δ_ab`.
#[derive(Debug, Clone)]
pub struct GellMannBasis {
    d: usize,
    matrices: Vec<DMatrix<Cx>>,
    nonzeros: Vec<Vec<(usize, usize, Cx)>>,
}

impl GellMannBasis {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidArgument(format!("Gell-Mann basis needs d >= 2, got {d}")));
        }
        let s = (d as f64 / 2.0).sqrt();
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let mut matrices = vec![DMatrix::identity(d, d)];
        for j in 0..d {
            for k in j + 1..d {
                let mut m = DMatrix::zeros(d, d);
                m[(j, k)] = one * s;
                m[(k, j)] = one * s;
                matrices.push(m);
            }
        }
        for j in 0..d {
            for k in j + 1..d {
                let mut m = DMatrix::zeros(d, d);
                m[(j, k)] = -i * s;
                m[(k, j)] = i * s;
                matrices.push(m);
            }
        }
        for l in 1..d {
            let c = s * (2.0 / (l * (l + 1)) as f64).sqrt();
            let mut m = DMatrix::zeros(d, d);
            for j in 0..l {
                m[(j, j)] = one * c;
            }
            m[(l, l)] = one * (-(l as f64) * c);
            matrices.push(m);
        }
        let nonzeros = matrices
            .iter()
            .map(|m: &DMatrix<Cx>| {
                let mut nz = Vec::new();
                for r in 0..d {
                    for c in 0..d {
                        if m[(r, c)] != Complex64::new(0.0, 0.0) {
                            nz.push((r, c, m[(r, c)]));
                        }
                    }
                }
                nz
            })
            .collect();
        Ok(Self { d, matrices, nonzeros })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrices(&self) -> &[DMatrix<Cx>] {
        &self.matrices
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// Nonzero entries `(row, col, value)` of `λ_μ₁⊗⋯⊗λ_μN`.
    fn product_nonzeros(&self, mu: &[usize]) -> Vec<(usize, usize, Cx)> {
        let mut cur = vec![(0usize, 0usize, Complex64::new(1.0, 0.0))];
        for &m in mu {
            let mut next = Vec::with_capacity(cur.len() * self.nonzeros[m].len());
            for &(r, c, v) in &cur {
                for &(a, b, x) in &self.nonzeros[m] {
                    next.push((r * self.d + a, c * self.d + b, v * x));
                }
            }
            cur = next;
        }
        cur
    }
}

/// Real coefficients `ρ_μ` indexed row-major by `(μ₁,…,μ_N) ∈ {0..d²−1}^N`
/// with `μ₁` most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    d: usize,
    n_sites: usize,
    values: Vec<f64>,
}

impl CoefficientVector {
    pub fn new(d: usize, n_sites: usize, values: Vec<f64>) -> Result<Self> {
        let expected = (d * d).pow(n_sites as u32);
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Self { d, n_sites, values })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, mu: &[usize]) -> f64 {
        self.values[multi_to_flat(mu, self.d * self.d)]
    }
}

pub(crate) fn flat_to_multi(mut idx: usize, base: usize, n: usize) -> Vec<usize> {
    let mut mu = vec![0; n];
    for k in (0..n).rev() {
        mu[k] = idx % base;
        idx /= base;
    }
    mu
}

pub(crate) fn multi_to_flat(mu: &[usize], base: usize) -> usize {
    mu.iter().fold(0, |acc, &m| acc * base + m)
}

pub fn gellmann_basis(d: usize) -> Result<GellMannBasis> {
    GellMannBasis::new(d)
}

/// `ρ_μ = tr(ρ · λ_μ₁⊗⋯⊗λ_μN)`.
pub fn decompose(rho: &DensityMatrix, basis: &GellMannBasis) -> Result<CoefficientVector> {
    if rho.d() != basis.d {
        return Err(Error::DimensionMismatch {
            expected: basis.d,
            got: rho.d(),
        });
    }
    let n = rho.n_sites();
    check_state_size(basis.d, n)?;
    let m = rho.matrix();
    let base = basis.len();
    let values = (0..base.pow(n as u32))
        .map(|idx| {
            let mu = flat_to_multi(idx, base, n);
            let c: Cx = basis
                .product_nonzeros(&mu)
                .into_iter()
                .map(|(r, col, v)| v * m[(col, r)])
                .sum();
            if c.im.abs() > IMAG_TOL {
                return Err(Error::NumericalFailure(format!(
                    "coefficient {mu:?} has imaginary part {:e}",
                    c.im
                )));
            }
            Ok(c.re)
        })
        .collect::<Result<Vec<_>>>()?;
    CoefficientVector::new(basis.d, n, values)
}

/// Inverse of [`decompose`]; validates the result as a density matrix.
pub fn reconstruct(coeffs: &CoefficientVector, basis: &GellMannBasis) -> Result<DensityMatrix> {
    let m = reconstruct_matrix(coeffs, basis)?;
    DensityMatrix::new(basis.d, coeffs.n_sites, m)
}

pub(crate) fn reconstruct_matrix(coeffs: &CoefficientVector, basis: &GellMannBasis) -> Result<DMatrix<Cx>> {
    if coeffs.d != basis.d {
        return Err(Error::DimensionMismatch {
            expected: basis.d,
            got: coeffs.d,
        });
    }
    let n = coeffs.n_sites;
    check_state_size(basis.d, n)?;
    let dim = basis.d.pow(n as u32);
    let scale = 1.0 / dim as f64;
    let mut m = DMatrix::zeros(dim, dim);
    for (idx, &c) in coeffs.values.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let mu = flat_to_multi(idx, basis.len(), n);
        for (r, col, v) in basis.product_nonzeros(&mu) {
            m[(r, col)] += v * (c * scale);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_product(a: &DMatrix<Cx>, b: &DMatrix<Cx>) -> Cx {
        (a * b).trace()
    }

    #[test]
    fn pauli_for_qubits() {
        let b = gellmann_basis(2).unwrap();
        assert_eq!(b.len(), 4);
        let m = b.matrices();
        let c = |re: f64, im: f64| Complex64::new(re, im);
        assert_eq!(m[1], DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]));
        assert_eq!(m[2], DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]));
        assert_eq!(m[3], DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]));
    }

    #[test]
    fn orthogonality_and_tracelessness() {
        for d in 2..=4 {
            let b = gellmann_basis(d).unwrap();
            assert_eq!(b.len(), d * d);
            for (i, x) in b.matrices().iter().enumerate() {
                assert!((x - x.adjoint()).norm() < 1e-15);
                if i > 0 {
                    assert!(x.trace().norm() < 1e-14);
                }
                for (j, y) in b.matrices().iter().enumerate() {
                    let want = if i == j { d as f64 } else { 0.0 };
                    assert!((trace_product(x, y) - want).norm() < 1e-13, "d={d} {i} {j}");
                }
            }
        }
        assert!(gellmann_basis(1).is_err());
    }

    #[test]
    fn flat_index_is_row_major() {
        assert_eq!(flat_to_multi(multi_to_flat(&[1, 0, 3], 4), 4, 3), vec![1, 0, 3]);
        assert_eq!(multi_to_flat(&[1, 0, 3], 4), 19);
    }

    #[test]
    fn maximally_mixed_has_only_identity_coefficient() {
        let b = gellmann_basis(3).unwrap();
        let rho = DensityMatrix::maximally_mixed(3, 2).unwrap();
        let c = decompose(&rho, &b).unwrap();
        assert!((c.values()[0] - 1.0).abs() < 1e-15);
        assert!(c.values()[1..].iter().all(|v| v.abs() < 1e-15));
    }
}
