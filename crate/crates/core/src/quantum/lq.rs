//! The coefficient-space Laplacian `L_Q`, with `dX/dt = −L_Q X` on the
//! Gell-Mann coefficients.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::gellmann::{decompose, flat_to_multi, gellmann_basis, multi_to_flat, CoefficientVector};
use super::state::DensityMatrix;
use super::unitary::symmetric_state;
use super::Cx;
use crate::error::{Error, Result};
use crate::netgraph::{settle_diagonal, Laplacian};
use crate::permgroup::{generate_group, GeneratorSet, Permutation, DEFAULT_GROUP_CAP};
use crate::spectra::{eigenvalues, ZERO_TOL};

pub const DEFAULT_LQ_CAP: usize = 4096;
/// Initial states whose overlap with the slowest mode falls below this are
/// redrawn.
pub const MIN_SLOW_OVERLAP: f64 = 1e-6;
const MAX_DRAWS: usize = 100;
/// Eigenvalues whose real part is this close to `Re λ₂` count as slowest.
const SLOW_TOL: f64 = 1e-7;

/// `Σ_π w_π (I − P_π)` on multi-indices `ν ∈ {0..d²−1}^N`, where row `ν`
/// pulls from `ν∘π⁻¹`.
pub fn build_lq(gens: &GeneratorSet, weights: &[f64], d: usize, cap: usize) -> Result<Laplacian> {
    gens.check_weights(weights)?;
    if d < 2 {
        return Err(Error::InvalidArgument(format!("d must be >= 2, got {d}")));
    }
    let n = gens.degree();
    let base = d * d;
    let size = (base as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > cap as u128 {
        return Err(Error::CapExceeded { what: "L_Q dimension", cap });
    }
    let size = size as usize;
    let mut l = DMatrix::zeros(size, size);
    for (p, &w) in gens.perms().zip(weights) {
        if w == 0.0 {
            continue;
        }
        let inv = p.inverse();
        for row in 0..size {
            let nu = flat_to_multi(row, base, n);
            let pulled: Vec<usize> = (0..n).map(|k| nu[inv.apply(k)]).collect();
            let col = multi_to_flat(&pulled, base);
            if col != row {
                l[(row, col)] -= w;
            }
        }
    }
    settle_diagonal(&mut l);
    Ok(Laplacian::from_matrix(l))
}

/// Nonzero eigenvalue of `L_Q` with the smallest real part; `None` when the
/// spectrum is all zero.
pub fn lq_lambda2(lq: &Laplacian) -> Result<Option<Complex64>> {
    let spec = eigenvalues(lq.matrix())?;
    Ok(spec
        .values()
        .iter()
        .copied()
        .filter(|z| z.norm() > ZERO_TOL)
        .min_by(|a, b| a.re.total_cmp(&b.re).then(a.im.abs().total_cmp(&b.im.abs()))))
}

/// `exp(−L_Q t) c₀` at each requested time.
pub fn propagate_coefficients(lq: &Laplacian, c0: &CoefficientVector, times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let lq = lq.matrix();
    if lq.nrows() != c0.values().len() {
        return Err(Error::DimensionMismatch {
            expected: lq.nrows(),
            got: c0.values().len(),
        });
    }
    let x0 = DVector::from_column_slice(c0.values());
    times
        .iter()
        .map(|&t| {
            let prop = (lq * -t).exp();
            let x = prop * &x0;
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalFailure(format!("non-finite propagation at t = {t}")));
            }
            Ok(x.iter().copied().collect())
        })
        .collect()
}

/// Largest normalized overlap `|yᴴ c₀| / ‖c₀‖` of the coefficient vector with
/// a left eigenvector of the slowest nonzero modes of `L_Q`.
pub fn slowest_mode_overlap(lq: &Laplacian, c0: &CoefficientVector) -> Result<f64> {
    let Some(z2) = lq_lambda2(lq)? else {
        return Ok(0.0);
    };
    let spec = eigenvalues(lq.matrix())?;
    let x: DVector<Cx> = DVector::from_iterator(c0.values().len(), c0.values().iter().map(|&v| Complex64::new(v, 0.0)));
    let norm = x.norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let lt: DMatrix<Cx> = lq.matrix().transpose().map(|v| Complex64::new(v, 0.0));
    let mut best: f64 = 0.0;
    for z in spec.values().iter().filter(|z| (z.re - z2.re).abs() < SLOW_TOL && z.norm() > ZERO_TOL) {
        let shifted = &lt - DMatrix::<Cx>::identity(lt.nrows(), lt.ncols()) * *z;
        let svd = shifted.svd(false, true);
        let v_t = svd
            .v_t
            .ok_or_else(|| Error::NumericalFailure("SVD did not return right singular vectors".into()))?;
        let (k, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty");
        // Row k of Vᴴ is the conjugate of the null vector y.
        let y_conj = v_t.row(k);
        let overlap = (y_conj * &x)[(0, 0)].norm() / norm;
        best = best.max(overlap);
    }
    Ok(best)
}

/// Draws generic initial states until one overlaps the slowest `L_Q` mode by
/// at least [`MIN_SLOW_OVERLAP`]. Without a nonzero mode the first draw is
/// returned.
pub fn generic_initial_state<R: Rng>(gens: &GeneratorSet, weights: &[f64], d: usize, rng: &mut R) -> Result<DensityMatrix> {
    let lq = build_lq(gens, weights, d, DEFAULT_LQ_CAP)?;
    if lq_lambda2(&lq)?.is_none() {
        return DensityMatrix::random_generic(d, gens.degree(), rng);
    }
    let basis = gellmann_basis(d)?;
    for _ in 0..MAX_DRAWS {
        let rho = DensityMatrix::random_generic(d, gens.degree(), rng)?;
        let c0 = decompose(&rho, &basis)?;
        if slowest_mode_overlap(&lq, &c0)? >= MIN_SLOW_OVERLAP {
            return Ok(rho);
        }
    }
    Err(Error::NumericalFailure(format!(
        "no generic initial state in {MAX_DRAWS} draws overlaps the slowest mode"
    )))
}

/// Average of `ρ` over the group generated by `gens`; the full symmetrization
/// when the generators span `S_N`.
pub fn consensus_state(rho: &DensityMatrix, gens: &GeneratorSet) -> Result<DensityMatrix> {
    let group = generate_group(gens, DEFAULT_GROUP_CAP)?;
    symmetric_state(rho, &group)
}

/// Coefficients of the fully symmetric state: `ρ*_μ = (1/N!) Σ_σ ρ_{μ∘σ}`.
pub fn symmetrized_coefficients(c: &CoefficientVector) -> CoefficientVector {
    let n = c.n_sites();
    let base = c.d() * c.d();
    let perms = all_permutations(n);
    let values = (0..c.values().len())
        .map(|idx| {
            let mu = flat_to_multi(idx, base, n);
            let s: f64 = perms
                .iter()
                .map(|p| {
                    let moved: Vec<usize> = (0..n).map(|k| mu[p.apply(k)]).collect();
                    c.values()[multi_to_flat(&moved, base)]
                })
                .sum();
            s / perms.len() as f64
        })
        .collect();
    CoefficientVector::new(c.d(), n, values).expect("same shape")
}

fn all_permutations(n: usize) -> Vec<Permutation> {
    fn rec(cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
        if cur.len() == used.len() {
            out.push(Permutation::from_images(cur.clone()).expect("bijection"));
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn single_generator_structure() {
        let gens = GeneratorSet::from_cycles(3, &[(&[vec![1, 2, 3]], "w")]).unwrap();
        let lq = build_lq(&gens, &[0.7], 2, DEFAULT_LQ_CAP).unwrap();
        assert!(lq.row_sums().iter().all(|&s| s == 0.0));
        let l = lq.matrix();
        assert_eq!(l.nrows(), 64);
        for r in 0..64 {
            assert!(l[(r, r)] == 0.0 || l[(r, r)] == 0.7);
        }
        // Constant index patterns are fixed by every permutation.
        assert_eq!(l[(0, 0)], 0.0);
        assert_eq!(l[(21, 21)], 0.0);
    }

    #[test]
    fn cap_is_enforced() {
        let gens = GeneratorSet::from_cycles(7, &[(&[vec![1, 2]], "w")]).unwrap();
        assert_eq!(build_lq(&gens, &[1.0], 2, DEFAULT_LQ_CAP), Err(Error::CapExceeded { what: "L_Q dimension", cap: 4096 }));
        let gens = GeneratorSet::from_cycles(4, &[(&[vec![1, 2]], "w")]).unwrap();
        assert_eq!(build_lq(&gens, &[1.0], 3, DEFAULT_LQ_CAP), Err(Error::CapExceeded { what: "L_Q dimension", cap: 4096 }));
        let gens = GeneratorSet::from_cycles(4, &[(&[vec![1, 2]], "w")]).unwrap();
        assert_eq!(build_lq(&gens, &[1.0], 2, DEFAULT_LQ_CAP).unwrap().dim(), 256);
    }

    #[test]
    fn propagation_at_zero_is_identity() {
        let gens = GeneratorSet::from_cycles(2, &[(&[vec![1, 2]], "w")]).unwrap();
        let l = build_lq(&gens, &[1.0], 2, DEFAULT_LQ_CAP).unwrap();
        let c0 = CoefficientVector::new(2, 2, (0..16).map(|i| i as f64).collect()).unwrap();
        let out = propagate_coefficients(&l, &c0, &[0.0]).unwrap();
        assert_eq!(out[0], c0.values());
    }

    #[test]
    fn zero_weights_still_draw_a_state() {
        let gens = GeneratorSet::from_cycles(3, &[(&[vec![1, 2]], "w")]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        assert!(generic_initial_state(&gens, &[0.0], 2, &mut rng).is_ok());
    }

    #[test]
    fn permutation_enumeration() {
        assert_eq!(all_permutations(3).len(), 6);
        assert_eq!(all_permutations(1).len(), 1);
    }
}
