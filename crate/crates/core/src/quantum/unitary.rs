//! Site-permutation unitaries `U_π |i₁…i_N⟩ = |i_{π(1)}…i_{π(N)}⟩`, so that
//! `U_π (Q₁⊗⋯⊗Q_N) U_π† = Q_{π(1)}⊗⋯⊗Q_{π(N)}`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::state::{DensityMatrix, Hamiltonian};
use super::{check_state_size, Cx};
use crate::error::{Error, Result};
use crate::permgroup::{is_closed, GeneratorSet, Permutation};

pub const INVARIANCE_TOL: f64 = 1e-10;

/// `src[j]` is the basis index with `U_π |src[j]⟩ = |j⟩`; site 1 is the most
/// significant digit.
pub fn site_index_map(p: &Permutation, d: usize) -> Result<Vec<usize>> {
    let n = p.degree();
    let dim = check_state_size(d, n)?;
    let inv = p.inverse();
    let mut digits = vec![0; n];
    let mut src_digits = vec![0; n];
    Ok((0..dim)
        .map(|j| {
            let mut x = j;
            for k in (0..n).rev() {
                digits[k] = x % d;
                x /= d;
            }
            for m in 0..n {
                src_digits[m] = digits[inv.apply(m)];
            }
            src_digits.iter().fold(0, |acc, &v| acc * d + v)
        })
        .collect())
}

pub fn permutation_unitary(p: &Permutation, d: usize) -> Result<DMatrix<Cx>> {
    let src = site_index_map(p, d)?;
    let dim = src.len();
    let mut u = DMatrix::zeros(dim, dim);
    for (j, &i) in src.iter().enumerate() {
        u[(j, i)] = Complex64::new(1.0, 0.0);
    }
    Ok(u)
}

/// `U ρ U†` for the unitary described by `src`.
pub(crate) fn conjugate(m: &DMatrix<Cx>, src: &[usize]) -> DMatrix<Cx> {
    let dim = src.len();
    DMatrix::from_fn(dim, dim, |j, k| m[(src[j], src[k])])
}

fn check_degree(p: &Permutation, n: usize) -> Result<()> {
    if p.degree() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.degree(),
        });
    }
    Ok(())
}

/// Group average `|G|⁻¹ Σ_{π∈G} U_π ρ U_π†`.
pub fn symmetric_state(rho: &DensityMatrix, group: &[Permutation]) -> Result<DensityMatrix> {
    if group.is_empty() || !is_closed(group) {
        return Err(Error::NotAGroup);
    }
    let mut acc = DMatrix::zeros(rho.dim(), rho.dim());
    for p in group {
        check_degree(p, rho.n_sites())?;
        acc += conjugate(rho.matrix(), &site_index_map(p, rho.d())?);
    }
    let m = acc / Complex64::new(group.len() as f64, 0.0);
    Ok(DensityMatrix::new_unchecked(rho.d(), rho.n_sites(), m))
}

/// `‖[H₀, U_π]‖_F < 1e-10` for every generator.
pub fn is_permutation_invariant(h0: &Hamiltonian, gens: &GeneratorSet) -> Result<bool> {
    if gens.degree() != h0.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: h0.n_sites(),
            got: gens.degree(),
        });
    }
    for p in gens.perms() {
        let conj = conjugate(h0.matrix(), &site_index_map(p, h0.d())?);
        if (conj - h0.matrix()).norm() >= INVARIANCE_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroup::generate_group;
    use crate::quantum::state::reduced_state;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cyc(n: usize, c: &[Vec<usize>]) -> Permutation {
        Permutation::from_cycles(n, c).unwrap()
    }

    fn random_op(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<Cx> {
        use rand::Rng;
        DMatrix::from_fn(d, d, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn identity_and_swap() {
        let id = permutation_unitary(&Permutation::identity(3), 2).unwrap();
        assert_eq!(id, DMatrix::identity(8, 8));
        let swap = permutation_unitary(&cyc(2, &[vec![1, 2]]), 2).unwrap();
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        #[rustfmt::skip]
        let want = DMatrix::from_row_slice(4, 4, &[
            l, o, o, o,
            o, o, l, o,
            o, l, o, o,
            o, o, o, l,
        ]);
        assert_eq!(swap, want);
    }

    #[test]
    fn conjugation_permutes_tensor_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [2, 3] {
            let q: Vec<DMatrix<Cx>> = (0..3).map(|_| random_op(&mut rng, d)).collect();
            for cycles in [vec![vec![1, 2, 3]], vec![vec![1, 2]], vec![vec![1, 3, 2]], vec![vec![2, 3]]] {
                let p = cyc(3, &cycles);
                let u = permutation_unitary(&p, d).unwrap();
                let lhs = &u * q[0].kronecker(&q[1]).kronecker(&q[2]) * u.adjoint();
                let rhs = q[p.apply(0)].kronecker(&q[p.apply(1)]).kronecker(&q[p.apply(2)]);
                assert!((lhs - rhs).norm() < 1e-13, "d={d} {p}");
                assert!((&u * u.adjoint() - DMatrix::<Cx>::identity(u.nrows(), u.nrows())).norm() == 0.0);
            }
        }
    }

    #[test]
    fn composition_order() {
        let p = cyc(3, &[vec![1, 2, 3]]);
        let s = cyc(3, &[vec![1, 2]]);
        let up = permutation_unitary(&p, 2).unwrap();
        let us = permutation_unitary(&s, 2).unwrap();
        assert_eq!(&up * &us, permutation_unitary(&s.compose(&p), 2).unwrap());
        assert_eq!(permutation_unitary(&p.inverse(), 2).unwrap(), up.adjoint());
    }

    #[test]
    fn fast_conjugation_matches_matrix_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = DensityMatrix::random_mixed(2, 3, &mut rng).unwrap();
        let p = cyc(3, &[vec![1, 3, 2]]);
        let u = permutation_unitary(&p, 2).unwrap();
        let fast = conjugate(rho.matrix(), &site_index_map(&p, 2).unwrap());
        assert!((fast - &u * rho.matrix() * u.adjoint()).norm() < 1e-15);
    }

    #[test]
    fn symmetric_state_examples() {
        let rho = DensityMatrix::basis_state(2, &[0, 1]).unwrap();
        let trivial = symmetric_state(&rho, &[Permutation::identity(2)]).unwrap();
        assert_eq!(trivial, rho);

        let swap = cyc(2, &[vec![1, 2]]);
        let avg = symmetric_state(&rho, &[Permutation::identity(2), swap.clone()]).unwrap();
        let mut want = DMatrix::zeros(4, 4);
        want[(1, 1)] = Complex64::new(0.5, 0.0);
        want[(2, 2)] = Complex64::new(0.5, 0.0);
        assert_eq!(avg.matrix(), &want);
        assert_eq!(symmetric_state(&avg, &[Permutation::identity(2), swap.clone()]).unwrap(), avg);
        assert!(matches!(symmetric_state(&rho, &[swap]), Err(Error::NotAGroup)));
    }

    #[test]
    fn symmetric_state_is_invariant_and_synchronous() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rho = DensityMatrix::random_mixed(2, 3, &mut rng).unwrap();
        let gens = GeneratorSet::from_cycles(3, &[(&[vec![1, 2, 3]], "a"), (&[vec![1, 2]], "b")]).unwrap();
        let group = generate_group(&gens, 100).unwrap();
        let sym = symmetric_state(&rho, &group).unwrap();
        for p in &group {
            let c = conjugate(sym.matrix(), &site_index_map(p, 2).unwrap());
            assert!((c - sym.matrix()).norm() < 1e-15);
        }
        let r1 = reduced_state(&sym, 1).unwrap();
        assert!(reduced_state(&sym, 3).unwrap().distance(&r1) < 1e-15);
    }

    #[test]
    fn invariance_of_hamiltonians() {
        let gens = GeneratorSet::from_cycles(3, &[(&[vec![1, 2, 3]], "a"), (&[vec![1, 2]], "b")]).unwrap();
        assert!(is_permutation_invariant(&Hamiltonian::z_sum(2, 3).unwrap(), &gens).unwrap());
        assert!(is_permutation_invariant(&Hamiltonian::zero(2, 3).unwrap(), &gens).unwrap());
        let z = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
        ]));
        let h = Hamiltonian::single_site(&z, 1, 3).unwrap();
        assert!(!is_permutation_invariant(&h, &gens).unwrap());
    }
}
