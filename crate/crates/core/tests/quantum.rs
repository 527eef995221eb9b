use num_complex::Complex64;
use qcl_core::induced::{partitions_of, InducedStructure};
use qcl_core::permgroup::generate_group;
use qcl_core::quantum::{
    build_lq, consensus_state, decompose, evolve, fit_decay_rate_series, gellmann_basis, generic_initial_state,
    lindblad_rhs, reconstruct, symmetric_state, symmetrized_coefficients, sync_distance, to_interaction_frame,
    DensityMatrix, EvolveConfig, Frame, Hamiltonian, DEFAULT_LQ_CAP,
};
use qcl_core::spectra::{eigenvalues, multiset_inclusion, RateModel, Spectrum};
use qcl_core::Topology;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn decompose_round_trip() {
    let mut r = rng(1);
    for (d, n) in [(2, 2), (2, 3), (3, 2)] {
        let basis = gellmann_basis(d).unwrap();
        let rho = DensityMatrix::random_mixed(d, n, &mut r).unwrap();
        let c = decompose(&rho, &basis).unwrap();
        assert!((c.values()[0] - 1.0).abs() < 1e-12);
        let back = reconstruct(&c, &basis).unwrap();
        assert!(back.distance(&rho) < 1e-10, "d={d} n={n}");
    }
}

#[test]
fn rhs_is_hermitian_and_traceless() {
    let mut r = rng(2);
    let t = Topology::preset("g2-3").unwrap();
    let rho = DensityMatrix::random_mixed(2, 3, &mut r).unwrap();
    let rhs = lindblad_rhs(&rho, &Hamiltonian::z_sum(2, 3).unwrap(), &t.gens, &[0.3, 0.1, 0.2]).unwrap();
    assert!((&rhs - rhs.adjoint()).norm() < 1e-12);
    assert!(rhs.trace().norm() < 1e-12);
}

#[test]
fn symmetric_coefficients_match_group_average() {
    let mut r = rng(3);
    let t = Topology::preset("g1-3").unwrap();
    let basis = gellmann_basis(2).unwrap();
    let rho = DensityMatrix::random_mixed(2, 3, &mut r).unwrap();
    let sym = consensus_state(&rho, &t.gens).unwrap();
    let lhs = decompose(&sym, &basis).unwrap();
    let rhs = symmetrized_coefficients(&decompose(&rho, &basis).unwrap());
    let dev = lhs.values().iter().zip(rhs.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-10, "{dev}");
}

#[test]
fn symmetric_state_is_a_fixed_point_for_subgroups() {
    let mut r = rng(4);
    // (1 2)(3 4) generates a two-element subgroup of S_4.
    let t = Topology::parse("name = \"pair\"\nN = 4\n[[generators]]\ncycles = [[1, 2], [3, 4]]\nweight = \"w\"\n")
        .unwrap();
    let rho = DensityMatrix::random_mixed(2, 4, &mut r).unwrap();
    let group = generate_group(&t.gens, 10).unwrap();
    assert_eq!(group.len(), 2);
    let fixed = symmetric_state(&rho, &group).unwrap();
    let rhs = lindblad_rhs(&fixed, &Hamiltonian::zero(2, 4).unwrap(), &t.gens, &[0.7]).unwrap();
    assert!(rhs.norm() < 1e-10);
}

#[test]
fn lq_spectrum_is_union_of_induced_blocks() {
    let t = Topology::preset("g1-3").unwrap();
    let w = [0.17, 0.31];
    let lq = build_lq(&t.gens, &w, 2, DEFAULT_LQ_CAP).unwrap();
    let lq_spec = eigenvalues(lq.matrix()).unwrap();

    // Index patterns over {0..3}^3 split by their multiset of values: 4 constant
    // patterns (trivial block), 12 of shape (2,1) and 4 of shape (1,1,1).
    let mut expected = vec![Complex64::new(0.0, 0.0); 4];
    for p in partitions_of(3, 4) {
        let copies = match p.parts() {
            [2, 1] => 12,
            [1, 1, 1] => 4,
            other => panic!("unexpected partition {other:?}"),
        };
        let block = eigenvalues(InducedStructure::new(&p, &t.gens).unwrap().laplacian(&w).matrix()).unwrap();
        for _ in 0..copies {
            expected.extend_from_slice(block.values());
        }
    }
    let expected = Spectrum::new(expected);
    assert_eq!(expected.len(), lq_spec.len());
    assert!(multiset_inclusion(&expected, &lq_spec, 1e-9).is_empty());
    assert!(multiset_inclusion(&lq_spec, &expected, 1e-9).is_empty());
}

#[test]
fn lab_frame_maps_to_interaction_frame() {
    let mut r = rng(5);
    let t = Topology::preset("g1-3").unwrap();
    let w = [0.2, 0.3];
    let h = Hamiltonian::z_sum(2, 3).unwrap();
    let rho0 = DensityMatrix::random_mixed(2, 3, &mut r).unwrap();
    let cfg = |frame| EvolveConfig {
        t_final: 5.0,
        dt: 1e-3,
        frame,
        sample_interval: 1.0,
    };
    let lab = evolve(&rho0, &h, &t.gens, &w, &cfg(Frame::Lab)).unwrap();
    let inter = evolve(&rho0, &h, &t.gens, &w, &cfg(Frame::Interaction)).unwrap();
    for ((time, a), b) in lab.times.iter().zip(&lab.states).zip(&inter.states) {
        let moved = to_interaction_frame(a, &h, *time).unwrap();
        assert!(moved.distance(b) < 1e-7, "t = {time}");
    }
}

#[test]
fn sync_distance_decays_at_lambda_synch() {
    let mut r = rng(6);
    let t = Topology::preset("g1-3").unwrap();
    // Off the optimum, so lambda_synch is separated from lambda_cons.
    let w = [0.25, 0.125];
    let rates = RateModel::new(&t.gens, 2).unwrap().rates(&w).unwrap();
    let rho0 = generic_initial_state(&t.gens, &w, 2, &mut r).unwrap();
    let cfg = EvolveConfig {
        t_final: 60.0,
        dt: 1e-3,
        frame: Frame::Lab,
        sample_interval: 0.1,
    };
    let traj = evolve(&rho0, &Hamiltonian::zero(2, 3).unwrap(), &t.gens, &w, &cfg).unwrap();
    let dist: Vec<f64> = traj.states.iter().map(sync_distance).collect();
    let fitted = fit_decay_rate_series(&traj.times, &dist).unwrap();
    let rel = (fitted - rates.lambda_synch).abs() / rates.lambda_synch;
    assert!(rel < 0.05, "fitted {fitted} vs {}", rates.lambda_synch);
}
