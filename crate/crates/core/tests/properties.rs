use proptest::prelude::*;
use qcl_core::netgraph::{generator_laplacian, is_strongly_connected, underlying_graph};
use qcl_core::optimize::{
    maximize_rate, pareto_front, pareto_scan, BudgetConstraint, Objective, OptimizerConfig, REFINE_TOL,
};
use qcl_core::permgroup::{Generator, GeneratorSet, Permutation};
use qcl_core::spectra::{eigenvalues, lambda2_re, RateModel};
use qcl_core::Topology;

fn arb_generators(n: usize) -> impl Strategy<Value = GeneratorSet> {
    let perm = Just((0..n).collect::<Vec<usize>>()).prop_shuffle();
    prop::collection::vec(perm, 1..=3).prop_filter_map("identity or duplicate", move |maps| {
        let gens = maps
            .into_iter()
            .enumerate()
            .map(|(i, m)| Generator {
                perm: Permutation::from_images(m).unwrap(),
                label: format!("w{i}"),
            })
            .collect();
        GeneratorSet::new(n, gens).ok()
    })
}

fn gens_and_weights() -> impl Strategy<Value = (GeneratorSet, Vec<f64>)> {
    (3usize..=5).prop_flat_map(arb_generators).prop_flat_map(|g| {
        let k = g.len();
        (Just(g), prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..1.0], k))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn connectivity_iff_positive_lambda2((gens, w) in gens_and_weights()) {
        let connected = is_strongly_connected(&underlying_graph(&gens, &w).unwrap());
        let spec = eigenvalues(generator_laplacian(&gens, &w).unwrap().matrix()).unwrap();
        let l2 = lambda2_re(&spec).unwrap();
        prop_assert_eq!(connected, l2 > 1e-9, "lambda2 = {}", l2);
    }

    #[test]
    fn rates_scale_with_weights((gens, w) in gens_and_weights(), c in 0.1f64..10.0) {
        let model = RateModel::new(&gens, 2).unwrap();
        let r = model.rates(&w).unwrap();
        let scaled: Vec<f64> = w.iter().map(|x| x * c).collect();
        let rs = model.rates(&scaled).unwrap();
        prop_assert!((rs.lambda_cons - c * r.lambda_cons).abs() < 1e-9 * (1.0 + c));
        prop_assert!((rs.lambda_synch - c * r.lambda_synch).abs() < 1e-9 * (1.0 + c));
    }

    #[test]
    fn consensus_never_exceeds_synch((gens, w) in gens_and_weights()) {
        let r = RateModel::new(&gens, 2).unwrap().rates(&w).unwrap();
        prop_assert!(r.lambda_cons <= r.lambda_synch + 1e-12);
    }
}

fn preset_parts(name: &str) -> (RateModel, BudgetConstraint) {
    let t = Topology::preset(name).unwrap();
    (RateModel::new(&t.gens, 2).unwrap(), t.constraint().unwrap())
}

#[test]
fn optimum_is_homogeneous_in_budget() {
    let t = Topology::preset("g1-3").unwrap();
    let model = RateModel::new(&t.gens, 2).unwrap();
    let cfg = OptimizerConfig::default();
    let base = maximize_rate(&model, &t.constraint().unwrap(), Objective::Consensus, &cfg).unwrap();
    for c in [0.5, 3.0] {
        let constraint = BudgetConstraint::for_generators(&t.gens, c).unwrap();
        let opt = maximize_rate(&model, &constraint, Objective::Consensus, &cfg).unwrap();
        assert!(((opt.value - c * base.value) / (c * base.value)).abs() < 1e-6, "{c}: {opt:?}");
        assert!((opt.budget_used - c).abs() < 1e-12);
    }
}

#[test]
fn optimizer_never_loses_to_its_grid() {
    for name in ["g1-3", "g2-3", "g1-4"] {
        let (model, constraint) = preset_parts(name);
        let cloud = pareto_scan(&model, &constraint, 40).unwrap();
        for obj in [Objective::Consensus, Objective::Synchronization] {
            let best_grid = cloud
                .iter()
                .map(|p| match obj {
                    Objective::Consensus => p.lambda_cons,
                    Objective::Synchronization => p.lambda_synch,
                })
                .fold(f64::NEG_INFINITY, f64::max);
            let opt = maximize_rate(&model, &constraint, obj, &OptimizerConfig::default()).unwrap();
            // Tie-breaking may trade at most REFINE_TOL per unit budget of the primary value.
            let slack = REFINE_TOL * constraint.budget() + 1e-12;
            assert!(opt.value >= best_grid - slack, "{name} {obj:?}: {} < {best_grid}", opt.value);
            assert!(constraint.is_feasible(&opt.weights, 1e-12));
        }
    }
}

#[test]
fn front_is_not_dominated() {
    for name in ["g1-3", "g2-3", "g1-4"] {
        let (model, constraint) = preset_parts(name);
        let cloud = pareto_scan(&model, &constraint, 40).unwrap();
        let front = pareto_front(&cloud);
        assert!(!front.is_empty());
        assert_eq!(front.len(), cloud.iter().filter(|p| p.on_front).count());
        for f in &front {
            for p in &cloud {
                let dominates = p.lambda_cons >= f.lambda_cons
                    && p.lambda_synch >= f.lambda_synch
                    && (p.lambda_cons > f.lambda_cons || p.lambda_synch > f.lambda_synch);
                assert!(!dominates, "{name}: {p:?} dominates {f:?}");
            }
        }
        assert!(front.windows(2).all(|w| w[0].lambda_synch <= w[1].lambda_synch));
    }
}

#[test]
fn g1_3_cloud_bounds() {
    let (model, constraint) = preset_parts("g1-3");
    let cloud = pareto_scan(&model, &constraint, 200).unwrap();
    assert!(cloud.iter().all(|p| p.lambda_synch <= 0.5 + 1e-12 && p.lambda_cons <= p.lambda_synch + 1e-12));
    let max_synch = cloud.iter().map(|p| p.lambda_synch).fold(0.0, f64::max);
    assert!((max_synch - 0.5).abs() < 1e-9);
    let front = pareto_front(&cloud);
    let extreme = front.iter().map(|p| p.lambda_cons).fold(0.0, f64::max);
    assert!((extreme - 0.4).abs() < 1e-2, "{extreme}");
}
