//! Edge-weight optimization under the linear budget `Σ ℓ_π w_π ≤ D`, and
//! Pareto sweeps over `(λ_Cons, λ_Synch)`.
//!
//! Both rates are positively homogeneous in the weights, so every optimum
//! saturates the budget. Searches therefore run on the budget face,
//! parametrized by simplex coordinates `x` with `w_i = R·x_i/ℓ_i`, where `R`
//! is the budget left after fixed weights.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::permgroup::GeneratorSet;
use crate::report::fmt_num;
use crate::spectra::{ConvergenceRates, RateModel};

#[derive(Debug, Clone, PartialEq)]
pub struct BudgetConstraint {
    lengths: Vec<f64>,
    budget: f64,
    fixed: Vec<Option<f64>>,
}

impl BudgetConstraint {
    pub fn new(lengths: Vec<f64>, budget: f64) -> Result<Self> {
        if !(budget.is_finite() && budget > 0.0) {
            return Err(Error::InfeasibleBudget(format!(
                "budget must be positive, got {budget}"
            )));
        }
        if let Some(l) = lengths.iter().find(|l| !l.is_finite() || **l <= 0.0) {
            return Err(Error::InfeasibleBudget(format!(
                "cycle lengths must be positive, got {l}"
            )));
        }
        let fixed = vec![None; lengths.len()];
        Ok(Self {
            lengths,
            budget,
            fixed,
        })
    }

    pub fn for_generators(gens: &GeneratorSet, budget: f64) -> Result<Self> {
        let lengths = gens.cycle_lengths().into_iter().map(|l| l as f64).collect();
        Self::new(lengths, budget)
    }

    /// Pins some coordinates; the rest share what remains of the budget.
    pub fn with_fixed(mut self, fixed: Vec<Option<f64>>) -> Result<Self> {
        if fixed.len() != self.lengths.len() {
            return Err(Error::DimensionMismatch {
                expected: self.lengths.len(),
                got: fixed.len(),
            });
        }
        if fixed.iter().flatten().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument("fixed weights must be non-negative".into()));
        }
        self.fixed = fixed;
        if self.remaining() < 0.0 {
            return Err(Error::InfeasibleBudget(format!(
                "fixed weights cost {} which exceeds the budget {}",
                self.budget - self.remaining(),
                self.budget
            )));
        }
        Ok(self)
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn cost(&self, weights: &[f64]) -> f64 {
        self.lengths.iter().zip(weights).map(|(l, w)| l * w).sum()
    }

    pub fn is_feasible(&self, weights: &[f64], tol: f64) -> bool {
        weights.len() == self.lengths.len()
            && weights.iter().all(|&w| w >= 0.0)
            && self.cost(weights) <= self.budget + tol
            && self
                .fixed
                .iter()
                .zip(weights)
                .all(|(f, w)| f.is_none_or(|f| f == *w))
    }

    fn free(&self) -> Vec<usize> {
        (0..self.lengths.len()).filter(|&i| self.fixed[i].is_none()).collect()
    }

    fn remaining(&self) -> f64 {
        let used: f64 = self
            .fixed
            .iter()
            .zip(&self.lengths)
            .filter_map(|(f, l)| f.map(|w| w * l))
            .sum();
        self.budget - used
    }

    /// Weight vector for simplex coordinates over the free generators.
    fn weights_at(&self, x: &[f64]) -> Vec<f64> {
        let rem = self.remaining();
        let mut w: Vec<f64> = self.fixed.iter().map(|f| f.unwrap_or(0.0)).collect();
        for (&i, &xi) in self.free().iter().zip(x) {
            w[i] = rem * xi / self.lengths[i];
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    Consensus,
    Synchronization,
}

impl Objective {
    fn pick(self, r: &ConvergenceRates) -> (f64, f64) {
        match self {
            Objective::Consensus => (r.lambda_cons, r.lambda_synch),
            Objective::Synchronization => (r.lambda_synch, r.lambda_cons),
        }
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "consensus" | "cons" => Ok(Objective::Consensus),
            "synchronization" | "synchronisation" | "synch" | "sync" => Ok(Objective::Synchronization),
            other => Err(Error::InvalidArgument(format!("unknown objective '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    /// Random starting points, in addition to the best point of a coarse grid.
    pub starts: usize,
    pub step_floor: f64,
    pub initial_step: f64,
    pub seed: u64,
    /// Resolution of the coarse grid that seeds the first start.
    pub seed_resolution: usize,
    /// Among maximizers of the objective, maximize the other rate.
    pub refine: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 20,
            step_floor: 1e-8,
            initial_step: 0.1,
            seed: 0,
            seed_resolution: 20,
            refine: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub weights: Vec<f64>,
    pub value: f64,
    pub lambda_cons: f64,
    pub lambda_synch: f64,
    pub budget_used: f64,
}

/// Tolerance (relative to the free budget) within which points count as
/// maximizers during the lexicographic refinement.
pub const REFINE_TOL: f64 = 1e-9;

fn search_directions(m: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let mut d = vec![0.0; m];
                d[i] = 1.0;
                d[j] = -1.0;
                dirs.push(d);
            }
        }
    }
    if m > 2 {
        for i in 0..m {
            let mut d = vec![-1.0 / (m - 1) as f64; m];
            d[i] = 1.0;
            dirs.push(d.clone());
            dirs.push(d.into_iter().map(|v| -v).collect());
        }
    }
    dirs
}

/// Moves `x` along `dir` by `step`, shortened so it stays on the simplex.
fn step_along(x: &[f64], dir: &[f64], step: f64) -> Option<Vec<f64>> {
    let limit = x
        .iter()
        .zip(dir)
        .filter(|(_, d)| **d < 0.0)
        .map(|(xi, d)| xi / -d)
        .fold(f64::INFINITY, f64::min);
    let t = step.min(limit);
    if t <= 0.0 {
        return None;
    }
    let mut y: Vec<f64> = x.iter().zip(dir).map(|(xi, d)| (xi + t * d).max(0.0)).collect();
    let s: f64 = y.iter().sum();
    y.iter_mut().for_each(|v| *v /= s);
    Some(y)
}

/// Poll-and-shrink pattern search: take the best improving move, double the
/// step after a success, halve it after a failed poll.
fn pattern_search<K, F>(start: Vec<f64>, dirs: &[Vec<f64>], cfg: &OptimizerConfig, eval: F) -> Result<(Vec<f64>, K)>
where
    K: PartialOrd + Copy,
    F: Fn(&[f64]) -> Result<K>,
{
    let mut x = start;
    let mut best = eval(&x)?;
    let mut step = cfg.initial_step;
    while step >= cfg.step_floor {
        let mut improved: Option<(Vec<f64>, K)> = None;
        for d in dirs {
            let Some(y) = step_along(&x, d, step) else { continue };
            let k = eval(&y)?;
            if k > best && improved.as_ref().is_none_or(|(_, b)| k > *b) {
                improved = Some((y, k));
            }
        }
        match improved {
            Some((y, k)) => {
                x = y;
                best = k;
                step = (step * 2.0).min(0.5);
            }
            None => step /= 2.0,
        }
    }
    Ok((x, best))
}

fn random_simplex_point(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let mut e: Vec<f64> = (0..m).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.iter_mut().for_each(|v| *v /= s);
    e
}

/// All `x = k/resolution` with non-negative integer `k` summing to
/// `resolution`, lexicographic in `k`.
fn simplex_grid(m: usize, resolution: usize) -> Vec<Vec<f64>> {
    fn rec(m: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == m {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(m, left - k, cur, out);
            cur.pop();
        }
    }
    if m == 0 {
        return vec![Vec::new()];
    }
    let mut ks = Vec::new();
    rec(m, resolution, &mut Vec::with_capacity(m), &mut ks);
    let r = resolution as f64;
    ks.into_iter()
        .map(|k| k.into_iter().map(|v| v as f64 / r).collect())
        .collect()
}

/// Default grid resolution for a given number of free weights.
pub fn default_resolution(free_weights: usize) -> usize {
    if free_weights <= 3 {
        200
    } else {
        60
    }
}

/// Best-found maximizer of the objective on the budget face (multi-start
/// pattern search). With `refine`, ties on the objective are broken by the
/// other rate.
pub fn maximize_rate(
    model: &RateModel,
    constraint: &BudgetConstraint,
    objective: Objective,
    cfg: &OptimizerConfig,
) -> Result<Optimum> {
    let free = constraint.free();
    let m = free.len();
    if model.generators().len() != constraint.lengths.len() {
        return Err(Error::DimensionMismatch {
            expected: model.generators().len(),
            got: constraint.lengths.len(),
        });
    }
    let eval = |x: &[f64]| -> Result<(f64, f64)> {
        let r = model.rates(&constraint.weights_at(x))?;
        Ok(objective.pick(&r))
    };

    let best_x = if m <= 1 {
        vec![1.0; m]
    } else {
        let dirs = search_directions(m);
        let grid = simplex_grid(m, cfg.seed_resolution.max(1));
        let scores = grid
            .par_iter()
            .map(|x| eval(x).map(|k| k.0))
            .collect::<Result<Vec<f64>>>()?;
        let grid_best = scores
            .iter()
            .enumerate()
            .fold(0, |b, (i, s)| if *s > scores[b] { i } else { b });

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut starts = vec![grid[grid_best].clone()];
        starts.extend((0..cfg.starts).map(|_| random_simplex_point(&mut rng, m)));

        let results = starts
            .into_par_iter()
            .map(|s| pattern_search(s, &dirs, cfg, |x| eval(x).map(|k| k.0)))
            .collect::<Result<Vec<_>>>()?;
        let (mut x, value) = results
            .into_iter()
            .reduce(|a, b| if b.1 > a.1 { b } else { a })
            .expect("at least one start");

        if cfg.refine {
            let threshold = value - REFINE_TOL * constraint.remaining().max(f64::MIN_POSITIVE);
            let lex = |y: &[f64]| eval(y).map(|(p, s)| (p.min(threshold), s));
            x = pattern_search(x, &dirs, cfg, lex)?.0;
        }
        x
    };

    let weights = constraint.weights_at(&best_x);
    let rates = model.rates(&weights)?;
    Ok(Optimum {
        value: objective.pick(&rates).0,
        lambda_cons: rates.lambda_cons,
        lambda_synch: rates.lambda_synch,
        budget_used: constraint.cost(&weights),
        weights,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoPoint {
    pub weights: Vec<f64>,
    pub lambda_cons: f64,
    pub lambda_synch: f64,
    pub on_front: bool,
}

/// Samples the budget face on a uniform simplex grid and marks the
/// non-dominated points. Output is in lexicographic grid-index order.
pub fn pareto_scan(model: &RateModel, constraint: &BudgetConstraint, resolution: usize) -> Result<Vec<ParetoPoint>> {
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    let m = constraint.free().len();
    let grid = if m <= 1 { vec![vec![1.0; m]] } else { simplex_grid(m, resolution) };
    let mut points = grid
        .par_iter()
        .map(|x| {
            let weights = constraint.weights_at(x);
            let r = model.rates(&weights)?;
            Ok(ParetoPoint {
                weights,
                lambda_cons: r.lambda_cons,
                lambda_synch: r.lambda_synch,
                on_front: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for i in front_indices(&points) {
        points[i].on_front = true;
    }
    Ok(points)
}

/// Indices of points not dominated by any other (maximizing both rates);
/// exact ties are all kept.
fn front_indices(points: &[ParetoPoint]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&points[a], &points[b]);
        pb.lambda_synch
            .total_cmp(&pa.lambda_synch)
            .then(pb.lambda_cons.total_cmp(&pa.lambda_cons))
    });
    let mut keep = Vec::new();
    // Best consensus rate among points with strictly larger synch rate.
    let mut best_above = f64::NEG_INFINITY;
    let mut i = 0;
    while i < order.len() {
        let synch = points[order[i]].lambda_synch;
        let group_max = points[order[i]].lambda_cons;
        let mut j = i;
        while j < order.len() && points[order[j]].lambda_synch == synch {
            let p = &points[order[j]];
            if p.lambda_cons == group_max && p.lambda_cons > best_above {
                keep.push(order[j]);
            }
            j += 1;
        }
        best_above = best_above.max(group_max);
        i = j;
    }
    keep.sort_unstable();
    keep
}

/// Non-dominated subset, sorted by `λ_Synch` ascending.
pub fn pareto_front(points: &[ParetoPoint]) -> Vec<ParetoPoint> {
    let mut front: Vec<ParetoPoint> = front_indices(points)
        .into_iter()
        .map(|i| ParetoPoint {
            on_front: true,
            ..points[i].clone()
        })
        .collect();
    front.sort_by(|a, b| a.lambda_synch.total_cmp(&b.lambda_synch));
    front
}

pub fn pareto_to_csv(labels: &[&str], points: &[ParetoPoint]) -> String {
    let mut out = String::new();
    for l in labels {
        let _ = write!(out, "w_{l},");
    }
    out.push_str("lambda_cons,lambda_synch,on_front\n");
    for p in points {
        for w in &p.weights {
            let _ = write!(out, "{},", fmt_num(*w));
        }
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_num(p.lambda_cons),
            fmt_num(p.lambda_synch),
            u8::from(p.on_front)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(cons: f64, synch: f64) -> ParetoPoint {
        ParetoPoint {
            weights: vec![],
            lambda_cons: cons,
            lambda_synch: synch,
            on_front: false,
        }
    }

    fn coords(v: &[ParetoPoint]) -> Vec<(f64, f64)> {
        v.iter().map(|p| (p.lambda_cons, p.lambda_synch)).collect()
    }

    fn g13() -> GeneratorSet {
        GeneratorSet::from_cycles(3, &[(&[vec![1, 2, 3]], "w123"), (&[vec![1, 2]], "w12")])
            .unwrap()
    }

    fn g33() -> GeneratorSet {
        GeneratorSet::from_cycles(3, &[(&[vec![1, 2]], "w12"), (&[vec![2, 3]], "w23")]).unwrap()
    }

    #[test]
    fn front_examples() {
        let f = pareto_front(&[pt(1.0, 1.0), pt(2.0, 0.5), pt(0.5, 2.0)]);
        assert_eq!(coords(&f), vec![(2.0, 0.5), (1.0, 1.0), (0.5, 2.0)]);
        assert_eq!(coords(&pareto_front(&[pt(1.0, 1.0), pt(0.5, 0.5)])), vec![(1.0, 1.0)]);
        assert!(pareto_front(&[]).is_empty());
        // Exact ties survive, weakly dominated points do not.
        let f = pareto_front(&[pt(1.0, 1.0), pt(1.0, 1.0), pt(1.0, 0.5), pt(0.5, 1.0)]);
        assert_eq!(coords(&f), vec![(1.0, 1.0), (1.0, 1.0)]);
    }

    #[test]
    fn budget_validation() {
        assert!(matches!(BudgetConstraint::new(vec![3.0, 2.0], 0.0), Err(Error::InfeasibleBudget(_))));
        assert!(matches!(BudgetConstraint::new(vec![3.0, 2.0], -1.0), Err(Error::InfeasibleBudget(_))));
        let c = BudgetConstraint::new(vec![3.0, 2.0], 1.0).unwrap();
        assert!(c.clone().with_fixed(vec![Some(0.5), None]).is_err());
        let c = c.with_fixed(vec![Some(0.1), None]).unwrap();
        assert_eq!(c.weights_at(&[1.0]), vec![0.1, (1.0 - 0.3) / 2.0]);
    }

    #[test]
    fn grid_is_lexicographic() {
        let g = simplex_grid(3, 2);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], vec![0.0, 0.0, 1.0]);
        assert_eq!(g[5], vec![1.0, 0.0, 0.0]);
        assert_eq!(simplex_grid(2, 200).len(), 201);
    }

    #[test]
    fn g1_3_consensus_optimum() {
        let gens = g13();
        let model = RateModel::new(&gens, 2).unwrap();
        let c = BudgetConstraint::for_generators(&gens, 1.0).unwrap();
        let opt = maximize_rate(&model, &c, Objective::Consensus, &OptimizerConfig::default()).unwrap();
        assert!((opt.value - 0.4).abs() < 1e-3, "{opt:?}");
        assert!((opt.weights[0] - 0.2).abs() < 1e-3 && (opt.weights[1] - 0.2).abs() < 1e-3);
        assert!((opt.budget_used - 1.0).abs() < 1e-12);
    }

    #[test]
    fn g3_3_both_objectives() {
        let gens = g33();
        let model = RateModel::new(&gens, 2).unwrap();
        let c = BudgetConstraint::for_generators(&gens, 1.0).unwrap();
        for obj in [Objective::Consensus, Objective::Synchronization] {
            let opt = maximize_rate(&model, &c, obj, &OptimizerConfig::default()).unwrap();
            assert!((opt.value - 0.25).abs() < 1e-3, "{obj:?} {opt:?}");
            assert!(opt.weights.iter().all(|w| (w - 0.25).abs() < 1e-3));
        }
    }

    #[test]
    fn one_generator_scan_is_a_point() {
        let gens = GeneratorSet::from_cycles(3, &[(&[vec![1, 2, 3]], "w")]).unwrap();
        let model = RateModel::new(&gens, 2).unwrap();
        let c = BudgetConstraint::for_generators(&gens, 1.0).unwrap();
        let pts = pareto_scan(&model, &c, 50).unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].weights[0] - 1.0 / 3.0).abs() < 1e-15);
        assert!(pts[0].on_front);
    }

    #[test]
    fn scan_resolution_two_and_csv() {
        let gens = g13();
        let model = RateModel::new(&gens, 2).unwrap();
        let c = BudgetConstraint::for_generators(&gens, 1.0).unwrap();
        assert!(pareto_scan(&model, &c, 1).is_err());
        let pts = pareto_scan(&model, &c, 2).unwrap();
        assert_eq!(pts.len(), 3);
        let csv = pareto_to_csv(&gens.labels(), &pts);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "w_w123,w_w12,lambda_cons,lambda_synch,on_front");
        assert_eq!(lines.len(), 4);
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 5));
    }

    #[test]
    fn objective_parsing() {
        assert_eq!("consensus".parse::<Objective>().unwrap(), Objective::Consensus);
        assert_eq!("Synchronization".parse::<Objective>().unwrap(), Objective::Synchronization);
        assert!("speed".parse::<Objective>().is_err());
    }
}
