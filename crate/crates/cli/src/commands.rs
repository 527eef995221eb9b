use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qcl_core::induced::{partitions_of, tabloids_to_text, InducedStructure};
use qcl_core::optimize::{default_resolution, maximize_rate, pareto_front, pareto_scan, pareto_to_csv};
use qcl_core::quantum::{
    consensus_state, evolve, fit_decay_rate, fit_decay_rate_series, gellmann_basis, generic_initial_state,
    sync_distance, trajectory_to_csv, DensityMatrix, EvolveConfig, Frame, Hamiltonian,
};
use num_complex::Complex64;
use qcl_core::report::{fmt_complex, fmt_num};
use qcl_core::spectra::{eigenvalues, RateModel, Spectrum};
use qcl_core::{Objective, OptimizerConfig, ParetoPoint, Partition, Topology};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;

pub struct Context {
    pub topology: String,
    pub d: Option<usize>,
    pub seed: u64,
}

type Outcome = Result<String, CliError>;

impl Context {
    fn load(&self) -> Result<Topology, CliError> {
        let mut t = Topology::resolve(&self.topology)?;
        if let Some(d) = self.d {
            if d < 2 {
                return Err(CliError::Input(format!("--d must be at least 2, got {d}")));
            }
            t.d = d;
        }
        Ok(t)
    }

    fn header(&self, t: &Topology) -> String {
        format!("{}seed: {}\n", t.describe(), self.seed)
    }
}

fn weight_line(t: &Topology, w: &[f64]) -> String {
    let pairs: Vec<String> = t
        .gens
        .labels()
        .iter()
        .zip(w)
        .map(|(l, x)| format!("{l}={}", fmt_num(*x)))
        .collect();
    format!("weights: {}\n", pairs.join(", "))
}

fn budget_line(t: &Topology, w: &[f64]) -> Result<String, CliError> {
    let used = t.constraint()?.cost(w);
    Ok(format!("budget used: {} of {}\n", fmt_num(used), fmt_num(t.budget)))
}

fn write_file(path: &Path, body: &str) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn rates(ctx: &Context, free: &[f64]) -> Outcome {
    let t = ctx.load()?;
    let w = t.weights(free)?;
    let model = RateModel::new(&t.gens, t.d)?;
    let rates = model.rates(&w)?;
    let aldous = model.aldous(&w)?;
    let mut out = ctx.header(&t);
    out.push_str(&weight_line(&t, &w));
    out.push_str(&budget_line(&t, &w)?);
    out.push_str(&rates.to_text());
    let _ = writeln!(out, "aldous = {}  # spread {}", aldous.holds, fmt_num(aldous.spread));
    Ok(out)
}

fn point_line(labels: &[&str], p: &ParetoPoint) -> String {
    let w: Vec<String> = labels
        .iter()
        .zip(&p.weights)
        .map(|(l, x)| format!("{l}={}", fmt_num(*x)))
        .collect();
    format!(
        "lambda_cons = {}, lambda_synch = {} at {}",
        fmt_num(p.lambda_cons),
        fmt_num(p.lambda_synch),
        w.join(", ")
    )
}

/// First point in scan order attaining the maximum of `key`.
fn argmax(points: &[ParetoPoint], key: impl Fn(&ParetoPoint) -> f64) -> Option<&ParetoPoint> {
    points.iter().fold(None, |best, p| match best {
        Some(b) if key(b) >= key(p) => Some(b),
        _ => Some(p),
    })
}

pub fn pareto(ctx: &Context, resolution: Option<usize>, out_path: &Path) -> Outcome {
    let t = ctx.load()?;
    let model = RateModel::new(&t.gens, t.d)?;
    let constraint = t.constraint()?;
    let resolution = resolution.unwrap_or_else(|| default_resolution(t.symbols().len()));
    let cloud = pareto_scan(&model, &constraint, resolution)?;
    let labels = t.gens.labels();
    write_file(out_path, &pareto_to_csv(&labels, &cloud))?;

    let front = pareto_front(&cloud);
    let mut out = ctx.header(&t);
    let _ = writeln!(out, "resolution: {resolution}");
    let _ = writeln!(out, "points: {}", cloud.len());
    let _ = writeln!(out, "front points: {}", front.len());
    let _ = writeln!(out, "csv: {}", out_path.display());
    if let (Some(lo), Some(hi)) = (front.first(), front.last()) {
        let _ = writeln!(out, "front extreme (max lambda_cons): {}", point_line(&labels, lo));
        let _ = writeln!(out, "front extreme (max lambda_synch): {}", point_line(&labels, hi));
    }
    for (name, key) in [
        ("lambda_cons", (|p: &ParetoPoint| p.lambda_cons) as fn(&ParetoPoint) -> f64),
        ("lambda_synch", |p: &ParetoPoint| p.lambda_synch),
    ] {
        if let Some(p) = argmax(&cloud, key) {
            let _ = writeln!(out, "argmax {name}: {}", point_line(&labels, p));
        }
    }
    Ok(out)
}

pub fn optimize(ctx: &Context, objective: Objective, starts: usize) -> Outcome {
    let t = ctx.load()?;
    let model = RateModel::new(&t.gens, t.d)?;
    let constraint = t.constraint()?;
    let cfg = OptimizerConfig {
        starts,
        seed: ctx.seed,
        ..OptimizerConfig::default()
    };
    let opt = maximize_rate(&model, &constraint, objective, &cfg)?;
    let mut out = ctx.header(&t);
    let _ = writeln!(out, "objective: {objective:?}");
    out.push_str(&weight_line(&t, &opt.weights));
    let _ = writeln!(out, "value = {}", fmt_num(opt.value));
    let _ = writeln!(out, "lambda_cons = {}", fmt_num(opt.lambda_cons));
    let _ = writeln!(out, "lambda_synch = {}", fmt_num(opt.lambda_synch));
    let _ = writeln!(
        out,
        "budget used: {} of {} (saturation {})",
        fmt_num(opt.budget_used),
        fmt_num(t.budget),
        fmt_num(opt.budget_used / t.budget)
    );
    Ok(out)
}

pub struct SimulateOptions {
    pub rho0: String,
    pub h0: String,
    pub frame: Frame,
    pub t_final: f64,
    pub dt: f64,
    pub sample: f64,
    pub out: PathBuf,
}

fn initial_state(spec: &str, t: &Topology, w: &[f64], rng: &mut ChaCha8Rng) -> Result<DensityMatrix, CliError> {
    let n = t.n();
    match spec {
        "generic" => Ok(generic_initial_state(&t.gens, w, t.d, rng)?),
        "maximally-mixed" => Ok(DensityMatrix::maximally_mixed(t.d, n)?),
        _ => {
            if let Some(digits) = spec.strip_prefix("basis:") {
                let digits = digits
                    .chars()
                    .map(|c| c.to_digit(10).map(|x| x as usize))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| CliError::Input(format!("--rho0 {spec}: digits must be 0..d-1")))?;
                if digits.len() != n {
                    return Err(CliError::Input(format!("--rho0 {spec}: expected {n} digits")));
                }
                return Ok(DensityMatrix::basis_state(t.d, &digits)?);
            }
            let text = std::fs::read_to_string(spec).map_err(|e| CliError::Input(format!("--rho0 {spec}: {e}")))?;
            let rho = DensityMatrix::from_text(&text, t.d).map_err(|e| CliError::Input(format!("{spec}: {e}")))?;
            if rho.n_sites() != n {
                return Err(CliError::Input(format!(
                    "{spec}: state has {} sites, topology has {n}",
                    rho.n_sites()
                )));
            }
            Ok(rho)
        }
    }
}

pub fn simulate(ctx: &Context, free: &[f64], opts: &SimulateOptions) -> Outcome {
    let t = ctx.load()?;
    let w = t.weights(free)?;
    let h0 = match opts.h0.as_str() {
        "zero" => Hamiltonian::zero(t.d, t.n())?,
        "zsum" => Hamiltonian::z_sum(t.d, t.n())?,
        other => return Err(CliError::Input(format!("--h0 must be zero or zsum, got '{other}'"))),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let rho0 = initial_state(&opts.rho0, &t, &w, &mut rng)?;
    let rates = RateModel::new(&t.gens, t.d)?.rates(&w)?;
    let cfg = EvolveConfig {
        t_final: opts.t_final,
        dt: opts.dt,
        frame: opts.frame,
        sample_interval: opts.sample,
    };
    let traj = evolve(&rho0, &h0, &t.gens, &w, &cfg)?;
    let consensus = consensus_state(&rho0, &t.gens)?;
    let basis = gellmann_basis(t.d)?;
    // Single-site coefficients: the local Bloch vector of every site.
    let (n, d) = (t.n(), t.d);
    let columns: Vec<Vec<usize>> = (0..n)
        .flat_map(|k| {
            (1..d * d).map(move |a| {
                let mut mu = vec![0; n];
                mu[k] = a;
                mu
            })
        })
        .collect();
    write_file(&opts.out, &trajectory_to_csv(&traj, &consensus, &basis, &columns)?)?;

    let mut out = ctx.header(&t);
    out.push_str(&weight_line(&t, &w));
    out.push_str(&budget_line(&t, &w)?);
    let _ = writeln!(out, "rho0: {}", opts.rho0);
    let _ = writeln!(out, "h0: {}", opts.h0);
    let _ = writeln!(out, "frame: {:?}", opts.frame);
    let _ = writeln!(
        out,
        "t: {}, dt: {}, sample: {}",
        fmt_num(opts.t_final),
        fmt_num(opts.dt),
        fmt_num(opts.sample)
    );
    let _ = writeln!(out, "samples: {}", traj.times.len());
    let _ = writeln!(out, "max step drift: {}", fmt_num(traj.max_step_drift));
    let _ = writeln!(out, "csv: {}", opts.out.display());
    if let Some(last) = traj.states.last() {
        let _ = writeln!(out, "final sync_distance = {}", fmt_num(sync_distance(last)));
        let _ = writeln!(out, "final distance_to_consensus = {}", fmt_num(last.distance(&consensus)));
    }

    let sync: Vec<f64> = traj.states.iter().map(sync_distance).collect();
    let fits = [
        ("consensus", fit_decay_rate(&traj, &consensus), rates.lambda_cons),
        ("sync", fit_decay_rate_series(&traj.times, &sync), rates.lambda_synch),
    ];
    let mut failures = Vec::new();
    for (name, fit, predicted) in &fits {
        match fit {
            Ok(rate) => {
                let rel = if *predicted > 0.0 {
                    fmt_num((rate - predicted).abs() / predicted)
                } else {
                    "n/a".into()
                };
                let _ = writeln!(
                    out,
                    "{name} rate: fitted {} predicted {} (relative error {rel})",
                    fmt_num(*rate),
                    fmt_num(*predicted)
                );
            }
            Err(e) => {
                let _ = writeln!(out, "{name} rate: no fit ({e}); predicted {}", fmt_num(*predicted));
                failures.push(format!("{name}: {e}"));
            }
        }
    }
    if failures.len() == fits.len() {
        return Err(CliError::Numerical {
            message: format!("no decay could be fitted ({})", failures.join("; ")),
            report: out,
        });
    }
    Ok(out)
}

/// `Σ_k c_k label_k` with integer coefficients printed without decimals.
fn symbolic(terms: &[(f64, &str)]) -> String {
    let mut s = String::new();
    for &(c, label) in terms.iter().filter(|(c, _)| *c != 0.0) {
        let mag = c.abs();
        let coeff = if mag == 1.0 {
            String::new()
        } else if mag.fract() == 0.0 {
            format!("{mag}")
        } else {
            fmt_num(mag)
        };
        let sign = if c < 0.0 { "-" } else if s.is_empty() { "" } else { "+" };
        let _ = write!(s, "{sign}{coeff}{label}");
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

fn aligned(rows: &[Vec<String>]) -> String {
    let width = rows.iter().flatten().map(String::len).max().unwrap_or(0);
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row.iter().map(|c| format!("{c:>width$}")).collect();
        let _ = writeln!(out, "  {}", cells.join("  "));
    }
    out
}

/// Parts below `1e-12` of the spectral radius print as zero.
fn spectrum_lines(spec: &Spectrum) -> String {
    let scale = spec.values().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let snap = |x: f64| if x.abs() < 1e-12 * scale { 0.0 } else { x };
    spec.values()
        .iter()
        .map(|z| format!("  {}\n", fmt_complex(Complex64::new(snap(z.re), snap(z.im)))))
        .collect()
}

fn partition_block(s: &InducedStructure, t: &Topology, w: Option<&[f64]>) -> Result<String, CliError> {
    let labels = t.gens.labels();
    let k = labels.len();
    let unit: Vec<_> = (0..k)
        .map(|i| {
            let mut e = vec![0.0; k];
            e[i] = 1.0;
            s.laplacian(&e)
        })
        .collect();
    let dim = s.len();
    let sym_rows: Vec<Vec<String>> = (0..dim)
        .map(|r| {
            (0..dim)
                .map(|c| {
                    let terms: Vec<(f64, &str)> =
                        unit.iter().zip(&labels).map(|(l, lab)| (l.matrix()[(r, c)], *lab)).collect();
                    symbolic(&terms)
                })
                .collect()
        })
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, "partition {} ({dim} vertices)", s.partition());
    out.push_str("vertices (row of each site):\n");
    for line in tabloids_to_text(s.vertices()).lines() {
        let _ = writeln!(out, "  {line}");
    }
    out.push_str("laplacian:\n");
    out.push_str(&aligned(&sym_rows));
    if let Some(w) = w {
        let l = s.laplacian(w);
        let rows: Vec<Vec<String>> = l
            .matrix()
            .row_iter()
            .map(|row| row.iter().map(|&x| fmt_num(x)).collect())
            .collect();
        out.push_str("laplacian at weights:\n");
        out.push_str(&aligned(&rows));
        out.push_str("spectrum:\n");
        out.push_str(&spectrum_lines(&eigenvalues(l.matrix())?));
    }
    Ok(out)
}

pub fn spectrum(ctx: &Context, free: &[f64], partition: Option<&str>, all: bool) -> Outcome {
    let t = ctx.load()?;
    let n = t.n();
    // Weights may be omitted for a symbolic-only report, unless every weight is fixed.
    let w = if free.is_empty() && !t.symbols().is_empty() {
        None
    } else {
        Some(t.weights(free)?)
    };
    let mut out = ctx.header(&t);
    if let Some(w) = &w {
        out.push_str(&weight_line(&t, w));
    }
    if all {
        let parts = partitions_of(n, t.d * t.d);
        for p in &parts {
            out.push('\n');
            out.push_str(&partition_block(&InducedStructure::new(p, &t.gens)?, &t, w.as_deref())?);
        }
        if let Some(w) = &w {
            let model = RateModel::new(&t.gens, t.d)?;
            let report = model.intertwining(w)?;
            out.push_str("\nintertwining:\n");
            out.push_str(&report.to_text());
            let _ = writeln!(out, "intertwining holds = {}", report.holds());
        }
        return Ok(out);
    }
    let spec = partition.expect("clap requires --partition without --all");
    let p: Partition = spec.parse()?;
    if p.total() != n {
        return Err(CliError::Input(format!("partition {p} sums to {}, but N = {n}", p.total())));
    }
    if p.is_trivial() {
        return Err(CliError::Input(format!(
            "partition {p} is trivial: its induced graph is a single vertex with spectrum {{0}}, \
             which carries no rate information"
        )));
    }
    out.push('\n');
    out.push_str(&partition_block(&InducedStructure::new(&p, &t.gens)?, &t, w.as_deref())?);
    Ok(out)
}
