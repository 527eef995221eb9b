//! Master-equation right-hand side, fixed-step RK4 evolution, frame changes
//! and empirical decay-rate fits.

use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::gellmann::{decompose, GellMannBasis};
use super::state::{hermitian_defect, hermitize, sync_distance, DensityMatrix, Hamiltonian};
use super::unitary::{conjugate, is_permutation_invariant, site_index_map};
use super::Cx;
use crate::error::{Error, Result};
use crate::permgroup::GeneratorSet;
use crate::report::fmt_num;

pub const DEFAULT_DT: f64 = 1e-3;
/// Accumulated trace/Hermiticity correction that aborts an integration.
pub const DRIFT_LIMIT: f64 = 1e-6;
/// Distance window for log-linear decay fits.
pub const FIT_WINDOW: (f64, f64) = (1e-6, 1e-2);
pub const FIT_MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Frame {
    Lab,
    /// Drops the `H₀` term; exact when `H₀` commutes with every `U_π`.
    Interaction,
}

impl FromStr for Frame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lab" => Ok(Frame::Lab),
            "interaction" => Ok(Frame::Interaction),
            other => Err(Error::InvalidArgument(format!("unknown frame '{other}'"))),
        }
    }
}

/// `ρ ↦ −i[H₀, ρ] + Σ_π w_π (U_π ρ U_π† − ρ)` with the conjugations
/// precomputed as index maps.
#[derive(Debug, Clone)]
pub struct LindbladGenerator {
    d: usize,
    n_sites: usize,
    h: Option<DMatrix<Cx>>,
    jumps: Vec<(Vec<usize>, f64)>,
}

impl LindbladGenerator {
    pub fn new(h0: &Hamiltonian, gens: &GeneratorSet, weights: &[f64], frame: Frame) -> Result<Self> {
        gens.check_weights(weights)?;
        if gens.degree() != h0.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: h0.n_sites(),
                got: gens.degree(),
            });
        }
        let h = match frame {
            Frame::Lab if !h0.is_zero() => Some(h0.matrix().clone()),
            Frame::Lab => None,
            Frame::Interaction => {
                if !is_permutation_invariant(h0, gens)? {
                    return Err(Error::InvalidArgument(
                        "interaction frame needs H0 to commute with every generator unitary".into(),
                    ));
                }
                None
            }
        };
        let jumps = gens
            .perms()
            .zip(weights)
            .filter(|(_, &w)| w != 0.0)
            .map(|(p, &w)| Ok((site_index_map(p, h0.d())?, w)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            d: h0.d(),
            n_sites: h0.n_sites(),
            h,
            jumps,
        })
    }

    pub fn apply(&self, rho: &DMatrix<Cx>) -> DMatrix<Cx> {
        let total: f64 = self.jumps.iter().map(|(_, w)| w).sum();
        let mut out = rho * Complex64::new(-total, 0.0);
        for (src, w) in &self.jumps {
            out += conjugate(rho, src) * Complex64::new(*w, 0.0);
        }
        if let Some(h) = &self.h {
            let comm = h * rho - rho * h;
            out += comm * Complex64::new(0.0, -1.0);
        }
        out
    }

    fn check(&self, rho: &DensityMatrix) -> Result<()> {
        if rho.d() != self.d || rho.n_sites() != self.n_sites {
            return Err(Error::DimensionMismatch {
                expected: self.d.pow(self.n_sites as u32),
                got: rho.dim(),
            });
        }
        Ok(())
    }
}

pub fn lindblad_rhs(rho: &DensityMatrix, h0: &Hamiltonian, gens: &GeneratorSet, weights: &[f64]) -> Result<DMatrix<Cx>> {
    let g = LindbladGenerator::new(h0, gens, weights, Frame::Lab)?;
    g.check(rho)?;
    Ok(g.apply(rho.matrix()))
}

#[derive(Debug, Clone)]
pub struct EvolveConfig {
    pub t_final: f64,
    pub dt: f64,
    pub frame: Frame,
    /// Time between stored samples; rounded to a whole number of steps.
    pub sample_interval: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            t_final: 10.0,
            dt: DEFAULT_DT,
            frame: Frame::Lab,
            sample_interval: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Largest single-step trace/Hermiticity correction.
    pub max_step_drift: f64,
}

/// Fixed-step RK4. The step is shrunk so an integer number of steps lands on
/// `t_final`; after each step the state is Hermitized and its trace reset.
pub fn evolve(
    rho0: &DensityMatrix,
    h0: &Hamiltonian,
    gens: &GeneratorSet,
    weights: &[f64],
    cfg: &EvolveConfig,
) -> Result<Trajectory> {
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {}", cfg.dt)));
    }
    if !(cfg.t_final >= 0.0 && cfg.t_final.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_final must be >= 0, got {}", cfg.t_final)));
    }
    let g = LindbladGenerator::new(h0, gens, weights, cfg.frame)?;
    g.check(rho0)?;

    let steps = (cfg.t_final / cfg.dt - 1e-9).ceil().max(0.0) as usize;
    let dt = if steps == 0 { 0.0 } else { cfg.t_final / steps as f64 };
    let stride = if dt == 0.0 {
        1
    } else {
        ((cfg.sample_interval / dt).round() as usize).max(1)
    };
    let half = Complex64::new(dt / 2.0, 0.0);
    let full = Complex64::new(dt, 0.0);
    let sixth = Complex64::new(dt / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);

    let mut rho = rho0.matrix().clone();
    let mut traj = Trajectory {
        times: vec![0.0],
        states: vec![rho0.clone()],
        max_step_drift: 0.0,
    };
    let mut drift = 0.0;
    for step in 1..=steps {
        let k1 = g.apply(&rho);
        let k2 = g.apply(&(&rho + &k1 * half));
        let k3 = g.apply(&(&rho + &k2 * half));
        let k4 = g.apply(&(&rho + &k3 * full));
        let next = &rho + (k1 + k2 * two + k3 * two + k4) * sixth;

        let step_drift = hermitian_defect(&next) + (next.trace() - Complex64::new(1.0, 0.0)).norm();
        let mut fixed = hermitize(&next);
        let tr = fixed.trace();
        fixed /= tr;
        rho = fixed;

        drift += step_drift;
        traj.max_step_drift = traj.max_step_drift.max(step_drift);
        let t = step as f64 * dt;
        if drift > DRIFT_LIMIT || !rho.norm().is_finite() || rho.norm() > 1.0 + DRIFT_LIMIT {
            return Err(Error::StepSize { drift, t, dt });
        }
        if step % stride == 0 || step == steps {
            traj.times.push(t);
            traj.states.push(DensityMatrix::new_unchecked(rho0.d(), rho0.n_sites(), rho.clone()));
        }
    }
    Ok(traj)
}

/// `ρ_I = e^{iH₀t} ρ e^{−iH₀t}`.
pub fn to_interaction_frame(rho: &DensityMatrix, h0: &Hamiltonian, t: f64) -> Result<DensityMatrix> {
    if rho.dim() != h0.matrix().nrows() {
        return Err(Error::DimensionMismatch {
            expected: h0.matrix().nrows(),
            got: rho.dim(),
        });
    }
    let eig = hermitize(h0.matrix()).symmetric_eigen();
    let phases = eig.eigenvalues.map(|e| Complex64::from_polar(1.0, e * t));
    let v = &eig.eigenvectors;
    let u = v * DMatrix::from_diagonal(&phases) * v.adjoint();
    let m = &u * rho.matrix() * u.adjoint();
    Ok(DensityMatrix::new_unchecked(rho.d(), rho.n_sites(), m))
}

/// Least-squares decay rate of `values` over samples inside [`FIT_WINDOW`].
pub fn fit_decay_rate_series(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            got: values.len(),
        });
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(values)
        .filter(|(_, &v)| v >= FIT_WINDOW.0 && v <= FIT_WINDOW.1)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if pts.len() < FIT_MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            found: pts.len(),
            needed: FIT_MIN_SAMPLES,
        });
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(t, _)| (t - mt).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::NumericalFailure("all fit samples share one time".into()));
    }
    let rate = -sxy / sxx;
    if rate <= 0.0 {
        return Err(Error::NumericalFailure(format!("no decay in fit window (slope {:e})", -rate)));
    }
    Ok(rate)
}

/// Decay rate of the Frobenius distance from `reference`.
pub fn fit_decay_rate(traj: &Trajectory, reference: &DensityMatrix) -> Result<f64> {
    let dist: Vec<f64> = traj.states.iter().map(|s| s.distance(reference)).collect();
    fit_decay_rate_series(&traj.times, &dist)
}

/// CSV with `t, sync_distance, distance_to_consensus` and one column per
/// requested coefficient index.
pub fn trajectory_to_csv(
    traj: &Trajectory,
    consensus: &DensityMatrix,
    basis: &GellMannBasis,
    coefficients: &[Vec<usize>],
) -> Result<String> {
    let mut out = String::from("t,sync_distance,distance_to_consensus");
    for mu in coefficients {
        let label: Vec<String> = mu.iter().map(|m| m.to_string()).collect();
        let _ = write!(out, ",c_{}", label.join("_"));
    }
    out.push('\n');
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let _ = write!(out, "{},{},{}", fmt_num(*t), fmt_num(sync_distance(s)), fmt_num(s.distance(consensus)));
        if !coefficients.is_empty() {
            let c = decompose(s, basis)?;
            for mu in coefficients {
                let _ = write!(out, ",{}", fmt_num(c.get(mu)));
            }
        }
        out.push('\n');
    }
    Ok(out)
}
