//! Density-matrix side of the network: states, permutation unitaries,
//! Lindblad evolution, Gell-Mann coefficients and `L_Q`.

mod dynamics;
mod gellmann;
mod lq;
mod state;
mod unitary;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use dynamics::{
    evolve, fit_decay_rate, fit_decay_rate_series, lindblad_rhs, to_interaction_frame, trajectory_to_csv,
    EvolveConfig, Frame, LindbladGenerator, Trajectory, DEFAULT_DT, DRIFT_LIMIT, FIT_MIN_SAMPLES, FIT_WINDOW,
};
pub use gellmann::{decompose, gellmann_basis, reconstruct, CoefficientVector, GellMannBasis};
pub use lq::{
    build_lq, consensus_state, generic_initial_state, lq_lambda2, propagate_coefficients, slowest_mode_overlap,
    symmetrized_coefficients, DEFAULT_LQ_CAP, MIN_SLOW_OVERLAP,
};
pub use state::{expectation_consensus_gap, reduced_state, sync_distance, DensityMatrix, Hamiltonian};
pub use unitary::{is_permutation_invariant, permutation_unitary, site_index_map, symmetric_state};

pub(crate) type Cx = Complex64;

/// Largest Hilbert-space dimension `d^N` accepted for states and evolution.
pub const MAX_STATE_DIM: usize = 256;

/// Returns `d^N`, rejecting sizes above [`MAX_STATE_DIM`].
pub(crate) fn check_state_size(d: usize, n_sites: usize) -> Result<usize> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("site dimension must be >= 2, got {d}")));
    }
    if n_sites == 0 {
        return Err(Error::InvalidArgument("need at least one site".into()));
    }
    match (d as u128).checked_pow(n_sites as u32) {
        Some(dim) if dim <= MAX_STATE_DIM as u128 => Ok(dim as usize),
        _ => Err(Error::CapExceeded { what: "Hilbert space dimension", cap: MAX_STATE_DIM }),
    }
}
