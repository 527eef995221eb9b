//! Convergence analysis of quantum consensus networks built from
//! permutation generators: Laplacian spectra, induced graphs on Young
//! tabloids, budgeted weight optimization and Lindblad dynamics.

pub mod error;
pub mod induced;
pub mod netgraph;
pub mod optimize;
pub mod permgroup;
pub mod quantum;
pub mod report;
pub mod spectra;
pub mod topology;

pub use error::{Error, Result};
pub use induced::{InducedGraph, Partition, YoungTabloid};
pub use netgraph::{Laplacian, WeightedDigraph};
pub use optimize::{BudgetConstraint, Objective, OptimizerConfig, Optimum, ParetoPoint};
pub use permgroup::{Generator, GeneratorSet, Permutation};
pub use spectra::{ConvergenceRates, RateModel, Spectrum};
pub use quantum::{CoefficientVector, DensityMatrix, GellMannBasis, Hamiltonian};
pub use topology::Topology;
