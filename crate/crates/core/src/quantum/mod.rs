//! Quantum engine: field-free eigenbasis, one-period propagator with an
//! absorbing mask, Floquet decomposition and observables.

mod basis;
mod floquet;
mod grid;
mod propagator;

pub use basis::{EnergyBasis, GridSpec};
pub use floquet::{
    evolve_direct, evolve_floquet, mean_n, observe, one_kick_ionization, spectral_distribution,
    survival_probability, FloquetDecomposition,
};
pub use grid::GridMap;
pub use propagator::{FloquetOperator, MaskPolicy, QuantumState};
