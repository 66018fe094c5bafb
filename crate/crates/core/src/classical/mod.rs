//! Classical trajectory Monte Carlo for the kicked atom.

mod ensemble;
mod kepler;
mod lyapunov;

pub use ensemble::{
    block_ranges, one_kick_ionization, run_block, run_ensemble, sample_microcanonical,
    sample_point, BlockTally, CheckpointTally, ClassicalEnsemble, BLOCK_SIZE,
};
pub use kepler::{apply_kick, is_escaped, propagate_coulomb, PhasePoint};
pub use lyapunov::{lyapunov_estimate, LyapunovEstimate};
