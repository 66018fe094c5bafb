#![no_std]
// `num_traits::Float` supplies libm math in no_std builds; when dev-dependencies
// unify std features in, the inherent methods win and the import goes unused.
#![allow(unused_imports)]

//! Numerical core for the periodically kicked one-dimensional Rydberg atom.
//!
//! Everything here is pure computation on owned buffers: parameter
//! conversions, the quantum Floquet engine on a mapped Gauss-Lobatto grid,
//! the classical trajectory Monte Carlo engine with exact Kepler propagation,
//! Stark golden-rule rates, the photonic-ladder band matrix, and the
//! fluctuation analysis. File formats, configuration and parallel scheduling
//! live in the `rydkick` crate.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod classical;
mod error;
pub mod ladder;
mod linalg;
pub mod quantum;
pub mod series;
pub mod stark;
pub mod units;

pub use error::{Error, Result};
pub use series::{Checkpoints, ObservableSeries, Observables};
pub use units::{KickDirection, Regime, RegimeThresholds, SystemParams};

/// Complex scalar used throughout the quantum engine.
pub type C64 = num_complex::Complex<f64>;
