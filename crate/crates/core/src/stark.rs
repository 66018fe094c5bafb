//! Golden-rule photoionization of the deepest ladder state by the kick
//! harmonics, and the matching lifetimes from the Floquet spectrum.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::TAU;
use nalgebra::DMatrix;
use num_traits::Float;

use crate::linalg::sorted_symmetric_eigen;
use crate::quantum::{mean_n, EnergyBasis, FloquetDecomposition, QuantumState};
use crate::units::stark_saddle;
use crate::{Error, Result, SystemParams};

/// A decay time that may be unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lifetime {
    Finite(f64),
    Infinite,
}

impl Lifetime {
    pub fn from_rate(rate: f64) -> Self {
        if rate > 0.0 {
            Lifetime::Finite(1.0 / rate)
        } else {
            Lifetime::Infinite
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Lifetime::Finite(t) => Some(t),
            Lifetime::Infinite => None,
        }
    }

    fn key(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// Eigenstates of `H0 + Fav q` in the box.
#[derive(Debug, Clone)]
pub struct StarkSpectrum {
    pub fav: f64,
    pub energies: Vec<f64>,
    /// Eigenvectors in symmetrised grid coordinates.
    pub states: DMatrix<f64>,
    /// `⟨i|q|anchor⟩` for every eigenstate `i`.
    pub dipole_to_anchor: Vec<f64>,
    /// Local density of states; `None` within half a window of the spectrum ends.
    pub dos: Vec<Option<f64>>,
    pub anchor_index: usize,
    /// `|⟨anchor|1⟩|` against the field-free ground state.
    pub anchor_overlap: f64,
    /// Highest energy at which box continuum waves are resolved.
    pub resolved_energy: f64,
    pub dos_window: usize,
}

/// Diagonalises the static Stark Hamiltonian on the basis grid. The DOS at
/// level `i` is `(w - 1)/(E_{i+h} - E_{i-h})` with `h = (w - 1)/2`.
pub fn diagonalize_stark(
    basis: &EnergyBasis,
    fav: f64,
    dos_window: usize,
) -> Result<StarkSpectrum> {
    if dos_window < 3 || dos_window % 2 == 0 {
        return Err(Error::Domain(alloc::format!(
            "DOS window must be odd and at least 3, got {dos_window}"
        )));
    }
    let mut h = basis.hamiltonian.clone();
    for (i, q) in basis.grid.iter().enumerate() {
        h[(i, i)] += fav * q;
    }
    let (energies, states) = sorted_symmetric_eigen(h);
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::Eigensolver { residual: f64::NAN });
    }

    let ground = basis.states.column(0);
    let overlaps = states.tr_mul(&ground);
    let anchor_index = overlaps
        .iter()
        .enumerate()
        .fold(
            (0, -1.0),
            |acc, (i, o)| if o.abs() > acc.1 { (i, o.abs()) } else { acc },
        )
        .0;
    let anchor_overlap = overlaps[anchor_index].abs();

    let anchor = states.column(anchor_index);
    let weighted: Vec<f64> = anchor.iter().zip(&basis.grid).map(|(v, q)| v * q).collect();
    let dipole_to_anchor = states
        .column_iter()
        .map(|c| c.iter().zip(&weighted).map(|(a, b)| a * b).sum())
        .collect();

    let half = (dos_window - 1) / 2;
    let n = energies.len();
    let dos = (0..n)
        .map(|i| {
            (i >= half && i + half < n).then(|| {
                let width = energies[i + half] - energies[i - half];
                (dos_window - 1) as f64 / width
            })
        })
        .collect();

    Ok(StarkSpectrum {
        fav,
        energies,
        states,
        dipole_to_anchor,
        dos,
        anchor_index,
        anchor_overlap,
        resolved_energy: basis.resolved_energy(),
        dos_window,
    })
}

impl StarkSpectrum {
    /// `ρ(E) |z(anchor, E)|²`, linearly interpolated between levels.
    pub fn dipole_density(&self, e: f64) -> Option<f64> {
        let s = |i: usize| self.dos[i].map(|r| r * self.dipole_to_anchor[i].powi(2));
        let j = self.energies.partition_point(|&x| x <= e);
        if j == 0 || j >= self.energies.len() {
            return None;
        }
        let (a, b) = (s(j - 1)?, s(j)?);
        let (ea, eb) = (self.energies[j - 1], self.energies[j]);
        let t = (e - ea) / (eb - ea);
        Some(a + t * (b - a))
    }

    /// Energy above which box states count as continuum: the Stark saddle
    /// when the field opens one, otherwise zero.
    pub fn continuum_edge(&self) -> f64 {
        stark_saddle(self.fav).map_or(0.0, |(_, e)| e.min(0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicRate {
    pub m: u64,
    pub e_m: f64,
    pub gamma: f64,
}

/// Golden-rule rates per harmonic and the resulting delocalization time.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub harmonics: Vec<HarmonicRate>,
    /// `1/Σ Γ_m` in atomic time units.
    pub tau_d: Lifetime,
    /// Continuum edge used to select harmonics.
    pub edge: f64,
    /// True when the sum stopped at the resolved-energy limit of the grid
    /// rather than by convergence.
    pub truncated: bool,
}

impl RateTable {
    pub fn total_rate(&self) -> f64 {
        self.harmonics.iter().map(|h| h.gamma).sum()
    }

    /// `τ_D` in kicks.
    pub fn tau_d_kicks(&self, period: f64) -> Lifetime {
        match self.tau_d {
            Lifetime::Finite(t) => Lifetime::Finite(t / period),
            Lifetime::Infinite => Lifetime::Infinite,
        }
    }
}

/// Relative size of the last harmonic's tail estimate at which the sum stops.
const CONVERGENCE: f64 = 1e-3;

/// `Γ_m = 2π ρ(E_m) |Fav z(anchor, E_m)|²` at `E_m = -1/2 + m ν0/n_i³`,
/// summed from the first harmonic above the continuum edge until the
/// running sum converges or the grid stops resolving the continuum.
pub fn golden_rule_rates(spectrum: &StarkSpectrum, params: &SystemParams) -> Result<RateTable> {
    let omega = TAU / params.period;
    let f2 = params.fav * params.fav;
    let edge = spectrum.continuum_edge();
    let limit = spectrum
        .resolved_energy
        .min(*spectrum.energies.last().unwrap_or(&0.0));
    let e_m = |m: u64| -0.5 + m as f64 * omega;
    let m_min = ((edge + 0.5) / omega).floor() as u64 + 1;

    let mut harmonics = Vec::new();
    let mut total = 0.0;
    let mut truncated = true;
    let mut m = m_min;
    while e_m(m) <= limit {
        let e = e_m(m);
        let Some(s) = spectrum.dipole_density(e) else {
            m += 1;
            continue;
        };
        let gamma = TAU * f2 * s;
        total += gamma;
        harmonics.push(HarmonicRate { m, e_m: e, gamma });
        let count = (m - m_min + 1) as f64;
        if total > 0.0 && gamma * count < CONVERGENCE * total && count >= 8.0 {
            truncated = false;
            break;
        }
        m += 1;
    }
    if total == 0.0 {
        truncated = false;
    }
    Ok(RateTable {
        harmonics,
        tau_d: Lifetime::from_rate(total),
        edge,
        truncated,
    })
}

/// Decay time of one Floquet state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetLifetime {
    pub index: usize,
    /// `-T/(2 ln|λ|)` in atomic time units.
    pub lifetime: Lifetime,
    /// Mean quantum number of the state's bound part.
    pub mean_n: Option<f64>,
    /// Bound-subspace weight of the normalised state.
    pub bound_weight: f64,
}

/// Lifetimes of all Floquet states, longest first.
pub fn floquet_lifetimes(
    decomp: &FloquetDecomposition,
    basis: &EnergyBasis,
) -> Vec<FloquetLifetime> {
    let mut out: Vec<FloquetLifetime> = decomp
        .multipliers
        .iter()
        .enumerate()
        .map(|(j, l)| {
            let modulus = l.norm();
            let lifetime = if modulus >= 1.0 - 1e-12 {
                Lifetime::Infinite
            } else {
                Lifetime::Finite(-decomp.period / (2.0 * modulus.ln()))
            };
            let state = QuantumState::from_coeffs(decomp.right_states.column(j).into_owned());
            FloquetLifetime {
                index: j,
                lifetime,
                mean_n: mean_n(&state, basis).ok(),
                bound_weight: crate::quantum::survival_probability(&state, basis),
            }
        })
        .collect();
    out.sort_by(|a, b| {
        b.lifetime
            .key()
            .partial_cmp(&a.lifetime.key())
            .unwrap_or(Ordering::Equal)
    });
    out
}

/// The longest-lived mostly-bound Floquet state whose mean quantum number
/// lies within `tolerance` of `n`. States with less than half their weight
/// in the bound subspace are skipped: the grid supports long-lived
/// high-energy modes near the nucleus that never reach the mask, and their
/// tiny bound parts make `⟨n⟩` meaningless.
pub fn longest_lived_near(
    lifetimes: &[FloquetLifetime],
    n: f64,
    tolerance: f64,
) -> Option<&FloquetLifetime> {
    lifetimes
        .iter()
        .find(|l| l.bound_weight >= 0.5 && l.mean_n.is_some_and(|m| (m - n).abs() <= tolerance))
}
