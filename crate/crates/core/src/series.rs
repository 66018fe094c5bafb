//! Engine-agnostic observable records.

use alloc::vec::Vec;
use num_traits::Float;

use crate::{Error, Result};

/// Strictly increasing kick counts at which observables are recorded.
/// Always contains `0` and the final kick count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoints(Vec<u64>);

impl Checkpoints {
    /// Builds a schedule from arbitrary kick counts; sorts, deduplicates and
    /// adds `0`.
    pub fn from_list(mut ks: Vec<u64>) -> Self {
        ks.push(0);
        ks.sort_unstable();
        ks.dedup();
        Checkpoints(ks)
    }

    /// Geometric schedule `round(ratio^j)` up to `k_final`, plus `0` and `k_final`.
    pub fn geometric(k_final: u64, ratio: f64) -> Result<Self> {
        if !(ratio > 1.0) {
            return Err(Error::Domain(alloc::format!(
                "checkpoint ratio must exceed 1, got {ratio}"
            )));
        }
        let mut ks = Vec::new();
        let mut x = 1.0_f64;
        while x.round() < k_final as f64 {
            ks.push(x.round() as u64);
            x *= ratio;
        }
        ks.push(k_final);
        Ok(Self::from_list(ks))
    }

    /// Every kick from 0 to `k_final`.
    pub fn every(k_final: u64) -> Self {
        Checkpoints((0..=k_final).collect())
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn last(&self) -> u64 {
        *self.0.last().unwrap_or(&0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Weights binned on the effective quantum number axis `n = 1/√(-2E)`.
/// Bin `j` covers `[j - 1/2, j + 1/2)`; everything above the last bin is
/// collected in `overflow`, so the total equals the bound fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct NHistogram {
    pub bins: Vec<f64>,
    pub overflow: f64,
}

impl NHistogram {
    pub fn new(n_max: usize) -> Self {
        NHistogram {
            bins: alloc::vec![0.0; n_max + 1],
            overflow: 0.0,
        }
    }

    pub fn add(&mut self, n_eff: f64, weight: f64) {
        let j = (n_eff + 0.5).floor();
        if j >= 0.0 && (j as usize) < self.bins.len() {
            self.bins[j as usize] += weight;
        } else {
            self.overflow += weight;
        }
    }

    pub fn total(&self) -> f64 {
        pairwise_sum(&self.bins) + self.overflow
    }

    /// Index of the most populated bin.
    pub fn peak(&self) -> usize {
        self.bins
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &w)| if w > acc.1 { (i, w) } else { acc },
            )
            .0
    }

    pub fn merge(&mut self, other: &NHistogram) {
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            *a += *b;
        }
        self.overflow += other.overflow;
    }

    pub fn scale(&mut self, s: f64) {
        self.bins.iter_mut().for_each(|w| *w *= s);
        self.overflow *= s;
    }
}

/// Observables recorded at one checkpoint, taken at `t = K T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    pub k: u64,
    pub t_au: f64,
    pub p_sur: f64,
    /// `None` when nothing is bound.
    pub mean_n: Option<f64>,
    /// Total norm (quantum) or surviving fraction of tracked trajectories.
    pub norm: f64,
    pub histogram: Option<NHistogram>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineTag {
    Quantum,
    Classical,
}

impl EngineTag {
    pub fn as_str(self) -> &'static str {
        match self {
            EngineTag::Quantum => "quantum",
            EngineTag::Classical => "classical",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub engine: EngineTag,
    pub rows: Vec<Observables>,
}

impl ObservableSeries {
    pub fn new(engine: EngineTag) -> Self {
        ObservableSeries {
            engine,
            rows: Vec::new(),
        }
    }

    pub fn ks(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.k as f64).collect()
    }

    pub fn p_sur(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.p_sur).collect()
    }

    /// Mean quantum numbers, `NaN` where undefined.
    pub fn mean_n(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.mean_n.unwrap_or(f64::NAN))
            .collect()
    }

    pub fn at(&self, k: u64) -> Option<&Observables> {
        self.rows.iter().find(|r| r.k == k)
    }
}

/// Pairwise summation; the split points depend only on the length, so the
/// result is reproducible for a given input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
