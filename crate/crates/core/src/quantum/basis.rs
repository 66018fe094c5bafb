use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use super::grid::{discretize, GridMap};
use crate::linalg::{congruence, sorted_symmetric_eigen};
use crate::{Error, Result, C64};

/// Discretisation settings for [`EnergyBasis::build`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub map: GridMap,
    /// Number of low states checked against `-1/(2n²)`.
    pub n_check: usize,
    /// Relative tolerance for that check.
    pub tolerance: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            map: GridMap::Stretched { beta: 0.9 },
            n_check: 5,
            tolerance: 1e-4,
        }
    }
}

/// Field-free eigenbasis of `H0 = p²/2 - 1/q` in a Dirichlet box.
///
/// Eigenvectors are stored in symmetrised grid coordinates
/// `v_i = √m_i ψ(q_i)`, where `m_i` are the quadrature weights, so the
/// columns of `states` are orthonormal in the Euclidean sense and the
/// wavefunctions are orthonormal under the quadrature.
#[derive(Debug, Clone)]
pub struct EnergyBasis {
    pub q_max: f64,
    pub grid: Vec<f64>,
    pub weights: Vec<f64>,
    pub energies: Vec<f64>,
    pub states: DMatrix<f64>,
    pub n_bound: usize,
    /// `⟨j|q|k⟩` in the eigenbasis.
    pub position_matrix: DMatrix<f64>,
    /// `H0` in symmetrised grid coordinates.
    pub(crate) hamiltonian: DMatrix<f64>,
}

impl EnergyBasis {
    /// Builds the basis with `points` interior collocation nodes.
    pub fn build(q_max: f64, points: usize, spec: GridSpec) -> Result<Self> {
        if !(q_max > 0.0) {
            return Err(Error::Domain(alloc::format!(
                "q_max must be positive, got {q_max}"
            )));
        }
        if points < 16 {
            return Err(Error::Domain(alloc::format!(
                "basis needs at least 16 points, got {points}"
            )));
        }
        let disc = discretize(points, q_max, spec.map);
        let mut h = disc.kinetic;
        for (i, q) in disc.q.iter().enumerate() {
            h[(i, i)] -= 1.0 / q;
        }
        let (energies, states) = sorted_symmetric_eigen(h.clone());
        let n_bound = energies.iter().take_while(|&&e| e < 0.0).count();

        let mut worst = (0, 0.0_f64);
        for n in 1..=spec.n_check.min(points) {
            let exact = -0.5 / (n * n) as f64;
            let err = ((energies[n - 1] - exact) / exact).abs();
            if !(err <= worst.1) {
                worst = (n, err);
            }
        }
        if spec.n_check > 0 && !(worst.1 <= spec.tolerance) {
            return Err(Error::BasisConvergence {
                state: worst.0,
                error: worst.1,
                tolerance: spec.tolerance,
            });
        }

        let position_matrix = congruence(&states, &disc.q);
        Ok(EnergyBasis {
            q_max,
            grid: disc.q,
            weights: disc.mass,
            energies,
            states,
            n_bound,
            position_matrix,
            hamiltonian: h,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// Effective quantum number `1/√(-2E)` of bound state `j`.
    pub fn n_eff(&self, j: usize) -> Option<f64> {
        let e = self.energies[j];
        (e < 0.0).then(|| 1.0 / (-2.0 * e).sqrt())
    }

    /// Eigenfunction `j` sampled on the grid.
    pub fn wavefunction(&self, j: usize) -> Vec<f64> {
        self.states
            .column(j)
            .iter()
            .zip(&self.weights)
            .map(|(v, m)| v / m.sqrt())
            .collect()
    }

    /// Largest node spacing; sets the highest continuum momentum the grid
    /// carries everywhere in the box.
    pub fn max_spacing(&self) -> f64 {
        let mut prev = 0.0;
        let mut widest = 0.0_f64;
        for &q in self.grid.iter().chain(core::iter::once(&self.q_max)) {
            widest = widest.max(q - prev);
            prev = q;
        }
        widest
    }

    /// Energy below which continuum waves are resolved across the whole box,
    /// `(π/Δq_max)²/2`.
    pub fn resolved_energy(&self) -> f64 {
        let k = core::f64::consts::PI / self.max_spacing();
        0.5 * k * k
    }

    /// Transforms a diagonal-in-position operator `f(q)` to the eigenbasis.
    pub fn position_diagonal(&self, f: &[f64]) -> DMatrix<f64> {
        congruence(&self.states, f)
    }

    /// Transforms a complex diagonal-in-position operator to the eigenbasis.
    pub fn position_diagonal_complex(&self, f: &[C64]) -> DMatrix<C64> {
        let re: Vec<f64> = f.iter().map(|z| z.re).collect();
        let im: Vec<f64> = f.iter().map(|z| z.im).collect();
        let a = congruence(&self.states, &re);
        let b = congruence(&self.states, &im);
        a.zip_map(&b, C64::new)
    }

    /// Grid representation (symmetrised coordinates) of eigenbasis coefficients.
    pub fn to_grid(&self, coeffs: &DVector<C64>) -> DVector<C64> {
        let re = &self.states * coeffs.map(|z| z.re);
        let im = &self.states * coeffs.map(|z| z.im);
        re.zip_map(&im, C64::new)
    }
}
