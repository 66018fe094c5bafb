use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use super::basis::EnergyBasis;
use crate::linalg::real_times_complex;
use crate::{Error, Result, SystemParams, C64};

/// Absorbing mask `cos^γ(π/2 · (q - q_on)/(q_max - q_on))` beyond `q_on`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskPolicy {
    pub q_on: f64,
    pub exponent: f64,
    /// 0: none; 1: after the kick; 2: after each half-period drift;
    /// 3: after each drift and after the kick.
    pub applications_per_period: u8,
}

impl MaskPolicy {
    /// Default policy: onset at `0.8 q_max`, exponent 1/8, three applications.
    pub fn for_box(q_max: f64) -> Self {
        MaskPolicy {
            q_on: 0.8 * q_max,
            exponent: 0.125,
            applications_per_period: 3,
        }
    }

    pub fn validate(&self, q_max: f64) -> Result<()> {
        if !(self.q_on > 0.0 && self.q_on < q_max) {
            return Err(Error::Domain(alloc::format!(
                "mask onset {} outside (0, {q_max})",
                self.q_on
            )));
        }
        if !(self.exponent > 0.0) {
            return Err(Error::Domain(alloc::format!(
                "mask exponent must be positive, got {}",
                self.exponent
            )));
        }
        if self.applications_per_period > 3 {
            return Err(Error::Domain(alloc::format!(
                "mask applications per period must be 0..=3, got {}",
                self.applications_per_period
            )));
        }
        Ok(())
    }

    pub fn value(&self, q: f64, q_max: f64) -> f64 {
        if q <= self.q_on {
            return 1.0;
        }
        let x = ((q - self.q_on) / (q_max - self.q_on)).min(1.0);
        (FRAC_PI_2 * x).cos().max(0.0).powf(self.exponent)
    }

    fn placements(&self) -> (bool, bool, bool) {
        match self.applications_per_period {
            0 => (false, false, false),
            1 => (false, true, false),
            2 => (true, false, true),
            _ => (true, true, true),
        }
    }
}

/// Dense one-period propagator in the field-free eigenbasis.
#[derive(Debug, Clone)]
pub struct FloquetOperator {
    pub matrix: DMatrix<C64>,
    pub period: f64,
    pub dp: f64,
    pub masked: bool,
}

impl FloquetOperator {
    /// `U(T) = e^{-iH0 T/2} e^{iΔp q} e^{-iH0 T/2}`, with the mask (if any)
    /// applied after the first drift, after the kick and after the second
    /// drift according to the policy.
    pub fn build(
        basis: &EnergyBasis,
        params: &SystemParams,
        mask: Option<&MaskPolicy>,
    ) -> Result<Self> {
        let (before_kick, after_kick, after_second) = match mask {
            Some(m) => {
                m.validate(basis.q_max)?;
                m.placements()
            }
            None => (false, false, false),
        };
        let mask_values: Vec<f64> = match mask {
            Some(m) => basis
                .grid
                .iter()
                .map(|&q| m.value(q, basis.q_max))
                .collect(),
            None => alloc::vec![1.0; basis.dim()],
        };
        let power = before_kick as i32 + after_kick as i32;

        // Masks and kick are all diagonal in position, so the middle factor
        // collapses to one congruence.
        let middle: Vec<C64> = basis
            .grid
            .iter()
            .zip(&mask_values)
            .map(|(&q, &m)| C64::from_polar(m.powi(power), params.dp * q))
            .collect();
        let mut u = basis.position_diagonal_complex(&middle);
        let half: Vec<C64> = basis
            .energies
            .iter()
            .map(|&e| C64::from_polar(1.0, -e * params.period / 2.0))
            .collect();
        for j in 0..u.ncols() {
            for i in 0..u.nrows() {
                u[(i, j)] *= half[i] * half[j];
            }
        }
        if after_second {
            let m = basis.position_diagonal(&mask_values);
            u = real_times_complex(&m, &u);
        }
        Ok(FloquetOperator {
            matrix: u,
            period: params.period,
            dp: params.dp,
            masked: mask.is_some_and(|m| m.applications_per_period > 0),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, state: &mut QuantumState) {
        state.coeffs = &self.matrix * &state.coeffs;
        state.time_kicks += 1;
    }
}

/// Wavefunction coefficients over the field-free eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub coeffs: DVector<C64>,
    pub time_kicks: u64,
}

impl QuantumState {
    /// The field-free eigenstate `n_i` (1-based) at `K = 0`.
    pub fn eigenstate(basis: &EnergyBasis, n_i: usize) -> Result<Self> {
        if n_i == 0 || n_i > basis.n_bound {
            return Err(Error::Domain(alloc::format!(
                "initial level n={n_i} is not among the {} bound box states",
                basis.n_bound
            )));
        }
        let mut coeffs = DVector::zeros(basis.dim());
        coeffs[n_i - 1] = C64::new(1.0, 0.0);
        Ok(QuantumState {
            coeffs,
            time_kicks: 0,
        })
    }

    pub fn from_coeffs(coeffs: DVector<C64>) -> Self {
        QuantumState {
            coeffs,
            time_kicks: 0,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.norm_squared()
    }
}
