use alloc::vec::Vec;
use core::cmp::Ordering;
use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use super::basis::EnergyBasis;
use super::propagator::{FloquetOperator, QuantumState};
use crate::linalg::{complex_eigen, solve};
use crate::series::{EngineTag, NHistogram, ObservableSeries, Observables};
use crate::{Checkpoints, Error, Result, C64};

/// Eigen-decomposition of a (generally non-normal) one-period propagator
/// and the expansion of an initial state over its right eigenvectors.
#[derive(Debug, Clone)]
pub struct FloquetDecomposition {
    /// Eigenvalues `exp(-i T ℰ_j)`.
    pub multipliers: Vec<C64>,
    /// Complex quasi-energies `ℰ_j`; `Im ℰ_j ≤ 0` encodes decay.
    pub quasi_energies: Vec<C64>,
    /// Right eigenvectors as columns, unit Euclidean norm.
    pub right_states: DMatrix<C64>,
    /// Expansion coefficients `d_j` with `Σ d_j φ_j = ψ(0)`.
    pub overlaps: Vec<C64>,
    pub period: f64,
}

impl FloquetDecomposition {
    /// Diagonalises `op` and expands `initial` by solving `Φ d = ψ(0)`.
    pub fn new(op: &FloquetOperator, initial: &QuantumState) -> Result<Self> {
        let (lambda, vectors) = complex_eigen(&op.matrix, 1e-9)?;
        let d = solve(&vectors, &initial.coeffs)?;
        let residual = (&vectors * &d - &initial.coeffs).norm();
        if !(residual <= 1e-8) {
            return Err(Error::Eigensolver { residual });
        }

        // Sort by quasi-energy, ties by descending |d_j|.
        let period = op.period;
        let quasi: Vec<C64> = lambda
            .iter()
            .map(|l| l.ln() * C64::new(0.0, 1.0) / period)
            .collect();
        let mut order: Vec<usize> = (0..lambda.len()).collect();
        order.sort_by(|&a, &b| {
            let (ea, eb) = (quasi[a].re, quasi[b].re);
            if (ea - eb).abs() <= 1e-12 * ea.abs().max(eb.abs()).max(1e-300) {
                d[b].norm()
                    .partial_cmp(&d[a].norm())
                    .unwrap_or(Ordering::Equal)
            } else {
                ea.total_cmp(&eb)
            }
        });
        let n = lambda.len();
        let mut right_states = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            right_states.column_mut(dst).copy_from(&vectors.column(src));
        }
        Ok(FloquetDecomposition {
            multipliers: order.iter().map(|&i| lambda[i]).collect(),
            quasi_energies: order.iter().map(|&i| quasi[i]).collect(),
            right_states,
            overlaps: order.iter().map(|&i| d[i]).collect(),
            period,
        })
    }

    /// `|Σ_j d_j φ_j - ψ|`.
    pub fn reconstruction_residual(&self, initial: &QuantumState) -> f64 {
        let d = DVector::from_column_slice(&self.overlaps);
        (&self.right_states * d - &initial.coeffs).norm()
    }

    /// Weights `d_j λ_j^K`; terms whose modulus underflows are dropped.
    fn weights_at(&self, k: u64) -> DVector<C64> {
        let kf = k as f64;
        DVector::from_iterator(
            self.overlaps.len(),
            self.overlaps.iter().zip(&self.multipliers).map(|(&d, &l)| {
                if k == 0 {
                    return d;
                }
                let log_mod = kf * l.norm().ln() + d.norm().ln();
                if log_mod < -700.0 {
                    C64::new(0.0, 0.0)
                } else {
                    d * C64::from_polar((kf * l.norm().ln()).exp(), kf * l.arg())
                }
            }),
        )
    }

    /// State after `k` periods.
    pub fn state_at(&self, k: u64) -> QuantumState {
        QuantumState {
            coeffs: &self.right_states * self.weights_at(k),
            time_kicks: k,
        }
    }

    /// Survival probability after `k` periods using only the bound rows.
    pub fn survival_at(&self, basis: &EnergyBasis, k: u64) -> f64 {
        let w = self.weights_at(k);
        let rows = self.right_states.rows(0, basis.n_bound);
        (rows * w).norm_squared()
    }
}

/// Weight that one kick `dp` moves from eigenstate `n_i` into the box
/// continuum, summed directly over positive-energy states so that small
/// probabilities keep their relative precision.
pub fn one_kick_ionization(basis: &EnergyBasis, n_i: usize, dp: f64) -> Result<f64> {
    if n_i == 0 || n_i > basis.n_bound {
        return Err(Error::Domain(alloc::format!(
            "initial level n={n_i} is not bound in this box"
        )));
    }
    let psi = basis.states.column(n_i - 1);
    let re = DVector::from_iterator(
        basis.dim(),
        psi.iter().zip(&basis.grid).map(|(v, q)| v * (dp * q).cos()),
    );
    let im = DVector::from_iterator(
        basis.dim(),
        psi.iter().zip(&basis.grid).map(|(v, q)| v * (dp * q).sin()),
    );
    let free = basis
        .states
        .columns(basis.n_bound, basis.dim() - basis.n_bound);
    Ok((free.tr_mul(&re)).norm_squared() + (free.tr_mul(&im)).norm_squared())
}

/// Bound-state projection `Σ_{E_n<0} |c_n|²`.
pub fn survival_probability(state: &QuantumState, basis: &EnergyBasis) -> f64 {
    state.coeffs.rows(0, basis.n_bound).norm_squared()
}

/// Bound-subspace mean of `(-2H0)^{-1/2}`, normalised by the survival probability.
pub fn mean_n(state: &QuantumState, basis: &EnergyBasis) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..basis.n_bound {
        let w = state.coeffs[j].norm_sqr();
        num += w / (-2.0 * basis.energies[j]).sqrt();
        den += w;
    }
    if den > 0.0 {
        Ok(num / den)
    } else {
        Err(Error::Undefined(
            "mean quantum number of a state with no bound component",
        ))
    }
}

/// Non-normalised `P(n)` over bound states on unit bins of `n = 1/√(-2E)`.
pub fn spectral_distribution(state: &QuantumState, basis: &EnergyBasis) -> NHistogram {
    let n_top = if basis.n_bound > 0 {
        basis.n_eff(basis.n_bound - 1).unwrap_or(1.0)
    } else {
        1.0
    };
    let mut h = NHistogram::new(n_top.ceil() as usize + 1);
    for j in 0..basis.n_bound {
        h.add(basis.n_eff(j).unwrap_or(0.0), state.coeffs[j].norm_sqr());
    }
    h
}

/// Observables of a state at its current kick count.
pub fn observe(
    state: &QuantumState,
    basis: &EnergyBasis,
    period: f64,
    with_histogram: bool,
) -> Observables {
    Observables {
        k: state.time_kicks,
        t_au: state.time_kicks as f64 * period,
        p_sur: survival_probability(state, basis),
        mean_n: mean_n(state, basis).ok(),
        norm: state.norm_sqr(),
        histogram: with_histogram.then(|| spectral_distribution(state, basis)),
    }
}

/// Applies `op` repeatedly up to the last checkpoint, recording observables.
pub fn evolve_direct(
    state: &QuantumState,
    op: &FloquetOperator,
    basis: &EnergyBasis,
    checkpoints: &Checkpoints,
    with_histogram: bool,
) -> ObservableSeries {
    let mut series = ObservableSeries::new(EngineTag::Quantum);
    let mut psi = state.clone();
    psi.time_kicks = 0;
    for &k in checkpoints.as_slice() {
        while psi.time_kicks < k {
            op.apply(&mut psi);
        }
        series
            .rows
            .push(observe(&psi, basis, op.period, with_histogram));
    }
    series
}

/// Observables at arbitrary kick counts from the Floquet expansion; the cost
/// per entry does not depend on `K`.
pub fn evolve_floquet(
    decomp: &FloquetDecomposition,
    basis: &EnergyBasis,
    checkpoints: &Checkpoints,
    with_histogram: bool,
) -> ObservableSeries {
    let mut series = ObservableSeries::new(EngineTag::Quantum);
    for &k in checkpoints.as_slice() {
        let psi = decomp.state_at(k);
        series
            .rows
            .push(observe(&psi, basis, decomp.period, with_histogram));
    }
    series
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{GridSpec, MaskPolicy};
    use crate::SystemParams;

    fn setup(f0: f64, masked: bool) -> (EnergyBasis, FloquetOperator, QuantumState) {
        let basis = EnergyBasis::build(250.0, 110, GridSpec::default()).unwrap();
        let p = SystemParams::new(5, 1.45, f0).unwrap();
        let mask = MaskPolicy::for_box(basis.q_max);
        let op = FloquetOperator::build(&basis, &p, masked.then_some(&mask)).unwrap();
        let psi = QuantumState::eigenstate(&basis, 5).unwrap();
        (basis, op, psi)
    }

    #[test]
    fn one_kick_ionization_is_the_continuum_weight() {
        let (basis, _, _) = setup(0.0, false);
        assert!(one_kick_ionization(&basis, 5, 0.0).unwrap() < 1e-25);
        // Against the complement of the bound weight of the kicked state.
        let dp = 0.08;
        let kicked: Vec<C64> = basis
            .grid
            .iter()
            .map(|&q| C64::from_polar(1.0, dp * q))
            .collect();
        let u = basis.position_diagonal_complex(&kicked);
        let psi = QuantumState::from_coeffs(u.column(4).into_owned());
        let p = one_kick_ionization(&basis, 5, dp).unwrap();
        assert!(
            (p - (1.0 - survival_probability(&psi, &basis))).abs() < 1e-10,
            "{p}"
        );
        // Dipole limit: quadratic in the kick.
        let (a, b) = (
            one_kick_ionization(&basis, 5, 1e-4).unwrap(),
            one_kick_ionization(&basis, 5, 2e-4).unwrap(),
        );
        assert!((b / a - 4.0).abs() < 0.01, "{}", b / a);
        assert!(one_kick_ionization(&basis, 0, dp).is_err());
    }

    #[test]
    fn eigenstate_observables() {
        let (basis, _, psi) = setup(0.0, false);
        assert_eq!(survival_probability(&psi, &basis), 1.0);
        assert!((mean_n(&psi, &basis).unwrap() - 5.0).abs() < 1e-6);
        let h = spectral_distribution(&psi, &basis);
        assert_eq!(h.peak(), 5);
        assert!((h.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn superposition_observables() {
        let (basis, _, _) = setup(0.0, false);
        let mut c = DVector::zeros(basis.dim());
        let s = 0.5_f64.sqrt();
        c[0] = C64::new(s, 0.0);
        c[1] = C64::new(0.0, s);
        let psi = QuantumState::from_coeffs(c.clone());
        assert!((mean_n(&psi, &basis).unwrap() - 1.5).abs() < 1e-6);

        let mut half = DVector::zeros(basis.dim());
        half[0] = C64::new(s, 0.0);
        half[basis.n_bound + 3] = C64::new(s, 0.0);
        assert!(
            (survival_probability(&QuantumState::from_coeffs(half), &basis) - 0.5).abs() < 1e-15
        );

        let mut free = DVector::zeros(basis.dim());
        free[basis.n_bound + 1] = C64::new(1.0, 0.0);
        let free = QuantumState::from_coeffs(free);
        assert_eq!(survival_probability(&free, &basis), 0.0);
        assert!(matches!(mean_n(&free, &basis), Err(Error::Undefined(_))));
    }

    #[test]
    fn field_free_quasi_energies_are_the_levels() {
        let (basis, op, psi) = setup(0.0, false);
        let dec = FloquetDecomposition::new(&op, &psi).unwrap();
        let w = core::f64::consts::TAU / op.period;
        for q in &dec.quasi_energies {
            let hit = basis.energies.iter().any(|&e| {
                let r = (q.re - e).rem_euclid(w);
                r.min(w - r) < 1e-9
            });
            assert!(hit && q.im.abs() < 1e-10);
        }
        for l in &dec.multipliers {
            assert!((l.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn floquet_matches_direct_propagation() {
        for masked in [false, true] {
            let (basis, op, psi) = setup(0.05, masked);
            let dec = FloquetDecomposition::new(&op, &psi).unwrap();
            assert!(dec.reconstruction_residual(&psi) < 1e-8);
            for l in &dec.multipliers {
                assert!(l.norm() <= 1.0 + 1e-8);
            }
            let cps = Checkpoints::from_list(alloc::vec![1, 10, 100]);
            let a = evolve_direct(&psi, &op, &basis, &cps, false);
            let b = evolve_floquet(&dec, &basis, &cps, false);
            for (x, y) in a.rows.iter().zip(&b.rows) {
                assert!((x.p_sur - y.p_sur).abs() < 1e-8, "{} {}", x.p_sur, y.p_sur);
                assert!((x.mean_n.unwrap() - y.mean_n.unwrap()).abs() < 1e-8);
                assert!((x.norm - y.norm).abs() < 1e-8);
            }
            let s = dec.state_at(100);
            let direct = {
                let mut p = psi.clone();
                for _ in 0..100 {
                    op.apply(&mut p);
                }
                p
            };
            assert!((s.coeffs - direct.coeffs).norm() < 1e-8);
        }
    }

    #[test]
    fn single_floquet_state_decays_geometrically() {
        let (basis, op, psi) = setup(0.05, true);
        let dec = FloquetDecomposition::new(&op, &psi).unwrap();
        let j = (0..dec.multipliers.len())
            .max_by(|&a, &b| {
                dec.multipliers[a]
                    .norm()
                    .total_cmp(&dec.multipliers[b].norm())
            })
            .unwrap();
        let phi = QuantumState::from_coeffs(dec.right_states.column(j).into_owned());
        let single = FloquetDecomposition::new(&op, &phi).unwrap();
        let p0 = survival_probability(&phi, &basis);
        for k in [0u64, 7, 50] {
            let want = dec.multipliers[j].norm().powi(2 * k as i32) * p0;
            assert!((single.survival_at(&basis, k) - want).abs() < 1e-8);
        }
    }

    #[test]
    fn global_phase_changes_nothing() {
        let (basis, op, psi) = setup(0.05, true);
        let mut rotated = psi.clone();
        rotated.coeffs *= C64::from_polar(1.0, 0.7);
        let cps = Checkpoints::from_list(alloc::vec![3, 20]);
        let a = evolve_direct(&psi, &op, &basis, &cps, true);
        let b = evolve_direct(&rotated, &op, &basis, &cps, true);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert!((x.p_sur - y.p_sur).abs() < 1e-14);
            assert!((x.mean_n.unwrap() - y.mean_n.unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_field_is_stationary() {
        let (basis, op, psi) = setup(0.0, true);
        let cps = Checkpoints::geometric(200, 1.5).unwrap();
        let s = evolve_direct(&psi, &op, &basis, &cps, false);
        assert_eq!(s.rows[0].k, 0);
        for r in &s.rows {
            assert!((r.p_sur - 1.0).abs() < 1e-10);
            assert!((r.mean_n.unwrap() - 5.0).abs() < 1e-6);
        }
    }
}
