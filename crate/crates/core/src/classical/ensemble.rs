//! Microcanonical trajectory ensembles and their survival statistics.

use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::ops::Range;
use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::kepler::{apply_kick, is_escaped, propagate_coulomb, PhasePoint};
use crate::series::{EngineTag, NHistogram};
use crate::{Checkpoints, Error, ObservableSeries, Observables, Result, SystemParams};

/// Trajectories handled together; tallies are merged block by block in
/// index order, so results do not depend on how blocks are scheduled.
pub const BLOCK_SIZE: usize = 1024;

/// Uniform `[0, 1)` draw from the trajectory's own stream.
fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Initial condition of trajectory `index`: uniform in time along the
/// orbit of energy `-1/(2n_i²)`.
pub fn sample_point(n_i: u32, seed: u64, index: u64) -> Result<PhasePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = n_i as f64;
    PhasePoint::on_orbit(-0.5 / (n * n), TAU * uniform(&mut rng))
}

/// A microcanonical ensemble at the initial energy of `params`.
#[derive(Debug, Clone)]
pub struct ClassicalEnsemble {
    pub points: Vec<PhasePoint>,
    /// Set for trajectories with `E ≥ 0`; never removed from the count.
    pub ionized: Vec<bool>,
    pub seed: u64,
    pub params: SystemParams,
}

pub fn sample_microcanonical(
    params: &SystemParams,
    n_traj: usize,
    seed: u64,
) -> Result<ClassicalEnsemble> {
    if n_traj == 0 {
        return Err(Error::Domain(
            "ensemble needs at least one trajectory".into(),
        ));
    }
    let points = (0..n_traj as u64)
        .map(|i| sample_point(params.n_i, seed, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassicalEnsemble {
        ionized: alloc::vec![false; n_traj],
        points,
        seed,
        params: *params,
    })
}

impl ClassicalEnsemble {
    pub fn n_traj(&self) -> usize {
        self.points.len()
    }

    /// Evolves every trajectory over the schedule and reduces the checkpoint
    /// statistics. `hist_n_max` sets the last histogram bin.
    pub fn run(&self, checkpoints: &Checkpoints, hist_n_max: usize) -> Result<ObservableSeries> {
        let mut total = BlockTally::new(checkpoints.len(), hist_n_max);
        for chunk in self.points.chunks(BLOCK_SIZE) {
            let mut tally = BlockTally::new(checkpoints.len(), hist_n_max);
            for pt in chunk {
                tally.add_trajectory(pt, &self.params, checkpoints)?;
            }
            total.merge(&tally);
        }
        Ok(total.into_series(checkpoints, self.params.period))
    }

    /// Flags each trajectory by the sign of its energy after `k` kicks.
    pub fn mark_ionized_after(&mut self, k: u64) -> Result<()> {
        let ks = Checkpoints::from_list(alloc::vec![k]);
        for (pt, flag) in self.points.iter().zip(self.ionized.iter_mut()) {
            let mut last = pt.e;
            evolve_trajectory(pt, &self.params, &ks, |_, e| last = e)?;
            *flag = last >= 0.0;
        }
        Ok(())
    }
}

/// Per-checkpoint sums over a block of trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointTally {
    pub bound: u64,
    pub sum_n: f64,
    pub histogram: NHistogram,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockTally {
    pub n_traj: u64,
    pub rows: Vec<CheckpointTally>,
}

impl BlockTally {
    pub fn new(n_checkpoints: usize, hist_n_max: usize) -> Self {
        let row = CheckpointTally {
            bound: 0,
            sum_n: 0.0,
            histogram: NHistogram::new(hist_n_max),
        };
        BlockTally {
            n_traj: 0,
            rows: alloc::vec![row; n_checkpoints],
        }
    }

    fn add_trajectory(
        &mut self,
        pt: &PhasePoint,
        params: &SystemParams,
        checkpoints: &Checkpoints,
    ) -> Result<()> {
        self.n_traj += 1;
        let rows = &mut self.rows;
        evolve_trajectory(pt, params, checkpoints, |i, e| {
            if e < 0.0 {
                let n = 1.0 / (-2.0 * e).sqrt();
                rows[i].bound += 1;
                rows[i].sum_n += n;
                rows[i].histogram.add(n, 1.0);
            }
        })
    }

    pub fn merge(&mut self, other: &BlockTally) {
        self.n_traj += other.n_traj;
        for (a, b) in self.rows.iter_mut().zip(&other.rows) {
            a.bound += b.bound;
            a.sum_n += b.sum_n;
            a.histogram.merge(&b.histogram);
        }
    }

    pub fn into_series(self, checkpoints: &Checkpoints, period: f64) -> ObservableSeries {
        let n = self.n_traj.max(1) as f64;
        let rows = checkpoints
            .as_slice()
            .iter()
            .zip(self.rows)
            .map(|(&k, mut row)| {
                row.histogram.scale(1.0 / n);
                Observables {
                    k,
                    t_au: k as f64 * period,
                    p_sur: row.bound as f64 / n,
                    mean_n: (row.bound > 0).then(|| row.sum_n / row.bound as f64),
                    norm: 1.0,
                    histogram: Some(row.histogram),
                }
            })
            .collect();
        ObservableSeries {
            engine: EngineTag::Classical,
            rows,
        }
    }
}

/// Runs trajectories `range` of the ensemble defined by `(params, seed)`
/// without materialising it.
pub fn run_block(
    params: &SystemParams,
    seed: u64,
    range: Range<u64>,
    checkpoints: &Checkpoints,
    hist_n_max: usize,
) -> Result<BlockTally> {
    let mut tally = BlockTally::new(checkpoints.len(), hist_n_max);
    for i in range {
        let pt = sample_point(params.n_i, seed, i)?;
        tally.add_trajectory(&pt, params, checkpoints)?;
    }
    Ok(tally)
}

/// Serial reference for the block-parallel runner.
pub fn run_ensemble(
    params: &SystemParams,
    n_traj: u64,
    seed: u64,
    checkpoints: &Checkpoints,
    hist_n_max: usize,
) -> Result<ObservableSeries> {
    let mut total = BlockTally::new(checkpoints.len(), hist_n_max);
    for range in block_ranges(n_traj) {
        total.merge(&run_block(params, seed, range, checkpoints, hist_n_max)?);
    }
    Ok(total.into_series(checkpoints, params.period))
}

/// Fixed partition of `0..n_traj` into blocks of [`BLOCK_SIZE`].
pub fn block_ranges(n_traj: u64) -> Vec<Range<u64>> {
    let b = BLOCK_SIZE as u64;
    (0..n_traj.div_ceil(b))
        .map(|j| j * b..((j + 1) * b).min(n_traj))
        .collect()
}

/// Drives one trajectory through the kick schedule and reports its energy
/// at each checkpoint. Kicks happen at `t = kT - T/2`; the energy at
/// `t = KT` equals the energy right after kick `K`, so the final half drift
/// is never computed.
pub(crate) fn evolve_trajectory(
    start: &PhasePoint,
    params: &SystemParams,
    checkpoints: &Checkpoints,
    mut record: impl FnMut(usize, f64),
) -> Result<()> {
    let ks = checkpoints.as_slice();
    let mut next = 0;
    if ks.first() == Some(&0) {
        record(0, start.e);
        next = 1;
    }
    if next == ks.len() {
        return Ok(());
    }
    let (dp, period) = (params.dp, params.period);
    let mut pt = propagate_coulomb(start, 0.5 * period)?;
    let mut k = 0;
    loop {
        pt = apply_kick(&pt, dp);
        k += 1;
        if ks[next] == k {
            record(next, pt.e);
            next += 1;
            if next == ks.len() {
                return Ok(());
            }
        }
        if is_escaped(&pt, dp) {
            for i in next..ks.len() {
                record(i, pt.e);
            }
            return Ok(());
        }
        pt = propagate_coulomb(&pt, period)?;
    }
}

/// One-kick ionization probability of the microcanonical shell, evaluated
/// exactly: the kick ionizes iff the momentum at the kick exceeds
/// `p* = (|E| - Δp²/2)/Δp`, which happens on a single arc of mean anomaly
/// adjacent to the nucleus passage. For `p* < 0` the complement is the
/// mirror arc with `p < p*`.
pub fn one_kick_ionization(n_i: u32, dp: f64) -> f64 {
    let n = n_i as f64;
    let e = 0.5 / (n * n);
    let d = dp.abs();
    if d == 0.0 {
        return 0.0;
    }
    let p_star = (e - 0.5 * d * d) / d;
    // |p| exceeds |p*| for half-anomaly ζ < 2 atan(1/(|p*| √a)).
    let z = 2.0 * (1.0 / (p_star.abs() * n)).atan();
    let m = if z.abs() < 0.25 {
        let y = z * z;
        z * y / 6.0 * (1.0 - y / 20.0 * (1.0 - y / 42.0 * (1.0 - y / 72.0)))
    } else {
        z - z.sin()
    };
    if p_star >= 0.0 {
        m / TAU
    } else {
        1.0 - m / TAU
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_lie_on_the_shell() {
        let p = SystemParams::new(10, 1.45, 0.005).unwrap();
        let ens = sample_microcanonical(&p, 2000, 7).unwrap();
        for pt in &ens.points {
            assert_eq!(pt.e, -0.005);
            assert!(pt.energy_residual() < 1e-12);
        }
        let again = sample_microcanonical(&p, 2000, 7).unwrap();
        assert_eq!(ens.points, again.points);
        assert!(sample_microcanonical(&p, 0, 7).is_err());
    }

    #[test]
    fn time_average_of_position() {
        // ⟨q⟩ over the orbit is 3a/2; compare within 3σ of the sample mean.
        let n_i = 6;
        let p = SystemParams::new(n_i, 1.45, 0.0).unwrap();
        let ens = sample_microcanonical(&p, 40000, 11).unwrap();
        let qs: Vec<f64> = ens.points.iter().map(|pt| pt.q).collect();
        let mean = qs.iter().sum::<f64>() / qs.len() as f64;
        let var = qs.iter().map(|q| (q - mean).powi(2)).sum::<f64>() / (qs.len() - 1) as f64;
        let sigma = (var / qs.len() as f64).sqrt();
        let a = (n_i * n_i) as f64;
        // Quadrature oracle for the orbit average: ∫ q dM / 2π.
        let m = 200000;
        let oracle = (0..m)
            .map(|j| {
                PhasePoint::on_orbit(-0.5 / a, TAU * (j as f64 + 0.5) / m as f64)
                    .unwrap()
                    .q
            })
            .sum::<f64>()
            / m as f64;
        assert!((oracle - 1.5 * a).abs() < 1e-6 * a);
        assert!(
            (mean - oracle).abs() < 3.0 * sigma,
            "{mean} vs {oracle} ± {sigma}"
        );
    }

    #[test]
    fn no_field_means_full_survival() {
        let p = SystemParams::new(8, 1.45, 0.0).unwrap();
        let ks = Checkpoints::geometric(500, 1.5).unwrap();
        let s = run_ensemble(&p, 300, 1, &ks, 20).unwrap();
        assert!(s.rows.iter().all(|r| r.p_sur == 1.0));
        assert!(s
            .rows
            .iter()
            .all(|r| (r.mean_n.unwrap() - 8.0).abs() < 1e-12));
    }

    #[test]
    fn block_runner_matches_materialised_ensemble() {
        let p = SystemParams::new(10, 1.45, 0.05).unwrap();
        let ks = Checkpoints::geometric(200, 1.3).unwrap();
        let ens = sample_microcanonical(&p, 2500, 3).unwrap();
        let a = ens.run(&ks, 40).unwrap();
        let b = run_ensemble(&p, 2500, 3, &ks, 40).unwrap();
        assert_eq!(a, b);
        for row in &a.rows {
            assert!((0.0..=1.0).contains(&row.p_sur));
            let h = row.histogram.as_ref().unwrap();
            assert!((h.total() - row.p_sur).abs() < 1e-12);
        }
        // Survival can only be lost through the E = 0 line.
        assert!(a.rows.last().unwrap().p_sur < 1.0);
    }

    #[test]
    fn ionized_flags_follow_energy_sign() {
        let p = SystemParams::new(10, 1.45, 0.05).unwrap();
        let mut ens = sample_microcanonical(&p, 500, 5).unwrap();
        ens.mark_ionized_after(30).unwrap();
        let s = ens
            .run(&Checkpoints::from_list(alloc::vec![30]), 40)
            .unwrap();
        let alive = ens.ionized.iter().filter(|&&f| !f).count() as f64 / 500.0;
        assert_eq!(alive, s.at(30).unwrap().p_sur);
        assert_eq!(ens.n_traj(), 500);
    }

    #[test]
    fn one_kick_probability_matches_sampling() {
        let (n_i, dp) = (5, 0.06);
        let exact = one_kick_ionization(n_i, dp);
        let m = 400000;
        let e0 = -0.5 / 25.0;
        let hits = (0..m)
            .filter(|&j| {
                let pt = PhasePoint::on_orbit(e0, TAU * (j as f64 + 0.5) / m as f64).unwrap();
                apply_kick(&pt, dp).e >= 0.0
            })
            .count();
        let frac = hits as f64 / m as f64;
        assert!(
            (frac - exact).abs() < 2.0 / m as f64 + 1e-3 * exact,
            "{frac} vs {exact}"
        );
    }
}
