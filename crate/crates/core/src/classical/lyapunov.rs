//! Finite-time Lyapunov exponent by shadow-trajectory separation.

use num_traits::Float;

use super::ensemble::sample_point;
use super::kepler::{apply_kick, propagate_coulomb, PhasePoint};
use crate::{Error, Result, SystemParams};

/// Separation measured in scaled phase space `(q/n_i², p n_i)`.
const D0: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovEstimate {
    /// Pooled mean exponent per kick.
    pub mean: f64,
    /// Renormalisation intervals that finished with both partners bound.
    pub intervals: u64,
    /// Trajectories that contributed at least one interval.
    pub trajectories: u64,
}

fn separation(a: &PhasePoint, b: &PhasePoint, n: f64) -> (f64, f64, f64) {
    let dq = (b.q - a.q) / (n * n);
    let dp = (b.p - a.p) * n;
    (dq, dp, dq.hypot(dp))
}

/// Averages `ln(d/d0)` over renormalisation intervals of `renorm_every`
/// kicks for up to `k_window` kicks per trajectory. Intervals during which
/// either partner ionizes are dropped. With `d0 = 1e-8` the interval must
/// keep `e^{L r} d0` small, or the estimate saturates.
pub fn lyapunov_estimate(
    params: &SystemParams,
    n_traj: u64,
    k_window: u64,
    renorm_every: u64,
    seed: u64,
) -> Result<LyapunovEstimate> {
    if renorm_every == 0 || k_window < renorm_every {
        return Err(Error::Domain(alloc::format!(
            "renormalisation interval {renorm_every} must be in 1..={k_window}"
        )));
    }
    let n = params.n_i as f64;
    let (dp, period) = (params.dp, params.period);
    let mut log_sum = 0.0;
    let mut intervals = 0u64;
    let mut trajectories = 0u64;

    for i in 0..n_traj {
        let start = sample_point(params.n_i, seed, i)?;
        let mut a = propagate_coulomb(&start, 0.5 * period)?;
        let mut b = PhasePoint::new(a.q + D0 * n * n, a.p)?;
        let mut contributed = false;
        let mut k = 0;
        'traj: while k + renorm_every <= k_window {
            for j in 0..renorm_every {
                a = apply_kick(&a, dp);
                b = apply_kick(&b, dp);
                if !(a.is_bound() && b.is_bound()) {
                    break 'traj;
                }
                if j + 1 < renorm_every {
                    a = propagate_coulomb(&a, period)?;
                    b = propagate_coulomb(&b, period)?;
                }
            }
            k += renorm_every;
            let (dq, dpp, d) = separation(&a, &b, n);
            if !(d > 0.0 && d.is_finite()) {
                break;
            }
            log_sum += (d / D0).ln();
            intervals += 1;
            contributed = true;
            let s = D0 / d;
            b = PhasePoint::new(a.q + s * dq * n * n, a.p + s * dpp / n)?;
            if !b.is_bound() {
                break;
            }
            a = propagate_coulomb(&a, period)?;
            b = propagate_coulomb(&b, period)?;
        }
        trajectories += contributed as u64;
    }
    if intervals == 0 {
        return Err(Error::InsufficientStatistics(alloc::format!(
            "no trajectory stayed bound for {renorm_every} kicks"
        )));
    }
    Ok(LyapunovEstimate {
        mean: log_sum / (intervals * renorm_every) as f64,
        intervals,
        trajectories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrable_limit_has_no_exponential_growth() {
        let p = SystemParams::new(10, 1.45, 0.0).unwrap();
        let l = lyapunov_estimate(&p, 50, 2000, 50, 1).unwrap();
        assert!(l.mean.abs() < 0.01, "{}", l.mean);
    }

    #[test]
    fn interval_independence() {
        // Intervals short enough that e^{L r} d0 stays in the linear regime.
        let p = SystemParams::new(10, 1.45, crate::units::f0_for_dp0(0.05, 1.45)).unwrap();
        let a = lyapunov_estimate(&p, 100, 200, 1, 9).unwrap();
        let b = lyapunov_estimate(&p, 100, 200, 4, 9).unwrap();
        assert!(a.mean > 0.1, "{}", a.mean);
        assert!(
            (a.mean - b.mean).abs() < 0.1 * a.mean,
            "{} vs {}",
            a.mean,
            b.mean
        );
    }

    #[test]
    fn scale_invariance() {
        let f0 = crate::units::f0_for_dp0(0.6, 1.45);
        let a =
            lyapunov_estimate(&SystemParams::new(10, 1.45, f0).unwrap(), 200, 20, 2, 4).unwrap();
        let b =
            lyapunov_estimate(&SystemParams::new(40, 1.45, f0).unwrap(), 200, 20, 2, 4).unwrap();
        assert!(
            (a.mean - b.mean).abs() < 0.05 * a.mean,
            "{} vs {}",
            a.mean,
            b.mean
        );
    }

    #[test]
    fn everything_ionizing_is_reported() {
        let p = SystemParams::new(10, 1.45, 5.0).unwrap();
        assert!(matches!(
            lyapunov_estimate(&p, 20, 10, 5, 1),
            Err(Error::InsufficientStatistics(_))
        ));
        assert!(lyapunov_estimate(&p, 20, 10, 0, 1).is_err());
    }
}
