//! Exact propagation under `H0 = p²/2 - 1/q` on the half-line.
//!
//! Bound orbits use the degenerate (zero angular momentum) ellipse
//! `q = 2a sin²(ξ/2)`, `p = cot(ξ/2)/√a`, `t = a^{3/2}(ξ - sin ξ)`, which
//! passes through the nucleus at `ξ = 0 mod 2π` with `p → -p`. Unbound orbits
//! use `q = 2a sinh²(η/2)`, `p = coth(η/2)/√a`, `t = a^{3/2}(sinh η - η)`,
//! and `E = 0` the parabola `q = σ²/2`, `p = 2/σ`, `t = σ³/6`.

use core::f64::consts::{PI, TAU};
use num_traits::Float;

use crate::{Error, Result};

const MAX_ITER: usize = 100;
const TOL: f64 = 1e-12;

/// A phase-space point with its energy cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
    /// `p²/2 - 1/q`, carried along rather than recomputed.
    pub e: f64,
    /// Mean anomaly in `[0, 2π)` for `E < 0`, `sinh η - η` for `E > 0`,
    /// `σ³/6` for `E = 0`.
    pub kepler_phase: f64,
}

impl PhasePoint {
    pub fn new(q: f64, p: f64) -> Result<Self> {
        if !(q > 0.0) || !p.is_finite() {
            return Err(Error::Domain(alloc::format!(
                "phase point needs q > 0 and finite p, got ({q}, {p})"
            )));
        }
        Ok(Self::with_energy(q, p, 0.5 * p * p - 1.0 / q))
    }

    fn with_energy(q: f64, p: f64, e: f64) -> Self {
        let mut pt = PhasePoint {
            q,
            p,
            e,
            kepler_phase: 0.0,
        };
        pt.kepler_phase = phase_of(&pt);
        pt
    }

    /// The point with mean anomaly `m` on the bound orbit of energy `e < 0`.
    pub fn on_orbit(e: f64, m: f64) -> Result<Self> {
        if !(e < 0.0) {
            return Err(Error::Domain(alloc::format!(
                "bound orbit needs E < 0, got {e}"
            )));
        }
        let a = -0.5 / e;
        let (q, p) = elliptic_state(a, m.rem_euclid(TAU))?;
        Ok(PhasePoint {
            q,
            p,
            e,
            kepler_phase: m.rem_euclid(TAU),
        })
    }

    pub fn is_bound(&self) -> bool {
        self.e < 0.0
    }

    /// `1/√(-2E)` for bound points.
    pub fn n_eff(&self) -> Option<f64> {
        self.is_bound().then(|| 1.0 / (-2.0 * self.e).sqrt())
    }

    /// Relative mismatch between the cached energy and `p²/2 - 1/q`.
    pub fn energy_residual(&self) -> f64 {
        let direct = 0.5 * self.p * self.p - 1.0 / self.q;
        let scale = (0.5 * self.p * self.p).max(1.0 / self.q).max(self.e.abs());
        (direct - self.e).abs() / scale
    }
}

/// `x - sin x`, accurate for small `x`.
fn x_minus_sin(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let y = x * x;
        x * y / 6.0
            * (1.0
                - y / 20.0
                    * (1.0
                        - y / 42.0
                            * (1.0
                                - y / 72.0
                                    * (1.0
                                        - y / 110.0
                                            * (1.0
                                                - y / 156.0
                                                    * (1.0
                                                        - y / 210.0
                                                            * (1.0
                                                                - y / 272.0
                                                                    * (1.0 - y / 342.0))))))))
    } else {
        x - x.sin()
    }
}

/// `sinh x - x`, accurate for small `x`.
fn sinh_minus_x(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let y = x * x;
        x * y / 6.0
            * (1.0
                + y / 20.0
                    * (1.0
                        + y / 42.0
                            * (1.0
                                + y / 72.0
                                    * (1.0
                                        + y / 110.0
                                            * (1.0
                                                + y / 156.0
                                                    * (1.0
                                                        + y / 210.0
                                                            * (1.0
                                                                + y / 272.0
                                                                    * (1.0 + y / 342.0))))))))
    } else {
        x.sinh() - x
    }
}

/// Solves `ζ - sin ζ = m` for `m ∈ [0, π]`, `ζ ∈ [0, π]`.
fn solve_half_ellipse(m: f64) -> Result<f64> {
    if m <= 0.0 {
        return Ok(0.0);
    }
    // ζ - sin ζ ≥ (1 - π²/20) ζ³/6 on [0, π] bounds the root from above;
    // the function is convex there, so Newton from the right is monotone.
    let mut lo = (6.0 * m).cbrt().min(PI);
    let mut hi = (1.26 * (6.0 * m).cbrt()).min(m + 1.0).min(PI);
    let mut z = hi;
    for _ in 0..MAX_ITER {
        let f = x_minus_sin(z) - m;
        if f > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let half = 0.5 * z;
        let df = 2.0 * half.sin() * half.sin();
        let mut next = z - f / df;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - z).abs();
        z = next;
        if step <= 4.0 * f64::EPSILON * z || hi - lo <= 4.0 * f64::EPSILON * z {
            return Ok(z);
        }
    }
    if (hi - lo) <= TOL * z {
        Ok(z)
    } else {
        Err(Error::Kepler { anomaly: m })
    }
}

/// Solves `sinh η - η = n` for `n ≥ 0`.
fn solve_half_hyperbola(n: f64) -> Result<f64> {
    if n <= 0.0 {
        return Ok(0.0);
    }
    let c = (6.0 * n).cbrt();
    let mut lo = n.asinh();
    let mut hi = c.min((n + c).asinh());
    if hi < lo {
        hi = lo;
    }
    let mut x = hi;
    for _ in 0..MAX_ITER {
        let f = sinh_minus_x(x) - n;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let half = 0.5 * x;
        let df = 2.0 * half.sinh() * half.sinh();
        let mut next = if df > 0.0 { x - f / df } else { f64::NAN };
        if !(next >= lo && next <= hi) {
            next = 0.5 * (lo + hi);
        }
        let step = (next - x).abs();
        x = next;
        if step <= 4.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * x {
            return Ok(x);
        }
    }
    if (hi - lo) <= TOL * x {
        Ok(x)
    } else {
        Err(Error::Kepler { anomaly: n })
    }
}

fn elliptic_state(a: f64, m: f64) -> Result<(f64, f64)> {
    // Work on the outgoing half and mirror, so the nucleus passage keeps
    // full relative precision on both sides.
    let (mh, sign) = if m <= PI { (m, 1.0) } else { (TAU - m, -1.0) };
    let z = solve_half_ellipse(mh)?;
    let (s, c) = (0.5 * z).sin_cos();
    let q = 2.0 * a * s * s;
    let p = sign * c / (s * a.sqrt());
    Ok((q, p))
}

fn phase_of(pt: &PhasePoint) -> f64 {
    if pt.e < 0.0 {
        let a = -0.5 / pt.e;
        let z = 2.0 * 1.0_f64.atan2(pt.p.abs() * a.sqrt());
        let mh = x_minus_sin(z);
        if pt.p >= 0.0 {
            mh
        } else {
            TAU - mh
        }
    } else if pt.e > 0.0 {
        let a = 0.5 / pt.e;
        let eta = 2.0 * (pt.q / (2.0 * a)).sqrt().asinh();
        sinh_minus_x(eta).copysign(pt.p)
    } else {
        let sigma = (2.0 * pt.q).sqrt().copysign(pt.p);
        sigma * sigma * sigma / 6.0
    }
}

/// Advances `pt` by `dt ≥ 0` under the field-free Hamiltonian.
pub fn propagate_coulomb(pt: &PhasePoint, dt: f64) -> Result<PhasePoint> {
    if !(dt >= 0.0) {
        return Err(Error::Domain(alloc::format!(
            "propagation time must be non-negative, got {dt}"
        )));
    }
    if dt == 0.0 {
        return Ok(*pt);
    }
    let e = pt.e;
    if e < 0.0 {
        let a = -0.5 / e;
        let m = (pt.kepler_phase + dt / (a * a.sqrt())).rem_euclid(TAU);
        let (q, p) = elliptic_state(a, m)?;
        Ok(PhasePoint {
            q,
            p,
            e,
            kepler_phase: m,
        })
    } else if e > 0.0 {
        let a = 0.5 / e;
        let n = pt.kepler_phase + dt / (a * a.sqrt());
        let eta = solve_half_hyperbola(n.abs())?.copysign(n);
        let (s, c) = ((0.5 * eta).sinh(), (0.5 * eta).cosh());
        let q = 2.0 * a * s * s;
        let p = if s != 0.0 {
            c / (s * a.sqrt())
        } else {
            f64::INFINITY
        };
        Ok(PhasePoint {
            q,
            p,
            e,
            kepler_phase: n,
        })
    } else {
        let tau = pt.kepler_phase + dt;
        let sigma = (6.0 * tau).cbrt();
        Ok(PhasePoint {
            q: 0.5 * sigma * sigma,
            p: 2.0 / sigma,
            e,
            kepler_phase: tau,
        })
    }
}

/// Instantaneous momentum transfer `p → p + dp`.
pub fn apply_kick(pt: &PhasePoint, dp: f64) -> PhasePoint {
    if dp == 0.0 {
        return *pt;
    }
    let e = pt.e + pt.p * dp + 0.5 * dp * dp;
    PhasePoint::with_energy(pt.q, pt.p + dp, e)
}

/// True if the point can never return to `E < 0` under further kicks of
/// strength `dp`: outgoing, unbound, and pushed outward by every kick.
pub fn is_escaped(pt: &PhasePoint, dp: f64) -> bool {
    dp >= 0.0 && pt.e >= 0.0 && pt.p > 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn full_period_returns_to_start() {
        for n in [1.0_f64, 7.0, 50.0] {
            let e = -0.5 / (n * n);
            for m in [0.01, 0.7, 2.0, 3.1, 4.5, 6.2] {
                let pt = PhasePoint::on_orbit(e, m).unwrap();
                let back = propagate_coulomb(&pt, TAU * n * n * n).unwrap();
                assert!(close(back.q, pt.q, 1e-9), "{n} {m}: {} vs {}", back.q, pt.q);
                assert!(close(back.p, pt.p, 1e-9), "{n} {m}: {} vs {}", back.p, pt.p);
            }
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let pt = PhasePoint::new(3.0, -0.2).unwrap();
        assert_eq!(propagate_coulomb(&pt, 0.0).unwrap(), pt);
        assert!(propagate_coulomb(&pt, -1.0).is_err());
    }

    #[test]
    fn kick_energy_transfer() {
        let pt = PhasePoint::new(40.0, 0.0).unwrap();
        let k = apply_kick(&pt, 0.3);
        assert!((k.e - pt.e - 0.045).abs() < 1e-15);
        assert_eq!(apply_kick(&pt, 0.0), pt);
        let pt = PhasePoint::new(2.0, 0.4).unwrap();
        let back = apply_kick(&apply_kick(&pt, 0.25), -0.25);
        assert!((back.p - pt.p).abs() < 1e-15 && (back.e - pt.e).abs() < 1e-15 && back.q == pt.q);
    }

    #[test]
    fn turning_point_and_nucleus() {
        // Half a period from the nucleus reaches the outer turning point 2a.
        let n = 3.0_f64;
        let e = -0.5 / (n * n);
        let pt = PhasePoint::on_orbit(e, 1e-9).unwrap();
        let half = propagate_coulomb(&pt, PI * n * n * n).unwrap();
        assert!(close(half.q, 2.0 * n * n, 1e-9));
        assert!(half.p.abs() < 1e-3);
        // Just before the nucleus the momentum is large and negative.
        let before = PhasePoint::on_orbit(e, TAU - 1e-9).unwrap();
        assert!(before.p < -100.0 && before.q < 1e-4);
    }

    #[test]
    fn unbound_motion_reflects_at_the_nucleus() {
        // Incoming with E > 0: the time to reach q = 0 is a^{3/2}|N|.
        let pt = PhasePoint::new(20.0, -0.5).unwrap();
        assert!(pt.e > 0.0 && pt.kepler_phase < 0.0);
        let a = 0.5 / pt.e;
        let t_hit = -pt.kepler_phase * a * a.sqrt();
        let mirror = propagate_coulomb(&pt, 2.0 * t_hit).unwrap();
        assert!(close(mirror.q, pt.q, 1e-10), "{} vs {}", mirror.q, pt.q);
        assert!(close(mirror.p, -pt.p, 1e-10));
    }

    #[test]
    fn parabolic_motion() {
        let pt = PhasePoint::new(2.0, 1.0).unwrap();
        assert_eq!(pt.e, 0.0);
        let later = propagate_coulomb(&pt, 10.0).unwrap();
        // σ³/6 = 4/3 + 10
        let sigma = (6.0_f64 * (4.0 / 3.0 + 10.0)).cbrt();
        assert!(close(later.q, 0.5 * sigma * sigma, 1e-14));
        assert!(close(later.p, 2.0 / sigma, 1e-14));
    }

    #[test]
    fn escaped_points_stay_unbound() {
        let mut pt = PhasePoint::new(5.0, 0.8).unwrap();
        assert!(is_escaped(&pt, 0.01));
        for _ in 0..50 {
            pt = apply_kick(&propagate_coulomb(&pt, 100.0).unwrap(), 0.01);
            assert!(pt.e > 0.0 && pt.p > 0.0);
        }
        assert!(!is_escaped(&pt, -0.01));
    }

    #[test]
    fn orbit_average_of_position() {
        // Time average of q over one bound orbit is 3a/2.
        let n = 4.0_f64;
        let e = -0.5 / (n * n);
        let samples = 20000;
        let mean: f64 = (0..samples)
            .map(|j| {
                PhasePoint::on_orbit(e, TAU * (j as f64 + 0.5) / samples as f64)
                    .unwrap()
                    .q
            })
            .sum::<f64>()
            / samples as f64;
        assert!(close(mean, 1.5 * n * n, 1e-6), "{mean}");
    }

    proptest! {
        #[test]
        fn energy_is_conserved(q in 0.01f64..500.0, p in -3.0f64..3.0, dt in 0.0f64..1e5) {
            let pt = PhasePoint::new(q, p).unwrap();
            let next = propagate_coulomb(&pt, dt).unwrap();
            prop_assert_eq!(next.e, pt.e);
            prop_assert!(next.q > 0.0);
            prop_assert!(next.energy_residual() <= 1e-10, "{}", next.energy_residual());
        }

        #[test]
        fn propagation_composes(q in 0.1f64..300.0, p in -1.0f64..1.0, t1 in 0.0f64..2e3, t2 in 0.0f64..2e3) {
            let pt = PhasePoint::new(q, p).unwrap();
            let one = propagate_coulomb(&pt, t1 + t2).unwrap();
            let two = propagate_coulomb(&propagate_coulomb(&pt, t1).unwrap(), t2).unwrap();
            prop_assert!(close(one.q, two.q, 1e-7), "{} vs {}", one.q, two.q);
            prop_assert!(close(one.p, two.p, 1e-7), "{} vs {}", one.p, two.p);
        }

        #[test]
        fn kepler_roots(m in 0.0f64..PI) {
            let z = solve_half_ellipse(m).unwrap();
            prop_assert!((x_minus_sin(z) - m).abs() <= 1e-14 * m.max(1e-300) + 1e-300);
        }

        #[test]
        fn hyperbolic_roots(n in 0.0f64..1e6) {
            let x = solve_half_hyperbola(n).unwrap();
            prop_assert!((sinh_minus_x(x) - n).abs() <= 1e-13 * n.max(1e-300));
        }
    }
}
