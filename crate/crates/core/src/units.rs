//! Scaled and atomic units for the kicked atom, and the analytic regime
//! thresholds derived from them.
//!
//! Scaled quantities carry the subscript-0 meaning: `E0 = E n²`,
//! `T0 = T / (2π n³)`, `ν0 = 1/T0`, `F0 = F n⁴`, `Δp0 = Δp n`. At fixed
//! `(ν0, Δp0)` the classical dynamics does not depend on `n`.

use alloc::format;
use core::f64::consts::TAU;
use num_traits::Float;

use crate::{Error, Result};

/// Direction of the impulsive momentum transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KickDirection {
    /// Kicks push the electron away from the nucleus (`Δp > 0`).
    #[default]
    Positive,
    /// Kicks push the electron toward the nucleus (`Δp < 0`).
    Negative,
}

impl KickDirection {
    pub fn sign(self) -> f64 {
        match self {
            KickDirection::Positive => 1.0,
            KickDirection::Negative => -1.0,
        }
    }
}

/// Field and atom parameters, mutually consistent in scaled and atomic units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Principal quantum number of the initial state.
    pub n_i: u32,
    /// Scaled kick frequency ν0.
    pub nu0: f64,
    /// Scaled average-field magnitude |F0av|.
    pub f0av: f64,
    pub direction: KickDirection,
    /// Scaled period, `1/ν0`.
    pub t0: f64,
    /// Period in atomic units, `2π n³ T0`.
    pub period: f64,
    /// Signed scaled kick strength, `±2π F0av / ν0`.
    pub dp0: f64,
    /// Signed kick strength in atomic units, `dp0 / n`.
    pub dp: f64,
    /// Signed average field in atomic units; negative for positive kicks.
    pub fav: f64,
    /// Scaled one-photon energy `ν0 / n`.
    pub e0_gamma: f64,
}

impl SystemParams {
    /// Positive-kick parameters; see [`SystemParams::with_direction`].
    pub fn new(n_i: u32, nu0: f64, f0av: f64) -> Result<Self> {
        Self::with_direction(n_i, nu0, f0av, KickDirection::Positive)
    }

    pub fn with_direction(n_i: u32, nu0: f64, f0av: f64, direction: KickDirection) -> Result<Self> {
        if n_i < 1 {
            return Err(Error::Domain(format!("n_i must be >= 1, got {n_i}")));
        }
        if !(nu0 > 0.0) || !nu0.is_finite() {
            return Err(Error::Domain(format!(
                "nu0 must be positive and finite, got {nu0}"
            )));
        }
        if !(f0av >= 0.0) || !f0av.is_finite() {
            return Err(Error::Domain(format!(
                "F0av must be a non-negative magnitude, got {f0av}"
            )));
        }
        let n = n_i as f64;
        let sign = direction.sign();
        let t0 = 1.0 / nu0;
        let period = TAU * n * n * n * t0;
        let dp0 = sign * TAU * f0av / nu0;
        let dp = dp0 / n;
        let fav = -sign * f0av / (n * n * n * n);
        Ok(SystemParams {
            n_i,
            nu0,
            f0av,
            direction,
            t0,
            period,
            dp0,
            dp,
            fav,
            e0_gamma: nu0 / n,
        })
    }

    /// Same scaled field at a different initial quantum number.
    pub fn rescaled(&self, n_i: u32) -> Result<Self> {
        Self::with_direction(n_i, self.nu0, self.f0av, self.direction)
    }

    /// Same atom and average field, different frequency.
    pub fn with_nu0(&self, nu0: f64) -> Result<Self> {
        Self::with_direction(self.n_i, nu0, self.f0av, self.direction)
    }

    /// Photon energy `2π/T` in atomic units.
    pub fn photon_energy(&self) -> f64 {
        TAU / self.period
    }

    /// Energy of the initial hydrogenic level, `-1/(2 n²)`.
    pub fn initial_energy(&self) -> f64 {
        let n = self.n_i as f64;
        -0.5 / (n * n)
    }
}

/// Scaled average field that produces the scaled kick `dp0` at frequency `nu0`.
pub fn f0_for_dp0(dp0: f64, nu0: f64) -> f64 {
    dp0.abs() * nu0 / TAU
}

/// Which one-kick regime the scaled kick strength falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Dipole,
    SubCritical,
    ClassicalCorrespondence,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeThresholds {
    /// `1/√n`: above it one kick is resolved classically up to threshold.
    pub dp0_crit: f64,
    /// `1/n`: below it the kick acts as a dipole transition operator.
    pub dp0_dipole: f64,
    /// Smallest (real-valued) harmonic index reaching the continuum, `n/(2ν0)`.
    pub m_c: f64,
    /// Saddle energy of `-1/q + F q`, located numerically; `None` without a barrier.
    pub e_barrier: Option<f64>,
    pub q_barrier: Option<f64>,
    /// The closed form `-√(2|F|)` occasionally quoted for the saddle. Kept
    /// for reference only; nothing downstream uses it.
    pub e_barrier_alt: Option<f64>,
    pub regime: Regime,
}

impl RegimeThresholds {
    pub fn new(params: &SystemParams) -> Self {
        let n = params.n_i as f64;
        let dp0_crit = 1.0 / n.sqrt();
        let dp0_dipole = 1.0 / n;
        let m_c = n / (2.0 * params.nu0);
        let strength = params.dp0.abs();
        let regime = if strength < dp0_dipole {
            Regime::Dipole
        } else if strength > dp0_crit {
            Regime::ClassicalCorrespondence
        } else {
            Regime::SubCritical
        };
        let (e_barrier, q_barrier) = match stark_saddle(params.fav) {
            Some((q, e)) => (Some(e), Some(q)),
            None => (None, None),
        };
        let e_barrier_alt = (params.fav < 0.0).then(|| -(2.0 * params.fav.abs()).sqrt());
        RegimeThresholds {
            dp0_crit,
            dp0_dipole,
            m_c,
            e_barrier,
            q_barrier,
            e_barrier_alt,
            regime,
        }
    }

    /// Scaled field equivalents of the two momentum thresholds at frequency `nu0`.
    pub fn field_equivalents(&self, nu0: f64) -> (f64, f64) {
        (
            f0_for_dp0(self.dp0_crit, nu0),
            f0_for_dp0(self.dp0_dipole, nu0),
        )
    }
}

/// Stark potential `-1/q + fav q` on the half line.
pub fn stark_potential(q: f64, fav: f64) -> f64 {
    -1.0 / q + fav * q
}

/// Position and height of the potential maximum for `fav < 0`, found by
/// golden-section search on a log-spaced bracket.
pub fn stark_saddle(fav: f64) -> Option<(f64, f64)> {
    if !(fav < 0.0) {
        return None;
    }
    // The maximiser is unique on (0, ∞); bracket generously in log q.
    let f = |s: f64| -stark_potential(s.exp(), fav);
    let scale = 1.0 / fav.abs().sqrt();
    let (mut a, mut b) = ((scale * 1e-3).ln(), (scale * 1e3).ln());
    let golden = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - golden * (b - a);
    let mut d = a + golden * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-15 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - golden * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + golden * (b - a);
            fd = f(d);
        }
    }
    let q = (0.5 * (a + b)).exp();
    Some((q, stark_potential(q, fav)))
}
