//! Post-processing shared by both engines.

mod fractal;

pub use fractal::{fractal_dimension, resolution_ladder, semiclassical_dimension, FractalEstimate};

use alloc::vec::Vec;
use num_traits::Float;

use crate::series::EngineTag;
use crate::{Error, Result};

/// Minimum number of samples inside a fit window.
pub const MIN_FIT_POINTS: usize = 10;

/// Least-squares power law on log-log axes.
///
/// For a survival fit `P = (K/K0)^{-alpha}`. For a mean quantum number fit
/// `<n0> = b (K/K0)^{-alpha}` with `K0` taken from the survival fit and
/// `d = alpha_survival / b²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub k0: f64,
    pub b: Option<f64>,
    pub d: Option<f64>,
    pub fit_window: (f64, f64),
    /// RMS residual in natural-log units.
    pub residual: f64,
    pub points: usize,
}

struct Line {
    slope: f64,
    intercept: f64,
    residual: f64,
    points: usize,
    window: (f64, f64),
}

fn log_log_line(ks: &[f64], values: &[f64], window: (f64, f64)) -> Result<Line> {
    if ks.len() != values.len() {
        return Err(Error::Domain("abscissa and values differ in length".into()));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (&k, &v) in ks.iter().zip(values) {
        if k < window.0 || k > window.1 {
            continue;
        }
        if !(k > 0.0 && v > 0.0) {
            return Err(Error::Domain(alloc::format!(
                "non-positive sample ({k}, {v}) in fit window"
            )));
        }
        lo = lo.min(k);
        hi = hi.max(k);
        xs.push(k.ln());
        ys.push(v.ln());
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientStatistics(alloc::format!(
            "{} points in fit window, need {MIN_FIT_POINTS}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Domain("fit window spans a single abscissa".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(Line {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
        points: xs.len(),
        window: (lo, hi),
    })
}

/// Fits `P = (K/K0)^{-alpha}` to samples with `window.0 <= K <= window.1`.
pub fn fit_power_law(ks: &[f64], values: &[f64], window: (f64, f64)) -> Result<PowerLawFit> {
    let line = log_log_line(ks, values, window)?;
    let alpha = -line.slope;
    Ok(PowerLawFit {
        alpha,
        k0: (line.intercept / alpha).exp(),
        b: None,
        d: None,
        fit_window: line.window,
        residual: line.residual,
        points: line.points,
    })
}

/// Fits `<n0> = b (K/K0)^{-alpha}` with `K0` from `survival`.
pub fn fit_mean_n(
    ks: &[f64],
    n0: &[f64],
    window: (f64, f64),
    survival: &PowerLawFit,
) -> Result<PowerLawFit> {
    let line = log_log_line(ks, n0, window)?;
    let b = (line.intercept + line.slope * survival.k0.ln()).exp();
    Ok(PowerLawFit {
        alpha: -line.slope,
        k0: survival.k0,
        b: Some(b),
        d: Some(survival.alpha / (b * b)),
        fit_window: line.window,
        residual: line.residual,
        points: line.points,
    })
}

/// `ln(n_i) / <L>` in kicks.
pub fn tau_l_estimate(n_i: u32, mean_lyapunov: f64) -> Result<f64> {
    if !(mean_lyapunov > 0.0) {
        return Err(Error::Domain(alloc::format!(
            "Lyapunov exponent must be positive, got {mean_lyapunov}"
        )));
    }
    Ok((n_i as f64).ln() / mean_lyapunov)
}

/// Observables on a frequency grid, `values[j][c]` at `nu0[j]` and
/// checkpoint `ks[c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyScan {
    pub nu0: Vec<f64>,
    pub ks: Vec<u64>,
    pub p_sur: Vec<Vec<f64>>,
    pub mean_n: Option<Vec<Vec<f64>>>,
    pub engine: EngineTag,
}

impl FrequencyScan {
    pub fn new(
        nu0: Vec<f64>,
        ks: Vec<u64>,
        p_sur: Vec<Vec<f64>>,
        mean_n: Option<Vec<Vec<f64>>>,
        engine: EngineTag,
    ) -> Result<Self> {
        if nu0.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(
                "frequency grid must be strictly increasing".into(),
            ));
        }
        if p_sur.len() != nu0.len() || p_sur.iter().any(|r| r.len() != ks.len()) {
            return Err(Error::Domain("scan values do not match the grid".into()));
        }
        // Unitary propagation leaves roundoff of order 1e-13 above one.
        if p_sur
            .iter()
            .flatten()
            .any(|p| !(0.0..=1.0 + 1e-9).contains(p))
        {
            return Err(Error::Domain("survival probability outside [0, 1]".into()));
        }
        if let Some(m) = &mean_n {
            if m.len() != nu0.len() || m.iter().any(|r| r.len() != ks.len()) {
                return Err(Error::Domain(
                    "mean quantum numbers do not match the grid".into(),
                ));
            }
        }
        Ok(FrequencyScan {
            nu0,
            ks,
            p_sur,
            mean_n,
            engine,
        })
    }

    /// `P_sur` across the grid at checkpoint index `c`.
    pub fn column(&self, c: usize) -> Vec<f64> {
        self.p_sur.iter().map(|row| row[c]).collect()
    }
}

/// Geometric mean with zeros left out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMean {
    /// `None` when every sample was zero.
    pub value: Option<f64>,
    pub excluded_zeros: usize,
}

/// `10^(mean log10 x)` over the positive samples.
pub fn geometric_mean(xs: &[f64]) -> Result<LogMean> {
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut zeros = 0usize;
    for &x in xs {
        if x == 0.0 {
            zeros += 1;
        } else if x > 0.0 {
            sum += x.log10();
            count += 1;
        } else {
            return Err(Error::Domain(alloc::format!(
                "negative sample {x} in logarithmic average"
            )));
        }
    }
    let value = (count > 0).then(|| 10.0.powf(sum / count as f64));
    Ok(LogMean {
        value,
        excluded_zeros: zeros,
    })
}

/// Logarithmic average of `P_sur` over `nu_window.0 <= nu0 <= nu_window.1`,
/// one entry per checkpoint.
pub fn log_average(scan: &FrequencyScan, nu_window: (f64, f64)) -> Result<Vec<LogMean>> {
    let rows: Vec<&Vec<f64>> = scan
        .nu0
        .iter()
        .zip(&scan.p_sur)
        .filter(|(nu, _)| **nu >= nu_window.0 && **nu <= nu_window.1)
        .map(|(_, r)| r)
        .collect();
    if rows.is_empty() {
        return Err(Error::InsufficientStatistics(
            "no frequencies inside the averaging window".into(),
        ));
    }
    (0..scan.ks.len())
        .map(|c| geometric_mean(&rows.iter().map(|r| r[c]).collect::<Vec<_>>()))
        .collect()
}

/// Default relative noise floor for extremum detection.
pub const EXTREMA_NOISE_FLOOR: f64 = 1e-12;
/// Minimum grid size for extremum statistics.
pub const MIN_EXTREMA_POINTS: usize = 100;

/// Positions of strict local extrema that clear both neighbours by more
/// than `noise_floor` relative to the sample magnitude.
pub fn extrema(values: &[f64], noise_floor: f64) -> Vec<usize> {
    let mut out = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (l, c, r) = (values[i - 1], values[i], values[i + 1]);
        let tol = noise_floor * c.abs().max(f64::MIN_POSITIVE);
        if (c - l > tol && c - r > tol) || (l - c > tol && r - c > tol) {
            out.push(i);
        }
    }
    out
}

/// Mean distance in `nu0` between adjacent extrema; `None` with fewer than
/// two extrema.
pub fn extrema_spacing(nu0: &[f64], values: &[f64], noise_floor: f64) -> Result<Option<f64>> {
    if nu0.len() != values.len() {
        return Err(Error::Domain("grid and values differ in length".into()));
    }
    if nu0.len() < MIN_EXTREMA_POINTS {
        return Err(Error::InsufficientStatistics(alloc::format!(
            "{} grid points, need {MIN_EXTREMA_POINTS}",
            nu0.len()
        )));
    }
    let ex = extrema(values, noise_floor);
    if ex.len() < 2 {
        return Ok(None);
    }
    Ok(Some(
        (nu0[ex[ex.len() - 1]] - nu0[ex[0]]) / (ex.len() - 1) as f64,
    ))
}

/// Extremum spacing of the scan at every checkpoint.
pub fn extrema_spacing_series(scan: &FrequencyScan, noise_floor: f64) -> Result<Vec<Option<f64>>> {
    (0..scan.ks.len())
        .map(|c| extrema_spacing(&scan.nu0, &scan.column(c), noise_floor))
        .collect()
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = alloc::vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let mid = 0.5 * (i + j) as f64;
        for &t in &idx[i..=j] {
            r[t] = mid;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation, ties ranked by their mean position. `None`
/// when either input is constant or shorter than 2.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}
