//! Graph dimension by the variation method.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use num_traits::Float;

use crate::{Error, Result};

/// Tolerance on the spread of `D` across a plateau.
pub const PLATEAU_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct FractalEstimate {
    /// Neighbourhood half-widths in abscissa units.
    pub resolutions: Vec<f64>,
    /// `V(ε)`, the integrated oscillation.
    pub variation: Vec<f64>,
    /// Local dimension at each interior resolution; the first and last
    /// entries are `None`.
    pub d_of_resolution: Vec<Option<f64>>,
    pub plateau_d: f64,
    pub plateau_decades: f64,
    /// Index range of the plateau within `resolutions`.
    pub plateau: (usize, usize),
}

impl FractalEstimate {
    /// Plateau at least one decade wide.
    pub fn has_plateau(&self) -> bool {
        self.plateau_decades >= 1.0
    }
}

/// Half-widths in grid steps on a ladder of ratio `√2`, from one step up to
/// a tenth of the grid, with duplicates from rounding removed.
pub fn resolution_ladder(points: usize) -> Vec<usize> {
    let top = (points / 10).max(1);
    let mut out = Vec::new();
    let mut x = 1.0_f64;
    while x.round() as usize <= top {
        let w = x.round() as usize;
        if out.last() != Some(&w) {
            out.push(w);
        }
        x *= core::f64::consts::SQRT_2;
    }
    out
}

/// Mean over interior points of `sup - inf` on `[i - w, i + w]`.
fn mean_oscillation(values: &[f64], w: usize) -> f64 {
    let width = 2 * w + 1;
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut sum = 0.0;
    let mut count = 0usize;
    for (i, &v) in values.iter().enumerate() {
        while maxq.back().is_some_and(|&j| values[j] <= v) {
            maxq.pop_back();
        }
        maxq.push_back(i);
        while minq.back().is_some_and(|&j| values[j] >= v) {
            minq.pop_back();
        }
        minq.push_back(i);
        if i + 1 >= width {
            let start = i + 1 - width;
            while maxq.front().is_some_and(|&j| j < start) {
                maxq.pop_front();
            }
            while minq.front().is_some_and(|&j| j < start) {
                minq.pop_front();
            }
            sum += values[maxq[0]] - values[minq[0]];
            count += 1;
        }
    }
    sum / count as f64
}

/// Estimates the graph dimension of a uniformly sampled signal with grid
/// step `step`, at neighbourhood half-widths `half_widths` (grid steps,
/// strictly increasing). `D(ε) = 2 - d ln V / d ln ε` by centred differences.
pub fn fractal_dimension(
    values: &[f64],
    step: f64,
    half_widths: &[usize],
) -> Result<FractalEstimate> {
    if half_widths.len() < 3 || half_widths.windows(2).any(|w| w[1] <= w[0]) || half_widths[0] == 0
    {
        return Err(Error::Domain(
            "need at least three increasing positive resolutions".into(),
        ));
    }
    if !(step > 0.0) || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain(
            "signal must be finite on a positive grid step".into(),
        ));
    }
    let top = *half_widths.last().unwrap_or(&0);
    if values.len() < 2 * top + 2 {
        return Err(Error::InsufficientStatistics(alloc::format!(
            "{} samples cannot resolve a half-width of {top} steps",
            values.len()
        )));
    }
    let length = step * (values.len() - 1) as f64;
    let resolutions: Vec<f64> = half_widths.iter().map(|&w| w as f64 * step).collect();
    let variation: Vec<f64> = half_widths
        .iter()
        .map(|&w| mean_oscillation(values, w) * length)
        .collect();
    if variation.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Undefined("signal is constant at some resolution"));
    }

    let m = resolutions.len();
    let mut d_of_resolution = alloc::vec![None; m];
    for j in 1..m - 1 {
        let slope = (variation[j + 1].ln() - variation[j - 1].ln())
            / (resolutions[j + 1].ln() - resolutions[j - 1].ln());
        d_of_resolution[j] = Some((2.0 - slope).clamp(1.0, 2.0));
    }

    // Widest run of consecutive interior points whose spread stays within
    // the tolerance, measured in decades of ε.
    let mut best = (1, 1);
    let mut best_width = -1.0;
    for a in 1..m - 1 {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for b in a..m - 1 {
            let d = d_of_resolution[b].unwrap_or(1.0);
            lo = lo.min(d);
            hi = hi.max(d);
            if hi - lo >= PLATEAU_TOLERANCE {
                break;
            }
            let width = (resolutions[b] / resolutions[a]).log10();
            if width > best_width {
                best_width = width;
                best = (a, b);
            }
        }
    }
    let run = &d_of_resolution[best.0..=best.1];
    let plateau_d = run.iter().map(|d| d.unwrap_or(1.0)).sum::<f64>() / run.len() as f64;
    Ok(FractalEstimate {
        resolutions,
        variation,
        d_of_resolution,
        plateau_d,
        plateau_decades: best_width.max(0.0),
        plateau: best,
    })
}

/// `2 - alpha/2` for a survival decay exponent `alpha`.
pub fn semiclassical_dimension(alpha: f64) -> f64 {
    2.0 - 0.5 * alpha
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::TAU;

    /// Weierstrass sum `Σ λ^{-kH} cos(2π λ^k x)` with graph dimension `2 - H`.
    fn weierstrass(points: usize, h: f64) -> Vec<f64> {
        let lambda = 2.0_f64;
        let terms = ((points as f64).log2() as i32) + 4;
        (0..points)
            .map(|i| {
                let x = i as f64 / points as f64;
                (0..terms)
                    .map(|k| {
                        lambda.powf(-h * k as f64) * (TAU * lambda.powi(k) * x + k as f64).cos()
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn smooth_signal_is_one_dimensional() {
        let n = 20000;
        let v: Vec<f64> = (0..n)
            .map(|i| (TAU * 3.0 * i as f64 / n as f64).sin() + 0.2 * i as f64 / n as f64)
            .collect();
        let est = fractal_dimension(&v, 1.0 / n as f64, &resolution_ladder(n)).unwrap();
        assert!((est.plateau_d - 1.0).abs() < 0.02, "{}", est.plateau_d);
        assert!(est.has_plateau());
    }

    #[test]
    fn weierstrass_dimension() {
        let n = 1 << 16;
        let v = weierstrass(n, 0.5);
        let est = fractal_dimension(&v, 1.0 / n as f64, &resolution_ladder(n)).unwrap();
        assert!(
            (est.plateau_d - 1.5).abs() < 0.05,
            "{} {:?}",
            est.plateau_d,
            est.d_of_resolution
        );
        assert!(est.has_plateau(), "{}", est.plateau_decades);
    }

    #[test]
    fn affine_and_reversal_invariance() {
        let n = 1 << 14;
        let v = weierstrass(n, 0.3);
        let ladder = resolution_ladder(n);
        let a = fractal_dimension(&v, 1.0, &ladder).unwrap();
        let scaled: Vec<f64> = v.iter().map(|x| -4.0 * x + 7.0).collect();
        let b = fractal_dimension(&scaled, 1.0, &ladder).unwrap();
        let rev: Vec<f64> = v.iter().rev().copied().collect();
        let c = fractal_dimension(&rev, 1.0, &ladder).unwrap();
        for (x, y) in a
            .d_of_resolution
            .iter()
            .zip(&b.d_of_resolution)
            .chain(a.d_of_resolution.iter().zip(&c.d_of_resolution))
        {
            match (x, y) {
                (Some(x), Some(y)) => assert!((x - y).abs() < 1e-9),
                (None, None) => {}
                _ => panic!("definedness differs"),
            }
        }
    }

    #[test]
    fn oscillation_matches_brute_force() {
        let v: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64).collect();
        for w in [1, 3, 7] {
            let brute: f64 = (w..50 - w)
                .map(|i| {
                    let s = &v[i - w..=i + w];
                    s.iter().cloned().fold(f64::MIN, f64::max)
                        - s.iter().cloned().fold(f64::MAX, f64::min)
                })
                .sum::<f64>()
                / (50 - 2 * w) as f64;
            assert!((mean_oscillation(&v, w) - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn ladder_and_bounds() {
        assert_eq!(
            resolution_ladder(200),
            alloc::vec![1, 2, 3, 4, 6, 8, 11, 16]
        );
        assert_eq!(semiclassical_dimension(1.5), 1.25);
        assert!(fractal_dimension(&[1.0; 100], 1.0, &[1, 2, 4]).is_err());
        assert!(fractal_dimension(&[1.0, 2.0], 1.0, &[1, 2, 4]).is_err());
    }
}
