//! Quasi-resonant photon ladder over hydrogen levels and its power-law
//! banded coupling matrix.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_traits::Float;

use crate::linalg::sorted_symmetric_eigen;
use crate::{Error, Result, SystemParams, C64};

/// Prefactor of the semiclassical coupling between ladder states.
pub const COUPLING_PREFACTOR: f64 = 0.411;
/// Decay exponent of the coupling with photon-number difference.
pub const BAND_EXPONENT: f64 = 5.0 / 3.0;

fn hydrogen(n: u32) -> f64 {
    -0.5 / (n as f64 * n as f64)
}

/// The hydrogen level nearest to `e < 0`.
fn nearest_level(e: f64) -> u32 {
    let x = 1.0 / (-2.0 * e).sqrt();
    let lo = (x.floor() as u32).max(1);
    let hi = lo + 1;
    if (hydrogen(hi) - e).abs() < (hydrogen(lo) - e).abs() {
        hi
    } else {
        lo
    }
}

/// One quasi-resonant level per photon number `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    pub k: Vec<i64>,
    pub n_k: Vec<u32>,
    /// `E_{n_k} - E_{n_i} - k ν` in atomic units.
    pub delta: Vec<f64>,
    pub params: SystemParams,
}

/// Photon numbers whose target energy `E_{n_i} + kν` lies in `[-1/2, 0)`.
pub fn admissible_range(params: &SystemParams) -> (i64, i64) {
    let nu = params.nu0 / (params.n_i as f64).powi(3);
    let e_i = hydrogen(params.n_i);
    let k_min = ((-0.5 - e_i) / nu).ceil() as i64;
    let mut k_max = (-e_i / nu).ceil() as i64 - 1;
    if e_i + k_max as f64 * nu >= 0.0 {
        k_max -= 1;
    }
    (k_min, k_max)
}

pub fn build_ladder(params: &SystemParams, k_min: i64, k_max: i64) -> Result<Ladder> {
    let (lo, hi) = admissible_range(params);
    for k in [k_min, k_max] {
        if k < lo || k > hi {
            return Err(Error::LadderRange {
                requested: k,
                min: lo,
                max: hi,
            });
        }
    }
    if k_min > 0 || k_max < 0 {
        return Err(Error::Domain(alloc::format!(
            "ladder {k_min}..={k_max} must contain k = 0"
        )));
    }
    let nu = params.nu0 / (params.n_i as f64).powi(3);
    let e_i = hydrogen(params.n_i);
    let mut ladder = Ladder {
        k: Vec::new(),
        n_k: Vec::new(),
        delta: Vec::new(),
        params: *params,
    };
    for k in k_min..=k_max {
        let target = e_i + k as f64 * nu;
        let n = if k == 0 {
            params.n_i
        } else {
            nearest_level(target)
        };
        ladder.k.push(k);
        ladder.n_k.push(n);
        ladder
            .delta
            .push(if k == 0 { 0.0 } else { hydrogen(n) - target });
    }
    Ok(ladder)
}

impl Ladder {
    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Index of `k = 0`.
    pub fn origin(&self) -> usize {
        self.k.iter().position(|&k| k == 0).unwrap_or(0)
    }
}

/// `V = 0.411 F / ((n_k n_k')^{3/2} (m ν0)^{β})` with `m = |k - k'|`.
pub fn coupling(f: f64, n_a: u32, n_b: u32, m: u64, nu0: f64, beta: f64) -> f64 {
    let nn = n_a as f64 * n_b as f64;
    COUPLING_PREFACTOR * f / (nn * nn.sqrt() * (m as f64 * nu0).powf(beta))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderMatrix {
    pub hj: DMatrix<f64>,
    /// Fitted decay power of the coupling with `m`; `None` without coupling.
    pub band_exponent: Option<f64>,
    /// Row of the initial state.
    pub origin: usize,
}

pub fn assemble_matrix(ladder: &Ladder, f: f64) -> LadderMatrix {
    assemble_matrix_with_exponent(ladder, f, BAND_EXPONENT)
}

/// As [`assemble_matrix`] with the band exponent replaced by `beta`.
pub fn assemble_matrix_with_exponent(ladder: &Ladder, f: f64, beta: f64) -> LadderMatrix {
    let n = ladder.len();
    let nu0 = ladder.params.nu0;
    let hj = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            ladder.delta[i]
        } else {
            coupling(
                f,
                ladder.n_k[i],
                ladder.n_k[j],
                i.abs_diff(j) as u64,
                nu0,
                beta,
            )
        }
    });

    // Couplings reduced by the level factor (n_k n_k')^{3/2}, averaged per
    // diagonal, against m on log-log axes.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for m in 1..n.min(64) {
        let mut acc = 0.0;
        for i in 0..n - m {
            let nn = ladder.n_k[i] as f64 * ladder.n_k[i + m] as f64;
            acc += hj[(i, i + m)].abs() * nn * nn.sqrt();
        }
        let mean = acc / (n - m) as f64;
        if mean > 0.0 {
            xs.push((m as f64).ln());
            ys.push(mean.ln());
        }
    }
    let band_exponent = (xs.len() >= 2).then(|| -slope(&xs, &ys));
    LadderMatrix {
        hj,
        band_exponent,
        origin: ladder.origin(),
    }
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Eigenpairs of a ladder matrix, ascending.
#[derive(Debug, Clone)]
pub struct LadderEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl LadderMatrix {
    /// Any real symmetric matrix with a designated initial row.
    pub fn from_matrix(hj: DMatrix<f64>, origin: usize) -> Result<Self> {
        if hj.nrows() != hj.ncols() || origin >= hj.nrows() {
            return Err(Error::Domain(
                "ladder matrix must be square and contain the origin".into(),
            ));
        }
        if (&hj - hj.transpose()).amax() > 0.0 {
            return Err(Error::Domain("ladder matrix must be symmetric".into()));
        }
        Ok(LadderMatrix {
            hj,
            band_exponent: None,
            origin,
        })
    }

    pub fn dim(&self) -> usize {
        self.hj.nrows()
    }

    pub fn eigen(&self) -> Result<LadderEigen> {
        let (values, vectors) = sorted_symmetric_eigen(self.hj.clone());
        let recon = &vectors
            * DMatrix::from_diagonal(&DVector::from_column_slice(&values))
            * vectors.transpose();
        let residual = (recon - &self.hj).amax();
        let scale = self.hj.amax().max(f64::MIN_POSITIVE);
        if !(residual <= 1e-10 * scale * (self.dim() as f64).sqrt()) {
            return Err(Error::Eigensolver { residual });
        }
        Ok(LadderEigen { values, vectors })
    }
}

/// `c(t)` from `i dc/dt = H^J c`, `c(0) = e_origin`, one vector per time.
#[derive(Debug, Clone)]
pub struct AmplitudeTrajectories {
    pub times: Vec<f64>,
    pub amplitudes: Vec<DVector<C64>>,
}

impl AmplitudeTrajectories {
    /// `|c_k(t)|²` for row `k` at every time.
    pub fn occupation(&self, k: usize) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c[k].norm_sqr()).collect()
    }
}

pub fn evolve_amplitudes(matrix: &LadderMatrix, times: &[f64]) -> Result<AmplitudeTrajectories> {
    let eig = matrix.eigen()?;
    let v = &eig.vectors;
    let start = v.row(matrix.origin).transpose();
    let mut amplitudes = Vec::with_capacity(times.len());
    for &t in times {
        let coeffs: Vec<C64> = eig
            .values
            .iter()
            .zip(start.iter())
            .map(|(&e, &s)| C64::from_polar(s, -e * t))
            .collect();
        let re = v * DVector::from_iterator(coeffs.len(), coeffs.iter().map(|z| z.re));
        let im = v * DVector::from_iterator(coeffs.len(), coeffs.iter().map(|z| z.im));
        let c = re.zip_map(&im, C64::new);
        let drift = (c.norm_squared() - 1.0).abs();
        if drift > 1e-8 {
            return Err(Error::NormDrift(drift));
        }
        amplitudes.push(c);
    }
    Ok(AmplitudeTrajectories {
        times: times.to_vec(),
        amplitudes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationMetrics {
    /// `1/Σ|ψ_k|⁴` per eigenvector.
    pub participation: Vec<f64>,
    /// Exponential envelope length in `k` per eigenvector; `None` when the
    /// envelope does not decay.
    pub lengths: Vec<Option<f64>>,
    /// Eigenvector with the largest weight on the origin row.
    pub origin_state: usize,
    pub mean_participation: f64,
    /// `Σ_j |⟨origin|ψ_j⟩|² PR_j`: the spread seen by the initial state.
    pub origin_weighted_participation: f64,
}

impl LocalizationMetrics {
    pub fn origin_participation(&self) -> f64 {
        self.participation[self.origin_state]
    }
}

/// Least-squares fit of `ln|ψ_k| = a - |k - k_peak|/ξ`.
fn envelope_length(v: &[f64]) -> Option<f64> {
    let peak = v
        .iter()
        .enumerate()
        .fold(
            (0, 0.0),
            |acc, (i, x)| if x.abs() > acc.1 { (i, x.abs()) } else { acc },
        )
        .0;
    let (xs, ys): (Vec<f64>, Vec<f64>) = v
        .iter()
        .enumerate()
        .filter(|(_, x)| x.abs() > 1e-12)
        .map(|(i, x)| (i.abs_diff(peak) as f64, x.abs().ln()))
        .unzip();
    if xs.len() < 3 || xs.iter().all(|&x| x == xs[0]) {
        return None;
    }
    let s = slope(&xs, &ys);
    (s < 0.0).then(|| -1.0 / s)
}

pub fn localization_metrics(matrix: &LadderMatrix) -> Result<LocalizationMetrics> {
    let eig = matrix.eigen()?;
    let mut participation = Vec::with_capacity(matrix.dim());
    let mut lengths = Vec::with_capacity(matrix.dim());
    for col in eig.vectors.column_iter() {
        let p4: f64 = col.iter().map(|x| x.powi(4)).sum();
        participation.push(1.0 / p4);
        lengths.push(envelope_length(col.as_slice()));
    }
    let origin_state = eig
        .vectors
        .row(matrix.origin)
        .iter()
        .enumerate()
        .fold(
            (0, -1.0),
            |acc, (j, x)| if x.abs() > acc.1 { (j, x.abs()) } else { acc },
        )
        .0;
    let mean_participation = participation.iter().sum::<f64>() / participation.len() as f64;
    let origin_weighted_participation = eig
        .vectors
        .row(matrix.origin)
        .iter()
        .zip(&participation)
        .map(|(c, p)| c * c * p)
        .sum();
    Ok(LocalizationMetrics {
        participation,
        lengths,
        origin_state,
        mean_participation,
        origin_weighted_participation,
    })
}
