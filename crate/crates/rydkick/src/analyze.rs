//! Analysis passes over a finished run, read back from its series files.

use std::fmt::Write as _;
use std::path::Path;

use rydkick_core::analysis::{
    extrema_spacing_series, fit_mean_n, fit_power_law, fractal_dimension, log_average,
    resolution_ladder, FrequencyScan,
};
use rydkick_core::series::{EngineTag, ObservableSeries};

use crate::config::{AnalysisPass, ExperimentConfig};
use crate::format::{series_from_text, SERIES_FILE};
use crate::manifest::FileRecord;
use crate::run::{build_basis, Task};
use crate::{report, Error, Result};

pub fn load_series(root: &Path, task: &Task) -> Result<ObservableSeries> {
    let path = root.join(task.dir()).join(SERIES_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    series_from_text(&text, &path)
}

/// Every frequency of one engine as a scan, with the per-frequency series.
pub fn load_scan(
    cfg: &ExperimentConfig,
    root: &Path,
    engine: EngineTag,
) -> Result<(FrequencyScan, Vec<ObservableSeries>)> {
    let grid = cfg.nu0_grid();
    let mut all = Vec::with_capacity(grid.len());
    for &nu0 in &grid {
        all.push(load_series(root, &Task { engine, nu0 })?);
    }
    let ks: Vec<u64> = all[0].rows.iter().map(|r| r.k).collect();
    let scan = FrequencyScan::new(
        grid,
        ks,
        all.iter().map(|s| s.p_sur()).collect(),
        Some(all.iter().map(|s| s.mean_n()).collect()),
        engine,
    )?;
    Ok((scan, all))
}

fn fit_window(cfg: &ExperimentConfig) -> (f64, f64) {
    cfg.analysis
        .fit_window
        .map_or((1.0, cfg.schedule.k_final as f64), |[a, b]| (a, b))
}

pub fn fit_text(cfg: &ExperimentConfig, series: &[ObservableSeries], nu0: &[f64]) -> String {
    let window = fit_window(cfg);
    let n_i = cfg.system.n_i as f64;
    let mut s = format!(
        "# window {:e} {:e}\nnu0 alpha k0 residual n_exponent b d n_residual\n",
        window.0, window.1
    );
    for (series, nu) in series.iter().zip(nu0) {
        let ks = series.ks();
        match fit_power_law(&ks, &series.p_sur(), window) {
            Ok(p) => {
                let n0: Vec<f64> = series.mean_n().iter().map(|n| n / n_i).collect();
                let tail = match fit_mean_n(&ks, &n0, window, &p) {
                    Ok(f) => format!(
                        "{:e} {:e} {:e} {:e}",
                        f.alpha,
                        f.b.unwrap_or(f64::NAN),
                        f.d.unwrap_or(f64::NAN),
                        f.residual
                    ),
                    Err(_) => "nan nan nan nan".to_owned(),
                };
                let _ = writeln!(s, "{nu:e} {:e} {:e} {:e} {tail}", p.alpha, p.k0, p.residual);
            }
            Err(e) => {
                let _ = writeln!(s, "# {nu:e}: {e}");
            }
        }
    }
    s
}

/// Logarithmic frequency average, headed by the golden-rule `τ_D` at the
/// window centre when a quantum box is available.
pub fn log_average_text(
    cfg: &ExperimentConfig,
    scan: &FrequencyScan,
    tau_d: Option<String>,
) -> Result<String> {
    let window = cfg
        .analysis
        .log_window
        .map_or((scan.nu0[0], *scan.nu0.last().unwrap()), |[a, b]| (a, b));
    let avg = log_average(scan, window)?;
    let mut s = format!("# window {:e} {:e}\n", window.0, window.1);
    if let Some(t) = tau_d {
        let _ = writeln!(s, "# {t}");
    }
    s.push_str("K P_sur_log excluded_zeros\n");
    for (k, a) in scan.ks.iter().zip(avg) {
        let _ = writeln!(s, "{k} {:e} {}", a.value.unwrap_or(0.0), a.excluded_zeros);
    }
    Ok(s)
}

pub fn extrema_text(cfg: &ExperimentConfig, scan: &FrequencyScan) -> Result<String> {
    let spacing = extrema_spacing_series(scan, cfg.analysis.noise_floor)?;
    let mut s = String::from("K spacing\n");
    for (k, d) in scan.ks.iter().zip(spacing) {
        let _ = writeln!(s, "{k} {:e}", d.unwrap_or(f64::NAN));
    }
    Ok(s)
}

/// Dimension of `log10 P_sur(ν0)` at the final checkpoint.
pub fn fractal_text(scan: &FrequencyScan) -> Result<String> {
    let nu = &scan.nu0;
    if nu.len() < 3 {
        return Err(Error::Config(
            "fractal analysis needs a frequency grid".into(),
        ));
    }
    let step = (nu[nu.len() - 1] - nu[0]) / (nu.len() - 1) as f64;
    if nu
        .windows(2)
        .any(|w| ((w[1] - w[0]) - step).abs() > 1e-6 * step)
    {
        return Err(Error::Config(
            "fractal analysis needs a uniform frequency grid".into(),
        ));
    }
    let last = scan.ks.len() - 1;
    let values: Vec<f64> = scan.column(last).iter().map(|p| p.log10()).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(
            "survival probability vanishes on the grid".into(),
        ));
    }
    let est = fractal_dimension(&values, step, &resolution_ladder(values.len()))?;
    let mut s = format!(
        "# K {} plateau_d {:e} plateau_decades {:e} plateau_ok {}\nepsilon variation D\n",
        scan.ks[last],
        est.plateau_d,
        est.plateau_decades,
        est.has_plateau()
    );
    for j in 0..est.resolutions.len() {
        let _ = writeln!(
            s,
            "{:e} {:e} {:e}",
            est.resolutions[j],
            est.variation[j],
            est.d_of_resolution[j].unwrap_or(f64::NAN)
        );
    }
    Ok(s)
}

fn tau_d_marker(cfg: &ExperimentConfig, scan: &FrequencyScan) -> Result<String> {
    let window = cfg
        .analysis
        .log_window
        .map_or((scan.nu0[0], *scan.nu0.last().unwrap()), |[a, b]| (a, b));
    let centre = 0.5 * (window.0 + window.1);
    let basis = build_basis(cfg)?;
    let spectrum = report::stark_spectrum(cfg, &basis)?;
    let params = cfg.params(centre)?;
    let table = report::rates(&spectrum, &params)?;
    let kicks = table
        .tau_d_kicks(params.period)
        .finite()
        .map_or("inf".to_owned(), |t| format!("{t:e}"));
    Ok(format!(
        "tau_d_kicks {kicks} at_nu0 {centre:e} truncated {}",
        table.truncated
    ))
}

/// Runs the configured passes and writes `analysis/<pass>_<engine>.txt`.
/// A pass that cannot apply to the data (for example a grid too coarse for
/// extremum statistics) writes its reason instead of values.
pub fn run_passes(cfg: &ExperimentConfig, root: &Path) -> Result<Vec<FileRecord>> {
    let mut files = Vec::new();
    for (on, engine) in [
        (cfg.engine.quantum(), EngineTag::Quantum),
        (cfg.engine.classical(), EngineTag::Classical),
    ] {
        if !on {
            continue;
        }
        let (scan, series) = load_scan(cfg, root, engine)?;
        for pass in &cfg.analysis.passes {
            let (name, text) = match pass {
                AnalysisPass::Fit => ("fit", Ok(fit_text(cfg, &series, &scan.nu0))),
                AnalysisPass::LogAverage => {
                    let marker = match engine {
                        EngineTag::Quantum => Some(
                            tau_d_marker(cfg, &scan)
                                .unwrap_or_else(|e| format!("tau_d unavailable: {e}")),
                        ),
                        EngineTag::Classical => None,
                    };
                    ("log_average", log_average_text(cfg, &scan, marker))
                }
                AnalysisPass::Extrema => ("extrema", extrema_text(cfg, &scan)),
                AnalysisPass::Fractal => ("fractal", fractal_text(&scan)),
            };
            let text = text.unwrap_or_else(|e| format!("# not applicable: {e}\n"));
            let rel = format!("analysis/{name}_{}.txt", engine.as_str());
            files.push(FileRecord::write(root, &rel, text.as_bytes())?);
        }
    }
    Ok(files)
}
