//! Text reports for the `golden-rule`, `ladder` and `thresholds` verbs.

use std::fmt::Write as _;

use rydkick_core::ladder::{assemble_matrix, build_ladder, localization_metrics};
use rydkick_core::quantum::EnergyBasis;
use rydkick_core::stark::{
    diagonalize_stark, golden_rule_rates, Lifetime, RateTable, StarkSpectrum,
};
use rydkick_core::{RegimeThresholds, SystemParams};

use crate::config::ExperimentConfig;
use crate::Result;

fn lifetime(l: Lifetime) -> String {
    match l {
        Lifetime::Finite(t) => format!("{t:e}"),
        Lifetime::Infinite => "inf".to_owned(),
    }
}

/// Stark spectrum of the configured box; it depends on the field only, so
/// one spectrum serves every frequency of a scan.
pub fn stark_spectrum(cfg: &ExperimentConfig, basis: &EnergyBasis) -> Result<StarkSpectrum> {
    let params = cfg.params(cfg.nu0_grid()[0])?;
    Ok(diagonalize_stark(
        basis,
        params.fav,
        cfg.quantum.dos_window,
    )?)
}

pub fn rates(spectrum: &StarkSpectrum, params: &SystemParams) -> Result<RateTable> {
    Ok(golden_rule_rates(spectrum, params)?)
}

pub fn golden_rule_text(cfg: &ExperimentConfig, basis: &EnergyBasis) -> Result<String> {
    let spectrum = stark_spectrum(cfg, basis)?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# fav {:e} anchor_energy {:e} anchor_overlap {:e} resolved_energy {:e}",
        spectrum.fav,
        spectrum.energies[spectrum.anchor_index],
        spectrum.anchor_overlap,
        spectrum.resolved_energy
    );
    for nu0 in cfg.nu0_grid() {
        let params = cfg.params(nu0)?;
        let table = rates(&spectrum, &params)?;
        let _ = writeln!(
            s,
            "# nu0 {nu0:e} edge {:e} total_rate {:e} tau_d_au {} tau_d_kicks {} truncated {}",
            table.edge,
            table.total_rate(),
            lifetime(table.tau_d),
            lifetime(table.tau_d_kicks(params.period)),
            table.truncated
        );
        let _ = writeln!(s, "m E_m gamma");
        for h in &table.harmonics {
            let _ = writeln!(s, "{} {:e} {:e}", h.m, h.e_m, h.gamma);
        }
    }
    Ok(s)
}

pub fn thresholds_text(cfg: &ExperimentConfig) -> Result<String> {
    let mut s = String::from("nu0 dp0 dp0_crit dp0_dipole m_c e_barrier q_barrier regime\n");
    for nu0 in cfg.nu0_grid() {
        let p = cfg.params(nu0)?;
        let t = RegimeThresholds::new(&p);
        let opt = |x: Option<f64>| x.map_or("none".to_owned(), |v| format!("{v:e}"));
        let _ = writeln!(
            s,
            "{nu0:e} {:e} {:e} {:e} {:e} {} {} {:?}",
            p.dp0,
            t.dp0_crit,
            t.dp0_dipole,
            t.m_c,
            opt(t.e_barrier),
            opt(t.q_barrier),
            t.regime
        );
    }
    Ok(s)
}

pub fn ladder_text(cfg: &ExperimentConfig) -> Result<String> {
    let params = cfg.params(cfg.nu0_grid()[0])?;
    let ladder = build_ladder(&params, cfg.ladder.k_min, cfg.ladder.k_max)?;
    let matrix = assemble_matrix(&ladder, params.fav.abs());
    let metrics = localization_metrics(&matrix)?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# band_exponent {} origin_participation {:e} origin_weighted_participation {:e} mean_participation {:e}",
        matrix.band_exponent.map_or("none".to_owned(), |b| format!("{b:e}")),
        metrics.origin_participation(),
        metrics.origin_weighted_participation,
        metrics.mean_participation
    );
    let _ = writeln!(s, "k n_k delta");
    for i in 0..ladder.len() {
        let _ = writeln!(s, "{} {} {:e}", ladder.k[i], ladder.n_k[i], ladder.delta[i]);
    }
    Ok(s)
}
