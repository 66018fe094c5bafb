//! Experiment configuration: a TOML file, validated and resolved before any
//! computation starts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rydkick_core::quantum::{GridSpec, MaskPolicy};
use rydkick_core::{Checkpoints, KickDirection, SystemParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    Quantum,
    Classical,
    Both,
}

impl EngineChoice {
    pub fn quantum(self) -> bool {
        matches!(self, EngineChoice::Quantum | EngineChoice::Both)
    }

    pub fn classical(self) -> bool {
        matches!(self, EngineChoice::Classical | EngineChoice::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Positive,
    Negative,
}

/// Either an explicit list or `points` uniform samples on `[start, stop]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrequencyGrid {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        points: usize,
    },
}

impl FrequencyGrid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            FrequencyGrid::List(v) => v.clone(),
            FrequencyGrid::Range {
                start,
                stop,
                points: 1,
            } if start == stop => vec![*start],
            FrequencyGrid::Range {
                start,
                stop,
                points,
            } => {
                let step = (stop - start) / (*points as f64 - 1.0);
                (0..*points)
                    .map(|j| {
                        if j + 1 == *points {
                            *stop
                        } else {
                            start + j as f64 * step
                        }
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub n_i: u32,
    pub nu0: FrequencyGrid,
    pub f0av: f64,
    #[serde(default = "default_direction")]
    pub direction: Direction,
}

fn default_direction() -> Direction {
    Direction::Positive
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantumMethod {
    Direct,
    Floquet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskSection {
    /// Onset as a fraction of the box size.
    #[serde(default = "default_onset")]
    pub onset: f64,
    #[serde(default = "default_exponent")]
    pub exponent: f64,
    #[serde(default = "default_applications")]
    pub applications: u8,
}

fn default_onset() -> f64 {
    0.8
}
fn default_exponent() -> f64 {
    0.125
}
fn default_applications() -> u8 {
    3
}

impl Default for MaskSection {
    fn default() -> Self {
        MaskSection {
            onset: default_onset(),
            exponent: default_exponent(),
            applications: default_applications(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumSection {
    #[serde(default = "default_q_max")]
    pub q_max: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default = "default_method")]
    pub method: QuantumMethod,
    #[serde(default)]
    pub mask: MaskSection,
    #[serde(default)]
    pub histograms: bool,
    /// Sliding window (in states) for the Stark density of states.
    #[serde(default = "default_dos_window")]
    pub dos_window: usize,
}

fn default_q_max() -> f64 {
    500.0
}
fn default_points() -> usize {
    300
}
fn default_method() -> QuantumMethod {
    QuantumMethod::Floquet
}
fn default_dos_window() -> usize {
    5
}

impl Default for QuantumSection {
    fn default() -> Self {
        QuantumSection {
            q_max: default_q_max(),
            points: default_points(),
            method: default_method(),
            mask: MaskSection::default(),
            histograms: false,
            dos_window: default_dos_window(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalSection {
    #[serde(default = "default_trajectories")]
    pub trajectories: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub histograms: bool,
    /// Highest histogram bin in `n`; defaults to `4 n_i`.
    #[serde(default)]
    pub hist_n_max: Option<usize>,
}

fn default_trajectories() -> u64 {
    10_000
}
fn default_seed() -> u64 {
    1
}

impl Default for ClassicalSection {
    fn default() -> Self {
        ClassicalSection {
            trajectories: default_trajectories(),
            seed: default_seed(),
            histograms: false,
            hist_n_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub k_final: u64,
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    /// Explicit checkpoints; overrides the geometric schedule.
    #[serde(default)]
    pub list: Option<Vec<u64>>,
}

fn default_ratio() -> f64 {
    1.25
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisPass {
    Fit,
    LogAverage,
    Extrema,
    Fractal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default)]
    pub passes: Vec<AnalysisPass>,
    /// Kick window of the power-law fits; defaults to the whole schedule.
    #[serde(default)]
    pub fit_window: Option<[f64; 2]>,
    /// Frequency window of the logarithmic average; defaults to the grid.
    #[serde(default)]
    pub log_window: Option<[f64; 2]>,
    #[serde(default = "default_noise_floor")]
    pub noise_floor: f64,
}

fn default_noise_floor() -> f64 {
    rydkick_core::analysis::EXTREMA_NOISE_FLOOR
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            passes: Vec::new(),
            fit_window: None,
            log_window: None,
            noise_floor: default_noise_floor(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSection {
    pub k_min: i64,
    pub k_max: i64,
}

impl Default for LadderSection {
    fn default() -> Self {
        LadderSection {
            k_min: -10,
            k_max: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub engine: EngineChoice,
    pub system: SystemSection,
    #[serde(default)]
    pub quantum: QuantumSection,
    #[serde(default)]
    pub classical: ClassicalSection,
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub ladder: LadderSection,
    #[serde(default)]
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// The resolved configuration with every default spelled out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serialises")
    }

    /// SHA-256 of the resolved configuration, ignoring the output location.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output.dir = None;
        hex::encode(Sha256::digest(c.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let grid = self.system.nu0.values();
        if grid.is_empty() {
            return bad("frequency grid is empty".into());
        }
        if let FrequencyGrid::Range {
            start,
            stop,
            points,
        } = self.system.nu0
        {
            if points == 0 || (points == 1 && start != stop) || (points > 1 && !(stop > start)) {
                return bad(format!(
                    "invalid frequency range {start}..{stop} with {points} points"
                ));
            }
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("frequency grid must be strictly increasing".into());
        }
        for &nu0 in &grid {
            self.params(nu0)?;
        }
        let q = &self.quantum;
        if !(q.q_max > 0.0) || q.points < 16 {
            return bad(format!(
                "quantum box needs q_max > 0 and at least 16 points, got {} / {}",
                q.q_max, q.points
            ));
        }
        self.mask()
            .validate(q.q_max)
            .map_err(|e| Error::Config(e.to_string()))?;
        if q.dos_window < 2 {
            return bad("dos_window must be at least 2".into());
        }
        if self.classical.trajectories == 0 {
            return bad("at least one trajectory is required".into());
        }
        self.checkpoints()?;
        let a = &self.analysis;
        if let Some([lo, hi]) = a.fit_window {
            if !(lo > 0.0 && hi > lo) {
                return bad(format!(
                    "fit window [{lo}, {hi}] must be positive and increasing"
                ));
            }
        }
        if let Some([lo, hi]) = a.log_window {
            if !(hi >= lo) {
                return bad(format!("log window [{lo}, {hi}] must be increasing"));
            }
        }
        if !(a.noise_floor >= 0.0) {
            return bad("noise floor must be non-negative".into());
        }
        if self.ladder.k_min > 0 || self.ladder.k_max < 0 {
            return bad("ladder range must contain k = 0".into());
        }
        Ok(())
    }

    pub fn nu0_grid(&self) -> Vec<f64> {
        self.system.nu0.values()
    }

    pub fn params(&self, nu0: f64) -> Result<SystemParams> {
        let dir = match self.system.direction {
            Direction::Positive => KickDirection::Positive,
            Direction::Negative => KickDirection::Negative,
        };
        SystemParams::with_direction(self.system.n_i, nu0, self.system.f0av, dir)
            .map_err(|e| Error::Config(e.to_string()))
    }

    pub fn checkpoints(&self) -> Result<Checkpoints> {
        let s = &self.schedule;
        if s.k_final == 0 {
            return Err(Error::Config("k_final must be positive".into()));
        }
        match &s.list {
            Some(list) => {
                if list.iter().any(|&k| k > s.k_final) {
                    return Err(Error::Config("checkpoint beyond k_final".into()));
                }
                let mut ks = list.clone();
                ks.push(s.k_final);
                Ok(Checkpoints::from_list(ks))
            }
            None => {
                Checkpoints::geometric(s.k_final, s.ratio).map_err(|e| Error::Config(e.to_string()))
            }
        }
    }

    pub fn mask(&self) -> MaskPolicy {
        let m = &self.quantum.mask;
        MaskPolicy {
            q_on: m.onset * self.quantum.q_max,
            exponent: m.exponent,
            applications_per_period: m.applications,
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::default()
    }

    pub fn hist_n_max(&self) -> usize {
        self.classical
            .hist_n_max
            .unwrap_or(4 * self.system.n_i as usize)
    }
}

/// Line-level summary of how two resolved configurations differ.
pub fn diff_summary(a: &ExperimentConfig, b: &ExperimentConfig) -> String {
    let (ta, tb) = (a.to_toml(), b.to_toml());
    let la: Vec<&str> = ta.lines().collect();
    let lb: Vec<&str> = tb.lines().collect();
    let mut out = String::new();
    for l in la.iter().filter(|l| !lb.contains(l)) {
        let _ = writeln!(out, "- {l}");
    }
    for l in lb.iter().filter(|l| !la.contains(l)) {
        let _ = writeln!(out, "+ {l}");
    }
    out
}
