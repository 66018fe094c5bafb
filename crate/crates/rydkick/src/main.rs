use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rydkick::config::ExperimentConfig;
use rydkick::manifest::CONFIG_FILE;
use rydkick::run::build_basis;
use rydkick::{analyze, report, EngineChoice, Manifest, RunOptions};

#[derive(Parser)]
#[command(
    name = "rydkick",
    version,
    about = "Periodically kicked one-dimensional Rydberg atom"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Result directory; overrides `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// Classical ensemble seed; overrides `classical.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Engine selection; overrides `engine`.
    #[arg(long, value_enum)]
    engine: Option<EngineChoice>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every engine at every configured frequency.
    Run(Common),
    /// Complete an interrupted run.
    Resume(Common),
    /// Run a frequency scan (a grid of at least two frequencies).
    Scan(Common),
    /// Re-run the analysis passes of a finished run.
    Analyze(Common),
    /// Golden-rule ionization rates of the deepest Stark state and τ_D.
    GoldenRule(Common),
    /// Photon-ladder band matrix and its localization.
    Ladder(Common),
    /// Regime thresholds for the configured parameters.
    Thresholds(Common),
}

impl Common {
    fn config(&self) -> anyhow::Result<ExperimentConfig> {
        let path = match (&self.config, &self.out) {
            (Some(p), _) => p.clone(),
            (None, Some(out)) => out.join(CONFIG_FILE),
            (None, None) => bail!("--config is required"),
        };
        let mut cfg =
            ExperimentConfig::load(&path).with_context(|| format!("loading {}", path.display()))?;
        if let Some(seed) = self.seed {
            cfg.classical.seed = seed;
        }
        if let Some(engine) = self.engine {
            cfg.engine = engine;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn out(&self, cfg: Option<&ExperimentConfig>) -> anyhow::Result<PathBuf> {
        self.out
            .clone()
            .or_else(|| cfg.and_then(|c| c.output.dir.clone()))
            .context("--out or output.dir is required")
    }

    fn options(&self) -> RunOptions {
        self.workers
            .map_or_else(RunOptions::default, |workers| RunOptions { workers })
    }
}

fn finish(manifest: &Manifest) -> ExitCode {
    let failed = manifest.failed();
    if failed > 0 {
        for (id, t) in manifest.tasks.iter().filter(|(_, t)| t.error.is_some()) {
            eprintln!("{id}: {}", t.error.as_deref().unwrap_or_default());
        }
        eprintln!("{failed} of {} tasks failed", manifest.tasks.len());
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn main() -> anyhow::Result<ExitCode> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run(c) => {
            let cfg = c.config()?;
            let out = c.out(Some(&cfg))?;
            Ok(finish(&rydkick::run_experiment(&cfg, &out, c.options())?))
        }
        Command::Scan(c) => {
            let cfg = c.config()?;
            if cfg.nu0_grid().len() < 2 {
                bail!("a scan needs at least two frequencies");
            }
            let out = c.out(Some(&cfg))?;
            Ok(finish(&rydkick::run_experiment(&cfg, &out, c.options())?))
        }
        Command::Resume(c) => {
            let out = c.out(None)?;
            let cfg = match &c.config {
                Some(_) => Some(c.config()?),
                None => None,
            };
            Ok(finish(&rydkick::resume(&out, cfg.as_ref(), c.options())?))
        }
        Command::Analyze(c) => {
            let out = c.out(None)?;
            let cfg = ExperimentConfig::load(&out.join(CONFIG_FILE))?;
            for f in analyze::run_passes(&cfg, &out)? {
                println!("{} {}", f.sha256, f.path);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::GoldenRule(c) => {
            let cfg = c.config()?;
            let text = report::golden_rule_text(&cfg, &build_basis(&cfg)?)?;
            emit(&c, "golden_rule.txt", &text)
        }
        Command::Ladder(c) => {
            let cfg = c.config()?;
            emit(&c, "ladder.txt", &report::ladder_text(&cfg)?)
        }
        Command::Thresholds(c) => {
            let cfg = c.config()?;
            emit(&c, "thresholds.txt", &report::thresholds_text(&cfg)?)
        }
    }
}

/// Prints a report and, with `--out`, also stores it under `analysis/`.
fn emit(c: &Common, name: &str, text: &str) -> anyhow::Result<ExitCode> {
    print!("{text}");
    if let Some(out) = &c.out {
        let path = out.join("analysis").join(name);
        std::fs::create_dir_all(path.parent().unwrap())?;
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}
