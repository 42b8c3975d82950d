//! Command-line front end: tracks simulated scenarios, sweeps parameters
//! and runs the numerical self-checks.
//!
//! Exit codes: 0 success, 1 config error, 2 invariant violation,
//! 3 verification failure.

pub mod config;
pub mod error;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use pacetrack::sim::{simulate, to_pgm, Run, Scenario, ScenarioSpec};
use pacetrack::TrackerConfig;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Sweep;
pub use crate::error::CliError;
use crate::error::io_error;
use crate::output::Summary;

#[derive(Debug, Parser)]
#[command(name = "pacetrack", version, about = "Self-paced sample selection on synthetic tracking scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Track a scenario and write frames.csv and summary.json.
    Run(RunArgs),
    /// Check closed-form weights and learner refits against references.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Tracker config (TOML); omitted fields keep their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scenario spec (TOML); defaults to the built-in evaluation suite.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Sweep one parameter, e.g. `stages=1,2,3,4`; one output directory per value.
    #[arg(long, value_name = "KEY=V1,V2,...")]
    pub ablate: Option<String>,
    /// Also dump every rendered frame as PGM.
    #[arg(long)]
    pub pgm: bool,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub stages: Option<usize>,
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub beta1: Option<f64>,
    #[arg(long)]
    pub beta2: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub capacity: Option<usize>,
    #[arg(long)]
    pub interval: Option<usize>,
    #[arg(long)]
    pub acs_iters: Option<usize>,
    /// baseline, plain, time-weighted or detection-guided.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub patch: Option<usize>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut put = |key, value: Option<String>| {
            if let Some(v) = value {
                out.push((key, v));
            }
        };
        put("lambda0", self.lambda0.map(|v| v.to_string()));
        put("mu", self.mu.map(|v| v.to_string()));
        put("stages", self.stages.map(|v| v.to_string()));
        put("xi", self.xi.map(|v| v.to_string()));
        put("eta", self.eta.map(|v| v.to_string()));
        put("beta1", self.beta1.map(|v| v.to_string()));
        put("beta2", self.beta2.map(|v| v.to_string()));
        put("alpha", self.alpha.map(|v| v.to_string()));
        put("capacity", self.capacity.map(|v| v.to_string()));
        put("interval", self.interval.map(|v| v.to_string()));
        put("acs-iters", self.acs_iters.map(|v| v.to_string()));
        put("kind", self.kind.clone());
        put("patch", self.patch.map(|v| v.to_string()));
        out
    }

    pub fn apply(&self, config: &mut TrackerConfig) -> Result<(), CliError> {
        for (key, value) in self.pairs() {
            config::apply(config, key, &value)?;
        }
        config.validate()?;
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random instances per regularizer kind for the closed-form check.
    #[arg(long, default_value_t = 1000)]
    pub instances: usize,
}

/// Parses `args` and runs the command, returning the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => run(&args),
        Command::Verify(args) => verify(&args),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

/// Writes `frames.csv` and `summary.json` for one run into `dir`.
pub fn write_run(dir: &Path, run: &Run, config: &TrackerConfig, scenario: &ScenarioSpec) -> Result<(), CliError> {
    create_dir(dir)?;
    let csv_path = dir.join("frames.csv");
    let file = fs::File::create(&csv_path).map_err(|e| io_error(&csv_path, e))?;
    output::write_csv(std::io::BufWriter::new(file), &output::rows(run, config.schedule.stages), config.schedule.stages)?;

    let summary = Summary { report: run.report.clone(), config: config.clone(), scenario: scenario.clone() };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Invariant(e.to_string()))?;
    let json_path = dir.join("summary.json");
    fs::write(&json_path, json + "\n").map_err(|e| io_error(&json_path, e))
}

fn dump_frames(dir: &Path, scenario: &Scenario) -> Result<(), CliError> {
    let frames = dir.join("frames");
    create_dir(&frames)?;
    for t in 1..=scenario.len() {
        let path = frames.join(format!("{t:04}.pgm"));
        fs::write(&path, to_pgm(&scenario.frame(t)?)).map_err(|e| io_error(&path, e))?;
    }
    Ok(())
}

fn describe(run: &Run) -> String {
    let r = &run.report;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
    format!(
        "precision@20 {:.3}  auc {:.3}  mean error {:.2}  weight corrupted {} clean {}  rejected corrupted {} clean {}",
        r.precision_at_20,
        r.auc,
        r.mean_center_error,
        opt(r.rejection.mean_weight_corrupted),
        opt(r.rejection.mean_weight_clean),
        opt(r.rejection.corrupted_rejected_fraction),
        opt(r.rejection.clean_rejected_fraction),
    )
}

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let mut config = config::load_tracker(args.config.as_deref())?;
    args.overrides.apply(&mut config)?;
    let spec = config::load_scenario(args.scenario.as_deref(), args.seed)?;
    let scenario = Scenario::new(spec.clone())?;

    if let Some(text) = &args.ablate {
        return ablate(&Sweep::parse(text)?, &config, &scenario, &args.out);
    }
    let run = simulate(&scenario, &config)?;
    write_run(&args.out, &run, &config, &spec)?;
    if args.pgm {
        dump_frames(&args.out, &scenario)?;
    }
    println!("{} frames, {}", run.results.len(), describe(&run));
    println!("wrote {}", args.out.display());
    Ok(())
}

/// One line of `ablation.json`.
#[derive(Debug, Clone, Serialize)]
pub struct AblationEntry {
    pub value: String,
    pub dir: String,
    pub precision_at_20: f64,
    pub auc: f64,
    pub mean_center_error: f64,
    pub mean_weight_corrupted: Option<f64>,
    pub mean_weight_clean: Option<f64>,
    pub corrupted_rejected_fraction: Option<f64>,
    pub clean_rejected_fraction: Option<f64>,
    pub frames_per_second: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AblationReport {
    pub key: String,
    pub seed: u64,
    pub settings: Vec<AblationEntry>,
}

fn ablate(sweep: &Sweep, base: &TrackerConfig, scenario: &Scenario, out: &Path) -> Result<(), CliError> {
    let configs = sweep.configs(base)?;
    let runs: Vec<(Run, f64)> = configs
        .par_iter()
        .map(|c| {
            let start = Instant::now();
            let run = simulate(scenario, c)?;
            Ok((run, start.elapsed().as_secs_f64()))
        })
        .collect::<Result<_, CliError>>()?;

    let mut settings = Vec::new();
    for ((value, config), (run, seconds)) in sweep.values.iter().zip(&configs).zip(&runs) {
        let dir = format!("{}-{}", sweep.key, value);
        write_run(&out.join(&dir), run, config, scenario.spec())?;
        let r = &run.report;
        println!("{}={:<8} {}", sweep.key, value, describe(run));
        settings.push(AblationEntry {
            value: value.clone(),
            dir,
            precision_at_20: r.precision_at_20,
            auc: r.auc,
            mean_center_error: r.mean_center_error,
            mean_weight_corrupted: r.rejection.mean_weight_corrupted,
            mean_weight_clean: r.rejection.mean_weight_clean,
            corrupted_rejected_fraction: r.rejection.corrupted_rejected_fraction,
            clean_rejected_fraction: r.rejection.clean_rejected_fraction,
            frames_per_second: r.frames as f64 / seconds.max(1e-9),
        });
    }
    let report = AblationReport { key: sweep.key.clone(), seed: scenario.spec().seed, settings };
    let path = out.join("ablation.json");
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Invariant(e.to_string()))?;
    fs::write(&path, json + "\n").map_err(|e| io_error(&path, e))?;
    println!("wrote {}", path.display());
    Ok(())
}

pub fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let checks = verify::run_checks(args.seed, args.instances)?;
    for c in &checks {
        println!("{c}");
    }
    println!("finished in {:.2}s", start.elapsed().as_secs_f64());
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}
