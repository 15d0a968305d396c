//! `ramplab` command-line driver.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use ramplab::harness::parse_kv;
use ramplab::world::Task;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "ramplab", version, about = "Numeric action-model learning, planning and RL on crafting tasks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    settings: Settings,
    /// key=value file whose entries override command-line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Generate solvable instances as .map files.
    Gen,
    /// Generate instances and expert trajectories (.jsonl).
    Expert,
    /// Learn a domain from trajectories and write it as PDDL.
    Learn,
    /// Plan for one instance with a PDDL domain (ground truth if none given).
    Plan,
    /// k-fold offline evaluation of nsam_p and bc.
    Offline,
    /// Learn on one map size, plan on larger ones.
    Zeroshot,
    /// Online campaigns for ramp, its ablations and ppo.
    Online,
    /// Render a results CSV as an SVG chart.
    Report,
}

#[derive(clap::Args, Debug, Clone, Default)]
pub struct Settings {
    #[arg(long, global = true)]
    pub task: Option<Task>,
    #[arg(long, global = true)]
    pub size: Option<usize>,
    /// Instances to generate or use.
    #[arg(long, global = true)]
    pub count: Option<usize>,
    /// Base instance seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Comma-separated campaign seeds.
    #[arg(long, global = true)]
    pub seeds: Option<String>,
    #[arg(long, global = true)]
    pub folds: Option<usize>,
    /// nsam_p, bc or all.
    #[arg(long, global = true)]
    pub algo: Option<String>,
    /// Planner time limit per call, in seconds.
    #[arg(long, global = true)]
    pub timeout: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Shell command template with {domain} and {problem} placeholders.
    #[arg(long, global = true)]
    pub external_planner: Option<String>,
    #[arg(long, global = true)]
    pub budget_bi: Option<usize>,
    #[arg(long, global = true)]
    pub budget_be: Option<usize>,
    /// Comma-separated ramp variants, or all.
    #[arg(long, global = true)]
    pub variant: Option<String>,
    /// Input file (trajectories for learn, CSV for report).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// PDDL domain for plan.
    #[arg(long, global = true)]
    pub domain: Option<PathBuf>,
    /// Instance .map file for plan.
    #[arg(long, global = true)]
    pub map: Option<PathBuf>,
    /// Training trajectories per fold.
    #[arg(long, global = true)]
    pub train: Option<usize>,
    /// Comma-separated training-set sizes for the offline learning curve.
    #[arg(long, global = true)]
    pub curve: Option<String>,
    /// Comma-separated test map sizes for zeroshot.
    #[arg(long, global = true)]
    pub test_sizes: Option<String>,
    /// Record wall-clock times in the CSV (breaks byte-identical reruns).
    #[arg(long, global = true)]
    pub timing: bool,
}

fn parse_value<T: FromStr>(key: &str, v: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| CliError::Config(format!("{key}: {e}")))
}

impl Settings {
    pub fn apply(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        match key {
            "task" => self.task = Some(parse_value(key, v)?),
            "size" => self.size = Some(parse_value(key, v)?),
            "count" => self.count = Some(parse_value(key, v)?),
            "seed" => self.seed = Some(parse_value(key, v)?),
            "seeds" => self.seeds = Some(v.to_string()),
            "folds" => self.folds = Some(parse_value(key, v)?),
            "algo" => self.algo = Some(v.to_string()),
            "timeout" => self.timeout = Some(parse_value(key, v)?),
            "out" => self.out = Some(v.into()),
            "external_planner" => self.external_planner = Some(v.to_string()),
            "budget_bi" => self.budget_bi = Some(parse_value(key, v)?),
            "budget_be" => self.budget_be = Some(parse_value(key, v)?),
            "variant" => self.variant = Some(v.to_string()),
            "input" => self.input = Some(v.into()),
            "domain" => self.domain = Some(v.into()),
            "map" => self.map = Some(v.into()),
            "train" => self.train = Some(parse_value(key, v)?),
            "curve" => self.curve = Some(v.to_string()),
            "test_sizes" => self.test_sizes = Some(v.to_string()),
            "timing" => self.timing = parse_value(key, v)?,
            other => return Err(CliError::Config(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    pub fn task(&self) -> Task {
        self.task.unwrap_or(Task::Sword)
    }

    pub fn size(&self) -> usize {
        self.size.unwrap_or(6)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

/// Comma-separated list; empty entries are ignored.
pub fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(|s| parse_value(key, s)).collect()
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut settings = cli.settings;
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let kv = parse_kv(&text).map_err(|e| CliError::Config(e.to_string()))?;
        for (k, v) in &kv {
            settings.apply(k, v)?;
        }
    }
    commands::dispatch(cli.command, &settings)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
