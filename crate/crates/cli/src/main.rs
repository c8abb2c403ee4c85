mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "quadvar", version, about = "Quadratic varieties over F_p^n: generation, census and recovery")]
struct Cli {
    /// Worker threads; 0 picks automatically. Falls back to QUADVAR_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// TOML file with the same keys as the flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Also write the report (without timings) to this file.
    #[arg(long, global = true)]
    metrics_out: Option<PathBuf>,
    /// Also write the metrics as CSV.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and write it as a set file.
    Gen {
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
    /// Approximate-variety parameters of a set.
    Analyze {
        file: PathBuf,
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
    /// Recover a quadratic variety from a set.
    Recover {
        file: PathBuf,
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
    /// Additive pattern counts, optionally checked against enumeration.
    Census {
        file: PathBuf,
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
    /// Run the identity checks on a set.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
    /// Probability table for random subspaces containing fixed vectors.
    Prob {
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn args(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn stage(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
}

impl From<quadvar::Error> for CliError {
    fn from(e: quadvar::Error) -> Self {
        use quadvar::Error as E;
        let code = match e {
            E::Io(_) | E::BadMagic | E::Truncated { .. } | E::PopcountMismatch { .. } | E::PaddingBits(_) => 2,
            E::Stage { .. } => 3,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

fn init_threads(flag: Option<usize>) -> Result<(), CliError> {
    let n = match flag {
        Some(n) => n,
        None => match std::env::var("QUADVAR_THREADS") {
            Ok(s) => s.trim().parse().map_err(|_| CliError::args(format!("QUADVAR_THREADS={s:?} is not a number")))?,
            Err(_) => 0,
        },
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::args(format!("thread pool: {e}")))
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig, CliError> {
    let Some(path) = path else { return Ok(ExperimentConfig::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::args(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads(cli.threads)?;
    let file_cfg = load_config(&cli.config)?;
    let out = commands::Outputs { metrics: cli.metrics_out, csv: cli.csv };
    match cli.command {
        Command::Gen { cfg } => commands::gen(cfg.merge_file(&file_cfg), &out),
        Command::Analyze { file, cfg } => commands::analyze(&file, cfg.merge_file(&file_cfg), &out),
        Command::Recover { file, cfg } => commands::recover(&file, cfg.merge_file(&file_cfg), &out),
        Command::Census { file, cfg } => commands::census(&file, cfg.merge_file(&file_cfg), &out),
        Command::Verify { file, cfg } => commands::verify(&file, cfg.merge_file(&file_cfg), &out),
        Command::Prob { cfg } => commands::prob(cfg.merge_file(&file_cfg), &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
