use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bellnorm_cli::{list_experiments, parse_config, run, CliError, RunConfig, OUTPUT_DIR_ENV};
use clap::{Parser, Subcommand};

/// Seeded studies of random multilinear forms, Bell ratios and
/// random-matrix moments.
#[derive(Parser)]
#[command(name = "bellnorm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a study and write its records, plot table and timing.
    Run { config: PathBuf },
    /// List the available studies.
    List,
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::List => {
            print!("{}", list_experiments());
            0
        }
        Command::Validate { config } => match load(&config) {
            Ok(cfg) => {
                println!("{}: valid {} config", config.display(), cfg.experiment());
                0
            }
            Err(e) => fail(&e),
        },
        Command::Run { config } => match load(&config).and_then(|cfg| execute(&cfg)) {
            Ok(code) => code,
            Err(e) => fail(&e),
        },
    };
    ExitCode::from(code as u8)
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

fn execute(cfg: &RunConfig) -> Result<i32, CliError> {
    let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    let report = run(cfg, dir.as_deref())?;
    println!("records: {}", report.paths.records.display());
    if report.wrote_plot {
        println!("plot: {}", report.paths.plot.display());
    }
    for check in &report.output.summary.checks {
        println!("{}", check.describe());
    }
    if report.output.passed() {
        Ok(0)
    } else {
        for check in report.output.failed_checks() {
            eprintln!(
                "check {} failed: observed {} against threshold {}",
                check.name, check.observed, check.threshold
            );
        }
        Ok(2)
    }
}

fn fail(e: &CliError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}
