use std::fs;
use std::path::{Path, PathBuf};

use bellnorm_core::experiments::{run_study, StudyOutput};
use serde::Serialize;

use crate::{CliError, RunConfig};

/// Overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "BELLNORM_OUTPUT_DIR";

#[derive(Clone, Debug, PartialEq)]
pub struct OutputPaths {
    pub records: PathBuf,
    pub plot: PathBuf,
    pub timing: PathBuf,
}

/// Files written for `config` under `dir`.
pub fn output_paths(config: &RunConfig, dir: &Path) -> OutputPaths {
    let name = config.experiment();
    OutputPaths {
        records: dir.join(format!("{name}.jsonl")),
        plot: dir.join(format!("{name}.plot.tsv")),
        timing: dir.join(format!("{name}.timing.json")),
    }
}

#[derive(Debug)]
pub struct RunReport {
    pub output: StudyOutput,
    pub paths: OutputPaths,
    /// Whether a plot table was written.
    pub wrote_plot: bool,
}

// Wall-clock time lives in its own file so the record stream stays
// reproducible byte for byte.
#[derive(Serialize)]
struct Timing<'a> {
    experiment: &'a str,
    parallelism: usize,
    elapsed_seconds: f64,
}

/// Runs the study and writes its records. `dir_override` wins over the
/// configured directory.
pub fn run(config: &RunConfig, dir_override: Option<&Path>) -> Result<RunReport, CliError> {
    let dir = dir_override
        .map(Path::to_path_buf)
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let paths = output_paths(config, &dir);
    fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;

    let output = run_study(&config.params, config.seed, config.parallelism)?;

    write(&paths.records, output.to_jsonl())?;
    let plot = output.plot_table();
    let wrote_plot = plot.is_some();
    if let Some(table) = plot {
        write(&paths.plot, table)?;
    }
    let timing = Timing {
        experiment: config.experiment(),
        parallelism: config.parallelism,
        elapsed_seconds: output.elapsed.as_secs_f64(),
    };
    write(&paths.timing, serde_json::to_string(&timing).expect("timing serializes") + "\n")?;

    Ok(RunReport {
        output,
        paths,
        wrote_plot,
    })
}

fn write(path: &Path, contents: String) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
