//! Run configurations: one JSON object holding the experiment name, the
//! study parameters, a mandatory seed and a few runner settings.

use std::path::PathBuf;

use bellnorm_core::experiments::{
    BellParams, BilinearParams, ChevetParams, GemanParams, GrowthParams, JmapParams, LatalaParams, MomentParams,
    StudyParams, SymmetrizationParams, EXPERIMENTS,
};
use bellnorm_core::{Error as CoreError, RandomSeed};
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::CliError;

/// A validated configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: StudyParams,
    pub seed: RandomSeed,
    /// Directory receiving the output files; the working directory if unset.
    pub output: Option<PathBuf>,
    pub parallelism: usize,
}

impl RunConfig {
    pub fn experiment(&self) -> &'static str {
        self.params.name()
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let Value::Object(mut map) = value else {
        return Err(invalid("config", "expected a single top-level object"));
    };

    let seed = match map.remove("seed") {
        None => return Err(invalid("seed", "missing (seeds are mandatory)")),
        Some(v) => v.as_u64().ok_or_else(|| invalid("seed", "expected an unsigned 64-bit integer"))?,
    };
    let output = match map.remove("output") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) if !s.is_empty() => Some(PathBuf::from(s)),
        Some(_) => return Err(invalid("output", "expected a non-empty path string")),
    };
    let parallelism = match map.remove("parallelism") {
        None => 1,
        Some(v) => match v.as_u64() {
            Some(p) if p > 0 => p as usize,
            _ => return Err(invalid("parallelism", "expected a positive integer")),
        },
    };

    let params = parse_params(map)?;
    params.validate().map_err(study_error)?;
    Ok(RunConfig {
        params,
        seed: RandomSeed(seed),
        output,
        parallelism,
    })
}

fn parse_params(mut map: Map<String, Value>) -> Result<StudyParams, CliError> {
    let name = match map.remove("experiment") {
        Some(Value::String(s)) => s,
        Some(_) => return Err(invalid("experiment", "expected a string")),
        None => return Err(invalid("experiment", "missing")),
    };
    let rest = Value::Object(map);
    Ok(match name.as_str() {
        "run_growth_study" => StudyParams::Growth(fields::<GrowthParams>(rest)?),
        "run_bell_violation_study" => StudyParams::BellViolation(fields::<BellParams>(rest)?),
        "run_geman_study" => StudyParams::Geman(fields::<GemanParams>(rest)?),
        "run_bilinear_bound_study" => StudyParams::BilinearBound(fields::<BilinearParams>(rest)?),
        "run_moment_check" => StudyParams::Moment(fields::<MomentParams>(rest)?),
        "run_latala_check" => StudyParams::Latala(fields::<LatalaParams>(rest)?),
        "run_chevet_check" => StudyParams::Chevet(fields::<ChevetParams>(rest)?),
        "run_jmap_study" => StudyParams::Jmap(fields::<JmapParams>(rest)?),
        "symmetrization_check" => StudyParams::Symmetrization(fields::<SymmetrizationParams>(rest)?),
        other => {
            let known: Vec<&str> = EXPERIMENTS.iter().map(|(n, _)| *n).collect();
            return Err(invalid(
                "experiment",
                format!("unknown experiment {other:?}; expected one of {}", known.join(", ")),
            ));
        }
    })
}

fn fields<T: DeserializeOwned>(value: Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "config".to_string() } else { path };
        invalid(field, e.into_inner().to_string())
    })
}

/// Serializes a configuration in the format read by [`parse_config`].
pub fn serialize_config(config: &RunConfig) -> String {
    let mut value = serde_json::to_value(&config.params).expect("parameters serialize");
    let map = value.as_object_mut().expect("parameters serialize to an object");
    map.insert("seed".into(), Value::from(config.seed.0));
    if let Some(dir) = &config.output {
        map.insert("output".into(), Value::from(dir.to_string_lossy().into_owned()));
    }
    map.insert("parallelism".into(), Value::from(config.parallelism));
    serde_json::to_string_pretty(&value).expect("config serializes")
}

/// The nine study names with the relation each one probes.
pub fn list_experiments() -> String {
    EXPERIMENTS
        .iter()
        .map(|(name, anchor)| format!("{name}\t{anchor}\n"))
        .collect()
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Validation {
        field: field.into(),
        message: message.into(),
    }
}

/// Study validation messages read "field: reason".
fn study_error(e: CoreError) -> CliError {
    let text = match &e {
        CoreError::Domain(m) | CoreError::Dimension(m) => m.clone(),
        other => other.to_string(),
    };
    match text.split_once(": ") {
        Some((field, message)) if !field.contains(' ') => invalid(field, message),
        _ => invalid("config", text),
    }
}
