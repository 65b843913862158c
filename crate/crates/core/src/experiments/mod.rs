//! Seeded studies that exercise the estimators at desk scale.
//!
//! Every study is a pure function of its parameters and a master seed.
//! Trial `t` of group `k` (usually one group per `N`) draws from
//! `seed.derive(k).derive(t)`; objects shared by all trials of a study draw
//! from `seed.derive(SHARED_STREAM)`. Trials may run in parallel, but
//! records are merged in index order, so the output does not depend on the
//! thread count.
//!
//! A study returns its records and a list of [`Check`]s; a failed check is
//! a result, not an error. Errors are reserved for invalid parameters and
//! resource limits.

mod chaos;
mod matrix_studies;
mod tensor_studies;

pub use chaos::{run_latala_check, symmetrization_check, LatalaParams, SymmetrizationParams};
pub use matrix_studies::{
    run_bilinear_bound_study, run_geman_study, run_moment_check, AlphaMode, BilinearCoefficients, BilinearParams,
    GemanBand, GemanParams, MomentParams,
};
pub use tensor_studies::{
    run_bell_violation_study, run_chevet_check, run_growth_study, run_jmap_study, BellParams, ChevetParams,
    GrowthParams, JmapParams,
};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::stats::Summary;
use crate::{Error, Field, RandomSeed};

/// Stream index reserved for objects shared by all trials of a study.
pub const SHARED_STREAM: u64 = u64::MAX;

/// Best known upper bound for the real Grothendieck constant.
pub const GROTHENDIECK_REAL: f64 = 1.78222;
/// Best known upper bound for the complex Grothendieck constant.
pub const GROTHENDIECK_COMPLEX: f64 = 1.40491;

/// The nine studies with the inequality or identity each one probes.
pub const EXPERIMENTS: [(&str, &str); 9] = [
    ("run_growth_study", "E‖𝒯‖_∨ ≤ C (log N)^{3/2} N"),
    ("run_bell_violation_study", "C₃(n) ≥ C′ n^{1/4} (log n)^{-3/2}"),
    ("run_geman_study", "lim ‖Y^{(N)}‖ = 2 a.s."),
    ("run_bilinear_bound_study", "lim sup ‖Σ α_ij Y′_i ⊗ Y″_j‖ ≤ 4 (Σ|α_ij|²)^{1/2}"),
    ("run_moment_check", "E tr|Z^{(N)}(α)|^p ≤ (E tr|Y^{(N)}|^p)²"),
    ("run_latala_check", "‖Z(R,S,T)‖_p ≤ c (p^{1/2} Π‖·‖₂ + p Π‖·‖_∞)"),
    ("run_chevet_check", "E‖G‖_∨ ≤ √d Σ_j √n_j"),
    ("run_jmap_study", "c N^{d−1} (log N)^{−d/2} ≤ ‖J‖ ≤ N^{d−1}"),
    ("symmetrization_check", "2^{-1}‖sup|Ẑ_i|‖_p ≤ ‖sup|Z_i|‖_p ≤ ‖sup|Ẑ_i|‖_p"),
];

/// Parameters of one study, tagged by its name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment")]
pub enum StudyParams {
    #[serde(rename = "run_growth_study")]
    Growth(GrowthParams),
    #[serde(rename = "run_bell_violation_study")]
    BellViolation(BellParams),
    #[serde(rename = "run_geman_study")]
    Geman(GemanParams),
    #[serde(rename = "run_bilinear_bound_study")]
    BilinearBound(BilinearParams),
    #[serde(rename = "run_moment_check")]
    Moment(MomentParams),
    #[serde(rename = "run_latala_check")]
    Latala(LatalaParams),
    #[serde(rename = "run_chevet_check")]
    Chevet(ChevetParams),
    #[serde(rename = "run_jmap_study")]
    Jmap(JmapParams),
    #[serde(rename = "symmetrization_check")]
    Symmetrization(SymmetrizationParams),
}

impl StudyParams {
    pub fn name(&self) -> &'static str {
        match self {
            StudyParams::Growth(_) => "run_growth_study",
            StudyParams::BellViolation(_) => "run_bell_violation_study",
            StudyParams::Geman(_) => "run_geman_study",
            StudyParams::BilinearBound(_) => "run_bilinear_bound_study",
            StudyParams::Moment(_) => "run_moment_check",
            StudyParams::Latala(_) => "run_latala_check",
            StudyParams::Chevet(_) => "run_chevet_check",
            StudyParams::Jmap(_) => "run_jmap_study",
            StudyParams::Symmetrization(_) => "symmetrization_check",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            StudyParams::Growth(p) => p.validate(),
            StudyParams::BellViolation(p) => p.validate(),
            StudyParams::Geman(p) => p.validate(),
            StudyParams::BilinearBound(p) => p.validate(),
            StudyParams::Moment(p) => p.validate(),
            StudyParams::Latala(p) => p.validate(),
            StudyParams::Chevet(p) => p.validate(),
            StudyParams::Jmap(p) => p.validate(),
            StudyParams::Symmetrization(p) => p.validate(),
        }
    }
}

/// Runs a study on a pool of `parallelism` threads.
pub fn run_study(params: &StudyParams, seed: RandomSeed, parallelism: usize) -> Result<StudyOutput> {
    if parallelism == 0 {
        return Err(domain("parallelism: must be positive"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| domain(format!("cannot start {parallelism} worker threads: {e}")))?;
    pool.install(|| match params {
        StudyParams::Growth(p) => run_growth_study(p, seed),
        StudyParams::BellViolation(p) => run_bell_violation_study(p, seed),
        StudyParams::Geman(p) => run_geman_study(p, seed),
        StudyParams::BilinearBound(p) => run_bilinear_bound_study(p, seed),
        StudyParams::Moment(p) => run_moment_check(p, seed),
        StudyParams::Latala(p) => run_latala_check(p, seed),
        StudyParams::Chevet(p) => run_chevet_check(p, seed),
        StudyParams::Jmap(p) => run_jmap_study(p, seed),
        StudyParams::Symmetrization(p) => symmetrization_check(p, seed),
    })
}

/// `K_G (n_1 ⋯ n_{d−2})^{1/2}` over the `d − 2` smallest dims, with the
/// real-field constant.
pub fn reference_upper_bound(d: usize, dims: &[usize]) -> Result<f64> {
    reference_upper_bound_for(d, dims, Field::Real)
}

pub fn reference_upper_bound_for(d: usize, dims: &[usize], field: Field) -> Result<f64> {
    if d < 2 {
        return Err(domain(format!("d: must be at least 2, got {d}")));
    }
    if dims.len() != d {
        return Err(Error::Dimension(format!("expected {d} dims, got {}", dims.len())));
    }
    let mut sorted = dims.to_vec();
    sorted.sort_unstable();
    let product: f64 = sorted[..d - 2].iter().map(|&n| n as f64).product();
    let kg = match field {
        Field::Real => GROTHENDIECK_REAL,
        Field::Complex => GROTHENDIECK_COMPLEX,
    };
    Ok(kg * product.sqrt())
}

/// Named scalar outputs of one trial.
pub type Outputs = BTreeMap<String, f64>;

/// One trial's outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub experiment: String,
    pub group: usize,
    /// The swept variable of the group (usually `N`).
    pub x: f64,
    pub trial: usize,
    pub seed: RandomSeed,
    pub outputs: Outputs,
}

/// Statistics of every output over one group's trials, plus group-level
/// quantities that are not per-trial averages.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: usize,
    pub x: f64,
    pub trials: usize,
    pub stats: BTreeMap<String, Summary>,
    pub derived: BTreeMap<String, f64>,
}

/// An assertion evaluated by a study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Check {
    pub fn at_most(name: impl Into<String>, observed: f64, threshold: f64, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            passed: observed <= threshold,
            observed,
            threshold,
            detail: detail.into(),
        }
    }

    pub fn at_least(name: impl Into<String>, observed: f64, threshold: f64, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            passed: observed >= threshold,
            observed,
            threshold,
            detail: detail.into(),
        }
    }

    /// Human-readable one-liner for diagnostics.
    pub fn describe(&self) -> String {
        format!(
            "{} {}: observed {} vs threshold {} ({})",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.threshold,
            self.detail
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudySummary {
    pub experiment: String,
    pub params: StudyParams,
    pub master_seed: RandomSeed,
    /// Output plotted against `x` in the plot table, if the study sweeps.
    pub plot_column: Option<String>,
    pub groups: Vec<GroupSummary>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

/// One line of a record stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum ExperimentRecord {
    Trial(TrialRecord),
    Summary(StudySummary),
}

/// Everything a study produced. `elapsed` is kept out of the records so
/// that record streams are reproducible byte for byte.
#[derive(Clone, Debug)]
pub struct StudyOutput {
    pub trials: Vec<TrialRecord>,
    pub summary: StudySummary,
    pub elapsed: Duration,
}

impl StudyOutput {
    pub fn passed(&self) -> bool {
        self.summary.passed
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.summary.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.summary.checks.iter().find(|c| c.name == name)
    }

    pub fn group(&self, x: f64) -> Option<&GroupSummary> {
        self.summary.groups.iter().find(|g| g.x == x)
    }

    pub fn records(&self) -> Vec<ExperimentRecord> {
        self.trials
            .iter()
            .cloned()
            .map(ExperimentRecord::Trial)
            .chain(std::iter::once(ExperimentRecord::Summary(self.summary.clone())))
            .collect()
    }

    /// One JSON object per line, trials in index order, summary last.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in self.records() {
            out.push_str(&serde_json::to_string(&r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    /// Tab-separated `N, median, mean, stderr` of the plot column, one row
    /// per group; `None` for studies without a sweep.
    pub fn plot_table(&self) -> Option<String> {
        let column = self.summary.plot_column.as_ref()?;
        let mut out = String::from("N\tmedian\tmean\tstderr\n");
        for g in &self.summary.groups {
            let s = &g.stats[column];
            writeln!(out, "{}\t{}\t{}\t{}", g.x, s.median, s.mean, s.stderr).expect("write to string");
        }
        Some(out)
    }
}

/// Accumulates groups of trials and assembles the summary.
pub(crate) struct Study {
    name: &'static str,
    params: StudyParams,
    seed: RandomSeed,
    plot_column: Option<&'static str>,
    trials: Vec<TrialRecord>,
    groups: Vec<GroupSummary>,
    checks: Vec<Check>,
    started: Instant,
}

impl Study {
    pub fn new(params: StudyParams, seed: RandomSeed, plot_column: Option<&'static str>) -> Study {
        Study {
            name: params.name(),
            params,
            seed,
            plot_column,
            trials: Vec::new(),
            groups: Vec::new(),
            checks: Vec::new(),
            started: Instant::now(),
        }
    }

    /// Runs `count` trials of the next group, in parallel, each with its own
    /// derived seed; returns the group index.
    pub fn run_group<F>(&mut self, x: f64, count: usize, trial: F) -> Result<usize>
    where
        F: Fn(RandomSeed) -> Result<Outputs> + Sync,
    {
        let group = self.groups.len();
        let base = self.seed.derive(group as u64);
        let outputs = (0..count)
            .into_par_iter()
            .map(|t| trial(base.derive(t as u64)))
            .collect::<Result<Vec<_>>>()?;
        let records: Vec<TrialRecord> = outputs
            .into_iter()
            .enumerate()
            .map(|(t, outputs)| TrialRecord {
                experiment: self.name.to_string(),
                group,
                x,
                trial: t,
                seed: base.derive(t as u64),
                outputs,
            })
            .collect();
        let mut stats = BTreeMap::new();
        if let Some(first) = records.first() {
            for key in first.outputs.keys() {
                let values: Vec<f64> = records.iter().map(|r| r.outputs[key]).collect();
                stats.insert(key.clone(), Summary::of(&values));
            }
        }
        self.groups.push(GroupSummary {
            group,
            x,
            trials: count,
            stats,
            derived: BTreeMap::new(),
        });
        self.trials.extend(records);
        Ok(group)
    }

    pub fn values(&self, group: usize, key: &str) -> Vec<f64> {
        self.trials
            .iter()
            .filter(|r| r.group == group)
            .map(|r| r.outputs[key])
            .collect()
    }

    pub fn has(&self, group: usize, key: &str) -> bool {
        self.groups[group].stats.contains_key(key)
    }

    pub fn stat(&self, group: usize, key: &str) -> &Summary {
        &self.groups[group].stats[key]
    }

    pub fn derive_value(&mut self, group: usize, key: impl Into<String>, value: f64) {
        self.groups[group].derived.insert(key.into(), value);
    }

    pub fn check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn finish(self) -> StudyOutput {
        let passed = self.checks.iter().all(|c| c.passed);
        StudyOutput {
            trials: self.trials,
            summary: StudySummary {
                experiment: self.name.to_string(),
                params: self.params,
                master_seed: self.seed,
                plot_column: self.plot_column.map(str::to_string),
                groups: self.groups,
                checks: self.checks,
                passed,
            },
            elapsed: self.started.elapsed(),
        }
    }
}

/// Error naming the offending parameter.
pub(crate) fn invalid(field: &str, msg: impl std::fmt::Display) -> Error {
    domain(format!("{field}: {msg}"))
}

pub(crate) fn require_positive(field: &str, value: usize) -> Result<()> {
    if value == 0 {
        return Err(invalid(field, "must be positive"));
    }
    Ok(())
}

pub(crate) fn require_list(field: &str, values: &[usize], min: usize) -> Result<()> {
    if values.is_empty() {
        return Err(invalid(field, "must not be empty"));
    }
    if let Some(v) = values.iter().find(|&&v| v < min) {
        return Err(invalid(field, format!("entries must be at least {min}, got {v}")));
    }
    Ok(())
}

pub(crate) fn require_gaussian(field: &str, kind: crate::EnsembleKind) -> Result<()> {
    if !kind.is_gaussian() {
        return Err(invalid(field, format!("{kind:?} is not a Gaussian ensemble")));
    }
    Ok(())
}

/// Non-decreasing (`rising`) or non-increasing medians across groups, with
/// at most `allowed` inversions, each no larger than one combined standard
/// error. Reports the worst inversion in units of standard errors.
pub(crate) fn trend_check(
    name: &str,
    medians: &[f64],
    stderrs: &[f64],
    rising: bool,
    allowed: usize,
) -> Check {
    let mut inversions = 0;
    let mut worst: f64 = 0.0;
    for k in 1..medians.len() {
        let step = if rising { medians[k - 1] - medians[k] } else { medians[k] - medians[k - 1] };
        if step > 0.0 {
            inversions += 1;
            let se = (stderrs[k - 1].powi(2) + stderrs[k].powi(2)).sqrt();
            worst = worst.max(if se > 0.0 { step / se } else { f64::INFINITY });
        }
    }
    let passed = inversions <= allowed && worst <= 1.0;
    Check {
        name: name.to_string(),
        passed,
        observed: worst,
        threshold: 1.0,
        detail: format!(
            "{} medians {:?}; {inversions} inversion(s), {allowed} allowed, worst in standard errors",
            if rising { "non-decreasing" } else { "non-increasing" },
            medians
        ),
    }
}

/// `‖X‖_p` of non-negative samples with a delta-method standard error.
pub(crate) fn lp_norm_with_se(samples: &[f64], p: f64) -> (f64, f64) {
    let powers: Vec<f64> = samples.iter().map(|x| x.abs().powf(p)).collect();
    let s = Summary::of(&powers);
    let norm = s.mean.powf(1.0 / p);
    let se = if s.mean > 0.0 { norm / (p * s.mean) * s.stderr } else { 0.0 };
    (norm, se)
}
