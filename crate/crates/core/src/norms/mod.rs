//! Matrix norms and lower-bound estimators for tensor norms.
//!
//! Every estimator returns an [`EstimateResult`] whose `value` is the
//! objective re-evaluated at the returned witness, so it is a certified
//! feasible value (a lower bound for the supremum it approximates).

mod alternating;
mod projection;

pub use alternating::{
    injective_norm_lower, sign_enumeration_bits, sign_sup_exhaustive, unimodular_sup, SignEnumeration, MAX_ENUMERATION_BITS,
    PHASE_FLOOR,
};
pub use projection::projection_supremum_mc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::singular_values;
use crate::tensor::GaussianPairForm;
use crate::{CMatrix, RandomSeed, C64};

/// Largest size for which [`spectral_norm`] uses a full SVD.
pub const SVD_MAX_DIM: usize = 512;

/// Relative slack allowed when asserting that an ascent did not decrease.
pub(crate) const MONOTONE_SLACK: f64 = 1e-10;

/// Restart and stopping parameters shared by the ascent solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub relative_tolerance: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            restarts: 16,
            max_iterations: 500,
            relative_tolerance: 1e-9,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(domain("solver.restarts must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(domain("solver.max_iterations must be positive"));
        }
        if !(self.relative_tolerance > 0.0 && self.relative_tolerance.is_finite()) {
            return Err(domain("solver.relative_tolerance must be a positive number"));
        }
        Ok(())
    }
}

/// Outcome of a restarted ascent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    /// Objective at `witness`.
    pub value: f64,
    /// One vector per mode: unit vectors, unimodular or sign vectors, or
    /// row-major projection matrices, depending on the estimator.
    pub witness: Vec<Vec<C64>>,
    /// Best objective among the starting points, before any ascent.
    pub initial_value: f64,
    pub restarts_used: usize,
    pub iterations_per_restart: Vec<usize>,
    pub converged: Vec<bool>,
    pub seed: RandomSeed,
}

/// One restart's final state, merged by [`best_of`].
pub(crate) struct RestartOutcome {
    pub value: f64,
    pub initial: f64,
    pub witness: Vec<Vec<C64>>,
    pub iterations: usize,
    pub converged: bool,
}

/// Highest value wins; the lowest restart index breaks ties, so the merge
/// does not depend on execution order.
pub(crate) fn best_of(outcomes: Vec<RestartOutcome>, seed: RandomSeed) -> (EstimateResult, usize) {
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.value > outcomes[best].value {
            best = i;
        }
    }
    let initial_value = outcomes.iter().map(|o| o.initial).fold(0.0, f64::max);
    let iterations_per_restart = outcomes.iter().map(|o| o.iterations).collect();
    let converged = outcomes.iter().map(|o| o.converged).collect();
    let restarts_used = outcomes.len();
    let witness = outcomes.into_iter().nth(best).map(|o| o.witness).unwrap_or_default();
    (
        EstimateResult {
            value: 0.0,
            witness,
            initial_value,
            restarts_used,
            iterations_per_restart,
            converged,
            seed,
        },
        best,
    )
}

pub(crate) fn relative_gain(new: f64, old: f64) -> f64 {
    if old > 0.0 {
        (new - old) / old
    } else if new > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

pub(crate) fn assert_monotone(new: f64, old: f64, what: &str) {
    assert!(
        new >= old * (1.0 - MONOTONE_SLACK) - f64::MIN_POSITIVE,
        "{what}: objective decreased from {old} to {new}"
    );
}

/// Largest singular value: full SVD up to [`SVD_MAX_DIM`], power iteration
/// on `M^* M` above.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.nrows().max(m.ncols()) <= SVD_MAX_DIM {
        spectral_norm_svd(m)
    } else {
        spectral_norm_power(m, 1e-12, 100_000)
    }
}

pub fn spectral_norm_svd(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Power iteration on `M^* M` from a fixed start vector, stopped when the
/// eigenvalue estimate changes by less than `tol` relatively.
pub fn spectral_norm_power(m: &CMatrix, tol: f64, max_iterations: usize) -> f64 {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return 0.0;
    }
    let mut v = nalgebra::DVector::from_fn(n, |i, _| C64::new(1.0 + (i as f64 + 1.0).sqrt() / n as f64, 0.0));
    v /= C64::new(v.norm(), 0.0);
    let mut lambda = 0.0;
    for _ in 0..max_iterations {
        let w = m.adjoint() * (m * &v);
        let next = w.norm();
        if next == 0.0 {
            return 0.0;
        }
        v = w / C64::new(next, 0.0);
        let done = (next - lambda).abs() <= tol * next;
        lambda = next;
        if done {
            break;
        }
    }
    lambda.sqrt()
}

/// `Σ_j j^{-1/2} σ_j` over the singular values in non-increasing order.
pub fn s21_quasinorm(m: &CMatrix) -> f64 {
    singular_values(m)
        .iter()
        .enumerate()
        .map(|(j, s)| s / ((j + 1) as f64).sqrt())
        .sum()
}

/// `(mean |x|^p)^{1/p}`.
pub fn empirical_lp_norm(samples: &[f64], p: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(domain("empirical_lp_norm needs at least one sample"));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(domain(format!("p must be a finite number >= 1, got {p}")));
    }
    let mean = samples.iter().map(|x| x.abs().powf(p)).sum::<f64>() / samples.len() as f64;
    Ok(mean.powf(1.0 / p))
}

/// `‖g‖ ‖g'‖`, the value of the rank-one strategy, which bounds the minimal
/// norm of the form's coefficient tensor from below.
pub fn min_norm_lower_rankone(form: &GaussianPairForm) -> f64 {
    form.g_norm() * form.g_prime_norm()
}
