//! Monte Carlo supremum of the pair form over tuples of projections.

use rayon::prelude::*;

use super::{assert_monotone, best_of, relative_gain, EstimateResult, RestartOutcome, SolverConfig};
use crate::ensembles::projection_with;
use crate::error::{dimension, domain, Result};
use crate::linalg::{to_row_major, top_eigenprojector};
use crate::tensor::{GaussianPairForm, ModeMatrices, MultilinearForm};
use crate::{CMatrix, Field, RandomSeed, C64};

/// Lower estimate of `sup (Π r_m)^{-1/2} |Z(P_1,…,P_d)|` over orthogonal
/// projections with `rank P_m = ranks[m]`.
///
/// Draws `samples` random tuples, then refines the best `config.restarts`
/// of them. A refinement step on mode `m` uses `Z = Σ G[a,b] P[a,b] =
/// tr(G^T P)`: with `θ = arg Z`, the rank-`r` projection onto the top
/// eigenspace of `Herm(e^{-iθ} G^T)` maximizes `Re(e^{-iθ} Z)`, so `|Z|`
/// cannot decrease. Over the real field the projections stay real.
pub fn projection_supremum_mc(
    form: &GaussianPairForm,
    ranks: &[usize],
    samples: usize,
    config: &SolverConfig,
    seed: RandomSeed,
) -> Result<EstimateResult> {
    config.validate()?;
    let n = form.local_dim();
    let d = form.order();
    if ranks.len() != d {
        return Err(dimension(format!("need {d} ranks, got {}", ranks.len())));
    }
    if let Some(&r) = ranks.iter().find(|&&r| r == 0 || r > n) {
        return Err(domain(format!("projection rank {r} must lie in 1..={n}")));
    }
    if samples == 0 {
        return Err(domain("samples must be positive"));
    }
    let field = form.field();
    let scale = 1.0 / (ranks.iter().product::<usize>() as f64).sqrt();

    let drawn = (0..samples)
        .into_par_iter()
        .map(|s| -> Result<(f64, ModeMatrices)> {
            let mut rng = seed.derive(s as u64).rng();
            let mats = ModeMatrices::new(ranks.iter().map(|&r| projection_with(&mut rng, n, r, field)).collect())?;
            Ok((scale * form.evaluate_form(&mats)?.norm(), mats))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..samples).collect();
    order.sort_by(|&a, &b| drawn[b].0.total_cmp(&drawn[a].0).then(a.cmp(&b)));
    order.truncate(config.restarts);

    let outcomes = order
        .par_iter()
        .map(|&s| -> Result<RestartOutcome> {
            let (initial, start) = &drawn[s];
            let mut mats = start.clone();
            let mut z = form.evaluate_form(&mats)?;
            let mut value = *initial;
            let mut iterations = 0;
            let mut converged = false;
            while iterations < config.max_iterations {
                iterations += 1;
                for (m, &r) in ranks.iter().enumerate() {
                    if r == n {
                        continue;
                    }
                    let g = form.mode_gradient(&mats, m)?;
                    let rot = if z.norm() > 0.0 { z.conj() / z.norm() } else { C64::new(1.0, 0.0) };
                    let mut p = top_eigenprojector(&(g.transpose() * rot), r);
                    if field == Field::Real {
                        p = p.map(|w| C64::new(w.re, 0.0));
                    }
                    mats = mats.with_mode(m, p)?;
                    z = form.evaluate_form(&mats)?;
                }
                let next = scale * z.norm();
                assert_monotone(next, value, "projection_supremum_mc");
                let gain = relative_gain(next, value);
                value = next;
                if gain < config.relative_tolerance {
                    converged = true;
                    break;
                }
            }
            Ok(RestartOutcome {
                value,
                initial: *initial,
                witness: mats.matrices().iter().map(to_row_major).collect(),
                iterations,
                converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut result, _) = best_of(outcomes, seed);
    let mats = ModeMatrices::new(
        result
            .witness
            .iter()
            .map(|v| CMatrix::from_row_slice(n, n, v))
            .collect(),
    )?;
    result.value = scale * form.evaluate_form(&mats)?.norm();
    result.initial_value = drawn[order[0]].0;
    Ok(result)
}
