//! Alternating (block-coordinate) ascent over one mode at a time.

use rayon::prelude::*;

use super::{assert_monotone, best_of, relative_gain, EstimateResult, RestartOutcome, SolverConfig};
use crate::ensembles::random_unit_vector;
use crate::error::{domain, Error, Result};
use crate::linalg::vec_norm;
use crate::tensor::{DenseTensor, MultilinearForm};
use crate::{Field, RandomSeed, C64};

/// Coefficients below this modulus keep the previous phase or sign.
pub const PHASE_FLOOR: f64 = 1e-14;

/// Most sign bits [`sign_sup_exhaustive`] will enumerate.
pub const MAX_ENUMERATION_BITS: u32 = 30;

fn check_order<F: MultilinearForm + ?Sized>(target: &F) -> Result<()> {
    if target.order() < 2 {
        return Err(domain(format!("order must be at least 2, got {}", target.order())));
    }
    Ok(())
}

/// Lower bound on `sup |Z(x_1,…,x_d)|` over unit vectors.
///
/// Each sweep replaces every `x_m` in turn by `conj(c)/‖c‖`, where `c` is
/// the mode gradient; that is the exact maximizer with the other modes
/// fixed, so the objective never decreases. A zero gradient keeps the
/// iterate and marks the restart as not converged.
pub fn injective_norm_lower<F: MultilinearForm + ?Sized>(
    target: &F,
    config: &SolverConfig,
    seed: RandomSeed,
) -> Result<EstimateResult> {
    check_order(target)?;
    config.validate()?;
    let dims = target.mode_dims();
    let field = target.field();
    let outcomes = (0..config.restarts)
        .into_par_iter()
        .map(|r| -> Result<RestartOutcome> {
            let mut rng = seed.derive(r as u64).rng();
            let mut x: Vec<Vec<C64>> = dims.iter().map(|&n| random_unit_vector(&mut rng, n, field)).collect();
            let initial = target.evaluate_vectors(&x)?.norm();
            let mut value = initial;
            let mut iterations = 0;
            let mut converged = false;
            let mut degenerate = false;
            while iterations < config.max_iterations {
                iterations += 1;
                for m in 0..dims.len() {
                    let c = target.mode_gradient_vector(&x, m)?;
                    let norm = vec_norm(&c);
                    if norm == 0.0 {
                        degenerate = true;
                        continue;
                    }
                    x[m] = c.iter().map(|z| z.conj() / norm).collect();
                }
                let next = target.evaluate_vectors(&x)?.norm();
                assert_monotone(next, value, "injective_norm_lower");
                let gain = relative_gain(next, value);
                value = next;
                if gain < config.relative_tolerance {
                    converged = !degenerate;
                    break;
                }
            }
            Ok(RestartOutcome {
                value,
                initial,
                witness: x,
                iterations,
                converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut result, _) = best_of(outcomes, seed);
    result.value = target.evaluate_vectors(&result.witness)?.norm();
    Ok(result)
}

fn random_units<R: rand::Rng + ?Sized>(rng: &mut R, n: usize, field: Field) -> Vec<C64> {
    (0..n)
        .map(|_| match field {
            Field::Real => C64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0),
            Field::Complex => C64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU),
        })
        .collect()
}

/// Lower bound on `sup |Σ t(i) Π x_m(i_m)|` over unimodular scalars
/// (`field = Complex`) or signs (`field = Real`).
///
/// With the other modes fixed the objective is `S = Σ c_i x_i`. Complex:
/// `x_i = conj(c_i)/|c_i|` gives `Σ |c_i| ≥ |S|`. Real: with `θ = arg S`,
/// `x_i = sign Re(e^{-iθ} c_i)` gives `Re(e^{-iθ} S') = Σ |Re(e^{-iθ} c_i)|
/// ≥ |S|`. Coefficients under [`PHASE_FLOOR`] keep their previous value.
pub fn unimodular_sup(t: &DenseTensor, field: Field, config: &SolverConfig, seed: RandomSeed) -> Result<EstimateResult> {
    check_order(t)?;
    config.validate()?;
    let dims = t.dims().to_vec();
    let outcomes = (0..config.restarts)
        .into_par_iter()
        .map(|r| -> Result<RestartOutcome> {
            let mut rng = seed.derive(r as u64).rng();
            let mut x: Vec<Vec<C64>> = dims.iter().map(|&n| random_units(&mut rng, n, field)).collect();
            let initial = t.evaluate_vectors(&x)?.norm();
            let mut value = initial;
            let mut iterations = 0;
            let mut converged = false;
            while iterations < config.max_iterations {
                iterations += 1;
                for m in 0..dims.len() {
                    let c = t.mode_gradient_vector(&x, m)?;
                    match field {
                        Field::Complex => {
                            for (xi, ci) in x[m].iter_mut().zip(&c) {
                                let a = ci.norm();
                                if a >= PHASE_FLOOR {
                                    *xi = ci.conj() / a;
                                }
                            }
                        }
                        Field::Real => {
                            let s: C64 = c.iter().zip(&x[m]).map(|(a, b)| a * b).sum();
                            let rot = if s.norm() > 0.0 { s.conj() / s.norm() } else { C64::new(1.0, 0.0) };
                            for (xi, ci) in x[m].iter_mut().zip(&c) {
                                let re = (rot * ci).re;
                                if re.abs() >= PHASE_FLOOR {
                                    *xi = C64::new(re.signum(), 0.0);
                                }
                            }
                        }
                    }
                }
                let next = t.evaluate_vectors(&x)?.norm();
                assert_monotone(next, value, "unimodular_sup");
                let gain = relative_gain(next, value);
                value = next;
                if gain < config.relative_tolerance {
                    converged = true;
                    break;
                }
            }
            Ok(RestartOutcome {
                value,
                initial,
                witness: x,
                iterations,
                converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut result, _) = best_of(outcomes, seed);
    result.value = t.evaluate_vectors(&result.witness)?.norm();
    let envelope = (t.len() as f64).sqrt() * t.frobenius_norm();
    assert!(
        result.value <= envelope * (1.0 + 1e-12),
        "unimodular_sup: {} exceeds the Cauchy-Schwarz envelope {envelope}",
        result.value
    );
    Ok(result)
}

/// Exact maximum of `|Σ t(i) Π x_m(i_m)|` over sign vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SignEnumeration {
    pub value: f64,
    pub witness: Vec<Vec<f64>>,
    /// Number of sign patterns visited.
    pub patterns: u64,
}

/// Free sign bits [`sign_sup_exhaustive`] enumerates for `dims`, or `None`
/// above [`MAX_ENUMERATION_BITS`].
pub fn sign_enumeration_bits(dims: &[usize]) -> Option<u32> {
    let free = dims[..dims.len().saturating_sub(1)].iter().sum::<usize>().saturating_sub(1);
    u32::try_from(free).ok().filter(|&b| b <= MAX_ENUMERATION_BITS)
}

/// Exhaustive maximum over sign vectors of a real tensor.
///
/// The last mode is eliminated in closed form (`max Σ c_i x_i = Σ |c_i|`)
/// and the first sign is fixed to `+1`, since flipping a whole mode only
/// flips the sign of the objective. The remaining patterns are enumerated.
pub fn sign_sup_exhaustive(t: &DenseTensor) -> Result<SignEnumeration> {
    check_order(t)?;
    if t.field() != Field::Real {
        return Err(domain("sign enumeration needs a real tensor"));
    }
    let dims = t.dims();
    let d = dims.len();
    let free = sign_enumeration_bits(dims).ok_or_else(|| Error::Resource {
        what: "sign enumeration bits",
        requested: dims[..d - 1].iter().sum::<usize>() as u128 - 1,
        cap: MAX_ENUMERATION_BITS as u128,
    })?;
    let patterns = 1u64 << free;
    let signs_for = |mask: u64| -> Vec<Vec<C64>> {
        let mut bit = 0;
        let mut x = Vec::with_capacity(d);
        for (m, &n) in dims.iter().enumerate() {
            let v = (0..n)
                .map(|i| {
                    if m == d - 1 {
                        return C64::new(1.0, 0.0);
                    }
                    if m == 0 && i == 0 {
                        return C64::new(1.0, 0.0);
                    }
                    let s = if (mask >> bit) & 1 == 1 { -1.0 } else { 1.0 };
                    bit += 1;
                    C64::new(s, 0.0)
                })
                .collect();
            x.push(v);
        }
        x
    };
    let best = (0..patterns)
        .into_par_iter()
        .map(|mask| -> Result<(f64, u64)> {
            let c = t.mode_gradient_vector(&signs_for(mask), d - 1)?;
            Ok((c.iter().map(|z| z.re.abs()).sum(), mask))
        })
        .try_reduce(
            || (f64::NEG_INFINITY, u64::MAX),
            |a, b| Ok(if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a }),
        )?;
    let mut x = signs_for(best.1);
    let c = t.mode_gradient_vector(&x, d - 1)?;
    x[d - 1] = c.iter().map(|z| C64::new(if z.re < 0.0 { -1.0 } else { 1.0 }, 0.0)).collect();
    let value = t.evaluate_vectors(&x)?.norm();
    Ok(SignEnumeration {
        value,
        witness: x.iter().map(|v| v.iter().map(|z| z.re).collect()).collect(),
        patterns,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_gaussian_matrix, EnsembleKind};
    use crate::norms::spectral_norm_svd;
    use crate::CMatrix;

    fn tight() -> SolverConfig {
        SolverConfig {
            restarts: 5,
            max_iterations: 20_000,
            relative_tolerance: 1e-15,
        }
    }

    fn matrix_tensor(m: &CMatrix) -> DenseTensor {
        let data = crate::linalg::to_row_major(m);
        DenseTensor::new(vec![m.nrows(), m.ncols()], data).unwrap()
    }

    #[test]
    fn rank_one_tensor_has_norm_one() {
        let mut rng = RandomSeed(3).rng();
        let vs: Vec<Vec<C64>> = [3, 4, 2].iter().map(|&n| random_unit_vector(&mut rng, n, Field::Complex)).collect();
        let t = DenseTensor::outer(&vs).unwrap();
        let r = injective_norm_lower(&t, &SolverConfig::default(), RandomSeed(1)).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(r.iterations_per_restart.iter().all(|&i| i <= 2));
    }

    #[test]
    fn order_two_matches_svd() {
        for seed in 0..6 {
            let kind = if seed % 2 == 0 { EnsembleKind::GaussianReal } else { EnsembleKind::GaussianComplex };
            let m = sample_gaussian_matrix(8, kind, RandomSeed(seed)).unwrap();
            let r = injective_norm_lower(&matrix_tensor(&m), &tight(), RandomSeed(100 + seed)).unwrap();
            let s = spectral_norm_svd(&m);
            assert!((r.value - s).abs() <= 1e-8 * s, "{} vs {s}", r.value);
        }
    }

    #[test]
    fn diagonal_order_three() {
        let mut data = vec![0.0; 8];
        data[0] = 3.0;
        data[7] = 1.0;
        let t = DenseTensor::from_real(vec![2, 2, 2], &data).unwrap();
        let r = injective_norm_lower(&t, &SolverConfig::default(), RandomSeed(5)).unwrap();
        assert!((r.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn zero_tensor_gives_zero() {
        let t = DenseTensor::from_real(vec![2, 3], &[0.0; 6]).unwrap();
        let r = injective_norm_lower(&t, &SolverConfig::default(), RandomSeed(5)).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.converged.iter().all(|c| !c));
        assert!(r.witness.iter().all(|v| (vec_norm(v) - 1.0).abs() < 1e-12));
    }

    #[test]
    fn unimodular_examples() {
        let n = 3;
        let t = DenseTensor::from_real(vec![n, n, n], &vec![1.0; 27]).unwrap();
        let r = unimodular_sup(&t, Field::Complex, &SolverConfig::default(), RandomSeed(2)).unwrap();
        assert!((r.value - 27.0).abs() < 1e-12);

        let mut data = vec![C64::new(0.0, 0.0); 12];
        data[7] = C64::new(-1.5, 2.0);
        let t = DenseTensor::new(vec![2, 3, 2], data).unwrap();
        for field in [Field::Real, Field::Complex] {
            let r = unimodular_sup(&t, field, &SolverConfig::default(), RandomSeed(2)).unwrap();
            assert!((r.value - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn exhaustive_rejects_complex_and_huge() {
        let t = DenseTensor::new(vec![2, 2], vec![C64::new(0.0, 1.0); 4]).unwrap();
        assert!(sign_sup_exhaustive(&t).is_err());
        let t = DenseTensor::from_real(vec![20, 20, 1], &vec![1.0; 400]).unwrap();
        assert!(matches!(sign_sup_exhaustive(&t), Err(Error::Resource { .. })));
    }
}
