//! Acceptance criteria, run sequentially so that each runtime budget is
//! measured on an otherwise idle machine. Prints one line per criterion and
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use bellnorm_core::experiments::{
    run_bell_violation_study, run_bilinear_bound_study, run_chevet_check, run_geman_study, run_growth_study,
    run_moment_check, run_study, BellParams, BilinearParams, ChevetParams, GemanParams, GrowthParams, MomentParams,
    StudyOutput, StudyParams, EXPERIMENTS,
};
use bellnorm_core::ensembles::sample_gaussian_matrix;
use bellnorm_core::linalg::to_row_major;
use bellnorm_core::norms::{
    injective_norm_lower, min_norm_lower_rankone, sign_sup_exhaustive, spectral_norm_svd, unimodular_sup,
};
use bellnorm_core::tensor::DEFAULT_MATERIALIZATION_CAP;
use bellnorm_core::{weyl_basis, DenseTensor, EnsembleKind, Field, GaussianPairForm, RandomSeed, SolverConfig, C64};
use rand::Rng;

const SEED: RandomSeed = RandomSeed(20240601);

// 1: injective estimator vs SVD at d = 2
const ORACLE_RELATIVE: f64 = 1e-8;
const ORACLE_MATRICES: usize = 20;
const ORACLE_RESTARTS: usize = 5;
const ORACLE_BUDGET: Duration = Duration::from_secs(5);

// 2: phase ascent vs exhaustive signs
const BRUTE_TENSORS: usize = 10;
const BRUTE_RESTARTS: usize = 64;
const BRUTE_BUDGET: Duration = Duration::from_secs(120);

// 3: Geman limit
const GEMAN_LOW: f64 = 1.80;
const GEMAN_HIGH: f64 = 2.05;
const GEMAN_BUDGET: Duration = Duration::from_secs(120);

// 4: bilinear 4-bound
const BILINEAR_MAX: f64 = 4.5;
const BILINEAR_BAND: (f64, f64) = (0.9, 1.1);
const BILINEAR_BUDGET: Duration = Duration::from_secs(600);

// 5: moment inequality
const MOMENT_BUDGET: Duration = Duration::from_secs(300);

// 6: rank-one concentration
const RANK_ONE_TRIALS: u64 = 200;
const RANK_ONE_FRACTION: f64 = 0.99;
const RANK_ONE_BUDGET: Duration = Duration::from_secs(30);

// 7: Parseval and reconstruction
const PARSEVAL_RELATIVE: f64 = 1e-10;
const RECONSTRUCTION_MAX: f64 = 1e-10;
const PARSEVAL_BUDGET: Duration = Duration::from_secs(10);

// 8: growth law
const GROWTH_BAND: f64 = 4.0;
const GROWTH_BUDGET: Duration = Duration::from_secs(1200);

// 10: Chevet
const CHEVET_BOUND: f64 = 10.392304845413264; // 6√3
const CHEVET_SVD_RELATIVE: f64 = 1e-6;
const CHEVET_BUDGET: Duration = Duration::from_secs(120);

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Outcome {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

fn failed_checks(out: &StudyOutput) -> String {
    let failed: Vec<String> = out.failed_checks().map(|c| c.describe()).collect();
    if failed.is_empty() {
        "all study checks pass".into()
    } else {
        failed.join("; ")
    }
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn matrix_tensor(m: &bellnorm_core::CMatrix) -> DenseTensor {
    DenseTensor::new(vec![m.nrows(), m.ncols()], to_row_major(m)).unwrap()
}

fn oracle_equivalence() -> Outcome {
    let config = SolverConfig {
        restarts: ORACLE_RESTARTS,
        max_iterations: 20_000,
        relative_tolerance: 1e-15,
    };
    let mut worst: f64 = 0.0;
    for (k, kind) in [EnsembleKind::GaussianReal, EnsembleKind::GaussianComplex].into_iter().enumerate() {
        for i in 0..ORACLE_MATRICES as u64 {
            let seed = SEED.derive(k as u64).derive(i);
            let m = sample_gaussian_matrix(8, kind, seed).unwrap();
            let est = injective_norm_lower(&matrix_tensor(&m), &config, seed.derive(1)).unwrap();
            worst = worst.max(relative_gap(est.value, spectral_norm_svd(&m)));
        }
    }
    Outcome::new(
        worst <= ORACLE_RELATIVE,
        format!("worst relative gap {worst:.3e} over {} matrices (≤ {ORACLE_RELATIVE:e})", 2 * ORACLE_MATRICES),
    )
}

fn brute_force_equivalence() -> Outcome {
    let config = SolverConfig {
        restarts: BRUTE_RESTARTS,
        ..SolverConfig::default()
    };
    let mut mismatches = Vec::new();
    for i in 0..BRUTE_TENSORS as u64 {
        let mut rng = SEED.derive(2).derive(i).rng();
        let data: Vec<f64> = (0..27).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let t = DenseTensor::from_real(vec![3, 3, 3], &data).unwrap();
        let exact = sign_sup_exhaustive(&t).unwrap().value;
        let ascent = unimodular_sup(&t, Field::Real, &config, SEED.derive(3).derive(i)).unwrap().value;
        if ascent != exact {
            mismatches.push(format!("tensor {i}: ascent {ascent} vs exhaustive {exact}"));
        }
    }
    Outcome::new(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{BRUTE_TENSORS} tensors agree exactly")
        } else {
            mismatches.join("; ")
        },
    )
}

fn geman_limit() -> Outcome {
    let p = GemanParams::default();
    assert_eq!((p.n_list.as_slice(), p.trials), (&[100, 400][..], 50));
    let out = run_geman_study(&p, SEED).unwrap();
    let m100 = out.group(100.0).unwrap().stats["norm"].mean;
    let e100 = out.group(100.0).unwrap().derived["epsilon"];
    let e400 = out.group(400.0).unwrap().derived["epsilon"];
    let in_band = (GEMAN_LOW..=GEMAN_HIGH).contains(&m100);
    let shrinks = e400.abs() < e100.abs();
    Outcome::new(
        in_band && shrinks && out.passed(),
        format!(
            "mean ‖Y‖ at N=100 {m100:.4} in [{GEMAN_LOW}, {GEMAN_HIGH}]; |ε(400)| = {:.4} < |ε(100)| = {:.4}; {}",
            e400.abs(),
            e100.abs(),
            failed_checks(&out)
        ),
    )
}

fn bilinear_bound() -> Outcome {
    let p = BilinearParams::default();
    assert_eq!((p.n, p.big_n, p.trials, p.alpha_count), (4, 256, 20, 50));
    assert_eq!(p.bound(), BILINEAR_MAX);
    let out = run_bilinear_bound_study(&p, SEED).unwrap();
    let mut max_stat: f64 = 0.0;
    let mut band_ok = true;
    let mut norm_range = (f64::INFINITY, f64::NEG_INFINITY);
    for t in &out.trials {
        max_stat = max_stat.max(t.outputs["max_statistic"]);
        let v = t.outputs["normalization"];
        norm_range = (norm_range.0.min(v), norm_range.1.max(v));
        band_ok &= (BILINEAR_BAND.0..=BILINEAR_BAND.1).contains(&v);
    }
    Outcome::new(
        max_stat <= BILINEAR_MAX && band_ok && out.passed(),
        format!(
            "max ‖Σα Y′⊗Y″‖ {max_stat:.4} ≤ {BILINEAR_MAX}; normalization in [{:.4}, {:.4}] ⊂ [{}, {}]; {}",
            norm_range.0,
            norm_range.1,
            BILINEAR_BAND.0,
            BILINEAR_BAND.1,
            failed_checks(&out)
        ),
    )
}

fn moment_inequality() -> Outcome {
    let p = MomentParams::default();
    assert_eq!((p.big_n, p.n, p.p_list.as_slice(), p.trials), (6, 3, &[2, 4, 6][..], 5000));
    let out = run_moment_check(&p, SEED).unwrap();
    let count = |prefix: &str| out.summary.checks.iter().filter(|c| c.name.starts_with(prefix)).count();
    let shape_ok = count("moment_inequality_l") == 9 && count("unitary_invariance_l") == 9;
    Outcome::new(
        shape_ok && out.passed(),
        format!(
            "{} moment and {} invariance checks over 3 λ; {}",
            count("moment_inequality_l"),
            count("unitary_invariance_l"),
            failed_checks(&out)
        ),
    )
}

fn rank_one_concentration() -> Outcome {
    let n = 8usize;
    let floor = (n as f64).powi(3) / 2.0;
    let hits = (0..RANK_ONE_TRIALS)
        .filter(|&i| {
            let f = GaussianPairForm::sample(n, 3, EnsembleKind::GaussianReal, SEED.derive(6).derive(i)).unwrap();
            let value = min_norm_lower_rankone(&f);
            assert!(relative_gap(value, f.g_norm() * f.g_prime_norm()) < 1e-12);
            value >= floor
        })
        .count();
    let fraction = hits as f64 / RANK_ONE_TRIALS as f64;
    Outcome::new(
        fraction >= RANK_ONE_FRACTION,
        format!("‖g‖‖g′‖ ≥ N³/2 = {floor} in {hits}/{RANK_ONE_TRIALS} trials (need ≥ {RANK_ONE_FRACTION})"),
    )
}

fn parseval_reconstruction() -> Outcome {
    let n = 2usize;
    let nn = n * n;
    let mut worst_parseval: f64 = 0.0;
    let mut worst_entry: f64 = 0.0;
    let basis = weyl_basis(n).unwrap();
    let bases = vec![basis.clone(); 3];
    let u: Vec<Vec<C64>> = basis.elements().iter().map(to_row_major).collect();
    for (k, kind) in [EnsembleKind::GaussianReal, EnsembleKind::GaussianComplex].into_iter().enumerate() {
        for i in 0..5 {
            let f = GaussianPairForm::sample(n, 3, kind, SEED.derive(7).derive(2 * i + k as u64)).unwrap();
            let t = f.epr_coefficients(&bases, DEFAULT_MATERIALIZATION_CAP).unwrap();
            let lhs = (n as f64).powi(3) * t.data().iter().map(|z| z.norm_sqr()).sum::<f64>();
            let rhs = (f.g_norm() * f.g_prime_norm()).powi(2);
            worst_parseval = worst_parseval.max(relative_gap(lhs, rhs));

            // t[(i1 i1'), (i2 i2'), (i3 i3')] = g(i1 i2 i3) g'(i1' i2' i3'), row-major
            for k1 in 0..nn {
                for k2 in 0..nn {
                    for k3 in 0..nn {
                        let (i, ip) = ([k1 / n, k2 / n, k3 / n], [k1 % n, k2 % n, k3 % n]);
                        let flat = |v: [usize; 3]| (v[0] * n + v[1]) * n + v[2];
                        let direct = f.g()[flat(i)] * f.g_prime()[flat(ip)];
                        let mut rec = C64::new(0.0, 0.0);
                        for a in 0..nn {
                            for b in 0..nn {
                                for c in 0..nn {
                                    rec += t.get(&[a, b, c]) * u[a][k1] * u[b][k2] * u[c][k3];
                                }
                            }
                        }
                        worst_entry = worst_entry.max((rec - direct).norm());
                    }
                }
            }
        }
    }
    Outcome::new(
        worst_parseval <= PARSEVAL_RELATIVE && worst_entry <= RECONSTRUCTION_MAX,
        format!("Parseval relative gap {worst_parseval:.2e}, max reconstruction error {worst_entry:.2e}"),
    )
}

fn growth_law() -> Outcome {
    let p = GrowthParams::default();
    assert_eq!((p.n_list.as_slice(), p.d, p.trials, p.band_factor), (&[4, 8, 16][..], 3, 20, GROWTH_BAND));
    let out = run_growth_study(&p, SEED).unwrap();
    let trend = out.check("log_normalized_non_increasing").unwrap();
    let band = out.check("value_over_n_band").unwrap();
    Outcome::new(out.passed(), format!("{}; {}; {}", trend.describe(), band.describe(), failed_checks(&out)))
}

fn bell_trend() -> Outcome {
    let p = BellParams::default();
    assert_eq!((p.n_list.as_slice(), p.d, p.trials), (&[2, 4, 8][..], 3, 20));
    let out = run_bell_violation_study(&p, SEED).unwrap();
    let certified = &out.group(2.0).unwrap().stats["certified_ratio"];
    let medians: Vec<String> =
        out.summary.groups.iter().map(|g| format!("N={}: {:.4}", g.x, g.stats["ratio"].median)).collect();
    let reference = out.check("ratios_below_reference_curve").unwrap();
    Outcome::new(
        out.passed(),
        format!(
            "median ratios [{}]; certified N=2 median {:.4} (baseline); {}; {}",
            medians.join(", "),
            certified.median,
            reference.describe(),
            failed_checks(&out)
        ),
    )
}

fn chevet_bound() -> Outcome {
    let p = ChevetParams::default();
    assert_eq!((p.dims.as_slice(), p.trials), (&[4, 4, 4][..], 50));
    let out = run_chevet_check(&p, SEED).unwrap();
    let max = out.trials.iter().map(|t| t.outputs["value"]).fold(0.0, f64::max);
    let d2 = ChevetParams {
        dims: vec![4, 4],
        svd_tolerance: CHEVET_SVD_RELATIVE,
        ..p
    };
    let out2 = run_chevet_check(&d2, SEED.derive(1)).unwrap();
    let svd = out2.check("svd_cross_check").unwrap();
    Outcome::new(
        max <= CHEVET_BOUND && out.passed() && svd.passed && out2.passed(),
        format!("max estimate {max:.4} ≤ 6√3 = {CHEVET_BOUND:.4}; d=2: {}", svd.describe()),
    )
}

fn small_config(name: &str) -> serde_json::Value {
    use serde_json::json;
    let solver = json!({"restarts": 2, "max_iterations": 50});
    match name {
        "run_growth_study" => json!({"N_list": [2, 3], "trials": 3, "solver": solver}),
        "run_bell_violation_study" => json!({"N_list": [1, 2], "trials": 3, "solver": solver}),
        "run_geman_study" => json!({"N_list": [8, 16], "trials": 4, "bands": []}),
        "run_bilinear_bound_study" => json!({"n": 2, "N": 8, "trials": 3, "alpha_count": 3}),
        "run_moment_check" => json!({"N": 3, "n": 2, "p_list": [2, 4], "trials": 40}),
        "run_latala_check" => json!({"N_list": [2, 3], "ranks": [1, 1, 1], "trials": 40}),
        "run_chevet_check" => json!({"dims": [3, 3, 3], "trials": 4, "solver": solver}),
        "run_jmap_study" => json!({"N_list": [2, 3], "trials": 3, "solver": solver}),
        "symmetrization_check" => json!({"N": 3, "M": 2, "trials": 40}),
        other => panic!("unlisted study {other}"),
    }
}

fn determinism() -> Outcome {
    let mut differing = Vec::new();
    for (name, _) in EXPERIMENTS {
        let mut config = small_config(name);
        config["experiment"] = name.into();
        let params: StudyParams = serde_json::from_value(config).unwrap();
        let one = run_study(&params, SEED, 1).unwrap().to_jsonl();
        let eight = run_study(&params, SEED, 8).unwrap().to_jsonl();
        let again = run_study(&params, SEED, 1).unwrap().to_jsonl();
        if one != eight || one != again {
            differing.push(name);
        }
    }
    Outcome::new(
        differing.is_empty(),
        if differing.is_empty() {
            format!("all {} studies byte-identical at parallelism 1, 8 and on re-run", EXPERIMENTS.len())
        } else {
            format!("record streams differ for {differing:?}")
        },
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);
    let criteria: [Criterion; 11] = [
        ("oracle equivalence (d=2)", oracle_equivalence, Some(ORACLE_BUDGET)),
        ("brute-force unimodular sup", brute_force_equivalence, Some(BRUTE_BUDGET)),
        ("Geman limit", geman_limit, Some(GEMAN_BUDGET)),
        ("bilinear 4-bound", bilinear_bound, Some(BILINEAR_BUDGET)),
        ("moment inequality", moment_inequality, Some(MOMENT_BUDGET)),
        ("rank-one min-norm concentration", rank_one_concentration, Some(RANK_ONE_BUDGET)),
        ("Parseval and reconstruction", parseval_reconstruction, Some(PARSEVAL_BUDGET)),
        ("growth law", growth_law, Some(GROWTH_BUDGET)),
        ("Bell-violation trend", bell_trend, None),
        ("Chevet bound", chevet_bound, Some(CHEVET_BUDGET)),
        ("determinism", determinism, None),
    ];
    // `cargo test -- <filter>` runs the matching criteria only
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let label = format!("criterion {:>2}: {name}", k + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let passed = outcome.passed && in_time;
        failures += usize::from(!passed);
        let timing = match budget {
            Some(b) => format!("{:.1}s of {}s budget", elapsed.as_secs_f64(), b.as_secs()),
            None => format!("{:.1}s", elapsed.as_secs_f64()),
        };
        println!(
            "{} {label} [{timing}] {}",
            if passed { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} acceptance criterion/criteria failed");
        ExitCode::FAILURE
    }
}
