//! Random-matrix studies: the spectral-norm limit, the Kronecker-sum bound
//! and the trace-moment inequality behind it.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{invalid, require_gaussian, require_list, require_positive, Check, Outputs, Study, StudyOutput, StudyParams, SHARED_STREAM};
use crate::ensembles::{random_unit_vector, sample_ensemble_matrix, sample_gaussian_matrix};
use crate::error::Result;
use crate::kron::{KroneckerFactors, KroneckerSum, LanczosConfig, SingularTriple, DENSE_MAX_DIM};
use crate::linalg::{hs_norm, kron, singular_values};
use crate::norms::spectral_norm;
use crate::{CMatrix, EnsembleKind, RandomSeed, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GemanBand {
    #[serde(rename = "N")]
    pub n: usize,
    pub low: f64,
    pub high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GemanParams {
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub ensemble: EnsembleKind,
    /// Required range of the mean spectral norm at selected `N`.
    pub bands: Vec<GemanBand>,
}

impl Default for GemanParams {
    fn default() -> Self {
        GemanParams {
            n_list: vec![100, 400],
            trials: 50,
            ensemble: EnsembleKind::GaussianComplex,
            bands: vec![
                GemanBand {
                    n: 100,
                    low: 1.80,
                    high: 2.05,
                },
                GemanBand {
                    n: 400,
                    low: 1.90,
                    high: 2.03,
                },
            ],
        }
    }
}

impl GemanParams {
    pub fn validate(&self) -> Result<()> {
        require_list("N_list", &self.n_list, 1)?;
        require_positive("trials", self.trials)?;
        require_gaussian("ensemble", self.ensemble)?;
        if let Some(b) = self.bands.iter().find(|b| !(b.low <= b.high)) {
            return Err(invalid("bands", format!("band at N={} has low > high", b.n)));
        }
        Ok(())
    }
}

/// Mean spectral norm of `N x N` Gaussian matrices with `E|entry|² = 1/N`,
/// and the deficit `ε(N) = mean − 2`.
///
/// The trend check asks `|ε(N)|` to shrink along `N_list` sorted
/// increasingly: the finite-`N` mean sits below 2, so `ε` itself rises
/// toward 0.
pub fn run_geman_study(p: &GemanParams, seed: RandomSeed) -> Result<StudyOutput> {
    p.validate()?;
    let mut study = Study::new(StudyParams::Geman(p.clone()), seed, Some("norm"));
    let mut eps = Vec::new();
    for &n in &p.n_list {
        let g = study.run_group(n as f64, p.trials, |ts| {
            let y = sample_gaussian_matrix(n, p.ensemble, ts)?;
            Ok(Outputs::from([("norm".to_string(), spectral_norm(&y))]))
        })?;
        let mean = study.stat(g, "norm").mean;
        study.derive_value(g, "epsilon", mean - 2.0);
        eps.push((n, mean - 2.0));
        for b in p.bands.iter().filter(|b| b.n == n) {
            let inside = mean >= b.low && mean <= b.high;
            study.check(Check {
                name: format!("mean_band_N{n}"),
                passed: inside,
                observed: mean,
                threshold: if mean < b.low { b.low } else { b.high },
                detail: format!("mean spectral norm must lie in [{}, {}]", b.low, b.high),
            });
        }
    }
    if eps.len() > 1 {
        eps.sort_by_key(|e| e.0);
        let worst = eps
            .windows(2)
            .map(|w| w[1].1.abs() - w[0].1.abs())
            .fold(f64::NEG_INFINITY, f64::max);
        study.check(Check::at_most(
            "epsilon_shrinks",
            worst,
            0.0,
            format!("largest change of |ε(N)| between consecutive N, ε = {eps:?}"),
        ));
    }
    Ok(study.finish())
}

/// A coefficient matrix `α` with its singular values `λ`.
#[derive(Clone, Debug, PartialEq)]
pub struct BilinearCoefficients {
    pub n: usize,
    pub alpha: CMatrix,
    pub lambda: Vec<f64>,
}

impl BilinearCoefficients {
    pub fn new(alpha: CMatrix) -> Self {
        let lambda = singular_values(&alpha);
        BilinearCoefficients {
            n: alpha.nrows(),
            alpha,
            lambda,
        }
    }

    /// `diag(λ)`, equal in distribution as a coefficient matrix for
    /// Gaussian factors.
    pub fn diagonal(&self) -> CMatrix {
        CMatrix::from_fn(self.n, self.n, |i, j| {
            if i == j {
                C64::new(self.lambda.get(i).copied().unwrap_or(0.0), 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

/// How the coefficient matrices `α` are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    /// Uniform random unit vectors of `n²` entries.
    RandomUnit,
    /// Normalized points of the grid `{−1, 0, 1}^{n×n}`, sparsest first,
    /// one per sign class.
    Net,
    /// Random starts improved by ascent on the sampled factors.
    WorstFound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BilinearParams {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub trials: usize,
    pub alpha_mode: AlphaMode,
    /// Number of coefficient matrices (or ascent starts) per trial.
    pub alpha_count: usize,
    pub epsilon: f64,
    pub ensemble: EnsembleKind,
    /// The norm bound is `4 (1 + margin)` unless `threshold` is given.
    pub margin: f64,
    pub threshold: Option<f64>,
    /// Also evaluate `diag(λ)` for every `α` on the same factors.
    pub diagonal_reduction: bool,
    pub ascent_steps: usize,
    pub lanczos_tolerance: f64,
    pub lanczos_max_steps: usize,
}

impl Default for BilinearParams {
    fn default() -> Self {
        let lanczos = LanczosConfig::default();
        BilinearParams {
            n: 4,
            big_n: 256,
            trials: 20,
            alpha_mode: AlphaMode::RandomUnit,
            alpha_count: 50,
            epsilon: 0.1,
            ensemble: EnsembleKind::GaussianComplex,
            margin: 0.125,
            threshold: None,
            diagonal_reduction: false,
            ascent_steps: 10,
            lanczos_tolerance: lanczos.tolerance,
            lanczos_max_steps: lanczos.max_steps,
        }
    }
}

impl BilinearParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("n", self.n)?;
        require_positive("N", self.big_n)?;
        require_positive("trials", self.trials)?;
        require_positive("alpha_count", self.alpha_count)?;
        require_positive("ascent_steps", self.ascent_steps)?;
        require_positive("lanczos_max_steps", self.lanczos_max_steps)?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid("epsilon", "must lie in (0, 1)"));
        }
        if !(self.margin > -1.0 && self.margin.is_finite()) {
            return Err(invalid("margin", "must be a finite number above -1"));
        }
        if let Some(t) = self.threshold {
            if !(t > 0.0 && t.is_finite()) {
                return Err(invalid("threshold", "must be a positive number"));
            }
        }
        if !(self.lanczos_tolerance > 0.0) {
            return Err(invalid("lanczos_tolerance", "must be positive"));
        }
        if self.alpha_mode == AlphaMode::Net {
            let classes = (3f64.powi((self.n * self.n) as i32) - 1.0) / 2.0;
            if (self.alpha_count as f64) > classes {
                return Err(invalid("alpha_count", format!("the grid has only {classes} sign classes")));
            }
        }
        Ok(())
    }

    pub fn bound(&self) -> f64 {
        self.threshold.unwrap_or(4.0 * (1.0 + self.margin))
    }
}

/// The coefficient family shared by all trials.
fn alpha_family(p: &BilinearParams, seed: RandomSeed) -> Vec<BilinearCoefficients> {
    let n = p.n;
    match p.alpha_mode {
        AlphaMode::RandomUnit | AlphaMode::WorstFound => {
            let mut rng = seed.rng();
            (0..p.alpha_count)
                .map(|_| {
                    let v = random_unit_vector(&mut rng, n * n, p.ensemble.field());
                    BilinearCoefficients::new(CMatrix::from_row_slice(n, n, &v))
                })
                .collect()
        }
        AlphaMode::Net => grid_points(n * n, p.alpha_count)
            .into_iter()
            .map(|v| {
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                let entries: Vec<C64> = v.iter().map(|&x| C64::new(x / norm, 0.0)).collect();
                BilinearCoefficients::new(CMatrix::from_row_slice(n, n, &entries))
            })
            .collect(),
    }
}

/// The first `count` nonzero points of `{−1, 0, 1}^len` whose first nonzero
/// entry is `+1`, by support size, then support, then sign pattern.
fn grid_points(len: usize, count: usize) -> Vec<Vec<f64>> {
    fn supports(len: usize, size: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, cap: usize) {
        if out.len() >= cap {
            return;
        }
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for i in start..len {
            current.push(i);
            supports(len, size, i + 1, current, out, cap);
            current.pop();
        }
    }
    let mut points = Vec::new();
    for size in 1..=len {
        let mut sets = Vec::new();
        supports(len, size, 0, &mut Vec::new(), &mut sets, count);
        for set in sets {
            for signs in 0..1u64 << (size - 1) {
                if points.len() == count {
                    return points;
                }
                let mut v = vec![0.0; len];
                for (k, &i) in set.iter().enumerate() {
                    v[i] = if k > 0 && (signs >> (k - 1)) & 1 == 1 { -1.0 } else { 1.0 };
                }
                points.push(v);
            }
        }
    }
    points
}

/// Top singular triple of `Σ α_ij Y'_i ⊗ Y''_j` for one sample of factors.
enum Spectral<'a> {
    Dense(&'a [CMatrix], &'a [CMatrix]),
    Lanczos(Arc<KroneckerFactors>, LanczosConfig),
}

impl Spectral<'_> {
    fn top(&self, alpha: &CMatrix, seed: RandomSeed) -> Result<SingularTriple> {
        match self {
            Spectral::Dense(l, r) => KroneckerSum::new(alpha, l, r)?.spectral_dense(),
            Spectral::Lanczos(f, cfg) => Ok(f.operator(alpha)?.top_singular(cfg, seed)),
        }
    }
}

/// Coordinate ascent over unit `α`: with `(u, v)` the top singular pair of
/// `Z(α)`, `α' = conj(c)/‖c‖` for `c_ij = ⟨u, (Y'_i ⊗ Y''_j) v⟩` satisfies
/// `‖Z(α')‖ ≥ ‖c‖ ≥ |⟨u, Z(α) v⟩|`. Lanczos values are approximate, so the
/// best value seen is kept.
fn ascend(
    spectral: &Spectral,
    start: &CMatrix,
    left: &[CMatrix],
    right: &[CMatrix],
    steps: usize,
    seed: RandomSeed,
) -> Result<(f64, usize)> {
    let mut triple = spectral.top(start, seed.derive(0))?;
    let mut best = triple.value;
    let mut lanczos_steps = triple.steps;
    for s in 0..steps {
        let c = KroneckerSum::coupling(&triple.left, &triple.right, left, right);
        let norm = hs_norm(&c);
        if norm == 0.0 {
            break;
        }
        let alpha = c.map(|z| z.conj() / norm);
        triple = spectral.top(&alpha, seed.derive(s as u64 + 1))?;
        lanczos_steps += triple.steps;
        let gain = (triple.value - best) / best;
        best = best.max(triple.value);
        if gain < 1e-6 {
            break;
        }
    }
    Ok((best, lanczos_steps))
}

/// `‖Σ α_ij Y'_i ⊗ Y''_j‖` over a family of unit `α` on independent factor
/// samples, with the normalization `min{(nN)^{-1} Σ tr|Y'_i|², (nN)^{-1}
/// Σ tr|Y''_j|²}`.
///
/// Operators with `N² ≤ DENSE_MAX_DIM` go through a dense SVD; larger ones
/// through Lanczos on the factored operator. The bound is asserted only for
/// Gaussian factors, unless a threshold is set explicitly; for other
/// ensembles the largest value is recorded.
pub fn run_bilinear_bound_study(p: &BilinearParams, seed: RandomSeed) -> Result<StudyOutput> {
    p.validate()?;
    let (n, big_n) = (p.n, p.big_n);
    let family = alpha_family(p, seed.derive(SHARED_STREAM));
    let lanczos = LanczosConfig {
        tolerance: p.lanczos_tolerance,
        max_steps: p.lanczos_max_steps,
    };
    let mut study = Study::new(StudyParams::BilinearBound(p.clone()), seed, None);
    let g = study.run_group(big_n as f64, p.trials, |ts| {
        let sample = |i: usize| sample_ensemble_matrix(big_n, p.ensemble, ts.derive(i as u64));
        let left = (0..n).map(sample).collect::<Result<Vec<_>>>()?;
        let right = (n..2 * n).map(sample).collect::<Result<Vec<_>>>()?;
        let energy = |ys: &[CMatrix]| ys.iter().map(|y| hs_norm(y).powi(2)).sum::<f64>() / (n * big_n) as f64;
        let (norm_left, norm_right) = (energy(&left), energy(&right));
        let spectral = if big_n * big_n <= DENSE_MAX_DIM {
            Spectral::Dense(&left, &right)
        } else {
            Spectral::Lanczos(KroneckerFactors::new(&left, &right)?, lanczos.clone())
        };
        let mut values = Vec::with_capacity(family.len());
        let mut diagonal = Vec::new();
        let mut steps = 0;
        for (k, a) in family.iter().enumerate() {
            let s = ts.derive(1_000 + k as u64);
            let (value, used) = match p.alpha_mode {
                AlphaMode::WorstFound => ascend(&spectral, &a.alpha, &left, &right, p.ascent_steps, s)?,
                _ => {
                    let t = spectral.top(&a.alpha, s)?;
                    (t.value, t.steps)
                }
            };
            values.push(value);
            steps += used;
            if p.diagonal_reduction {
                diagonal.push(spectral.top(&a.diagonal(), s.derive(7))?.value);
            }
        }
        let count = values.len() as f64;
        let mut out = Outputs::new();
        out.insert("max_statistic".into(), values.iter().copied().fold(0.0, f64::max));
        out.insert("mean_statistic".into(), values.iter().sum::<f64>() / count);
        out.insert("first_alpha".into(), values[0]);
        out.insert("normalization_left".into(), norm_left);
        out.insert("normalization_right".into(), norm_right);
        out.insert("normalization".into(), norm_left.min(norm_right));
        out.insert("lanczos_steps".into(), steps as f64 / count);
        if p.diagonal_reduction {
            out.insert("mean_statistic_diagonal".into(), diagonal.iter().sum::<f64>() / count);
        }
        Ok(out)
    })?;

    let max = study.stat(g, "max_statistic").max;
    study.derive_value(g, "max_statistic", max);
    if p.ensemble.is_gaussian() || p.threshold.is_some() {
        study.check(Check::at_most(
            "norm_bound",
            max,
            p.bound(),
            format!("max over trials and α of ‖Σ α_ij Y'_i ⊗ Y''_j‖, {:?} factors", p.ensemble),
        ));
    }
    let norm = study.stat(g, "normalization").clone();
    study.check(Check::at_least(
        "normalization_lln",
        norm.min,
        1.0 - p.epsilon,
        "min over trials of the normalization statistic vs 1 − ε",
    ));
    if big_n >= 64 {
        let spread = (norm.max - 1.0).abs().max((norm.min - 1.0).abs());
        study.check(Check::at_most(
            "normalization_band",
            spread,
            0.1,
            "max over trials of |normalization − 1| (band [0.9, 1.1])",
        ));
    }
    if p.diagonal_reduction && p.ensemble.is_gaussian() {
        let a = study.stat(g, "mean_statistic").clone();
        let b = study.stat(g, "mean_statistic_diagonal").clone();
        study.check(Check::at_most(
            "diagonal_reduction_agreement",
            (a.mean - b.mean).abs(),
            2.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt(),
            "|mean for α − mean for diag(λ)| vs 2 combined standard errors",
        ));
    }
    Ok(study.finish())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentParams {
    #[serde(rename = "N")]
    pub big_n: usize,
    pub n: usize,
    pub p_list: Vec<u32>,
    pub trials: usize,
    /// Unit coefficient vectors of length `n`; three defaults when absent.
    pub lambdas: Option<Vec<Vec<f64>>>,
    pub ensemble: EnsembleKind,
}

impl Default for MomentParams {
    fn default() -> Self {
        MomentParams {
            big_n: 6,
            n: 3,
            p_list: vec![2, 4, 6],
            trials: 5000,
            lambdas: None,
            ensemble: EnsembleKind::GaussianComplex,
        }
    }
}

/// Largest even moment the check accepts.
pub const MAX_MOMENT: u32 = 12;

impl MomentParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("N", self.big_n)?;
        require_positive("n", self.n)?;
        if self.trials < 2 {
            return Err(invalid("trials", "must be at least 2"));
        }
        require_gaussian("ensemble", self.ensemble)?;
        if self.p_list.is_empty() {
            return Err(invalid("p_list", "must not be empty"));
        }
        if let Some(p) = self.p_list.iter().find(|&&p| p < 2 || p % 2 == 1 || p > MAX_MOMENT) {
            return Err(invalid("p_list", format!("p = {p} is not an even integer in 2..={MAX_MOMENT}")));
        }
        for l in self.lambda_list() {
            if l.len() != self.n {
                return Err(invalid("lambdas", format!("each vector needs n = {} entries", self.n)));
            }
            let norm2: f64 = l.iter().map(|x| x * x).sum();
            if (norm2 - 1.0).abs() > 1e-9 {
                return Err(invalid("lambdas", format!("Σλ² = {norm2}, expected 1")));
            }
        }
        Ok(())
    }

    /// `e_1`, the flat vector and a geometric profile, all normalized.
    pub fn lambda_list(&self) -> Vec<Vec<f64>> {
        if let Some(l) = &self.lambdas {
            return l.clone();
        }
        let n = self.n;
        let unit = |v: Vec<f64>| {
            let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / s).collect::<Vec<_>>()
        };
        vec![
            unit((0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect()),
            unit(vec![1.0; n]),
            unit((0..n).map(|i| 0.5f64.powi(i as i32)).collect()),
        ]
    }
}

/// `tr|M|^p` for each even `p` in `ps`, sharing the powers of `M^* M`.
fn even_traces(m: &CMatrix, ps: &[u32]) -> Vec<f64> {
    let h = m.adjoint() * m;
    let top = ps.iter().copied().max().unwrap_or(2) / 2;
    let mut acc = h.clone();
    let mut traces = vec![acc.trace().re];
    for _ in 1..top {
        acc = &acc * &h;
        traces.push(acc.trace().re);
    }
    ps.iter().map(|&p| traces[p as usize / 2 - 1]).collect()
}

/// Monte Carlo estimates of `E tr|Σ λ_j Y'_j ⊗ Y''_j|^p` and
/// `(E tr|Y|^p)²`, plus the invariance `E tr|Σ λ_j Y_j|^p = E tr|Y|^p`.
///
/// All quantities of a trial share its factor sample. `E tr|Y|^p` is the
/// trial average over all `2n` factors; its square gets a delta-method
/// standard error. Combined standard errors ignore the (positive)
/// covariance, which makes the comparisons conservative.
pub fn run_moment_check(p: &MomentParams, seed: RandomSeed) -> Result<StudyOutput> {
    p.validate()?;
    let lambdas = p.lambda_list();
    let (n, big_n) = (p.n, p.big_n);
    let mut study = Study::new(StudyParams::Moment(p.clone()), seed, None);
    let g = study.run_group(big_n as f64, p.trials, |ts| {
        let ys = (0..2 * n)
            .map(|i| sample_gaussian_matrix(big_n, p.ensemble, ts.derive(i as u64)))
            .collect::<Result<Vec<_>>>()?;
        let (left, right) = ys.split_at(n);
        let mut out = Outputs::new();
        let mut y_sum = vec![0.0; p.p_list.len()];
        for y in &ys {
            for (acc, t) in y_sum.iter_mut().zip(even_traces(y, &p.p_list)) {
                *acc += t;
            }
        }
        for (&pp, s) in p.p_list.iter().zip(&y_sum) {
            out.insert(format!("y_p{pp}"), s / (2 * n) as f64);
        }
        for (k, l) in lambdas.iter().enumerate() {
            let dim = big_n * big_n;
            let mut z = CMatrix::zeros(dim, dim);
            let mut s = CMatrix::zeros(big_n, big_n);
            for j in 0..n {
                if l[j] != 0.0 {
                    let c = C64::new(l[j], 0.0);
                    z += kron(&left[j], &right[j]) * c;
                    s += &left[j] * c;
                }
            }
            for ((&pp, a), b) in p.p_list.iter().zip(even_traces(&z, &p.p_list)).zip(even_traces(&s, &p.p_list)) {
                out.insert(format!("left_l{k}_p{pp}"), a);
                out.insert(format!("invariance_l{k}_p{pp}"), b);
            }
        }
        Ok(out)
    })?;

    let n2 = (big_n * big_n) as f64;
    for (k, l) in lambdas.iter().enumerate() {
        for &pp in &p.p_list {
            let lhs = study.stat(g, &format!("left_l{k}_p{pp}")).clone();
            let y = study.stat(g, &format!("y_p{pp}")).clone();
            let inv = study.stat(g, &format!("invariance_l{k}_p{pp}")).clone();
            let rhs = y.mean * y.mean;
            let rhs_se = 2.0 * y.mean * y.stderr;
            study.derive_value(g, format!("right_p{pp}"), rhs);
            study.check(Check::at_most(
                format!("moment_inequality_l{k}_p{pp}"),
                lhs.mean - rhs,
                2.0 * (lhs.stderr.powi(2) + rhs_se.powi(2)).sqrt(),
                format!("E tr|Z|^p − (E tr|Y|^p)² vs 2 combined standard errors, λ = {l:?}"),
            ));
            study.check(Check::at_most(
                format!("unitary_invariance_l{k}_p{pp}"),
                (inv.mean - y.mean).abs(),
                2.0 * (inv.stderr.powi(2) + y.stderr.powi(2)).sqrt(),
                format!("|E tr|Σ λ_j Y_j|^p − E tr|Y|^p| vs 2 combined standard errors, λ = {l:?}"),
            ));
            if pp == 2 {
                let exact = n2 * l.iter().map(|x| x * x).sum::<f64>().powi(2);
                study.check(Check::at_most(
                    format!("second_moment_l{k}"),
                    (lhs.mean - exact).abs(),
                    3.0 * lhs.stderr,
                    format!("|E tr|Z|² − N² (Σλ²)²| vs 3 standard errors, exact value {exact}"),
                ));
            }
        }
    }
    Ok(study.finish())
}
