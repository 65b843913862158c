//! Moment checks for Gaussian chaos: the Latała bound and the
//! symmetrization identity for quadratic forms.

use serde::{Deserialize, Serialize};

use super::{
    invalid, lp_norm_with_se, require_gaussian, require_list, require_positive, Check, Outputs, Study, StudyOutput,
    StudyParams, SHARED_STREAM,
};
use crate::ensembles::{gaussian_entries, sample_gaussian_matrix, sample_projection};
use crate::error::Result;
use crate::linalg::hs_norm;
use crate::norms::empirical_lp_norm;
use crate::stats::Summary;
use crate::{CMatrix, EnsembleKind, GaussianPairForm, ModeMatrices, RandomSeed, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatalaParams {
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    /// Projection rank per mode; the order is `ranks.len()`.
    pub ranks: Vec<usize>,
    pub p_list: Vec<f64>,
    pub trials: usize,
    pub ensemble: EnsembleKind,
    /// Largest acceptable fitted constant.
    pub c_max: f64,
    /// Largest acceptable ratio between fitted constants across `N`.
    pub stability_ratio: f64,
}

impl Default for LatalaParams {
    fn default() -> Self {
        LatalaParams {
            n_list: vec![4, 8],
            ranks: vec![2, 2, 2],
            p_list: vec![1.0, 2.0, 3.0, 4.0, 6.0, 8.0],
            trials: 2000,
            ensemble: EnsembleKind::GaussianReal,
            c_max: 10.0,
            stability_ratio: 2.0,
        }
    }
}

impl LatalaParams {
    pub fn validate(&self) -> Result<()> {
        require_list("N_list", &self.n_list, 1)?;
        require_list("ranks", &self.ranks, 1)?;
        if self.ranks.len() < 2 {
            return Err(invalid("ranks", "need at least two modes"));
        }
        let smallest = *self.n_list.iter().min().expect("non-empty");
        if let Some(r) = self.ranks.iter().find(|&&r| r > smallest) {
            return Err(invalid("ranks", format!("rank {r} exceeds N = {smallest}")));
        }
        if self.p_list.is_empty() || self.p_list.iter().any(|&p| !(p >= 1.0 && p.is_finite())) {
            return Err(invalid("p_list", "entries must be finite numbers >= 1"));
        }
        if self.trials < 2 {
            return Err(invalid("trials", "must be at least 2"));
        }
        require_gaussian("ensemble", self.ensemble)?;
        if !(self.c_max > 0.0) {
            return Err(invalid("c_max", "must be positive"));
        }
        if !(self.stability_ratio >= 1.0) {
            return Err(invalid("stability_ratio", "must be at least 1"));
        }
        Ok(())
    }
}

/// Moments of `Z(P_1,…,P_d)` for fixed projections across Gaussian pairs.
///
/// With `‖P‖₂ = √rank` and `‖P‖_∞ = 1`, the fitted constant for each `N`
/// is `max_p ‖Z‖_p / (√p Π √r_m + p)`.
pub fn run_latala_check(p: &LatalaParams, seed: RandomSeed) -> Result<StudyOutput> {
    p.validate()?;
    let d = p.ranks.len();
    let field = p.ensemble.field();
    let hs: f64 = p.ranks.iter().map(|&r| (r as f64).sqrt()).product();
    let mut ps = p.p_list.clone();
    ps.sort_by(f64::total_cmp);
    let mut study = Study::new(StudyParams::Latala(p.clone()), seed, Some("z_abs"));
    let mut fitted = Vec::new();
    for (gi, &n) in p.n_list.iter().enumerate() {
        let shared = seed.derive(SHARED_STREAM).derive(gi as u64);
        let mats = ModeMatrices::new(
            p.ranks
                .iter()
                .enumerate()
                .map(|(m, &r)| sample_projection(n, r, field, shared.derive(m as u64)))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let g = study.run_group(n as f64, p.trials, |ts| {
            let form = GaussianPairForm::sample(n, d, p.ensemble, ts)?;
            Ok(Outputs::from([("z_abs".to_string(), form.evaluate_form(&mats)?.norm())]))
        })?;
        let z = study.values(g, "z_abs");
        let mut c: f64 = 0.0;
        let mut worst_drop: f64 = 0.0;
        let mut previous = 0.0;
        for &pp in &ps {
            let norm = empirical_lp_norm(&z, pp)?;
            let cp = norm / (pp.sqrt() * hs + pp);
            study.derive_value(g, format!("lp_{pp}"), norm);
            study.derive_value(g, format!("c_{pp}"), cp);
            c = c.max(cp);
            worst_drop = worst_drop.max((previous - norm) / previous.max(f64::MIN_POSITIVE));
            previous = norm;
        }
        study.derive_value(g, "fitted_c", c);
        study.check(Check::at_most(format!("fitted_c_N{n}"), c, p.c_max, "max_p ‖Z‖_p / (√p Π‖P‖₂ + p Π‖P‖_∞)"));
        study.check(Check::at_most(
            format!("lp_monotone_N{n}"),
            worst_drop,
            1e-12,
            "largest relative decrease of ‖Z‖_p along increasing p",
        ));
        fitted.push(c);
    }
    if fitted.len() > 1 {
        let hi = fitted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = fitted.iter().copied().fold(f64::INFINITY, f64::min);
        study.check(Check::at_most(
            "fitted_c_stable",
            hi / lo,
            p.stability_ratio,
            format!("max/min fitted constant across N_list, constants {fitted:?}"),
        ));
    }
    Ok(study.finish())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SymmetrizationParams {
    /// Dimension of the Gaussian vectors.
    #[serde(rename = "N")]
    pub big_n: usize,
    /// Number of operators `u_i`.
    #[serde(rename = "M")]
    pub m: usize,
    pub trials: usize,
    pub ensemble: EnsembleKind,
    /// Use `u_i = I` instead of Gaussian operators.
    pub identity_operators: bool,
}

impl Default for SymmetrizationParams {
    fn default() -> Self {
        SymmetrizationParams {
            big_n: 8,
            m: 4,
            trials: 4000,
            ensemble: EnsembleKind::GaussianReal,
            identity_operators: false,
        }
    }
}

impl SymmetrizationParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("N", self.big_n)?;
        require_positive("M", self.m)?;
        if self.trials < 2 {
            return Err(invalid("trials", "must be at least 2"));
        }
        require_gaussian("ensemble", self.ensemble)
    }
}

/// `Re⟨a, b⟩`.
fn real_inner(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}

fn apply(u: &CMatrix, x: &[C64]) -> Vec<C64> {
    (0..u.nrows()).map(|i| (0..u.ncols()).map(|j| u[(i, j)] * x[j]).sum()).collect()
}

/// Quadratic forms `Z_i = Re⟨u_i g, u_i g′⟩` and centered
/// `Ẑ_i = ‖u_i g‖² − ‖u_i‖²_HS` of standard Gaussian vectors.
///
/// Per trial, with independent `g, g′, h, h′`: `sup_z = max_i |Z_i(g, g′)|`,
/// `sup_zhat = max_i |Ẑ_i(g)|`, `sup_square = max_i ‖u_i g‖²`, and the two
/// sides of `Ẑ − Ẑ′ ≅ 2Z`: `sup_difference = max_i |Ẑ_i(h) − Ẑ_i(h′)|`
/// against `2 sup_z`. Over the complex field the real part keeps the
/// identity `‖u a‖² − ‖u b‖² = 2 Re⟨u g, u g′⟩` for `a, b = (g ± g′)/√2`.
pub fn symmetrization_check(p: &SymmetrizationParams, seed: RandomSeed) -> Result<StudyOutput> {
    p.validate()?;
    let n = p.big_n;
    let field = p.ensemble.field();
    let shared = seed.derive(SHARED_STREAM);
    let ops: Vec<CMatrix> = (0..p.m)
        .map(|i| {
            if p.identity_operators {
                Ok(CMatrix::identity(n, n))
            } else {
                sample_gaussian_matrix(n, p.ensemble, shared.derive(i as u64))
            }
        })
        .collect::<Result<_>>()?;
    let centers: Vec<f64> = ops.iter().map(|u| hs_norm(u).powi(2)).collect();
    let max_hs2 = centers.iter().copied().fold(0.0, f64::max);
    let mut study = Study::new(StudyParams::Symmetrization(p.clone()), seed, None);
    let g = study.run_group(n as f64, p.trials, |ts| {
        let mut rng = ts.rng();
        let mut draw = || gaussian_entries(&mut rng, n, field, 1.0);
        let (x, xp, h, hp) = (draw(), draw(), draw(), draw());
        let zhat = |u: &CMatrix, c: f64, v: &[C64]| {
            let w = apply(u, v);
            real_inner(&w, &w) - c
        };
        let mut out = Outputs::new();
        let (mut sup_z, mut sup_zhat, mut sup_square, mut sup_diff): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
        for (u, &c) in ops.iter().zip(&centers) {
            let (ux, uxp) = (apply(u, &x), apply(u, &xp));
            sup_z = sup_z.max(real_inner(&ux, &uxp).abs());
            let square = real_inner(&ux, &ux);
            sup_square = sup_square.max(square);
            sup_zhat = sup_zhat.max((square - c).abs());
            sup_diff = sup_diff.max((zhat(u, c, &h) - zhat(u, c, &hp)).abs());
        }
        out.insert("sup_z".into(), sup_z);
        out.insert("twice_sup_z".into(), 2.0 * sup_z);
        out.insert("sup_zhat".into(), sup_zhat);
        out.insert("sup_square".into(), sup_square);
        out.insert("sup_difference".into(), sup_diff);
        out.insert("zhat_first".into(), zhat(&ops[0], centers[0], &x));
        Ok(out)
    })?;

    let twice = study.values(g, "twice_sup_z");
    let diff = study.values(g, "sup_difference");
    for pp in [1.0, 2.0, 4.0] {
        let a = Summary::of(&diff.iter().map(|v| v.powf(pp)).collect::<Vec<_>>());
        let b = Summary::of(&twice.iter().map(|v| v.powf(pp)).collect::<Vec<_>>());
        study.check(Check::at_most(
            format!("symmetrization_moment_p{pp}"),
            (a.mean - b.mean).abs(),
            3.0 * (a.stderr.powi(2) + b.stderr.powi(2)).sqrt(),
            "|E sup|Ẑ−Ẑ′|^p − E (2 sup|Z|)^p| vs 3 combined standard errors",
        ));
    }
    let z = study.values(g, "sup_z");
    let zhat = study.values(g, "sup_zhat");
    for pp in [1.0, 2.0] {
        let (nz, sz) = lp_norm_with_se(&z, pp);
        let (nh, sh) = lp_norm_with_se(&zhat, pp);
        study.derive_value(g, format!("sup_z_norm_p{pp}"), nz);
        study.derive_value(g, format!("sup_zhat_norm_p{pp}"), nh);
        study.check(Check::at_most(
            format!("two_sided_lower_p{pp}"),
            nh / 2.0 - nz,
            3.0 * (sh.powi(2) / 4.0 + sz.powi(2)).sqrt(),
            "‖sup|Ẑ|‖_p / 2 − ‖sup|Z|‖_p vs 3 combined standard errors",
        ));
        study.check(Check::at_most(
            format!("two_sided_upper_p{pp}"),
            nz - nh,
            3.0 * (sh.powi(2) + sz.powi(2)).sqrt(),
            "‖sup|Z|‖_p − ‖sup|Ẑ|‖_p vs 3 combined standard errors",
        ));
    }
    let (nsq, ssq) = lp_norm_with_se(&study.values(g, "sup_square"), 2.0);
    let (nz, sz) = lp_norm_with_se(&z, 2.0);
    study.check(Check::at_most(
        "square_bound_p2",
        nsq - (2.0 * nz + max_hs2),
        3.0 * (ssq.powi(2) + 4.0 * sz.powi(2)).sqrt(),
        "‖sup‖u g‖²‖₂ − (2‖sup|Z|‖₂ + max‖u‖²_HS) vs 3 combined standard errors",
    ));
    let first = study.stat(g, "zhat_first").clone();
    study.check(Check::at_most(
        "centering",
        first.mean.abs(),
        3.0 * first.stderr,
        "|mean Ẑ_1| vs 3 standard errors",
    ));
    Ok(study.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_operator_variances_match() {
        let p = SymmetrizationParams {
            big_n: 5,
            m: 1,
            trials: 20000,
            identity_operators: true,
            ..SymmetrizationParams::default()
        };
        let out = symmetrization_check(&p, RandomSeed(3)).unwrap();
        let g = &out.summary.groups[0];
        // Var(‖h‖² − ‖h′‖²) = Var(2⟨g, g′⟩) = 4 dim
        let second = |key: &str| {
            let v: Vec<f64> = out.trials.iter().map(|r| r.outputs[key].powi(2)).collect();
            crate::stats::mean(&v)
        };
        assert!((second("sup_difference") / 20.0 - 1.0).abs() < 0.05);
        assert!((second("twice_sup_z") / 20.0 - 1.0).abs() < 0.05);
        assert_eq!(g.trials, 20000);
        assert!(out.passed(), "{:?}", out.failed_checks().map(|c| c.describe()).collect::<Vec<_>>());
    }

    #[test]
    fn complex_field_passes() {
        let p = SymmetrizationParams {
            trials: 3000,
            ensemble: EnsembleKind::GaussianComplex,
            ..SymmetrizationParams::default()
        };
        let out = symmetrization_check(&p, RandomSeed(5)).unwrap();
        assert!(out.passed(), "{:?}", out.failed_checks().map(|c| c.describe()).collect::<Vec<_>>());
    }

    #[test]
    fn full_rank_second_moment_is_the_hs_product() {
        let p = LatalaParams {
            n_list: vec![3],
            ranks: vec![3, 3, 3],
            p_list: vec![2.0],
            trials: 20000,
            ..LatalaParams::default()
        };
        let out = run_latala_check(&p, RandomSeed(6)).unwrap();
        let l2 = out.summary.groups[0].derived["lp_2"];
        assert!((l2 / 27f64.sqrt() - 1.0).abs() < 0.03, "{l2}");
    }

    #[test]
    fn latala_validation() {
        let p = LatalaParams {
            ranks: vec![5, 1, 1],
            ..LatalaParams::default()
        };
        assert!(p.validate().unwrap_err().to_string().contains("ranks"));
        let p = LatalaParams {
            p_list: vec![0.5],
            ..LatalaParams::default()
        };
        assert!(p.validate().unwrap_err().to_string().contains("p_list"));
    }
}
