//! Monte Carlo checks of the samplers against analytic moments and
//! independent oracles.

use bellnorm_core::ensembles::{
    sample_ensemble_matrix, sample_gaussian_matrix, sample_gaussian_vector, sample_projection,
};
use bellnorm_core::linalg::hs_norm;
use bellnorm_core::stats::{ks_statistic, Summary};
use bellnorm_core::{CMatrix, EnsembleKind, Field, RandomSeed, C64};

const Z: f64 = 3.0;
// 1% critical value of the one-sample KS statistic, large-sample form
const KS_1PCT: f64 = 1.628;

fn within(a: &Summary, target: f64) -> bool {
    (a.mean - target).abs() <= Z * a.stderr
}

fn max_dev(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn gaussian_trace_second_moment_is_n() {
    for kind in [EnsembleKind::GaussianReal, EnsembleKind::GaussianComplex] {
        for n in [2usize, 8, 32] {
            let v: Vec<f64> = (0..2000)
                .map(|i| hs_norm(&sample_gaussian_matrix(n, kind, RandomSeed(1).derive(n as u64).derive(i)).unwrap()).powi(2))
                .collect();
            let s = Summary::of(&v);
            assert!(within(&s, n as f64), "{kind:?} N={n}: mean {} se {}", s.mean, s.stderr);
        }
    }
}

#[test]
fn scalar_real_gaussian_is_standard_normal() {
    let v: Vec<f64> = (0..5000)
        .map(|i| sample_gaussian_matrix(1, EnsembleKind::GaussianReal, RandomSeed(2).derive(i)).unwrap()[(0, 0)].re)
        .collect();
    let phi = |x: f64| 0.5 * (1.0 + erf(x / std::f64::consts::SQRT_2));
    let d = ks_statistic(&v, phi);
    assert!(d * (v.len() as f64).sqrt() < KS_1PCT, "KS {d}");
}

// Abramowitz-Stegun 7.1.26, absolute error below 1.5e-7
fn erf(x: f64) -> f64 {
    let t = 1.0 / (1.0 + 0.3275911 * x.abs());
    let poly = t * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let y = 1.0 - poly * (-x * x).exp();
    if x >= 0.0 {
        y
    } else {
        -y
    }
}

#[test]
fn complex_entries_split_the_variance() {
    let n = 50;
    let mut re = Vec::new();
    let mut im = Vec::new();
    for i in 0..40 {
        let m = sample_gaussian_matrix(n, EnsembleKind::GaussianComplex, RandomSeed(3).derive(i)).unwrap();
        re.extend(m.iter().map(|z| z.re * z.re));
        im.extend(m.iter().map(|z| z.im * z.im));
    }
    let target = 1.0 / (2.0 * n as f64);
    assert!(within(&Summary::of(&re), target));
    assert!(within(&Summary::of(&im), target));
}

#[test]
fn gaussian_vector_norm_is_chi_square() {
    let dim = 7;
    let v: Vec<f64> = (0..10000)
        .map(|i| {
            sample_gaussian_vector(dim, EnsembleKind::GaussianReal, RandomSeed(4).derive(i))
                .unwrap()
                .iter()
                .map(|z| z.norm_sqr())
                .sum()
        })
        .collect();
    assert!(within(&Summary::of(&v), dim as f64));
}

#[test]
fn haar_corner_entry_is_uniform_at_n2() {
    let mut samples = Vec::new();
    for i in 0..10000 {
        let u = sample_ensemble_matrix(2, EnsembleKind::HaarUnitary, RandomSeed(5).derive(i)).unwrap();
        let dev = max_dev(&(u.adjoint() * &u - CMatrix::identity(2, 2)));
        assert!(dev < 1e-10);
        samples.push(u[(0, 0)].norm_sqr());
    }
    let d = ks_statistic(&samples, |x| x.clamp(0.0, 1.0));
    assert!(d * (samples.len() as f64).sqrt() < KS_1PCT, "KS {d}");
}

#[test]
fn haar_corner_entry_follows_beta_at_n5() {
    // |U_11|^2 ~ Beta(1, N - 1), CDF 1 - (1 - x)^{N-1}
    let n = 5;
    let samples: Vec<f64> = (0..5000)
        .map(|i| sample_ensemble_matrix(n, EnsembleKind::HaarUnitary, RandomSeed(6).derive(i)).unwrap()[(0, 0)].norm_sqr())
        .collect();
    let d = ks_statistic(&samples, |x| 1.0 - (1.0 - x.clamp(0.0, 1.0)).powi(n as i32 - 1));
    assert!(d * (samples.len() as f64).sqrt() < KS_1PCT, "KS {d}");
}

/// Rank-`k` projection from the first `k` columns of an independent Haar
/// unitary.
fn haar_frame_projection(n: usize, k: usize, seed: RandomSeed) -> CMatrix {
    let u = sample_ensemble_matrix(n, EnsembleKind::HaarUnitary, seed).unwrap();
    let frame = u.columns(0, k).into_owned();
    &frame * frame.adjoint()
}

#[test]
fn projection_overlap_matches_haar_frame_oracle() {
    let (n, k) = (4, 2);
    let q = haar_frame_projection(n, k, RandomSeed(7));
    let trials = 4000;
    let mut ours = Vec::new();
    let mut oracle = Vec::new();
    for i in 0..trials {
        let p = sample_projection(n, k, Field::Complex, RandomSeed(8).derive(i)).unwrap();
        assert!(max_dev(&(&p * &p - &p)) < 1e-10);
        assert!(max_dev(&(p.adjoint() - &p)) < 1e-10);
        assert!((p.trace() - C64::new(k as f64, 0.0)).norm() < 1e-8);
        ours.push((&p * &q).trace().re);
        let r = haar_frame_projection(n, k, RandomSeed(9).derive(i));
        oracle.push((&r * &q).trace().re);
    }
    for power in [1, 2] {
        let a = Summary::of(&ours.iter().map(|x| x.powi(power)).collect::<Vec<_>>());
        let b = Summary::of(&oracle.iter().map(|x| x.powi(power)).collect::<Vec<_>>());
        let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() <= Z * se, "moment {power}: {} vs {}", a.mean, b.mean);
    }
    // E tr(PQ) = k^2 / n
    assert!(within(&Summary::of(&ours), (k * k) as f64 / n as f64));
}

#[test]
fn rademacher_entries_have_modulus_n_to_minus_half() {
    for n in [1usize, 3, 10] {
        let m = sample_ensemble_matrix(n, EnsembleKind::Rademacher, RandomSeed(10)).unwrap();
        let a = 1.0 / (n as f64).sqrt();
        assert!(m.iter().all(|z| z.im == 0.0 && z.re.abs() == a));
    }
}
