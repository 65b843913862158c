//! Seeded generation of every random object used by the studies.
//!
//! All samplers are pure functions of their parameters and a [`RandomSeed`];
//! independent tasks split streams with [`derive_seed`].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::{CMatrix, Field, C64};

/// 64-bit master seed for a sampler or a study.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RandomSeed(pub u64);

impl RandomSeed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    pub fn derive(self, index: u64) -> RandomSeed {
        derive_seed(self, index)
    }
}

impl From<u64> for RandomSeed {
    fn from(value: u64) -> Self {
        RandomSeed(value)
    }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Splits a master seed into per-task streams.
///
/// `index -> master + (index + 1) * GOLDEN_GAMMA` is injective modulo 2^64
/// and the finalizer is a bijection, so distinct indices under one master
/// never collide.
pub fn derive_seed(master: RandomSeed, index: u64) -> RandomSeed {
    RandomSeed(mix64(
        master
            .0
            .wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1))),
    ))
}

/// Random-matrix ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnsembleKind {
    GaussianReal,
    GaussianComplex,
    Rademacher,
    HaarUnitary,
}

impl EnsembleKind {
    pub fn field(self) -> Field {
        match self {
            EnsembleKind::GaussianReal | EnsembleKind::Rademacher => Field::Real,
            EnsembleKind::GaussianComplex | EnsembleKind::HaarUnitary => Field::Complex,
        }
    }

    pub fn is_gaussian(self) -> bool {
        matches!(self, EnsembleKind::GaussianReal | EnsembleKind::GaussianComplex)
    }
}

/// One Gaussian scalar with `E|x|^2 = variance`. Complex draws split the
/// variance evenly between real and imaginary parts.
pub fn gaussian_scalar<R: Rng + ?Sized>(rng: &mut R, field: Field, variance: f64) -> C64 {
    match field {
        Field::Real => {
            let x: f64 = rng.sample(StandardNormal);
            C64::new(x * variance.sqrt(), 0.0)
        }
        Field::Complex => {
            let s = (variance / 2.0).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re * s, im * s)
        }
    }
}

pub fn gaussian_entries<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    field: Field,
    variance: f64,
) -> Vec<C64> {
    (0..count)
        .map(|_| gaussian_scalar(rng, field, variance))
        .collect()
}

fn gaussian_field(kind: EnsembleKind) -> Result<Field> {
    match kind {
        EnsembleKind::GaussianReal => Ok(Field::Real),
        EnsembleKind::GaussianComplex => Ok(Field::Complex),
        other => Err(domain(format!("{other:?} is not a Gaussian ensemble"))),
    }
}

/// `n x n` Gaussian matrix with independent entries of mean 0 and
/// `E|entry|^2 = 1/n`.
pub fn sample_gaussian_matrix(n: usize, kind: EnsembleKind, seed: RandomSeed) -> Result<CMatrix> {
    let field = gaussian_field(kind)?;
    if n == 0 {
        return Err(domain("matrix size must be at least 1"));
    }
    let mut rng = seed.rng();
    Ok(gaussian_matrix_with(&mut rng, n, field))
}

pub(crate) fn gaussian_matrix_with<R: Rng + ?Sized>(rng: &mut R, n: usize, field: Field) -> CMatrix {
    let entries = gaussian_entries(rng, n * n, field, 1.0 / n as f64);
    CMatrix::from_row_iterator(n, n, entries)
}

/// Rademacher (`±n^{-1/2}` entries) or Haar-distributed unitary matrix.
pub fn sample_signed_or_unitary_matrix(
    n: usize,
    kind: EnsembleKind,
    seed: RandomSeed,
) -> Result<CMatrix> {
    if n == 0 {
        return Err(domain("matrix size must be at least 1"));
    }
    let mut rng = seed.rng();
    match kind {
        EnsembleKind::Rademacher => Ok(rademacher_matrix_with(&mut rng, n)),
        EnsembleKind::HaarUnitary => Ok(haar_unitary_with(&mut rng, n)),
        other => Err(domain(format!(
            "{other:?} is not a signed or unitary ensemble"
        ))),
    }
}

/// Dispatches to the Gaussian or signed/unitary sampler by `kind`.
pub fn sample_ensemble_matrix(n: usize, kind: EnsembleKind, seed: RandomSeed) -> Result<CMatrix> {
    if kind.is_gaussian() {
        sample_gaussian_matrix(n, kind, seed)
    } else {
        sample_signed_or_unitary_matrix(n, kind, seed)
    }
}

fn rademacher_matrix_with<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let a = 1.0 / (n as f64).sqrt();
    CMatrix::from_row_iterator(
        n,
        n,
        (0..n * n).map(|_| C64::new(if rng.random::<bool>() { a } else { -a }, 0.0)),
    )
}

/// QR of a complex Gaussian matrix with the phases of `R`'s diagonal moved
/// into `Q`, which makes `Q` exactly Haar distributed.
fn haar_unitary_with<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let g = CMatrix::from_row_iterator(n, n, gaussian_entries(rng, n * n, Field::Complex, 1.0));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Gaussian vector with i.i.d. entries of mean 0 and `E|entry|^2 = 1`.
pub fn sample_gaussian_vector(dim: usize, kind: EnsembleKind, seed: RandomSeed) -> Result<Vec<C64>> {
    let field = gaussian_field(kind)?;
    if dim == 0 {
        return Err(domain("vector dimension must be at least 1"));
    }
    Ok(gaussian_entries(&mut seed.rng(), dim, field, 1.0))
}

/// Rank-`k` orthogonal projection onto the span of `k` Gaussian columns.
pub fn sample_projection(n: usize, k: usize, field: Field, seed: RandomSeed) -> Result<CMatrix> {
    if n == 0 || k == 0 || k > n {
        return Err(domain(format!("projection rank {k} must lie in 1..={n}")));
    }
    let mut rng = seed.rng();
    Ok(projection_with(&mut rng, n, k, field))
}

pub(crate) fn projection_with<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize, field: Field) -> CMatrix {
    if k == n {
        return CMatrix::identity(n, n);
    }
    let cols = CMatrix::from_row_iterator(n, k, gaussian_entries(rng, n * k, field, 1.0));
    let q = cols.qr().q();
    &q * q.adjoint()
}

/// Uniformly random unit vector in `field^dim`.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize, field: Field) -> Vec<C64> {
    loop {
        let mut v = gaussian_entries(rng, dim, field, 1.0);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|z| *z /= norm);
            return v;
        }
    }
}
