//! Spectral norm of `Z(α) = Σ_{ij} α_ij Y'_i ⊗ Y''_j` on `l_2^{N^2}`.
//!
//! A vector of length `N^2` is read as an `N x N` matrix `V` in row-major
//! order, so `(A ⊗ B) vec(V) = vec(A V B^T)` and
//!
//! ```text
//! Z V   = Σ_i Y'_i V W_i^T        with W_i = Σ_j α_ij Y''_j
//! Z^* V = Σ_i Y'_i^* V conj(W_i)
//! ```
//!
//! Large operators are applied with single-precision real GEMMs on split
//! real/imaginary planes (three products per complex product), while the
//! Lanczos recurrence on `Z^* Z` runs in double precision with full
//! reorthogonalization. Small operators are materialized and passed to SVD.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::ensembles::random_unit_vector;
use crate::error::{dimension, domain, Result};
use crate::linalg::{kron, singular_values, to_row_major, vec_norm};
use crate::{CMatrix, Field, RandomSeed, C64};

/// Largest `N^2` for which [`KroneckerSum::spectral`] uses a dense SVD.
pub const DENSE_MAX_DIM: usize = 512;

/// Lanczos stopping rule.
#[derive(Clone, Debug, PartialEq)]
pub struct LanczosConfig {
    /// Stop once one step raises the top Ritz value of `Z^* Z` by less than
    /// `tolerance` relatively, or its residual drops below `1e-3 * tolerance`.
    pub tolerance: f64,
    pub max_steps: usize,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        LanczosConfig {
            tolerance: 1e-5,
            max_steps: 120,
        }
    }
}

/// Top singular triple of `Z`. `right` and `left` are unit vectors with
/// `Z right ≈ value * left`.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularTriple {
    pub value: f64,
    pub right: Vec<C64>,
    pub left: Vec<C64>,
    /// Lanczos steps taken, 0 on the dense path.
    pub steps: usize,
}

/// The operator `Σ α_ij Y'_i ⊗ Y''_j` kept in factored form.
#[derive(Clone, Debug)]
pub struct KroneckerSum {
    n: usize,
    alpha: CMatrix,
    left: Vec<CMatrix>,
    right_factors: Vec<CMatrix>,
    /// `W_i = Σ_j α_ij Y''_j`.
    right: Vec<CMatrix>,
}

impl KroneckerSum {
    /// `alpha` is `left.len() x right.len()`; all factors are `N x N`.
    pub fn new(alpha: &CMatrix, left: &[CMatrix], right: &[CMatrix]) -> Result<Self> {
        let n = left
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| domain("at least one left factor is required"))?;
        if alpha.nrows() != left.len() || alpha.ncols() != right.len() {
            return Err(dimension(format!(
                "alpha is {}x{} but there are {} left and {} right factors",
                alpha.nrows(),
                alpha.ncols(),
                left.len(),
                right.len()
            )));
        }
        if left.iter().chain(right).any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(dimension(format!("all factors must be {n}x{n}")));
        }
        let w = (0..left.len())
            .map(|i| {
                let mut acc = CMatrix::zeros(n, n);
                for (j, y) in right.iter().enumerate() {
                    acc += y * alpha[(i, j)];
                }
                acc
            })
            .collect();
        Ok(KroneckerSum {
            n,
            alpha: alpha.clone(),
            left: left.to_vec(),
            right_factors: right.to_vec(),
            right: w,
        })
    }

    pub fn local_dim(&self) -> usize {
        self.n
    }

    /// The `N^2 x N^2` matrix `Σ_i Y'_i ⊗ W_i`.
    pub fn dense(&self, cap: usize) -> Result<CMatrix> {
        let dim = self.n * self.n;
        if (dim as u128) * (dim as u128) > cap as u128 {
            return Err(crate::Error::Resource {
                what: "dense Kronecker sum",
                requested: (dim as u128) * (dim as u128),
                cap: cap as u128,
            });
        }
        let mut out = CMatrix::zeros(dim, dim);
        for (a, w) in self.left.iter().zip(&self.right) {
            out += kron(a, w);
        }
        Ok(out)
    }

    /// `Z v` in double precision (reference path).
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let vm = CMatrix::from_row_slice(self.n, self.n, v);
        let mut out = CMatrix::zeros(self.n, self.n);
        for (a, w) in self.left.iter().zip(&self.right) {
            out += a * &vm * w.transpose();
        }
        to_row_major(&out)
    }

    /// `Z^* v` in double precision (reference path).
    pub fn apply_adjoint(&self, v: &[C64]) -> Vec<C64> {
        let vm = CMatrix::from_row_slice(self.n, self.n, v);
        let mut out = CMatrix::zeros(self.n, self.n);
        for (a, w) in self.left.iter().zip(&self.right) {
            out += a.adjoint() * &vm * w.map(|z| z.conj());
        }
        to_row_major(&out)
    }

    /// Single-precision factored operator for the Lanczos path.
    pub fn fast(&self) -> FastKroneckerSum {
        KroneckerFactors::new(&self.left, &self.right_factors)
            .and_then(|f| f.operator(&self.alpha))
            .expect("shapes were checked on construction")
    }

    /// Top singular triple: dense SVD when `N^2 <= DENSE_MAX_DIM`, Lanczos
    /// on the factored operator otherwise.
    pub fn spectral(&self, lanczos: &LanczosConfig, seed: RandomSeed) -> Result<SingularTriple> {
        if self.n * self.n <= DENSE_MAX_DIM {
            self.spectral_dense()
        } else {
            Ok(self.fast().top_singular(lanczos, seed))
        }
    }

    pub fn spectral_dense(&self) -> Result<SingularTriple> {
        let m = self.dense(DENSE_MAX_DIM * DENSE_MAX_DIM)?;
        let svd = m.svd(true, true);
        let mut best = 0;
        for i in 0..svd.singular_values.len() {
            if svd.singular_values[i] > svd.singular_values[best] {
                best = i;
            }
        }
        let u = svd.u.expect("requested U");
        let v_t = svd.v_t.expect("requested V^T");
        Ok(SingularTriple {
            value: svd.singular_values[best],
            right: v_t.row(best).iter().map(|z| z.conj()).collect(),
            left: u.column(best).iter().copied().collect(),
            steps: 0,
        })
    }

    /// `c_ij = ⟨left, (Y'_i ⊗ Y''_j) right⟩`, so that
    /// `⟨left, Z(α) right⟩ = Σ α_ij c_ij` for every `α`.
    pub fn coupling(left_vec: &[C64], right_vec: &[C64], ys_left: &[CMatrix], ys_right: &[CMatrix]) -> CMatrix {
        let n = ys_left[0].nrows();
        let u = CMatrix::from_row_slice(n, n, left_vec);
        let v = CMatrix::from_row_slice(n, n, right_vec);
        CMatrix::from_fn(ys_left.len(), ys_right.len(), |i, j| {
            let image = &ys_left[i] * &v * ys_right[j].transpose();
            u.iter().zip(image.iter()).map(|(a, b)| a.conj() * b).sum()
        })
    }
}

/// Row-major real and imaginary planes of a matrix, with the plane sum
/// needed by the three-product complex GEMM.
#[derive(Clone, Debug)]
struct Planes {
    re: Vec<f32>,
    im: Vec<f32>,
    /// `re + im`
    sum: Vec<f32>,
}

impl Planes {
    fn zeros(len: usize) -> Self {
        Planes {
            re: vec![0.0; len],
            im: vec![0.0; len],
            sum: vec![0.0; len],
        }
    }

    fn from_matrix(m: &CMatrix) -> Self {
        let v = to_row_major(m);
        let mut p = Self::zeros(v.len());
        p.load(&v);
        p
    }

    /// Horizontal concatenation `[m_1 | m_2 | …]` of square blocks.
    fn from_row_blocks(blocks: &[CMatrix]) -> Self {
        let n = blocks[0].nrows();
        let k = blocks.len();
        let mut p = Self::zeros(n * n * k);
        for (b, m) in blocks.iter().enumerate() {
            for r in 0..n {
                for c in 0..n {
                    let z = m[(r, c)];
                    p.re[r * n * k + b * n + c] = z.re as f32;
                    p.im[r * n * k + b * n + c] = z.im as f32;
                }
            }
        }
        p.refresh();
        p
    }

    fn load(&mut self, v: &[C64]) {
        for (k, z) in v.iter().enumerate() {
            self.re[k] = z.re as f32;
            self.im[k] = z.im as f32;
        }
        self.refresh();
    }

    fn refresh(&mut self) {
        for k in 0..self.re.len() {
            self.sum[k] = self.re[k] + self.im[k];
        }
    }
}

/// Row-major `c = a b` with `a: m x k`, `b: k x n`.
fn sgemm(m: usize, k: usize, n: usize, a: &[f32], b: &[f32], c: &mut [f32]) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    // SAFETY: the asserts above bound every element the strides address.
    unsafe {
        matrixmultiply::sgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            k as isize,
            1,
            b.as_ptr(),
            n as isize,
            1,
            0.0,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

struct Scratch {
    t1: Vec<f32>,
    t2: Vec<f32>,
    t3: Vec<f32>,
}

/// Complex `a b` from three real products, written into `out[..m*n]`:
/// `re = T1 - T2`, `im = T3 - T1 - T2` with `T1 = Ar Br`, `T2 = Ai Bi`,
/// `T3 = (Ar + Ai)(Br + Bi)`.
fn cgemm3m(m: usize, k: usize, n: usize, a: &Planes, b: &Planes, out: (&mut [f32], &mut [f32]), s: &mut Scratch) {
    sgemm(m, k, n, &a.re, &b.re, &mut s.t1);
    sgemm(m, k, n, &a.im, &b.im, &mut s.t2);
    sgemm(m, k, n, &a.sum, &b.sum, &mut s.t3);
    let (re, im) = out;
    for i in 0..m * n {
        re[i] = s.t1[i] - s.t2[i];
        im[i] = s.t3[i] - s.t1[i] - s.t2[i];
    }
}

/// The α-independent half of the fast operator: single-precision planes of
/// the factors, each stored in the orientation its product needs so that
/// every GEMM is plain. Build once per sample of `(Y', Y'')` and derive an
/// operator per coefficient matrix with [`KroneckerFactors::operator`].
pub struct KroneckerFactors {
    n: usize,
    left_count: usize,
    /// `[Y'_1 | … | Y'_n]` and `[Y'_1^* | … | Y'_n^*]`.
    left_row: Planes,
    left_adj_row: Planes,
    /// `Y''_j^T` and `Y''_j`.
    right_t: Vec<Planes>,
    right: Vec<Planes>,
}

impl KroneckerFactors {
    pub fn new(left: &[CMatrix], right: &[CMatrix]) -> Result<Arc<Self>> {
        let n = left
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| domain("at least one left factor is required"))?;
        if right.is_empty() || left.iter().chain(right).any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(dimension(format!("all factors must be {n}x{n} and both sides nonempty")));
        }
        Ok(Arc::new(KroneckerFactors {
            n,
            left_count: left.len(),
            left_row: Planes::from_row_blocks(left),
            left_adj_row: Planes::from_row_blocks(&left.iter().map(|a| a.adjoint()).collect::<Vec<_>>()),
            right_t: right.iter().map(|y| Planes::from_matrix(&y.transpose())).collect(),
            right: right.iter().map(Planes::from_matrix).collect(),
        }))
    }

    /// The operator `Σ α_ij Y'_i ⊗ Y''_j` for one coefficient matrix.
    pub fn operator(self: &Arc<Self>, alpha: &CMatrix) -> Result<FastKroneckerSum> {
        if alpha.nrows() != self.left_count || alpha.ncols() != self.right.len() {
            return Err(dimension(format!(
                "alpha is {}x{}, expected {}x{}",
                alpha.nrows(),
                alpha.ncols(),
                self.left_count,
                self.right.len()
            )));
        }
        let row = |i: usize, conj: bool| -> Vec<C64> {
            (0..alpha.ncols())
                .map(|j| if conj { alpha[(i, j)].conj() } else { alpha[(i, j)] })
                .collect()
        };
        Ok(FastKroneckerSum {
            factors: Arc::clone(self),
            right_t: (0..self.left_count).map(|i| combine(&self.right_t, &row(i, false), false)).collect(),
            right_conj: (0..self.left_count).map(|i| combine(&self.right, &row(i, true), true)).collect(),
        })
    }
}

/// `Σ c_j P_j`, or `Σ c_j conj(P_j)` when `conj_planes` is set.
fn combine(planes: &[Planes], coeffs: &[C64], conj_planes: bool) -> Planes {
    let len = planes[0].re.len();
    let mut out = Planes::zeros(len);
    let s = if conj_planes { -1.0f32 } else { 1.0 };
    for (p, c) in planes.iter().zip(coeffs) {
        let (cr, ci) = (c.re as f32, c.im as f32);
        for k in 0..len {
            let (pr, pi) = (p.re[k], s * p.im[k]);
            out.re[k] += cr * pr - ci * pi;
            out.im[k] += cr * pi + ci * pr;
        }
    }
    out.refresh();
    out
}

/// Single-precision factored form of `Σ α_ij Y'_i ⊗ Y''_j`.
pub struct FastKroneckerSum {
    factors: Arc<KroneckerFactors>,
    /// `W_i^T` and `conj(W_i)` with `W_i = Σ_j α_ij Y''_j`.
    right_t: Vec<Planes>,
    right_conj: Vec<Planes>,
}

struct Workspace {
    input: Planes,
    /// `[U_1; …; U_n]`, the per-term right products stacked vertically.
    stacked: Planes,
    out_re: Vec<f32>,
    out_im: Vec<f32>,
    scratch: Scratch,
}

impl FastKroneckerSum {
    fn workspace(&self) -> Workspace {
        let len = self.factors.n * self.factors.n;
        let big = len * self.factors.left_count;
        Workspace {
            input: Planes::zeros(len),
            stacked: Planes::zeros(big),
            out_re: vec![0.0; len],
            out_im: vec![0.0; len],
            scratch: Scratch {
                t1: vec![0.0; len],
                t2: vec![0.0; len],
                t3: vec![0.0; len],
            },
        }
    }

    fn run(&self, v: &[C64], adjoint: bool, ws: &mut Workspace) -> Vec<C64> {
        let n = self.factors.n;
        let len = n * n;
        ws.input.load(v);
        let rights = if adjoint { &self.right_conj } else { &self.right_t };
        for (i, w) in rights.iter().enumerate() {
            let block = i * len..(i + 1) * len;
            cgemm3m(
                n,
                n,
                n,
                &ws.input,
                w,
                (&mut ws.stacked.re[block.clone()], &mut ws.stacked.im[block]),
                &mut ws.scratch,
            );
        }
        ws.stacked.refresh();
        let left = if adjoint { &self.factors.left_adj_row } else { &self.factors.left_row };
        cgemm3m(
            n,
            n * self.factors.left_count,
            n,
            left,
            &ws.stacked,
            (&mut ws.out_re, &mut ws.out_im),
            &mut ws.scratch,
        );
        ws.out_re
            .iter()
            .zip(&ws.out_im)
            .map(|(&r, &i)| C64::new(r as f64, i as f64))
            .collect()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.run(v, false, &mut self.workspace())
    }

    pub fn apply_adjoint(&self, v: &[C64]) -> Vec<C64> {
        self.run(v, true, &mut self.workspace())
    }

    /// Lanczos on `Z^* Z` from a seeded random start.
    pub fn top_singular(&self, config: &LanczosConfig, seed: RandomSeed) -> SingularTriple {
        let mut ws = self.workspace();
        let dim = self.factors.n * self.factors.n;
        let mut rng = seed.rng();
        let mut basis = vec![Split::from_complex(&random_unit_vector(&mut rng, dim, Field::Complex))];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut ritz = (0.0, vec![1.0]);
        let max_steps = config.max_steps.clamp(1, dim);
        for step in 0..max_steps {
            let q = basis[step].to_complex();
            let zq = self.run(&q, false, &mut ws);
            let mut w = Split::from_complex(&self.run(&zq, true, &mut ws));
            let a = basis[step].dot(&w).re;
            alphas.push(a);
            // three-term recurrence, then one full reorthogonalization pass
            w.axpy(C64::new(-a, 0.0), &basis[step]);
            if step > 0 {
                w.axpy(C64::new(-betas[step - 1], 0.0), &basis[step - 1]);
            }
            for b in &basis {
                let h = b.dot(&w);
                w.axpy(-h, b);
            }
            let beta = w.norm();
            let previous = ritz.0;
            ritz = top_ritz(&alphas, &betas);
            let residual = beta * ritz.1.last().copied().unwrap_or(0.0).abs();
            let stalled = step > 0 && ritz.0 - previous <= config.tolerance * ritz.0;
            let breakdown = beta <= 1e-12 * ritz.0.max(f64::MIN_POSITIVE);
            if stalled || residual <= 1e-3 * config.tolerance * ritz.0 || breakdown || step + 1 == max_steps {
                break;
            }
            betas.push(beta);
            w.scale(1.0 / beta);
            basis.push(w);
        }
        let steps = alphas.len();
        let mut ritz_vec = Split::zeros(dim);
        for (y, b) in ritz.1.iter().zip(&basis) {
            ritz_vec.axpy(C64::new(*y, 0.0), b);
        }
        let mut right = ritz_vec.to_complex();
        let norm = vec_norm(&right);
        right.iter_mut().for_each(|z| *z /= norm);
        // |Z v| at the Ritz vector is a feasible value of the norm.
        let image = self.run(&right, false, &mut ws);
        let value = vec_norm(&image);
        let left = if value > 0.0 {
            image.iter().map(|z| z / value).collect()
        } else {
            right.clone()
        };
        SingularTriple {
            value,
            right,
            left,
            steps,
        }
    }
}

/// Complex vector stored as separate real and imaginary planes, so the
/// reorthogonalization loops vectorize.
struct Split {
    re: Vec<f64>,
    im: Vec<f64>,
}

const LANES: usize = 8;

impl Split {
    fn zeros(len: usize) -> Self {
        Split {
            re: vec![0.0; len],
            im: vec![0.0; len],
        }
    }

    fn from_complex(v: &[C64]) -> Self {
        Split {
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
    }

    fn to_complex(&self) -> Vec<C64> {
        self.re.iter().zip(&self.im).map(|(&r, &i)| C64::new(r, i)).collect()
    }

    /// `Σ conj(self) other`, accumulated in independent lanes.
    fn dot(&self, other: &Split) -> C64 {
        let mut re = [0.0; LANES];
        let mut im = [0.0; LANES];
        let chunks = self.re.len() / LANES * LANES;
        for base in (0..chunks).step_by(LANES) {
            let (ar, ai) = (&self.re[base..base + LANES], &self.im[base..base + LANES]);
            let (br, bi) = (&other.re[base..base + LANES], &other.im[base..base + LANES]);
            for l in 0..LANES {
                re[l] += ar[l] * br[l] + ai[l] * bi[l];
                im[l] += ar[l] * bi[l] - ai[l] * br[l];
            }
        }
        let mut out = C64::new(re.iter().sum(), im.iter().sum());
        for k in chunks..self.re.len() {
            out += C64::new(self.re[k], -self.im[k]) * C64::new(other.re[k], other.im[k]);
        }
        out
    }

    /// `self += c x`.
    fn axpy(&mut self, c: C64, x: &Split) {
        for k in 0..self.re.len() {
            self.re[k] += c.re * x.re[k] - c.im * x.im[k];
            self.im[k] += c.re * x.im[k] + c.im * x.re[k];
        }
    }

    fn norm(&self) -> f64 {
        self.dot(self).re.sqrt()
    }

    fn scale(&mut self, c: f64) {
        self.re.iter_mut().chain(self.im.iter_mut()).for_each(|x| *x *= c);
    }
}

/// Largest eigenpair of the symmetric tridiagonal matrix with diagonal
/// `alphas` and off-diagonal `betas`.
fn top_ritz(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let eig = t.symmetric_eigen();
    let mut best = 0;
    for i in 1..k {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    let v: DVector<f64> = eig.eigenvectors.column(best).into_owned();
    (eig.eigenvalues[best], v.iter().copied().collect())
}

/// Singular values of the dense operator, for tests and small studies.
pub fn dense_singular_values(op: &KroneckerSum) -> Result<Vec<f64>> {
    Ok(singular_values(&op.dense(DENSE_MAX_DIM * DENSE_MAX_DIM)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_gaussian_matrix, EnsembleKind};

    fn instance(n_terms: usize, n: usize, seed: u64) -> (CMatrix, Vec<CMatrix>, Vec<CMatrix>) {
        let s = RandomSeed(seed);
        let y1 = (0..n_terms)
            .map(|i| sample_gaussian_matrix(n, EnsembleKind::GaussianComplex, s.derive(i as u64)).unwrap())
            .collect();
        let y2 = (0..n_terms)
            .map(|i| sample_gaussian_matrix(n, EnsembleKind::GaussianComplex, s.derive(100 + i as u64)).unwrap())
            .collect();
        let mut rng = s.derive(999).rng();
        let a = random_unit_vector(&mut rng, n_terms * n_terms, Field::Complex);
        (CMatrix::from_row_slice(n_terms, n_terms, &a), y1, y2)
    }

    #[test]
    fn factored_apply_matches_dense() {
        let (a, y1, y2) = instance(3, 5, 1);
        let op = KroneckerSum::new(&a, &y1, &y2).unwrap();
        let dense = op.dense(1 << 20).unwrap();
        let mut rng = RandomSeed(2).rng();
        let v = random_unit_vector(&mut rng, 25, Field::Complex);
        let dv = &dense * DVector::from_column_slice(&v);
        let dav = dense.adjoint() * DVector::from_column_slice(&v);
        let zv = op.apply(&v);
        let zav = op.apply_adjoint(&v);
        let fv = op.fast().apply(&v);
        let fav = op.fast().apply_adjoint(&v);
        for k in 0..25 {
            assert!((dv[k] - zv[k]).norm() < 1e-12);
            assert!((dav[k] - zav[k]).norm() < 1e-12);
            assert!((dv[k] - fv[k]).norm() < 1e-5);
            assert!((dav[k] - fav[k]).norm() < 1e-5);
        }
    }

    #[test]
    fn lanczos_matches_dense_svd() {
        for seed in 0..3 {
            let (a, y1, y2) = instance(2, 12, 10 + seed);
            let op = KroneckerSum::new(&a, &y1, &y2).unwrap();
            let dense = op.spectral_dense().unwrap();
            let cfg = LanczosConfig {
                tolerance: 1e-9,
                max_steps: 144,
            };
            let lz = op.fast().top_singular(&cfg, RandomSeed(seed));
            assert!((dense.value - lz.value).abs() < 1e-5 * dense.value, "{} vs {}", dense.value, lz.value);
            let zv = op.apply(&lz.right);
            let resid: f64 = zv.iter().zip(&lz.left).map(|(a, b)| (a - b * lz.value).norm_sqr()).sum::<f64>().sqrt();
            assert!(resid < 1e-3 * lz.value);
        }
    }

    #[test]
    fn single_term_is_a_product_of_norms() {
        let (_, y1, y2) = instance(1, 6, 3);
        let one = CMatrix::from_element(1, 1, C64::new(1.0, 0.0));
        let op = KroneckerSum::new(&one, &y1, &y2).unwrap();
        let expect = singular_values(&y1[0])[0] * singular_values(&y2[0])[0];
        assert!((op.spectral_dense().unwrap().value - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn coupling_reproduces_the_bilinear_value() {
        let (a, y1, y2) = instance(3, 4, 7);
        let op = KroneckerSum::new(&a, &y1, &y2).unwrap();
        let t = op.spectral_dense().unwrap();
        let c = KroneckerSum::coupling(&t.left, &t.right, &y1, &y2);
        let paired: C64 = a.iter().zip(c.iter()).map(|(x, y)| x * y).sum();
        assert!((paired.norm() - t.value).abs() < 1e-10 * t.value);
    }
}
