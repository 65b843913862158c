//! Explicit and implicit order-`d` tensors and their multilinear forms.
//!
//! Index layout: multi-indices are linearized row-major (last index fastest).
//! A [`GaussianPairForm`] of local dimension `N` and order `d` is the tensor
//! in `(l_2^{N^2})^{⊗d}` whose coefficient at `((i_1,i'_1),…,(i_d,i'_d))` is
//! `g[i_1…i_d] · g'[i'_1…i'_d]`, where mode `m` uses the index
//! `i_m * N + i'_m`. Equivalently, a mode vector of length `N^2` is an `N x N`
//! matrix stored row-major.
//!
//! Pairing convention: every form is evaluated bilinearly, without
//! conjugation, `Z(x_1,…,x_d) = Σ coeff(i) Π x_m(i_m)`. For the pair form
//! this is `Z(R_1,…,R_d) = g^T (R_1 ⊗ … ⊗ R_d) g'`, which for real data is
//! `⟨(R_1 ⊗ … ⊗ R_d) g', g⟩`. Hilbert-Schmidt inner products of tensors,
//! `⟨A, B⟩ = Σ A conj(B)`, are therefore `Z(conj(B))`.

use rayon::prelude::*;

use crate::bases::UnitaryBasis;
use crate::ensembles::{gaussian_entries, EnsembleKind, RandomSeed};
use crate::error::{dimension, domain, Error, Result};
use crate::linalg::{from_row_major, hs_norm, singular_values, to_row_major, vec_norm};
use crate::{CMatrix, Field, C64};

/// Default cap on the number of entries any dense conversion may allocate.
pub const DEFAULT_MATERIALIZATION_CAP: usize = 100_000_000;

fn check_cap(what: &'static str, requested: u128, cap: usize) -> Result<()> {
    if requested > cap as u128 {
        Err(Error::Resource {
            what,
            requested,
            cap: cap as u128,
        })
    } else {
        Ok(())
    }
}

/// A multilinear form paired bilinearly with one vector per mode.
pub trait MultilinearForm: Sync {
    /// Length of the vector each mode is paired with.
    fn mode_dims(&self) -> Vec<usize>;

    fn field(&self) -> Field;

    /// `Z(x_1,…,x_d)`.
    fn evaluate_vectors(&self, vectors: &[Vec<C64>]) -> Result<C64>;

    /// The coefficients `c` with `Z = Σ_i c_i x_mode(i)` when every other
    /// mode is held fixed.
    fn mode_gradient_vector(&self, vectors: &[Vec<C64>], mode: usize) -> Result<Vec<C64>>;

    fn order(&self) -> usize {
        self.mode_dims().len()
    }

    fn check_vectors(&self, vectors: &[Vec<C64>]) -> Result<()> {
        let dims = self.mode_dims();
        if vectors.len() != dims.len() {
            return Err(dimension(format!(
                "expected {} mode vectors, got {}",
                dims.len(),
                vectors.len()
            )));
        }
        for (m, (v, &d)) in vectors.iter().zip(&dims).enumerate() {
            if v.len() != d {
                return Err(dimension(format!(
                    "mode {m} vector has length {}, expected {d}",
                    v.len()
                )));
            }
        }
        Ok(())
    }
}

/// Explicit order-`d` coefficient array.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<C64>,
    field: Field,
}

impl DenseTensor {
    /// Builds a tensor; the field is `Real` iff every entry is real.
    pub fn new(dims: Vec<usize>, data: Vec<C64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(domain(format!("invalid tensor dims {dims:?}")));
        }
        let count: usize = dims.iter().product();
        if count != data.len() {
            return Err(dimension(format!(
                "dims {dims:?} need {count} entries, got {}",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(domain("tensor entries must be finite"));
        }
        let field = Field::detect(&data);
        Ok(DenseTensor { dims, data, field })
    }

    pub fn from_real(dims: Vec<usize>, data: &[f64]) -> Result<Self> {
        Self::new(dims, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Outer product `v_1 ⊗ … ⊗ v_d`.
    pub fn outer(vectors: &[Vec<C64>]) -> Result<Self> {
        let dims: Vec<usize> = vectors.iter().map(Vec::len).collect();
        let mut data = vec![C64::new(1.0, 0.0)];
        for v in vectors {
            data = kron_vec(&data, v);
        }
        Self::new(dims, data)
    }

    /// Standard Gaussian tensor (`E|entry|^2 = 1`).
    pub fn sample_gaussian(dims: Vec<usize>, kind: EnsembleKind, seed: RandomSeed, cap: usize) -> Result<Self> {
        let count: u128 = dims.iter().map(|&d| d as u128).product();
        check_cap("gaussian tensor", count, cap)?;
        let field = match kind {
            EnsembleKind::GaussianReal => Field::Real,
            EnsembleKind::GaussianComplex => Field::Complex,
            other => return Err(domain(format!("{other:?} is not a Gaussian ensemble"))),
        };
        let data = gaussian_entries(&mut seed.rng(), count as usize, field, 1.0);
        Self::new(dims, data)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn linear_index(&self, index: &[usize]) -> usize {
        index
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn get(&self, index: &[usize]) -> C64 {
        self.data[self.linear_index(index)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        vec_norm(&self.data)
    }

    pub fn scaled(&self, c: C64) -> DenseTensor {
        let data: Vec<C64> = self.data.iter().map(|z| z * c).collect();
        DenseTensor {
            dims: self.dims.clone(),
            field: Field::detect(&data),
            data,
        }
    }

    /// Applies `matrix` (rows x dims[mode]) along `mode`.
    pub fn mode_product(&self, mode: usize, matrix: &CMatrix) -> Result<DenseTensor> {
        if mode >= self.dims.len() || matrix.ncols() != self.dims[mode] {
            return Err(dimension(format!(
                "mode {mode} product with a {}x{} matrix on dims {:?}",
                matrix.nrows(),
                matrix.ncols(),
                self.dims
            )));
        }
        let a = to_row_major(matrix);
        let data = apply_axis(&self.data, &self.dims, mode, &a, matrix.nrows());
        let mut dims = self.dims.clone();
        dims[mode] = matrix.nrows();
        Self::new(dims, data)
    }

    /// Interprets an order-2 tensor as a matrix.
    pub fn as_matrix(&self) -> Result<CMatrix> {
        if self.dims.len() != 2 {
            return Err(domain("only order-2 tensors are matrices"));
        }
        Ok(from_row_major(self.dims[0], self.dims[1], &self.data))
    }
}

/// `a ⊗ b` for flat vectors, `a`'s index outermost.
fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        out.extend(b.iter().map(|&y| x * y));
    }
    out
}

/// `out[o, r, in] = Σ_a mat[r, a] data[o, a, in]` for a row-major `mat`
/// with `rows` rows.
fn apply_axis(data: &[C64], dims: &[usize], axis: usize, mat: &[C64], rows: usize) -> Vec<C64> {
    let outer: usize = dims[..axis].iter().product();
    let width = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product();
    let mut out = vec![C64::new(0.0, 0.0); outer * rows * inner];
    for o in 0..outer {
        let src = &data[o * width * inner..(o + 1) * width * inner];
        let dst = &mut out[o * rows * inner..(o + 1) * rows * inner];
        for r in 0..rows {
            let row = &mut dst[r * inner..(r + 1) * inner];
            for a in 0..width {
                let coef = mat[r * width + a];
                if coef == C64::new(0.0, 0.0) {
                    continue;
                }
                let col = &src[a * inner..(a + 1) * inner];
                for (y, &x) in row.iter_mut().zip(col) {
                    *y += coef * x;
                }
            }
        }
    }
    out
}

/// Tensor product of the given vectors (empty product is `[1]`).
fn weights(vectors: &[Vec<C64>]) -> Vec<C64> {
    vectors
        .iter()
        .fold(vec![C64::new(1.0, 0.0)], |acc, v| kron_vec(&acc, v))
}

impl MultilinearForm for DenseTensor {
    fn mode_dims(&self) -> Vec<usize> {
        self.dims.clone()
    }

    fn field(&self) -> Field {
        self.field
    }

    fn evaluate_vectors(&self, vectors: &[Vec<C64>]) -> Result<C64> {
        let c = self.mode_gradient_vector(vectors, 0)?;
        Ok(c.iter().zip(&vectors[0]).map(|(a, b)| a * b).sum())
    }

    fn mode_gradient_vector(&self, vectors: &[Vec<C64>], mode: usize) -> Result<Vec<C64>> {
        self.check_vectors(vectors)?;
        if mode >= self.dims.len() {
            return Err(dimension(format!("mode {mode} out of range")));
        }
        let w_outer = weights(&vectors[..mode]);
        let w_inner = weights(&vectors[mode + 1..]);
        let width = self.dims[mode];
        let inner = w_inner.len();
        let mut c = vec![C64::new(0.0, 0.0); width];
        for (o, &wo) in w_outer.iter().enumerate() {
            for (a, ca) in c.iter_mut().enumerate() {
                let base = (o * width + a) * inner;
                let s: C64 = self.data[base..base + inner]
                    .iter()
                    .zip(&w_inner)
                    .map(|(x, w)| x * w)
                    .sum();
                *ca += wo * s;
            }
        }
        Ok(c)
    }
}

/// Square mode matrices `R_1,…,R_d` with cached norms.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeMatrices {
    mats: Vec<CMatrix>,
    hs_norms: Vec<f64>,
    op_norms: Vec<f64>,
}

impl ModeMatrices {
    pub fn new(mats: Vec<CMatrix>) -> Result<Self> {
        let n = mats
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| domain("at least one mode matrix is required"))?;
        for (m, a) in mats.iter().enumerate() {
            if a.nrows() != n || a.ncols() != n {
                return Err(dimension(format!(
                    "mode {m} matrix is {}x{}, expected {n}x{n}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(domain(format!("mode {m} matrix has non-finite entries")));
            }
        }
        let hs_norms = mats.iter().map(hs_norm).collect();
        let op_norms = mats
            .iter()
            .map(|m| singular_values(m).first().copied().unwrap_or(0.0))
            .collect();
        Ok(ModeMatrices {
            mats,
            hs_norms,
            op_norms,
        })
    }

    pub fn identities(n: usize, order: usize) -> Self {
        Self::new(vec![CMatrix::identity(n, n); order]).expect("identities are valid")
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.mats
    }

    pub fn size(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn hs_norms(&self) -> &[f64] {
        &self.hs_norms
    }

    pub fn op_norms(&self) -> &[f64] {
        &self.op_norms
    }

    /// Same matrices with `mode` replaced.
    pub fn with_mode(&self, mode: usize, mat: CMatrix) -> Result<Self> {
        let mut mats = self.mats.clone();
        mats[mode] = mat;
        Self::new(mats)
    }

    fn flat(&self) -> Vec<Vec<C64>> {
        self.mats.iter().map(to_row_major).collect()
    }
}

/// The implicit tensor `Σ g(i) g'(i') e_{i_1 i'_1} ⊗ … ⊗ e_{i_d i'_d}`
/// carried by two vectors of length `N^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPairForm {
    n: usize,
    order: usize,
    g: Vec<C64>,
    g_prime: Vec<C64>,
    field: Field,
}

impl GaussianPairForm {
    pub fn new(n: usize, order: usize, g: Vec<C64>, g_prime: Vec<C64>) -> Result<Self> {
        if n == 0 || order < 2 {
            return Err(domain(format!(
                "pair form needs N >= 1 and order >= 2, got N={n}, d={order}"
            )));
        }
        let len = (n as u128).pow(order as u32);
        if g.len() as u128 != len || g_prime.len() as u128 != len {
            return Err(dimension(format!(
                "g and g' must have length N^d = {len}, got {} and {}",
                g.len(),
                g_prime.len()
            )));
        }
        let finite = |v: &[C64]| v.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite(&g) || !finite(&g_prime) {
            return Err(domain("g and g' must be finite"));
        }
        if vec_norm(&g) == 0.0 || vec_norm(&g_prime) == 0.0 {
            return Err(domain("g and g' must be nonzero"));
        }
        let field = if Field::detect(&g) == Field::Real && Field::detect(&g_prime) == Field::Real {
            Field::Real
        } else {
            Field::Complex
        };
        Ok(GaussianPairForm {
            n,
            order,
            g,
            g_prime,
            field,
        })
    }

    /// Draws `g` and `g'` independently from one seed.
    pub fn sample(n: usize, order: usize, kind: EnsembleKind, seed: RandomSeed) -> Result<Self> {
        let field = match kind {
            EnsembleKind::GaussianReal => Field::Real,
            EnsembleKind::GaussianComplex => Field::Complex,
            other => return Err(domain(format!("{other:?} is not a Gaussian ensemble"))),
        };
        if n == 0 || order < 2 {
            return Err(domain(format!(
                "pair form needs N >= 1 and order >= 2, got N={n}, d={order}"
            )));
        }
        let len = n.checked_pow(order as u32).ok_or_else(|| domain("N^d overflows"))?;
        let mut rng = seed.rng();
        let g = gaussian_entries(&mut rng, len, field, 1.0);
        let g_prime = gaussian_entries(&mut rng, len, field, 1.0);
        Self::new(n, order, g, g_prime)
    }

    /// The same data viewed over another field. Solvers use the field to
    /// decide whether mode vectors may be complex.
    pub fn with_field(mut self, field: Field) -> Result<Self> {
        if field == Field::Real && (Field::detect(&self.g) == Field::Complex || Field::detect(&self.g_prime) == Field::Complex) {
            return Err(domain("complex data cannot be viewed over the real field"));
        }
        self.field = field;
        Ok(self)
    }

    pub fn local_dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn g(&self) -> &[C64] {
        &self.g
    }

    pub fn g_prime(&self) -> &[C64] {
        &self.g_prime
    }

    pub fn g_norm(&self) -> f64 {
        vec_norm(&self.g)
    }

    pub fn g_prime_norm(&self) -> f64 {
        vec_norm(&self.g_prime)
    }

    /// Bilinear pairing `Σ g_a g'_a`, the value at identity matrices.
    pub fn pairing(&self) -> C64 {
        self.g.iter().zip(&self.g_prime).map(|(a, b)| a * b).sum()
    }

    fn shape(&self) -> Vec<usize> {
        vec![self.n; self.order]
    }

    fn check_mats(&self, mats: &ModeMatrices) -> Result<()> {
        if mats.len() != self.order || mats.size() != self.n {
            return Err(dimension(format!(
                "form needs {} matrices of size {}x{}, got {} of size {}",
                self.order,
                self.n,
                self.n,
                mats.len(),
                mats.size()
            )));
        }
        Ok(())
    }

    /// `g'` with the row-major `mats[k]` applied along every axis except `skip`.
    fn apply_all_but(&self, mats: &[Vec<C64>], skip: Option<usize>, order: &[usize]) -> Vec<C64> {
        let shape = self.shape();
        let mut h = self.g_prime.clone();
        for &k in order {
            if Some(k) != skip {
                h = apply_axis(&h, &shape, k, &mats[k], self.n);
            }
        }
        h
    }

    fn evaluate_flat(&self, mats: &[Vec<C64>], order: &[usize]) -> C64 {
        let h = self.apply_all_but(mats, None, order);
        self.g.iter().zip(&h).map(|(a, b)| a * b).sum()
    }

    fn gradient_flat(&self, mats: &[Vec<C64>], mode: usize) -> Vec<C64> {
        let natural: Vec<usize> = (0..self.order).collect();
        let h = self.apply_all_but(mats, Some(mode), &natural);
        let n = self.n;
        let outer = n.pow(mode as u32);
        let inner = n.pow((self.order - mode - 1) as u32);
        let mut grad = vec![C64::new(0.0, 0.0); n * n];
        for o in 0..outer {
            for a in 0..n {
                let ga = &self.g[(o * n + a) * inner..(o * n + a + 1) * inner];
                for b in 0..n {
                    let hb = &h[(o * n + b) * inner..(o * n + b + 1) * inner];
                    let s: C64 = ga.iter().zip(hb).map(|(x, y)| x * y).sum();
                    grad[a * n + b] += s;
                }
            }
        }
        grad
    }

    /// `Z(R_1,…,R_d) = Σ g(i) g'(i') Π R_m[i_m, i'_m]`, computed by `d`
    /// successive mode contractions in `O(d N^{d+1})`.
    pub fn evaluate_form(&self, mats: &ModeMatrices) -> Result<C64> {
        let natural: Vec<usize> = (0..self.order).collect();
        self.evaluate_form_in_order(mats, &natural)
    }

    /// [`evaluate_form`](Self::evaluate_form) with the modes contracted in
    /// the given order.
    pub fn evaluate_form_in_order(&self, mats: &ModeMatrices, order: &[usize]) -> Result<C64> {
        self.check_mats(mats)?;
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (0..self.order).collect::<Vec<_>>() {
            return Err(domain(format!("{order:?} is not a permutation of the modes")));
        }
        Ok(self.evaluate_flat(&mats.flat(), order))
    }

    /// The `N x N` matrix `G` with `Z = Σ_{a,b} G[a,b] R_mode[a,b]` when the
    /// other modes are held fixed. `mode` is 0-based.
    ///
    /// Under the bilinear pairing the maximizer of `|Z|` over the unit
    /// Hilbert-Schmidt ball is `conj(G) / ‖G‖_HS`, attaining `‖G‖_HS`.
    pub fn mode_gradient(&self, mats: &ModeMatrices, mode: usize) -> Result<CMatrix> {
        self.check_mats(mats)?;
        if mode >= self.order {
            return Err(dimension(format!("mode {mode} out of range for order {}", self.order)));
        }
        Ok(from_row_major(self.n, self.n, &self.gradient_flat(&mats.flat(), mode)))
    }

    /// Order-`d` dense tensor with dims `(N^2,…,N^2)`.
    pub fn to_dense(&self, cap: usize) -> Result<DenseTensor> {
        let count = (self.n as u128).pow(2 * self.order as u32);
        check_cap("dense pair tensor", count, cap)?;
        let len = self.g.len();
        let n = self.n;
        // Spread each multi-index's digits to stride N^2 per mode; the dense
        // position of (i, i') is then N * spread(i) + spread(i').
        let spread: Vec<usize> = (0..len)
            .map(|mut idx| {
                let mut s = 0;
                let mut stride = 1;
                for _ in 0..self.order {
                    s += (idx % n) * stride;
                    idx /= n;
                    stride *= n * n;
                }
                s
            })
            .collect();
        let mut data = vec![C64::new(0.0, 0.0); count as usize];
        for (i, &gi) in self.g.iter().enumerate() {
            let base = n * spread[i];
            for (j, &gj) in self.g_prime.iter().enumerate() {
                data[base + spread[j]] = gi * gj;
            }
        }
        DenseTensor::new(vec![n * n; self.order], data)
    }

    /// The `N^d x N^d` rank-one matrix `g g'^T`.
    pub fn reshape_bipartite(&self, cap: usize) -> Result<CMatrix> {
        let len = self.g.len();
        check_cap("bipartite reshape", (len as u128) * (len as u128), cap)?;
        Ok(CMatrix::from_fn(len, len, |i, j| self.g[i] * self.g_prime[j]))
    }

    /// Coefficients `T̂(a_1,…,a_d) = N^{-d} ⟨T, u_{a_1} ⊗ … ⊗ u_{a_d}⟩` of the
    /// tensor in the product basis built from `bases`.
    ///
    /// Computed as a change of basis on each mode of the dense tensor; see
    /// [`epr_coefficient`](Self::epr_coefficient) for the single-entry path
    /// through [`evaluate_form`](Self::evaluate_form).
    pub fn epr_coefficients(&self, bases: &[UnitaryBasis], cap: usize) -> Result<DenseTensor> {
        self.check_bases(bases)?;
        let mut t = self.to_dense(cap)?;
        let nn = self.n * self.n;
        for (m, basis) in bases.iter().enumerate() {
            let rows: Vec<Vec<C64>> = basis
                .elements()
                .iter()
                .map(|u| to_row_major(u).iter().map(|z| z.conj()).collect())
                .collect();
            let change = CMatrix::from_fn(nn, nn, |a, k| rows[a][k]);
            t = t.mode_product(m, &change)?;
        }
        let scale = (self.n as f64).powi(-(self.order as i32));
        Ok(t.scaled(C64::new(scale, 0.0)))
    }

    /// One coefficient of [`epr_coefficients`](Self::epr_coefficients),
    /// evaluated as `N^{-d} Z(conj(u_{a_1}),…,conj(u_{a_d}))`.
    pub fn epr_coefficient(&self, bases: &[UnitaryBasis], index: &[usize]) -> Result<C64> {
        self.check_bases(bases)?;
        if index.len() != self.order {
            return Err(dimension("index length must equal the order"));
        }
        let mats = index
            .iter()
            .zip(bases)
            .map(|(&a, b)| {
                b.elements()
                    .get(a)
                    .map(|u| u.map(|z| z.conj()))
                    .ok_or_else(|| dimension(format!("basis index {a} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        let z = self.evaluate_form(&ModeMatrices::new(mats)?)?;
        Ok(z * (self.n as f64).powi(-(self.order as i32)))
    }

    fn check_bases(&self, bases: &[UnitaryBasis]) -> Result<()> {
        if bases.len() != self.order {
            return Err(dimension(format!(
                "need {} bases, got {}",
                self.order,
                bases.len()
            )));
        }
        if let Some(b) = bases.iter().find(|b| b.local_dim() != self.n) {
            return Err(dimension(format!(
                "basis of local dimension {} does not match N = {}",
                b.local_dim(),
                self.n
            )));
        }
        Ok(())
    }
}

impl MultilinearForm for GaussianPairForm {
    fn mode_dims(&self) -> Vec<usize> {
        vec![self.n * self.n; self.order]
    }

    fn field(&self) -> Field {
        self.field
    }

    fn evaluate_vectors(&self, vectors: &[Vec<C64>]) -> Result<C64> {
        self.check_vectors(vectors)?;
        let natural: Vec<usize> = (0..self.order).collect();
        Ok(self.evaluate_flat(vectors, &natural))
    }

    fn mode_gradient_vector(&self, vectors: &[Vec<C64>], mode: usize) -> Result<Vec<C64>> {
        self.check_vectors(vectors)?;
        if mode >= self.order {
            return Err(dimension(format!("mode {mode} out of range")));
        }
        Ok(self.gradient_flat(vectors, mode))
    }
}

/// Materializes the dense tensor of every form in parallel.
pub fn to_dense_all(forms: &[GaussianPairForm], cap: usize) -> Result<Vec<DenseTensor>> {
    forms.par_iter().map(|f| f.to_dense(cap)).collect()
}
