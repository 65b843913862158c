//! Small dense linear-algebra helpers shared by the modules.

use crate::{CMatrix, C64};

/// Entries of `m` in row-major order.
pub fn to_row_major(m: &CMatrix) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

pub fn from_row_major(rows: usize, cols: usize, data: &[C64]) -> CMatrix {
    CMatrix::from_row_slice(rows, cols, data)
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Kronecker product with the row index of `a` outermost.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// `tr |M|^p = tr (M* M)^{p/2}` for even `p >= 2`.
pub fn trace_abs_power_even(m: &CMatrix, p: u32) -> f64 {
    debug_assert!(p >= 2 && p % 2 == 0);
    let h = m.adjoint() * m;
    let mut acc = h.clone();
    for _ in 1..p / 2 {
        acc = &acc * &h;
    }
    acc.trace().re
}

/// Projection onto the span of the eigenvectors of the `r` largest
/// eigenvalues of the Hermitian matrix `h`.
pub fn top_eigenprojector(h: &CMatrix, r: usize) -> CMatrix {
    let n = h.nrows();
    let herm = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut p = CMatrix::zeros(n, n);
    for &k in order.iter().take(r) {
        let v = eig.eigenvectors.column(k);
        p += v * v.adjoint();
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_major_round_trip() {
        let m = CMatrix::from_fn(2, 3, |i, j| C64::new(i as f64, j as f64));
        let flat = to_row_major(&m);
        assert_eq!(flat[1], C64::new(0.0, 1.0));
        assert_eq!(from_row_major(2, 3, &flat), m);
    }

    #[test]
    fn kron_matches_definition() {
        let a = CMatrix::from_fn(2, 2, |i, j| C64::new((i * 2 + j) as f64 + 1.0, 0.0));
        let b = CMatrix::from_fn(2, 2, |i, j| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0));
        let k = kron(&a, &b);
        assert_eq!(k[(0, 2)], a[(0, 1)]);
        assert_eq!(k[(3, 3)], a[(1, 1)]);
        assert_eq!(k[(1, 0)], C64::new(0.0, 0.0));
    }

    #[test]
    fn trace_power_of_identity() {
        let i = CMatrix::identity(3, 3) * C64::new(2.0, 0.0);
        assert!((trace_abs_power_even(&i, 4) - 3.0 * 16.0).abs() < 1e-12);
    }

    #[test]
    fn top_projector_picks_largest_eigenvalues() {
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(1.0, 0.0),
            C64::new(5.0, 0.0),
            C64::new(-3.0, 0.0),
        ]));
        let p = top_eigenprojector(&d, 1);
        assert!((p[(1, 1)].re - 1.0).abs() < 1e-12);
        assert!(p[(0, 0)].norm() < 1e-12);
    }
}
