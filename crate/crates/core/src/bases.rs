//! Unitary orthogonal bases of `M_N` (clock-and-shift construction).

use serde::{Deserialize, Serialize};

use crate::error::{dimension, domain, Result};
use crate::linalg::singular_values;
use crate::{CMatrix, C64};

/// Defects below this count as a valid basis.
pub const BASIS_TOLERANCE: f64 = 1e-8;

/// A family of `N x N` matrices meant to be `N^2` pairwise
/// Hilbert-Schmidt-orthogonal unitaries. Construction checks shapes only;
/// use [`verify_basis`] for the algebraic properties.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryBasis {
    n: usize,
    elements: Vec<CMatrix>,
}

impl UnitaryBasis {
    pub fn new(n: usize, elements: Vec<CMatrix>) -> Result<Self> {
        if n == 0 {
            return Err(domain("basis local dimension must be positive"));
        }
        if elements.len() != n * n {
            return Err(dimension(format!(
                "a basis of M_{n} needs {} elements, got {}",
                n * n,
                elements.len()
            )));
        }
        if let Some(u) = elements.iter().find(|u| u.nrows() != n || u.ncols() != n) {
            return Err(dimension(format!(
                "element is {}x{}, expected {n}x{n}",
                u.nrows(),
                u.ncols()
            )));
        }
        Ok(UnitaryBasis { n, elements })
    }

    pub fn local_dim(&self) -> usize {
        self.n
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }

    /// Coefficients `N^{-1} tr(u_a^* A)`.
    pub fn coefficients(&self, a: &CMatrix) -> Vec<C64> {
        let scale = 1.0 / self.n as f64;
        self.elements
            .iter()
            .map(|u| u.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum::<C64>() * scale)
            .collect()
    }

    /// `Σ c_a u_a`.
    pub fn expand(&self, coeffs: &[C64]) -> CMatrix {
        let mut out = CMatrix::zeros(self.n, self.n);
        for (u, &c) in self.elements.iter().zip(coeffs) {
            out += u * c;
        }
        out
    }
}

/// `exp(2πi k / n)`, exact at multiples of a quarter turn.
pub fn root_of_unity(k: usize, n: usize) -> C64 {
    let k = k % n;
    if (4 * k) % n == 0 {
        return match 4 * k / n {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / n as f64)
}

/// The `N^2` products `X^a Z^b`, indexed `a * N + b`, where
/// `X e_k = e_{k+1 mod N}` and `Z = diag(ω^k)` with `ω = exp(2πi/N)`.
pub fn weyl_basis(n: usize) -> Result<UnitaryBasis> {
    if n == 0 {
        return Err(domain("weyl_basis needs N >= 1"));
    }
    let mut elements = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            // (X^a Z^b)[j, k] = ω^{bk} when j = k + a (mod N)
            let mut u = CMatrix::zeros(n, n);
            for k in 0..n {
                u[((k + a) % n, k)] = root_of_unity(b * k, n);
            }
            elements.push(u);
        }
    }
    UnitaryBasis::new(n, elements)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisReport {
    /// Largest `‖u^* u − I‖_op` over elements.
    pub unitarity_defect: f64,
    /// Largest `|tr(u_a^* u_b)|` over pairs `a != b`.
    pub orthogonality_defect: f64,
    pub pass: bool,
}

pub fn verify_basis(basis: &UnitaryBasis) -> BasisReport {
    let n = basis.local_dim();
    let identity = CMatrix::identity(n, n);
    let unitarity_defect = basis
        .elements()
        .iter()
        .map(|u| singular_values(&(u.adjoint() * u - &identity))[0])
        .fold(0.0, f64::max);
    let els = basis.elements();
    let mut orthogonality_defect: f64 = 0.0;
    for a in 0..els.len() {
        for b in a + 1..els.len() {
            let t: C64 = els[a].iter().zip(els[b].iter()).map(|(x, y)| x.conj() * y).sum();
            orthogonality_defect = orthogonality_defect.max(t.norm());
        }
    }
    BasisReport {
        unitarity_defect,
        orthogonality_defect,
        pass: unitarity_defect < BASIS_TOLERANCE && orthogonality_defect < BASIS_TOLERANCE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_gaussian_matrix, EnsembleKind, RandomSeed};

    fn trace_pair(a: &CMatrix, b: &CMatrix) -> C64 {
        a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn n1_is_the_unit_scalar() {
        let b = weyl_basis(1).unwrap();
        assert_eq!(b.elements(), &[CMatrix::from_element(1, 1, C64::new(1.0, 0.0))]);
    }

    #[test]
    fn n2_is_the_pauli_family() {
        let b = weyl_basis(2).unwrap();
        let r = |v: [f64; 4]| CMatrix::from_row_slice(2, 2, &v.map(|x| C64::new(x, 0.0)));
        assert_eq!(b.elements()[0], r([1.0, 0.0, 0.0, 1.0]));
        assert_eq!(b.elements()[1], r([1.0, 0.0, 0.0, -1.0]));
        assert_eq!(b.elements()[2], r([0.0, 1.0, 1.0, 0.0]));
        assert_eq!(b.elements()[3], r([0.0, -1.0, 1.0, 0.0]));
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 2.0 } else { 0.0 };
                assert_eq!(trace_pair(&b.elements()[i], &b.elements()[j]), C64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn exhaustive_orthogonality_up_to_eight() {
        for n in 1..=8 {
            let b = weyl_basis(n).unwrap();
            for (i, x) in b.elements().iter().enumerate() {
                for (j, y) in b.elements().iter().enumerate() {
                    let expect = if i == j { n as f64 } else { 0.0 };
                    assert!((trace_pair(x, y) - C64::new(expect, 0.0)).norm() < 1e-12);
                }
            }
            assert!(verify_basis(&b).pass);
        }
    }

    #[test]
    fn scaled_element_fails_unitarity() {
        let mut els = weyl_basis(4).unwrap().elements().to_vec();
        els[5] *= C64::new(1.1, 0.0);
        let r = verify_basis(&UnitaryBasis::new(4, els).unwrap());
        assert!(!r.pass);
        assert!((r.unitarity_defect - 0.21).abs() < 1e-12);
    }

    #[test]
    fn repeated_element_fails_orthogonality() {
        let mut els = weyl_basis(3).unwrap().elements().to_vec();
        els[4] = els[2].clone();
        let r = verify_basis(&UnitaryBasis::new(3, els).unwrap());
        assert!(!r.pass);
        assert!((r.orthogonality_defect - 3.0).abs() < 1e-12);
    }

    #[test]
    fn basis_spans_all_matrices() {
        for n in [2, 3, 5] {
            let b = weyl_basis(n).unwrap();
            let a = sample_gaussian_matrix(n, EnsembleKind::GaussianComplex, RandomSeed(n as u64)).unwrap();
            let back = b.expand(&b.coefficients(&a));
            assert!((back - a).iter().all(|z| z.norm() < 1e-10));
        }
    }

    #[test]
    fn wrong_shapes_are_rejected() {
        assert!(UnitaryBasis::new(2, vec![CMatrix::identity(2, 2)]).is_err());
        assert!(UnitaryBasis::new(1, vec![CMatrix::identity(2, 2)]).is_err());
        assert!(weyl_basis(0).is_err());
    }
}
