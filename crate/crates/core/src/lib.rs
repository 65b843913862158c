//! Numerical laboratory for random multilinear forms built from Gaussian
//! pairs: injective-norm estimators, Weyl unitary bases, tripartite Bell
//! ratios and random-matrix moment studies.
//!
//! Scalars are stored as [`C64`] throughout; the [`Field`] tag records
//! whether an object is real-valued, which controls how solvers initialize
//! and which unimodular scalars they may use.

pub mod bases;
pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod kron;
pub mod linalg;
pub mod norms;
pub mod stats;
pub mod tensor;

pub use bases::{verify_basis, weyl_basis, BasisReport, UnitaryBasis};
pub use ensembles::{derive_seed, EnsembleKind, RandomSeed};
pub use error::{Error, Result};
pub use norms::{EstimateResult, SolverConfig};
pub use tensor::{DenseTensor, GaussianPairForm, ModeMatrices, MultilinearForm};

use serde::{Deserialize, Serialize};

pub use num_complex::Complex64 as C64;

/// Dense complex matrix (column-major, as stored by nalgebra).
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Scalar field an object lives over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// `Real` iff every value has an exactly zero imaginary part.
    pub fn detect<'a>(values: impl IntoIterator<Item = &'a C64>) -> Field {
        if values.into_iter().all(|z| z.im == 0.0) {
            Field::Real
        } else {
            Field::Complex
        }
    }
}
