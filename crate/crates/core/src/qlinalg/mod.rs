//! Dense complex linear algebra and tensor-product operator construction.

mod eig;
mod expm;
mod layout;
mod matrix;

pub use eig::{eig_nonhermitian, hermitian_eigenvalues, inner, norm2, EigenPair, Eigensystem, MAX_EIG_DIM};
pub use expm::matrix_exponential;
pub use layout::{annihilator, embed, ModeLayout, Operator};
pub use matrix::{dagger, kron, ComplexMatrix};

pub use num_complex::Complex64 as C64;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    Shape { expected: (usize, usize), found: (usize, usize) },
    #[error("matrix is not square: {0:?}")]
    NotSquare((usize, usize)),
    #[error("non-finite entry")]
    NonFinite,
    #[error("invalid mode layout {0:?}: need [2, >=2, >=2]")]
    InvalidLayout([usize; 3]),
    #[error("site {0} out of range for a three-mode layout")]
    SiteOutOfRange(usize),
    #[error("dimension {dim} exceeds supported maximum {max}")]
    TooLarge { dim: usize, max: usize },
    #[error("Schur iteration did not converge")]
    NoConvergence,
    #[error("singular system in Padé solve")]
    Singular,
}
