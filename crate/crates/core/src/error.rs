use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |M - M^H| = {asymmetry:.3e} exceeds tolerance {tol:.1e}")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("trace {trace} deviates from 1 by more than {tol:.1e}")]
    TraceDeviation { trace: f64, tol: f64 },

    #[error("smallest eigenvalue {value:.3e} is below -{tol:.1e}")]
    NegativeEigenvalue { value: f64, tol: f64 },

    #[error("eigendecomposition did not converge")]
    ConvergenceFailure,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("expectation value has imaginary residue {imag:.3e} beyond {tol:.1e}")]
    NonRealExpectation { imag: f64, tol: f64 },

    #[error("state vector norm {norm} deviates from 1 by more than {tol:.1e}")]
    NormDeviation { norm: f64, tol: f64 },

    #[error("entry {index} is not finite")]
    NonFinite { index: usize },

    #[error("entry count {found} does not match {rows}x{cols}")]
    EntryCount {
        found: usize,
        rows: usize,
        cols: usize,
    },

    #[error("channel has no Kraus operators")]
    EmptyKraus,

    #[error("Kraus completeness violated: max |sum A^H A - I| = {deviation:.3e}")]
    IncompleteKraus { deviation: f64 },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("swap indices are equal ({index})")]
    EqualIndices { index: usize },

    #[error("permutation is not a bijection on 0..{dim}")]
    NotABijection { dim: usize },

    #[error("n_max must be at least 2; the witness construction is defined only for N > 1 (got {n_max})")]
    InvalidN { n_max: usize },

    #[error("exhaustive search enumerates dim! permutations and is limited to dim <= 8 (got {dim}); use the random strategy instead")]
    DimensionTooLargeForExhaustive { dim: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
