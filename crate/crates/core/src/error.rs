use thiserror::Error;

/// Everything that can go wrong across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A documented precondition on an argument was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The matrix that was supposed to act as a metric has a significantly
    /// negative eigenvalue, so it is not a Gram matrix of anything.
    #[error("matrix is indefinite: eigenvalue {eigenvalue:.6e} is negative beyond tolerance")]
    Indefinite { eigenvalue: f64 },

    /// Every eigenvalue fell below the truncation threshold; the matrix
    /// carries no usable spectral content.
    #[error("matrix is numerically zero: no eigenvalue above the truncation threshold")]
    NumericallyZero,

    /// The iterative diagonalization ran out of sweeps. Does not happen for
    /// finite symmetric input at the orders this crate targets.
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:.6e})")]
    NoConvergence { sweeps: usize, off_diagonal: f64 },

    /// The state being predicted has no component inside the span the model
    /// was able to resolve.
    #[error("state outside model span")]
    OutsideModelSpan,

    /// A moment vector was produced under a different basis or normalization
    /// than the object consuming it.
    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// A text file did not parse; `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// The file declares a format revision this build does not understand.
    #[error("unsupported format version {found} (this build reads version {expected})")]
    FormatVersion { found: u32, expected: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
