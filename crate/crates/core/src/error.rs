use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M^H| = {0:e})")]
    NonHermitianInput(f64),
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquareInput { rows: usize, cols: usize },
    #[error("matrix is singular or numerically singular")]
    SingularMatrix,
    #[error("matrix is not positive definite (curvature {0:e})")]
    NotPositiveDefinite(f64),
    #[error("iterative solver hit the iteration cap ({0})")]
    MaxIterationsExceeded(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("index {index} out of range for {len} slots")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("gate acts on {expected} qubits but {got} targets were given")]
    ArityMismatch { expected: usize, got: usize },
    #[error("qubit {0} is used more than once by one gate")]
    DuplicateTarget(usize),
    #[error("circuit contains a measurement")]
    ContainsMeasurement,
    #[error("{what} too large: {size} (limit {limit})")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("matrix is not unitary (max |U^H U - I| = {0:e})")]
    NotUnitary(f64),
    #[error("no qubits selected for measurement")]
    EmptyMeasurementSet,
    #[error("postselected branch has zero probability ({0:e})")]
    ZeroProbabilityBranch(f64),
    #[error("controlled powers are inconsistent at clock qubit {clock} (deviation {deviation:e})")]
    SpecInconsistent { clock: usize, deviation: f64 },
    #[error("right-hand side is the zero vector")]
    ZeroRhs,
    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error(
        "inversion constant must be positive and not exceed the smallest clock eigenvalue, got {0}"
    )]
    InvalidC(f64),
    #[error("postselection failed: success probability {0:e}")]
    PostselectionFailed(f64),
    #[error("unphysical noise model: {0}")]
    UnphysicalModel(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
