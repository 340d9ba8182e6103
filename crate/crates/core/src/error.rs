use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{n_qubits} qubits exceeds the configured cap of {cap}")]
    DimensionExceeded { n_qubits: usize, cap: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("operator is not Hermitian (max |A - A†| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("trace is {trace:.12}, expected 1")]
    BadTrace { trace: f64 },

    #[error("operator is not positive semidefinite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("SLD equation inconsistent: residual {residual:.3e} after kernel handling")]
    InconsistentDerivative { residual: f64 },

    #[error("outcome {label} has zero probability but nonzero tr(E L rho) = {magnitude:.3e}")]
    UndefinedLambda { label: String, magnitude: f64 },

    #[error("outcome {label} has zero probability but nonzero derivative {derivative:.3e}")]
    SingularOutcome { label: String, derivative: f64 },

    #[error("Fisher information {0} is not positive; the Cramér-Rao bound is unbounded")]
    Unbounded(f64),

    #[error("estimation model is degenerate: {0}")]
    DegenerateModel(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no feasible solution found (best residual {best_residual:.3e})")]
    Infeasible { best_residual: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
