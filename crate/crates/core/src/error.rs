use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid Pauli character {0:?} (expected one of I, X, Y, Z)")]
    InvalidPauli(char),

    #[error("system size {0} is not supported (1..={max})", max = crate::pauli::MAX_SITES)]
    UnsupportedSize(usize),

    #[error("term coefficient must be finite and nonzero, got {0}")]
    InvalidCoefficient(f64),

    #[error("terms {0} and {1} do not commute; commuting shift is not available")]
    NonCommutingTerms(usize, usize),

    #[error("invalid model parameter: {0}")]
    InvalidModel(String),

    #[error("dense oracle limited to {max} sites, got {got}")]
    DenseBudget { max: usize, got: usize },

    #[error("register of {got} qubits exceeds the cap of {max}")]
    QubitCap { max: usize, got: usize },

    #[error("index {index} out of range (< {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("unknown ancilla state label {0:?}")]
    UnknownAncillaState(String),

    #[error("register shapes differ: ({0}, {1}) vs ({2}, {3})")]
    ShapeMismatch(usize, usize, usize, usize),

    #[error("invalid estimator budget: {0}")]
    InvalidBudget(String),

    #[error("expansion order {n} exceeds cutoff {cutoff}")]
    OrderAboveCutoff { n: usize, cutoff: usize },

    #[error("operation requires {0} shift mode")]
    WrongShiftMode(&'static str),

    #[error("invalid chain parameters: {0}")]
    InvalidChainParams(String),

    #[error("no samples in the post-burn-in window")]
    EmptyWindow,

    #[error("state is not a basis state of the configured chain basis")]
    NotABasisState,

    #[error("enumeration of {0} configurations exceeds the budget")]
    EnumerationBudget(u128),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
