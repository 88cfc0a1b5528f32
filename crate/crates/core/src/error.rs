use thiserror::Error;

pub type Result<T, E = QgoError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QgoError {
    #[error("line {line}: syntax error near `{token}`: {message}")]
    Syntax {
        line: usize,
        token: String,
        message: String,
    },
    #[error("line {line}: unsupported gate `{token}`")]
    UnsupportedGate { line: usize, token: String },
    #[error("line {line}: qubit index {index} out of range for register of size {size}")]
    QubitOutOfRange {
        line: usize,
        index: usize,
        size: usize,
    },
    #[error("line {line}: gate after measurement on qubit {qubit}")]
    GateAfterMeasurement { line: usize, qubit: usize },
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("topology: {0}")]
    Topology(String),
    #[error("routing: {0}")]
    Routing(String),
    #[error("circuit is not mapped: gate {gate} acts on ({a}, {b}) which is not a topology edge")]
    Unmapped { gate: usize, a: usize, b: usize },
    #[error("partition: {0}")]
    Partition(String),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("{0} qubits exceeds the simulation limit of {1}")]
    TooManyQubits(usize, usize),
    #[error("parameter vector has length {got}, template expects {expected}")]
    ParamLength { expected: usize, got: usize },
    #[error("compose: {0}")]
    Compose(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl QgoError {
    /// Errors caused by bad user input rather than an internal fault.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, QgoError::Invariant(_))
    }
}
