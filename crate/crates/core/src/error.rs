use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count {0} outside supported range 1..={max}", max = crate::qsim::MAX_QUBITS)]
    QubitCount(usize),

    #[error("qubit index {index} out of range for {n_qubits}-qubit state")]
    QubitIndex { index: usize, n_qubits: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid action {action} for environment with {n_actions} actions")]
    InvalidAction { action: usize, n_actions: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("missing classical baseline for {0}")]
    MissingBaseline(String),

    #[error("nothing to render")]
    EmptyCurves,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
