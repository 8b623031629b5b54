use thiserror::Error;

/// Errors produced by the model, receiver and experiment layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty payload")]
    EmptyPayload,

    #[error("bit value {0} is not antipodal (expected -1 or +1)")]
    NotAntipodal(i8),

    #[error("symbol {0} out of range 0..=15")]
    SymbolOutOfRange(u8),

    #[error("coded payload needs a multiple of 8 bits, got {0}")]
    CodedLength(usize),

    #[error("expected {expected} chips, got {got}")]
    ChipCount { expected: usize, got: usize },

    #[error("interferer index {index} out of range ({count} interferers)")]
    InterfererIndex { index: usize, count: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
