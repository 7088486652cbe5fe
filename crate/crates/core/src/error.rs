use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("syndrome {syndrome} is outside the decodable set")]
    Undecodable { syndrome: String },

    #[error("word is not a codeword of C1")]
    NotInCode,

    #[error("basis repetition {r} does not divide length {total} evenly for seed length {seed}")]
    Repetition { seed: usize, r: usize, total: usize },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("not enough bits: need {need}, have {have}")]
    NotEnoughBits { need: usize, have: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("degenerate state: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
