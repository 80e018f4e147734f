use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown instruction `{name}` at line {line}")]
    UnknownInstruction { name: String, line: usize },
    #[error(
        "record reference rec[-{lookback}] out of range ({available} measurements available) at {location}"
    )]
    RecordOutOfRange {
        lookback: u32,
        available: usize,
        location: String,
    },
    #[error("malformed token `{token}` at position {position}")]
    MalformedToken { token: String, position: usize },
    #[error("dangling separator at position {position}")]
    DanglingSeparator { position: usize },
    #[error("invalid distance {0}: must be at least 2")]
    InvalidDistance(usize),
    #[error("variant {variant:?} does not match the parity of distance {distance}")]
    VariantMismatch { distance: usize, variant: String },
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error("operator measured by the schedule is never compared: {0}")]
    DetectorRule(String),
    #[error("noise parameter out of range: {0}")]
    NoiseRange(String),
    #[error("circuit is not valid: {0}")]
    InvalidCircuit(String),
    #[error("detector {0} is not deterministic")]
    NonDeterministicDetector(usize),
    #[error("mechanism with symptom {0} cannot be decomposed into graphlike parts")]
    Undecomposable(String),
    #[error("mechanism probability {0} is not in (0, 0.5)")]
    BadProbability(f64),
    #[error("syndrome has odd parity in a component without boundary")]
    UnmatchableSyndrome,
    #[error("too many mechanisms for exhaustive decoding: {0} > 25")]
    TooManyMechanisms(usize),
    #[error("no crossing found: {0}")]
    NoCrossing(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("malformed file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
