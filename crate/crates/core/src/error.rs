use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("field is not supported in the declared band: {0}")]
    BandViolation(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("exponent {name} = {value} is outside the admissible window ({lower}, {upper})")]
    InadmissibleExponent {
        name: &'static str,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("the endpoint (p, q, s) = (inf, inf, -1) is excluded")]
    ExcludedEndpoint,

    #[error("CFL violation: number {number:.4} exceeds limit {limit:.4} ({kind})")]
    CflViolation {
        kind: &'static str,
        number: f64,
        limit: f64,
    },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("checkpoint checksum mismatch (stored {stored}, computed {computed})")]
    ChecksumMismatch { stored: String, computed: String },

    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),

    #[error("extension refused: {0}")]
    ExtensionRefused(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
