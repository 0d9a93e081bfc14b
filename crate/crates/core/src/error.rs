use thiserror::Error;

/// Errors surfaced by the simulator, the environment and the wire protocol.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("unknown config field `{0}`")]
    UnknownConfigField(String),

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error("positions file: {0}")]
    Positions(String),

    #[error("empty beamforming selection")]
    EmptySelection,

    #[error("sink node {0} is dead")]
    DeadSink(usize),

    #[error("no alive nodes left")]
    NetworkDead,

    #[error("protocol: {0}")]
    Protocol(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
