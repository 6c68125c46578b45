use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration document failed validation. Each issue names the
    /// offending field.
    #[error("invalid configuration:\n{}", .issues.iter().map(|i| format!("  - {i}")).collect::<Vec<_>>().join("\n"))]
    InvalidConfig { issues: Vec<String> },

    /// A lookup by id failed.
    #[error("unknown cell id {0}")]
    UnknownCell(usize),

    #[error("unknown sap id {0}")]
    UnknownSap(usize),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    /// A scalar argument was outside its mathematical domain.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// Exhaustive enumeration was asked for a profile space above the cap.
    #[error("profile space of size {size} exceeds enumeration cap {cap}")]
    CapacityExceeded { size: u128, cap: u128 },

    /// A learning payoff left [0, 1] after normalization.
    #[error("normalized payoff {value} for player {player} is outside [0, 1]")]
    PayoffOutOfRange { player: usize, value: f64 },

    /// An action profile did not match the game shape.
    #[error("invalid action profile: {0}")]
    InvalidProfile(String),

    #[error("metric `{metric}` is not defined for this game/run: {msg}")]
    MetricUnavailable { metric: &'static str, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(issue: impl Into<String>) -> Self {
        Error::InvalidConfig { issues: vec![issue.into()] }
    }

    pub fn domain(op: &'static str, msg: impl Into<String>) -> Self {
        Error::Domain { op, msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
