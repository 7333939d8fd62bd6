use std::fmt;

/// One violated constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub key: String,
    pub constraint: String,
    pub got: String,
}

impl Violation {
    pub fn new(key: impl fmt::Display, constraint: impl fmt::Display, got: impl fmt::Display) -> Self {
        Self { key: key.to_string(), constraint: constraint.to_string(), got: got.to_string() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} (got {})", self.key, self.constraint, self.got)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(String),
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("{}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("unknown sweep axis {0:?}")]
    UnknownAxis(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(Violation::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("quantile must lie in (0, 1), got {0}")]
    Quantile(f64),
    #[error("pilot trial {trial} (seed {seed}) did not converge within {max_rounds} rounds")]
    PilotDiverged { trial: u64, seed: u64, max_rounds: u64 },
    #[error("thread pool: {0}")]
    Threads(String),
    #[error(transparent)]
    Core(#[from] tinypull_core::Error),
}
