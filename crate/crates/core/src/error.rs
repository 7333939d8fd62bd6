use thiserror::Error;

/// Errors raised by protocol construction, initialization and the engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("bit width {0} outside 1..=64")]
    InvalidWidth(u32),
    #[error("width mismatch: {left} vs {right}")]
    WidthMismatch { left: u32, right: u32 },
    #[error("value {value} does not fit in {width} bits")]
    ValueOutOfRange { value: u64, width: u32 },
    #[error("bit index {index} out of range for width {width}")]
    IndexOutOfRange { index: u32, width: u32 },
    #[error("invalid population: {0}")]
    InvalidPopulation(String),
    #[error("parameter `{name}` violates `{constraint}`: {detail}")]
    InvalidParameter {
        name: &'static str,
        constraint: &'static str,
        detail: String,
    },
    #[error("BIT sampling requires a bitwise-independent protocol, `{0}` is not")]
    NotBitwiseIndependent(String),
    #[error("init value {value} outside domain [0, {domain}) for agent {agent}")]
    InitOutOfDomain { agent: usize, value: u64, domain: u64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, constraint: &'static str, detail: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        constraint,
        detail: detail.into(),
    }
}
