use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error("not a unimodular lattice basis: {0}")]
    InvalidLattice(String),
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    #[error("move or referee does not match the game variant: {0}")]
    WrongVariant(String),
    #[error("parameter too large: {0}")]
    ParameterTooLarge(String),
    #[error("transversality fails: {0}")]
    NotTransversal(String),
    #[error("configuration error: {0}")]
    Configuration(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
