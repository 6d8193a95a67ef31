use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "live branch count exceeded the cap of {cap}; raise the prune threshold or sample trajectories instead"
    )]
    ResourceLimit { cap: usize },

    #[error("integrability classification is only defined for the Ising variant")]
    UnsupportedClassification,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("threshold undefined: Hamiltonian constant c_H is zero")]
    UndefinedThreshold,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
