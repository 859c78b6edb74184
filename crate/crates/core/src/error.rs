use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid switch position {0}, expected 1, 2 or 3")]
    InvalidSwitchPosition(i64),

    #[error("invalid instruction set token {0:?}: expected a permutation of R, G, F")]
    InvalidInstructionSet(String),

    #[error("malformed probability {0:?}")]
    MalformedProbability(String),

    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(String),

    #[error("invalid collapse mode {0:?}")]
    InvalidCollapseMode(String),

    #[error("invalid setting policy {0:?}")]
    InvalidSettingPolicy(String),

    #[error("invalid source {0:?}")]
    InvalidSource(String),

    #[error("number of trials must be at least 1")]
    ZeroTrials,

    #[error("tally is empty")]
    EmptyTally,

    #[error("no data for setting pair {{{0},{1}}}")]
    MissingPairData(u8, u8),

    #[error("{0}")]
    InvalidArgument(String),
}
