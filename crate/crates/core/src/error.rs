use thiserror::Error;

use crate::netcore::Network;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid link ({i}, {j}) for {n} players")]
    InvalidLink { i: usize, j: usize, n: usize },
    #[error("player {player} out of range for {n} players")]
    PlayerOutOfRange { player: usize, n: usize },
    #[error("player count {n} outside 1..={max}")]
    PlayerCount { n: usize, max: usize },
    #[error("objects belong to different player sets ({left} vs {right} players)")]
    PlayerSetMismatch { left: usize, right: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("game is not component additive; witness network {witness}")]
    NotComponentAdditive { witness: Network },
    #[error("probability {value} outside [0, 1]")]
    InvalidProbability { value: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("conditioning event has zero probability")]
    ZeroProbabilityCondition,
    #[error("duplicate entry for network {0}")]
    DuplicateNetwork(Network),
    #[error("the empty network must have value 0, got {0}")]
    NonzeroEmptyValue(f64),
    #[error("{what} has {size} links, above the enumeration cap of {cap}")]
    TooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("allocation rule paid {payoff} to player {player}, isolated in {network}")]
    IsolatedPayoff {
        player: usize,
        network: Network,
        payoff: f64,
    },
    #[error("malformed problem: {0}")]
    Parse(String),
}

impl Error {
    pub fn is_size_cap(&self) -> bool {
        matches!(self, Error::TooLarge { .. } | Error::PlayerCount { .. })
    }
}
