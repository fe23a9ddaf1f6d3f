use crate::mdp::{Action, State};

/// Errors produced by the solver, simulator and codec.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{name} must be a positive integer, got {value}")]
    NonPositive { name: &'static str, value: usize },
    #[error("file size {file_size} is not a multiple of the coding window {window}")]
    WindowDoesNotDivide { file_size: usize, window: usize },
    #[error("connectivity probability must lie in (0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("packet count {x} outside [0, {file_size}]")]
    PacketOutOfRange { x: usize, file_size: usize },
    #[error("batch {batch} outside [0, {last}]")]
    BatchOutOfRange { batch: usize, last: usize },
    #[error("state ({}, {}) outside the {file_size}-packet state space", .state.x0, .state.x1)]
    StateOutOfRange { state: State, file_size: usize },
    #[error("action {action:?} is not legal in state ({}, {})", .state.x0, .state.x1)]
    IllegalAction { state: State, action: Action },
    #[error("terminal state has no outgoing transitions")]
    TerminalState,
    #[error("the two-receiver MDP requires N = 2, got N = {0}")]
    RequiresTwoReceivers(usize),
    #[error("policy table covers {got} packets but the config has F = {expected}")]
    PolicySizeMismatch { expected: usize, got: usize },
    #[error("{decision_states} decision states give 2^{decision_states} policies, above the cap of {cap}")]
    EnumerationTooLarge { decision_states: usize, cap: u64 },
    #[error("at least 2 trials are required, got {0}")]
    TooFewTrials(u64),
    #[error("trial exceeded the ceiling of {0} slots")]
    SlotCeiling(u64),
    #[error("zero has no multiplicative inverse in GF(256)")]
    ZeroInverse,
    #[error("expected {expected} source packets, got {got}")]
    WrongPacketCount { expected: usize, got: usize },
    #[error("packet length {got} differs from {expected}")]
    PacketLengthMismatch { expected: usize, got: usize },
    #[error("packet of batch {got} offered to the decoder of batch {expected}")]
    BatchMismatch { expected: usize, got: usize },
    #[error("decoder rank {rank} is below the window {window}")]
    NotDecodable { rank: usize, window: usize },
    #[error("decoded batch {0} differs from the source data")]
    DecodeMismatch(usize),
    #[error("unknown {kind} {value:?}")]
    Unknown { kind: &'static str, value: String },
    #[error("csv output failed: {0}")]
    Csv(String),
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Csv(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
