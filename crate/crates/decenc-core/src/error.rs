//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not prime (or is too small to host a generator)")]
    NotPrime(u64),
    #[error("division by zero in GF(q)")]
    DivisionByZero,
    #[error("order {order} does not divide q-1 = {qm1}")]
    OrderNotDividing { order: u64, qm1: u64 },
    #[error("index {value} out of range [0, {bound})")]
    OutOfRange { value: u64, bound: u64 },
    #[error("evaluation points must be pairwise distinct")]
    DuplicatePoints,
    #[error("diagonal scalar at position {0} is zero")]
    ZeroScalar(usize),
    #[error("matrix is singular")]
    Singular,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("bad shape: {0}")]
    BadShape(String),
    #[error("port constraint violated at round {round}: processor {proc} {kind}")]
    PortViolation {
        round: usize,
        proc: usize,
        kind: PortViolationKind,
    },
    #[error("phi table is not injective (value {0} repeats)")]
    PhiNotInjective(u64),
    #[error("phi value {value} outside [0, {bound})")]
    PhiOutOfRange { value: u64, bound: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PortViolationKind {
    /// More than `p` outgoing messages in one round.
    TooManySends,
    /// More than `p` incoming messages in one round.
    TooManyReceives,
}

impl std::fmt::Display for PortViolationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PortViolationKind::TooManySends => write!(f, "sends through more than p ports"),
            PortViolationKind::TooManyReceives => write!(f, "receives through more than p ports"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
