use thiserror::Error;

/// Errors raised by instance construction, profile validation and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The instance description is malformed (bad lengths, elements out of range, ...).
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    /// A size bound was exceeded.
    #[error("{what} is {got}, limit is {limit}")]
    TooLarge {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("w(empty set) must be 0, got {0}")]
    NonZeroEmptyWeight(f64),

    #[error("negative weight {weight} on feasible set {set}")]
    NegativeWeight { set: String, weight: f64 },

    /// A membership profile is not a point of the product of simplices.
    #[error("invalid membership profile: {0}")]
    InvalidProfile(String),

    /// Some feasible set is supported by some but not all of its members.
    #[error(
        "initial profile violates the support requirement on {set}: {supported} of {size} members"
    )]
    SupportRequirement {
        set: String,
        supported: usize,
        size: usize,
    },

    #[error("profile is not a vertex profile: element {0} has a fractional row")]
    NotVertex(usize),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    /// The requested operation does not apply to this kind of instance.
    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Brute-force enumeration would exceed its node budget.
    #[error("oracle size guard exceeded: {0}")]
    OracleGuard(String),

    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
