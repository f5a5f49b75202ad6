use thiserror::Error;

/// Errors produced by distribution construction, analytic solvers, oracles,
/// and the attack simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric overflow in {0}")]
    NumericOverflow(&'static str),

    #[error("support mismatch: {0}")]
    SupportMismatch(String),

    #[error("matrix is reducible; an irreducible chain is required")]
    ReducibleChain,

    #[error("iteration did not converge after {0} steps")]
    NonConvergence(u64),

    #[error("problem size exceeds the desk-scale cap: {0}")]
    SizeCap(String),

    #[error("invalid attack plan: {0}")]
    InvalidPlan(String),

    #[error("no strategy covers the target and no query budget is set")]
    NoCoverage,

    #[error("all agents must use the same strategy kind for this check")]
    MixedStrategies,
}

pub type Result<T> = std::result::Result<T, Error>;
