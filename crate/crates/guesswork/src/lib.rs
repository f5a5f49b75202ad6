//! Guesswork analytics for brute-force attacks.
//!
//! The number of queries an attacker needs before hitting a secret drawn
//! from a known distribution is the fundamental cost of a brute-force
//! attack. This crate computes that cost and the strategies that optimize
//! it, for a single synchronized guesser and for distributed agents whose
//! queries arrive in an arbitrary (even adversarial) order:
//!
//! - [`pmf`]: finite distributions, exponential tilting, empirical
//!   ingestion;
//! - [`info`]: Shannon/Rényi entropies, divergences, the entropy-matching
//!   tilt solver;
//! - [`zipf`]: PDF- and CDF-Zipf password models;
//! - [`analytics`]: optimal-list moments, moment bounds, growth exponents,
//!   optimal i.i.d. guessing distributions, mismatched-tilt losses,
//!   budget-limited guesswork;
//! - [`markov`]: Markov sources and the eigenvector-derived optimal
//!   guessing chain;
//! - [`exponents`]: breach-probability exponents under a guess budget;
//! - [`sim`]: a seeded, reproducible Monte Carlo attack simulator;
//! - [`oracle`]: deliberately naive brute-force references that every
//!   analytic path is tested against.
//!
//! All analytic quantities are in nats (natural logarithms) unless stated
//! otherwise. Every public type is an immutable value after construction;
//! all operations are pure and thread-safe.

pub mod analytics;
pub mod error;
pub mod exponents;
pub mod info;
pub mod markov;
pub mod oracle;
pub mod pmf;
pub mod sim;
pub mod zipf;

pub use analytics::{
    arikan_bounds, conditional_optimal_iid, exact_guesswork_moment, iid_g_moment_numeric,
    iid_success_probability, iid_v_moment, j_guesswork_exponent, mismatch_exponent, optimal_iid_distribution,
    optimal_list, sync_exponent, AnalyticMoment, GuessList, MomentKind, MomentParam,
};
pub use error::{Error, Result};
pub use exponents::{
    async_success_exponent, async_success_exponent_restricted, failure_exponent, in_guess_list,
    min_beta_async_exponent, sync_success_exponent, threshold_type, ExponentReport, ListGrowthRate,
    SolverKind,
};
pub use info::{
    cross_entropy, entropy_matching_tilt, kl_divergence, renyi_entropy, shannon_entropy,
};
pub use markov::{
    markov_sync_exponent, markov_v_moment, optimal_markov_guesser, perron,
    tilted_transition_matrix, MarkovModel, PerronData,
};
pub use oracle::{
    exhaustive_guesswork, exhaustive_list_moment, interleaving_search, simplex_grid_min,
    truncated_series_moment, OracleMethod, OracleResult,
};
pub use pmf::{conditional_tilt, empirical_from_counts, tilt, ConditionalPmf, Pmf};
pub use sim::{
    derive_seed, estimate_exponent, ks_statistic, monte_carlo, run_trial, run_trials,
    schedule_invariance_check, summarize, worst_case_deterministic, AttackPlan, ExponentFit,
    ExponentPoint, GuessStrategy, InvarianceReport, PartitionKind, Schedule, SimStats,
    SourceModel, TrialRecord,
};
pub use zipf::{generalized_harmonic, zipf_pmf, ZipfSpec, ZipfVariant};
