//! On-disk document formats: the canonical PMF file, Markov model file,
//! report documents, and the simulation config.
//!
//! Exponents and log-moments in reports are unit-scaled (nats by default,
//! bits with `--bits`); linear moments are unit-free. Possibly-infinite
//! values serialize as the string `"infinity"` so they survive JSON.

use serde::{Deserialize, Serialize};

use guesswork::{MarkovModel, Pmf, Result};

use crate::error::{CliError, CliResult};

/// A real number that may be infinite; JSON is a plain number when finite
/// and the string `"infinity"` otherwise.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonReal {
    Finite(f64),
    Marker(String),
}

impl From<f64> for JsonReal {
    fn from(v: f64) -> Self {
        if v.is_finite() {
            JsonReal::Finite(v)
        } else {
            JsonReal::Marker("infinity".into())
        }
    }
}

/// Canonical PMF file: `{"symbols": [...], "probs": [...], "source_hash"?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PmfDoc {
    pub symbols: Vec<String>,
    pub probs: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source_hash: Option<String>,
}

impl PmfDoc {
    pub fn from_pmf(p: &Pmf, source_hash: Option<String>) -> Self {
        Self {
            symbols: p.symbols().to_vec(),
            probs: p.probs().to_vec(),
            source_hash,
        }
    }

    pub fn into_pmf(self) -> Result<Pmf> {
        Pmf::renormalized(self.symbols, self.probs)
    }
}

/// Markov model file: `{"states": [...], "transitions": [[...]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkovDoc {
    pub states: Vec<String>,
    pub transitions: Vec<Vec<f64>>,
}

impl MarkovDoc {
    pub fn from_model(m: &MarkovModel) -> Self {
        Self {
            states: m.states().to_vec(),
            transitions: m.transitions().to_vec(),
        }
    }

    pub fn into_model(self) -> Result<MarkovModel> {
        MarkovModel::new(self.states, self.transitions)
    }
}

/// One point of a plot-ready curve; rows of the curves CSV.
#[derive(Debug, Clone, Serialize)]
pub struct CurvePoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

// ---------------------------------------------------------------------------
// simulation config
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SourceSpec {
    Iid { pmf: String, n: u32 },
    Markov { model: String, n: u32 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StrategySpec {
    /// Optimal i.i.d. guessing: tilt the source by `1/(1+rho)`.
    IidTilt { label: String, rho: f64 },
    /// Naive i.i.d. guessing from the source distribution itself.
    IidSource { label: String },
    /// i.i.d. guessing from an explicit PMF file.
    IidPmf { label: String, pmf: String },
    SharedList { label: String },
    ReplicatedList { label: String },
    Partitioned { label: String, partition: String },
    /// Optimal Markov guessing chain derived from a Markov source.
    MarkovGuesser { label: String, rho: f64 },
    /// Markov guessing from an explicit model file.
    MarkovModel { label: String, model: String },
}

impl StrategySpec {
    pub fn label(&self) -> &str {
        match self {
            StrategySpec::IidTilt { label, .. }
            | StrategySpec::IidSource { label }
            | StrategySpec::IidPmf { label, .. }
            | StrategySpec::SharedList { label }
            | StrategySpec::ReplicatedList { label }
            | StrategySpec::Partitioned { label, .. }
            | StrategySpec::MarkovGuesser { label, .. }
            | StrategySpec::MarkovModel { label, .. } => label,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScheduleSpec {
    RoundRobin,
    RandomInterleave { seed: u64 },
    WorstCase,
    Explicit { prefix: Vec<(usize, u64)> },
}

impl ScheduleSpec {
    pub fn label(&self) -> String {
        match self {
            ScheduleSpec::RoundRobin => "round-robin".into(),
            ScheduleSpec::RandomInterleave { seed } => format!("random-{seed}"),
            ScheduleSpec::WorstCase => "worst-case".into(),
            ScheduleSpec::Explicit { .. } => "explicit".into(),
        }
    }
}

fn default_agents() -> usize {
    1
}

fn default_rho() -> f64 {
    1.0
}

/// The `simulate` section of the run config.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub source: SourceSpec,
    #[serde(default = "default_agents")]
    pub agents: usize,
    pub strategies: Vec<StrategySpec>,
    pub schedules: Vec<ScheduleSpec>,
    pub trials: u64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default)]
    pub trace: bool,
    #[serde(default)]
    pub success_curve: bool,
}

/// One cell of the simulate output: a strategy/schedule pair.
#[derive(Debug, Clone, Serialize)]
pub struct SimCell {
    pub strategy: String,
    pub schedule: String,
    pub stats: guesswork::SimStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_mean: Option<JsonReal>,
}

/// An entry consumed by `report`: an analytic value next to a simulated
/// estimate with its standard error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonEntry {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<String>>,
    pub analytic: f64,
    pub simulated: f64,
    pub std_error: f64,
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> CliResult<T> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_slice(&bytes)
        .map_err(|e| CliError::input(format!("cannot parse {}: {e}", path.display())))
}

pub fn read_pmf(path: &std::path::Path) -> CliResult<Pmf> {
    Ok(read_json::<PmfDoc>(path)?.into_pmf()?)
}

pub fn read_markov(path: &std::path::Path) -> CliResult<MarkovModel> {
    Ok(read_json::<MarkovDoc>(path)?.into_model()?)
}
