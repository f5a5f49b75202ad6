pub mod exponents;
pub mod ingest;
pub mod markov;
pub mod moments;
pub mod report;
pub mod simulate;
pub mod tilt;
pub mod zipf;

use crate::error::{CliError, CliResult};

/// Parse a `lo:hi:steps` grid specification.
pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::input(format!(
            "grid {spec:?} must look like lo:hi:steps"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::input(format!("grid bound {:?}", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::input(format!("grid bound {:?}", parts[1])))?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|_| CliError::input(format!("grid step count {:?}", parts[2])))?;
    if steps < 2 || !(hi > lo) {
        return Err(CliError::input(format!("degenerate grid {spec:?}")));
    }
    Ok((0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect())
}

/// A verification failure is a computation error (exit code 1).
pub fn verify_failed(what: impl std::fmt::Display) -> CliError {
    CliError::compute(format!("verification failed: {what}"))
}
