//! CLI error type carrying the process exit code: 1 for computation
//! failures, 2 for input problems.

use std::fmt;

#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            exit_code: 2,
        }
    }

    pub fn compute(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            exit_code: 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl From<guesswork::Error> for CliError {
    fn from(e: guesswork::Error) -> Self {
        use guesswork::Error::*;
        match e {
            // bad inputs: malformed or inconsistent data fed to the tool
            InvalidDistribution(_) | SupportMismatch(_) | InvalidPlan(_) | ReducibleChain => {
                CliError::input(e.to_string())
            }
            // everything else is a computation failure
            Domain(_) | NumericOverflow(_) | NonConvergence(_) | SizeCap(_) | NoCoverage
            | MixedStrategies => CliError::compute(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
