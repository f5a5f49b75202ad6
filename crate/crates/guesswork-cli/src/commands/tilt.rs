//! `tilt`: exponential tilt of a PMF file.

use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;
use serde_json::json;

use guesswork::{optimal_list, tilt};

use crate::commands::verify_failed;
use crate::error::{CliError, CliResult};
use crate::schema::{read_pmf, PmfDoc};
use crate::Context;

#[derive(Debug, Clone, Args)]
pub struct TiltArgs {
    /// PMF JSON file
    #[arg(long)]
    pub pmf: Option<PathBuf>,

    /// Tilt exponent (must be positive)
    #[arg(long)]
    pub theta: Option<f64>,

    /// Name of the emitted PMF file inside the output directory
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
struct TiltSection {
    pmf: Option<PathBuf>,
    theta: Option<f64>,
    output: Option<String>,
}

pub fn run(ctx: &Context, args: TiltArgs) -> CliResult<()> {
    let section: TiltSection = ctx.section("tilt")?;
    let pmf_path = args
        .pmf
        .or(section.pmf)
        .ok_or_else(|| CliError::input("tilt needs --pmf"))?;
    let theta = args
        .theta
        .or(section.theta)
        .ok_or_else(|| CliError::input("tilt needs --theta"))?;
    let output = args
        .output
        .or(section.output)
        .unwrap_or_else(|| "tilted_pmf.json".into());

    let p = read_pmf(&pmf_path)?;
    let tilted = tilt(&p, theta)?;

    if ctx.verify {
        // inverting the tilt must recover the input
        let back = tilt(&tilted, 1.0 / theta)?;
        for (a, b) in back.probs().iter().zip(p.probs()) {
            if (a - b).abs() > 1e-9 {
                return Err(verify_failed("tilt inversion drifted beyond 1e-9"));
            }
        }
        if optimal_list(&tilted).order() != optimal_list(&p).order() {
            return Err(verify_failed("tilt reordered the optimal list"));
        }
    }

    let written = ctx.out.write_json(&output, &PmfDoc::from_pmf(&tilted, None))?;
    ctx.out.write_resolved_config(&json!({
        "command": "tilt",
        "pmf": pmf_path,
        "theta": theta,
        "output": output,
        "unit": ctx.unit.label(),
        "seed": ctx.seed,
        "verify": ctx.verify,
    }))?;
    println!("tilted {} symbols by {theta} -> {}", p.len(), written.display());
    Ok(())
}
