//! `markov`: optimal guessing chain and growth exponent for a Markov
//! password source.

use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use guesswork::{
    markov_sync_exponent, optimal_markov_guesser, perron, tilt, tilted_transition_matrix,
};

use crate::commands::verify_failed;
use crate::error::{CliError, CliResult};
use crate::schema::{read_markov, MarkovDoc};
use crate::Context;

#[derive(Debug, Clone, Args)]
pub struct MarkovArgs {
    /// Markov model JSON file ({"states": [...], "transitions": [[...]]})
    #[arg(long)]
    pub model: Option<PathBuf>,

    /// Guesswork moment of interest
    #[arg(long)]
    pub rho: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
struct MarkovSection {
    model: Option<PathBuf>,
    rho: Option<f64>,
}

#[derive(Debug, Serialize)]
struct MarkovReport {
    unit: &'static str,
    rho: f64,
    states: Vec<String>,
    perron_eigenvalue: f64,
    exponent: f64,
    stationary: Vec<f64>,
    guesser_stationary: Vec<f64>,
}

pub fn run(ctx: &Context, args: MarkovArgs) -> CliResult<()> {
    let section: MarkovSection = ctx.section("markov")?;
    let model_path = args
        .model
        .or(section.model)
        .ok_or_else(|| CliError::input("markov needs --model"))?;
    let rho = args
        .rho
        .or(section.rho)
        .ok_or_else(|| CliError::input("markov needs --rho"))?;

    let source = read_markov(&model_path)?;
    let w = tilted_transition_matrix(&source, rho)?;
    let pd = perron(&w)?;
    let exponent = markov_sync_exponent(&source, rho)?;
    let guesser = optimal_markov_guesser(&source, rho)?;

    if ctx.verify {
        for (i, row) in guesser.transitions().iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-10 {
                return Err(verify_failed(format!("guesser row {i} sums to {sum}")));
            }
        }
        // identical-rows sources must collapse to the i.i.d. tilt
        let first = &source.transitions()[0];
        let rank_one = source
            .transitions()
            .iter()
            .all(|row| row.iter().zip(first).all(|(a, b)| (a - b).abs() < 1e-15));
        if rank_one {
            let p = guesswork::Pmf::new(source.states().to_vec(), first.clone())?;
            let tilted = tilt(&p, 1.0 / (1.0 + rho))?;
            for row in guesser.transitions() {
                for (a, b) in row.iter().zip(tilted.probs()) {
                    if (a - b).abs() > 1e-10 {
                        return Err(verify_failed(
                            "rank-one source did not reduce to the i.i.d. tilt",
                        ));
                    }
                }
            }
        }
    }

    let guesser_doc = MarkovDoc::from_model(&guesser);
    ctx.out.write_json("markov_guesser.json", &guesser_doc)?;
    let report = MarkovReport {
        unit: ctx.unit.label(),
        rho,
        states: source.states().to_vec(),
        perron_eigenvalue: pd.lambda,
        exponent: ctx.unit.scale(exponent),
        stationary: source.stationary().probs().to_vec(),
        guesser_stationary: guesser.stationary().probs().to_vec(),
    };
    let written = ctx.out.write_json("markov_report.json", &report)?;
    ctx.out.write_resolved_config(&json!({
        "command": "markov",
        "model": model_path,
        "rho": rho,
        "unit": ctx.unit.label(),
        "seed": ctx.seed,
        "verify": ctx.verify,
    }))?;
    println!(
        "markov: lambda {:.9}, exponent {:.6} {} -> {}",
        pd.lambda,
        ctx.unit.scale(exponent),
        ctx.unit.label(),
        written.display()
    );
    Ok(())
}
