//! `zipf`: Zipf password models and their optimal i.i.d. guessers.
//!
//! For the PDF variant the optimal guesser is itself Zipf with exponent
//! `s/(1+rho)` and the optimal log-moment has the closed form
//! `(1+rho) ln H_{m, s/(1+rho)} - ln H_{m,s}`.

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use guesswork::{
    generalized_harmonic, optimal_iid_distribution, zipf_pmf, ZipfSpec, ZipfVariant,
};

use crate::commands::verify_failed;
use crate::error::{CliError, CliResult};
use crate::schema::PmfDoc;
use crate::Context;

#[derive(Debug, Clone, Args)]
pub struct ZipfArgs {
    /// Alphabet size
    #[arg(long)]
    pub m: Option<usize>,

    /// Zipf exponent
    #[arg(long)]
    pub s: Option<f64>,

    /// Model variant: pdf or cdf
    #[arg(long)]
    pub variant: Option<String>,

    /// Guesswork moment of interest
    #[arg(long)]
    pub rho: Option<f64>,

    /// Also write the model and guesser PMFs as JSON files
    #[arg(long)]
    pub emit_pmf: bool,
}

#[derive(Debug, Default, Deserialize)]
struct ZipfSection {
    m: Option<usize>,
    s: Option<f64>,
    variant: Option<String>,
    rho: Option<f64>,
    emit_pmf: Option<bool>,
}

#[derive(Debug, Serialize)]
struct ZipfReport {
    unit: &'static str,
    variant: ZipfVariant,
    m: usize,
    s: f64,
    rho: f64,
    normalizer: f64,
    /// Zipf exponent of the optimal guesser (PDF variant only; the CDF
    /// guesser is a tilted difference form without a single exponent)
    #[serde(skip_serializing_if = "Option::is_none")]
    guesser_s: Option<f64>,
    log_v_moment_optimal: f64,
    v_moment_optimal: f64,
}

pub fn run(ctx: &Context, args: ZipfArgs) -> CliResult<()> {
    let section: ZipfSection = ctx.section("zipf")?;
    let m = args
        .m
        .or(section.m)
        .ok_or_else(|| CliError::input("zipf needs --m"))?;
    let s = args
        .s
        .or(section.s)
        .ok_or_else(|| CliError::input("zipf needs --s"))?;
    let rho = args
        .rho
        .or(section.rho)
        .ok_or_else(|| CliError::input("zipf needs --rho"))?;
    let variant = match args
        .variant
        .or(section.variant)
        .unwrap_or_else(|| "pdf".into())
        .as_str()
    {
        "pdf" => ZipfVariant::Pdf,
        "cdf" => ZipfVariant::Cdf,
        other => return Err(CliError::input(format!("unknown Zipf variant {other:?}"))),
    };
    let emit_pmf = args.emit_pmf || section.emit_pmf.unwrap_or(false);

    let spec = ZipfSpec::new(m, s, variant)?;
    let p = zipf_pmf(&spec)?;
    let (guesser, moment) = optimal_iid_distribution(&p, rho)?;
    let guesser_s = match variant {
        ZipfVariant::Pdf => Some(s / (1.0 + rho)),
        ZipfVariant::Cdf => None,
    };

    if ctx.verify {
        if variant == ZipfVariant::Pdf {
            let direct = zipf_pmf(&ZipfSpec::new(m, s / (1.0 + rho), ZipfVariant::Pdf)?)?;
            for (a, b) in guesser.probs().iter().zip(direct.probs()) {
                if (a - b).abs() > 1e-12 {
                    return Err(verify_failed(
                        "tilted Zipf does not match the rescaled-exponent model",
                    ));
                }
            }
            let closed = (1.0 + rho) * generalized_harmonic(m, s / (1.0 + rho)).ln()
                - generalized_harmonic(m, s).ln();
            if (moment.as_ln() - closed).abs() > 1e-12 {
                return Err(verify_failed(format!(
                    "log moment {} differs from the harmonic closed form {closed}",
                    moment.as_ln()
                )));
            }
        }
        spec.validate()?;
    }

    if emit_pmf {
        ctx.out.write_json("zipf_pmf.json", &PmfDoc::from_pmf(&p, None))?;
        ctx.out
            .write_json("zipf_guesser.json", &PmfDoc::from_pmf(&guesser, None))?;
    }
    let report = ZipfReport {
        unit: ctx.unit.label(),
        variant,
        m,
        s,
        rho,
        normalizer: spec.normalizer,
        guesser_s,
        log_v_moment_optimal: ctx.unit.scale(moment.as_ln()),
        v_moment_optimal: moment.as_linear(),
    };
    let written = ctx.out.write_json("zipf_report.json", &report)?;
    ctx.out.write_resolved_config(&json!({
        "command": "zipf",
        "m": m,
        "s": s,
        "variant": variant,
        "rho": rho,
        "emit_pmf": emit_pmf,
        "unit": ctx.unit.label(),
        "seed": ctx.seed,
        "verify": ctx.verify,
    }))?;
    println!(
        "zipf({m}, {s}, {:?}): optimal guesser exponent {:?}, log E[V*] {:.6} {} -> {}",
        variant,
        guesser_s,
        ctx.unit.scale(moment.as_ln()),
        ctx.unit.label(),
        written.display()
    );
    Ok(())
}
