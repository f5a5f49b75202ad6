//! `exponents`: breach-probability exponents under a guess budget
//! `J = ⌈e^{n·alpha}⌉`.

use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use guesswork::{
    async_success_exponent, failure_exponent, min_beta_async_exponent, shannon_entropy,
    simplex_grid_min, sync_success_exponent, threshold_type, ExponentReport, ListGrowthRate, Pmf,
};

use crate::commands::{parse_grid, verify_failed};
use crate::error::{CliError, CliResult};
use crate::output::Unit;
use crate::schema::{read_pmf, CurvePoint, JsonReal, PmfDoc};
use crate::Context;

#[derive(Debug, Clone, Args)]
pub struct ExponentsArgs {
    /// PMF JSON file
    #[arg(long)]
    pub pmf: Option<PathBuf>,

    /// Budget growth rate in nats per symbol
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Budget growth rate as a base-|X| list-size exponent in [0, 1]
    /// (converted via multiplication by ln |X|)
    #[arg(long)]
    pub alpha_base_x: Option<f64>,

    /// Also evaluate the asynchronous exponent at this fixed guessing tilt
    #[arg(long)]
    pub beta: Option<f64>,

    /// Emit an exponent-vs-alpha curve CSV over this lo:hi:steps grid (nats)
    #[arg(long)]
    pub alpha_grid: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
struct ExponentsSection {
    pmf: Option<PathBuf>,
    alpha: Option<f64>,
    alpha_base_x: Option<f64>,
    beta: Option<f64>,
    alpha_grid: Option<String>,
}

#[derive(Debug, Serialize)]
struct ExponentDoc {
    value: JsonReal,
    argmin_type: Vec<f64>,
    solver: guesswork::SolverKind,
    residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    achieving_beta: Option<f64>,
}

impl ExponentDoc {
    fn scaled(rep: &ExponentReport, unit: Unit) -> Self {
        Self {
            value: unit.scale(rep.value).into(),
            argmin_type: rep.argmin_type.probs().to_vec(),
            solver: rep.solver,
            residual: rep.residual,
            achieving_beta: rep.achieving_beta,
        }
    }
}

#[derive(Debug, Serialize)]
struct ExponentsDocument {
    unit: &'static str,
    alpha: f64,
    source_entropy: f64,
    threshold_type: PmfDoc,
    sync_success: ExponentDoc,
    min_beta_async: ExponentDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    async_at_beta: Option<ExponentDoc>,
    failure: ExponentDoc,
}

pub fn run(ctx: &Context, args: ExponentsArgs) -> CliResult<()> {
    let section: ExponentsSection = ctx.section("exponents")?;
    let pmf_path = args
        .pmf
        .or(section.pmf)
        .ok_or_else(|| CliError::input("exponents needs --pmf"))?;
    let p = read_pmf(&pmf_path)?;

    let alpha_nats = args.alpha.or(section.alpha);
    let alpha_base_x = args.alpha_base_x.or(section.alpha_base_x);
    let rate = match (alpha_nats, alpha_base_x) {
        (Some(_), Some(_)) => {
            return Err(CliError::input("give either --alpha or --alpha-base-x, not both"))
        }
        (Some(a), None) => ListGrowthRate::from_nats(a, p.len())?,
        (None, Some(a)) => ListGrowthRate::from_alphabet_exponent(a, p.len())?,
        (None, None) => return Err(CliError::input("exponents needs --alpha or --alpha-base-x")),
    };
    let alpha = rate.alpha;
    let beta = args.beta.or(section.beta);
    let alpha_grid = args.alpha_grid.or(section.alpha_grid);

    let sync = sync_success_exponent(&p, alpha)?;
    let min_beta = min_beta_async_exponent(&p, alpha)?;
    let failure = failure_exponent(&p, alpha)?;
    let threshold = threshold_type(&p, alpha)?;
    let at_beta = match beta {
        None => None,
        Some(b) => Some(async_success_exponent(&p, alpha, b)?),
    };

    if ctx.verify {
        verify_exponents(&p, alpha, &sync, &min_beta)?;
    }

    let doc = ExponentsDocument {
        unit: ctx.unit.label(),
        alpha: ctx.unit.scale(alpha),
        source_entropy: ctx.unit.scale(shannon_entropy(&p)),
        threshold_type: PmfDoc::from_pmf(&threshold, None),
        sync_success: ExponentDoc::scaled(&sync, ctx.unit),
        min_beta_async: ExponentDoc::scaled(&min_beta, ctx.unit),
        async_at_beta: at_beta.as_ref().map(|r| ExponentDoc::scaled(r, ctx.unit)),
        failure: ExponentDoc::scaled(&failure, ctx.unit),
    };
    let written = ctx.out.write_json("exponents_report.json", &doc)?;

    if let Some(spec) = &alpha_grid {
        let grid = parse_grid(spec)?;
        let mut points = Vec::new();
        for &a in &grid {
            let a = a.clamp(0.0, (p.len() as f64).ln());
            points.push(CurvePoint {
                series: "sync_success".into(),
                x: ctx.unit.scale(a),
                y: ctx.unit.scale(sync_success_exponent(&p, a)?.value),
            });
            points.push(CurvePoint {
                series: "min_beta_async".into(),
                x: ctx.unit.scale(a),
                y: ctx.unit.scale(min_beta_async_exponent(&p, a)?.value),
            });
            let f = failure_exponent(&p, a)?.value;
            if f.is_finite() {
                points.push(CurvePoint {
                    series: "failure".into(),
                    x: ctx.unit.scale(a),
                    y: ctx.unit.scale(f),
                });
            }
        }
        ctx.out.write_curves("exponents_curves.csv", &points)?;
    }

    ctx.out.write_resolved_config(&json!({
        "command": "exponents",
        "pmf": pmf_path,
        "alpha_nats": alpha,
        "alpha_base_x": alpha_base_x,
        "beta": beta,
        "alpha_grid": alpha_grid,
        "unit": ctx.unit.label(),
        "seed": ctx.seed,
        "verify": ctx.verify,
    }))?;
    println!(
        "exponents at alpha {:.6} {}: sync {:.6}, min-beta async {:.6}, failure {} -> {}",
        ctx.unit.scale(alpha),
        ctx.unit.label(),
        ctx.unit.scale(sync.value),
        ctx.unit.scale(min_beta.value),
        if failure.value.is_finite() {
            format!("{:.6}", ctx.unit.scale(failure.value))
        } else {
            "infinity".into()
        },
        written.display()
    );
    Ok(())
}

fn verify_exponents(
    p: &Pmf,
    alpha: f64,
    sync: &ExponentReport,
    min_beta: &ExponentReport,
) -> CliResult<()> {
    // dual-solver identity
    if (sync.value - min_beta.value).abs() > 1e-5 {
        return Err(verify_failed(format!(
            "min-beta asynchronous exponent {} differs from the synchronized value {}",
            min_beta.value, sync.value
        )));
    }
    // binary grid oracle for the synchronized value
    if p.len() == 2 {
        let p0 = p.prob(0);
        let p1 = p.prob(1);
        if p0 > 0.0 && p1 > 0.0 {
            let hq = |q: f64| -> f64 {
                if q <= 0.0 || q >= 1.0 {
                    0.0
                } else {
                    -(q * q.ln() + (1.0 - q) * (1.0 - q).ln())
                }
            };
            let crossq = |q: f64| -(q * p0.ln() + (1.0 - q) * p1.ln());
            let (tau, _) = simplex_grid_min(2, 1e-6, |v| {
                if hq(v[0]) >= alpha {
                    crossq(v[0])
                } else {
                    f64::INFINITY
                }
            })?;
            // over the guessed region, either an interior type or the
            // budget slice of the boundary type dominates the success
            // probability
            let (grid, _) = simplex_grid_min(2, 1e-6, |v| {
                let c = crossq(v[0]);
                if c <= tau.value + 1e-12 {
                    (c - hq(v[0])).max(c - alpha).max(0.0)
                } else {
                    f64::INFINITY
                }
            })?;
            if (grid.value - sync.value).abs() > 1e-5 {
                return Err(verify_failed(format!(
                    "grid oracle gives {} but the solver reports {}",
                    grid.value, sync.value
                )));
            }
        }
    }
    Ok(())
}
