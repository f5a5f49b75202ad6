//! `moments`: guesswork moments, bounds, growth exponents, and the optimal
//! i.i.d. guessing distribution for one source.

use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;

use guesswork::{
    arikan_bounds, exact_guesswork_moment, exhaustive_guesswork, iid_g_moment_numeric,
    iid_v_moment, j_guesswork_exponent, mismatch_exponent, optimal_iid_distribution,
    simplex_grid_min, sync_exponent, truncated_series_moment, MomentParam, Pmf,
};

use crate::commands::{parse_grid, verify_failed};
use crate::error::{CliError, CliResult};
use crate::schema::{read_pmf, CurvePoint, JsonReal, PmfDoc};
use crate::Context;

#[derive(Debug, Clone, Args)]
pub struct MomentsArgs {
    /// PMF JSON file
    #[arg(long)]
    pub pmf: Option<PathBuf>,

    /// Guesswork moment of interest
    #[arg(long)]
    pub rho: Option<f64>,

    /// Also report the loss of a strategy tuned for this other moment
    #[arg(long)]
    pub gamma: Option<f64>,

    /// Also report the budget-limited guesswork exponent at this budget
    /// rate (nats per symbol)
    #[arg(long)]
    pub j_alpha: Option<f64>,

    /// Emit an exponent-vs-rho curve CSV over this lo:hi:steps grid
    #[arg(long)]
    pub rho_grid: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
struct MomentsSection {
    pmf: Option<PathBuf>,
    rho: Option<f64>,
    gamma: Option<f64>,
    j_alpha: Option<f64>,
    rho_grid: Option<String>,
}

#[derive(Debug, Serialize)]
struct MomentsReport {
    unit: &'static str,
    rho: f64,
    alphabet_size: usize,
    exact_moment: f64,
    arikan_lower: f64,
    arikan_upper: f64,
    sync_exponent: f64,
    optimal_tilt: PmfDoc,
    v_moment_optimal: f64,
    log_v_moment_optimal: f64,
    naive_v_moment: JsonReal,
    #[serde(skip_serializing_if = "Option::is_none")]
    mismatch: Option<MismatchReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    j_guesswork: Option<JGuessReport>,
}

#[derive(Debug, Serialize)]
struct MismatchReport {
    gamma: f64,
    exponent: JsonReal,
    excess_over_optimal: JsonReal,
}

#[derive(Debug, Serialize)]
struct JGuessReport {
    alpha: f64,
    exponent: f64,
}

pub fn run(ctx: &Context, args: MomentsArgs) -> CliResult<()> {
    let section: MomentsSection = ctx.section("moments")?;
    let pmf_path = args
        .pmf
        .or(section.pmf)
        .ok_or_else(|| CliError::input("moments needs --pmf"))?;
    let rho = args
        .rho
        .or(section.rho)
        .ok_or_else(|| CliError::input("moments needs --rho"))?;
    let gamma = args.gamma.or(section.gamma);
    let j_alpha = args.j_alpha.or(section.j_alpha);
    let rho_grid = args.rho_grid.or(section.rho_grid);
    // validate the moment parameters up front
    let params = match gamma {
        Some(g) => MomentParam::with_gamma(rho, g)?,
        None => MomentParam::new(rho)?,
    };
    let rho = params.rho;

    let p = read_pmf(&pmf_path)?;
    let exact = exact_guesswork_moment(&p, rho)?;
    let (lower, upper) = arikan_bounds(&p, rho)?;
    let exponent = sync_exponent(&p, rho)?;
    let (tilted, v_opt) = optimal_iid_distribution(&p, rho)?;
    let naive = iid_v_moment(&p, &p, rho)?;

    let mismatch = match gamma {
        None => None,
        Some(g) => {
            let m = mismatch_exponent(&p, rho, g)?;
            Some(MismatchReport {
                gamma: g,
                exponent: ctx.unit.scale(m).into(),
                excess_over_optimal: ctx.unit.scale(m - exponent).into(),
            })
        }
    };
    let j_guesswork = match j_alpha {
        None => None,
        Some(a) => Some(JGuessReport {
            alpha: ctx.unit.scale(a),
            exponent: ctx.unit.scale(j_guesswork_exponent(&p, a)?),
        }),
    };

    if ctx.verify {
        verify_moments(&p, rho, exact.value, lower.value, upper.value, &tilted, &v_opt)?;
    }

    let report = MomentsReport {
        unit: ctx.unit.label(),
        rho,
        alphabet_size: p.len(),
        exact_moment: exact.value,
        arikan_lower: lower.value,
        arikan_upper: upper.value,
        sync_exponent: ctx.unit.scale(exponent),
        optimal_tilt: PmfDoc::from_pmf(&tilted, None),
        v_moment_optimal: v_opt.as_linear(),
        log_v_moment_optimal: ctx.unit.scale(v_opt.as_ln()),
        naive_v_moment: naive.value.into(),
        mismatch,
        j_guesswork,
    };
    let written = ctx.out.write_json("moments_report.json", &report)?;

    if let Some(spec) = &rho_grid {
        let grid = parse_grid(spec)?;
        let mut points = Vec::new();
        for &r in &grid {
            points.push(CurvePoint {
                series: "optimal_exponent".into(),
                x: r,
                y: ctx.unit.scale(sync_exponent(&p, r)?),
            });
            if let Some(g) = gamma {
                let m = mismatch_exponent(&p, r, g)?;
                if m.is_finite() {
                    points.push(CurvePoint {
                        series: format!("mismatch_gamma_{g}"),
                        x: r,
                        y: ctx.unit.scale(m),
                    });
                }
            }
        }
        ctx.out.write_curves("moments_curves.csv", &points)?;
    }

    ctx.out.write_resolved_config(&json!({
        "command": "moments",
        "pmf": pmf_path,
        "rho": rho,
        "gamma": gamma,
        "j_alpha": j_alpha,
        "rho_grid": rho_grid,
        "unit": ctx.unit.label(),
        "seed": ctx.seed,
        "verify": ctx.verify,
    }))?;
    println!(
        "moments: exact {:.6}, bounds [{:.6}, {:.6}], exponent {:.6} {} -> {}",
        exact.value,
        lower.value,
        upper.value,
        ctx.unit.scale(exponent),
        ctx.unit.label(),
        written.display()
    );
    Ok(())
}

fn verify_moments(
    p: &Pmf,
    rho: f64,
    exact: f64,
    lower: f64,
    upper: f64,
    tilted: &Pmf,
    v_opt: &guesswork::AnalyticMoment,
) -> CliResult<()> {
    // sandwich property
    if !(lower <= exact * (1.0 + 1e-12) && exact <= upper * (1.0 + 1e-12)) {
        return Err(verify_failed(format!(
            "moment bounds violated: {lower} / {exact} / {upper}"
        )));
    }
    // enumeration at n = 1 recomputes the exact moment independently
    let brute = exhaustive_guesswork(p, 1, rho)?;
    if (brute.value - exact).abs() > 1e-9 * exact.max(1.0) {
        return Err(verify_failed(format!(
            "enumeration gives {} but the analytic moment is {exact}",
            brute.value
        )));
    }
    // grid search over the simplex must agree with the tilted optimum
    if p.len() <= 3 {
        let step = if p.len() == 2 { 1e-6 } else { 1e-3 };
        let (grid, _) = simplex_grid_min(p.len(), step, |q| {
            let mut total = 0.0;
            for (&px, &qx) in p.probs().iter().zip(q) {
                if px > 0.0 {
                    if qx <= 0.0 {
                        return f64::INFINITY;
                    }
                    total += px / qx.powf(rho);
                }
            }
            total
        })?;
        let v = v_opt.as_linear();
        let tol = if p.len() == 2 { 1e-5 } else { 1e-3 };
        if (grid.value - v).abs() > tol * v.max(1.0) {
            return Err(verify_failed(format!(
                "simplex grid optimum {} disagrees with the tilted value {v}",
                grid.value
            )));
        }
    }
    // the geometric series must reproduce the closed-form mean per symbol
    if (rho - 1.0).abs() < 1e-12 {
        for (&px, &hx) in p.probs().iter().zip(tilted.probs()) {
            if px > 0.0 && hx > 0.0 {
                let series = truncated_series_moment(hx, 1.0, 1e-9)?;
                if (series.value - 1.0 / hx).abs() > 1e-6 / hx {
                    return Err(verify_failed("geometric series drifted from 1/p"));
                }
            }
        }
        let g = iid_g_moment_numeric(p, tilted, 1.0, 1e-9)?;
        let v = iid_v_moment(p, tilted, 1.0)?;
        if (g.value - v.value).abs() > 1e-6 * v.value {
            return Err(verify_failed("G and V moments disagree at rho = 1"));
        }
    }
    Ok(())
}
