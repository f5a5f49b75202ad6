//! `report`: consolidate analytic values against simulation estimates and
//! flag disagreements beyond the tolerance.

use std::path::PathBuf;

use clap::Args;
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::schema::{read_json, ComparisonEntry};
use crate::Context;

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// JSON files holding comparison entries (a single entry or an array)
    pub inputs: Vec<PathBuf>,

    /// Disagreement threshold in standard errors
    #[arg(long, default_value_t = 3.0)]
    pub se_factor: f64,
}

#[derive(Debug, Serialize)]
struct ReportRow {
    label: String,
    analytic: f64,
    simulated: f64,
    std_error: f64,
    z: f64,
    status: &'static str,
}

pub fn run(ctx: &Context, args: ReportArgs) -> CliResult<()> {
    if args.inputs.is_empty() {
        return Err(CliError::input("report needs at least one input file"));
    }
    let mut entries: Vec<ComparisonEntry> = Vec::new();
    for path in &args.inputs {
        // each file holds one entry or an array of them
        match read_json::<Vec<ComparisonEntry>>(path) {
            Ok(mut batch) => entries.append(&mut batch),
            Err(_) => entries.push(read_json::<ComparisonEntry>(path)?),
        }
    }

    // entries sharing a label must agree on the alphabet they describe
    let mut alphabets: std::collections::BTreeMap<&str, &Vec<String>> =
        std::collections::BTreeMap::new();
    for e in &entries {
        if let Some(a) = &e.alphabet {
            if let Some(prev) = alphabets.insert(e.label.as_str(), a) {
                if prev != a {
                    return Err(CliError::input(format!(
                        "entries labelled {:?} declare different alphabets",
                        e.label
                    )));
                }
            }
        }
    }

    let mut rows = Vec::with_capacity(entries.len());
    let mut mismatches = 0usize;
    for e in &entries {
        let dev = (e.analytic - e.simulated).abs();
        let z = if e.std_error > 0.0 {
            dev / e.std_error
        } else if dev == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        let ok = z <= args.se_factor;
        if !ok {
            mismatches += 1;
        }
        rows.push(ReportRow {
            label: e.label.clone(),
            analytic: e.analytic,
            simulated: e.simulated,
            std_error: e.std_error,
            z,
            status: if ok { "OK" } else { "MISMATCH" },
        });
    }

    let written = ctx.out.write_csv("report_table.csv", &rows)?;
    ctx.out.write_json("report_table.json", &rows)?;
    ctx.out.write_resolved_config(&json!({
        "command": "report",
        "inputs": args.inputs,
        "se_factor": args.se_factor,
        "unit": ctx.unit.label(),
        "seed": ctx.seed,
        "verify": ctx.verify,
    }))?;

    for row in &rows {
        println!(
            "{:<24} analytic {:>12.6} simulated {:>12.6} ±{:<10.6} z {:>8.2} {}",
            row.label, row.analytic, row.simulated, row.std_error, row.z, row.status
        );
    }
    println!(
        "report: {} entries, {} mismatch(es) -> {}",
        rows.len(),
        mismatches,
        written.display()
    );
    if ctx.verify && mismatches > 0 {
        return Err(CliError::compute(format!(
            "verification failed: {mismatches} comparison(s) beyond {} standard errors",
            args.se_factor
        )));
    }
    Ok(())
}
