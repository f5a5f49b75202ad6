//! `ingest`: frequency file -> canonical PMF JSON.
//!
//! Input format: UTF-8 text, one `<password>\t<count>` record per line,
//! count a positive base-10 integer, lines starting with `#` ignored.
//! The password may contain tabs; the count is whatever follows the last
//! tab. Symbols are ordered by descending count, ties lexicographic.

use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use guesswork::{empirical_from_counts, Pmf};

use crate::error::{CliError, CliResult};
use crate::schema::PmfDoc;
use crate::Context;

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    /// Frequency file to ingest
    pub path: Option<PathBuf>,

    /// Keep only the K most likely entries, renormalized
    #[arg(long)]
    pub top_k: Option<usize>,

    /// Name of the emitted PMF file inside the output directory
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
struct IngestSection {
    path: Option<PathBuf>,
    top_k: Option<usize>,
    output: Option<String>,
}

pub fn run(ctx: &Context, args: IngestArgs) -> CliResult<()> {
    let section: IngestSection = ctx.section("ingest")?;
    let path = args
        .path
        .or(section.path)
        .ok_or_else(|| CliError::input("ingest needs a frequency file path"))?;
    let top_k = args.top_k.or(section.top_k);
    let output = args
        .output
        .or(section.output)
        .unwrap_or_else(|| "pmf.json".into());

    let bytes = std::fs::read(&path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|e| CliError::input(format!("{} is not UTF-8: {e}", path.display())))?;
    let source_hash: String = Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();

    let mut rows: Vec<(String, u64)> = Vec::new();
    let mut seen = std::collections::HashMap::new();
    let mut problems: Vec<String> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((password, count_str)) = line.rsplit_once('\t') else {
            problems.push(format!("line {lineno}: no tab separator"));
            continue;
        };
        let count: u64 = match count_str.trim().parse() {
            Ok(0) | Err(_) => {
                problems.push(format!(
                    "line {lineno}: count {count_str:?} is not a positive integer"
                ));
                continue;
            }
            Ok(c) => c,
        };
        if let Some(first) = seen.insert(password.to_string(), lineno) {
            problems.push(format!(
                "line {lineno}: duplicate password (first seen on line {first})"
            ));
            continue;
        }
        rows.push((password.to_string(), count));
    }
    if !problems.is_empty() {
        for p in &problems {
            eprintln!("{}: {p}", path.display());
        }
        return Err(CliError::input(format!(
            "{} malformed line(s) in {}",
            problems.len(),
            path.display()
        )));
    }

    let full = empirical_from_counts(&rows)?;
    let (pmf, kept_mass) = match top_k {
        Some(k) if k == 0 => return Err(CliError::input("--top-k must be positive")),
        Some(k) if k < full.len() => {
            let symbols = full.symbols()[..k].to_vec();
            let weights = full.probs()[..k].to_vec();
            let mass: f64 = weights.iter().sum();
            (Pmf::from_weights(symbols, weights)?, mass)
        }
        _ => (full, 1.0),
    };

    let doc = PmfDoc::from_pmf(&pmf, Some(source_hash.clone()));
    let written = ctx.out.write_json(&output, &doc)?;
    ctx.out.write_resolved_config(&json!({
        "command": "ingest",
        "path": path,
        "top_k": top_k,
        "output": output,
        "unit": ctx.unit.label(),
        "seed": ctx.seed,
    }))?;
    println!(
        "ingested {} symbols from {} (kept mass {:.6}) -> {}",
        pmf.len(),
        path.display(),
        kept_mass,
        written.display()
    );
    Ok(())
}
