//! `simulate`: Monte Carlo attack simulation over a strategy/schedule
//! matrix described in the run config.
//!
//! Emits one `SimStats` cell per (strategy, schedule) pair, optional
//! per-trial trace CSVs, and an optional empirical success-curve CSV with
//! one series per cell.

use clap::Args;
use serde_json::json;

use guesswork::{
    derive_seed, iid_v_moment, markov_v_moment, optimal_iid_distribution, optimal_markov_guesser,
    run_trials, summarize, AttackPlan, GuessStrategy, MarkovModel, PartitionKind, Pmf,
    Schedule, SourceModel,
};

use crate::commands::verify_failed;
use crate::error::{CliError, CliResult};
use crate::schema::{
    read_markov, read_pmf, CurvePoint, ScheduleSpec, SimCell, SimulateConfig, SourceSpec,
    StrategySpec,
};
use crate::Context;

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Override the configured trial count
    #[arg(long)]
    pub trials: Option<u64>,
}

enum LoadedSource {
    Iid(Pmf),
    Markov(MarkovModel),
}

pub fn run(ctx: &Context, args: SimulateArgs) -> CliResult<()> {
    let mut config: SimulateConfig = match ctx.section::<Option<SimulateConfig>>("simulate")? {
        Some(c) => c,
        None => {
            return Err(CliError::input(
                "simulate needs a \"simulate\" section in --config",
            ))
        }
    };
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if config.strategies.is_empty() || config.schedules.is_empty() {
        return Err(CliError::input("simulate needs at least one strategy and one schedule"));
    }

    let (loaded, n) = match &config.source {
        SourceSpec::Iid { pmf, n } => (LoadedSource::Iid(read_pmf(pmf.as_ref())?), *n),
        SourceSpec::Markov { model, n } => {
            (LoadedSource::Markov(read_markov(model.as_ref())?), *n)
        }
    };
    let source = match &loaded {
        LoadedSource::Iid(p) => SourceModel::Iid { pmf: p.clone(), n },
        LoadedSource::Markov(m) => SourceModel::Markov {
            model: m.clone(),
            n,
        },
    };

    let mut cells = Vec::new();
    let mut curves: Vec<CurvePoint> = Vec::new();
    for (si, strategy_spec) in config.strategies.iter().enumerate() {
        let strategy = build_strategy(strategy_spec, &loaded)?;
        let plan = AttackPlan {
            agents: (0..config.agents)
                .map(|i| (format!("agent{i}"), strategy.clone()))
                .collect(),
            source: source.clone(),
            budget: config.budget,
        };
        let analytic = analytic_mean(strategy_spec, &strategy, &loaded, n, config.budget)?;
        for (ci, schedule_spec) in config.schedules.iter().enumerate() {
            let schedule = build_schedule(schedule_spec);
            let cell_seed = derive_seed(ctx.seed, (si * 1000 + ci) as u64);
            let records = run_trials(&plan, &schedule, config.trials, cell_seed)?;
            let stats = summarize(&records, config.rho, cell_seed)?;

            if ctx.verify {
                if let Some(expected) = analytic {
                    let dev = (stats.mean_g - expected).abs();
                    if dev > 5.0 * stats.se_mean_g.max(1e-12) {
                        return Err(verify_failed(format!(
                            "{}/{}: simulated mean {} is {:.1} standard errors from the closed form {expected}",
                            strategy_spec.label(),
                            schedule_spec.label(),
                            stats.mean_g,
                            dev / stats.se_mean_g
                        )));
                    }
                }
            }

            let series = format!("{}/{}", strategy_spec.label(), schedule_spec.label());
            if config.trace {
                let name = format!(
                    "trace_{}_{}.csv",
                    sanitize(strategy_spec.label()),
                    sanitize(&schedule_spec.label())
                );
                let rows: Vec<TraceRow> = records
                    .iter()
                    .enumerate()
                    .map(|(i, (total, success))| TraceRow {
                        trial_index: i as u64,
                        total_queries: *total,
                        success: *success,
                    })
                    .collect();
                ctx.out.write_csv(&name, &rows)?;
            }
            if config.success_curve {
                success_curve(&series, &records, &mut curves);
            }
            cells.push(SimCell {
                strategy: strategy_spec.label().to_string(),
                schedule: schedule_spec.label(),
                stats,
                analytic_mean: analytic.map(Into::into),
            });
        }
    }

    let written = ctx.out.write_json("simulate_report.json", &cells)?;
    if config.success_curve {
        ctx.out.write_curves("success_curves.csv", &curves)?;
    }
    ctx.out.write_resolved_config(&json!({
        "command": "simulate",
        "config": config,
        "unit": ctx.unit.label(),
        "seed": ctx.seed,
        "verify": ctx.verify,
    }))?;
    println!(
        "simulated {} cell(s) x {} trials -> {}",
        cells.len(),
        config.trials,
        written.display()
    );
    Ok(())
}

#[derive(serde::Serialize)]
struct TraceRow {
    trial_index: u64,
    total_queries: u64,
    success: bool,
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect()
}

fn build_strategy(spec: &StrategySpec, source: &LoadedSource) -> CliResult<GuessStrategy> {
    Ok(match spec {
        StrategySpec::IidTilt { rho, .. } => match source {
            LoadedSource::Iid(p) => {
                GuessStrategy::IidSampler(optimal_iid_distribution(p, *rho)?.0)
            }
            LoadedSource::Markov(_) => {
                return Err(CliError::input(
                    "iid-tilt needs an i.i.d. source; use markov-guesser for chains",
                ))
            }
        },
        StrategySpec::IidSource { .. } => match source {
            LoadedSource::Iid(p) => GuessStrategy::IidSampler(p.clone()),
            LoadedSource::Markov(_) => {
                return Err(CliError::input("iid-source needs an i.i.d. source"))
            }
        },
        StrategySpec::IidPmf { pmf, .. } => GuessStrategy::IidSampler(read_pmf(pmf.as_ref())?),
        StrategySpec::SharedList { .. } => GuessStrategy::SharedOptimalList,
        StrategySpec::ReplicatedList { .. } => GuessStrategy::ReplicatedOptimalList,
        StrategySpec::Partitioned { partition, .. } => match partition.as_str() {
            "strided" => GuessStrategy::PartitionedLists(PartitionKind::Strided),
            "contiguous" => GuessStrategy::PartitionedLists(PartitionKind::Contiguous),
            other => return Err(CliError::input(format!("unknown partition {other:?}"))),
        },
        StrategySpec::MarkovGuesser { rho, .. } => match source {
            LoadedSource::Markov(m) => {
                GuessStrategy::MarkovSampler(optimal_markov_guesser(m, *rho)?)
            }
            LoadedSource::Iid(_) => {
                return Err(CliError::input("markov-guesser needs a markov source"))
            }
        },
        StrategySpec::MarkovModel { model, .. } => {
            GuessStrategy::MarkovSampler(read_markov(model.as_ref())?)
        }
    })
}

fn build_schedule(spec: &ScheduleSpec) -> Schedule {
    match spec {
        ScheduleSpec::RoundRobin => Schedule::RoundRobin,
        ScheduleSpec::RandomInterleave { seed } => Schedule::RandomInterleave { seed: *seed },
        ScheduleSpec::WorstCase => Schedule::WorstCase,
        ScheduleSpec::Explicit { prefix } => Schedule::ExplicitPermutation(prefix.clone()),
    }
}

/// Closed-form expected delivered count, where one exists (randomized
/// strategies without a budget).
fn analytic_mean(
    spec: &StrategySpec,
    strategy: &GuessStrategy,
    source: &LoadedSource,
    n: u32,
    budget: Option<u64>,
) -> CliResult<Option<f64>> {
    if budget.is_some() {
        return Ok(None);
    }
    let _ = spec;
    Ok(match (strategy, source) {
        (GuessStrategy::IidSampler(phat), LoadedSource::Iid(p)) => {
            // E[G] over sequences factorizes: sum_x prod p_i / prod phat_i
            // = (sum p/phat)^n
            let base = iid_v_moment(p, phat, 1.0)?.value;
            Some(base.powi(n as i32))
        }
        (GuessStrategy::MarkovSampler(g), LoadedSource::Markov(m)) => {
            Some(markov_v_moment(m, g, n, 1.0)?)
        }
        _ => None,
    })
}

/// Empirical P(success within x queries) over a log-spaced budget grid.
fn success_curve(series: &str, records: &[(u64, bool)], out: &mut Vec<CurvePoint>) {
    let max = records.iter().map(|(t, _)| *t).max().unwrap_or(1);
    let mut grid: Vec<u64> = Vec::new();
    let mut scale: u64 = 1;
    loop {
        for mult in 1..=9u64 {
            let x = mult.saturating_mul(scale);
            if x > max {
                break;
            }
            grid.push(x);
        }
        if scale.saturating_mul(10) > max {
            break;
        }
        scale *= 10;
    }
    grid.push(max);
    grid.dedup();
    let mut sorted: Vec<(u64, bool)> = records.to_vec();
    sorted.sort_unstable();
    let total = records.len() as f64;
    let mut idx = 0usize;
    let mut hits = 0u64;
    for &x in &grid {
        while idx < sorted.len() && sorted[idx].0 <= x {
            if sorted[idx].1 {
                hits += 1;
            }
            idx += 1;
        }
        out.push(CurvePoint {
            series: series.to_string(),
            x: x as f64,
            y: hits as f64 / total,
        });
    }
}
