//! Monte Carlo simulation of multi-agent brute-force attacks.
//!
//! An [`AttackPlan`] names the agents with their guessing strategies, the
//! password source, and an optional total query budget. A [`Schedule`]
//! fixes the order in which agent queries are delivered. Trials are fully
//! deterministic given the master seed: per-trial and per-agent RNG
//! streams are derived by hashing, trials are aggregated in index order,
//! and results do not depend on thread count.
//!
//! Deterministic list strategies never materialize their lists. A trial
//! only needs the target's rank in each agent's list, which is computed
//! combinatorially for binary i.i.d. sources (any length) and by explicit
//! enumeration for small general spaces. Randomized strategies deliver
//! each query as an independent hit test with the target-specific match
//! probability, drawn from that agent's own stream so that schedules
//! genuinely permute the delivered streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::check_rho;
use crate::error::{Error, Result};
use crate::markov::MarkovModel;
use crate::oracle::MAX_ENUMERATION;
use crate::pmf::{advance, Pmf};

/// How partitioned agents split the globally ordered guess list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionKind {
    /// Agent `j` of `P` takes ranks `j+1, j+1+P, j+1+2P, ...` (dealt).
    Strided,
    /// Agent `j` takes the `j`-th contiguous chunk of near-equal size.
    Contiguous,
}

/// How an agent produces its guess stream.
#[derive(Debug, Clone)]
pub enum GuessStrategy {
    /// All agents walk one shared optimal list behind a common pointer;
    /// the group behaves exactly like a single synchronized guesser.
    SharedOptimalList,
    /// Every agent walks its own private copy of the optimal list.
    ReplicatedOptimalList,
    /// Agents agree on a partition of the sequence space; each queries its
    /// own cell in probability order.
    PartitionedLists(PartitionKind),
    /// Symbols drawn i.i.d. from the given per-symbol distribution.
    IidSampler(Pmf),
    /// Sequences drawn from a Markov chain started at its stationary law.
    MarkovSampler(MarkovModel),
}

impl GuessStrategy {
    fn is_deterministic(&self) -> bool {
        matches!(
            self,
            GuessStrategy::SharedOptimalList
                | GuessStrategy::ReplicatedOptimalList
                | GuessStrategy::PartitionedLists(_)
        )
    }

    fn kind_tag(&self) -> &'static str {
        match self {
            GuessStrategy::SharedOptimalList => "shared",
            GuessStrategy::ReplicatedOptimalList => "replicated",
            GuessStrategy::PartitionedLists(_) => "partitioned",
            GuessStrategy::IidSampler(_) => "iid",
            GuessStrategy::MarkovSampler(_) => "markov",
        }
    }
}

/// The password source: i.i.d. symbols or a Markov chain, over sequences
/// of length `n`.
#[derive(Debug, Clone)]
pub enum SourceModel {
    Iid { pmf: Pmf, n: u32 },
    Markov { model: MarkovModel, n: u32 },
}

impl SourceModel {
    pub fn n(&self) -> u32 {
        match self {
            SourceModel::Iid { n, .. } | SourceModel::Markov { n, .. } => *n,
        }
    }

    pub fn alphabet(&self) -> &[String] {
        match self {
            SourceModel::Iid { pmf, .. } => pmf.symbols(),
            SourceModel::Markov { model, .. } => model.states(),
        }
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet().len()
    }
}

/// Agents, source, and optional budget for one attack configuration.
#[derive(Debug, Clone)]
pub struct AttackPlan {
    pub agents: Vec<(String, GuessStrategy)>,
    pub source: SourceModel,
    pub budget: Option<u64>,
}

impl AttackPlan {
    pub fn validate(&self) -> Result<()> {
        if self.agents.is_empty() {
            return Err(Error::InvalidPlan("at least one agent is required".into()));
        }
        if self.source.n() == 0 {
            return Err(Error::InvalidPlan("sequence length must be at least 1".into()));
        }
        if self.budget == Some(0) {
            return Err(Error::InvalidPlan("budget must be at least 1".into()));
        }
        let shared = self
            .agents
            .iter()
            .filter(|(_, s)| matches!(s, GuessStrategy::SharedOptimalList))
            .count();
        if shared > 0 && shared != self.agents.len() {
            return Err(Error::InvalidPlan(
                "a shared-list group cannot mix with other strategies".into(),
            ));
        }
        let alphabet = self.source.alphabet();
        for (name, strategy) in &self.agents {
            match strategy {
                GuessStrategy::IidSampler(pmf) => {
                    if pmf.symbols() != alphabet {
                        return Err(Error::InvalidPlan(format!(
                            "agent {name}: sampler alphabet differs from the source"
                        )));
                    }
                }
                GuessStrategy::MarkovSampler(model) => {
                    if model.states() != alphabet {
                        return Err(Error::InvalidPlan(format!(
                            "agent {name}: sampler states differ from the source"
                        )));
                    }
                }
                _ => {}
            }
        }
        if self.agents.iter().any(|(_, s)| s.is_deterministic()) {
            Ranker::check_supported(&self.source)?;
        }
        Ok(())
    }
}

/// Delivery order of agent queries.
#[derive(Debug, Clone)]
pub enum Schedule {
    /// Cycle through agents in declaration order, skipping exhausted lists.
    RoundRobin,
    /// A fixed random interleaving drawn once from the given seed; the same
    /// ordering is replayed for every trial.
    RandomInterleave { seed: u64 },
    /// Adversarial ordering. Evaluated in closed form for all-deterministic
    /// plans; randomized strategies are exchangeable, so the worst case
    /// coincides with any fixed order and round-robin is used.
    WorstCase,
    /// An explicit finite prefix of (agent index, 1-based query index)
    /// pairs, then round-robin over the remaining queries. The prefix must
    /// not repeat a pair.
    ExplicitPermutation(Vec<(usize, u64)>),
}

/// Outcome of a single trial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord {
    pub total_queries: u64,
    pub success: bool,
    pub target: Vec<u8>,
}

/// Aggregated Monte Carlo estimates with standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct SimStats {
    pub trials: u64,
    pub mean_g: f64,
    pub mean_g_pow_rho: f64,
    pub rho: f64,
    pub success_within_j: f64,
    pub se_mean_g: f64,
    pub se_mean_g_pow_rho: f64,
    pub se_success: f64,
    pub seed: u64,
}

/// Avalanche mix of a master seed and a stream index; used everywhere a
/// derived, collision-free RNG stream is needed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Two-sample Kolmogorov-Smirnov statistic over integer samples.
pub fn ks_statistic(mut a: Vec<u64>, mut b: Vec<u64>) -> f64 {
    a.sort_unstable();
    b.sort_unstable();
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

// ---------------------------------------------------------------------------
// target ranking in the product-optimal list
// ---------------------------------------------------------------------------

/// Rank lookup for the globally optimal (probability-descending,
/// lexicographic tie-break) ordering of the sequence space.
enum Ranker {
    /// Binary i.i.d. source: rank by type counting, any length up to 63.
    BinaryIid {
        n: u32,
        // index of the less likely symbol, None when the source is uniform
        rare: Option<usize>,
        binomial: Vec<Vec<u128>>,
    },
    /// Small spaces: explicit enumeration; `rank_by_lex[lex_index]`.
    Enumerated { rank_by_lex: Vec<u64>, m: usize },
}

impl Ranker {
    fn check_supported(source: &SourceModel) -> Result<()> {
        let m = source.alphabet_size() as u128;
        let n = source.n();
        let small = m
            .checked_pow(n)
            .map(|t| t <= MAX_ENUMERATION as u128)
            .unwrap_or(false);
        let binary_iid = matches!(source, SourceModel::Iid { pmf, .. } if pmf.len() == 2) && n <= 63;
        if small || binary_iid {
            Ok(())
        } else {
            Err(Error::SizeCap(format!(
                "deterministic lists need a binary i.i.d. source (n ≤ 63) or at most {MAX_ENUMERATION} sequences"
            )))
        }
    }

    fn build(source: &SourceModel) -> Result<Self> {
        let n = source.n();
        let m = source.alphabet_size();
        if let SourceModel::Iid { pmf, .. } = source {
            if pmf.len() == 2 && n <= 63 {
                let rare = if pmf.prob(0) == pmf.prob(1) {
                    None
                } else if pmf.prob(0) < pmf.prob(1) {
                    Some(0)
                } else {
                    Some(1)
                };
                return Ok(Ranker::BinaryIid {
                    n,
                    rare,
                    binomial: pascal(n as usize),
                });
            }
        }
        // explicit enumeration in lexicographic order
        let total = (m as u128).pow(n) as usize;
        let mut ln_probs = Vec::with_capacity(total);
        let mut idx = vec![0usize; n as usize];
        match source {
            SourceModel::Iid { pmf, .. } => {
                let ln_p: Vec<f64> = pmf.probs().iter().map(|&q| q.ln()).collect();
                let mut counts = vec![0u32; m];
                loop {
                    for c in counts.iter_mut() {
                        *c = 0;
                    }
                    for &i in idx.iter() {
                        counts[i] += 1;
                    }
                    let mut lp = 0.0;
                    for (c, l) in counts.iter().zip(&ln_p) {
                        if *c > 0 {
                            lp += *c as f64 * *l;
                        }
                    }
                    ln_probs.push(lp);
                    if !advance(&mut idx, m) {
                        break;
                    }
                }
            }
            SourceModel::Markov { model, .. } => loop {
                let seq: Vec<u8> = idx.iter().map(|&i| i as u8).collect();
                ln_probs.push(model.sequence_ln_prob(&seq));
                if !advance(&mut idx, m) {
                    break;
                }
            },
        }
        let mut order: Vec<u32> = (0..total as u32).collect();
        order.sort_by(|&a, &b| ln_probs[b as usize].partial_cmp(&ln_probs[a as usize]).unwrap());
        let mut rank_by_lex = vec![0u64; total];
        for (pos, &lex) in order.iter().enumerate() {
            rank_by_lex[lex as usize] = pos as u64 + 1;
        }
        Ok(Ranker::Enumerated { rank_by_lex, m })
    }

    /// 1-based rank of the target in the optimal list.
    fn rank(&self, target: &[u8]) -> u128 {
        match self {
            Ranker::BinaryIid { n, rare, binomial } => {
                let n = *n as usize;
                match rare {
                    None => {
                        // uniform: the list is lexicographic
                        let mut v: u128 = 0;
                        for &s in target {
                            v = (v << 1) | s as u128;
                        }
                        v + 1
                    }
                    Some(rare) => {
                        let t = target.iter().filter(|&&s| s == *rare as u8).count();
                        // all types with fewer rare symbols come first
                        let mut before: u128 = 0;
                        for j in 0..t {
                            before += binomial[n][j];
                        }
                        before + within_type_lex_smaller(target, binomial) + 1
                    }
                }
            }
            Ranker::Enumerated { rank_by_lex, m } => {
                let mut lex = 0usize;
                for &s in target {
                    lex = lex * m + s as usize;
                }
                rank_by_lex[lex] as u128
            }
        }
    }
}

/// Count binary strings with the same composition as `target` that are
/// lexicographically smaller (symbol 0 sorts first).
fn within_type_lex_smaller(target: &[u8], binomial: &[Vec<u128>]) -> u128 {
    let mut zeros = target.iter().filter(|&&s| s == 0).count();
    let mut remaining = target.len();
    let mut smaller: u128 = 0;
    for &s in target {
        remaining -= 1;
        if s == 1 {
            if zeros > 0 {
                smaller += binomial[remaining][zeros - 1];
            }
        } else {
            zeros -= 1;
        }
    }
    smaller
}

fn pascal(n: usize) -> Vec<Vec<u128>> {
    let mut rows = vec![vec![1u128]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let mut row = vec![1u128; i + 1];
        for j in 1..i {
            row[j] = prev[j - 1] + prev[j];
        }
        rows.push(row);
    }
    rows
}

// ---------------------------------------------------------------------------
// trial engine
// ---------------------------------------------------------------------------

enum AgentModel {
    Replicated,
    Partitioned { slot: usize },
    Iid { ln_probs: Vec<f64> },
    Markov { ln_init: Vec<f64>, ln_trans: Vec<Vec<f64>> },
}

struct PlanContext {
    source: SourceCtx,
    budget: Option<u64>,
    agents: Vec<AgentModel>,
    shared_group: bool,
    all_deterministic: bool,
    all_samplers: bool,
    ranker: Option<Ranker>,
    partitioned_count: usize,
    space: u128,
    guard: u64,
}

enum SourceCtx {
    Iid { cum: Vec<f64>, n: u32 },
    Markov { init_cum: Vec<f64>, trans_cum: Vec<Vec<f64>>, n: u32 },
}

impl SourceCtx {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<u8> {
        match self {
            SourceCtx::Iid { cum, n } => (0..*n).map(|_| draw(cum, rng)).collect(),
            SourceCtx::Markov { init_cum, trans_cum, n } => {
                let mut seq = Vec::with_capacity(*n as usize);
                let mut state = draw(init_cum, rng);
                seq.push(state);
                for _ in 1..*n {
                    state = draw(&trans_cum[state as usize], rng);
                    seq.push(state);
                }
                seq
            }
        }
    }
}

fn draw(cum: &[f64], rng: &mut ChaCha8Rng) -> u8 {
    let u: f64 = rng.random();
    for (i, &c) in cum.iter().enumerate() {
        if u < c {
            return i as u8;
        }
    }
    (cum.len() - 1) as u8
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|&p| {
            acc += p;
            acc
        })
        .collect()
}

impl PlanContext {
    fn build(plan: &AttackPlan) -> Result<Self> {
        plan.validate()?;
        let n = plan.source.n();
        let m = plan.source.alphabet_size();
        let space = (m as u128).saturating_pow(n);
        let source = match &plan.source {
            SourceModel::Iid { pmf, n } => SourceCtx::Iid {
                cum: cumulative(pmf.probs()),
                n: *n,
            },
            SourceModel::Markov { model, n } => SourceCtx::Markov {
                init_cum: cumulative(model.stationary().probs()),
                trans_cum: model.transitions().iter().map(|r| cumulative(r)).collect(),
                n: *n,
            },
        };
        let needs_ranker = plan.agents.iter().any(|(_, s)| s.is_deterministic());
        let ranker = if needs_ranker {
            Some(Ranker::build(&plan.source)?)
        } else {
            None
        };
        let mut agents = Vec::with_capacity(plan.agents.len());
        let mut partitioned_count = 0usize;
        for (_, strategy) in &plan.agents {
            agents.push(match strategy {
                GuessStrategy::SharedOptimalList | GuessStrategy::ReplicatedOptimalList => {
                    AgentModel::Replicated
                }
                GuessStrategy::PartitionedLists(_) => {
                    let slot = partitioned_count;
                    partitioned_count += 1;
                    AgentModel::Partitioned { slot }
                }
                GuessStrategy::IidSampler(pmf) => AgentModel::Iid {
                    ln_probs: pmf.probs().iter().map(|&q| q.ln()).collect(),
                },
                GuessStrategy::MarkovSampler(model) => AgentModel::Markov {
                    ln_init: model.stationary().probs().iter().map(|&q| q.ln()).collect(),
                    ln_trans: model
                        .transitions()
                        .iter()
                        .map(|r| r.iter().map(|&q| q.ln()).collect())
                        .collect(),
                },
            });
        }
        // all partitioned agents must agree on the partition kind
        if partitioned_count > 0 {
            let kinds: std::collections::HashSet<_> = plan
                .agents
                .iter()
                .filter_map(|(_, s)| match s {
                    GuessStrategy::PartitionedLists(k) => Some(*k),
                    _ => None,
                })
                .collect();
            if kinds.len() > 1 {
                return Err(Error::InvalidPlan(
                    "partitioned agents must share one partition kind".into(),
                ));
            }
        }
        let all_deterministic = plan.agents.iter().all(|(_, s)| s.is_deterministic());
        // the delivery-count guard is only meaningful for deterministic
        // lists, where space * agents bounds any finite delivery; sampler
        // counts are unbounded and their dead plans are caught by the
        // zero-hit-probability precheck instead
        let guard = if all_deterministic {
            space
                .saturating_mul(plan.agents.len() as u128)
                .saturating_add(1)
                .min(u64::MAX as u128) as u64
        } else {
            u64::MAX
        };
        Ok(Self {
            shared_group: plan
                .agents
                .iter()
                .all(|(_, s)| matches!(s, GuessStrategy::SharedOptimalList)),
            all_deterministic,
            all_samplers: plan.agents.iter().all(|(_, s)| !s.is_deterministic()),
            budget: plan.budget,
            agents,
            ranker,
            partitioned_count,
            space,
            guard,
            source,
        })
    }

    fn partition_kind(&self, plan: &AttackPlan) -> PartitionKind {
        plan.agents
            .iter()
            .find_map(|(_, s)| match s {
                GuessStrategy::PartitionedLists(k) => Some(*k),
                _ => None,
            })
            .unwrap_or(PartitionKind::Strided)
    }
}

/// Resolved per-trial hit behaviour of one agent.
enum HitModel {
    // hit at this local pointer value, None if the agent's list misses the
    // target; `len` is the agent's list length
    List { hit_at: Option<u128>, len: u128 },
    // every delivered query independently hits with this probability
    Bernoulli { p: f64 },
}

fn resolve_agents(
    ctx: &PlanContext,
    kind: PartitionKind,
    target: &[u8],
) -> Vec<HitModel> {
    let rank = ctx.ranker.as_ref().map(|r| r.rank(target));
    let p_count = ctx.partitioned_count as u128;
    ctx.agents
        .iter()
        .map(|agent| match agent {
            AgentModel::Replicated => HitModel::List {
                hit_at: rank,
                len: ctx.space,
            },
            AgentModel::Partitioned { slot } => {
                let r = rank.expect("ranker built for deterministic plans");
                let slot = *slot as u128;
                match kind {
                    PartitionKind::Strided => {
                        let len = if slot < ctx.space {
                            (ctx.space - slot + p_count - 1) / p_count
                        } else {
                            0
                        };
                        let hit_at = if (r - 1) % p_count == slot {
                            Some((r - 1) / p_count + 1)
                        } else {
                            None
                        };
                        HitModel::List { hit_at, len }
                    }
                    PartitionKind::Contiguous => {
                        let base = ctx.space / p_count;
                        let rem = ctx.space % p_count;
                        let len = base + if slot < rem { 1 } else { 0 };
                        let start = slot * base + slot.min(rem);
                        let hit_at = if r > start && r <= start + len {
                            Some(r - start)
                        } else {
                            None
                        };
                        HitModel::List { hit_at, len }
                    }
                }
            }
            AgentModel::Iid { ln_probs } => {
                let mut lp = 0.0;
                for &s in target {
                    lp += ln_probs[s as usize];
                }
                HitModel::Bernoulli { p: lp.exp() }
            }
            AgentModel::Markov { ln_init, ln_trans } => {
                let mut lp = ln_init[target[0] as usize];
                for w in target.windows(2) {
                    lp += ln_trans[w[0] as usize][w[1] as usize];
                }
                HitModel::Bernoulli { p: lp.exp() }
            }
        })
        .collect()
}

/// Iterator over delivery choices for a schedule.
enum DeliveryOrder {
    RoundRobin { cursor: usize },
    Random { rng: ChaCha8Rng },
    Explicit { prefix: Vec<(usize, u64)>, pos: usize, cursor: usize },
}

impl DeliveryOrder {
    fn new(schedule: &Schedule, n_agents: usize) -> Result<Self> {
        Ok(match schedule {
            Schedule::RoundRobin | Schedule::WorstCase => DeliveryOrder::RoundRobin { cursor: 0 },
            Schedule::RandomInterleave { seed } => DeliveryOrder::Random {
                rng: ChaCha8Rng::seed_from_u64(*seed),
            },
            Schedule::ExplicitPermutation(prefix) => {
                let mut seen = std::collections::HashSet::new();
                for pair in prefix {
                    if pair.1 == 0 {
                        return Err(Error::InvalidPlan("query indices are 1-based".into()));
                    }
                    if pair.0 >= n_agents {
                        return Err(Error::InvalidPlan(format!(
                            "schedule names agent {} of {n_agents}",
                            pair.0
                        )));
                    }
                    if !seen.insert(*pair) {
                        return Err(Error::InvalidPlan(format!(
                            "schedule repeats query ({}, {})",
                            pair.0, pair.1
                        )));
                    }
                }
                DeliveryOrder::Explicit {
                    prefix: prefix.clone(),
                    pos: 0,
                    cursor: 0,
                }
            }
        })
    }

    /// Pick the next (agent, query index) to deliver. `next_k` holds each
    /// agent's next never-delivered query index; `alive` marks agents with
    /// queries remaining.
    fn next(
        &mut self,
        alive: &[bool],
        next_k: &mut [u128],
        delivered_prefix: &mut [Vec<u64>],
    ) -> Option<(usize, u128)> {
        let n = alive.len();
        match self {
            DeliveryOrder::RoundRobin { cursor } => {
                for _ in 0..n {
                    let a = *cursor % n;
                    *cursor = (*cursor + 1) % n;
                    if alive[a] {
                        let k = next_k[a];
                        next_k[a] += 1;
                        return Some((a, k));
                    }
                }
                None
            }
            DeliveryOrder::Random { rng } => {
                let live: Vec<usize> = (0..n).filter(|&a| alive[a]).collect();
                if live.is_empty() {
                    return None;
                }
                let a = live[rng.random_range(0..live.len())];
                let k = next_k[a];
                next_k[a] += 1;
                Some((a, k))
            }
            DeliveryOrder::Explicit { prefix, pos, cursor } => {
                if *pos < prefix.len() {
                    let (a, k) = prefix[*pos];
                    *pos += 1;
                    delivered_prefix[a].push(k);
                    return Some((a, k as u128));
                }
                // after the prefix: round-robin over each agent's smallest
                // undelivered index
                for _ in 0..n {
                    let a = *cursor % n;
                    *cursor = (*cursor + 1) % n;
                    if alive[a] {
                        let mut k = next_k[a];
                        while delivered_prefix[a].contains(&(k as u64)) {
                            k += 1;
                        }
                        next_k[a] = k + 1;
                        return Some((a, k));
                    }
                }
                None
            }
        }
    }
}

/// Run one trial: sample a target, deliver queries in schedule order, and
/// count queries until the first match (inclusive) or budget exhaustion.
pub fn run_trial(plan: &AttackPlan, schedule: &Schedule, seed: u64) -> Result<TrialRecord> {
    let ctx = PlanContext::build(plan)?;
    let kind = ctx.partition_kind(plan);
    let (total, success, target) = run_one(&ctx, kind, schedule, seed)?;
    Ok(TrialRecord {
        total_queries: total,
        success,
        target,
    })
}

fn run_one(
    ctx: &PlanContext,
    partition: PartitionKind,
    schedule: &Schedule,
    seed: u64,
) -> Result<(u64, bool, Vec<u8>)> {
    let mut target_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
    let target = ctx.source.sample(&mut target_rng);
    let hits = resolve_agents(ctx, partition, &target);

    // a shared-list group is a single synchronized pointer: the delivered
    // count is the target's optimal-list rank, whatever the schedule
    if ctx.shared_group {
        let rank = ctx.ranker.as_ref().expect("shared group has a ranker").rank(&target);
        let rank64 = rank.min(u64::MAX as u128) as u64;
        return Ok(match ctx.budget {
            Some(j) if rank64 > j => (j, false, target),
            _ => (rank64, true, target),
        });
    }

    if matches!(schedule, Schedule::WorstCase) {
        if ctx.all_deterministic {
            let worst = worst_case_count(&hits);
            return Ok(match (worst, ctx.budget) {
                (Some(w), Some(j)) if w > j as u128 => (j, false, target),
                (Some(w), _) => (w.min(u64::MAX as u128) as u64, true, target),
                (None, Some(j)) => (j, false, target),
                (None, None) => return Err(Error::NoCoverage),
            });
        }
        if !ctx.all_samplers {
            return Err(Error::InvalidPlan(
                "worst-case delivery of mixed deterministic and randomized strategies is not defined".into(),
            ));
        }
        // all-sampler plans are exchangeable; fall through to round-robin
    }

    // reachability precheck so an uncoverable, unbudgeted plan errors
    // instead of spinning against the guard
    if ctx.budget.is_none() {
        let coverable = hits.iter().any(|h| match h {
            HitModel::List { hit_at, .. } => hit_at.is_some(),
            HitModel::Bernoulli { p } => *p > 0.0,
        });
        if !coverable {
            return Err(Error::NoCoverage);
        }
    }

    let n_agents = ctx.agents.len();
    let mut order = DeliveryOrder::new(schedule, n_agents)?;
    let mut next_k = vec![1u128; n_agents];
    let mut delivered_prefix = vec![Vec::new(); n_agents];
    let mut agent_rngs: Vec<Option<ChaCha8Rng>> = (0..n_agents).map(|_| None).collect();
    let mut alive: Vec<bool> = hits
        .iter()
        .map(|h| match h {
            HitModel::List { len, .. } => *len > 0,
            HitModel::Bernoulli { .. } => true,
        })
        .collect();
    let mut count: u64 = 0;

    loop {
        let Some((a, k)) = order.next(&alive, &mut next_k, &mut delivered_prefix) else {
            // every list exhausted without a hit
            return if ctx.budget.is_some() {
                Ok((count, false, target))
            } else {
                Err(Error::NoCoverage)
            };
        };
        count += 1;
        let hit = match &hits[a] {
            HitModel::List { hit_at, len } => {
                if k > *len {
                    return Err(Error::InvalidPlan(format!(
                        "schedule addresses query {k} beyond agent {a}'s list"
                    )));
                }
                if next_k[a] > *len {
                    alive[a] = false;
                }
                Some(k) == *hit_at
            }
            HitModel::Bernoulli { p } => {
                let rng = agent_rngs[a]
                    .get_or_insert_with(|| ChaCha8Rng::seed_from_u64(derive_seed(seed, 1 + a as u64)));
                rng.random::<f64>() < *p
            }
        };
        if hit {
            return Ok((count, true, target));
        }
        if let Some(j) = ctx.budget {
            if count >= j {
                return Ok((j, false, target));
            }
        }
        if count >= ctx.guard {
            return Err(Error::NoCoverage);
        }
    }
}

fn worst_case_count(hits: &[HitModel]) -> Option<u128> {
    let mut covered = false;
    let mut total: u128 = 1;
    for h in hits {
        match h {
            HitModel::List { hit_at: Some(k), .. } => {
                covered = true;
                total += k - 1;
            }
            HitModel::List { hit_at: None, len } => total += len,
            HitModel::Bernoulli { .. } => unreachable!("deterministic plans only"),
        }
    }
    covered.then_some(total)
}

/// Supremum of the delivered-query count over all order-preserving
/// interleavings, for plans whose agents all use deterministic lists:
/// `1 + Σ_a c_a` where `c_a` is the target's local rank minus one when
/// agent `a` covers it and the agent's full list length otherwise.
/// `None` means no agent covers the target.
pub fn worst_case_deterministic(plan: &AttackPlan, target: &[u8]) -> Result<Option<u64>> {
    let ctx = PlanContext::build(plan)?;
    if !ctx.all_deterministic {
        return Err(Error::InvalidPlan(
            "worst-case analysis needs deterministic list strategies".into(),
        ));
    }
    if target.len() != ctx.source.n_len() as usize
        || target.iter().any(|&s| s as usize >= ctx_alphabet(&ctx))
    {
        return Err(Error::InvalidPlan("target is not a sequence over the source alphabet".into()));
    }
    if ctx.shared_group {
        let rank = ctx.ranker.as_ref().unwrap().rank(target);
        return Ok(Some(rank.min(u64::MAX as u128) as u64));
    }
    let hits = resolve_agents(&ctx, ctx.partition_kind(plan), target);
    Ok(worst_case_count(&hits).map(|w| w.min(u64::MAX as u128) as u64))
}

fn ctx_alphabet(ctx: &PlanContext) -> usize {
    match &ctx.source {
        SourceCtx::Iid { cum, .. } => cum.len(),
        SourceCtx::Markov { init_cum, .. } => init_cum.len(),
    }
}

impl SourceCtx {
    fn n_len(&self) -> u32 {
        match self {
            SourceCtx::Iid { n, .. } | SourceCtx::Markov { n, .. } => *n,
        }
    }
}

/// Run `trials` independent trials and aggregate. Per-trial seeds are
/// derived from `(master_seed, trial index)`; trials run in parallel but
/// aggregation walks them in index order, so the result is bit-identical
/// for any thread count.
pub fn monte_carlo(
    plan: &AttackPlan,
    schedule: &Schedule,
    trials: u64,
    rho: f64,
    master_seed: u64,
) -> Result<SimStats> {
    let records = run_trials(plan, schedule, trials, master_seed)?;
    summarize(&records, rho, master_seed)
}

/// The raw per-trial outcomes `(total_queries, success)` behind
/// [`monte_carlo`], in trial-index order; callers that need traces or
/// empirical curves aggregate these themselves.
pub fn run_trials(
    plan: &AttackPlan,
    schedule: &Schedule,
    trials: u64,
    master_seed: u64,
) -> Result<Vec<(u64, bool)>> {
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    let ctx = PlanContext::build(plan)?;
    let kind = ctx.partition_kind(plan);
    (0..trials)
        .into_par_iter()
        .map(|i| {
            run_one(&ctx, kind, schedule, derive_seed(master_seed, i))
                .map(|(total, success, _)| (total, success))
        })
        .collect()
}

/// Aggregate raw trial outcomes into [`SimStats`] (order-insensitive sums,
/// walked in index order).
pub fn summarize(records: &[(u64, bool)], rho: f64, seed: u64) -> Result<SimStats> {
    check_rho(rho)?;
    if records.is_empty() {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    let trials = records.len() as u64;
    let t = trials as f64;
    let mut sum_g = 0.0;
    let mut sum_g2 = 0.0;
    let mut sum_gr = 0.0;
    let mut sum_gr2 = 0.0;
    let mut successes = 0u64;
    for &(total, success) in records {
        let g = total as f64;
        let gr = g.powf(rho);
        sum_g += g;
        sum_g2 += g * g;
        sum_gr += gr;
        sum_gr2 += gr * gr;
        successes += success as u64;
    }
    let mean_g = sum_g / t;
    let mean_gr = sum_gr / t;
    let rate = successes as f64 / t;
    let var = |sum2: f64, mean: f64| ((sum2 / t - mean * mean).max(0.0)) * t / (t - 1.0).max(1.0);
    Ok(SimStats {
        trials,
        mean_g,
        mean_g_pow_rho: mean_gr,
        rho,
        success_within_j: rate,
        se_mean_g: (var(sum_g2, mean_g) / t).sqrt(),
        se_mean_g_pow_rho: (var(sum_gr2, mean_gr) / t).sqrt(),
        se_success: (rate * (1.0 - rate) / t).sqrt(),
        seed,
    })
}

/// One pairwise comparison of delivered-count distributions.
#[derive(Debug, Clone, Serialize)]
pub struct SchedulePairKs {
    pub first: usize,
    pub second: usize,
    pub ks: f64,
}

/// Result of comparing a plan's delivered-count law across schedules.
#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub trials: u64,
    pub pairs: Vec<SchedulePairKs>,
    pub max_ks: f64,
}

impl InvarianceReport {
    pub fn passes(&self, threshold: f64) -> bool {
        self.max_ks < threshold
    }
}

/// Exchangeability check: run the plan under each schedule (independent
/// seeds) and report the two-sample KS statistic for every pair. All agents
/// must share one strategy kind; identically distributed i.i.d. samplers
/// are the setting where the statistic is expected to vanish.
pub fn schedule_invariance_check(
    plan: &AttackPlan,
    schedules: &[Schedule],
    trials: u64,
    seed: u64,
) -> Result<InvarianceReport> {
    if schedules.len() < 2 {
        return Err(Error::Domain("need at least two schedules to compare".into()));
    }
    let tags: std::collections::HashSet<&'static str> = plan
        .agents
        .iter()
        .map(|(_, s)| s.kind_tag())
        .collect();
    if tags.len() > 1 {
        return Err(Error::MixedStrategies);
    }
    let mut samples = Vec::with_capacity(schedules.len());
    for (i, schedule) in schedules.iter().enumerate() {
        let records = run_trials(plan, schedule, trials, derive_seed(seed, 0x5EED + i as u64))?;
        samples.push(records.into_iter().map(|(t, _)| t).collect::<Vec<u64>>());
    }
    let mut pairs = Vec::new();
    let mut max_ks: f64 = 0.0;
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            let ks = ks_statistic(samples[i].clone(), samples[j].clone());
            max_ks = max_ks.max(ks);
            pairs.push(SchedulePairKs { first: i, second: j, ks });
        }
    }
    Ok(InvarianceReport {
        trials,
        pairs,
        max_ks,
    })
}

/// One point of an exponent fit.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentPoint {
    pub n: u32,
    pub mean_moment: f64,
    pub log_moment: f64,
}

/// Least-squares fit of `ln E[G^rho]` against the sequence length.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: Vec<ExponentPoint>,
}

/// Estimate the guesswork growth exponent: run the plan at each length in
/// `ns`, take `ln` of the estimated moment, and fit a line over `n`.
pub fn estimate_exponent(
    plan_for_n: impl Fn(u32) -> Result<AttackPlan>,
    ns: &[u32],
    schedule: &Schedule,
    rho: f64,
    trials_per_n: u64,
    seed: u64,
) -> Result<ExponentFit> {
    if ns.len() < 3 {
        return Err(Error::Domain("exponent fits need at least three lengths".into()));
    }
    let mut points = Vec::with_capacity(ns.len());
    for &n in ns {
        let plan = plan_for_n(n)?;
        let stats = monte_carlo(&plan, schedule, trials_per_n, rho, derive_seed(seed, n as u64))?;
        if !stats.mean_g_pow_rho.is_finite() || stats.mean_g_pow_rho <= 0.0 {
            return Err(Error::Domain(format!(
                "moment estimate at n = {n} is not a positive finite number"
            )));
        }
        points.push(ExponentPoint {
            n,
            mean_moment: stats.mean_g_pow_rho,
            log_moment: stats.mean_g_pow_rho.ln(),
        });
    }
    let k = points.len() as f64;
    let mean_x = points.iter().map(|p| p.n as f64).sum::<f64>() / k;
    let mean_y = points.iter().map(|p| p.log_moment).sum::<f64>() / k;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for p in &points {
        let dx = p.n as f64 - mean_x;
        sxx += dx * dx;
        sxy += dx * (p.log_moment - mean_y);
    }
    let slope = sxy / sxx;
    Ok(ExponentFit {
        slope,
        intercept: mean_y - slope * mean_x,
        points,
    })
}
