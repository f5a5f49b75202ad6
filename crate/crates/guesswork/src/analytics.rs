//! Exact and asymptotic guesswork quantities.
//!
//! Covers the optimal deterministic list and its moments, the classic
//! moment bounds, the growth exponent `rho * H_{1/(1+rho)}`, and the
//! randomized-guessing side: the V-moment `E[V_rho] = Σ p / phat^rho`
//! whose minimizer over guessing distributions is the `1/(1+rho)` tilt,
//! the geometric-series G-moment, the mismatched-tilt exponent, and the
//! budget-limited (J-guesswork) exponent.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::info::{entropy_matching_tilt, kl_divergence, renyi_entropy, shannon_entropy};
use crate::pmf::{tilt, ConditionalPmf, Pmf};

/// Moment parameters: the guesswork moment `rho`, plus the optional
/// mismatched tilt moment `gamma` (the moment some other strategy was
/// optimized for).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentParam {
    pub rho: f64,
    pub gamma: Option<f64>,
}

impl MomentParam {
    pub fn new(rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Ok(Self { rho, gamma: None })
    }

    pub fn with_gamma(rho: f64, gamma: f64) -> Result<Self> {
        check_rho(rho)?;
        if !gamma.is_finite() || gamma <= 0.0 {
            return Err(Error::Domain(format!("gamma {gamma} must be positive")));
        }
        Ok(Self {
            rho,
            gamma: Some(gamma),
        })
    }
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if !rho.is_finite() || rho <= 0.0 {
        return Err(Error::Domain(format!("moment rho {rho} must be positive")));
    }
    Ok(())
}

/// What an [`AnalyticMoment`] value measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentKind {
    ExactGMoment,
    VRho,
    ArikanLower,
    ArikanUpper,
    Exponent,
}

/// A moment (or its natural log, when `log_scale` is set) with provenance.
/// Exponents are always log-scale, in nats per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticMoment {
    pub value: f64,
    pub kind: MomentKind,
    pub log_scale: bool,
}

impl AnalyticMoment {
    fn linear(kind: MomentKind, value: f64) -> Self {
        Self {
            value,
            kind,
            log_scale: false,
        }
    }

    fn log(kind: MomentKind, value: f64) -> Self {
        Self {
            value,
            kind,
            log_scale: true,
        }
    }

    /// The moment on the linear scale.
    pub fn as_linear(&self) -> f64 {
        if self.log_scale {
            self.value.exp()
        } else {
            self.value
        }
    }

    /// The moment on the log scale.
    pub fn as_ln(&self) -> f64 {
        if self.log_scale {
            self.value
        } else {
            self.value.ln()
        }
    }
}

/// The optimal deterministic guessing order: symbols sorted by descending
/// probability, ties broken by support order. Ranks are 1-based.
#[derive(Debug, Clone)]
pub struct GuessList {
    ordered: Vec<usize>,
    rank_by_index: Vec<usize>,
    rank_by_symbol: BTreeMap<String, usize>,
}

impl GuessList {
    /// Support index of the symbol guessed at `rank` (1-based).
    pub fn index_at_rank(&self, rank: usize) -> usize {
        self.ordered[rank - 1]
    }

    /// 1-based rank of the symbol at the given support index.
    pub fn rank_of_index(&self, index: usize) -> usize {
        self.rank_by_index[index]
    }

    /// 1-based rank of a symbol by name.
    pub fn rank_of_symbol(&self, symbol: &str) -> Option<usize> {
        self.rank_by_symbol.get(symbol).copied()
    }

    pub fn len(&self) -> usize {
        self.ordered.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordered.is_empty()
    }

    /// Support indices in guess order.
    pub fn order(&self) -> &[usize] {
        &self.ordered
    }
}

/// Build the optimal list for `p`.
pub fn optimal_list(p: &Pmf) -> GuessList {
    let mut ordered: Vec<usize> = (0..p.len()).collect();
    // stable sort keeps support order on ties
    ordered.sort_by(|&a, &b| p.prob(b).partial_cmp(&p.prob(a)).unwrap());
    let mut rank_by_index = vec![0usize; p.len()];
    let mut rank_by_symbol = BTreeMap::new();
    for (pos, &idx) in ordered.iter().enumerate() {
        rank_by_index[idx] = pos + 1;
        rank_by_symbol.insert(p.symbol(idx).to_string(), pos + 1);
    }
    GuessList {
        ordered,
        rank_by_index,
        rank_by_symbol,
    }
}

/// Exact `rho`-th moment of the optimal guessing function:
/// `Σ_x rank(x)^rho p(x)`.
pub fn exact_guesswork_moment(p: &Pmf, rho: f64) -> Result<AnalyticMoment> {
    check_rho(rho)?;
    let list = optimal_list(p);
    let mut total = 0.0;
    for (pos, &idx) in list.order().iter().enumerate() {
        total += ((pos + 1) as f64).powf(rho) * p.prob(idx);
    }
    Ok(AnalyticMoment::linear(MomentKind::ExactGMoment, total))
}

/// The classic sandwich on the optimal moment:
/// `(1 + ln|X|)^{-rho} S^{1+rho} ≤ E[G*^rho] ≤ S^{1+rho}` where
/// `S = Σ p^{1/(1+rho)}`.
pub fn arikan_bounds(p: &Pmf, rho: f64) -> Result<(AnalyticMoment, AnalyticMoment)> {
    check_rho(rho)?;
    let theta = 1.0 / (1.0 + rho);
    let s: f64 = p
        .probs()
        .iter()
        .filter(|&&q| q > 0.0)
        .map(|&q| q.powf(theta))
        .sum();
    let upper = s.powf(1.0 + rho);
    let lower = (1.0 + (p.len() as f64).ln()).powf(-rho) * upper;
    Ok((
        AnalyticMoment::linear(MomentKind::ArikanLower, lower),
        AnalyticMoment::linear(MomentKind::ArikanUpper, upper),
    ))
}

/// Growth exponent of the optimal moment over i.i.d. sequences:
/// `rho * H_{1/(1+rho)}(p)` in nats per symbol.
pub fn sync_exponent(p: &Pmf, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(rho * renyi_entropy(p, 1.0 / (1.0 + rho))?)
}

/// Exact V-moment of i.i.d. guessing from `phat`: `Σ_x p(x) / phat(x)^rho`.
/// Infinite when `phat` misses part of the support of `p`.
pub fn iid_v_moment(p: &Pmf, phat: &Pmf, rho: f64) -> Result<AnalyticMoment> {
    check_rho(rho)?;
    if !p.same_support(phat) {
        return Err(Error::SupportMismatch(
            "guessing distribution must share the source alphabet".into(),
        ));
    }
    let mut total = 0.0;
    for (&px, &hx) in p.probs().iter().zip(phat.probs()) {
        if px > 0.0 {
            if hx == 0.0 {
                return Ok(AnalyticMoment::linear(MomentKind::VRho, f64::INFINITY));
            }
            total += px / hx.powf(rho);
        }
    }
    Ok(AnalyticMoment::linear(MomentKind::VRho, total))
}

/// The V-moment-optimal i.i.d. guessing distribution, `tilt(p, 1/(1+rho))`,
/// together with the log of the optimal moment, `rho * H_{1/(1+rho)}(p)`.
pub fn optimal_iid_distribution(p: &Pmf, rho: f64) -> Result<(Pmf, AnalyticMoment)> {
    check_rho(rho)?;
    let phat = tilt(p, 1.0 / (1.0 + rho))?;
    let log_value = sync_exponent(p, rho)?;
    Ok((phat, AnalyticMoment::log(MomentKind::VRho, log_value)))
}

/// `rho`-th moment of the raw guess count for i.i.d. guessing: given the
/// target `x`, the count is geometric with success probability `phat(x)`,
/// so `E[G^rho] = Σ_x p(x) Σ_{k≥1} k^rho (1-phat(x))^{k-1} phat(x)`.
///
/// Each inner series is truncated once a rigorous geometric-ratio tail
/// bound drops below `tail_eps` of the value accumulated so far: for
/// `k ≥ K` the term ratio is at most `c = (1 + 1/K)^rho (1 - q)`, so the
/// tail after `K` is at most `t_K c / (1 - c)` once `c < 1`.
pub fn iid_g_moment_numeric(
    p: &Pmf,
    phat: &Pmf,
    rho: f64,
    tail_eps: f64,
) -> Result<AnalyticMoment> {
    check_rho(rho)?;
    if !(tail_eps > 0.0) {
        return Err(Error::Domain(format!("tail_eps {tail_eps} must be positive")));
    }
    if !p.same_support(phat) {
        return Err(Error::SupportMismatch(
            "guessing distribution must share the source alphabet".into(),
        ));
    }
    let mut total = 0.0;
    for (&px, &hx) in p.probs().iter().zip(phat.probs()) {
        if px == 0.0 {
            continue;
        }
        if hx == 0.0 {
            return Ok(AnalyticMoment::linear(MomentKind::ExactGMoment, f64::INFINITY));
        }
        total += px * geometric_moment_series(hx, rho, tail_eps)?;
    }
    Ok(AnalyticMoment::linear(MomentKind::ExactGMoment, total))
}

/// Truncated evaluation of `Σ_{k≥1} k^rho (1-q)^{k-1} q`.
fn geometric_moment_series(q: f64, rho: f64, tail_eps: f64) -> Result<f64> {
    debug_assert!(q > 0.0 && q <= 1.0);
    if q == 1.0 {
        return Ok(1.0);
    }
    let r = 1.0 - q;
    let mut sum = 0.0;
    let mut geo = q; // q * r^{k-1}
    let mut k = 1u64;
    const MAX_TERMS: u64 = 100_000_000;
    while k <= MAX_TERMS {
        let term = (k as f64).powf(rho) * geo;
        sum += term;
        let ratio = (1.0 + 1.0 / k as f64).powf(rho) * r;
        if ratio < 1.0 {
            let tail_bound = term * ratio / (1.0 - ratio);
            if tail_bound < tail_eps * sum {
                return Ok(sum);
            }
        }
        geo *= r;
        k += 1;
    }
    Err(Error::NonConvergence(MAX_TERMS))
}

/// Exponent of the V-moment of order `rho` under guesses tilted for a
/// different moment `gamma`:
/// `(rho/(1+gamma)) H_a(p) + (gamma rho/(1+gamma)) H_{1/(1+gamma)}(p)`
/// with `a = (gamma - rho + 1)/(1 + gamma)`.
///
/// The moment diverges when `a ≤ 0` (i.e. `rho ≥ gamma + 1`); the infinite
/// marker is a value, not an error. `a` within float noise of 1 is handled
/// by the Shannon limit inside [`renyi_entropy`].
pub fn mismatch_exponent(p: &Pmf, rho: f64, gamma: f64) -> Result<f64> {
    check_rho(rho)?;
    check_rho(gamma)?;
    let a = (gamma - rho + 1.0) / (1.0 + gamma);
    if a <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let first = rho / (1.0 + gamma) * renyi_entropy(p, a)?;
    let second = gamma * rho / (1.0 + gamma) * renyi_entropy(p, 1.0 / (1.0 + gamma))?;
    Ok(first + second)
}

/// Exponent of the expected guess count for an attacker who stops after
/// `J = ceil(e^{n alpha})` queries.
///
/// Below the source entropy the budget itself dominates and the exponent is
/// `alpha`. Above it, the attacker succeeds with overwhelming probability
/// and the exponent is `max{alpha - D(P^(beta) ‖ P), H_{1/2}(P)}` where
/// `beta` is the tilt whose entropy matches `alpha`.
pub fn j_guesswork_exponent(p: &Pmf, alpha: f64) -> Result<f64> {
    let log_m = (p.len() as f64).ln();
    if !alpha.is_finite() || alpha < -1e-12 || alpha > log_m + 1e-9 {
        return Err(Error::Domain(format!(
            "alpha {alpha} must lie in [0, ln|X|] = [0, {log_m}]"
        )));
    }
    let alpha = alpha.clamp(0.0, log_m);
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let h = shannon_entropy(p);
    if alpha < h {
        return Ok(alpha);
    }
    let (_, q) = entropy_matching_tilt(p, alpha)?;
    let penalty = kl_divergence(&q, p)?;
    Ok((alpha - penalty).max(renyi_entropy(p, 0.5)?))
}

/// Targeted attack with side information: row-wise optimal tilt plus the
/// log of the optimal conditional V-moment,
/// `ln Σ_y P(y) (Σ_x P(x|y)^{1/(1+rho)})^{1+rho}`.
pub fn conditional_optimal_iid(
    c: &ConditionalPmf,
    marginal_y: &Pmf,
    rho: f64,
) -> Result<(ConditionalPmf, f64)> {
    check_rho(rho)?;
    if marginal_y.len() != c.len() {
        return Err(Error::SupportMismatch(format!(
            "marginal over {} values vs {} conditional rows",
            marginal_y.len(),
            c.len()
        )));
    }
    let theta = 1.0 / (1.0 + rho);
    let guesser = crate::pmf::conditional_tilt(c, theta)?;
    let mut expectation = 0.0;
    for (py, row) in marginal_y.probs().iter().zip(c.rows()) {
        let s: f64 = row
            .probs()
            .iter()
            .filter(|&&q| q > 0.0)
            .map(|&q| q.powf(theta))
            .sum();
        expectation += py * s.powf(1.0 + rho);
    }
    Ok((guesser, expectation.ln()))
}

/// Probability that i.i.d. guessing from `phat` finds a target drawn from
/// `p` within `j` queries: `Σ_x p(x) (1 - (1 - phat(x))^j)`.
pub fn iid_success_probability(p: &Pmf, phat: &Pmf, j: u64) -> Result<f64> {
    if !p.same_support(phat) {
        return Err(Error::SupportMismatch(
            "guessing distribution must share the source alphabet".into(),
        ));
    }
    let mut total = 0.0;
    for (&px, &hx) in p.probs().iter().zip(phat.probs()) {
        if px > 0.0 && hx > 0.0 {
            // (1-h)^j via exp/ln would lose precision for small j; powi-style
            // powf is fine here since 0 <= 1-h < 1
            total += px * (1.0 - (1.0 - hx).powf(j as f64));
        }
    }
    Ok(total)
}
