//! Finite-alphabet probability mass functions.
//!
//! [`Pmf`] is the workhorse of the whole crate: an ordered list of opaque
//! symbol identifiers with their probabilities. Support order is canonical
//! (insertion order for empirical data, index order for synthetic models)
//! and every operation preserves it. All values are immutable after
//! construction, so everything here is safe to share across threads.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for accepting that probabilities sum to 1.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Maximum drift the renormalizing constructor will silently repair.
/// Larger drift is treated as an ingestion bug, not float noise.
pub const RENORM_DRIFT_CAP: f64 = 1e-6;

/// Separator used when building product-distribution symbols.
const PRODUCT_SEP: char = '\u{1f}';

/// A probability distribution over a finite, ordered alphabet.
///
/// Invariants enforced at construction:
/// - probabilities are finite, non-negative, and sum to 1 within
///   [`PROB_SUM_TOL`];
/// - symbols are unique;
/// - support order is preserved by all operations.
///
/// Zero-probability symbols are permitted: empirical corpora truncated to a
/// top-K prefix need padding-free handling. They are dropped from tilting
/// denominators and entropy sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pmf {
    symbols: Vec<String>,
    probs: Vec<f64>,
}

impl Pmf {
    /// Build a PMF, validating every invariant. The probabilities must
    /// already sum to 1 within [`PROB_SUM_TOL`].
    pub fn new(symbols: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if symbols.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} symbols vs {} probabilities",
                symbols.len(),
                probs.len()
            )));
        }
        if symbols.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        check_unique(&symbols)?;
        let mut sum = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "probability {p} at index {i}"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self { symbols, probs })
    }

    /// Build a PMF from probabilities that may have drifted slightly from
    /// sum 1 (file round-trips, truncated decimal dumps). Errors if the
    /// drift exceeds [`RENORM_DRIFT_CAP`].
    pub fn renormalized(symbols: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        let sum: f64 = probs.iter().sum();
        if !sum.is_finite() || (sum - 1.0).abs() > RENORM_DRIFT_CAP {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}; drift exceeds {RENORM_DRIFT_CAP}"
            )));
        }
        let probs = probs.into_iter().map(|p| p / sum).collect();
        Self::new(symbols, probs)
    }

    /// Build a PMF proportional to arbitrary non-negative weights
    /// (at least one positive). Used for count data and top-K truncation,
    /// where deliberate renormalization is the point.
    pub fn from_weights(symbols: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        let mut sum = 0.0;
        for &w in &weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidDistribution(format!("weight {w}")));
            }
            sum += w;
        }
        if sum <= 0.0 {
            return Err(Error::InvalidDistribution("all weights are zero".into()));
        }
        let probs = weights.into_iter().map(|w| w / sum).collect();
        Self::new(symbols, probs)
    }

    /// Uniform distribution over `m` symbols named `"0"` through `"m-1"`.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("uniform PMF needs at least one symbol".into()));
        }
        let symbols = (0..m).map(|i| i.to_string()).collect();
        let probs = vec![1.0 / m as f64; m];
        Self::new(symbols, probs)
    }

    /// Bernoulli distribution with `P("0") = p0`, `P("1") = 1 - p0`.
    pub fn bernoulli(p0: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::Domain(format!("Bernoulli parameter {p0}")));
        }
        Self::new(vec!["0".into(), "1".into()], vec![p0, 1.0 - p0])
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    /// Index of the first most-likely symbol (ties broken by support order).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for i in 1..self.probs.len() {
            if self.probs[i] > self.probs[best] {
                best = i;
            }
        }
        best
    }

    /// Number of symbols with strictly positive probability.
    pub fn support_size(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }

    /// True when the two PMFs are defined over the identical ordered alphabet.
    pub fn same_support(&self, other: &Pmf) -> bool {
        self.symbols == other.symbols
    }

    /// The n-fold product distribution, treated as a single PMF over
    /// sequences. Sequence symbols are the component symbols joined with a
    /// unit separator; sequence order is the odometer (lexicographic) order
    /// over component indices. Capped at 10^7 sequences.
    pub fn product(&self, n: u32) -> Result<Self> {
        let m = self.len() as u128;
        let total = m
            .checked_pow(n)
            .ok_or_else(|| Error::SizeCap(format!("{m}^{n} sequences")))?;
        if n == 0 || total > crate::oracle::MAX_ENUMERATION as u128 {
            return Err(Error::SizeCap(format!("{m}^{n} sequences")));
        }
        let total = total as usize;
        let mut symbols = Vec::with_capacity(total);
        let mut probs = Vec::with_capacity(total);
        let mut idx = vec![0usize; n as usize];
        loop {
            let mut name = String::new();
            let mut lp = 0.0;
            for (pos, &i) in idx.iter().enumerate() {
                if pos > 0 {
                    name.push(PRODUCT_SEP);
                }
                name.push_str(&self.symbols[i]);
                lp += self.probs[i].ln();
            }
            symbols.push(name);
            probs.push(lp.exp());
            if !advance(&mut idx, self.len()) {
                break;
            }
        }
        let sum: f64 = probs.iter().sum();
        let probs = probs.into_iter().map(|p| p / sum).collect();
        Self::new(symbols, probs)
    }
}

/// Advance an odometer over `base` digits; returns false after wrapping.
pub(crate) fn advance(idx: &mut [usize], base: usize) -> bool {
    for d in idx.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

fn check_unique(symbols: &[String]) -> Result<()> {
    let mut seen = std::collections::HashSet::with_capacity(symbols.len());
    for s in symbols {
        if !seen.insert(s.as_str()) {
            return Err(Error::InvalidDistribution(format!("duplicate symbol {s:?}")));
        }
    }
    Ok(())
}

/// Exponential tilt of a distribution: `result(x) ∝ p(x)^theta`.
///
/// Computed in log space so that extreme `theta` with tiny probabilities
/// cannot overflow. Zero-probability symbols stay zero and are excluded
/// from the normalizer. Requires `theta > 0`.
pub fn tilt(p: &Pmf, theta: f64) -> Result<Pmf> {
    if !theta.is_finite() || theta <= 0.0 {
        return Err(Error::Domain(format!("tilt exponent {theta} must be positive")));
    }
    tilt_nonneg(p, theta)
}

/// Tilt that additionally admits `theta == 0` (uniform over the support).
/// The breach-probability solvers sweep tilt parameters down to zero.
pub(crate) fn tilt_nonneg(p: &Pmf, theta: f64) -> Result<Pmf> {
    // log-sum-exp over the positive part of the support
    let mut max = f64::NEG_INFINITY;
    let logw: Vec<f64> = p
        .probs
        .iter()
        .map(|&q| {
            if q > 0.0 {
                let lw = theta * q.ln();
                if lw > max {
                    max = lw;
                }
                lw
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect();
    if !max.is_finite() {
        return Err(Error::InvalidDistribution(
            "tilt requires at least one positive probability".into(),
        ));
    }
    let mut sum = 0.0;
    let weights: Vec<f64> = logw
        .iter()
        .map(|&lw| {
            if lw.is_finite() {
                let w = (lw - max).exp();
                sum += w;
                w
            } else {
                0.0
            }
        })
        .collect();
    if !sum.is_finite() || sum <= 0.0 {
        return Err(Error::NumericOverflow("tilt normalizer"));
    }
    let probs: Vec<f64> = weights.into_iter().map(|w| w / sum).collect();
    if probs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericOverflow("tilted probability"));
    }
    Pmf::new(p.symbols.clone(), probs)
}

/// Empirical distribution from `(symbol, count)` rows. Support is ordered by
/// descending count, ties broken lexicographically so results are
/// reproducible.
pub fn empirical_from_counts(rows: &[(String, u64)]) -> Result<Pmf> {
    if rows.is_empty() {
        return Err(Error::InvalidDistribution("no count rows".into()));
    }
    for (sym, count) in rows {
        if *count == 0 {
            return Err(Error::InvalidDistribution(format!("zero count for {sym:?}")));
        }
    }
    let mut sorted: Vec<&(String, u64)> = rows.iter().collect();
    sorted.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let symbols: Vec<String> = sorted.iter().map(|(s, _)| s.clone()).collect();
    check_unique(&symbols)?;
    let weights: Vec<f64> = sorted.iter().map(|(_, c)| *c as f64).collect();
    Pmf::from_weights(symbols, weights)
}

/// A family of conditional distributions P(X | Y = y), one [`Pmf`] row per
/// side-information value. All rows share the same X alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalPmf {
    y_symbols: Vec<String>,
    rows: Vec<Pmf>,
}

impl ConditionalPmf {
    pub fn new(y_symbols: Vec<String>, rows: Vec<Pmf>) -> Result<Self> {
        if y_symbols.len() != rows.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} side-information values vs {} rows",
                y_symbols.len(),
                rows.len()
            )));
        }
        if rows.is_empty() {
            return Err(Error::InvalidDistribution("empty conditional family".into()));
        }
        check_unique(&y_symbols)?;
        for row in &rows[1..] {
            if !row.same_support(&rows[0]) {
                return Err(Error::SupportMismatch(
                    "conditional rows must share one X alphabet".into(),
                ));
            }
        }
        Ok(Self { y_symbols, rows })
    }

    pub fn y_symbols(&self) -> &[String] {
        &self.y_symbols
    }

    pub fn rows(&self) -> &[Pmf] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &Pmf {
        &self.rows[i]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Row-wise tilt of a conditional family.
pub fn conditional_tilt(c: &ConditionalPmf, theta: f64) -> Result<ConditionalPmf> {
    let rows = c
        .rows
        .iter()
        .map(|row| tilt(row, theta))
        .collect::<Result<Vec<_>>>()?;
    ConditionalPmf::new(c.y_symbols.clone(), rows)
}
