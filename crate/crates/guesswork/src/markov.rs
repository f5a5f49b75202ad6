//! Markov-chain password sources and the eigenvector-derived optimal
//! randomized guessing chain.
//!
//! For a source with transition matrix `U`, the tilted matrix
//! `W_ab = U_ab^{1/(1+rho)}` has Perron-Frobenius eigenvalue `lambda` and
//! right eigenvector `r`; the optimal guessing chain has transitions
//! `W_ab r_b / (lambda r_a)` (row-stochastic by the eigenvalue identity)
//! and the guesswork growth rate is `(1 + rho) ln lambda` per symbol.
//!
//! Note the coefficient: substituting a rank-one source (identical rows
//! equal to a PMF `p`) gives `lambda = Σ p^{1/(1+rho)}`, and matching the
//! i.i.d. exponent `rho * H_{1/(1+rho)}(p)` forces `(1 + rho) ln lambda`.
//! The brute-force and reduction tests below pin this down numerically.

use serde::{Deserialize, Serialize};

use crate::analytics::check_rho;
use crate::error::{Error, Result};
use crate::pmf::Pmf;

/// Row-sum tolerance for stochastic matrices.
const ROW_SUM_TOL: f64 = 1e-12;

/// Residual tolerance for stationarity and eigenvector identities.
const EIGEN_TOL: f64 = 1e-10;

/// Convergence target for successive eigenvalue estimates.
const LAMBDA_TOL: f64 = 1e-12;

const MAX_POWER_ITERS: u64 = 1_000_000;

/// An irreducible finite Markov chain: ordered states, a row-stochastic
/// transition matrix, and its stationary distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovModel {
    states: Vec<String>,
    transitions: Vec<Vec<f64>>,
    stationary: Pmf,
}

impl MarkovModel {
    /// Validate the matrix, check irreducibility by reachability, and
    /// compute the stationary distribution.
    pub fn new(states: Vec<String>, transitions: Vec<Vec<f64>>) -> Result<Self> {
        check_square_nonneg(&transitions, states.len())?;
        for (i, row) in transitions.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "transition row {i} sums to {sum}"
                )));
            }
        }
        if !is_irreducible(&transitions) {
            return Err(Error::ReducibleChain);
        }
        let stationary = stationary_distribution(&states, &transitions)?;
        Ok(Self {
            states,
            transitions,
            stationary,
        })
    }

    /// Build from serialized parts, validating a supplied stationary
    /// distribution instead of recomputing it.
    pub fn with_stationary(
        states: Vec<String>,
        transitions: Vec<Vec<f64>>,
        stationary: Pmf,
    ) -> Result<Self> {
        let model = Self::new(states.clone(), transitions)?;
        if stationary.symbols() != states.as_slice() {
            return Err(Error::SupportMismatch(
                "stationary distribution must be over the chain states".into(),
            ));
        }
        for i in 0..states.len() {
            let mut acc = 0.0;
            for a in 0..states.len() {
                acc += stationary.prob(a) * model.transitions[a][i];
            }
            if (acc - stationary.prob(i)).abs() > EIGEN_TOL {
                return Err(Error::InvalidDistribution(format!(
                    "supplied stationary distribution is not invariant at state {i}"
                )));
            }
        }
        Ok(Self {
            stationary,
            ..model
        })
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn transitions(&self) -> &[Vec<f64>] {
        &self.transitions
    }

    pub fn transition(&self, from: usize, to: usize) -> f64 {
        self.transitions[from][to]
    }

    pub fn stationary(&self) -> &Pmf {
        &self.stationary
    }

    /// A chain whose every row equals `p`; generates i.i.d. symbols.
    pub fn rank_one(p: &Pmf) -> Result<Self> {
        let rows = vec![p.probs().to_vec(); p.len()];
        if p.probs().iter().any(|&q| q == 0.0) {
            return Err(Error::ReducibleChain);
        }
        Self::new(p.symbols().to_vec(), rows)
    }

    /// Log-probability of a state sequence under stationary start.
    pub fn sequence_ln_prob(&self, seq: &[u8]) -> f64 {
        if seq.is_empty() {
            return 0.0;
        }
        let mut lp = self.stationary.prob(seq[0] as usize).ln();
        for w in seq.windows(2) {
            lp += self.transitions[w[0] as usize][w[1] as usize].ln();
        }
        lp
    }
}

/// Perron-Frobenius data for a non-negative irreducible matrix `W`:
/// the dominant eigenvalue and its left/right eigenvectors, normalized so
/// that `Σ l_a = 1` and `l · r = 1`.
#[derive(Debug, Clone, Serialize)]
pub struct PerronData {
    pub lambda: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub w_matrix: Vec<Vec<f64>>,
}

/// Dominant eigenvalue and eigenvectors by power iteration.
///
/// Iterates `(W + I) v`, which is primitive whenever `W` is irreducible, so
/// the iteration converges even for periodic patterns; the shift is removed
/// from the reported eigenvalue. Scalar matrices `c·I` are accepted as a
/// degenerate case with the exact eigenpair.
pub fn perron(w: &[Vec<f64>]) -> Result<PerronData> {
    let n = w.len();
    check_square_nonneg(w, n)?;
    if let Some(c) = scalar_diagonal(w) {
        let left = vec![1.0 / n as f64; n];
        let right = vec![1.0; n];
        return Ok(PerronData {
            lambda: c,
            left,
            right,
            w_matrix: w.to_vec(),
        });
    }
    if !is_irreducible(w) {
        return Err(Error::ReducibleChain);
    }
    let right = power_iterate(w, false)?;
    let left = power_iterate(w, true)?;
    // Rayleigh-style eigenvalue from the converged right vector
    let wr = mat_vec(w, &right, false);
    let lambda = wr.iter().sum::<f64>() / right.iter().sum::<f64>();

    // paper normalization: sum(l) = 1, then l·r = 1
    let lsum: f64 = left.iter().sum();
    let left: Vec<f64> = left.iter().map(|x| x / lsum).collect();
    let dot: f64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
    let right: Vec<f64> = right.iter().map(|x| x / dot).collect();

    let data = PerronData {
        lambda,
        left,
        right,
        w_matrix: w.to_vec(),
    };
    verify_eigenpair(&data)?;
    Ok(data)
}

fn verify_eigenpair(d: &PerronData) -> Result<()> {
    let n = d.right.len();
    let scale = d.lambda.abs().max(1.0);
    let wr = mat_vec(&d.w_matrix, &d.right, false);
    let lw = mat_vec(&d.w_matrix, &d.left, true);
    for i in 0..n {
        if d.left[i] <= 0.0 || d.right[i] <= 0.0 {
            return Err(Error::NonConvergence(MAX_POWER_ITERS));
        }
        if (wr[i] - d.lambda * d.right[i]).abs() > EIGEN_TOL * scale * d.right[i].max(1.0)
            || (lw[i] - d.lambda * d.left[i]).abs() > EIGEN_TOL * scale
        {
            return Err(Error::NonConvergence(MAX_POWER_ITERS));
        }
    }
    Ok(())
}

/// Power iteration on `(W + I)` (or its transpose), L1-normalized each step.
/// Stops once successive eigenvalue estimates differ by less than
/// [`LAMBDA_TOL`] *and* the vector itself has settled; the eigenvalue
/// estimate alone converges instantly for stochastic matrices while the
/// vector is still moving.
fn power_iterate(w: &[Vec<f64>], transpose: bool) -> Result<Vec<f64>> {
    let n = w.len();
    let mut v = vec![1.0 / n as f64; n];
    let mut prev_lambda = f64::NAN;
    for _ in 0..MAX_POWER_ITERS {
        let mut next = mat_vec(w, &v, transpose);
        for (nx, vx) in next.iter_mut().zip(&v) {
            *nx += vx; // the +I shift
        }
        let norm: f64 = next.iter().sum();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::NumericOverflow("power iteration"));
        }
        let lambda = norm - 1.0; // shift removed; v is L1-normalized
        let mut delta = 0.0f64;
        for nx in next.iter_mut() {
            *nx /= norm;
        }
        for (nx, vx) in next.iter().zip(&v) {
            delta = delta.max((nx - vx).abs());
        }
        v = next;
        if (lambda - prev_lambda).abs() < LAMBDA_TOL && delta < 1e-14 {
            return Ok(v);
        }
        prev_lambda = lambda;
    }
    Err(Error::NonConvergence(MAX_POWER_ITERS))
}

fn mat_vec(w: &[Vec<f64>], v: &[f64], transpose: bool) -> Vec<f64> {
    let n = w.len();
    let mut out = vec![0.0; n];
    for a in 0..n {
        for b in 0..n {
            if transpose {
                out[b] += v[a] * w[a][b];
            } else {
                out[a] += w[a][b] * v[b];
            }
        }
    }
    out
}

fn check_square_nonneg(w: &[Vec<f64>], n: usize) -> Result<()> {
    if n == 0 || w.len() != n {
        return Err(Error::Domain("matrix must be square and non-empty".into()));
    }
    for row in w {
        if row.len() != n {
            return Err(Error::Domain("matrix must be square".into()));
        }
        for &x in row {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::Domain(format!("matrix entry {x}")));
            }
        }
    }
    Ok(())
}

fn scalar_diagonal(w: &[Vec<f64>]) -> Option<f64> {
    let c = w[0][0];
    if c <= 0.0 {
        return None;
    }
    for (i, row) in w.iter().enumerate() {
        for (j, &x) in row.iter().enumerate() {
            if (i == j && x != c) || (i != j && x != 0.0) {
                return None;
            }
        }
    }
    Some(c)
}

/// Strong connectivity of the positive-entry digraph (forward and backward
/// reachability from state 0).
fn is_irreducible(w: &[Vec<f64>]) -> bool {
    let n = w.len();
    let reach = |transpose: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(a) = stack.pop() {
            for b in 0..n {
                let edge = if transpose { w[b][a] } else { w[a][b] };
                if edge > 0.0 && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reach(false) && reach(true)
}

fn stationary_distribution(states: &[String], transitions: &[Vec<f64>]) -> Result<Pmf> {
    let n = states.len();
    let mut g = vec![1.0 / n as f64; n];
    // damped iteration g <- g (U + I)/2 kills periodicity
    for _ in 0..MAX_POWER_ITERS {
        let mut next = vec![0.0; n];
        for a in 0..n {
            for b in 0..n {
                next[b] += g[a] * transitions[a][b];
            }
        }
        let mut delta = 0.0f64;
        for b in 0..n {
            next[b] = 0.5 * (next[b] + g[b]);
            delta = delta.max((next[b] - g[b]).abs());
        }
        g = next;
        if delta < 1e-15 {
            break;
        }
    }
    // residual check against the undamped fixed-point equation
    for b in 0..n {
        let mut acc = 0.0;
        for a in 0..n {
            acc += g[a] * transitions[a][b];
        }
        if (acc - g[b]).abs() > EIGEN_TOL {
            return Err(Error::NonConvergence(MAX_POWER_ITERS));
        }
    }
    let sum: f64 = g.iter().sum();
    Pmf::new(states.to_vec(), g.into_iter().map(|x| x / sum).collect())
}

/// The entrywise-tilted transition matrix `W_ab = U_ab^{1/(1+rho)}`.
pub fn tilted_transition_matrix(source: &MarkovModel, rho: f64) -> Result<Vec<Vec<f64>>> {
    check_rho(rho)?;
    let theta = 1.0 / (1.0 + rho);
    Ok(source
        .transitions()
        .iter()
        .map(|row| row.iter().map(|&u| u.powf(theta)).collect())
        .collect())
}

/// The optimal randomized guessing chain `Ŵ_ab = W_ab r_b / (lambda r_a)`.
/// Rows are exactly renormalized (the eigenvalue identity makes them sum
/// to 1 up to solver residual) and the stationary distribution of the new
/// chain is recomputed.
pub fn optimal_markov_guesser(source: &MarkovModel, rho: f64) -> Result<MarkovModel> {
    let w = tilted_transition_matrix(source, rho)?;
    let pd = perron(&w)?;
    let n = source.n_states();
    let mut rows = Vec::with_capacity(n);
    for a in 0..n {
        let mut row: Vec<f64> = (0..n)
            .map(|b| w[a][b] * pd.right[b] / (pd.lambda * pd.right[a]))
            .collect();
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > EIGEN_TOL {
            return Err(Error::NonConvergence(MAX_POWER_ITERS));
        }
        for x in row.iter_mut() {
            *x /= sum;
        }
        rows.push(row);
    }
    MarkovModel::new(source.states().to_vec(), rows)
}

/// Guesswork growth rate of the optimal strategy against a Markov source,
/// `(1 + rho) ln lambda` nats per symbol.
pub fn markov_sync_exponent(source: &MarkovModel, rho: f64) -> Result<f64> {
    let w = tilted_transition_matrix(source, rho)?;
    let pd = perron(&w)?;
    Ok((1.0 + rho) * pd.lambda.ln())
}

/// Exact `E[V_rho] = Σ_x P(x) / P̂(x)^rho` for sequences of length `n`,
/// where the target follows `source` and guesses follow `guesser`, both
/// started from their stationary distributions. Evaluated by a transfer
/// matrix in O(n·|X|²); the Monte Carlo tests lean on this as an
/// independent closed form.
pub fn markov_v_moment(source: &MarkovModel, guesser: &MarkovModel, n: u32, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    if n == 0 {
        return Err(Error::Domain("sequence length must be positive".into()));
    }
    if source.n_states() != guesser.n_states() {
        return Err(Error::SupportMismatch("state spaces differ".into()));
    }
    let k = source.n_states();
    let mut ratio = vec![vec![0.0f64; k]; k];
    for a in 0..k {
        for b in 0..k {
            let u = source.transition(a, b);
            let w = guesser.transition(a, b);
            if u > 0.0 && w == 0.0 {
                return Ok(f64::INFINITY);
            }
            ratio[a][b] = if u == 0.0 { 0.0 } else { u / w.powf(rho) };
        }
    }
    // vec_a = sum over continuations of prod U/What^rho
    let mut vec = vec![1.0f64; k];
    for _ in 0..n - 1 {
        let mut next = vec![0.0f64; k];
        for a in 0..k {
            for b in 0..k {
                next[a] += ratio[a][b] * vec[b];
            }
        }
        vec = next;
    }
    let mut total = 0.0;
    for a in 0..k {
        let ga = source.stationary().prob(a);
        let ha = guesser.stationary().prob(a);
        if ga > 0.0 {
            if ha == 0.0 {
                return Ok(f64::INFINITY);
            }
            total += ga / ha.powf(rho) * vec[a];
        }
    }
    Ok(total)
}
