//! Independent brute-force references.
//!
//! Everything in here is deliberately unclever: enumerate, sort, scan.
//! These routines exist so that every analytic result in the crate can be
//! checked against a computation that shares none of its code path.
//! Agreement expectations: exact formulas to 1e-9 relative, grid
//! minimizations to 1e-5 absolute, interleaving counts exactly.

use rayon::prelude::*;

use crate::analytics::check_rho;
use crate::error::{Error, Result};
use crate::pmf::{advance, Pmf};

/// Enumeration cap: desk-scale runs stay under a minute below this.
pub const MAX_ENUMERATION: u64 = 10_000_000;

/// Total interleaving-prefix length cap (the interleaving count is
/// multinomial in the lengths).
pub const MAX_INTERLEAVING_ITEMS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    ExhaustiveEnumeration,
    GridMinimization,
    InterleavingSearch,
    TruncatedSeries,
}

/// A brute-force result with the amount of work spent producing it.
#[derive(Debug, Clone, Copy)]
pub struct OracleResult {
    pub value: f64,
    pub method: OracleMethod,
    pub work: u64,
}

/// `rho`-th optimal-guessing moment computed literally: enumerate all
/// `|X|^n` sequences, sort by descending probability (ties broken by the
/// lexicographic enumeration order), and sum `rank^rho * prob`.
pub fn exhaustive_guesswork(p: &Pmf, n: u32, rho: f64) -> Result<OracleResult> {
    check_rho(rho)?;
    let m = p.len() as u128;
    let total = m
        .checked_pow(n)
        .filter(|&t| t <= MAX_ENUMERATION as u128 && n > 0)
        .ok_or_else(|| Error::SizeCap(format!("{m}^{n} sequences")))?;
    let ln_p: Vec<f64> = p.probs().iter().map(|&q| q.ln()).collect();
    let mut probs = Vec::with_capacity(total as usize);
    let mut counts = vec![0u32; p.len()];
    let mut idx = vec![0usize; n as usize];
    loop {
        for c in counts.iter_mut() {
            *c = 0;
        }
        for &i in idx.iter() {
            counts[i] += 1;
        }
        // summing counts in symbol order makes equal types bit-identical,
        // which keeps the tie-break honest
        let mut lp = 0.0;
        for (c, l) in counts.iter().zip(&ln_p) {
            if *c > 0 {
                lp += *c as f64 * *l;
            }
        }
        probs.push(lp.exp());
        if !advance(&mut idx, p.len()) {
            break;
        }
    }
    let mut result = exhaustive_list_moment(&probs, rho)?;
    result.work = total as u64;
    Ok(result)
}

/// `Σ rank^rho prob` for an explicit collection of outcome probabilities
/// given in the order that breaks ties (stable descending sort).
pub fn exhaustive_list_moment(probs: &[f64], rho: f64) -> Result<OracleResult> {
    check_rho(rho)?;
    if probs.is_empty() {
        return Err(Error::Domain("no outcomes to enumerate".into()));
    }
    let mut order: Vec<u32> = (0..probs.len() as u32).collect();
    order.sort_by(|&a, &b| probs[b as usize].partial_cmp(&probs[a as usize]).unwrap());
    let mut value = 0.0;
    for (pos, &i) in order.iter().enumerate() {
        value += ((pos + 1) as f64).powf(rho) * probs[i as usize];
    }
    Ok(OracleResult {
        value,
        method: OracleMethod::ExhaustiveEnumeration,
        work: probs.len() as u64,
    })
}

/// Global minimum of an objective over a grid on the 2- or 3-point
/// probability simplex. Returns the minimizing distribution alongside the
/// value; grid ties resolve to the smallest grid index so results do not
/// depend on how the scan is partitioned across threads.
pub fn simplex_grid_min<F>(
    alphabet: usize,
    step: f64,
    objective: F,
) -> Result<(OracleResult, Vec<f64>)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    match alphabet {
        2 => {
            if !(step > 0.0) || step > 1e-6 + 1e-18 {
                return Err(Error::Domain(format!(
                    "binary grid step {step} must be at most 1e-6"
                )));
            }
        }
        3 => {
            if !(step > 0.0) || step > 1e-3 + 1e-15 {
                return Err(Error::Domain(format!(
                    "ternary grid step {step} must be at most 1e-3"
                )));
            }
        }
        _ => {
            return Err(Error::Domain(format!(
                "grid search supports alphabets of size 2 or 3, got {alphabet}"
            )))
        }
    }
    let k = (1.0 / step).round() as u64;
    if alphabet == 2 {
        let best = (0..=k)
            .into_par_iter()
            .map(|i| {
                let q = (i as f64 * step).min(1.0);
                let v = objective(&[q, 1.0 - q]);
                (OrderedMin { value: v, index: i }, ())
            })
            .map(|(m, _)| m)
            .reduce(OrderedMin::worst, OrderedMin::take);
        let q = (best.index as f64 * step).min(1.0);
        Ok((
            OracleResult {
                value: best.value,
                method: OracleMethod::GridMinimization,
                work: k + 1,
            },
            vec![q, 1.0 - q],
        ))
    } else {
        let best = (0..=k)
            .into_par_iter()
            .map(|i| {
                let q0 = (i as f64 * step).min(1.0);
                let mut local = OrderedMin::worst();
                for j in 0..=(k - i) {
                    let q1 = (j as f64 * step).min(1.0 - q0);
                    let q2 = (1.0 - q0 - q1).max(0.0);
                    let v = objective(&[q0, q1, q2]);
                    local = local.take(OrderedMin {
                        value: v,
                        index: i * (k + 1) + j,
                    });
                }
                local
            })
            .reduce(OrderedMin::worst, OrderedMin::take);
        let i = best.index / (k + 1);
        let j = best.index % (k + 1);
        let q0 = (i as f64 * step).min(1.0);
        let q1 = (j as f64 * step).min(1.0 - q0);
        let work = (k + 1) * (k + 2) / 2;
        Ok((
            OracleResult {
                value: best.value,
                method: OracleMethod::GridMinimization,
                work,
            },
            vec![q0, q1, (1.0 - q0 - q1).max(0.0)],
        ))
    }
}

#[derive(Clone, Copy)]
struct OrderedMin {
    value: f64,
    index: u64,
}

impl OrderedMin {
    fn worst() -> Self {
        Self {
            value: f64::INFINITY,
            index: u64::MAX,
        }
    }

    fn take(self, other: Self) -> Self {
        if other.value < self.value || (other.value == self.value && other.index < self.index) {
            other
        } else {
            self
        }
    }
}

/// Exact worst first-hit position over every order-preserving interleaving
/// of the given per-agent prefix lists. `None` in the value position is
/// encoded as `f64::INFINITY` (no interleaving ever reaches the target,
/// i.e. no list contains it).
pub fn interleaving_search<T: PartialEq>(lists: &[Vec<T>], target: &T) -> Result<OracleResult> {
    if lists.is_empty() {
        return Err(Error::Domain("at least one agent list is required".into()));
    }
    let total: usize = lists.iter().map(|l| l.len()).sum();
    if total > MAX_INTERLEAVING_ITEMS {
        return Err(Error::SizeCap(format!(
            "{total} prefix items exceed the interleaving cap of {MAX_INTERLEAVING_ITEMS}"
        )));
    }
    let covered = lists.iter().any(|l| l.iter().any(|x| x == target));
    if !covered {
        return Ok(OracleResult {
            value: f64::INFINITY,
            method: OracleMethod::InterleavingSearch,
            work: 0,
        });
    }
    let mut pointers = vec![0usize; lists.len()];
    let mut work = 0u64;
    let worst = dfs_worst(lists, target, &mut pointers, 0, &mut work);
    Ok(OracleResult {
        value: worst as f64,
        method: OracleMethod::InterleavingSearch,
        work,
    })
}

fn dfs_worst<T: PartialEq>(
    lists: &[Vec<T>],
    target: &T,
    pointers: &mut Vec<usize>,
    delivered: u64,
    work: &mut u64,
) -> u64 {
    let mut worst = 0u64;
    let mut any = false;
    for a in 0..lists.len() {
        let k = pointers[a];
        if k >= lists[a].len() {
            continue;
        }
        any = true;
        *work += 1;
        let hit = lists[a][k] == *target;
        let position = if hit {
            delivered + 1
        } else {
            pointers[a] += 1;
            let w = dfs_worst(lists, target, pointers, delivered + 1, work);
            pointers[a] -= 1;
            w
        };
        worst = worst.max(position);
    }
    debug_assert!(any, "caller guarantees some list still covers the target");
    worst
}

/// Truncated evaluation of the geometric `rho`-th moment
/// `Σ_{k≥1} k^rho (1-p_hit)^{k-1} p_hit`, stopping once a rigorous
/// geometric-ratio tail bound falls below `tail_eps` of the running sum.
/// This is an independent twin of the series inside the analytics module;
/// the two are compared against each other and against closed forms.
pub fn truncated_series_moment(p_hit: f64, rho: f64, tail_eps: f64) -> Result<OracleResult> {
    check_rho(rho)?;
    if !(p_hit > 0.0 && p_hit <= 1.0) {
        return Err(Error::Domain(format!("hit probability {p_hit}")));
    }
    if !(tail_eps > 0.0) {
        return Err(Error::Domain(format!("tail_eps {tail_eps}")));
    }
    let r = 1.0 - p_hit;
    let mut sum = 0.0;
    let mut weight = p_hit;
    let mut k: u64 = 1;
    loop {
        let term = (k as f64).powf(rho) * weight;
        sum += term;
        let ratio = (1.0 + 1.0 / k as f64).powf(rho) * r;
        if ratio < 1.0 && term * ratio / (1.0 - ratio) < tail_eps * sum {
            return Ok(OracleResult {
                value: sum,
                method: OracleMethod::TruncatedSeries,
                work: k,
            });
        }
        if k >= 200_000_000 {
            return Err(Error::NonConvergence(k));
        }
        weight *= r;
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{arikan_bounds, exact_guesswork_moment};
    use crate::info::{kl_divergence, shannon_entropy};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn exhaustive_matches_exact_moment_at_n1() {
        let p = Pmf::from_weights(
            (0..5).map(|i| i.to_string()).collect(),
            vec![5.0, 4.0, 3.0, 2.0, 1.0],
        )
        .unwrap();
        for rho in [0.5, 1.0, 2.0] {
            let o = exhaustive_guesswork(&p, 1, rho).unwrap();
            let e = exact_guesswork_moment(&p, rho).unwrap().value;
            assert_close(o.value, e, 1e-12 * e);
        }
    }

    #[test]
    fn exhaustive_uniform_n3() {
        let u = Pmf::uniform(2).unwrap();
        let o = exhaustive_guesswork(&u, 3, 1.0).unwrap();
        assert_close(o.value, 4.5, 1e-12);
        assert_eq!(o.work, 8);
    }

    #[test]
    fn exhaustive_product_sits_inside_arikan_bounds() {
        let p = Pmf::bernoulli(0.2).unwrap();
        let o = exhaustive_guesswork(&p, 10, 1.0).unwrap();
        let p10 = p.product(10).unwrap();
        let (lo, hi) = arikan_bounds(&p10, 1.0).unwrap();
        assert!(lo.value <= o.value && o.value <= hi.value);
    }

    #[test]
    fn exhaustive_respects_size_cap() {
        let p = Pmf::uniform(10).unwrap();
        assert!(exhaustive_guesswork(&p, 8, 1.0).is_err());
    }

    #[test]
    fn grid_min_finds_divergence_minimum() {
        let p = Pmf::bernoulli(0.3).unwrap();
        let obj = |q: &[f64]| {
            let qp = Pmf::new(vec!["0".into(), "1".into()], vec![q[0], q[1]]);
            match qp {
                Ok(qp) => kl_divergence(&qp, &p).unwrap(),
                Err(_) => f64::INFINITY,
            }
        };
        let (res, argmin) = simplex_grid_min(2, 1e-6, obj).unwrap();
        assert!(res.value <= 1e-10);
        assert_close(argmin[0], 0.3, 2e-6);
    }

    #[test]
    fn grid_min_ternary_entropy_max() {
        // minimizing -H finds the uniform point
        let obj = |q: &[f64]| {
            q.iter()
                .filter(|&&x| x > 0.0)
                .map(|&x| x * x.ln())
                .sum::<f64>()
        };
        let (res, argmin) = simplex_grid_min(3, 1e-3, obj).unwrap();
        assert_close(-res.value, (3.0f64).ln(), 1e-5);
        for &q in &argmin {
            assert_close(q, 1.0 / 3.0, 2e-3);
        }
    }

    #[test]
    fn grid_rejects_coarse_steps() {
        assert!(simplex_grid_min(2, 1e-3, |_| 0.0).is_err());
        assert!(simplex_grid_min(3, 1e-2, |_| 0.0).is_err());
        assert!(simplex_grid_min(4, 1e-6, |_| 0.0).is_err());
    }

    #[test]
    fn interleaving_replicated_lists() {
        // 2 agents, identical 3-item lists, target at rank 2: worst is 2(2-1)+1
        let list = vec!["a", "b", "c"];
        let lists = vec![list.clone(), list];
        let res = interleaving_search(&lists, &"b").unwrap();
        assert_eq!(res.value, 3.0);
    }

    #[test]
    fn interleaving_single_agent_is_rank() {
        let lists = vec![vec![10, 20, 30]];
        assert_eq!(interleaving_search(&lists, &30).unwrap().value, 3.0);
    }

    #[test]
    fn interleaving_partitioned_lists() {
        // cells {a,b} and {c}: target c arrives worst after all of cell 1
        let lists = vec![vec!["a", "b"], vec!["c"]];
        let res = interleaving_search(&lists, &"c").unwrap();
        assert_eq!(res.value, 3.0);
    }

    #[test]
    fn interleaving_uncovered_target_is_infinite() {
        let lists = vec![vec![1, 2], vec![3]];
        assert_eq!(interleaving_search(&lists, &9).unwrap().value, f64::INFINITY);
    }

    #[test]
    fn series_closed_forms() {
        let one = truncated_series_moment(1.0, 3.0, 1e-9).unwrap();
        assert_eq!(one.value, 1.0);

        // mean of a geometric is 1/p
        for p in [0.9, 0.5, 0.05] {
            let res = truncated_series_moment(p, 1.0, 1e-10).unwrap();
            assert_close(res.value, 1.0 / p, 1e-8 / p);
        }

        // second moment (2-p)/p^2
        let res = truncated_series_moment(0.5, 2.0, 1e-11).unwrap();
        assert_close(res.value, 6.0, 1e-8);
    }

    #[test]
    fn budgeted_objective_vanishes_for_matched_guessing() {
        // D(q||p) + [cross(q, p) - alpha]_+ at a generous budget: taking
        // q = p zeroes both terms
        let p = Pmf::bernoulli(0.2).unwrap();
        let alpha = 0.6; // above H(p) ≈ 0.5004
        let (res, argmin) = simplex_grid_min(2, 1e-6, |q| {
            let qp = match Pmf::new(vec!["0".into(), "1".into()], vec![q[0], q[1]]) {
                Ok(qp) => qp,
                Err(_) => return f64::INFINITY,
            };
            let d = kl_divergence(&qp, &p).unwrap();
            let cross = d + shannon_entropy(&qp);
            d + (cross - alpha).max(0.0)
        })
        .unwrap();
        assert!(res.value <= 1e-9, "minimum {}", res.value);
        assert_close(argmin[0], 0.2, 2e-6);
    }

    #[test]
    fn entropy_objective_grid_sanity() {
        // the grid sees the same entropy the closed form computes
        let (res, _) = simplex_grid_min(2, 1e-6, |q| {
            let p = Pmf::new(vec!["0".into(), "1".into()], vec![q[0], q[1]]).unwrap();
            -shannon_entropy(&p)
        })
        .unwrap();
        assert_close(-res.value, (2.0f64).ln(), 1e-9);
    }
}
