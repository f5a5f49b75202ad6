//! Information measures over [`Pmf`]s: Shannon and Rényi entropies,
//! Kullback-Leibler divergence, cross-entropy, and the entropy-matching
//! tilt solver used by the exponent machinery.
//!
//! Everything is reported in nats. Conversions to bits are a presentation
//! concern and live in the CLI.

use crate::error::{Error, Result};
use crate::pmf::{tilt_nonneg, Pmf};

/// Orders this close to 1 are evaluated by the Shannon limit.
pub const RENYI_SHANNON_EPS: f64 = 1e-9;

/// Upper end of the tilt range searched by [`entropy_matching_tilt`].
pub const TILT_BETA_MAX: f64 = 50.0;

/// Bisection tolerance on the entropy-matching condition.
pub const ENTROPY_MATCH_TOL: f64 = 1e-10;

/// Shannon entropy `-Σ p ln p` in nats, with `0 ln 0 = 0`.
pub fn shannon_entropy(p: &Pmf) -> f64 {
    p.probs()
        .iter()
        .filter(|&&q| q > 0.0)
        .map(|&q| -q * q.ln())
        .sum()
}

/// Rényi entropy of order `alpha` in nats:
/// `(1/(1-alpha)) ln Σ p^alpha` for `alpha > 0`, `alpha != 1`.
///
/// Orders within [`RENYI_SHANNON_EPS`] of 1 delegate to the Shannon limit.
pub fn renyi_entropy(p: &Pmf, alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::Domain(format!("Rényi order {alpha} must be positive")));
    }
    if (alpha - 1.0).abs() < RENYI_SHANNON_EPS {
        return Ok(shannon_entropy(p));
    }
    let sum: f64 = p
        .probs()
        .iter()
        .filter(|&&q| q > 0.0)
        .map(|&q| q.powf(alpha))
        .sum();
    Ok(sum.ln() / (1.0 - alpha))
}

/// Kullback-Leibler divergence `D(q ‖ p)` in nats over a shared alphabet.
///
/// Returns `+∞` (a legal value, not an error) when `q` puts mass where `p`
/// has none.
pub fn kl_divergence(q: &Pmf, p: &Pmf) -> Result<f64> {
    check_same_support(q, p)?;
    let mut d = 0.0;
    for (&qi, &pi) in q.probs().iter().zip(p.probs()) {
        if qi > 0.0 {
            if pi == 0.0 {
                return Ok(f64::INFINITY);
            }
            d += qi * (qi / pi).ln();
        }
    }
    Ok(d)
}

/// Cross-entropy `-Σ q ln p` in nats; equals `D(q‖p) + H(q)`.
pub fn cross_entropy(q: &Pmf, p: &Pmf) -> Result<f64> {
    check_same_support(q, p)?;
    let mut c = 0.0;
    for (&qi, &pi) in q.probs().iter().zip(p.probs()) {
        if qi > 0.0 {
            if pi == 0.0 {
                return Ok(f64::INFINITY);
            }
            c -= qi * pi.ln();
        }
    }
    Ok(c)
}

fn check_same_support(q: &Pmf, p: &Pmf) -> Result<()> {
    if !q.same_support(p) {
        return Err(Error::SupportMismatch(
            "divergence requires one shared ordered alphabet".into(),
        ));
    }
    Ok(())
}

/// Find the tilt `beta ∈ [0, TILT_BETA_MAX]` whose tilted distribution has
/// Shannon entropy `alpha`, returning `(beta, tilt(p, beta))`.
///
/// `H(tilt(p, beta))` decreases monotonically from `ln |supp|` at `beta = 0`
/// toward 0, so a plain bisection suffices. Values of `alpha` outside the
/// attainable range clamp to the nearest endpoint. A distribution whose
/// positive probabilities are all equal has constant entropy along the
/// family; the distribution itself is returned with `beta = 1`.
pub fn entropy_matching_tilt(p: &Pmf, alpha: f64) -> Result<(f64, Pmf)> {
    if !alpha.is_finite() || alpha < -1e-12 {
        return Err(Error::Domain(format!("target entropy {alpha}")));
    }
    let uniform = tilt_nonneg(p, 0.0)?;
    let h_top = shannon_entropy(&uniform);
    if alpha > h_top + 1e-9 {
        return Err(Error::Domain(format!(
            "target entropy {alpha} exceeds ln|supp| = {h_top}"
        )));
    }
    let h_p = shannon_entropy(p);
    if (h_top - h_p).abs() <= ENTROPY_MATCH_TOL {
        // flat family (uniform over its support)
        return Ok((1.0, p.clone()));
    }
    if alpha >= h_top {
        return Ok((0.0, uniform));
    }
    let mut lo = 0.0;
    let mut hi = TILT_BETA_MAX;
    let h_bottom = shannon_entropy(&tilt_nonneg(p, hi)?);
    if alpha <= h_bottom {
        return Ok((hi, tilt_nonneg(p, hi)?));
    }
    // invariant: H(tilt(lo)) > alpha > H(tilt(hi))
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let q = tilt_nonneg(p, mid)?;
        let h = shannon_entropy(&q);
        if (h - alpha).abs() <= ENTROPY_MATCH_TOL {
            return Ok((mid, q));
        }
        if h > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = 0.5 * (lo + hi);
    Ok((beta, tilt_nonneg(p, beta)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pmf::tilt;
    use proptest::prelude::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn shannon_entropy_known_values() {
        let u = Pmf::uniform(7).unwrap();
        assert_close(shannon_entropy(&u), (7.0f64).ln(), 1e-14);

        let point = Pmf::new(vec!["a".into(), "b".into()], vec![1.0, 0.0]).unwrap();
        assert_eq!(shannon_entropy(&point), 0.0);

        // high-precision direct evaluation of -0.2 ln 0.2 - 0.8 ln 0.8
        let ber = Pmf::bernoulli(0.2).unwrap();
        assert_close(shannon_entropy(&ber), 0.5004024235381879, 1e-15);
    }

    #[test]
    fn renyi_entropy_known_values() {
        let u = Pmf::uniform(5).unwrap();
        for alpha in [0.25, 0.5, 2.0, 10.0] {
            assert_close(renyi_entropy(&u, alpha).unwrap(), (5.0f64).ln(), 1e-13);
        }

        // (sqrt(0.2) + sqrt(0.8))^2 = 1.8
        let ber = Pmf::bernoulli(0.2).unwrap();
        assert_close(
            renyi_entropy(&ber, 0.5).unwrap(),
            (1.8f64).ln(),
            1e-14,
        );

        let point = Pmf::new(vec!["a".into(), "b".into()], vec![0.0, 1.0]).unwrap();
        for alpha in [0.5, 2.0] {
            assert_eq!(renyi_entropy(&point, alpha).unwrap(), 0.0);
        }

        assert!(renyi_entropy(&ber, 0.0).is_err());
        assert!(renyi_entropy(&ber, -1.0).is_err());
    }

    #[test]
    fn renyi_near_one_uses_shannon_limit() {
        let ber = Pmf::bernoulli(0.2).unwrap();
        let h = shannon_entropy(&ber);
        assert_close(renyi_entropy(&ber, 1.0 + 1e-12).unwrap(), h, 1e-12);
        assert_close(renyi_entropy(&ber, 1.0 - 1e-12).unwrap(), h, 1e-12);
    }

    #[test]
    fn kl_divergence_known_values() {
        let p = Pmf::bernoulli(0.2).unwrap();
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);

        // 0.5 ln(0.5/0.2) + 0.5 ln(0.5/0.8), high-precision direct evaluation
        let q = Pmf::bernoulli(0.5).unwrap();
        assert_close(kl_divergence(&q, &p).unwrap(), 0.22314355131420976, 1e-15);
    }

    #[test]
    fn kl_infinite_when_p_lacks_mass() {
        let q = Pmf::new(vec!["a".into(), "b".into()], vec![0.5, 0.5]).unwrap();
        let p = Pmf::new(vec!["a".into(), "b".into()], vec![1.0, 0.0]).unwrap();
        assert_eq!(kl_divergence(&q, &p).unwrap(), f64::INFINITY);
        assert_eq!(cross_entropy(&q, &p).unwrap(), f64::INFINITY);
    }

    #[test]
    fn divergence_rejects_different_alphabets() {
        let q = Pmf::bernoulli(0.5).unwrap();
        let p = Pmf::new(vec!["x".into(), "y".into()], vec![0.5, 0.5]).unwrap();
        assert!(kl_divergence(&q, &p).is_err());
    }

    #[test]
    fn entropy_matching_endpoints() {
        let p = Pmf::bernoulli(0.2).unwrap();
        let m = p.len() as f64;

        let (beta, q) = entropy_matching_tilt(&p, m.ln()).unwrap();
        assert_eq!(beta, 0.0);
        assert_close(q.prob(0), 0.5, 1e-12);

        let (beta, q) = entropy_matching_tilt(&p, shannon_entropy(&p)).unwrap();
        assert_close(beta, 1.0, 1e-6);
        assert_close(q.prob(0), 0.2, 1e-7);
    }

    #[test]
    fn entropy_matching_hits_target() {
        let p = Pmf::bernoulli(0.2).unwrap();
        for alpha in [0.1, 0.3, 0.45, 0.6, 0.69] {
            let (_, q) = entropy_matching_tilt(&p, alpha).unwrap();
            assert_close(shannon_entropy(&q), alpha, 1e-9);
        }
    }

    #[test]
    fn entropy_matching_flat_family() {
        let u = Pmf::uniform(3).unwrap();
        let (beta, q) = entropy_matching_tilt(&u, 0.5).unwrap();
        assert_eq!(beta, 1.0);
        assert_eq!(q, u);
    }

    fn arb_pmf(max_len: usize) -> impl Strategy<Value = Pmf> {
        proptest::collection::vec(0.01f64..1.0, 2..=max_len).prop_map(|weights| {
            let symbols = (0..weights.len()).map(|i| i.to_string()).collect();
            Pmf::from_weights(symbols, weights).unwrap()
        })
    }

    proptest! {
        // cross_entropy(q,p) = kl(q,p) + shannon(q)
        #[test]
        fn cross_entropy_identity(w in proptest::collection::vec(0.01f64..1.0, 4),
                                  v in proptest::collection::vec(0.01f64..1.0, 4)) {
            let symbols: Vec<String> = (0..4).map(|i| i.to_string()).collect();
            let q = Pmf::from_weights(symbols.clone(), w).unwrap();
            let p = Pmf::from_weights(symbols, v).unwrap();
            let lhs = cross_entropy(&q, &p).unwrap();
            let rhs = kl_divergence(&q, &p).unwrap() + shannon_entropy(&q);
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        // Rényi entropy is non-increasing in the order
        #[test]
        fn renyi_monotone_in_order(p in arb_pmf(8)) {
            let grid = [0.1, 0.3, 0.5, 0.8, 0.999_999_9, 1.5, 2.0, 4.0, 8.0];
            let mut prev = f64::INFINITY;
            for &a in &grid {
                let h = renyi_entropy(&p, a).unwrap();
                prop_assert!(h <= prev + 1e-10, "H_{} = {} > {}", a, h, prev);
                prev = h;
            }
        }
    }
}
