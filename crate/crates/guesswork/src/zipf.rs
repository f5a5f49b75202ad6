//! Zipf-family password models.
//!
//! Two variants are common in the password-statistics literature:
//! - PDF-Zipf: `p(i) = i^{-s} / H_{m,s}` with the generalized harmonic
//!   normalizer `H_{m,s} = Σ_{j=1..m} j^{-s}`;
//! - CDF-Zipf: `p(i) = C (i^s - (i-1)^s)` with `C = 1/m^s`, so the CDF
//!   `C i^s` reaches exactly 1 at `i = m`. Requires `0 ≤ s ≤ 1`.
//!
//! Ranks are 1-based; the PMF support is `"1" .. "m"` in rank order.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pmf::Pmf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZipfVariant {
    Pdf,
    Cdf,
}

/// A validated Zipf model: alphabet size, exponent, variant, and the
/// normalizing constant (`H_{m,s}` for PDF, `C` for CDF).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZipfSpec {
    pub m: usize,
    pub s: f64,
    pub variant: ZipfVariant,
    pub normalizer: f64,
}

impl ZipfSpec {
    pub fn new(m: usize, s: f64, variant: ZipfVariant) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("Zipf alphabet size must be positive".into()));
        }
        if !s.is_finite() || s < 0.0 {
            return Err(Error::Domain(format!("Zipf exponent {s} must be ≥ 0")));
        }
        if variant == ZipfVariant::Cdf && s > 1.0 {
            return Err(Error::Domain(format!(
                "CDF-Zipf exponent {s} must lie in [0, 1]"
            )));
        }
        let normalizer = match variant {
            ZipfVariant::Pdf => generalized_harmonic(m, s),
            ZipfVariant::Cdf => 1.0 / (m as f64).powf(s),
        };
        Ok(Self {
            m,
            s,
            variant,
            normalizer,
        })
    }

    /// Re-check the stored normalizer against a fresh computation; used
    /// when a spec arrives from a file rather than from [`ZipfSpec::new`].
    pub fn validate(&self) -> Result<()> {
        let fresh = Self::new(self.m, self.s, self.variant)?;
        let scale = fresh.normalizer.abs().max(1.0);
        if (self.normalizer - fresh.normalizer).abs() > 1e-12 * scale {
            return Err(Error::InvalidDistribution(format!(
                "stored normalizer {} disagrees with recomputed {}",
                self.normalizer, fresh.normalizer
            )));
        }
        Ok(())
    }
}

/// Generalized harmonic number `H_{m,s} = Σ_{j=1..m} j^{-s}`.
pub fn generalized_harmonic(m: usize, s: f64) -> f64 {
    (1..=m).map(|j| (j as f64).powf(-s)).sum()
}

/// Materialize the model as a [`Pmf`] over ranks `"1" .. "m"`.
pub fn zipf_pmf(spec: &ZipfSpec) -> Result<Pmf> {
    spec.validate()?;
    let symbols: Vec<String> = (1..=spec.m).map(|i| i.to_string()).collect();
    let weights: Vec<f64> = match spec.variant {
        ZipfVariant::Pdf => (1..=spec.m).map(|i| (i as f64).powf(-spec.s)).collect(),
        ZipfVariant::Cdf => (1..=spec.m)
            .map(|i| {
                let hi = (i as f64).powf(spec.s);
                let lo = if i == 1 { 0.0 } else { ((i - 1) as f64).powf(spec.s) };
                hi - lo
            })
            .collect(),
    };
    Pmf::from_weights(symbols, weights)
}
