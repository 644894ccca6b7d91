//! The ℓ¹ eigengap penalty
//! `Σ_{s<p} ( δ(λ_s, λ_{s+1}) + Σ_{t>s} δ(λ_s, λ_t) )` and its gradient.
//!
//! Adjacent pairs appear twice, once in each sum. This keeps the weighting
//! of the ℓ⁰ identity, which counts adjacent and all-pairs gaps separately.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Eigengap function `δ(a, b)` on `a ≥ b > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigengapKind {
    /// `(a − b) / a`, invariant to rescaling the spectrum.
    #[default]
    Relative,
    /// `|a − b|`.
    Absolute,
}

impl EigengapKind {
    #[inline]
    pub fn gap(self, a: f64, b: f64) -> f64 {
        match self {
            EigengapKind::Relative => (a - b) / a,
            EigengapKind::Absolute => (a - b).abs(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EigengapKind::Relative => "relative",
            EigengapKind::Absolute => "absolute",
        }
    }
}

impl fmt::Display for EigengapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EigengapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "relative" | "rel" => Ok(EigengapKind::Relative),
            "absolute" | "abs" => Ok(EigengapKind::Absolute),
            other => Err(Error::InvalidParameter(format!(
                "unknown eigengap kind '{other}' (expected relative|absolute)"
            ))),
        }
    }
}

/// The eigengap double sum for an arbitrary gap function.
pub fn penalty_value_with<F>(values: &[f64], delta: F) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let p = values.len();
    let mut total = 0.0;
    for s in 0..p.saturating_sub(1) {
        total += delta(values[s], values[s + 1]);
        for t in s + 1..p {
            total += delta(values[s], values[t]);
        }
    }
    total
}

/// Unweighted eigengap penalty of an ordered positive spectrum. O(p²).
pub fn penalty_value(values: &[f64], kind: EigengapKind) -> f64 {
    penalty_value_with(values, |a, b| kind.gap(a, b))
}

/// [`penalty_value`] regrouped into prefix sums, O(p). Agrees with the
/// double sum up to rounding.
pub(crate) fn penalty_value_linear(values: &[f64], kind: EigengapKind) -> f64 {
    let p = values.len();
    if p < 2 {
        return 0.0;
    }
    let adjacent: f64 = values.windows(2).map(|w| kind.gap(w[0], w[1])).sum();
    let pairs = match kind {
        EigengapKind::Absolute => values
            .iter()
            .enumerate()
            .map(|(j, &v)| v * ((p - 1 - j) as f64 - j as f64))
            .sum::<f64>(),
        EigengapKind::Relative => {
            // Σ_s Σ_{t>s} (1 − λ_t/λ_s) = Σ_s ((p−1−s) − suffix(s+1)/λ_s)
            let mut suffix = 0.0;
            let mut total = 0.0;
            for s in (0..p).rev() {
                total += (p - 1 - s) as f64 - suffix / values[s];
                suffix += values[s];
            }
            total
        }
    };
    adjacent + pairs
}

/// Gradient of [`penalty_value`] with respect to the spectrum, in O(p).
///
/// Uses the closed form on the ordered domain, also at ties.
pub fn penalty_gradient(values: &[f64], kind: EigengapKind) -> Vec<f64> {
    let mut grad = vec![0.0; values.len()];
    penalty_gradient_into(values, kind, &mut grad);
    grad
}

pub(crate) fn penalty_gradient_into(values: &[f64], kind: EigengapKind, grad: &mut [f64]) {
    let p = values.len();
    debug_assert_eq!(grad.len(), p);
    match kind {
        EigengapKind::Absolute => {
            for (j, g) in grad.iter_mut().enumerate() {
                let adjacent = (j + 1 < p) as i64 - (j > 0) as i64;
                let pairs = (p - 1 - j) as i64 - j as i64;
                *g = (adjacent + pairs) as f64;
            }
        }
        EigengapKind::Relative => {
            // ∂/∂a (1 − b/a) = b/a², ∂/∂b (1 − b/a) = −1/a
            let mut suffix = vec![0.0; p + 1];
            for j in (0..p).rev() {
                suffix[j] = suffix[j + 1] + values[j];
            }
            let mut inv_prefix = 0.0;
            for j in 0..p {
                let lam = values[j];
                let mut g = suffix[j + 1] / (lam * lam) - inv_prefix;
                if j + 1 < p {
                    g += values[j + 1] / (lam * lam);
                }
                if j > 0 {
                    g -= 1.0 / values[j - 1];
                }
                grad[j] = g;
                inv_prefix += 1.0 / lam;
            }
        }
    }
}
