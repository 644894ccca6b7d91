//! Euclidean projection onto the bounded monotone cone
//! `K_ε(p) = {λ : 1/ε ≥ λ₁ ≥ … ≥ λ_p ≥ ε}`.
//!
//! The projection onto the non-increasing cone is an isotonic regression,
//! solved by pooling adjacent violators in one forward pass. Clamping the
//! result into `[ε, 1/ε]` afterwards gives the exact projection onto the
//! intersection with the box.

use crate::error::Result;
use crate::spectra::{check_eps, composition_of, BoxedSpectrum, Composition};

/// Output of [`project_box_monotone`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub projected: BoxedSpectrum,
    /// Exact-equality runs of `projected`.
    pub blocks: Composition,
    pub clipped_low: usize,
    pub clipped_high: usize,
}

#[derive(Clone, Copy)]
struct Pool {
    sum: f64,
    len: usize,
}

impl Pool {
    fn mean(&self) -> f64 {
        self.sum / self.len as f64
    }
}

fn pools(x: &[f64]) -> Vec<Pool> {
    let mut stack: Vec<Pool> = Vec::with_capacity(x.len());
    for &v in x {
        let mut cur = Pool { sum: v, len: 1 };
        // A pool may not exceed the mean of the pool before it.
        while let Some(prev) = stack.last() {
            if prev.mean() < cur.mean() {
                cur.sum += prev.sum;
                cur.len += prev.len;
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(cur);
    }
    stack
}

fn expand(pools: &[Pool], out: &mut Vec<f64>) {
    out.clear();
    for pool in pools {
        out.extend(std::iter::repeat_n(pool.mean(), pool.len));
    }
}

/// Projection of `x` onto `{y : y₁ ≥ … ≥ y_p}` in linear time.
///
/// Every entry of a pooled block receives the same value, the mean of the
/// pooled inputs.
pub fn pava_decreasing(x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    expand(&pools(x), &mut out);
    out
}

/// In-place variant of [`project_box_monotone`] used by the solver.
/// Returns the number of entries clamped at the lower and upper bounds.
pub(crate) fn project_into(x: &[f64], eps: f64, out: &mut Vec<f64>) -> (usize, usize) {
    expand(&pools(x), out);
    let hi = 1.0 / eps;
    let (mut low, mut high) = (0, 0);
    for v in out.iter_mut() {
        if *v < eps {
            *v = eps;
            low += 1;
        } else if *v > hi {
            *v = hi;
            high += 1;
        }
    }
    (low, high)
}

/// Projection of `x` onto `K_ε(p)`: pool adjacent violators, then clamp.
pub fn project_box_monotone(x: &[f64], eps: f64) -> Result<ProjectionResult> {
    check_eps(eps)?;
    if x.is_empty() {
        return Err(crate::Error::InvalidSpectrum("empty vector".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(crate::Error::InvalidSpectrum(
            "non-finite entry in projection input".into(),
        ));
    }
    let mut out = Vec::with_capacity(x.len());
    let (clipped_low, clipped_high) = project_into(x, eps, &mut out);
    let blocks = composition_of(&out, 0.0);
    Ok(ProjectionResult {
        projected: BoxedSpectrum::new_unchecked(out, eps),
        blocks,
        clipped_low,
        clipped_high,
    })
}
