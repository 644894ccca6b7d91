//! Eigenvalue tuples, compositions of `p` and stratum dimensions.
//!
//! A covariance matrix whose ordered eigenvalues come in `d` runs of equal
//! values with sizes `γ = (γ₁, …, γ_d)` lives on a stratum of dimension
//! `d + (p² − Σγₖ²)/2`. Compositions are stored as block sizes; the cut
//! positions `q₁ < … < q_{d−1}` give the bijection with subsets of
//! `{1, …, p−1}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered non-increasing, strictly positive eigenvalues.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSpectrum("empty spectrum".into()));
        }
        if let Some((j, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v <= 0.0)
        {
            return Err(Error::InvalidSpectrum(format!(
                "entry {j} = {v} is not a finite positive value"
            )));
        }
        if let Some(j) = first_order_violation(&values) {
            return Err(Error::InvalidSpectrum(format!(
                "entries {j} and {} are increasing ({} < {})",
                j + 1,
                values[j],
                values[j + 1]
            )));
        }
        Ok(Self(values))
    }

    /// Builds a piecewise-constant spectrum: `values[k]` repeated `parts[k]` times.
    pub fn piecewise(values: &[f64], composition: &Composition) -> Result<Self> {
        if values.len() != composition.len() {
            return Err(Error::DimensionMismatch {
                expected: composition.len(),
                actual: values.len(),
            });
        }
        let expanded = values
            .iter()
            .zip(composition.parts())
            .flat_map(|(&v, &g)| std::iter::repeat_n(v, g))
            .collect();
        Self::new(expanded)
    }

    pub fn constant(value: f64, p: usize) -> Result<Self> {
        Self::new(vec![value; p])
    }

    pub fn p(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn composition(&self, rel_tol: f64) -> Composition {
        composition_of(&self.0, rel_tol)
    }
}

impl AsRef<[f64]> for Spectrum {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A spectrum confined to `1/eps ≥ λ₁ ≥ … ≥ λ_p ≥ eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxedSpectrum {
    values: Vec<f64>,
    eps: f64,
}

impl BoxedSpectrum {
    pub fn new(values: Vec<f64>, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        if values.is_empty() {
            return Err(Error::InvalidSpectrum("empty spectrum".into()));
        }
        let hi = 1.0 / eps;
        if let Some((j, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= eps && **v <= hi))
        {
            return Err(Error::InvalidSpectrum(format!(
                "entry {j} = {v} outside the box [{eps:e}, {hi:e}]"
            )));
        }
        if let Some(j) = first_order_violation(&values) {
            return Err(Error::InvalidSpectrum(format!(
                "entries {j} and {} are increasing",
                j + 1
            )));
        }
        Ok(Self { values, eps })
    }

    /// Caller guarantees the box and order invariants.
    pub(crate) fn new_unchecked(values: Vec<f64>, eps: f64) -> Self {
        debug_assert!(Self::new(values.clone(), eps).is_ok());
        Self { values, eps }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn p(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn to_spectrum(&self) -> Spectrum {
        Spectrum(self.values.clone())
    }

    pub fn composition(&self, rel_tol: f64) -> Composition {
        composition_of(&self.values, rel_tol)
    }
}

impl AsRef<[f64]> for BoxedSpectrum {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "box bound eps must lie in (0, 1), got {eps}"
        )))
    }
}

fn first_order_violation(values: &[f64]) -> Option<usize> {
    values.windows(2).position(|w| w[0] < w[1])
}

/// Block sizes `γ = (γ₁, …, γ_d)` of a composition of `p = Σγₖ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Composition(Vec<usize>);

impl Composition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidComposition("no parts".into()));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidComposition(format!("zero part in {parts:?}")));
        }
        Ok(Self(parts))
    }

    /// The single-block composition `(p)`.
    pub fn isotropic(p: usize) -> Result<Self> {
        Self::new(vec![p])
    }

    /// The all-ones composition `(1, …, 1)`.
    pub fn distinct(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidComposition("p must be positive".into()));
        }
        Ok(Self(vec![1; p]))
    }

    /// Inverse of [`Composition::cuts`]: `cuts` must be strictly increasing in `1..p`.
    pub fn from_cuts(p: usize, cuts: &[usize]) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidComposition("p must be positive".into()));
        }
        let mut parts = Vec::with_capacity(cuts.len() + 1);
        let mut prev = 0;
        for &c in cuts.iter().chain(std::iter::once(&p)) {
            if c <= prev || c > p {
                return Err(Error::InvalidComposition(format!(
                    "cut positions {cuts:?} not strictly increasing within 1..{p}"
                )));
            }
            parts.push(c - prev);
            prev = c;
        }
        Ok(Self(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    /// Number of blocks `d`.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Ambient dimension `p`.
    pub fn ambient(&self) -> usize {
        self.0.iter().sum()
    }

    /// Cumulative sums `q₁ < … < q_{d−1}`, a subset of `{1, …, p−1}`.
    pub fn cuts(&self) -> Vec<usize> {
        self.0[..self.0.len() - 1]
            .iter()
            .scan(0, |acc, &g| {
                *acc += g;
                Some(*acc)
            })
            .collect()
    }

    /// Half-open index ranges of each block.
    pub fn blocks(&self) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        self.0.iter().scan(0, |start, &g| {
            let r = *start..*start + g;
            *start += g;
            Some(r)
        })
    }
}

impl std::fmt::Display for Composition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (k, g) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, ")")
    }
}

/// Dimension `d + (p² − Σγₖ²)/2` of the stratum of matrices with multiplicities `γ`.
pub fn stratum_dimension(gamma: &Composition) -> u64 {
    let p = gamma.ambient() as u64;
    let d = gamma.len() as u64;
    let sq: u64 = gamma.parts().iter().map(|&g| (g as u64) * (g as u64)).sum();
    // p² and Σγₖ² share parity since Σγₖ = p.
    d + (p * p - sq) / 2
}

/// Lexicographic iterator over the compositions of `p`.
///
/// The successor of `(…, a, b)` is `(…, a + 1, 1, …, 1)` with `b − 1` trailing ones.
#[derive(Debug, Clone)]
pub struct Compositions {
    next: Option<Vec<usize>>,
}

impl Compositions {
    pub fn new(p: usize, guard: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidComposition("p must be positive".into()));
        }
        if p > guard {
            return Err(Error::EnumerationGuard { p, guard });
        }
        Ok(Self {
            next: Some(vec![1; p]),
        })
    }
}

impl Iterator for Compositions {
    type Item = Composition;

    fn next(&mut self) -> Option<Composition> {
        let current = self.next.take()?;
        if current.len() > 1 {
            let mut succ = current.clone();
            let last = succ.pop().unwrap_or_default();
            if let Some(prev) = succ.last_mut() {
                *prev += 1;
            }
            succ.extend(std::iter::repeat_n(1, last - 1));
            self.next = Some(succ);
        }
        Some(Composition(current))
    }
}

/// All `2^{p−1}` compositions of `p` in lexicographic order of their parts.
pub fn enumerate_compositions(p: usize, guard: usize) -> Result<Vec<Composition>> {
    Ok(Compositions::new(p, guard)?.collect())
}

/// Groups adjacent entries of a non-increasing, non-negative sequence into
/// blocks whenever `(λ_s − λ_{s+1}) / λ_s ≤ rel_tol`. Exactly equal entries
/// always share a block, zeros included.
pub fn composition_of(values: &[f64], rel_tol: f64) -> Composition {
    assert!(!values.is_empty(), "composition of an empty spectrum");
    let mut parts = vec![1usize];
    for w in values.windows(2) {
        let same = w[0] == w[1] || (w[0] > 0.0 && (w[0] - w[1]) / w[0] <= rel_tol);
        match parts.last_mut() {
            Some(last) if same => *last += 1,
            _ => parts.push(1),
        }
    }
    Composition(parts)
}

/// `1 + ‖δ(λ_s, λ_{s+1})‖₀ + ‖δ(λ_s, λ_t)_{s<t}‖₀`: the stratum dimension
/// written as a count of nonzero eigengaps.
///
/// `delta` must vanish exactly on equal arguments.
pub fn l0_dimension<F>(values: &[f64], delta: F) -> u64
where
    F: Fn(f64, f64) -> f64,
{
    let p = values.len();
    let adjacent = values
        .windows(2)
        .filter(|w| delta(w[0], w[1]) != 0.0)
        .count();
    let mut pairs = 0usize;
    for s in 0..p {
        for t in s + 1..p {
            if delta(values[s], values[t]) != 0.0 {
                pairs += 1;
            }
        }
    }
    1 + adjacent as u64 + pairs as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn comp(parts: &[usize]) -> Composition {
        Composition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn stratum_dimension_anchors() {
        assert_eq!(stratum_dimension(&comp(&[80, 80, 40])), 12803);
        assert_eq!(stratum_dimension(&Composition::isotropic(37).unwrap()), 1);
        assert_eq!(stratum_dimension(&Composition::distinct(20).unwrap()), 210);
        assert_eq!(stratum_dimension(&comp(&[2, 1])), 4);
    }

    #[test]
    fn enumeration_small_cases() {
        assert_eq!(enumerate_compositions(1, 20).unwrap(), vec![comp(&[1])]);
        let three = enumerate_compositions(3, 20).unwrap();
        assert_eq!(
            three,
            vec![comp(&[1, 1, 1]), comp(&[1, 2]), comp(&[2, 1]), comp(&[3])]
        );
        assert_eq!(enumerate_compositions(10, 20).unwrap().len(), 512);
    }

    #[test]
    fn enumeration_is_sorted_unique_and_bijective_with_cut_sets() {
        for p in 1..=10 {
            let all = enumerate_compositions(p, 20).unwrap();
            assert_eq!(all.len(), 1 << (p - 1));
            assert!(all.windows(2).all(|w| w[0] < w[1]), "lexicographic order");
            let cut_sets: HashSet<Vec<usize>> = all.iter().map(|c| c.cuts()).collect();
            assert_eq!(cut_sets.len(), all.len());
            for c in &all {
                assert_eq!(c.ambient(), p);
                assert_eq!(&Composition::from_cuts(p, &c.cuts()).unwrap(), c);
            }
        }
    }

    #[test]
    fn enumeration_guard() {
        let err = enumerate_compositions(21, 20).unwrap_err();
        assert!(err.to_string().contains("exponential enumeration"));
        assert!(Compositions::new(25, 30).is_ok());
    }

    #[test]
    fn composition_of_examples() {
        assert_eq!(composition_of(&[5.0, 5.0, 2.0], 0.0), comp(&[2, 1]));
        assert_eq!(composition_of(&[1.0; 4], 0.0), comp(&[4]));
        assert_eq!(composition_of(&[10.0, 9.999999, 1.0], 1e-6), comp(&[2, 1]));
        assert_eq!(composition_of(&[3.0, 0.0, 0.0], 0.0), comp(&[1, 2]));
    }

    #[test]
    fn l0_dimension_examples() {
        let gap = |a: f64, b: f64| (a - b).abs();
        assert_eq!(l0_dimension(&[3.0, 3.0, 1.0], gap), 4);
        assert_eq!(
            l0_dimension(&[3.0, 3.0, 1.0], gap),
            stratum_dimension(&composition_of(&[3.0, 3.0, 1.0], 0.0))
        );
        assert_eq!(l0_dimension(&[2.5; 6], gap), 1);
        assert_eq!(l0_dimension(&[4.0, 3.0, 2.0, 1.0], gap), 10);
    }

    #[test]
    fn spectrum_validation() {
        assert!(Spectrum::new(vec![]).is_err());
        assert!(Spectrum::new(vec![1.0, 2.0]).is_err());
        assert!(Spectrum::new(vec![1.0, 0.0]).is_err());
        assert!(Spectrum::new(vec![1.0, f64::NAN]).is_err());
        assert!(Spectrum::new(vec![2.0, 2.0, 1.0]).is_ok());
        assert!(BoxedSpectrum::new(vec![1.0, 1e-11], 1e-10).is_err());
        assert!(BoxedSpectrum::new(vec![2e10, 1.0], 1e-10).is_err());
        assert!(BoxedSpectrum::new(vec![1.0, 1e-10], 1e-10).is_ok());
        assert!(BoxedSpectrum::new(vec![1.0], 0.0).is_err());
    }

    #[test]
    fn piecewise_expands_blocks() {
        let s = Spectrum::piecewise(&[10.0, 1.0, 0.1], &comp(&[2, 3, 1])).unwrap();
        assert_eq!(s.as_slice(), &[10.0, 10.0, 1.0, 1.0, 1.0, 0.1]);
        assert_eq!(s.composition(0.0), comp(&[2, 3, 1]));
    }

    #[test]
    fn composition_validation() {
        assert!(Composition::new(vec![]).is_err());
        assert!(Composition::new(vec![1, 0, 2]).is_err());
        assert!(Composition::from_cuts(4, &[2, 2]).is_err());
        assert!(Composition::from_cuts(4, &[4]).is_err());
        assert_eq!(Composition::from_cuts(4, &[]).unwrap(), comp(&[4]));
        assert_eq!(comp(&[2, 1, 3]).to_string(), "(2,1,3)");
    }
}
