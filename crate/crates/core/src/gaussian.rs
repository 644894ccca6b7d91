//! Gaussian negative log-likelihood in spectral form and the penalized
//! objective descended by the eigenvalue solver.
//!
//! With the eigenvectors fixed to those of the sample covariance, the
//! relaxed problem reduces to minimizing over ordered spectra
//!
//! ```text
//! f(λ) = Σ_j (ln λ_j + ℓ_j / λ_j) + (α / n) · penalty(λ)
//! ```
//!
//! where `ℓ` is the sample spectrum. The additive constant `p ln 2π` and the
//! overall factor `n` of `−2 ln L` are dropped.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::estimators::{CovarianceModel, Dataset};
use crate::penalty::{penalty_gradient_into, penalty_value_linear, EigengapKind};
use crate::spectra::{composition_of, stratum_dimension, BoxedSpectrum};
use crate::{DEFAULT_EPS, REPORT_REL_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianObjective {
    sample_spectrum: Vec<f64>,
    n: usize,
    alpha: f64,
    kind: EigengapKind,
}

impl GaussianObjective {
    pub fn new(
        sample_spectrum: Vec<f64>,
        n: usize,
        alpha: f64,
        kind: EigengapKind,
    ) -> Result<Self> {
        if sample_spectrum.is_empty() {
            return Err(Error::InvalidSpectrum("empty sample spectrum".into()));
        }
        if sample_spectrum.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidSpectrum(
                "sample eigenvalues must be finite and non-negative".into(),
            ));
        }
        if sample_spectrum.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidSpectrum(
                "sample eigenvalues must be non-increasing".into(),
            ));
        }
        if n == 0 {
            return Err(Error::InvalidParameter(
                "sample count n must be positive".into(),
            ));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "penalty constant alpha must be finite and non-negative, got {alpha}"
            )));
        }
        Ok(Self {
            sample_spectrum,
            n,
            alpha,
            kind,
        })
    }

    pub fn sample_spectrum(&self) -> &[f64] {
        &self.sample_spectrum
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kind(&self) -> EigengapKind {
        self.kind
    }

    pub fn p(&self) -> usize {
        self.sample_spectrum.len()
    }

    /// Weight `α / n` in front of the penalty.
    pub fn weight(&self) -> f64 {
        self.alpha / self.n as f64
    }

    /// `Σ_j (ln λ_j + ℓ_j/λ_j)`.
    pub fn likelihood_term(&self, lambda: &[f64]) -> f64 {
        lambda
            .iter()
            .zip(&self.sample_spectrum)
            .map(|(&l, &s)| l.ln() + s / l)
            .sum()
    }

    /// Objective at a strictly positive, ordered `lambda`.
    pub fn value(&self, lambda: &[f64]) -> f64 {
        debug_assert_eq!(lambda.len(), self.p());
        let mut f = self.likelihood_term(lambda);
        if self.alpha > 0.0 {
            f += self.weight() * penalty_value_linear(lambda, self.kind);
        }
        f
    }

    pub fn gradient(&self, lambda: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; lambda.len()];
        self.gradient_into(lambda, &mut g);
        g
    }

    pub(crate) fn gradient_into(&self, lambda: &[f64], grad: &mut [f64]) {
        debug_assert_eq!(lambda.len(), self.p());
        if self.alpha > 0.0 {
            penalty_gradient_into(lambda, self.kind, grad);
            let w = self.weight();
            grad.iter_mut().for_each(|g| *g *= w);
        } else {
            grad.iter_mut().for_each(|g| *g = 0.0);
        }
        for ((g, &l), &s) in grad.iter_mut().zip(lambda).zip(&self.sample_spectrum) {
            *g += (l - s) / (l * l);
        }
    }
}

pub fn objective(lambda: &BoxedSpectrum, obj: &GaussianObjective) -> f64 {
    obj.value(lambda.as_slice())
}

pub fn objective_gradient(lambda: &BoxedSpectrum, obj: &GaussianObjective) -> Vec<f64> {
    obj.gradient(lambda.as_slice())
}

/// `−2 ln L(Σ̂)` for a zero-mean Gaussian, `n (p ln 2π + ln det Σ̂ + tr(Σ̂⁻¹ S))`.
///
/// The trace is computed in the model's own eigenvector frame, so it is
/// exact also when that frame differs from the sample one.
pub fn neg2_log_likelihood(model: &CovarianceModel, data: &Dataset) -> Result<f64> {
    let p = data.p();
    if model.p() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            actual: model.p(),
        });
    }
    let eigenvalues = model.eigenvalues();
    let smallest = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if smallest.is_nan() || smallest < DEFAULT_EPS {
        return Err(Error::Singular(smallest));
    }
    let s = data.sample_covariance();
    let q = model.eigenvectors();
    let sq = s * q;
    let mut trace = 0.0;
    for (k, &lam) in eigenvalues.iter().enumerate() {
        trace += q.column(k).dot(&sq.column(k)) / lam;
    }
    let log_det: f64 = eigenvalues.iter().map(|l| l.ln()).sum();
    Ok(data.n() as f64 * (p as f64 * (2.0 * PI).ln() + log_det + trace))
}

/// Penalized likelihood `−2 ln L(Σ̂) + α · dim(Σ̂)`, with the dimension read
/// off the estimate's eigenvalue multiplicities at `rel_tol = 1e−12`.
pub fn penalized_likelihood_score(
    model: &CovarianceModel,
    data: &Dataset,
    alpha: f64,
) -> Result<f64> {
    let dim = stratum_dimension(&composition_of(model.eigenvalues(), REPORT_REL_TOL));
    Ok(neg2_log_likelihood(model, data)? + alpha * dim as f64)
}
