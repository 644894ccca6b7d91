//! Projected gradient descent on `K_ε(p)` for the eigengap-penalized
//! Gaussian objective.
//!
//! Each iteration takes a gradient step and projects back onto the bounded
//! monotone cone. Eigenvalues pushed across their neighbours by the step
//! are pooled by the projection, which is how equal eigenvalues (and hence
//! parsimony) arise. The step size comes from a backtracking line search
//! on the projected Armijo condition
//!
//! ```text
//! f(λ⁺) ≤ f(λ) − c · ⟨g, λ − λ⁺⟩,   λ⁺ = Π(λ − β g)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{CovarianceModel, Dataset, Method};
use crate::gaussian::GaussianObjective;
use crate::isotonic::project_into;
use crate::penalty::EigengapKind;
use crate::spectra::{check_eps, composition_of, BoxedSpectrum};
use crate::{DEFAULT_EPS, REPORT_REL_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub eps: f64,
    pub max_iters: usize,
    /// Stop once `|Δf| ≤ rel_obj_tol · max(|f|, 1)`.
    pub rel_obj_tol: f64,
    pub initial_step: f64,
    pub backtrack_factor: f64,
    pub armijo_c: f64,
    pub max_backtracks: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps: DEFAULT_EPS,
            max_iters: 100_000,
            rel_obj_tol: 1e-10,
            initial_step: 1.0,
            backtrack_factor: 0.5,
            armijo_c: 1e-4,
            max_backtracks: 60,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        check_eps(self.eps)?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        positive("rel_obj_tol", self.rel_obj_tol)?;
        positive("initial_step", self.initial_step)?;
        positive("armijo_c", self.armijo_c)?;
        if !(self.backtrack_factor > 0.0 && self.backtrack_factor < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "backtrack_factor must lie in (0, 1), got {}",
                self.backtrack_factor
            )));
        }
        if self.max_iters == 0 || self.max_backtracks == 0 {
            return Err(Error::InvalidParameter(
                "max_iters and max_backtracks must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    /// Relative objective change fell below tolerance.
    Converged,
    /// The projected step returned the current point.
    Stationary,
    /// No step size satisfied the sufficient-decrease test.
    LineSearchStalled,
    /// Iteration budget exhausted.
    MaxIterations,
}

impl SolverStatus {
    pub fn converged(self) -> bool {
        !matches!(self, SolverStatus::MaxIterations)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub objective: f64,
    pub step: f64,
    pub backtracks: usize,
    /// Number of exact-equality blocks after projection.
    pub blocks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    /// Objective at the projected initial point.
    pub initial_objective: f64,
    /// One record per accepted iteration.
    pub iterations: Vec<IterationRecord>,
    pub status: SolverStatus,
}

impl SolverTrace {
    pub fn final_objective(&self) -> f64 {
        self.iterations
            .last()
            .map_or(self.initial_objective, |r| r.objective)
    }

    pub fn objectives(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.initial_objective).chain(self.iterations.iter().map(|r| r.objective))
    }

    pub fn is_monotone(&self) -> bool {
        let obj: Vec<f64> = self.objectives().collect();
        obj.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Eigengap-penalized spectrum estimate from a sample spectrum `ell`.
pub fn escp_spectrum(
    ell: &[f64],
    n: usize,
    alpha: f64,
    kind: EigengapKind,
    cfg: &SolverConfig,
) -> Result<(BoxedSpectrum, SolverTrace)> {
    escp_spectrum_observed(ell, n, alpha, kind, cfg, |_, _| {})
}

/// As [`escp_spectrum`], calling `observer(iteration, λ)` on the initial
/// point (iteration 0) and on every accepted iterate.
pub fn escp_spectrum_observed<F>(
    ell: &[f64],
    n: usize,
    alpha: f64,
    kind: EigengapKind,
    cfg: &SolverConfig,
    mut observer: F,
) -> Result<(BoxedSpectrum, SolverTrace)>
where
    F: FnMut(usize, &[f64]),
{
    cfg.validate()?;
    let obj = GaussianObjective::new(ell.to_vec(), n, alpha, kind)?;
    let p = ell.len();

    let mut lambda = Vec::with_capacity(p);
    project_into(ell, cfg.eps, &mut lambda);
    let mut f = obj.value(&lambda);
    if !f.is_finite() {
        return Err(Error::Solver {
            iteration: 0,
            reason: format!("non-finite objective {f} at the initial point"),
        });
    }
    let initial_objective = f;
    observer(0, &lambda);

    let mut grad = vec![0.0; p];
    let mut shifted = vec![0.0; p];
    let mut candidate = Vec::with_capacity(p);
    let mut iterations = Vec::new();
    let mut prev_step = cfg.initial_step;
    let mut status = SolverStatus::MaxIterations;

    for iteration in 1..=cfg.max_iters {
        obj.gradient_into(&lambda, &mut grad);
        if let Some(j) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::Solver {
                iteration,
                reason: format!("non-finite gradient entry {j} at lambda_j = {}", lambda[j]),
            });
        }

        let mut step = cfg.initial_step.min(4.0 * prev_step);
        let mut outcome = LineSearch::Exhausted;
        for backtracks in 0..=cfg.max_backtracks {
            for ((s, &l), &g) in shifted.iter_mut().zip(&lambda).zip(&grad) {
                *s = l - step * g;
            }
            project_into(&shifted, cfg.eps, &mut candidate);

            let scale = lambda.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let moved = candidate
                .iter()
                .zip(&lambda)
                .fold(0.0f64, |m, (c, l)| m.max((c - l).abs()));
            if moved <= 4.0 * f64::EPSILON * scale {
                if backtracks == 0 {
                    outcome = LineSearch::Stationary;
                }
                break;
            }

            let decrease: f64 = grad
                .iter()
                .zip(lambda.iter().zip(&candidate))
                .map(|(g, (l, c))| g * (l - c))
                .sum();
            let f_new = obj.value(&candidate);
            if f_new <= f - cfg.armijo_c * decrease {
                outcome = LineSearch::Accepted { f_new, backtracks };
                break;
            }
            step *= cfg.backtrack_factor;
        }

        let (f_new, backtracks) = match outcome {
            LineSearch::Accepted { f_new, backtracks } => (f_new, backtracks),
            LineSearch::Stationary => {
                status = SolverStatus::Stationary;
                break;
            }
            LineSearch::Exhausted => {
                status = SolverStatus::LineSearchStalled;
                break;
            }
        };

        std::mem::swap(&mut lambda, &mut candidate);
        let change = f - f_new;
        f = f_new;
        prev_step = step;
        let blocks = composition_of(&lambda, 0.0).len();
        iterations.push(IterationRecord {
            objective: f,
            step,
            backtracks,
            blocks,
        });
        observer(iteration, &lambda);

        if change <= cfg.rel_obj_tol * f.abs().max(1.0) {
            status = SolverStatus::Converged;
            break;
        }
    }

    let trace = SolverTrace {
        initial_objective,
        iterations,
        status,
    };
    Ok((BoxedSpectrum::new_unchecked(lambda, cfg.eps), trace))
}

enum LineSearch {
    Accepted { f_new: f64, backtracks: usize },
    Stationary,
    Exhausted,
}

/// Full covariance estimate: eigendecompose `S`, run the spectral solver on
/// the sample eigenvalues and reassemble `Q diag(λ̂) Qᵀ` in the sample frame.
pub fn estimate_covariance(
    data: &Dataset,
    alpha: f64,
    kind: EigengapKind,
    cfg: &SolverConfig,
) -> Result<(CovarianceModel, SolverTrace)> {
    let (ell, q) = data.sample_eigen();
    let (lambda, trace) = escp_spectrum(&ell, data.n(), alpha, kind, cfg)?;
    let values = lambda.into_vec();
    let composition = composition_of(&values, REPORT_REL_TOL);
    Ok((
        CovarianceModel::new(Method::Escp, q, values, composition),
        trace,
    ))
}
