//! Covariance estimation by eigengap sparsity.
//!
//! The crate estimates covariance matrices under a penalized Gaussian
//! likelihood in which the penalty counts the parameters of the stratum of
//! matrices sharing the estimate's eigenvalue multiplicities. Two solvers are
//! provided:
//!
//! * [`estimators::psa_exact`] enumerates every multiplicity pattern
//!   (composition of `p`) and is exact but exponential in `p`;
//! * [`estimators::escp`] relaxes the parameter count into an ℓ¹ penalty on
//!   all pairwise eigenvalue gaps and minimizes it by projected gradient
//!   descent on the monotone cone, using pool-adjacent-violators as the
//!   projection.
//!
//! Sample covariance and Ledoit–Wolf shrinkage are included as baselines, and
//! [`experiments`] reproduces the synthetic benchmark settings.

pub mod error;
pub mod estimators;
pub mod experiments;
pub mod gaussian;
pub mod isotonic;
pub mod linalg;
pub mod penalty;
pub mod solver;
pub mod spectra;

pub use error::{Error, Result};
pub use estimators::{CovarianceModel, Dataset, Method};
pub use gaussian::GaussianObjective;
pub use isotonic::{pava_decreasing, project_box_monotone, ProjectionResult};
pub use penalty::{penalty_gradient, penalty_value, EigengapKind};
pub use solver::{escp_spectrum, estimate_covariance, SolverConfig, SolverStatus, SolverTrace};
pub use spectra::{
    composition_of, enumerate_compositions, l0_dimension, stratum_dimension, BoxedSpectrum,
    Composition, Spectrum,
};

/// Default lower bound of the box `[eps, 1/eps]` the spectra are confined to.
pub const DEFAULT_EPS: f64 = 1e-10;

/// Largest dimension for which compositions are enumerated unless a caller
/// raises the guard explicitly.
pub const DEFAULT_P_MAX: usize = 20;

/// Relative tolerance used to read multiplicities off estimated spectra.
pub const REPORT_REL_TOL: f64 = 1e-12;
