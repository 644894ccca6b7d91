//! The four covariance estimators behind one model type.
//!
//! All of them keep the eigenvector frame of the sample covariance and only
//! remap its eigenvalues:
//!
//! * `scm`: the sample eigenvalues themselves;
//! * `lw`: Ledoit–Wolf linear shrinkage towards `tr(S)/p · I`;
//! * `psa`: exact stratified model selection by block-averaging;
//! * `escp`: the eigengap-penalized projected gradient solver.
//!
//! Data follow the zero-mean convention: `S = XᵀX / n` with samples as rows
//! of `X`, and no centering unless requested with [`Dataset::centered`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{reconstruct, sorted_eigen};
use crate::penalty::EigengapKind;
use crate::solver::{estimate_covariance, SolverConfig};
use crate::spectra::{composition_of, stratum_dimension, Composition, Compositions, Spectrum};
use crate::{DEFAULT_EPS, REPORT_REL_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Scm,
    Lw,
    Psa,
    Escp,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Scm, Method::Lw, Method::Psa, Method::Escp];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Scm => "scm",
            Method::Lw => "lw",
            Method::Psa => "psa",
            Method::Escp => "escp",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "scm" => Ok(Method::Scm),
            "lw" | "ledoit-wolf" | "ledoit_wolf" => Ok(Method::Lw),
            "psa" => Ok(Method::Psa),
            "escp" => Ok(Method::Escp),
            other => Err(Error::InvalidParameter(format!(
                "unknown method '{other}' (expected scm|lw|psa|escp)"
            ))),
        }
    }
}

/// An `n × p` sample matrix, one observation per row.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: DMatrix<f64>,
    covariance: OnceLock<DMatrix<f64>>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::InvalidData(format!(
                "need at least one row and one column, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!("non-finite entry {v}")));
        }
        Ok(Self {
            x,
            covariance: OnceLock::new(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::InvalidData(format!(
                "row {i} has {} columns, expected {p}",
                r.len()
            )));
        }
        Self::new(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    /// Copy with column means subtracted (divisor stays `n`).
    pub fn centered(&self) -> Self {
        let mut x = self.x.clone();
        for mut col in x.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
        Self {
            x,
            covariance: OnceLock::new(),
        }
    }

    /// `S = XᵀX / n`.
    pub fn sample_covariance(&self) -> &DMatrix<f64> {
        self.covariance.get_or_init(|| {
            let mut s = self.x.tr_mul(&self.x);
            s /= self.n() as f64;
            s
        })
    }

    /// Sample eigenvalues in decreasing order (rounding negatives clamped to
    /// zero) with their eigenvectors as columns.
    pub fn sample_eigen(&self) -> (Vec<f64>, DMatrix<f64>) {
        let (mut values, vectors) = sorted_eigen(self.sample_covariance());
        values.iter_mut().for_each(|v| *v = v.max(0.0));
        (values, vectors)
    }
}

/// `Σ̂ = Q diag(λ) Qᵀ` together with its reported multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    method: Method,
    eigenvectors: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    composition: Composition,
}

impl CovarianceModel {
    pub fn new(
        method: Method,
        eigenvectors: DMatrix<f64>,
        eigenvalues: Vec<f64>,
        composition: Composition,
    ) -> Self {
        debug_assert_eq!(eigenvectors.ncols(), eigenvalues.len());
        debug_assert_eq!(composition.ambient(), eigenvalues.len());
        Self {
            method,
            eigenvectors,
            eigenvalues,
            composition,
        }
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn p(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn composition(&self) -> &Composition {
        &self.composition
    }

    pub fn dim(&self) -> u64 {
        stratum_dimension(&self.composition)
    }

    /// Eigenvalues as a validated [`Spectrum`]; fails on zero eigenvalues.
    pub fn spectrum(&self) -> Result<Spectrum> {
        Spectrum::new(self.eigenvalues.clone())
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        reconstruct(&self.eigenvectors, &self.eigenvalues)
    }
}

/// Sample covariance matrix, the unpenalized maximum likelihood estimate.
pub fn scm(data: &Dataset) -> CovarianceModel {
    let (values, q) = data.sample_eigen();
    let composition = composition_of(&values, 0.0);
    CovarianceModel::new(Method::Scm, q, values, composition)
}

/// Ingredients of the Ledoit–Wolf shrinkage, normalized by `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedoitWolfShrinkage {
    /// Target scale `m = tr(S)/p`.
    pub m: f64,
    /// `d² = ‖S − mI‖²_F / p`.
    pub d2: f64,
    /// `b² = min(b̄², d²)`.
    pub b2: f64,
    /// `a² = d² − b²`.
    pub a2: f64,
}

impl LedoitWolfShrinkage {
    /// Weight `b²/d²` on the scaled identity.
    pub fn intensity(&self) -> f64 {
        if self.d2 > 0.0 {
            self.b2 / self.d2
        } else {
            1.0
        }
    }
}

pub fn ledoit_wolf_shrinkage(data: &Dataset) -> Result<LedoitWolfShrinkage> {
    let n = data.n();
    if n < 2 {
        return Err(Error::InvalidData(
            "Ledoit-Wolf shrinkage needs at least two samples".into(),
        ));
    }
    let p = data.p() as f64;
    let s = data.sample_covariance();
    let m = s.trace() / p;
    let s_norm2 = s.norm_squared();
    let mut shifted = s.clone();
    for i in 0..data.p() {
        shifted[(i, i)] -= m;
    }
    let d2 = shifted.norm_squared() / p;

    // ‖x xᵀ − S‖²_F = ‖x‖⁴ − 2 xᵀ S x + ‖S‖²_F
    let xs = data.x() * s;
    let mut sum = 0.0;
    for (row, srow) in data.x().row_iter().zip(xs.row_iter()) {
        let sq = row.norm_squared();
        sum += sq * sq - 2.0 * row.dot(&srow) + s_norm2;
    }
    let b2_bar = sum / (n as f64 * n as f64) / p;
    let b2 = b2_bar.min(d2).max(0.0);
    Ok(LedoitWolfShrinkage {
        m,
        d2,
        b2,
        a2: d2 - b2,
    })
}

/// Ledoit–Wolf estimate `(b²/d²) m I + (a²/d²) S`.
pub fn ledoit_wolf(data: &Dataset) -> Result<CovarianceModel> {
    let shrink = ledoit_wolf_shrinkage(data)?;
    let (ell, q) = data.sample_eigen();
    if shrink.d2 <= 0.0 {
        let composition = composition_of(&ell, 0.0);
        return Ok(CovarianceModel::new(Method::Lw, q, ell, composition));
    }
    let w_target = shrink.b2 / shrink.d2;
    let w_sample = shrink.a2 / shrink.d2;
    let values: Vec<f64> = ell
        .iter()
        .map(|&l| w_target * shrink.m + w_sample * l)
        .collect();
    let composition = composition_of(&values, REPORT_REL_TOL);
    Ok(CovarianceModel::new(Method::Lw, q, values, composition))
}

/// Result of the exhaustive search over compositions on a sample spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct PsaSolution {
    pub eigenvalues: Vec<f64>,
    pub composition: Composition,
    /// `−2 ln L + α dim` at the optimum.
    pub score: f64,
}

/// Exact penalized-likelihood model selection over all compositions of
/// `p = ell.len()`: each candidate block-averages the sample eigenvalues.
///
/// Block means are clamped into `[eps, 1/eps]` so that blocks of zero
/// sample eigenvalues stay scorable. Ties prefer the smaller dimension, then
/// the lexicographically first composition.
pub fn psa_spectrum(
    ell: &[f64],
    n: usize,
    alpha: f64,
    guard: usize,
    eps: f64,
) -> Result<PsaSolution> {
    let p = ell.len();
    let compositions = Compositions::new(p, guard)?;
    let hi = 1.0 / eps;
    let mut prefix = vec![0.0; p + 1];
    for (j, &l) in ell.iter().enumerate() {
        prefix[j + 1] = prefix[j] + l;
    }
    let block_mean = |i: usize, j: usize| ((prefix[j] - prefix[i]) / (j - i) as f64).clamp(eps, hi);
    // cost[i][j] = Σ_{k∈[i,j)} (ln λ̂ + ℓ_k/λ̂) for the block mean λ̂ of [i, j)
    let mut cost = vec![vec![0.0; p + 1]; p + 1];
    for i in 0..p {
        for j in i + 1..=p {
            let mean = block_mean(i, j);
            cost[i][j] = (j - i) as f64 * mean.ln() + (prefix[j] - prefix[i]) / mean;
        }
    }

    let nf = n as f64;
    let constant = p as f64 * (2.0 * PI).ln();
    let mut best: Option<(f64, u64, Composition)> = None;
    for gamma in compositions {
        let mut start = 0;
        let mut total = 0.0;
        for &g in gamma.parts() {
            total += cost[start][start + g];
            start += g;
        }
        let dim = stratum_dimension(&gamma);
        let score = nf * (constant + total) + alpha * dim as f64;
        let better = match &best {
            None => true,
            Some((s, d, _)) => score < *s || (score == *s && dim < *d),
        };
        if better {
            best = Some((score, dim, gamma));
        }
    }
    let (score, _, composition) = best.expect("at least one composition");
    let mut eigenvalues = Vec::with_capacity(p);
    for block in composition.blocks() {
        let mean = block_mean(block.start, block.end);
        eigenvalues.extend(std::iter::repeat_n(mean, block.len()));
    }
    Ok(PsaSolution {
        eigenvalues,
        composition,
        score,
    })
}

/// Principal subspace analysis: exact stratified model selection.
pub fn psa_exact(data: &Dataset, alpha: f64, p_max_guard: usize) -> Result<CovarianceModel> {
    if data.p() > p_max_guard {
        return Err(Error::EnumerationGuard {
            p: data.p(),
            guard: p_max_guard,
        });
    }
    let (ell, q) = data.sample_eigen();
    let sol = psa_spectrum(&ell, data.n(), alpha, p_max_guard, DEFAULT_EPS)?;
    Ok(CovarianceModel::new(
        Method::Psa,
        q,
        sol.eigenvalues,
        sol.composition,
    ))
}

/// Eigengap sparsity estimate with multiplicities read at `rel_tol = 1e−12`.
pub fn escp(
    data: &Dataset,
    alpha: f64,
    kind: EigengapKind,
    cfg: &SolverConfig,
) -> Result<CovarianceModel> {
    estimate_covariance(data, alpha, kind, cfg).map(|(model, _)| model)
}
