//! Synthetic benchmark harness.
//!
//! A [`Scenario`] fixes the population spectrum, the sample size and the
//! estimators to compare. [`run_scenario`] draws one Gaussian dataset per
//! repetition, fits every method on it and scores each fit with the
//! penalized likelihood, the normalized Frobenius error and the stratum
//! dimension. Results serialize to a per-fit CSV, a JSON summary and a tidy
//! scree-plot CSV.
//!
//! Randomness is keyed on `(seed, repetition)` through the ChaCha stream
//! id, so results do not depend on scheduling or thread count.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{escp, ledoit_wolf, psa_exact, scm, CovarianceModel, Dataset, Method};
use crate::gaussian::penalized_likelihood_score;
use crate::penalty::EigengapKind;
use crate::solver::SolverConfig;
use crate::spectra::{composition_of, stratum_dimension, Composition, Spectrum};
use crate::{DEFAULT_P_MAX, REPORT_REL_TOL};

/// Stream id reserved for the optional population rotation.
const ROTATION_STREAM: u64 = u64::MAX;

/// How the penalty constant `α` is chosen from the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum AlphaRule {
    /// `ln n`
    Bic,
    /// `2`
    Aic,
    Fixed(f64),
}

impl AlphaRule {
    pub fn value(self, n: usize) -> f64 {
        match self {
            AlphaRule::Bic => (n as f64).ln(),
            AlphaRule::Aic => 2.0,
            AlphaRule::Fixed(a) => a,
        }
    }
}

impl fmt::Display for AlphaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaRule::Bic => f.write_str("bic"),
            AlphaRule::Aic => f.write_str("aic"),
            AlphaRule::Fixed(a) => write!(f, "{a}"),
        }
    }
}

impl FromStr for AlphaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bic" => Ok(AlphaRule::Bic),
            "aic" => Ok(AlphaRule::Aic),
            other => match other.parse::<f64>() {
                Ok(a) if a.is_finite() && a >= 0.0 => Ok(AlphaRule::Fixed(a)),
                _ => Err(Error::InvalidParameter(format!(
                    "alpha must be bic, aic or a non-negative number, got '{s}'"
                ))),
            },
        }
    }
}

impl From<AlphaRule> for String {
    fn from(a: AlphaRule) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for AlphaRule {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub population: Spectrum,
    pub repetitions: usize,
    pub seed: u64,
    pub alpha: AlphaRule,
    pub methods: Vec<Method>,
    pub kind: EigengapKind,
    /// Rotate the population covariance by a seeded random orthogonal matrix.
    pub rotate: bool,
    pub psa_guard: usize,
    pub solver: SolverConfig,
}

impl Scenario {
    pub fn new(name: impl Into<String>, n: usize, population: Spectrum) -> Self {
        Self {
            name: name.into(),
            n,
            population,
            repetitions: 10,
            seed: 0,
            alpha: AlphaRule::Bic,
            methods: Method::ALL.to_vec(),
            kind: EigengapKind::Relative,
            rotate: false,
            psa_guard: DEFAULT_P_MAX,
            solver: SolverConfig::default(),
        }
    }

    /// The three benchmark settings:
    /// `a` is `(n, p) = (40, 20)` with `Σ = I`, `b` is `(200, 100)` with
    /// `Σ = I`, and `c` is `(400, 200)` with `Σ = diag(10 I₈₀, I₈₀, 0.1 I₄₀)`.
    pub fn preset(name: &str) -> Result<Self> {
        let (n, population) = match name {
            "a" => (40, Spectrum::constant(1.0, 20)?),
            "b" => (200, Spectrum::constant(1.0, 100)?),
            "c" => (
                400,
                Spectrum::piecewise(&[10.0, 1.0, 0.1], &Composition::new(vec![80, 80, 40])?)?,
            ),
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown preset '{other}' (expected a|b|c)"
                )))
            }
        };
        Ok(Self::new(name, n, population))
    }

    pub fn p(&self) -> usize {
        self.population.p()
    }

    pub fn alpha_value(&self) -> f64 {
        self.alpha.value(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.repetitions == 0 {
            return Err(Error::InvalidParameter(
                "n and repetitions must be at least 1".into(),
            ));
        }
        self.solver.validate()
    }

    pub fn method_available(&self, method: Method) -> bool {
        method != Method::Psa || self.p() <= self.psa_guard
    }

    fn rotation(&self) -> Option<DMatrix<f64>> {
        if !self.rotate {
            return None;
        }
        let p = self.p();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(ROTATION_STREAM);
        let g = DMatrix::from_fn(p, p, |_, _| StandardNormal.sample(&mut rng));
        let qr = g.qr();
        let mut q = qr.q();
        // fix column signs so the draw is Haar-distributed
        let r = qr.r();
        for k in 0..p {
            if r[(k, k)] < 0.0 {
                q.column_mut(k).neg_mut();
            }
        }
        Some(q)
    }

    /// Population covariance as a dense matrix.
    pub fn population_matrix(&self) -> DMatrix<f64> {
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(
            self.population.as_slice(),
        ));
        match self.rotation() {
            Some(r) => &r * diag * r.transpose(),
            None => diag,
        }
    }
}

/// `n` zero-mean Gaussian samples with the scenario's population covariance,
/// keyed on `(seed, rep_index)`.
pub fn sample_gaussian(scenario: &Scenario, rep_index: u64) -> Dataset {
    let p = scenario.p();
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    rng.set_stream(rep_index);
    let scales: Vec<f64> = scenario
        .population
        .as_slice()
        .iter()
        .map(|v| v.sqrt())
        .collect();
    let mut x = DMatrix::zeros(scenario.n, p);
    for i in 0..scenario.n {
        for j in 0..p {
            let z: f64 = StandardNormal.sample(&mut rng);
            x[(i, j)] = z * scales[j];
        }
    }
    if let Some(r) = scenario.rotation() {
        x *= r.transpose();
    }
    Dataset::new(x).expect("finite gaussian draws")
}

/// `‖Σ̂ − Σ‖²_F / p` against a diagonal population covariance.
pub fn frobenius_error(model: &CovarianceModel, population: &Spectrum) -> Result<f64> {
    let sigma =
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(population.as_slice()));
    frobenius_error_matrix(model, &sigma)
}

/// `‖Σ̂ − Σ‖²_F / p` against a dense population covariance.
pub fn frobenius_error_matrix(model: &CovarianceModel, population: &DMatrix<f64>) -> Result<f64> {
    let p = model.p();
    if population.nrows() != p || population.ncols() != p {
        return Err(Error::DimensionMismatch {
            expected: p,
            actual: population.nrows(),
        });
    }
    Ok((model.matrix() - population).norm_squared() / p as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub lp_raw: f64,
    /// `100 · Lp_raw / (n p)`.
    pub lp_per_np: f64,
    pub lf: f64,
    pub dim: u64,
    /// Wall time of the fit, only when timing was requested.
    pub seconds: Option<f64>,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: Method,
    pub rep: usize,
    pub outcome: std::result::Result<FitMetrics, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub std: f64,
}

impl Stats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len().is_multiple_of(2) {
            0.5 * (sorted[mid - 1] + sorted[mid])
        } else {
            sorted[mid]
        };
        Some(Self {
            mean,
            median,
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub available: bool,
    pub fits: usize,
    pub failures: Vec<String>,
    pub lp_raw: Option<Stats>,
    pub lp_per_np: Option<Stats>,
    pub lf: Option<Stats>,
    pub dim: Option<Stats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<Stats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub alpha: f64,
    pub records: Vec<RunRecord>,
    pub summary: Vec<MethodSummary>,
}

impl ScenarioReport {
    pub fn records_for(&self, method: Method) -> impl Iterator<Item = &RunRecord> {
        self.records.iter().filter(move |r| r.method == method)
    }

    pub fn metrics_for(&self, method: Method) -> impl Iterator<Item = &FitMetrics> {
        self.records_for(method)
            .filter_map(|r| r.outcome.as_ref().ok())
    }

    pub fn summary_for(&self, method: Method) -> Option<&MethodSummary> {
        self.summary.iter().find(|s| s.method == method)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    pub record_timing: bool,
    /// Cap on worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

pub fn fit(method: Method, data: &Dataset, scenario: &Scenario) -> Result<CovarianceModel> {
    let alpha = scenario.alpha_value();
    match method {
        Method::Scm => Ok(scm(data)),
        Method::Lw => ledoit_wolf(data),
        Method::Psa => psa_exact(data, alpha, scenario.psa_guard),
        Method::Escp => escp(data, alpha, scenario.kind, &scenario.solver),
    }
}

fn evaluate(
    method: Method,
    data: &Dataset,
    scenario: &Scenario,
    population: &DMatrix<f64>,
    record_timing: bool,
) -> Result<FitMetrics> {
    let start = Instant::now();
    let model = fit(method, data, scenario)?;
    let elapsed = start.elapsed().as_secs_f64();
    let lp_raw = penalized_likelihood_score(&model, data, scenario.alpha_value())?;
    let np = (data.n() * data.p()) as f64;
    Ok(FitMetrics {
        lp_raw,
        lp_per_np: 100.0 * lp_raw / np,
        lf: frobenius_error_matrix(&model, population)?,
        dim: stratum_dimension(&composition_of(model.eigenvalues(), REPORT_REL_TOL)),
        seconds: record_timing.then_some(elapsed),
        eigenvalues: model.eigenvalues().to_vec(),
    })
}

/// Runs every available `(method, repetition)` pair and aggregates the
/// metrics per method.
pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> Result<ScenarioReport> {
    scenario.validate()?;
    match options.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(pool.install(|| run_inner(scenario, options)))
        }
        None => Ok(run_inner(scenario, options)),
    }
}

fn run_inner(scenario: &Scenario, options: &RunOptions) -> ScenarioReport {
    let methods: Vec<Method> = scenario
        .methods
        .iter()
        .copied()
        .filter(|&m| scenario.method_available(m))
        .collect();
    let population = scenario.population_matrix();

    let mut records: Vec<RunRecord> = (0..scenario.repetitions)
        .into_par_iter()
        .flat_map_iter(|rep| {
            let data = if methods.is_empty() {
                None
            } else {
                Some(sample_gaussian(scenario, rep as u64))
            };
            methods
                .iter()
                .map(|&method| {
                    let data = data.as_ref().expect("data drawn when methods exist");
                    let outcome =
                        evaluate(method, data, scenario, &population, options.record_timing)
                            .map_err(|e| e.to_string());
                    RunRecord {
                        method,
                        rep,
                        outcome,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    records.sort_by_key(|r| (method_rank(scenario, r.method), r.rep));

    let summary = scenario
        .methods
        .iter()
        .map(|&method| summarize(method, scenario.method_available(method), &records))
        .collect();
    ScenarioReport {
        scenario: scenario.clone(),
        alpha: scenario.alpha_value(),
        records,
        summary,
    }
}

fn method_rank(scenario: &Scenario, method: Method) -> usize {
    scenario
        .methods
        .iter()
        .position(|&m| m == method)
        .unwrap_or(usize::MAX)
}

fn summarize(method: Method, available: bool, records: &[RunRecord]) -> MethodSummary {
    let mut ok = Vec::new();
    let mut failures = Vec::new();
    for r in records.iter().filter(|r| r.method == method) {
        match &r.outcome {
            Ok(m) => ok.push(m),
            Err(e) => failures.push(format!("rep {}: {e}", r.rep)),
        }
    }
    let stat = |f: &dyn Fn(&FitMetrics) -> f64| {
        Stats::from_values(&ok.iter().map(|m| f(m)).collect::<Vec<_>>())
    };
    let timings: Vec<f64> = ok.iter().filter_map(|m| m.seconds).collect();
    MethodSummary {
        method,
        available,
        fits: ok.len(),
        failures,
        lp_raw: stat(&|m| m.lp_raw),
        lp_per_np: stat(&|m| m.lp_per_np),
        lf: stat(&|m| m.lf),
        dim: stat(&|m| m.dim as f64),
        seconds: Stats::from_values(&timings),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeRow {
    pub series: String,
    /// 1-based eigenvalue index.
    pub index: usize,
    pub eigenvalue: f64,
}

/// Index-vs-eigenvalue series for plotting: the population spectrum, then
/// for each fitted method its first successful repetition (`<method>`) and
/// the index-wise mean over repetitions (`<method>_mean`).
pub fn scree_data(report: &ScenarioReport, population: &Spectrum) -> Vec<ScreeRow> {
    let mut rows = Vec::new();
    let mut push = |series: &str, values: &[f64]| {
        rows.extend(values.iter().enumerate().map(|(i, &v)| ScreeRow {
            series: series.to_string(),
            index: i + 1,
            eigenvalue: v,
        }));
    };
    push("population", population.as_slice());
    for summary in report.summary.iter().filter(|s| s.available) {
        let spectra: Vec<&Vec<f64>> = report
            .metrics_for(summary.method)
            .map(|m| &m.eigenvalues)
            .collect();
        let Some(first) = spectra.first() else {
            continue;
        };
        push(summary.method.as_str(), first);
        let k = spectra.len() as f64;
        let mean: Vec<f64> = (0..first.len())
            .map(|i| spectra.iter().map(|s| s[i]).sum::<f64>() / k)
            .collect();
        push(&format!("{}_mean", summary.method), &mean);
    }
    rows
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per fit: `scenario,method,rep,Lp_raw,Lp_per_np,LF,dim,seconds`.
/// Failed fits leave the metric cells empty; `seconds` is empty unless
/// timing was recorded.
pub fn write_results_csv<W: Write>(report: &ScenarioReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "scenario",
        "method",
        "rep",
        "Lp_raw",
        "Lp_per_np",
        "LF",
        "dim",
        "seconds",
    ])?;
    for r in &report.records {
        let (lp, lpn, lf, dim, secs) = match &r.outcome {
            Ok(m) => (
                m.lp_raw.to_string(),
                m.lp_per_np.to_string(),
                m.lf.to_string(),
                m.dim.to_string(),
                fmt_opt(m.seconds),
            ),
            Err(_) => Default::default(),
        };
        w.write_record([
            report.scenario.name.as_str(),
            r.method.as_str(),
            &r.rep.to_string(),
            &lp,
            &lpn,
            &lf,
            &dim,
            &secs,
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryDocument<'a> {
    scenario: &'a Scenario,
    p: usize,
    alpha: f64,
    methods: &'a [MethodSummary],
}

pub fn write_summary_json<W: Write>(report: &ScenarioReport, mut out: W) -> Result<()> {
    let doc = SummaryDocument {
        scenario: &report.scenario,
        p: report.scenario.p(),
        alpha: report.alpha,
        methods: &report.summary,
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

/// Tidy `series,index,eigenvalue` rows.
pub fn write_scree_csv<W: Write>(rows: &[ScreeRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Human-readable table of mean metrics per method.
pub fn summary_table(report: &ScenarioReport) -> String {
    let mut s = format!(
        "scenario {} (n = {}, p = {}, alpha = {:.4}, reps = {})\n",
        report.scenario.name,
        report.scenario.n,
        report.scenario.p(),
        report.alpha,
        report.scenario.repetitions
    );
    s.push_str(&format!(
        "{:<6} {:>14} {:>10} {:>12} {:>10} {:>10}\n",
        "method", "Lp_raw", "Lp_per_np", "LF", "dim", "seconds"
    ));
    for m in &report.summary {
        if !m.available {
            s.push_str(&format!(
                "{:<6} {:>14} {:>10} {:>12} {:>10} {:>10}\n",
                m.method, "-", "-", "-", "-", "-"
            ));
            continue;
        }
        let mean = |st: Option<Stats>, prec: usize| {
            st.map(|x| format!("{:.*}", prec, x.mean))
                .unwrap_or_else(|| "fail".into())
        };
        s.push_str(&format!(
            "{:<6} {:>14} {:>10} {:>12} {:>10} {:>10}\n",
            m.method,
            mean(m.lp_raw, 1),
            mean(m.lp_per_np, 2),
            mean(m.lf, 5),
            mean(m.dim, 1),
            m.seconds
                .map(|x| format!("{:.4}", x.mean))
                .unwrap_or_else(|| "-".into()),
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_rules() {
        assert_eq!("bic".parse::<AlphaRule>().unwrap().value(40), 40f64.ln());
        assert_eq!("AIC".parse::<AlphaRule>().unwrap().value(40), 2.0);
        assert_eq!("0.5".parse::<AlphaRule>().unwrap(), AlphaRule::Fixed(0.5));
        assert!("-1".parse::<AlphaRule>().is_err());
        assert!("big".parse::<AlphaRule>().is_err());
    }

    #[test]
    fn presets() {
        let c = Scenario::preset("c").unwrap();
        assert_eq!((c.n, c.p()), (400, 200));
        assert_eq!(stratum_dimension(&c.population.composition(0.0)), 12803);
        assert!(!c.method_available(Method::Psa));
        assert!(Scenario::preset("a").unwrap().method_available(Method::Psa));
        assert!(Scenario::preset("z").is_err());
    }

    #[test]
    fn frobenius_examples() {
        let p = 4;
        let model = CovarianceModel::new(
            Method::Scm,
            DMatrix::identity(p, p),
            vec![2.0; p],
            Composition::isotropic(p).unwrap(),
        );
        let one = Spectrum::constant(1.0, p).unwrap();
        assert!((frobenius_error(&model, &one).unwrap() - 1.0).abs() < 1e-15);
        let two = Spectrum::constant(2.0, p).unwrap();
        assert_eq!(frobenius_error(&model, &two).unwrap(), 0.0);
        let wrong = Spectrum::constant(1.0, p + 1).unwrap();
        assert!(frobenius_error(&model, &wrong).is_err());
    }

    #[test]
    fn stats_mean_median_std() {
        let s = Stats::from_values(&[1.0, 2.0, 3.0, 10.0]).unwrap();
        assert_eq!(s.mean, 4.0);
        assert_eq!(s.median, 2.5);
        assert!((s.std - 3.5355339059327378).abs() < 1e-12);
        assert!(Stats::from_values(&[]).is_none());
    }

    #[test]
    fn empty_method_list_gives_empty_summary() {
        let mut s = Scenario::preset("a").unwrap();
        s.methods.clear();
        let report = run_scenario(&s, &RunOptions::default()).unwrap();
        assert!(report.records.is_empty());
        assert!(report.summary.is_empty());
    }
}
