mod input;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use eigengap::estimators::{ledoit_wolf, psa_exact, scm};
use eigengap::experiments::{
    run_scenario, scree_data, summary_table, write_results_csv, write_scree_csv,
    write_summary_json, AlphaRule, RunOptions, Scenario,
};
use eigengap::{
    composition_of, estimate_covariance, pava_decreasing, penalty_gradient, penalty_value,
    project_box_monotone, stratum_dimension, CovarianceModel, EigengapKind, Error, Method,
    SolverConfig, Spectrum, DEFAULT_EPS, DEFAULT_P_MAX, REPORT_REL_TOL,
};

#[derive(Parser)]
#[command(
    name = "eigengap",
    version,
    about = "Eigengap-sparse covariance estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a covariance model to a CSV of samples (one row per sample, no header).
    Estimate(EstimateArgs),
    /// Run a synthetic benchmark and write results.csv, summary.json and scree.csv.
    Experiment(ExperimentArgs),
    /// Run the spectral solver on a given sample spectrum.
    Solve(SolveArgs),
    /// Project values onto the non-increasing cone.
    Pava(PavaArgs),
    /// Evaluate the eigengap penalty and its gradient.
    Penalty(PenaltyArgs),
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    method: Method,
    /// bic (ln n), aic (2) or a non-negative number.
    #[arg(long, default_value = "bic")]
    alpha: AlphaRule,
    #[arg(long, default_value = "relative")]
    delta: EigengapKind,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// Subtract the column means before estimating.
    #[arg(long)]
    center: bool,
    /// Include the eigenvectors in the output.
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = DEFAULT_P_MAX)]
    psa_guard: usize,
    /// Output JSON path; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_parser = ["a", "b", "c"], conflicts_with_all = ["n", "p", "spectrum"])]
    preset: Option<String>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: Option<u64>,
    /// Dimension of an identity population when no spectrum is given.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    p: Option<u64>,
    /// Population eigenvalues as a comma-separated list or a file of numbers.
    #[arg(long)]
    spectrum: Option<String>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    reps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    alpha: Option<AlphaRule>,
    #[arg(long)]
    delta: Option<EigengapKind>,
    /// Rotate the population covariance by a seeded random orthogonal matrix.
    #[arg(long)]
    rotate: bool,
    #[arg(long)]
    psa_guard: Option<usize>,
    #[arg(long, default_value = ".")]
    outdir: PathBuf,
    /// Cap on worker threads.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
    /// Record per-fit wall times (makes outputs non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct SolveArgs {
    /// Sample eigenvalues, non-increasing and non-negative.
    #[arg(long, allow_hyphen_values = true)]
    values: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "bic")]
    alpha: AlphaRule,
    #[arg(long, default_value = "relative")]
    delta: EigengapKind,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
}

#[derive(Args)]
struct PavaArgs {
    #[arg(long, allow_hyphen_values = true)]
    values: String,
    /// Also clamp into [eps, 1/eps].
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args)]
struct PenaltyArgs {
    #[arg(long, allow_hyphen_values = true)]
    values: String,
    #[arg(long, default_value = "relative")]
    delta: EigengapKind,
}

/// A failure with its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Solver { .. } => 3,
            Error::EnumerationGuard { .. } => 4,
            Error::Io(_) => 1,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Error::from(e).into()
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Error::from(e).into()
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(args) => cmd_estimate(args),
        Command::Experiment(args) => cmd_experiment(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Pava(args) => cmd_pava(args),
        Command::Penalty(args) => cmd_penalty(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[derive(Serialize)]
struct ModelDocument<'a> {
    method: Method,
    n: usize,
    p: usize,
    alpha: f64,
    eigenvalues: &'a [f64],
    composition: &'a [usize],
    dim: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigenvectors: Option<Vec<Vec<f64>>>,
}

fn cmd_estimate(args: EstimateArgs) -> CliResult {
    let mut data = input::read_samples(&args.input)?;
    if args.center {
        data = data.centered();
    }
    let alpha = args.alpha.value(data.n());
    let cfg = SolverConfig {
        eps: args.eps,
        ..SolverConfig::default()
    };
    cfg.validate()?;

    let model: CovarianceModel = match args.method {
        Method::Scm => scm(&data),
        Method::Lw => ledoit_wolf(&data)?,
        Method::Psa => psa_exact(&data, alpha, args.psa_guard)?,
        Method::Escp => {
            let (model, trace) = estimate_covariance(&data, alpha, args.delta, &cfg)?;
            if !trace.status.converged() {
                eprintln!(
                    "warning: solver stopped after {} iterations without converging",
                    trace.iterations.len()
                );
            }
            model
        }
    };

    let eigenvectors = args.full.then(|| {
        let q = model.eigenvectors();
        q.row_iter().map(|r| r.iter().copied().collect()).collect()
    });
    let doc = ModelDocument {
        method: model.method(),
        n: data.n(),
        p: data.p(),
        alpha,
        eigenvalues: model.eigenvalues(),
        composition: model.composition().parts(),
        dim: model.dim(),
        eigenvectors,
    };
    match &args.output {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
            out.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn build_scenario(args: &ExperimentArgs) -> Result<Scenario, Failure> {
    let mut scenario = match &args.preset {
        Some(name) => Scenario::preset(name)?,
        None => {
            let n = args
                .n
                .ok_or_else(|| Failure::usage("--n is required without --preset"))?;
            let population = match (&args.spectrum, args.p) {
                (Some(list), p) => {
                    let s = Spectrum::new(input::read_values(list)?)?;
                    if p.is_some_and(|p| p as usize != s.p()) {
                        return Err(Failure::usage(format!(
                            "--p {} disagrees with a spectrum of length {}",
                            p.unwrap(),
                            s.p()
                        )));
                    }
                    s
                }
                (None, Some(p)) => Spectrum::constant(1.0, p as usize)?,
                (None, None) => {
                    return Err(Failure::usage(
                        "either --spectrum or --p is required without --preset",
                    ))
                }
            };
            Scenario::new("custom", n as usize, population)
        }
    };
    if let Some(reps) = args.reps {
        scenario.repetitions = reps as usize;
    }
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    if let Some(methods) = &args.methods {
        let mut unique = Vec::new();
        for &m in methods {
            if !unique.contains(&m) {
                unique.push(m);
            }
        }
        scenario.methods = unique;
    }
    if let Some(alpha) = args.alpha {
        scenario.alpha = alpha;
    }
    if let Some(kind) = args.delta {
        scenario.kind = kind;
    }
    if let Some(guard) = args.psa_guard {
        scenario.psa_guard = guard;
    }
    scenario.rotate = args.rotate;
    scenario.validate()?;
    Ok(scenario)
}

fn cmd_experiment(args: ExperimentArgs) -> CliResult {
    let scenario = build_scenario(&args)?;
    for &m in &scenario.methods {
        if !scenario.method_available(m) {
            eprintln!(
                "note: {m} skipped, p = {} exceeds the enumeration guard {}",
                scenario.p(),
                scenario.psa_guard
            );
        }
    }
    let options = RunOptions {
        record_timing: args.timing,
        jobs: args.jobs.map(|j| j as usize),
    };
    let report = run_scenario(&scenario, &options)?;

    fs::create_dir_all(&args.outdir)?;
    let mut results = BufWriter::new(File::create(args.outdir.join("results.csv"))?);
    write_results_csv(&report, &mut results)?;
    results.flush()?;
    let mut summary = BufWriter::new(File::create(args.outdir.join("summary.json"))?);
    write_summary_json(&report, &mut summary)?;
    summary.flush()?;
    let mut scree = BufWriter::new(File::create(args.outdir.join("scree.csv"))?);
    write_scree_csv(&scree_data(&report, &scenario.population), &mut scree)?;
    scree.flush()?;

    print!("{}", summary_table(&report));
    for s in &report.summary {
        for failure in &s.failures {
            eprintln!("warning: {} {failure}", s.method);
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SolveDocument<'a> {
    eigenvalues: &'a [f64],
    composition: Vec<usize>,
    dim: u64,
    status: eigengap::SolverStatus,
    iterations: usize,
    objective: f64,
}

fn cmd_solve(args: SolveArgs) -> CliResult {
    let ell = input::parse_list(&args.values)?;
    if ell.iter().any(|v| *v < 0.0) || ell.windows(2).any(|w| w[0] < w[1]) {
        return Err(Failure::usage(
            "sample eigenvalues must be non-negative and non-increasing",
        ));
    }
    let cfg = SolverConfig {
        eps: args.eps,
        ..SolverConfig::default()
    };
    let alpha = args.alpha.value(args.n);
    let (lambda, trace) = eigengap::escp_spectrum(&ell, args.n, alpha, args.delta, &cfg)?;
    let composition = composition_of(lambda.as_slice(), REPORT_REL_TOL);
    let doc = SolveDocument {
        eigenvalues: lambda.as_slice(),
        dim: stratum_dimension(&composition),
        composition: composition.parts().to_vec(),
        status: trace.status,
        iterations: trace.iterations.len(),
        objective: trace.final_objective(),
    };
    println!("{}", serde_json::to_string(&doc)?);
    Ok(())
}

fn cmd_pava(args: PavaArgs) -> CliResult {
    let x = input::parse_list(&args.values)?;
    let projected = match args.eps {
        Some(eps) => project_box_monotone(&x, eps)?.projected.into_vec(),
        None => pava_decreasing(&x),
    };
    println!("{}", input::format_list(&projected));
    Ok(())
}

#[derive(Serialize)]
struct PenaltyDocument {
    delta: EigengapKind,
    value: f64,
    gradient: Vec<f64>,
}

fn cmd_penalty(args: PenaltyArgs) -> CliResult {
    let values = Spectrum::new(input::parse_list(&args.values)?)?;
    let doc = PenaltyDocument {
        delta: args.delta,
        value: penalty_value(values.as_slice(), args.delta),
        gradient: penalty_gradient(values.as_slice(), args.delta),
    };
    println!("{}", serde_json::to_string(&doc)?);
    Ok(())
}
