use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bisr::convexity::{self, DEFAULT_GRID};
use bisr::diagnostics::{self, rmse};
use bisr::experiment::{self, ExperimentSpec, FilterPreset, FilterSource};
use bisr::io::{fmt_f64, parse_inline_list, read_column, write_signal};
use bisr::{
    Algorithm, BisrError, BivariateParams, BivariatePenalty, ConvolutionFilter, Objective, PenaltyFamily, Result,
    SolverConfig,
};

/// Sparse deconvolution with a convexity-preserving bivariate penalty.
///
/// Exit status: 0 on success, 1 on invalid input, 2 when a solver fails or a
/// solution does not pass the optimality check.
#[derive(Parser)]
#[command(name = "bisr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulated deconvolution with one of the built-in filters.
    Demo(DemoArgs),
    /// Deconvolves an observed signal.
    Deconv(DeconvArgs),
    /// Fits the tridiagonal bound of a filter and reports the maximal parameters.
    CheckConvexity(CheckArgs),
    /// Monte-Carlo comparison against l1 and debiased l1.
    Sweep(SweepArgs),
    /// Checks the first-order optimality condition of a candidate solution.
    Optimality(OptimalityArgs),
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value = "fbs")]
    algorithm: Algorithm,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 20_000)]
    max_iter: usize,
    #[arg(long, default_value_t = 200)]
    inner_iter: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            algorithm: self.algorithm,
            stop_rel_tol: self.tol,
            max_iter: self.max_iter,
            inner_iter: self.inner_iter,
            ..SolverConfig::default()
        }
    }
}

#[derive(Args)]
struct PenaltyArgs {
    #[arg(long, default_value = "atan")]
    family: PenaltyFamily,
    #[arg(long, requires = "a2", conflicts_with = "auto")]
    a1: Option<f64>,
    #[arg(long, requires = "a1", conflicts_with = "auto")]
    a2: Option<f64>,
    /// Use the largest parameters certified for the filter.
    #[arg(long, required_unless_present = "a1")]
    auto: bool,
    /// Skip the convexity certificate (the objective may be non-convex).
    #[arg(long)]
    no_certify: bool,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    example: u8,
    #[arg(long, default_value_t = 4.0)]
    sigma: f64,
    #[arg(long, default_value_t = 2.5)]
    beta: f64,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    impulses: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "atan")]
    family: PenaltyFamily,
    /// Directory for signal CSVs (x_true, y, x_l1, x_bisr, scatter).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct DeconvArgs {
    /// Observed signal, length N + L - 1.
    #[arg(long)]
    input: PathBuf,
    /// Filter taps: a CSV file, a preset name or an inline list like "1,0.5".
    #[arg(long)]
    filter: String,
    #[arg(long)]
    lambda: f64,
    #[command(flatten)]
    penalty: PenaltyArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output CSV for the estimate; printed to stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    filter: String,
    #[arg(long)]
    lambda: f64,
    /// Parameters to certify instead of only reporting the maximal ones.
    #[arg(long, requires = "a2")]
    a1: Option<f64>,
    #[arg(long, requires = "a1")]
    a2: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Results CSV (mean RMSE per sigma and method).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Timing CSV (mean seconds per sigma and method).
    #[arg(long)]
    timing: Option<PathBuf>,
}

#[derive(Args)]
struct OptimalityArgs {
    /// Observed signal.
    #[arg(long)]
    input: PathBuf,
    /// Candidate solution, length N.
    #[arg(long)]
    solution: PathBuf,
    #[arg(long)]
    filter: String,
    #[arg(long)]
    lambda: f64,
    #[command(flatten)]
    penalty: PenaltyArgs,
    #[arg(long, default_value_t = diagnostics::DEFAULT_TOL)]
    tol: f64,
    /// Writes the (index, x_n, v_n) scatter data.
    #[arg(long)]
    scatter: Option<PathBuf>,
}

/// A run that produced output but should exit with status 2.
struct Failed(String);

enum Outcome {
    Ok,
    Failed(Failed),
}

fn load_filter(spec: &str) -> Result<ConvolutionFilter> {
    if let Some(p) = FilterPreset::from_name(spec) {
        return Ok(p.filter());
    }
    let path = Path::new(spec);
    if path.exists() {
        return ConvolutionFilter::new(read_column(path)?);
    }
    if spec.contains(',') || spec.trim().parse::<f64>().is_ok() {
        return ConvolutionFilter::new(parse_inline_list(spec)?);
    }
    FilterSource::Named(spec.to_string()).resolve(None)
}

fn build_objective(h: ConvolutionFilter, y: Vec<f64>, lambda: f64, pa: &PenaltyArgs) -> Result<Objective> {
    let params = if pa.auto {
        let (params, fit) = convexity::auto_params(&h, lambda, DEFAULT_GRID)?;
        eprintln!(
            "fitted P(w) = {} + 2*({}) cos w{}",
            fmt_f64(fit.bound.p0),
            fmt_f64(fit.bound.p1),
            if fit.degenerate { " (degenerate: l1 only)" } else { "" }
        );
        params
    } else {
        BivariateParams::new(pa.a1.unwrap_or(0.0), pa.a2.unwrap_or(0.0))?
    };
    eprintln!("a1 = {}, a2 = {}", fmt_f64(params.a1), fmt_f64(params.a2));
    let pen = BivariatePenalty::new(pa.family, params);
    if pa.no_certify {
        let obj = Objective::new_unchecked(h, y, lambda, pen)?;
        if !obj.is_certified() {
            eprintln!("warning: parameters are not certified; the objective may be non-convex");
        }
        Ok(obj)
    } else {
        Objective::new(h, y, lambda, pen)
    }
}

fn run_demo(args: &DemoArgs) -> Result<Outcome> {
    let preset = if args.example == 1 { FilterPreset::Example1Like } else { FilterPreset::Example2Null };
    let h = preset.filter();
    let spec = ExperimentSpec {
        n: args.n,
        n_impulses: args.impulses,
        sigmas: vec![args.sigma],
        beta: args.beta,
        seed: args.seed,
        trials: 1,
        families: vec![args.family],
        ..ExperimentSpec::default()
    };
    spec.validate()?;
    let p = experiment::trial_problem(&spec, &h, args.sigma, 0)?;
    let cfg = args.solver.config();
    let l1 = experiment::solve_l1_baseline(&h, &p.y, p.lambda, &cfg)?;
    let deb = experiment::debias(&h, &p.y, &l1.x_hat)?;
    let (obj, fit) = Objective::with_auto_params(h.clone(), p.y.clone(), p.lambda, args.family)?;
    let res = bisr::solver::solve(&obj, &cfg)?;
    let report = diagnostics::optimality_report(&obj, &res.x_hat, diagnostics::DEFAULT_TOL)?;
    let params = obj.penalty().params;

    println!("filter        {} {:?}", preset.name(), h.taps().iter().map(|t| fmt_f64(*t)).collect::<Vec<_>>());
    println!("lambda        {}", fmt_f64(p.lambda));
    println!("P(w)          {} + 2*({}) cos w", fmt_f64(fit.bound.p0), fmt_f64(fit.bound.p1));
    println!("a1, a2        {}, {}", fmt_f64(params.a1), fmt_f64(params.a2));
    println!("rmse l1       {}", fmt_f64(rmse(&l1.x_hat, &p.x_true)?));
    println!("rmse l1+ls    {}", fmt_f64(rmse(&deb.x, &p.x_true)?));
    println!("rmse bisr     {}", fmt_f64(rmse(&res.x_hat, &p.x_true)?));
    println!("iterations    {} (converged: {})", res.iterations, res.converged);
    println!("objective     {}", fmt_f64(res.final_objective()));
    println!("optimality    max violation {} (passed: {})", fmt_f64(report.max_violation), report.passed);

    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir)?;
        write_signal(&dir.join("x_true.csv"), &p.x_true)?;
        write_signal(&dir.join("y.csv"), &p.y)?;
        write_signal(&dir.join("x_l1.csv"), &l1.x_hat)?;
        write_signal(&dir.join("x_l1_debias.csv"), &deb.x)?;
        write_signal(&dir.join("x_bisr.csv"), &res.x_hat)?;
        report.write_csv(&dir.join("scatter.csv"))?;
    }
    finish_solve(res.converged && l1.converged, report.passed)
}

fn finish_solve(converged: bool, passed: bool) -> Result<Outcome> {
    if !converged {
        return Ok(Outcome::Failed(Failed("iteration limit reached before convergence".into())));
    }
    if !passed {
        return Ok(Outcome::Failed(Failed("solution does not pass the optimality check".into())));
    }
    Ok(Outcome::Ok)
}

fn run_deconv(args: &DeconvArgs) -> Result<Outcome> {
    let h = load_filter(&args.filter)?;
    let y = read_column(&args.input)?;
    let obj = build_objective(h, y, args.lambda, &args.penalty)?;
    let res = bisr::solver::solve(&obj, &args.solver.config())?;
    eprintln!(
        "iterations {} (converged: {}), objective {}, max optimality violation {}",
        res.iterations,
        res.converged,
        fmt_f64(res.final_objective()),
        fmt_f64(res.optimality_max_violation)
    );
    match &args.output {
        Some(path) => write_signal(path, &res.x_hat)?,
        None => print!("{}", bisr::io::signal_to_csv(&res.x_hat)),
    }
    finish_solve(res.converged, res.optimality_max_violation <= diagnostics::DEFAULT_TOL)
}

fn run_check(args: &CheckArgs) -> Result<Outcome> {
    let h = load_filter(&args.filter)?;
    let (params, fit) = convexity::auto_params(&h, args.lambda, args.grid)?;
    println!("p0            {}", fmt_f64(fit.bound.p0));
    println!("p1            {}", fmt_f64(fit.bound.p1));
    println!("P(0), P(pi)   {}, {}", fmt_f64(fit.bound.at_zero()), fmt_f64(fit.bound.at_pi()));
    println!("degenerate    {}", fit.degenerate);
    println!("max a1, a2    {}, {}", fmt_f64(params.a1), fmt_f64(params.a2));
    if let (Some(a1), Some(a2)) = (args.a1, args.a2) {
        let cert = convexity::certify(&h, args.lambda, &BivariateParams::new(a1, a2)?, args.grid)?;
        println!("certified     {} (max excess {})", cert.certified, fmt_f64(cert.max_excess));
        if !cert.certified {
            return Err(BisrError::NotCertified(format!("a = ({a1}, {a2}) is not certified for this filter")));
        }
    }
    Ok(Outcome::Ok)
}

fn run_sweep(args: &SweepArgs) -> Result<Outcome> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| BisrError::Io(format!("{}: {e}", args.config.display())))?;
    let spec = ExperimentSpec::from_json(&text)?;
    let h = spec.filter.resolve(args.config.parent())?;
    let report = experiment::run_sweep(&spec, &h)?;
    print!("{}", report.to_table());
    match &args.output {
        Some(p) => std::fs::write(p, report.to_csv())?,
        None => print!("\n{}", report.to_csv()),
    }
    if let Some(p) = &args.timing {
        std::fs::write(p, report.timing_csv())?;
    }
    Ok(Outcome::Ok)
}

fn run_optimality(args: &OptimalityArgs) -> Result<Outcome> {
    let h = load_filter(&args.filter)?;
    let y = read_column(&args.input)?;
    let x = read_column(&args.solution)?;
    let obj = build_objective(h, y, args.lambda, &args.penalty)?;
    let report = diagnostics::optimality_report(&obj, &x, args.tol)?;
    println!("max violation {}", fmt_f64(report.max_violation));
    println!("passed        {}", report.passed);
    if !report.convexity_certified {
        println!("warning       objective not certified convex; the condition is only necessary");
    }
    if let Some(p) = &args.scatter {
        report.write_csv(p)?;
    }
    finish_solve(true, report.passed)
}

fn exit_code(e: &BisrError) -> u8 {
    match e {
        BisrError::AlgorithmFailure { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Demo(a) => run_demo(a),
        Command::Deconv(a) => run_deconv(a),
        Command::CheckConvexity(a) => run_check(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Optimality(a) => run_optimality(a),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed(Failed(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
