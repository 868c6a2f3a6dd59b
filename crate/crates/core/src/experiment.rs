//! Synthetic sparse-deconvolution experiments.
//!
//! Each trial draws a sparse signal, convolves it with the filter, adds white
//! Gaussian noise and compares the l1 baseline, l1 with least-squares
//! debiasing, and the bivariate penalty with maximal certified parameters.
//!
//! Random numbers come from ChaCha8 (`rand_chacha`). Trial `t` uses
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `t`, so trials are independent
//! and reproducible in any execution order. The same stream is used for every
//! noise level, so a trial sees the same signal and the same unit-variance
//! noise at each `sigma`. Standard normals use the Box-Muller cosine branch:
//! `sqrt(-2 ln(1 - u1)) cos(2 pi u2)` with `u1, u2` uniform on `[0, 1)`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bivariate::{BivariateParams, BivariatePenalty};
use crate::convexity;
use crate::diagnostics::{self, rmse};
use crate::error::{BisrError, Result};
use crate::linop::ConvolutionFilter;
use crate::penalties::PenaltyFamily;
use crate::solver::{self, Algorithm, Objective, SolveResult, SolverConfig};

/// Default stopping tolerance of experiment solves. Tighter than the solver
/// default so that every emitted solution passes the optimality check at 1e-3.
pub const SWEEP_STOP_REL_TOL: f64 = 1e-6;

/// Named stand-in filters with known tridiagonal bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterPreset {
    /// `sqrt(0.4) [0.125, 1, 0.125]`: `|H(w)|^2 = 0.4 (1 + cos(w)/4)^2`, which
    /// touches `P(w) = 0.4 + 0.2 cos w` at `w = pi/2`.
    Example1Like,
    /// `c [0.2, 1.2, 1.2, 0.2] = c (1 + z^-1)(0.2 + z^-1 + 0.2 z^-2)` with
    /// `c = sqrt(0.38 / 0.72)`: `H(pi) = 0` and
    /// `|H(w)|^2 = (0.38/0.36)(1 + cos w)(1 + 0.4 cos w)^2 >= 0.38 (1 + cos w)`.
    Example2Null,
}

impl FilterPreset {
    pub const ALL: [FilterPreset; 2] = [FilterPreset::Example1Like, FilterPreset::Example2Null];

    pub fn name(self) -> &'static str {
        match self {
            FilterPreset::Example1Like => "example1_like",
            FilterPreset::Example2Null => "example2_null",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name.trim())
    }

    pub fn taps(self) -> Vec<f64> {
        match self {
            FilterPreset::Example1Like => {
                let c = 0.4_f64.sqrt();
                vec![0.125 * c, c, 0.125 * c]
            }
            FilterPreset::Example2Null => {
                let c = (0.38_f64 / 0.72).sqrt();
                vec![0.2 * c, 1.2 * c, 1.2 * c, 0.2 * c]
            }
        }
    }

    pub fn filter(self) -> ConvolutionFilter {
        ConvolutionFilter::new(self.taps()).expect("preset taps are valid")
    }
}

/// Where the filter of an experiment comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FilterSource {
    Taps(Vec<f64>),
    /// A preset name, or otherwise a path to a CSV file of taps.
    Named(String),
}

impl FilterSource {
    /// Resolves the filter; relative paths are taken from `base_dir`.
    pub fn resolve(&self, base_dir: Option<&Path>) -> Result<ConvolutionFilter> {
        match self {
            FilterSource::Taps(t) => ConvolutionFilter::new(t.clone()),
            FilterSource::Named(name) => {
                if let Some(p) = FilterPreset::from_name(name) {
                    return Ok(p.filter());
                }
                let mut path = PathBuf::from(name);
                if path.is_relative() {
                    if let Some(base) = base_dir {
                        path = base.join(path);
                    }
                }
                ConvolutionFilter::new(crate::io::read_column(&path)?)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(d: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

/// Configuration of a Monte-Carlo sweep, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub n: usize,
    pub n_impulses: usize,
    pub amp_range: (f64, f64),
    /// Noise levels; a single number is accepted.
    #[serde(alias = "sigma", deserialize_with = "one_or_many")]
    pub sigmas: Vec<f64>,
    pub beta: f64,
    /// Fixed regularization weight; when absent `lambda = beta sigma ||h||_2`.
    pub lambda: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub filter: FilterSource,
    /// Penalty families to run; a single name is accepted.
    #[serde(alias = "family", deserialize_with = "one_or_many")]
    pub families: Vec<PenaltyFamily>,
    pub algorithm: Algorithm,
    pub stop_rel_tol: f64,
    pub max_iter: usize,
    pub inner_iter: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let cfg = SolverConfig::default();
        ExperimentSpec {
            n: 100,
            n_impulses: 10,
            amp_range: (-100.0, 100.0),
            sigmas: vec![4.0],
            beta: 2.5,
            lambda: None,
            trials: 200,
            seed: 0,
            filter: FilterSource::Named(FilterPreset::Example1Like.name().to_string()),
            families: PenaltyFamily::ALL.to_vec(),
            algorithm: cfg.algorithm,
            stop_rel_tol: SWEEP_STOP_REL_TOL,
            max_iter: cfg.max_iter,
            inner_iter: cfg.inner_iter,
        }
    }
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| BisrError::domain(format!("invalid experiment config: {e}")))
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            algorithm: self.algorithm,
            stop_rel_tol: self.stop_rel_tol,
            max_iter: self.max_iter,
            inner_iter: self.inner_iter,
            ..SolverConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(BisrError::domain("n must be positive"));
        }
        if self.n_impulses > self.n {
            return Err(BisrError::domain(format!("n_impulses = {} exceeds n = {}", self.n_impulses, self.n)));
        }
        let (lo, hi) = self.amp_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(BisrError::domain("amp_range must be a finite interval (lo, hi) with lo < hi"));
        }
        if self.sigmas.is_empty() || self.sigmas.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(BisrError::domain("sigmas must be a non-empty list of values >= 0"));
        }
        if self.lambda.is_none() && self.sigmas.contains(&0.0) {
            return Err(BisrError::domain("sigma = 0 needs an explicit lambda"));
        }
        if let Some(l) = self.lambda {
            if !(l.is_finite() && l > 0.0) {
                return Err(BisrError::domain("lambda must be positive"));
            }
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(BisrError::domain("beta must be positive"));
        }
        if self.trials == 0 {
            return Err(BisrError::domain("trials must be positive"));
        }
        self.solver_config().validate()
    }

    /// Method labels in report order.
    pub fn methods(&self) -> Vec<String> {
        let mut m = vec!["l1".to_string(), "l1_debias".to_string()];
        m.extend(self.families.iter().map(|f| format!("bisr_{}", f.name())));
        m
    }
}

/// Generator for trial `trial` of an experiment seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    (-2.0 * (1.0 - u1).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// `k` impulses at distinct uniform positions (partial Fisher-Yates) with
/// amplitudes uniform on `amp_range`.
pub fn gen_sparse_signal<R: Rng + ?Sized>(n: usize, k: usize, amp_range: (f64, f64), rng: &mut R) -> Result<Vec<f64>> {
    if k > n {
        return Err(BisrError::domain(format!("cannot place {k} impulses in {n} samples")));
    }
    let (lo, hi) = amp_range;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(BisrError::domain("invalid amplitude range"));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut x = vec![0.0; n];
    for i in 0..k {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
        let u: f64 = rng.random();
        x[idx[i]] = lo + (hi - lo) * u;
    }
    Ok(x)
}

/// `y + sigma w` with `w` i.i.d. standard normal.
pub fn add_awgn<R: Rng + ?Sized>(y: &[f64], sigma: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(BisrError::domain(format!("sigma must be >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(y.to_vec());
    }
    Ok(y.iter().map(|v| v + sigma * standard_normal(rng)).collect())
}

/// `lambda = beta sigma ||h||_2`.
pub fn lambda_rule(h: &ConvolutionFilter, sigma: f64, beta: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0 && beta.is_finite() && beta > 0.0) {
        return Err(BisrError::domain(format!("sigma and beta must be positive, got {sigma}, {beta}")));
    }
    Ok(beta * sigma * h.norm2())
}

/// The l1 solution: the bivariate solver with `a = (0, 0)`.
pub fn solve_l1_baseline(h: &ConvolutionFilter, y: &[f64], lambda: f64, cfg: &SolverConfig) -> Result<SolveResult> {
    let pen = BivariatePenalty::new(PenaltyFamily::Atan, BivariateParams::zero());
    let obj = Objective::new(h.clone(), y.to_vec(), lambda, pen)?;
    solver::solve(&obj, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Debiased {
    pub x: Vec<f64>,
    /// Set when the estimate could not be refitted.
    pub warning: Option<String>,
}

/// Least-squares refit of the nonzero entries of `x_hat`:
/// minimizes `||y - H x||` over `x` supported where `x_hat != 0`.
pub fn debias(h: &ConvolutionFilter, y: &[f64], x_hat: &[f64]) -> Result<Debiased> {
    if y.len() != x_hat.len() + h.len() - 1 {
        return Err(BisrError::domain(format!(
            "observation length {} does not match signal length {} and {} taps",
            y.len(),
            x_hat.len(),
            h.len()
        )));
    }
    let support: Vec<usize> = x_hat.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(i, _)| i).collect();
    if support.is_empty() {
        return Ok(Debiased { x: vec![0.0; x_hat.len()], warning: Some("empty support".into()) });
    }
    let taps = h.taps();
    let m = support.len();
    let mut a = DMatrix::<f64>::zeros(y.len(), m);
    for (col, &k) in support.iter().enumerate() {
        for (j, &t) in taps.iter().enumerate() {
            a[(k + j, col)] = t;
        }
    }
    let yv = DVector::from_column_slice(y);
    let gram = a.transpose() * &a;
    let rhs = a.transpose() * yv;
    let Some(chol) = gram.clone().cholesky() else {
        return Ok(Debiased { x: x_hat.to_vec(), warning: Some("restricted system is rank deficient".into()) });
    };
    // reject numerically singular systems that Cholesky still accepts
    let diag = chol.l().diagonal();
    let (dmin, dmax) = diag.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), d| (lo.min(d.abs()), hi.max(d.abs())));
    if dmin <= 1e-7 * dmax {
        return Ok(Debiased { x: x_hat.to_vec(), warning: Some("restricted system is rank deficient".into()) });
    }
    let c = chol.solve(&rhs);
    let mut x = vec![0.0; x_hat.len()];
    for (col, &k) in support.iter().enumerate() {
        x[k] = c[col];
    }
    Ok(Debiased { x, warning: None })
}

/// Per-trial outcome at one noise level; vectors are indexed like `ExperimentSpec::methods`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub sigma: f64,
    pub trial: usize,
    pub lambda: f64,
    pub rmse: Vec<f64>,
    pub seconds: Vec<f64>,
    /// Optimality violation of each solver output (`NaN` for the debiased estimate).
    pub max_violation: Vec<f64>,
    /// Per family: indices where the bivariate error is smaller than the l1 error.
    pub bisr_better: Vec<usize>,
    /// Per family: indices where the l1 error is smaller.
    pub bisr_worse: Vec<usize>,
}

/// Everything needed to run one trial.
pub struct TrialProblem {
    pub x_true: Vec<f64>,
    pub y: Vec<f64>,
    pub lambda: f64,
}

/// Draws the signal and the noisy observation of trial `trial` at `sigma`.
pub fn trial_problem(spec: &ExperimentSpec, h: &ConvolutionFilter, sigma: f64, trial: usize) -> Result<TrialProblem> {
    let mut rng = trial_rng(spec.seed, trial as u64);
    let x_true = gen_sparse_signal(spec.n, spec.n_impulses, spec.amp_range, &mut rng)?;
    let y = add_awgn(&h.apply(&x_true)?, sigma, &mut rng)?;
    let lambda = match spec.lambda {
        Some(l) => l,
        None => lambda_rule(h, sigma, spec.beta)?,
    };
    Ok(TrialProblem { x_true, y, lambda })
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let t0 = Instant::now();
    let v = f()?;
    Ok((v, t0.elapsed().as_secs_f64()))
}

pub fn run_trial(spec: &ExperimentSpec, h: &ConvolutionFilter, sigma: f64, trial: usize) -> Result<TrialOutcome> {
    let cfg = spec.solver_config();
    let p = trial_problem(spec, h, sigma, trial)?;
    let context = |e: BisrError| match e {
        BisrError::AlgorithmFailure { message, trace } => {
            BisrError::AlgorithmFailure { message: format!("sigma = {sigma}, trial {trial}: {message}"), trace }
        }
        other => other,
    };

    let (l1, t_l1) = timed(|| solve_l1_baseline(h, &p.y, p.lambda, &cfg)).map_err(context)?;
    let (deb, t_deb) = timed(|| debias(h, &p.y, &l1.x_hat))?;
    let mut rmse_v = vec![rmse(&l1.x_hat, &p.x_true)?, rmse(&deb.x, &p.x_true)?];
    let mut secs = vec![t_l1, t_l1 + t_deb];
    let mut viol = vec![l1.optimality_max_violation, f64::NAN];
    let mut better = Vec::new();
    let mut worse = Vec::new();

    let (params, _) = convexity::auto_params(h, p.lambda, convexity::DEFAULT_GRID)?;
    for &family in &spec.families {
        let obj = Objective::new(h.clone(), p.y.clone(), p.lambda, BivariatePenalty::new(family, params))?;
        let (res, t) = timed(|| solver::solve(&obj, &cfg)).map_err(context)?;
        rmse_v.push(rmse(&res.x_hat, &p.x_true)?);
        secs.push(t);
        viol.push(res.optimality_max_violation);
        let (mut b, mut w) = (0, 0);
        for ((xb, xl), xt) in res.x_hat.iter().zip(&l1.x_hat).zip(&p.x_true) {
            let (eb, el) = ((xb - xt).abs(), (xl - xt).abs());
            if eb < el {
                b += 1;
            } else if el < eb {
                w += 1;
            }
        }
        better.push(b);
        worse.push(w);
    }
    Ok(TrialOutcome {
        sigma,
        trial,
        lambda: p.lambda,
        rmse: rmse_v,
        seconds: secs,
        max_violation: viol,
        bisr_better: better,
        bisr_worse: worse,
    })
}

/// Averages for one `(sigma, method)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sigma: f64,
    pub method: String,
    pub mean_rmse: f64,
    pub mean_seconds: f64,
    /// Largest optimality violation over trials (`NaN` for debiased estimates).
    pub max_violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub methods: Vec<String>,
    pub trials: usize,
    pub rows: Vec<SweepRow>,
    pub outcomes: Vec<TrialOutcome>,
}

impl SweepReport {
    pub fn row(&self, sigma: f64, method: &str) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.sigma == sigma && r.method == method)
    }

    /// Deterministic results: `sigma,method,trials,mean_rmse,max_violation`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sigma,method,trials,mean_rmse,max_violation\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                crate::io::fmt_f64(r.sigma),
                r.method,
                self.trials,
                crate::io::fmt_f64(r.mean_rmse),
                crate::io::fmt_f64(r.max_violation)
            );
        }
        out
    }

    /// Wall-clock timings: `sigma,method,mean_seconds`.
    pub fn timing_csv(&self) -> String {
        let mut out = String::from("sigma,method,mean_seconds\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", crate::io::fmt_f64(r.sigma), r.method, crate::io::fmt_f64(r.mean_seconds));
        }
        out
    }

    /// Aligned text table with one row per method and one RMSE column per sigma,
    /// followed by mean solve times.
    pub fn to_table(&self) -> String {
        let sigmas: Vec<f64> = {
            let mut s: Vec<f64> = Vec::new();
            for r in &self.rows {
                if !s.contains(&r.sigma) {
                    s.push(r.sigma);
                }
            }
            s
        };
        let width = self.methods.iter().map(|m| m.len()).max().unwrap_or(6).max(6);
        let mut out = format!("mean RMSE over {} trials\n{:<width$}", self.trials, "method");
        for s in &sigmas {
            let _ = write!(out, "  {:>10}", format!("sigma={s}"));
        }
        out.push('\n');
        for m in &self.methods {
            let _ = write!(out, "{m:<width$}");
            for &s in &sigmas {
                let v = self.row(s, m).map_or(f64::NAN, |r| r.mean_rmse);
                let _ = write!(out, "  {v:>10.4}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "\nmean time per trial [ms]");
        for m in &self.methods {
            let _ = write!(out, "{m:<width$}");
            for &s in &sigmas {
                let v = self.row(s, m).map_or(f64::NAN, |r| r.mean_seconds * 1e3);
                let _ = write!(out, "  {v:>10.3}");
            }
            out.push('\n');
        }
        out
    }
}

/// Runs all trials at all noise levels. Trials execute in parallel; results
/// are collected in trial order and averaged sequentially, so the RMSE
/// output does not depend on scheduling.
pub fn run_sweep(spec: &ExperimentSpec, h: &ConvolutionFilter) -> Result<SweepReport> {
    spec.validate()?;
    let methods = spec.methods();
    let mut rows = Vec::new();
    let mut outcomes = Vec::new();
    for &sigma in &spec.sigmas {
        let batch: Vec<TrialOutcome> = (0..spec.trials)
            .into_par_iter()
            .map(|t| run_trial(spec, h, sigma, t))
            .collect::<Result<Vec<_>>>()?;
        let nt = batch.len() as f64;
        for (mi, m) in methods.iter().enumerate() {
            let mean_rmse = batch.iter().map(|o| o.rmse[mi]).sum::<f64>() / nt;
            let mean_seconds = batch.iter().map(|o| o.seconds[mi]).sum::<f64>() / nt;
            let max_violation = batch.iter().map(|o| o.max_violation[mi]).fold(f64::NAN, f64::max);
            rows.push(SweepRow { sigma, method: m.clone(), mean_rmse, mean_seconds, max_violation });
        }
        outcomes.extend(batch);
    }
    Ok(SweepReport { methods, trials: spec.trials, rows, outcomes })
}

/// Optimality check of a BISR solve inside a sweep trial, for callers that
/// want the full report rather than the maximum violation.
pub fn trial_optimality(
    spec: &ExperimentSpec,
    h: &ConvolutionFilter,
    sigma: f64,
    trial: usize,
    family: PenaltyFamily,
) -> Result<diagnostics::OptimalityReport> {
    let p = trial_problem(spec, h, sigma, trial)?;
    let (obj, _) = Objective::with_auto_params(h.clone(), p.y, p.lambda, family)?;
    let res = solver::solve(&obj, &spec.solver_config())?;
    diagnostics::optimality_report(&obj, &res.x_hat, diagnostics::DEFAULT_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_signal_examples() {
        let mut rng = trial_rng(7, 0);
        let x = gen_sparse_signal(100, 10, (-100.0, 100.0), &mut rng).unwrap();
        assert_eq!(x.iter().filter(|v| **v != 0.0).count(), 10);
        assert!(x.iter().all(|v| (-100.0..100.0).contains(v)));
        assert!(gen_sparse_signal(5, 0, (-1.0, 1.0), &mut rng).unwrap().iter().all(|v| *v == 0.0));
        assert!(gen_sparse_signal(5, 6, (-1.0, 1.0), &mut rng).is_err());
        let a = gen_sparse_signal(50, 5, (-1.0, 1.0), &mut trial_rng(3, 2)).unwrap();
        let b = gen_sparse_signal(50, 5, (-1.0, 1.0), &mut trial_rng(3, 2)).unwrap();
        assert_eq!(a, b);
        let c = gen_sparse_signal(50, 5, (-1.0, 1.0), &mut trial_rng(3, 3)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn awgn_examples() {
        let y = vec![1.0, -2.0, 3.0];
        assert_eq!(add_awgn(&y, 0.0, &mut trial_rng(1, 0)).unwrap(), y);
        assert!(add_awgn(&y, -1.0, &mut trial_rng(1, 0)).is_err());
        let z = vec![0.0; 10_000];
        let w = add_awgn(&z, 4.0, &mut trial_rng(11, 0)).unwrap();
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let sd = (w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (w.len() - 1) as f64).sqrt();
        assert!((sd - 4.0).abs() < 0.1, "sd = {sd}");
        assert_eq!(w, add_awgn(&z, 4.0, &mut trial_rng(11, 0)).unwrap());
    }

    #[test]
    fn lambda_rule_examples() {
        let unit = ConvolutionFilter::new(vec![1.0]).unwrap();
        assert!((lambda_rule(&unit, 4.0, 2.5).unwrap() - 10.0).abs() < 1e-15);
        let h = ConvolutionFilter::new(vec![0.6, 0.8]).unwrap();
        assert!((lambda_rule(&h, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(lambda_rule(&h, 0.0, 1.0).is_err());
        assert!(lambda_rule(&h, 1.0, -2.0).is_err());
    }

    #[test]
    fn preset_structure() {
        let h2 = FilterPreset::Example2Null.filter();
        let t = h2.taps();
        assert_eq!(t[0], t[3]);
        assert_eq!(t[1], t[2]);
        assert_eq!((t[0] + t[2]) - (t[1] + t[3]), 0.0);
        assert_eq!(FilterPreset::from_name("example1_like"), Some(FilterPreset::Example1Like));
        assert_eq!(FilterPreset::from_name("nope"), None);
    }

    #[test]
    fn debias_empty_support() {
        let h = ConvolutionFilter::new(vec![1.0, 0.5]).unwrap();
        let d = debias(&h, &[1.0, 2.0, 3.0], &[0.0, 0.0]).unwrap();
        assert_eq!(d.x, vec![0.0, 0.0]);
        assert!(d.warning.is_some());
    }

    #[test]
    fn spec_json_forms() {
        let s = ExperimentSpec::from_json(r#"{"sigma": 2.0, "family": "atan", "trials": 3}"#).unwrap();
        assert_eq!(s.sigmas, vec![2.0]);
        assert_eq!(s.families, vec![PenaltyFamily::Atan]);
        let s = ExperimentSpec::from_json(r#"{"sigmas": [1, 2], "filter": [1.0, 0.5]}"#).unwrap();
        assert_eq!(s.sigmas, vec![1.0, 2.0]);
        assert_eq!(s.filter, FilterSource::Taps(vec![1.0, 0.5]));
        assert!(ExperimentSpec::from_json(r#"{"bogus": 1}"#).is_err());
        let bad = ExperimentSpec { n_impulses: 200, ..ExperimentSpec::default() };
        assert!(bad.validate().is_err());
    }
}
