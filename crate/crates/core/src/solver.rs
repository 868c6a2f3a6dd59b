//! Minimization of the `N`-point objective
//!
//! ```text
//! F(x) = 1/2 ||y - Hx||^2 + lambda/2 sum_n psi((x_{n-1}, x_n); a)
//!      = 1/2 ||y - Hx||^2 + lambda Theta(x) + lambda ||x||_1,
//! Theta(x) = 1/2 sum_n S((x_{n-1}, x_n); a),
//! ```
//!
//! with `x_0 = x_{N+1} = 0`. `Theta` is smooth and concave, so both solvers
//! treat `1/2 ||y - Hx||^2 + lambda Theta(x)` as the smooth part and the l1
//! term through soft thresholding.

use serde::{Deserialize, Serialize};

use crate::bivariate::BivariatePenalty;
use crate::convexity::{self, Certificate, TridiagFit};
use crate::diagnostics;
use crate::error::{BisrError, Result};
use crate::linop::ConvolutionFilter;
use crate::penalties::PenaltyFamily;

/// Frequency grid used to bound the largest eigenvalue of `H^T H`.
const RHO_GRID: usize = 4096;
/// Relative slack tolerated in the monotone decrease of the objective.
const MONOTONE_SLACK: f64 = 1e-10;
/// Absolute stopping threshold used while the iterate is still zero.
const ZERO_ITERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Forward-backward splitting (iterative thresholding).
    Fbs,
    /// Majorization-minimization: a sequence of l1 problems.
    Mm,
}

impl std::str::FromStr for Algorithm {
    type Err = BisrError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fbs" | "ista" => Ok(Algorithm::Fbs),
            "mm" => Ok(Algorithm::Mm),
            other => Err(BisrError::domain(format!("unknown algorithm {other:?} (expected fbs or mm)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// Step size is `mu_factor / rho`; must lie in `(0, 2)`.
    pub mu_factor: f64,
    /// Stop when `||x_{k+1} - x_k||_inf <= stop_rel_tol * ||x_k||_inf`.
    pub stop_rel_tol: f64,
    pub max_iter: usize,
    /// Inner proximal-gradient iterations per MM step.
    pub inner_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { algorithm: Algorithm::Fbs, mu_factor: 1.9, stop_rel_tol: 1e-4, max_iter: 20_000, inner_iter: 200 }
    }
}

impl SolverConfig {
    pub fn with_algorithm(mut self, algorithm: Algorithm) -> Self {
        self.algorithm = algorithm;
        self
    }

    pub fn with_tol(mut self, stop_rel_tol: f64) -> Self {
        self.stop_rel_tol = stop_rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu_factor > 0.0 && self.mu_factor < 2.0) {
            return Err(BisrError::domain(format!("mu_factor must lie in (0, 2), got {}", self.mu_factor)));
        }
        if !(self.stop_rel_tol > 0.0 && self.stop_rel_tol.is_finite()) {
            return Err(BisrError::domain("stop_rel_tol must be positive"));
        }
        if self.max_iter == 0 || (self.algorithm == Algorithm::Mm && self.inner_iter == 0) {
            return Err(BisrError::domain("iteration limits must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub x_hat: Vec<f64>,
    /// `F(x_k)` for `k = 0..=iterations`, starting at `x_0 = 0`.
    pub objective_trace: Vec<f64>,
    /// Outer iterations performed.
    pub iterations: usize,
    /// Total inner iterations (MM only).
    pub inner_iterations: usize,
    pub converged: bool,
    /// Largest distance of the optimality map to the sign set.
    pub optimality_max_violation: f64,
}

impl SolveResult {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace is never empty")
    }
}

/// A deconvolution problem: filter, observation, `lambda` and penalty.
#[derive(Debug, Clone)]
pub struct Objective {
    h: ConvolutionFilter,
    y: Vec<f64>,
    lambda: f64,
    penalty: BivariatePenalty,
    n: usize,
    certificate: Certificate,
}

impl Objective {
    /// Builds the problem and requires a convexity certificate for the penalty
    /// parameters. The signal length is `y.len() - h.len() + 1`.
    pub fn new(h: ConvolutionFilter, y: Vec<f64>, lambda: f64, penalty: BivariatePenalty) -> Result<Self> {
        let obj = Self::new_unchecked(h, y, lambda, penalty)?;
        if !obj.certificate.certified {
            let p = &obj.penalty.params;
            return Err(BisrError::NotCertified(format!(
                "a = ({}, {}) with lambda = {} needs P(w) = {} + 2*{} cos w under |H(w)|^2, exceeded by {:e}",
                p.a1, p.a2, obj.lambda, obj.certificate.bound.p0, obj.certificate.bound.p1, obj.certificate.max_excess
            )));
        }
        Ok(obj)
    }

    /// Builds the problem without enforcing convexity. The optimality
    /// certificate is then only a necessary condition.
    pub fn new_unchecked(h: ConvolutionFilter, y: Vec<f64>, lambda: f64, penalty: BivariatePenalty) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(BisrError::domain(format!("lambda must be finite and > 0, got {lambda}")));
        }
        if y.len() < h.len() {
            return Err(BisrError::domain(format!(
                "observation of length {} is shorter than the filter ({} taps)",
                y.len(),
                h.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(BisrError::domain("observation contains non-finite values"));
        }
        let n = y.len() + 1 - h.len();
        let certificate = convexity::certify(&h, lambda, &penalty.params, convexity::DEFAULT_GRID)?;
        Ok(Objective { h, y, lambda, penalty, n, certificate })
    }

    /// Fits the tridiagonal bound for `h` and uses the maximal certified parameters.
    pub fn with_auto_params(
        h: ConvolutionFilter,
        y: Vec<f64>,
        lambda: f64,
        family: PenaltyFamily,
    ) -> Result<(Self, TridiagFit)> {
        let (params, fit) = convexity::auto_params(&h, lambda, convexity::DEFAULT_GRID)?;
        let obj = Self::new(h, y, lambda, BivariatePenalty::new(family, params))?;
        Ok((obj, fit))
    }

    pub fn filter(&self) -> &ConvolutionFilter {
        &self.h
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn penalty(&self) -> &BivariatePenalty {
        &self.penalty
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    pub fn is_certified(&self) -> bool {
        self.certificate.certified
    }

    /// Same problem with a different penalty (not re-certified).
    pub fn with_penalty_unchecked(&self, penalty: BivariatePenalty) -> Result<Self> {
        Self::new_unchecked(self.h.clone(), self.y.clone(), self.lambda, penalty)
    }

    pub(crate) fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(BisrError::domain(format!("signal has length {}, expected {}", x.len(), self.n)));
        }
        Ok(())
    }

    /// `Theta(x) = 1/2 sum_n S((x_{n-1}, x_n))` with zero padding.
    pub fn theta_value(&self, x: &[f64]) -> Result<f64> {
        self.check_len(x)?;
        Ok(self.theta_unchecked(x))
    }

    pub(crate) fn theta_unchecked(&self, x: &[f64]) -> f64 {
        if self.penalty.params.is_zero() {
            return 0.0;
        }
        0.5 * pairs(x).map(|p| self.penalty.value(p)).sum::<f64>()
    }

    /// `[grad Theta]_n = 1/2 S_1((x_n, x_{n+1})) + 1/2 S_2((x_{n-1}, x_n))`.
    pub fn theta_grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        let mut g = vec![0.0; x.len()];
        self.theta_grad_into(x, &mut g);
        Ok(g)
    }

    pub(crate) fn theta_grad_into(&self, x: &[f64], g: &mut [f64]) {
        g.fill(0.0);
        if self.penalty.params.is_zero() {
            return;
        }
        let n = x.len();
        // pair j is (x_{j-1}, x_j), j = 0..=n, out-of-range entries are zero
        for (j, p) in pairs(x).enumerate() {
            let d = self.penalty.gradient(p);
            if j >= 1 {
                g[j - 1] += 0.5 * d[0];
            }
            if j < n {
                g[j] += 0.5 * d[1];
            }
        }
    }

    /// `F(x)` in the split form `1/2||y - Hx||^2 + lambda Theta(x) + lambda ||x||_1`.
    pub(crate) fn value_unchecked(&self, x: &[f64], hx: &mut Vec<f64>) -> f64 {
        hx.resize(self.y.len(), 0.0);
        self.h.apply_into(x, hx);
        let fid = 0.5 * self.y.iter().zip(hx.iter()).map(|(y, v)| (y - v) * (y - v)).sum::<f64>();
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        fid + self.lambda * (self.theta_unchecked(x) + l1)
    }

    /// `H^T (y - Hx)` into `out`, using `hx` as scratch.
    fn residual_correlation(&self, x: &[f64], hx: &mut [f64], out: &mut [f64]) {
        self.h.apply_into(x, hx);
        for (v, y) in hx.iter_mut().zip(&self.y) {
            *v = y - *v;
        }
        self.h.apply_adjoint_into(hx, out);
    }

    fn step_size(&self, cfg: &SolverConfig) -> Result<f64> {
        Ok(cfg.mu_factor / self.h.max_eig_upper_bound(RHO_GRID)?)
    }
}

/// Tangent-plane majorizer `F^M(x; v)` of `F` at `v`: `Theta` is replaced by
/// `Theta(v) + grad Theta(v)^T (x - v)`, so `F^M(x; v) >= F(x)` and `F^M(v; v) = F(v)`.
pub fn majorizer_value(obj: &Objective, x: &[f64], v: &[f64]) -> Result<f64> {
    obj.check_len(x)?;
    obj.check_len(v)?;
    let mut hx = vec![0.0; obj.y.len()];
    let base = obj.value_unchecked(x, &mut hx) - obj.lambda * obj.theta_unchecked(x);
    let g = obj.theta_grad(v)?;
    let lin: f64 = g.iter().zip(x.iter().zip(v)).map(|(g, (x, v))| g * (x - v)).sum();
    Ok(base + obj.lambda * (obj.theta_unchecked(v) + lin))
}

/// Adjacent pairs `(x_{j-1}, x_j)` for `j = 0..=N` with zero padding.
fn pairs(x: &[f64]) -> impl Iterator<Item = [f64; 2]> + '_ {
    let n = x.len();
    (0..=n).map(move |j| {
        let left = if j == 0 { 0.0 } else { x[j - 1] };
        let right = if j < n { x[j] } else { 0.0 };
        [left, right]
    })
}

/// `soft(t, T)`: shrinks `t` toward zero by `T`, with a dead zone `|t| <= T`.
#[inline]
pub fn soft_threshold(t: f64, threshold: f64) -> f64 {
    if t >= threshold {
        t - threshold
    } else if t <= -threshold {
        t + threshold
    } else {
        0.0
    }
}

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |m, (u, v)| m.max((u - v).abs()))
}

/// Relative l-infinity stopping rule, with an absolute guard at the zero iterate.
fn should_stop(prev: &[f64], next: &[f64], tol: f64) -> bool {
    let scale = inf_norm(prev);
    if scale == 0.0 {
        inf_norm(next) <= ZERO_ITERATE_TOL
    } else {
        inf_dist(prev, next) <= tol * scale
    }
}

fn check_monotone(trace: &[f64], message: &str) -> Result<()> {
    let n = trace.len();
    if n >= 2 {
        let (prev, cur) = (trace[n - 2], trace[n - 1]);
        if !cur.is_finite() || cur > prev + MONOTONE_SLACK * prev.abs().max(1.0) {
            return Err(BisrError::AlgorithmFailure {
                message: format!("{message}: objective increased from {prev} to {cur} at iteration {}", n - 1),
                trace: trace.to_vec(),
            });
        }
    }
    Ok(())
}

fn finish(obj: &Objective, x: Vec<f64>, trace: Vec<f64>, iterations: usize, inner: usize, converged: bool) -> Result<SolveResult> {
    let report = diagnostics::optimality_report(obj, &x, diagnostics::DEFAULT_TOL)?;
    Ok(SolveResult {
        x_hat: x,
        objective_trace: trace,
        iterations,
        inner_iterations: inner,
        converged,
        optimality_max_violation: report.max_violation,
    })
}

/// Dispatches on `cfg.algorithm`.
pub fn solve(obj: &Objective, cfg: &SolverConfig) -> Result<SolveResult> {
    match cfg.algorithm {
        Algorithm::Fbs => solve_fbs(obj, cfg),
        Algorithm::Mm => solve_mm(obj, cfg),
    }
}

/// Forward-backward splitting:
/// `z = x + mu [H^T(y - Hx) - lambda grad Theta(x)]`, `x <- soft(z, mu lambda)`,
/// with `mu = mu_factor / rho` and `x_0 = 0`.
pub fn solve_fbs(obj: &Objective, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let n = obj.n;
    let mu = obj.step_size(cfg)?;
    let thresh = mu * obj.lambda;

    let mut x = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut corr = vec![0.0; n];
    let mut tgrad = vec![0.0; n];
    let mut hx = vec![0.0; obj.y.len()];
    let mut trace = vec![obj.value_unchecked(&x, &mut hx)];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iter {
        obj.residual_correlation(&x, &mut hx, &mut corr);
        obj.theta_grad_into(&x, &mut tgrad);
        for i in 0..n {
            next[i] = soft_threshold(x[i] + mu * (corr[i] - obj.lambda * tgrad[i]), thresh);
        }
        iterations += 1;
        trace.push(obj.value_unchecked(&next, &mut hx));
        check_monotone(&trace, "forward-backward splitting diverged")?;
        let stop = should_stop(&x, &next, cfg.stop_rel_tol);
        std::mem::swap(&mut x, &mut next);
        if stop {
            converged = true;
            break;
        }
    }
    finish(obj, x, trace, iterations, 0, converged)
}

/// Majorization-minimization: each step minimizes
/// `1/2||y - Hx||^2 + lambda grad Theta(x_k)^T x + lambda ||x||_1`
/// by warm-started proximal gradient, capped at `inner_iter` iterations.
pub fn solve_mm(obj: &Objective, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let n = obj.n;
    let mu = obj.step_size(cfg)?;
    let thresh = mu * obj.lambda;
    let inner_tol = 0.1 * cfg.stop_rel_tol;

    let mut x = vec![0.0; n];
    let mut inner = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut corr = vec![0.0; n];
    let mut linear = vec![0.0; n];
    let mut hx = vec![0.0; obj.y.len()];
    let mut trace = vec![obj.value_unchecked(&x, &mut hx)];
    let mut converged = false;
    let mut iterations = 0;
    let mut inner_total = 0;

    while iterations < cfg.max_iter {
        obj.theta_grad_into(&x, &mut linear);
        inner.copy_from_slice(&x);
        for _ in 0..cfg.inner_iter {
            obj.residual_correlation(&inner, &mut hx, &mut corr);
            for i in 0..n {
                next[i] = soft_threshold(inner[i] + mu * (corr[i] - obj.lambda * linear[i]), thresh);
            }
            inner_total += 1;
            let stop = should_stop(&inner, &next, inner_tol);
            std::mem::swap(&mut inner, &mut next);
            if stop {
                break;
            }
        }
        iterations += 1;
        trace.push(obj.value_unchecked(&inner, &mut hx));
        check_monotone(&trace, "majorization-minimization diverged")?;
        let stop = should_stop(&x, &inner, cfg.stop_rel_tol);
        x.copy_from_slice(&inner);
        if stop {
            converged = true;
            break;
        }
    }
    finish(obj, x, trace, iterations, inner_total, converged)
}
