//! Convexity certification for the bivariate-penalized objective.
//!
//! For a 2x2 data term with `H^T H = K(gamma)` the objective stays convex as
//! long as `a_i <= gamma_i / lambda`. For an `N`-point convolution the same
//! bound applies with `gamma = (P(0), P(pi))`, where
//! `P(w) = p0 + 2 p1 cos w` is any cosine polynomial with
//! `0 <= P(w) <= |H(w)|^2`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bivariate::{toeplitz_k, BivariateParams, BivariatePenalty, Sym2};
use crate::error::{BisrError, Result};
use crate::linop::ConvolutionFilter;

/// Number of `p1` candidates scanned when bracketing the best bound.
const P1_CANDIDATES: usize = 2048;
/// Shrink applied to a fitted bound so that it sits strictly under `|H|^2`.
const FIT_SHRINK: f64 = 1.0 - 1e-9;
/// Default frequency grid for fitting and certification.
pub const DEFAULT_GRID: usize = 2048;
/// Distances from 0 and pi of the extra verification frequencies.
const EDGE_OFFSETS: [f64; 4] = [1e-3, 1e-4, 1e-5, 1e-6];

/// Eigenvalues of the symmetric Toeplitz matrix `K(gamma)`.
///
/// The eigenvectors are fixed: `(1, 1)/sqrt2` for `gamma1` and `(1, -1)/sqrt2`
/// for `gamma2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl EigenPair {
    pub fn new(gamma1: f64, gamma2: f64) -> Result<Self> {
        for (name, g) in [("gamma1", gamma1), ("gamma2", gamma2)] {
            if !(g.is_finite() && g >= 0.0) {
                return Err(BisrError::domain(format!("{name} must be finite and >= 0, got {g}")));
            }
        }
        Ok(EigenPair { gamma1, gamma2 })
    }

    /// Eigenvalues of the 2x2 matrix `[[p0, 2 p1], [2 p1, p0]]`, i.e. `(P(0), P(pi))`.
    pub fn from_tridiag(p: &TridiagBound) -> Self {
        EigenPair { gamma1: p.at_zero().max(0.0), gamma2: p.at_pi().max(0.0) }
    }

    pub fn k_matrix(&self) -> Sym2 {
        toeplitz_k(self.gamma1, self.gamma2)
    }

    pub fn min(&self) -> f64 {
        self.gamma1.min(self.gamma2)
    }
}

/// Tridiagonal Toeplitz lower bound with frequency response `p0 + 2 p1 cos w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TridiagBound {
    pub p0: f64,
    pub p1: f64,
}

impl TridiagBound {
    pub const ZERO: TridiagBound = TridiagBound { p0: 0.0, p1: 0.0 };

    /// Checks `P(w) >= 0`, i.e. `p0 >= 2|p1|`.
    pub fn new(p0: f64, p1: f64) -> Result<Self> {
        if !(p0.is_finite() && p1.is_finite()) {
            return Err(BisrError::domain("bound coefficients must be finite"));
        }
        let b = TridiagBound { p0, p1 };
        b.check_nonnegative()?;
        Ok(b)
    }

    fn check_nonnegative(&self) -> Result<()> {
        if self.p0 - 2.0 * self.p1.abs() < -1e-12 * self.p0.abs().max(f64::MIN_POSITIVE) {
            return Err(BisrError::Invariant(format!(
                "P(w) = {} + 2*{} cos w is negative somewhere (need p0 >= 2|p1|)",
                self.p0, self.p1
            )));
        }
        Ok(())
    }

    pub fn eval(&self, omega: f64) -> f64 {
        self.p0 + 2.0 * self.p1 * omega.cos()
    }

    pub fn at_zero(&self) -> f64 {
        self.p0 + 2.0 * self.p1
    }

    pub fn at_pi(&self) -> f64 {
        self.p0 - 2.0 * self.p1
    }
}

/// Result of fitting a tridiagonal bound under `|H(w)|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TridiagFit {
    pub bound: TridiagBound,
    /// No bound with `p0 > 0` exists; the penalty must reduce to the l1 norm.
    pub degenerate: bool,
}

/// Maximal parameters `a_i = gamma_i / lambda` for a 2x2 problem.
pub fn max_params_bivariate(eig: EigenPair, lambda: f64) -> Result<BivariateParams> {
    check_lambda(lambda)?;
    BivariateParams::new(eig.gamma1 / lambda, eig.gamma2 / lambda)
}

/// Maximal parameters `a1 = P(0)/lambda`, `a2 = P(pi)/lambda`.
pub fn params_from_tridiag(p: TridiagBound, lambda: f64) -> Result<BivariateParams> {
    check_lambda(lambda)?;
    p.check_nonnegative()?;
    BivariateParams::new(p.at_zero().max(0.0) / lambda, p.at_pi().max(0.0) / lambda)
}

/// Largest `a` for which a separable penalty `phi(x1; a) + phi(x2; a)` keeps
/// the 2x2 objective convex: `min(gamma) / lambda`.
pub fn separable_limit(eig: EigenPair, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(eig.min() / lambda)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(BisrError::domain(format!("lambda must be finite and > 0, got {lambda}")))
    }
}

/// Fits `P(w) = p0 + 2 p1 cos w` with `0 <= P(w_k) <= |H(w_k)|^2` on the grid
/// `w_k = pi k / grid_size`, maximizing `p0` (equivalently `a1 + a2`).
///
/// For fixed `p1` the largest admissible `p0` is
/// `U(p1) = min_k (|H(w_k)|^2 - 2 p1 cos w_k)`, a concave function, and the
/// constraint `P >= 0` reduces to `U(p1) >= 2|p1|`, which holds on an
/// interval around `p1 = 0`. The maximizer is bracketed with a scan over
/// `p1`, then refined by bisection (interval ends) and golden-section search.
/// The result is re-checked on a ten times finer grid and near both ends of
/// `[0, pi]`, and scaled down until it sits under `|H|^2` there, with an extra shrink of `1 - 1e-9`.
pub fn fit_tridiag_bound(h: &ConvolutionFilter, grid_size: usize) -> Result<TridiagFit> {
    if grid_size < 256 {
        return Err(BisrError::domain(format!("grid_size must be >= 256, got {grid_size}")));
    }
    let hsq = h.freq_response_sq_grid(grid_size);
    let cosw: Vec<f64> = (0..=grid_size).map(|k| (PI * k as f64 / grid_size as f64).cos()).collect();
    let hmax = hsq.iter().copied().fold(0.0_f64, f64::max);

    let upper = |p1: f64| -> f64 {
        hsq.iter().zip(&cosw).map(|(hk, ck)| hk - 2.0 * p1 * ck).fold(f64::INFINITY, f64::min)
    };
    let slack = |p1: f64| upper(p1) - 2.0 * p1.abs();

    // scan for the best feasible candidate
    let half = 0.5 * hmax;
    let step = hmax / (P1_CANDIDATES - 1) as f64;
    let mut best = (0.0, upper(0.0));
    for i in 0..P1_CANDIDATES {
        let p1 = -half + step * i as f64;
        if slack(p1) >= 0.0 {
            let u = upper(p1);
            if u > best.1 {
                best = (p1, u);
            }
        }
    }

    // feasible interval [lo, hi] around 0 (slack(0) = min |H|^2 >= 0)
    let bisect_edge = |inside: f64, outside: f64| -> f64 {
        let (mut a, mut b) = (inside, outside);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if slack(m) >= 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        a
    };
    let lo = if slack(-half) >= 0.0 { -half } else { bisect_edge(0.0, -half) };
    let hi = if slack(half) >= 0.0 { half } else { bisect_edge(0.0, half) };

    // golden-section refinement of the concave upper(p1) near the scan optimum
    let mut a = (best.0 - step).max(lo);
    let mut b = (best.0 + step).min(hi);
    let g = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (upper(c), upper(d));
    for _ in 0..200 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = upper(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = upper(d);
        }
    }
    let refined = 0.5 * (a + b);
    let (mut p1, mut p0) = if upper(refined) >= best.1 && slack(refined) >= 0.0 {
        (refined, upper(refined))
    } else {
        best
    };

    // on a finite grid the maximum is often a plateau; take its midpoint
    let level = p0 - 4.0 * f64::EPSILON * hmax;
    let plateau_edge = |outside: f64| -> f64 {
        let (mut a, mut b) = (p1, outside);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if upper(m) >= level && slack(m) >= 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        a
    };
    let left = plateau_edge((p1 - step).max(lo));
    let right = plateau_edge((p1 + step).min(hi));
    let mid = 0.5 * (left + right);
    if slack(mid) >= 0.0 && upper(mid) >= level {
        p1 = mid;
        p0 = upper(mid);
    }

    if !(p0 > 1e-12 * hmax) {
        return Ok(TridiagFit { bound: TridiagBound::ZERO, degenerate: true });
    }
    let mut bound = TridiagBound { p0, p1 };
    // snap P(pi) or P(0) to exactly zero when it is zero up to rounding
    if bound.p0 - 2.0 * bound.p1.abs() <= 1e-12 * bound.p0 {
        bound.p0 = 2.0 * bound.p1.abs();
    }

    // verification on a 10x finer grid plus points approaching 0 and pi,
    // where a zero of P can meet a zero of |H|^2; the bound is scaled under
    // |H|^2 there and then shrunk by FIT_SHRINK
    let fine = 10 * grid_size;
    let mut scale = 1.0_f64;
    for k in 0..=fine {
        let w = PI * k as f64 / fine as f64;
        let pk = bound.eval(w);
        if pk > 0.0 {
            scale = scale.min(h.freq_response_sq(w) / pk);
        }
    }
    for d in EDGE_OFFSETS {
        // half-angle forms avoid cancellation in p0 +- 2 p1 cos w
        let s2 = 4.0 * bound.p1 * (0.5 * d).sin().powi(2);
        let near_zero = (bound.p0 + 2.0 * bound.p1) - s2;
        let near_pi = (bound.p0 - 2.0 * bound.p1) + s2;
        if near_zero > 0.0 {
            scale = scale.min(h.freq_response_sq(d) / near_zero);
        }
        if near_pi > 0.0 {
            scale = scale.min(h.freq_response_sq(PI - d) / near_pi);
        }
    }
    let scale = scale * FIT_SHRINK;
    let scale = scale.max(0.0);
    let bound = TridiagBound { p0: bound.p0 * scale, p1: bound.p1 * scale };
    if !(bound.p0 > 1e-12 * hmax) {
        return Ok(TridiagFit { bound: TridiagBound::ZERO, degenerate: true });
    }
    Ok(TridiagFit { bound, degenerate: false })
}

/// Checks `0 <= P(w) <= |H(w)|^2` on a uniform grid of `[0, pi]` with
/// `verify_size + 1` points. Returns the largest violation (`<= 0` means feasible).
pub fn bound_violation(h: &ConvolutionFilter, bound: &TridiagBound, verify_size: usize) -> f64 {
    (0..=verify_size)
        .map(|k| {
            let w = PI * k as f64 / verify_size as f64;
            let p = bound.eval(w);
            (p - h.freq_response_sq(w)).max(-p)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Outcome of checking `(a1, a2)` against a convolution filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    /// The smallest admissible bound: `P(0) = lambda a1`, `P(pi) = lambda a2`.
    pub bound: TridiagBound,
    /// `max_w (P(w) - |H(w)|^2)` on the check grid.
    pub max_excess: f64,
    pub certified: bool,
}

/// Certifies that `(a1, a2)` keep the `N`-point objective convex for filter `h`.
///
/// Any admissible `P` with `P(0) >= lambda a1` and `P(pi) >= lambda a2`
/// dominates the cosine polynomial interpolating `lambda a1` at `w = 0` and
/// `lambda a2` at `w = pi`, so it suffices to test that one against `|H|^2`.
pub fn certify(h: &ConvolutionFilter, lambda: f64, params: &BivariateParams, grid_size: usize) -> Result<Certificate> {
    check_lambda(lambda)?;
    let g1 = lambda * params.a1;
    let g2 = lambda * params.a2;
    let bound = TridiagBound { p0: 0.5 * (g1 + g2), p1: 0.25 * (g1 - g2) };
    let hsq = h.freq_response_sq_grid(grid_size);
    let hmax = hsq.iter().copied().fold(0.0_f64, f64::max);
    let max_excess = hsq
        .iter()
        .enumerate()
        .map(|(k, hk)| bound.eval(PI * k as f64 / grid_size as f64) - hk)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Certificate { bound, max_excess, certified: max_excess <= 1e-12 * hmax })
}

/// Fits a bound for `h` and returns the maximal certified parameters for `lambda`.
pub fn auto_params(h: &ConvolutionFilter, lambda: f64, grid_size: usize) -> Result<(BivariateParams, TridiagFit)> {
    let fit = fit_tridiag_bound(h, grid_size)?;
    let params = params_from_tridiag(fit.bound, lambda)?;
    Ok((params, fit))
}

/// A point where `g(x) = x^T K(gamma) x / 2 + lambda S(x; a)` curves downward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub x: [f64; 2],
    /// Unit direction of negative curvature.
    pub direction: [f64; 2],
    /// `direction^T (Hessian of g) direction`, negative.
    pub curvature: f64,
}

/// Searches for negative curvature of `g(x) = x^T K(gamma) x / 2 + lambda S(x; a)`.
///
/// The origin is probed first (the Hessian of `S` is most negative there),
/// followed by `samples - 1` seeded random points with log-uniform radius on
/// the natural scale `1 / max(a)` of the penalty. Curvature below
/// `-1e-10 * (trace K(gamma) + lambda (a1 + a2))` is reported.
pub fn verify_nonconvexity(bp: &BivariatePenalty, eig: EigenPair, lambda: f64, samples: usize) -> Option<Witness> {
    if samples == 0 {
        return None;
    }
    let k = eig.k_matrix();
    let p = &bp.params;
    let tol = 1e-10 * (eig.gamma1 + eig.gamma2 + lambda * (p.a1 + p.a2)).max(f64::MIN_POSITIVE);
    let probe = |x: [f64; 2]| -> Option<Witness> {
        let hess = k.add(&bp.hessian(x).scale(lambda));
        let (curvature, direction) = hess.min_eigenpair();
        (curvature < -tol).then_some(Witness { x, direction, curvature })
    };
    if let Some(w) = probe([0.0, 0.0]) {
        return Some(w);
    }
    let scale = 1.0 / p.a1.max(p.a2).max(1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_b15e);
    for _ in 1..samples {
        let radius = scale * 10f64.powf(rng.random_range(-6.0..3.0));
        let theta = rng.random_range(0.0..2.0 * PI);
        let (s, c) = theta.sin_cos();
        if let Some(w) = probe([radius * c, radius * s]) {
            return Some(w);
        }
    }
    None
}
