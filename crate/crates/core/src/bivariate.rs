//! The non-separable concave function `S(x; a)` on pairs and the bivariate
//! penalty `psi(x; a) = S(x; a) + |x1| + |x2|`.
//!
//! `S` is assembled from four wedge-shaped regions of the plane. In each region
//! it is a sum of two scaled copies of the univariate smooth part `s`, so the
//! gradient and Hessian follow directly from `s'` and `s''`. The branch
//! formulas agree (with their first and second derivatives) on the shared
//! boundary lines, so the region chosen at a tie does not matter.

use crate::error::{BisrError, Result};
use crate::penalties::{PenaltyFamily, SmoothedPenalty};

/// Symmetric 2x2 matrix `[[h11, h12], [h12, h22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Sym2 {
    pub h11: f64,
    pub h12: f64,
    pub h22: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 { h11: 0.0, h12: 0.0, h22: 0.0 };

    pub fn new(h11: f64, h12: f64, h22: f64) -> Self {
        Sym2 { h11, h12, h22 }
    }

    pub fn det(&self) -> f64 {
        self.h11 * self.h22 - self.h12 * self.h12
    }

    pub fn trace(&self) -> f64 {
        self.h11 + self.h22
    }

    /// Eigenvalues `(min, max)` in closed form.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.h11 + self.h22);
        let half_diff = 0.5 * (self.h11 - self.h22);
        let rad = half_diff.hypot(self.h12);
        (mean - rad, mean + rad)
    }

    /// Smallest eigenvalue and a unit eigenvector for it.
    pub fn min_eigenpair(&self) -> (f64, [f64; 2]) {
        let (lo, _) = self.eigenvalues();
        // (A - lo I) v = 0: pick the better-conditioned of the two rows
        let r1 = [self.h12, lo - self.h11];
        let r2 = [lo - self.h22, self.h12];
        let n1 = r1[0].hypot(r1[1]);
        let n2 = r2[0].hypot(r2[1]);
        let v = if n1 == 0.0 && n2 == 0.0 {
            [1.0, 0.0]
        } else if n1 >= n2 {
            [r1[0] / n1, r1[1] / n1]
        } else {
            [r2[0] / n2, r2[1] / n2]
        };
        (lo, v)
    }

    pub fn add(&self, other: &Sym2) -> Sym2 {
        Sym2::new(self.h11 + other.h11, self.h12 + other.h12, self.h22 + other.h22)
    }

    pub fn scale(&self, c: f64) -> Sym2 {
        Sym2::new(c * self.h11, c * self.h12, c * self.h22)
    }

    /// Quadratic form `d^T A d`.
    pub fn quad(&self, d: [f64; 2]) -> f64 {
        self.h11 * d[0] * d[0] + 2.0 * self.h12 * d[0] * d[1] + self.h22 * d[1] * d[1]
    }

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        [self.h11 * x[0] + self.h12 * x[1], self.h12 * x[0] + self.h22 * x[1]]
    }
}

/// Symmetric Toeplitz matrix with eigenvalue `g1` on `(1, 1)/sqrt2` and `g2` on
/// `(1, -1)/sqrt2`: `K = 1/2 [[g1 + g2, g1 - g2], [g1 - g2, g1 + g2]]`.
pub fn toeplitz_k(g1: f64, g2: f64) -> Sym2 {
    Sym2::new(0.5 * (g1 + g2), 0.5 * (g1 - g2), 0.5 * (g1 + g2))
}

/// Parameters `(a1, a2)` of the bivariate penalty with the derived mean
/// `alpha = (a1 + a2)/2` and skew `r = (a1 - a2)/(a1 + a2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateParams {
    pub a1: f64,
    pub a2: f64,
    alpha: f64,
    r: f64,
}

impl BivariateParams {
    pub fn new(a1: f64, a2: f64) -> Result<Self> {
        for (name, v) in [("a1", a1), ("a2", a2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(BisrError::domain(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        let sum = a1 + a2;
        let (alpha, r) = if sum > 0.0 { (0.5 * sum, (a1 - a2) / sum) } else { (0.0, 0.0) };
        Ok(BivariateParams { a1, a2, alpha, r })
    }

    pub fn zero() -> Self {
        BivariateParams { a1: 0.0, a2: 0.0, alpha: 0.0, r: 0.0 }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn is_zero(&self) -> bool {
        self.a1 == 0.0 && self.a2 == 0.0
    }

    pub fn is_separable(&self) -> bool {
        self.a1 == self.a2
    }

    /// `K(a)`, which equals `-Hessian of S` at the origin.
    pub fn k_matrix(&self) -> Sym2 {
        toeplitz_k(self.a1, self.a2)
    }
}

/// One of the four closed wedges on which `S` has a single formula.
///
/// * `A1`: `x2 (x1 - x2) >= 0`
/// * `A2`: `x1 (x1 - x2) <= 0`
/// * `A3`: `x1 (x1 + x2) <= 0`
/// * `A4`: `x2 (x1 + x2) <= 0`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    A1,
    A2,
    A3,
    A4,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::A1, Region::A2, Region::A3, Region::A4];

    pub fn contains(self, x: [f64; 2]) -> bool {
        let [x1, x2] = x;
        match self {
            Region::A1 => x2 * (x1 - x2) >= 0.0,
            Region::A2 => x1 * (x1 - x2) <= 0.0,
            Region::A3 => x1 * (x1 + x2) <= 0.0,
            Region::A4 => x2 * (x1 + x2) <= 0.0,
        }
    }

    /// First region (in order A1..A4) containing `x`. Assumes finite input.
    pub fn of(x: [f64; 2]) -> Region {
        Region::ALL.into_iter().find(|r| r.contains(x)).unwrap_or(Region::A4)
    }
}

/// Validated region classification.
pub fn classify_region(x: [f64; 2]) -> Result<Region> {
    check_point(x)?;
    Ok(Region::of(x))
}

fn check_point(x: [f64; 2]) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(BisrError::domain(format!("non-finite point ({}, {})", x[0], x[1])))
    }
}

/// The bivariate penalty `psi = S + l1` for a given penalty family and `(a1, a2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariatePenalty {
    pub family: PenaltyFamily,
    pub params: BivariateParams,
}

/// Per-branch pieces: the shared term `s(u; alpha)` with `u` linear in `x`,
/// plus `c * s(v; b)` on one coordinate.
struct Branch {
    /// coefficients of `u = w1 x1 + w2 x2`
    w: [f64; 2],
    /// index of the coordinate entering the second term
    k: usize,
    /// weight `1 - r` or `1 + r`
    c: f64,
    /// parameter of the second term (`a1` or `a2`)
    b: SmoothedPenalty,
}

impl BivariatePenalty {
    pub fn new(family: PenaltyFamily, params: BivariateParams) -> Self {
        BivariatePenalty { family, params }
    }

    pub fn from_params(family: PenaltyFamily, a1: f64, a2: f64) -> Result<Self> {
        Ok(BivariatePenalty { family, params: BivariateParams::new(a1, a2)? })
    }

    fn smooth(&self, a: f64) -> SmoothedPenalty {
        SmoothedPenalty { family: self.family, a }
    }

    fn branch(&self, region: Region) -> Branch {
        let p = &self.params;
        let r = p.r;
        match region {
            Region::A1 => Branch { w: [1.0, r], k: 1, c: 1.0 - r, b: self.smooth(p.a1) },
            Region::A2 => Branch { w: [r, 1.0], k: 0, c: 1.0 - r, b: self.smooth(p.a1) },
            Region::A3 => Branch { w: [r, 1.0], k: 0, c: 1.0 + r, b: self.smooth(p.a2) },
            Region::A4 => Branch { w: [1.0, r], k: 1, c: 1.0 + r, b: self.smooth(p.a2) },
        }
    }

    /// `S(x)` using the formula of `region`, whether or not `x` lies in it.
    pub fn value_on_branch(&self, region: Region, x: [f64; 2]) -> f64 {
        if self.params.is_zero() {
            return 0.0;
        }
        let br = self.branch(region);
        let sa = self.smooth(self.params.alpha);
        let u = br.w[0] * x[0] + br.w[1] * x[1];
        sa.value(u) + br.c * br.b.value(x[br.k])
    }

    pub fn gradient_on_branch(&self, region: Region, x: [f64; 2]) -> [f64; 2] {
        if self.params.is_zero() {
            return [0.0, 0.0];
        }
        let br = self.branch(region);
        let sa = self.smooth(self.params.alpha);
        let d = sa.deriv1(br.w[0] * x[0] + br.w[1] * x[1]);
        let mut g = [br.w[0] * d, br.w[1] * d];
        g[br.k] += br.c * br.b.deriv1(x[br.k]);
        g
    }

    pub fn hessian_on_branch(&self, region: Region, x: [f64; 2]) -> Sym2 {
        if self.params.is_zero() {
            return Sym2::ZERO;
        }
        let br = self.branch(region);
        let sa = self.smooth(self.params.alpha);
        let d2 = sa.deriv2(br.w[0] * x[0] + br.w[1] * x[1]);
        let mut h = Sym2::new(br.w[0] * br.w[0] * d2, br.w[0] * br.w[1] * d2, br.w[1] * br.w[1] * d2);
        let extra = br.c * br.b.deriv2(x[br.k]);
        if br.k == 0 {
            h.h11 += extra;
        } else {
            h.h22 += extra;
        }
        h
    }

    /// `S(x; a)`.
    #[inline]
    pub fn value(&self, x: [f64; 2]) -> f64 {
        self.value_on_branch(Region::of(x), x)
    }

    /// `(dS/dx1, dS/dx2)`.
    #[inline]
    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        self.gradient_on_branch(Region::of(x), x)
    }

    #[inline]
    pub fn hessian(&self, x: [f64; 2]) -> Sym2 {
        self.hessian_on_branch(Region::of(x), x)
    }

    /// `psi(x; a) = S(x; a) + |x1| + |x2|`.
    #[inline]
    pub fn psi(&self, x: [f64; 2]) -> f64 {
        self.value(x) + x[0].abs() + x[1].abs()
    }
}

/// Validated `S(x; a)`.
pub fn s_value(bp: &BivariatePenalty, x: [f64; 2]) -> Result<f64> {
    check_point(x)?;
    Ok(bp.value(x))
}

/// Validated gradient of `S`.
pub fn s_grad(bp: &BivariatePenalty, x: [f64; 2]) -> Result<[f64; 2]> {
    check_point(x)?;
    Ok(bp.gradient(x))
}

/// Validated Hessian of `S`.
pub fn s_hessian(bp: &BivariatePenalty, x: [f64; 2]) -> Result<Sym2> {
    check_point(x)?;
    Ok(bp.hessian(x))
}

/// Validated `psi(x; a)`.
pub fn psi_value(bp: &BivariatePenalty, x: [f64; 2]) -> Result<f64> {
    check_point(x)?;
    Ok(bp.psi(x))
}
