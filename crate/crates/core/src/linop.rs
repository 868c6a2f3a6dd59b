//! Finite convolution operator `H` and its adjoint.
//!
//! `[Hx]_n = sum_k h_{n-k} x_k` with `x` of length `N` and full output of
//! length `N + L - 1`, so `x` is implicitly zero outside its support.

use std::f64::consts::PI;

use crate::error::{BisrError, Result};

/// Relative inflation applied to the grid maximum of `|H(w)|^2`.
const RHO_INFLATION: f64 = 1e-6;

/// Impulse response `h_0..h_{L-1}` of a convolution operator.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionFilter {
    taps: Vec<f64>,
}

/// Input and output lengths of a full convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OperatorShape {
    pub n_in: usize,
    pub n_out: usize,
}

impl ConvolutionFilter {
    pub fn new(taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(BisrError::domain("filter has no taps"));
        }
        if taps.iter().any(|t| !t.is_finite()) {
            return Err(BisrError::domain("filter taps must be finite"));
        }
        if taps.iter().all(|&t| t == 0.0) {
            return Err(BisrError::domain("filter taps are all zero"));
        }
        Ok(ConvolutionFilter { taps })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Euclidean norm of the taps.
    pub fn norm2(&self) -> f64 {
        self.taps.iter().map(|t| t * t).sum::<f64>().sqrt()
    }

    pub fn shape(&self, n_in: usize) -> OperatorShape {
        OperatorShape { n_in, n_out: n_in + self.taps.len() - 1 }
    }

    /// Full convolution `Hx`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.is_empty() {
            return Err(BisrError::domain("cannot convolve an empty signal"));
        }
        let mut y = vec![0.0; x.len() + self.taps.len() - 1];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    /// `Hx` into a preallocated buffer of length `N + L - 1`.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(y.len(), x.len() + self.taps.len() - 1);
        y.fill(0.0);
        for (k, &xk) in x.iter().enumerate() {
            if xk == 0.0 {
                continue;
            }
            for (j, &h) in self.taps.iter().enumerate() {
                y[k + j] += h * xk;
            }
        }
    }

    /// Adjoint `H^T y`, a correlation with `h`; `y` must have length `N + L - 1`.
    pub fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        let l = self.taps.len();
        if y.len() < l {
            return Err(BisrError::domain(format!(
                "adjoint input of length {} is shorter than the filter ({l} taps)",
                y.len()
            )));
        }
        let mut x = vec![0.0; y.len() + 1 - l];
        self.apply_adjoint_into(y, &mut x);
        Ok(x)
    }

    pub fn apply_adjoint_into(&self, y: &[f64], x: &mut [f64]) {
        debug_assert_eq!(y.len(), x.len() + self.taps.len() - 1);
        for (k, xk) in x.iter_mut().enumerate() {
            *xk = self.taps.iter().zip(&y[k..]).map(|(h, yv)| h * yv).sum();
        }
    }

    /// `|H(w)|^2` with `H(w) = sum_n h_n e^{-jwn}`.
    pub fn freq_response_sq(&self, omega: f64) -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (n, &h) in self.taps.iter().enumerate() {
            let (s, c) = (omega * n as f64).sin_cos();
            re += h * c;
            im -= h * s;
        }
        re * re + im * im
    }

    /// `|H(w_k)|^2` on `w_k = pi k / grid_size`, `k = 0..=grid_size`.
    pub fn freq_response_sq_grid(&self, grid_size: usize) -> Vec<f64> {
        (0..=grid_size)
            .map(|k| self.freq_response_sq(PI * k as f64 / grid_size as f64))
            .collect()
    }

    /// Upper bound on the largest eigenvalue of `H^T H`.
    ///
    /// The spectrum of `H^T H` lies below `sup_w |H(w)|^2`. The supremum is
    /// approximated by the maximum on a uniform grid of `[0, pi]`, refined so
    /// that the grid maximum is within a relative `5e-7` of the supremum
    /// (Bernstein's inequality for a cosine polynomial of degree `L - 1`), and
    /// then inflated by `1 + 1e-6`.
    pub fn max_eig_upper_bound(&self, grid_size: usize) -> Result<f64> {
        if grid_size < 1024 {
            return Err(BisrError::domain(format!("grid_size must be >= 1024, got {grid_size}")));
        }
        let degree = (self.taps.len() - 1) as f64;
        // half-spacing delta = pi / (2M); need degree^2 delta^2 / 2 <= 5e-7
        let needed = (PI * degree / (2.0 * 1e-3)).ceil() as usize;
        let m = grid_size.max(needed);
        let max = self.freq_response_sq_grid(m).into_iter().fold(0.0_f64, f64::max);
        Ok(max * (1.0 + RHO_INFLATION))
    }
}
