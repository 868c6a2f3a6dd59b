//! Objective evaluation, the first-order optimality certificate and RMSE.
//!
//! For a convex objective, `x` is a minimizer iff for every `n`
//!
//! ```text
//! v_n = (1/lambda) [H^T (y - Hx)]_n - [grad Theta(x)]_n  in  sign(x_n),
//! ```
//!
//! where `sign(0) = [-1, 1]`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{BisrError, Result};
use crate::solver::Objective;

/// Default tolerance of the optimality check.
pub const DEFAULT_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalityReport {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// Distance of `v_n` to `sign(x_n)`.
    pub violation: Vec<f64>,
    pub max_violation: f64,
    pub tol: f64,
    pub passed: bool,
    /// False when the objective has no convexity certificate; the condition
    /// is then necessary but not sufficient.
    pub convexity_certified: bool,
}

impl OptimalityReport {
    /// Scatter data with header `index,x_n,v_n`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,x_n,v_n\n");
        for (i, (x, v)) in self.x.iter().zip(&self.v).enumerate() {
            let _ = writeln!(out, "{i},{},{}", crate::io::fmt_f64(*x), crate::io::fmt_f64(*v));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

fn distance_to_sign(x: f64, v: f64) -> f64 {
    if x > 0.0 {
        (v - 1.0).abs()
    } else if x < 0.0 {
        (v + 1.0).abs()
    } else {
        (v.abs() - 1.0).max(0.0)
    }
}

pub fn optimality_report(obj: &Objective, x: &[f64], tol: f64) -> Result<OptimalityReport> {
    obj.check_len(x)?;
    if !(tol > 0.0) {
        return Err(BisrError::domain("tolerance must be positive"));
    }
    let r: Vec<f64> = obj.filter().apply(x)?.iter().zip(obj.y()).map(|(hx, y)| y - hx).collect();
    let corr = obj.filter().apply_adjoint(&r)?;
    let g = obj.theta_grad(x)?;
    let lambda = obj.lambda();
    let v: Vec<f64> = corr.iter().zip(&g).map(|(c, g)| c / lambda - g).collect();
    let violation: Vec<f64> = x.iter().zip(&v).map(|(&x, &v)| distance_to_sign(x, v)).collect();
    let max_violation = violation.iter().fold(0.0_f64, |m, &d| m.max(d));
    Ok(OptimalityReport {
        x: x.to_vec(),
        v,
        violation,
        max_violation,
        tol,
        passed: max_violation <= tol,
        convexity_certified: obj.is_certified(),
    })
}

/// `F(x) = 1/2 ||y - Hx||^2 + lambda Theta(x) + lambda ||x||_1`.
pub fn objective_value(obj: &Objective, x: &[f64]) -> Result<f64> {
    obj.check_len(x)?;
    let mut hx = Vec::new();
    Ok(obj.value_unchecked(x, &mut hx))
}

/// `F(x) = 1/2 ||y - Hx||^2 + lambda/2 sum_n psi((x_{n-1}, x_n))`, summed pair by pair.
pub fn objective_value_pairwise(obj: &Objective, x: &[f64]) -> Result<f64> {
    obj.check_len(x)?;
    let hx = obj.filter().apply(x)?;
    let fid = 0.5 * obj.y().iter().zip(&hx).map(|(y, v)| (y - v) * (y - v)).sum::<f64>();
    let n = x.len();
    let pen: f64 = (0..=n)
        .map(|j| {
            let left = if j == 0 { 0.0 } else { x[j - 1] };
            let right = if j < n { x[j] } else { 0.0 };
            obj.penalty().psi([left, right])
        })
        .sum();
    Ok(fid + 0.5 * obj.lambda() * pen)
}

pub fn rmse(x_hat: &[f64], x_true: &[f64]) -> Result<f64> {
    if x_hat.len() != x_true.len() {
        return Err(BisrError::domain(format!("length mismatch: {} vs {}", x_hat.len(), x_true.len())));
    }
    if x_hat.is_empty() {
        return Err(BisrError::domain("rmse of empty signals"));
    }
    let ss: f64 = x_hat.iter().zip(x_true).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((ss / x_hat.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{BivariatePenalty, ConvolutionFilter, PenaltyFamily};

    #[test]
    fn rmse_examples() {
        let x = [1.0, -2.0, 0.5];
        assert_eq!(rmse(&x, &x).unwrap(), 0.0);
        let shifted: Vec<f64> = x.iter().map(|v| v + 0.75).collect();
        assert!((rmse(&x, &shifted).unwrap() - 0.75).abs() < 1e-15);
        assert!((rmse(&[0.0, 3.0], &[4.0, 0.0]).unwrap() - 3.5355339059327378).abs() < 1e-15);
        assert!(rmse(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn distance_to_sign_set() {
        assert_eq!(distance_to_sign(0.0, 0.3), 0.0);
        assert_eq!(distance_to_sign(0.0, -1.25), 0.25);
        assert_eq!(distance_to_sign(2.0, 1.0), 0.0);
        assert_eq!(distance_to_sign(-2.0, 0.5), 1.5);
    }

    #[test]
    fn objective_at_zero_is_half_energy() {
        let h = ConvolutionFilter::new(vec![1.0, -0.4]).unwrap();
        let pen = BivariatePenalty::from_params(PenaltyFamily::Rational, 0.1, 0.05).unwrap();
        let y = vec![1.0, 2.0, -3.0, 0.5];
        let obj = Objective::new_unchecked(h, y, 2.0, pen).unwrap();
        let f = objective_value(&obj, &[0.0; 3]).unwrap();
        assert!((f - 0.5 * 14.25).abs() < 1e-14);
        assert!((objective_value_pairwise(&obj, &[0.0; 3]).unwrap() - f).abs() < 1e-14);
        assert!(objective_value(&obj, &[0.0; 4]).is_err());
    }
}
