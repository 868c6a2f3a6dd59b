//! Univariate penalty families and their smooth concave part.
//!
//! Every family is evaluated on `u = |t|` and extended to the real line by
//! symmetry, so the concave branch formulas never see a negative argument.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{BisrError, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Below this value of `a|t|` the smooth part is evaluated from its Taylor
/// series, which avoids cancellation in `phi(t) - |t|`.
const SERIES_CUTOFF: f64 = 1e-3;

/// A parameterized sparsity-inducing penalty `phi(t; a)`, `a >= 0`.
///
/// All three families satisfy `phi(t; 0) = |t|`, `phi'(0+; a) = 1` and
/// `phi''(0+; a) = -a`, and obey the scaling law
/// `phi(t; a) = (b / a) phi(a t / b; b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PenaltyFamily {
    /// `|t| / (1 + a|t|/2)`
    Rational,
    /// `log(1 + a|t|) / a`
    Log,
    /// `2 / (a sqrt 3) * (atan((1 + 2a|t|) / sqrt 3) - pi/6)`
    Atan,
}

impl PenaltyFamily {
    pub const ALL: [PenaltyFamily; 3] = [PenaltyFamily::Rational, PenaltyFamily::Log, PenaltyFamily::Atan];

    pub fn name(self) -> &'static str {
        match self {
            PenaltyFamily::Rational => "rational",
            PenaltyFamily::Log => "log",
            PenaltyFamily::Atan => "atan",
        }
    }

    /// `phi(u; a)` for `u >= 0`, `a > 0`.
    fn phi_pos(self, u: f64, a: f64) -> f64 {
        let v = a * u;
        match self {
            PenaltyFamily::Rational => u / (1.0 + 0.5 * v),
            PenaltyFamily::Log => v.ln_1p() / a,
            // atan((1+2v)/sqrt3) - atan(1/sqrt3), folded into a single atan
            PenaltyFamily::Atan => 2.0 / (a * SQRT3) * (SQRT3 * v / (2.0 + v)).atan(),
        }
    }

    /// `phi(u; a) - u` for `u >= 0`, `a > 0`.
    fn smooth_pos(self, u: f64, a: f64) -> f64 {
        let v = a * u;
        match self {
            PenaltyFamily::Rational => -(0.5 * v * u) / (1.0 + 0.5 * v),
            PenaltyFamily::Log => {
                if v < SERIES_CUTOFF {
                    let v2 = v * v;
                    v2 * (-0.5 + v * (1.0 / 3.0 + v * (-0.25 + v * (0.2 - v / 6.0)))) / a
                } else {
                    (v.ln_1p() - v) / a
                }
            }
            PenaltyFamily::Atan => {
                if v < SERIES_CUTOFF {
                    // integral of 1/(1+w+w^2) - 1 = -w + w^3 - w^4 + w^6 - ...
                    let v2 = v * v;
                    v2 * (-0.5 + v2 * (0.25 - 0.2 * v + v2 * v / 7.0)) / a
                } else {
                    (2.0 / SQRT3 * (SQRT3 * v / (2.0 + v)).atan() - v) / a
                }
            }
        }
    }

    /// Right derivative `phi'(u; a)` for `u >= 0`. Equals 1 at `a = 0`.
    pub fn phi_deriv1_pos(self, u: f64, a: f64) -> f64 {
        1.0 + self.smooth_deriv1_pos(u, a)
    }

    /// `phi'(u; a) - 1` for `u >= 0`.
    fn smooth_deriv1_pos(self, u: f64, a: f64) -> f64 {
        if a == 0.0 {
            return 0.0;
        }
        let v = a * u;
        match self {
            PenaltyFamily::Rational => {
                let d = 1.0 + 0.5 * v;
                -(v + 0.25 * v * v) / (d * d)
            }
            PenaltyFamily::Log => -v / (1.0 + v),
            PenaltyFamily::Atan => {
                let q = v + v * v;
                -q / (1.0 + q)
            }
        }
    }

    /// Right second derivative `phi''(u; a)` for `u >= 0`; equals `-a` at `u = 0`.
    pub fn phi_deriv2_pos(self, u: f64, a: f64) -> f64 {
        if a == 0.0 {
            return 0.0;
        }
        let v = a * u;
        match self {
            PenaltyFamily::Rational => {
                let d = 1.0 + 0.5 * v;
                -a / (d * d * d)
            }
            PenaltyFamily::Log => {
                let d = 1.0 + v;
                -a / (d * d)
            }
            PenaltyFamily::Atan => {
                let d = 1.0 + v + v * v;
                -a * (1.0 + 2.0 * v) / (d * d)
            }
        }
    }
}

impl fmt::Display for PenaltyFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PenaltyFamily {
    type Err = BisrError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rational" | "rat" => Ok(PenaltyFamily::Rational),
            "log" => Ok(PenaltyFamily::Log),
            "atan" | "arctan" => Ok(PenaltyFamily::Atan),
            other => Err(BisrError::domain(format!(
                "unknown penalty family {other:?} (expected rational, log or atan)"
            ))),
        }
    }
}

fn check_args(t: f64, a: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(BisrError::domain(format!("non-finite argument t = {t}")));
    }
    check_param(a)
}

fn check_param(a: f64) -> Result<()> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(BisrError::domain(format!("penalty parameter must be finite and >= 0, got {a}")));
    }
    Ok(())
}

/// Evaluates `phi(t; a)`.
pub fn phi(family: PenaltyFamily, t: f64, a: f64) -> Result<f64> {
    check_args(t, a)?;
    Ok(SmoothedPenalty { family, a }.phi(t))
}

/// Evaluates `s(t; a) = phi(t; a) - |t|`.
pub fn s_value(sp: SmoothedPenalty, t: f64) -> Result<f64> {
    check_args(t, sp.a)?;
    Ok(sp.value(t))
}

/// Evaluates `s'(t; a)`; `s'(0) = 0`.
pub fn s_deriv1(sp: SmoothedPenalty, t: f64) -> Result<f64> {
    check_args(t, sp.a)?;
    Ok(sp.deriv1(t))
}

/// Evaluates `s''(t; a)`; `s''(0) = -a`.
pub fn s_deriv2(sp: SmoothedPenalty, t: f64) -> Result<f64> {
    check_args(t, sp.a)?;
    Ok(sp.deriv2(t))
}

/// The smooth concave part `s(t; a) = phi(t; a) - |t|` of a penalty.
///
/// `s` is even, twice continuously differentiable and satisfies
/// `-a <= s''(t; a) <= 0`. The unchecked methods assume a finite `t`; use the
/// free functions of this module for validated evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedPenalty {
    pub family: PenaltyFamily,
    pub a: f64,
}

impl SmoothedPenalty {
    pub fn new(family: PenaltyFamily, a: f64) -> Result<Self> {
        check_param(a)?;
        Ok(SmoothedPenalty { family, a })
    }

    #[inline]
    pub fn phi(&self, t: f64) -> f64 {
        let u = t.abs();
        if self.a == 0.0 {
            u
        } else {
            self.family.phi_pos(u, self.a)
        }
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        if self.a == 0.0 {
            0.0
        } else {
            self.family.smooth_pos(t.abs(), self.a)
        }
    }

    #[inline]
    pub fn deriv1(&self, t: f64) -> f64 {
        if self.a == 0.0 || t == 0.0 {
            return 0.0;
        }
        let d = self.family.smooth_deriv1_pos(t.abs(), self.a);
        if t > 0.0 {
            d
        } else {
            -d
        }
    }

    #[inline]
    pub fn deriv2(&self, t: f64) -> f64 {
        self.family.phi_deriv2_pos(t.abs(), self.a)
    }
}
