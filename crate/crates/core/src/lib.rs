//! Sparse one-dimensional deconvolution with a non-separable, non-convex
//! bivariate penalty whose parameters are chosen so that the total
//! objective stays convex.
//!
//! The crate is organized bottom-up:
//!
//! * [`penalties`]: univariate penalty families `phi(t; a)` and the smooth
//!   concave part `s(t; a) = phi(t; a) - |t|`.
//! * [`bivariate`]: the four-region concave function `S(x; a)` on pairs and
//!   the penalty `psi = S + l1`, with analytic gradient and Hessian.
//! * [`linop`]: full linear convolution, its adjoint, and frequency response.
//! * [`convexity`]: parameter bounds that keep the objective convex, the
//!   tridiagonal lower bound `P(w) <= |H(w)|^2`, and a negative-curvature probe.
//! * [`solver`]: forward-backward splitting and majorization-minimization.
//! * [`diagnostics`]: objective evaluation, optimality certificate, RMSE.
//! * [`experiment`]: signal generation, noise, baselines and Monte-Carlo sweeps.
//! * [`io`]: CSV and config helpers used by the command-line front end.

pub mod bivariate;
pub mod convexity;
pub mod diagnostics;
mod error;
pub mod experiment;
pub mod io;
pub mod linop;
pub mod penalties;
pub mod solver;

pub use bivariate::{BivariateParams, BivariatePenalty, Region, Sym2};
pub use convexity::{EigenPair, TridiagBound, TridiagFit};
pub use diagnostics::OptimalityReport;
pub use error::{BisrError, Result};
pub use linop::ConvolutionFilter;
pub use penalties::{PenaltyFamily, SmoothedPenalty};
pub use solver::{Algorithm, Objective, SolveResult, SolverConfig};
