//! Python bindings. Signals are passed as lists of floats.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use bisr::convexity::{self, DEFAULT_GRID};
use bisr::experiment::FilterPreset;
use bisr::{diagnostics, solver, BisrError, BivariateParams, PenaltyFamily, SolverConfig};

fn to_py(e: BisrError) -> PyErr {
    match e {
        BisrError::AlgorithmFailure { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn family(name: &str) -> PyResult<PenaltyFamily> {
    name.parse().map_err(to_py)
}

/// Convolution operator with full output length `N + L - 1`.
#[pyclass(name = "ConvolutionFilter", frozen)]
struct PyFilter {
    inner: bisr::ConvolutionFilter,
}

#[pymethods]
impl PyFilter {
    #[new]
    fn new(taps: Vec<f64>) -> PyResult<Self> {
        Ok(PyFilter { inner: bisr::ConvolutionFilter::new(taps).map_err(to_py)? })
    }

    /// Built-in filter by name (`example1_like` or `example2_null`).
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        let p = FilterPreset::from_name(name).ok_or_else(|| PyValueError::new_err(format!("unknown preset {name:?}")))?;
        Ok(PyFilter { inner: p.filter() })
    }

    #[getter]
    fn taps(&self) -> Vec<f64> {
        self.inner.taps().to_vec()
    }

    fn norm2(&self) -> f64 {
        self.inner.norm2()
    }

    fn apply(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.apply(&x).map_err(to_py)
    }

    fn apply_adjoint(&self, y: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.apply_adjoint(&y).map_err(to_py)
    }

    fn freq_response_sq(&self, omega: f64) -> f64 {
        self.inner.freq_response_sq(omega)
    }

    #[pyo3(signature = (grid_size = 4096))]
    fn max_eig_upper_bound(&self, grid_size: usize) -> PyResult<f64> {
        self.inner.max_eig_upper_bound(grid_size).map_err(to_py)
    }

    /// `(p0, p1, degenerate)` of the fitted bound `P(w) = p0 + 2 p1 cos w`.
    #[pyo3(signature = (grid_size = DEFAULT_GRID))]
    fn fit_tridiag_bound(&self, grid_size: usize) -> PyResult<(f64, f64, bool)> {
        let fit = convexity::fit_tridiag_bound(&self.inner, grid_size).map_err(to_py)?;
        Ok((fit.bound.p0, fit.bound.p1, fit.degenerate))
    }

    /// Largest certified `(a1, a2)` for `lam`.
    fn auto_params(&self, lam: f64) -> PyResult<(f64, f64)> {
        let (p, _) = convexity::auto_params(&self.inner, lam, DEFAULT_GRID).map_err(to_py)?;
        Ok((p.a1, p.a2))
    }

    fn certify(&self, lam: f64, a1: f64, a2: f64) -> PyResult<bool> {
        let params = BivariateParams::new(a1, a2).map_err(to_py)?;
        Ok(convexity::certify(&self.inner, lam, &params, DEFAULT_GRID).map_err(to_py)?.certified)
    }

    fn __repr__(&self) -> String {
        format!("ConvolutionFilter({:?})", self.inner.taps())
    }
}

/// The concave function `S(x; a)` and the penalty `psi = S + |x1| + |x2|`.
#[pyclass(name = "BivariatePenalty", frozen)]
struct PyPenalty {
    inner: bisr::BivariatePenalty,
}

#[pymethods]
impl PyPenalty {
    #[new]
    fn new(family_name: &str, a1: f64, a2: f64) -> PyResult<Self> {
        let inner = bisr::BivariatePenalty::from_params(family(family_name)?, a1, a2).map_err(to_py)?;
        Ok(PyPenalty { inner })
    }

    fn value(&self, x1: f64, x2: f64) -> PyResult<f64> {
        bisr::bivariate::s_value(&self.inner, [x1, x2]).map_err(to_py)
    }

    fn gradient(&self, x1: f64, x2: f64) -> PyResult<(f64, f64)> {
        let g = bisr::bivariate::s_grad(&self.inner, [x1, x2]).map_err(to_py)?;
        Ok((g[0], g[1]))
    }

    /// `((h11, h12), (h12, h22))`.
    fn hessian(&self, x1: f64, x2: f64) -> PyResult<((f64, f64), (f64, f64))> {
        let h = bisr::bivariate::s_hessian(&self.inner, [x1, x2]).map_err(to_py)?;
        Ok(((h.h11, h.h12), (h.h12, h.h22)))
    }

    fn psi(&self, x1: f64, x2: f64) -> PyResult<f64> {
        bisr::bivariate::psi_value(&self.inner, [x1, x2]).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "BivariatePenalty({:?}, a1={}, a2={})",
            self.inner.family.name(),
            self.inner.params.a1,
            self.inner.params.a2
        )
    }
}

#[pyclass(name = "SolveResult", frozen, get_all)]
struct PySolveResult {
    x_hat: Vec<f64>,
    objective_trace: Vec<f64>,
    iterations: usize,
    converged: bool,
    optimality_max_violation: f64,
    a1: f64,
    a2: f64,
}

#[allow(clippy::too_many_arguments)]
fn objective(
    y: Vec<f64>,
    filter: &PyFilter,
    lam: f64,
    family_name: &str,
    a1: Option<f64>,
    a2: Option<f64>,
    unchecked: bool,
) -> PyResult<bisr::Objective> {
    let h = filter.inner.clone();
    let params = match (a1, a2) {
        (Some(a1), Some(a2)) => BivariateParams::new(a1, a2).map_err(to_py)?,
        (None, None) => convexity::auto_params(&h, lam, DEFAULT_GRID).map_err(to_py)?.0,
        _ => return Err(PyValueError::new_err("give both a1 and a2, or neither for automatic parameters")),
    };
    let pen = bisr::BivariatePenalty::new(family(family_name)?, params);
    if unchecked {
        bisr::Objective::new_unchecked(h, y, lam, pen)
    } else {
        bisr::Objective::new(h, y, lam, pen)
    }
    .map_err(to_py)
}

/// Deconvolves `y`; without `a1`/`a2` the largest certified parameters are used.
#[pyfunction]
#[pyo3(signature = (y, filter, lam, a1 = None, a2 = None, family = "atan", algorithm = "fbs", tol = 1e-4, max_iter = 20000, unchecked = false))]
#[allow(clippy::too_many_arguments)]
fn solve(
    y: Vec<f64>,
    filter: &PyFilter,
    lam: f64,
    a1: Option<f64>,
    a2: Option<f64>,
    family: &str,
    algorithm: &str,
    tol: f64,
    max_iter: usize,
    unchecked: bool,
) -> PyResult<PySolveResult> {
    let obj = objective(y, filter, lam, family, a1, a2, unchecked)?;
    let cfg = SolverConfig {
        algorithm: algorithm.parse().map_err(to_py)?,
        stop_rel_tol: tol,
        max_iter,
        ..SolverConfig::default()
    };
    let res = solver::solve(&obj, &cfg).map_err(to_py)?;
    let p = obj.penalty().params;
    Ok(PySolveResult {
        x_hat: res.x_hat,
        objective_trace: res.objective_trace,
        iterations: res.iterations,
        converged: res.converged,
        optimality_max_violation: res.optimality_max_violation,
        a1: p.a1,
        a2: p.a2,
    })
}

/// `(max_violation, passed, v)` for candidate `x`.
#[pyfunction]
#[pyo3(signature = (y, filter, lam, x, a1 = None, a2 = None, family = "atan", tol = 1e-3))]
#[allow(clippy::too_many_arguments)]
fn optimality(
    y: Vec<f64>,
    filter: &PyFilter,
    lam: f64,
    x: Vec<f64>,
    a1: Option<f64>,
    a2: Option<f64>,
    family: &str,
    tol: f64,
) -> PyResult<(f64, bool, Vec<f64>)> {
    let obj = objective(y, filter, lam, family, a1, a2, true)?;
    let r = diagnostics::optimality_report(&obj, &x, tol).map_err(to_py)?;
    Ok((r.max_violation, r.passed, r.v))
}

/// Univariate penalty `phi(t; a)`.
#[pyfunction]
fn phi(family_name: &str, t: f64, a: f64) -> PyResult<f64> {
    bisr::penalties::phi(family(family_name)?, t, a).map_err(to_py)
}

#[pyfunction]
fn soft_threshold(t: f64, threshold: f64) -> f64 {
    solver::soft_threshold(t, threshold)
}

#[pyfunction]
fn rmse(x_hat: Vec<f64>, x_true: Vec<f64>) -> PyResult<f64> {
    diagnostics::rmse(&x_hat, &x_true).map_err(to_py)
}

#[pymodule]
fn bisr_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFilter>()?;
    m.add_class::<PyPenalty>()?;
    m.add_class::<PySolveResult>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(optimality, m)?)?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(soft_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(rmse, m)?)?;
    Ok(())
}
