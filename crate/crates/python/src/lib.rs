//! Python bindings for the weighted Motzkin path toolkit.

use num_bigint::BigUint;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use motzkin_core::asymptotics;
use motzkin_core::closedform::EgfEvaluator;
use motzkin_core::exact::{
    build_triangle_with_budget, final_log_row, HeightDistribution, Representation, DEFAULT_EXACT_BUDGET_BYTES,
};
use motzkin_core::ldp::{self, RateValue};
use motzkin_core::saddlepoint::{self, CumulantEvaluator};
use motzkin_core::{Error, ModelParams};

create_exception!(motzkin, MotzkinError, PyException);
create_exception!(motzkin, CapacityError, MotzkinError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParams(_) => PyValueError::new_err(e.to_string()),
        Error::Capacity(_) | Error::Size(_) => CapacityError::new_err(e.to_string()),
        _ => MotzkinError::new_err(e.to_string()),
    }
}

/// Step-weight coefficients: up `alpha0 + a k`, down `beta0 + b k`,
/// level `gamma0 + c k` at height `k`.
#[pyclass(name = "Params", frozen, eq, hash, from_py_object)]
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Params(ModelParams);

#[pymethods]
impl Params {
    #[new]
    fn new(a: u64, b: u64, c: u64, alpha0: u64, beta0: u64, gamma0: u64) -> Self {
        Params(ModelParams::new(a, b, c, alpha0, beta0, gamma0))
    }

    #[staticmethod]
    fn reference() -> Self {
        Params(ModelParams::reference())
    }

    #[staticmethod]
    fn classical() -> Self {
        Params(ModelParams::classical())
    }

    /// Parse `a=1,b=5,...` or a JSON object.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        ModelParams::parse(text).map(Params).map_err(to_py)
    }

    #[getter]
    fn a(&self) -> u64 {
        self.0.a
    }
    #[getter]
    fn b(&self) -> u64 {
        self.0.b
    }
    #[getter]
    fn c(&self) -> u64 {
        self.0.c
    }
    #[getter]
    fn alpha0(&self) -> u64 {
        self.0.alpha0
    }
    #[getter]
    fn beta0(&self) -> u64 {
        self.0.beta0
    }
    #[getter]
    fn gamma0(&self) -> u64 {
        self.0.gamma0
    }

    fn is_balanced(&self) -> bool {
        self.0.is_balanced()
    }

    /// One of `constant`, `linear`, `two-real-roots`, `double-root`, `complex-roots`.
    fn regime(&self) -> &'static str {
        self.0.classify().name()
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!(
            "Params(a={}, b={}, c={}, alpha0={}, beta0={}, gamma0={})",
            p.a, p.b, p.c, p.alpha0, p.beta0, p.gamma0
        )
    }
}

#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct Distribution {
    n: usize,
    log_p: Vec<f64>,
    mean: f64,
    variance: f64,
    log_total: f64,
}

impl From<HeightDistribution> for Distribution {
    fn from(d: HeightDistribution) -> Self {
        Distribution {
            n: d.n,
            log_p: d.log_p,
            mean: d.mean,
            variance: d.variance,
            log_total: d.log_total,
        }
    }
}

#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct Estimate {
    n: usize,
    x: f64,
    log_pn: f64,
    mean: f64,
    variance: f64,
    regime: &'static str,
}

#[pyclass(frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
pub struct Saddle {
    k: usize,
    theta: f64,
    kappa: f64,
    kappa1: f64,
    kappa2: f64,
    log_p_daniels: f64,
    iterations: usize,
}

/// Exact weight rows `w[0..=n][k]` as Python integers. Raises
/// `CapacityError` once the integers outgrow `budget_mb`.
#[pyfunction]
#[pyo3(signature = (params, n, budget_mb = None))]
fn triangle(params: &Params, n: usize, budget_mb: Option<usize>) -> PyResult<Vec<Vec<BigUint>>> {
    let budget = budget_mb.map_or(DEFAULT_EXACT_BUDGET_BYTES, |mb| mb.saturating_mul(1 << 20));
    let tri = build_triangle_with_budget(&params.0, n, Representation::Exact, budget).map_err(to_py)?;
    Ok((0..=n)
        .map(|m| tri.exact_row(m).expect("exact rows").to_vec())
        .collect())
}

/// Natural-log weights of row `n` only.
#[pyfunction]
fn log_row(params: &Params, n: usize) -> Vec<f64> {
    final_log_row(&params.0, n)
}

#[pyfunction]
fn distribution(params: &Params, n: usize) -> Distribution {
    HeightDistribution::from_log_row(&final_log_row(&params.0, n)).into()
}

/// Closed-form exponential generating function at `(x, t)`.
#[pyfunction]
fn egf(params: &Params, x: f64, t: f64) -> PyResult<f64> {
    EgfEvaluator::new(&params.0).and_then(|ev| ev.eval(x, t)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (params, n, x = 1.0))]
fn asymptotic_estimate(params: &Params, n: usize, x: f64) -> PyResult<Estimate> {
    let e = asymptotics::estimate(&params.0, x, n).map_err(to_py)?;
    Ok(Estimate {
        n: e.n,
        x: e.x,
        log_pn: e.log_pn,
        mean: e.mean,
        variance: e.variance,
        regime: e.regime.name(),
    })
}

#[pyfunction]
fn saddle(params: &Params, n: usize, k: usize) -> PyResult<Saddle> {
    let ev = CumulantEvaluator::from_params(&params.0, n);
    let s = saddlepoint::solve_saddle(&ev, k).map_err(to_py)?;
    Ok(Saddle {
        k: s.k,
        theta: s.theta,
        kappa: s.kappa,
        kappa1: s.kappa1,
        kappa2: s.kappa2,
        log_p_daniels: s.log_p_daniels,
        iterations: s.iterations,
    })
}

/// Natural log of the Daniels estimate of `p_{n,k}`.
#[pyfunction]
fn log_daniels_pmf(params: &Params, n: usize, k: usize) -> PyResult<f64> {
    let ev = CumulantEvaluator::from_params(&params.0, n);
    saddlepoint::daniels_pmf(&ev, k).map_err(to_py)
}

/// Rows `(k, log_exact, log_daniels, log_gaussian)` over the interior range.
#[pyfunction]
#[pyo3(signature = (params, n, epsilon = 0.1))]
fn profile(params: &Params, n: usize, epsilon: f64) -> PyResult<Vec<(usize, f64, f64, f64)>> {
    let ev = CumulantEvaluator::from_params(&params.0, n);
    let rows = saddlepoint::profile(&ev, epsilon).map_err(to_py)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.k, r.log_exact, r.log_daniels, r.log_gaussian))
        .collect())
}

/// `(F, F', F'')` of the limit CGF at `theta`.
#[pyfunction]
fn limit_cgf(params: &Params, theta: f64) -> PyResult<(f64, f64, f64)> {
    let v = ldp::limit_cgf(&params.0, theta).map_err(to_py)?;
    Ok((v.f, v.f1, v.f2))
}

/// `(theta, I(u))` with `F'(theta) = u`.
#[pyfunction]
fn rate_function(params: &Params, u: f64) -> PyResult<(f64, f64)> {
    let s = ldp::rate_function(&params.0, u).map_err(to_py)?;
    Ok((s.theta, s.rate))
}

/// Closed-form rate for the double-root regime; `inf` off the support.
#[pyfunction]
fn rate_double_root(r: f64, u: f64) -> PyResult<f64> {
    match ldp::rate_closed_form_double_root(r, u).map_err(to_py)? {
        RateValue::Finite(v) => Ok(v),
        RateValue::Infinite => Ok(f64::INFINITY),
    }
}

#[pymodule]
fn motzkin(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("MotzkinError", m.py().get_type::<MotzkinError>())?;
    m.add("CapacityError", m.py().get_type::<CapacityError>())?;
    m.add_class::<Params>()?;
    m.add_class::<Distribution>()?;
    m.add_class::<Estimate>()?;
    m.add_class::<Saddle>()?;
    m.add_function(wrap_pyfunction!(triangle, m)?)?;
    m.add_function(wrap_pyfunction!(log_row, m)?)?;
    m.add_function(wrap_pyfunction!(distribution, m)?)?;
    m.add_function(wrap_pyfunction!(egf, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(saddle, m)?)?;
    m.add_function(wrap_pyfunction!(log_daniels_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(profile, m)?)?;
    m.add_function(wrap_pyfunction!(limit_cgf, m)?)?;
    m.add_function(wrap_pyfunction!(rate_function, m)?)?;
    m.add_function(wrap_pyfunction!(rate_double_root, m)?)?;
    Ok(())
}
