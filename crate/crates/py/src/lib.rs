#![allow(clippy::neg_cmp_op_on_partial_ord)]

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pareto_forge::dro::{self, DroConfig, PsiBox, PsiVector, Scenario, TwoGoodConfig};
use pareto_forge::model::AsGbar;
use pareto_forge::rp::{self, PreferenceProfile};
use pareto_forge::{io, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// A budget function `g(x)`; the feasible set is `{x ≥ 0 : g(x) ≤ 0}`.
#[pyclass(name = "ConstraintFunction", module = "pareto_forge", skip_from_py_object)]
#[derive(Clone)]
struct PyConstraint {
    inner: pareto_forge::ConstraintFunction,
}

#[pymethods]
impl PyConstraint {
    /// `αᵀx − b`
    #[staticmethod]
    fn affine(alpha: Vec<f64>, b: f64) -> PyResult<Self> {
        let inner = pareto_forge::ConstraintFunction::affine(alpha, b);
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    /// `Σ log σ(α_j x_j) − b`
    #[staticmethod]
    fn log_sigmoid(alpha: Vec<f64>, b: f64) -> PyResult<Self> {
        let inner = pareto_forge::ConstraintFunction::log_sigmoid(alpha, b);
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    fn value(&self, x: Vec<f64>) -> PyResult<f64> {
        pareto_forge::model::eval_constraint(&self.inner, &x).map_err(py_err)
    }

    fn gradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        pareto_forge::model::eval_constraint(&self.inner, &x).map_err(py_err)?;
        Ok(self.inner.gradient(&x))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn __repr__(&self) -> String {
        format!("ConstraintFunction({:?}, alpha={:?}, b={})", self.inner.kind, self.inner.alpha, self.inner.b)
    }
}

/// Budgets and sampled play for `T` periods and `M` agents.
#[pyclass(name = "Dataset", module = "pareto_forge")]
struct PyDataset {
    inner: pareto_forge::RpDataset,
}

#[pymethods]
impl PyDataset {
    /// `constraints[t][i]` and `samples[t][i]` (a list of action vectors).
    #[new]
    fn new(constraints: Vec<Vec<PyRef<'_, PyConstraint>>>, samples: Vec<Vec<Vec<Vec<f64>>>>) -> PyResult<Self> {
        let constraints = constraints.iter().map(|row| row.iter().map(|c| c.inner.clone()).collect()).collect();
        let strategies = samples
            .into_iter()
            .map(|row| row.into_iter().map(pareto_forge::EmpiricalStrategy::new).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(py_err)?;
        let inner = pareto_forge::RpDataset::new(constraints, strategies).map_err(py_err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Self { inner: io::read_dataset(&path).map_err(py_err)? })
    }

    fn save(&self, path: std::path::PathBuf) -> PyResult<()> {
        io::write_dataset(&path, &self.inner).map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: io::dataset_from_json(text).map_err(py_err)? })
    }

    fn to_json(&self) -> String {
        io::dataset_to_json(&self.inner)
    }

    #[getter]
    fn periods(&self) -> usize {
        self.inner.periods()
    }

    #[getter]
    fn agents(&self) -> usize {
        self.inner.agents()
    }

    /// `E[g_t^i(x)]` with `x` drawn from the period-`s` strategy of agent `i`.
    fn gbar(&self, t: usize, s: usize, i: usize) -> PyResult<f64> {
        let (tn, m) = (self.inner.periods(), self.inner.agents());
        if t >= tn || s >= tn || i >= m {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.inner.gbar().get(t, s, i))
    }

    fn __repr__(&self) -> String {
        format!("Dataset(T={}, M={}, k={})", self.inner.periods(), self.inner.agents(), self.inner.action_dim())
    }
}

/// Smallest relaxation making the data consistent with social optimality,
/// with the certificate found at that relaxation.
#[pyfunction]
#[pyo3(signature = (dataset, alpha = pareto_forge::ALPHA, tol_r = pareto_forge::TOL_R))]
fn pareto_gap<'py>(py: Python<'py>, dataset: &PyDataset, alpha: f64, tol_r: f64) -> PyResult<Bound<'py, PyDict>> {
    let g = rp::pareto_gap(&dataset.inner, alpha, tol_r).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("gap", g.gap)?;
    out.set_item("per_agent_gaps", g.per_agent_gaps)?;
    out.set_item("u", g.certificate.u)?;
    out.set_item("lambda", g.certificate.lambda)?;
    out.set_item("r", g.certificate.r)?;
    Ok(out)
}

#[pyfunction]
fn mm_garp(dataset: &PyDataset) -> bool {
    rp::mm_garp(&dataset.inner)
}

#[pyfunction]
fn garp_f(dataset: &PyDataset, f: f64) -> bool {
    rp::garp_f(&dataset.inner, f)
}

#[pyfunction]
#[pyo3(signature = (dataset, tol = pareto_forge::TOL_R))]
fn garp_f_threshold(dataset: &PyDataset, tol: f64) -> f64 {
    rp::garp_f_threshold(&dataset.inner, tol)
}

#[pyfunction]
#[pyo3(signature = (dataset, agent, tol_e = 1e-4))]
fn ccei(dataset: &PyDataset, agent: usize, tol_e: f64) -> PyResult<f64> {
    if agent >= dataset.inner.agents() {
        return Err(PyValueError::new_err("agent out of range"));
    }
    Ok(rp::ccei_scalar(&dataset.inner, agent, tol_e))
}

/// Lower bound on the probability that the sample gap is within `eps` of its limit.
#[pyfunction]
fn hoeffding_confidence(eps: f64, n: usize, t: usize, m: usize, g: f64) -> PyResult<f64> {
    if !(eps >= 0.0 && n >= 1 && g > 0.0) {
        return Err(PyValueError::new_err("need eps >= 0, N >= 1 and G > 0"));
    }
    Ok(rp::hoeffding_confidence(eps, n, t, m, g, 0.0))
}

/// `rankings[j]` lists outcomes from most to least preferred by agent `j`.
#[pyfunction]
fn rank_optimality_check(rankings: Vec<Vec<usize>>, utility: Vec<f64>, strategy: Vec<f64>) -> PyResult<bool> {
    let p = PreferenceProfile::new(rankings, utility).map_err(py_err)?;
    rp::rank_optimality_check(&p, &strategy).map_err(py_err)
}

/// The two-good, three-agent linear-budget instance used for robust estimation.
#[pyfunction]
#[pyo3(signature = (t = 5, n = 5, seed = 0, jitter = 0.05))]
fn two_good_instance(t: usize, n: usize, seed: u64, jitter: f64) -> PyResult<PyDataset> {
    let cfg = TwoGoodConfig { t, n, seed, jitter, ..TwoGoodConfig::default() };
    Ok(PyDataset { inner: dro::two_good_instance(&cfg).map_err(py_err)? })
}

/// Closed-form gap of one scenario at fixed `(u, λ)`; `u`, `lambda` and
/// `points` are indexed `[t][i]`.
#[pyfunction]
fn scenario_gap(
    dataset: &PyDataset,
    u: Vec<Vec<f64>>,
    lambda: Vec<Vec<f64>>,
    points: Vec<Vec<Vec<f64>>>,
) -> PyResult<f64> {
    let d = &dataset.inner;
    let (t, m) = (d.periods(), d.agents());
    let shaped = |rows: usize, v: &Vec<Vec<f64>>| v.len() == rows && v.iter().all(|r| r.len() == m);
    if !shaped(t, &u) || !shaped(t, &lambda) || points.len() != t || points.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err(format!("expected [{t}][{m}] arrays")));
    }
    if lambda.iter().flatten().any(|&l| !(l > 0.0)) {
        return Err(PyValueError::new_err("lambda must be positive"));
    }
    let psi = PsiVector { t, m, u: u.concat(), lambda: lambda.concat() };
    let phi = Scenario { t, m, points: points.concat() };
    for (b, x) in phi.points.iter().enumerate() {
        pareto_forge::model::eval_constraint(d.constraint(b / m, b % m), x).map_err(py_err)?;
    }
    Ok(dro::h_value(&psi, d, &phi))
}

/// Exchange method for the Wasserstein-robust gap at radius `eps`.
#[pyfunction]
#[pyo3(signature = (dataset, eps, delta = 0.1, seed = 0, max_iters = 50, u_max = 10.0, lambda_lo = 1.0, lambda_hi = 10.0))]
#[allow(clippy::too_many_arguments)]
fn robust_gap<'py>(
    py: Python<'py>,
    dataset: &PyDataset,
    eps: f64,
    delta: f64,
    seed: u64,
    max_iters: usize,
    u_max: f64,
    lambda_lo: f64,
    lambda_hi: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = DroConfig { psi_box: PsiBox { u_max, lambda_lo, lambda_hi }, max_iters, seed, ..DroConfig::default() };
    let res = py.detach(|| dro::exchange_loop(&dataset.inner, eps, delta, &cfg)).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("robust_gap", res.robust_gap)?;
    out.set_item("certified", res.certified)?;
    out.set_item("iterations", res.iterations)?;
    out.set_item("kappa", res.state.kappa())?;
    out.set_item("max_cv", res.state.max_cv())?;
    let m = res.psi_hat.m;
    let rows = |v: &[f64]| v.chunks(m).map(|c| c.to_vec()).collect::<Vec<_>>();
    out.set_item("u", rows(&res.psi_hat.u))?;
    out.set_item("lambda", rows(&res.psi_hat.lambda))?;
    Ok(out)
}

#[pymodule]
#[pyo3(name = "pareto_forge")]
fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConstraint>()?;
    m.add_class::<PyDataset>()?;
    m.add_function(wrap_pyfunction!(pareto_gap, m)?)?;
    m.add_function(wrap_pyfunction!(mm_garp, m)?)?;
    m.add_function(wrap_pyfunction!(garp_f, m)?)?;
    m.add_function(wrap_pyfunction!(garp_f_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(ccei, m)?)?;
    m.add_function(wrap_pyfunction!(hoeffding_confidence, m)?)?;
    m.add_function(wrap_pyfunction!(rank_optimality_check, m)?)?;
    m.add_function(wrap_pyfunction!(two_good_instance, m)?)?;
    m.add_function(wrap_pyfunction!(scenario_gap, m)?)?;
    m.add_function(wrap_pyfunction!(robust_gap, m)?)?;
    Ok(())
}
