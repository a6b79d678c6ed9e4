//! Python bindings: systems, templates, certification, the left inverse,
//! hybrid simulation and rate fitting. Structured results come back as
//! plain dicts.

use nalgebra::DMatrix;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use templab::analysis::{self, FitWindow};
use templab::hybrid::{self, HybridState, IntegratorParams, LoopVariant};
use templab::jets::{self, InputSignal};
use templab::models::{self, BoxSet, CompactSpec, Expr, SatMap, SystemModel};
use templab::observer::{self, ObserverConfig, PhiProblem};
use templab::template::{self, ControlTemplate, GridParams, PolyInput, SearchParams};
use templab::LabError;

fn err(e: LabError) -> PyErr {
    match e {
        LabError::Numerical(_) | LabError::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Serializes through JSON into Python objects.
fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a square matrix given as a list of rows"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn rotation(rot: Option<Vec<Vec<f64>>>, p: usize) -> PyResult<DMatrix<f64>> {
    match rot {
        Some(r) => {
            let m = matrix(&r)?;
            if m.nrows() != p {
                return Err(PyValueError::new_err(format!("rotation must be {p}x{p}")));
            }
            Ok(m)
        }
        None => Ok(DMatrix::identity(p, p)),
    }
}

#[pyclass(name = "System", frozen, skip_from_py_object, module = "templab_py")]
#[derive(Clone)]
struct PySystem {
    inner: SystemModel,
    spec: Option<CompactSpec>,
    builtin: Option<models::Recommended>,
}

#[pymethods]
impl PySystem {
    /// Inline system from expression strings over `x1..xn`, `u1..up`.
    #[new]
    #[pyo3(signature = (n, p, f, h, feedback, name = "custom"))]
    fn new(n: usize, p: usize, f: Vec<String>, h: Vec<String>, feedback: Vec<String>, name: &str) -> PyResult<Self> {
        let parse = |v: &[String]| v.iter().map(|s| Expr::parse(s)).collect::<Result<Vec<_>, _>>();
        let model =
            SystemModel::new(name, n, p, parse(&f).map_err(err)?, parse(&h).map_err(err)?, parse(&feedback).map_err(err)?)
                .map_err(err)?;
        Ok(Self { inner: model, spec: None, builtin: None })
    }

    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        let inst = models::builtin_system(name).map_err(err)?;
        Ok(Self { inner: inst.system, spec: Some(inst.spec), builtin: Some(inst.recommended) })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn p(&self) -> usize {
        self.inner.p()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    fn f(&self, x: Vec<f64>, u: Vec<f64>) -> PyResult<Vec<f64>> {
        if x.len() != self.inner.n() || u.len() != self.inner.p() {
            return Err(PyValueError::new_err("state or input has the wrong length"));
        }
        Ok(self.inner.f(&x, &u))
    }

    fn h(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        if x.len() != self.inner.n() {
            return Err(PyValueError::new_err("state has the wrong length"));
        }
        Ok(self.inner.h(&x))
    }

    /// State feedback `λ(x)`.
    fn feedback(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        if x.len() != self.inner.n() {
            return Err(PyValueError::new_err("state has the wrong length"));
        }
        Ok(self.inner.lambda(&x))
    }

    /// Benchmark compacts as `{inner, outer, lambda_bar}`, or None for inline systems.
    fn spec(&self, py: Python<'_>) -> PyResult<Option<Py<PyAny>>> {
        self.spec.as_ref().map(|s| to_py(py, s)).transpose()
    }

    /// Benchmark tuning (q, delta, theta, horizon, template), or None.
    fn recommended(&self, py: Python<'_>) -> PyResult<Option<Py<PyAny>>> {
        self.builtin.as_ref().map(|r| to_py(py, r)).transpose()
    }

    fn __repr__(&self) -> String {
        format!("System(name={:?}, n={}, p={}, m={})", self.inner.name(), self.inner.n(), self.inner.p(), self.inner.m())
    }
}

impl PySystem {
    fn compacts(&self, spec: Option<&Bound<'_, PyDict>>) -> PyResult<CompactSpec> {
        let Some(d) = spec else {
            return self
                .spec
                .clone()
                .ok_or_else(|| PyValueError::new_err("inline systems need an explicit spec dict"));
        };
        let get = |k: &str| -> PyResult<Bound<'_, PyAny>> {
            d.get_item(k)?.ok_or_else(|| PyValueError::new_err(format!("spec needs `{k}`")))
        };
        let boxed = |k: &str| -> PyResult<BoxSet> {
            let b = get(k)?;
            BoxSet::new(b.get_item("lo")?.extract()?, b.get_item("hi")?.extract()?).map_err(err)
        };
        let (inner, outer) = (boxed("inner")?, boxed("outer")?);
        match d.get_item("lambda_bar")? {
            Some(l) => CompactSpec::with_lambda_bar(inner, outer, l.extract()?).map_err(err),
            None => CompactSpec::new(&self.inner, inner, outer).map_err(err),
        }
    }
}

#[pyclass(name = "Template", frozen, skip_from_py_object, module = "templab_py")]
#[derive(Clone)]
struct PyTemplate {
    inner: ControlTemplate,
}

#[pymethods]
impl PyTemplate {
    /// Normalized-time coefficients per channel; must satisfy `v(0) = e1`.
    #[new]
    #[pyo3(signature = (coeffs, horizon = 1.0))]
    fn new(coeffs: Vec<Vec<f64>>, horizon: f64) -> PyResult<Self> {
        let poly = PolyInput::new(horizon, coeffs).map_err(err)?;
        Ok(Self { inner: ControlTemplate::new(poly).map_err(err)? })
    }

    /// Rescales and rotates an arbitrary polynomial so that `v(0) = e1`.
    #[staticmethod]
    #[pyo3(signature = (coeffs, horizon = 1.0))]
    fn normalized(coeffs: Vec<Vec<f64>>, horizon: f64) -> PyResult<Self> {
        let poly = PolyInput::new(horizon, coeffs).map_err(err)?;
        Ok(Self { inner: template::normalize_template(&poly).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (p, horizon = 1.0))]
    fn constant(p: usize, horizon: f64) -> PyResult<Self> {
        Ok(Self { inner: ControlTemplate::constant(p, horizon).map_err(err)? })
    }

    #[staticmethod]
    fn recommended(system: &PySystem) -> PyResult<Self> {
        let rec = system.builtin.as_ref().ok_or_else(|| PyValueError::new_err("not a builtin system"))?;
        Ok(Self { inner: ControlTemplate::recommended(rec).map_err(err)? })
    }

    #[getter]
    fn coeffs(&self) -> Vec<Vec<f64>> {
        self.inner.coeffs().to_vec()
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.inner.horizon()
    }

    #[getter]
    fn order(&self) -> Option<usize> {
        self.inner.order
    }

    fn value_at(&self, t: f64) -> Vec<f64> {
        self.inner.value_at(t)
    }

    /// Raw derivatives `0..=order` at `t`, one list per derivative.
    fn jet_at(&self, t: f64, order: usize) -> Vec<Vec<f64>> {
        self.inner.jet_at(t, order).coeffs().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("Template(coeffs={:?}, horizon={})", self.inner.coeffs(), self.inner.horizon())
    }
}

#[pyfunction]
fn builtin_names() -> Vec<&'static str> {
    models::BUILTIN_NAMES.to_vec()
}

#[pyfunction]
fn hurwitz_gains(q: usize) -> Vec<f64> {
    observer::hurwitz_gains(q)
}

/// Stacked output derivatives `H_0..H_q` under the input `mu R v(t + .)`.
#[pyfunction]
#[pyo3(signature = (system, template, x, t, mu, q, rot = None))]
fn cal_h(
    system: &PySystem,
    template: &PyTemplate,
    x: Vec<f64>,
    t: f64,
    mu: f64,
    q: usize,
    rot: Option<Vec<Vec<f64>>>,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let rot = rotation(rot, system.inner.p())?;
    let (stack, jac) =
        jets::cal_h_with_jacobian(&system.inner, &x, t, &template.inner, mu, &rot, q).map_err(err)?;
    Ok((stack.values, jac.row_iter().map(|r| r.iter().copied().collect()).collect()))
}

#[pyfunction]
#[pyo3(signature = (system, template, q, spec = None, seed = 0, x_per_axis = 11, t_count = 5, mu_count = 6, extra_mu = Vec::new()))]
#[allow(clippy::too_many_arguments)]
fn certify(
    py: Python<'_>,
    system: &PySystem,
    template: &PyTemplate,
    q: usize,
    spec: Option<&Bound<'_, PyDict>>,
    seed: u64,
    x_per_axis: usize,
    t_count: usize,
    mu_count: usize,
    extra_mu: Vec<f64>,
) -> PyResult<Py<PyAny>> {
    let compacts = system.compacts(spec)?;
    let grid = GridParams { x_per_axis, t_count, mu_count, extra_mu, seed, ..GridParams::default() };
    let report = py
        .detach(|| template::certify_template(&system.inner, &compacts, &template.inner, q, &grid))
        .map_err(err)?;
    to_py(py, &report)
}

/// Randomized search around `base`; returns `(template, outcome dict)`.
#[pyfunction]
#[pyo3(signature = (system, base, q, spec = None, seed = 0, degree = 2, attempts = 100, extra_mu = Vec::new()))]
#[allow(clippy::too_many_arguments)]
fn search(
    py: Python<'_>,
    system: &PySystem,
    base: &PyTemplate,
    q: usize,
    spec: Option<&Bound<'_, PyDict>>,
    seed: u64,
    degree: usize,
    attempts: usize,
    extra_mu: Vec<f64>,
) -> PyResult<(PyTemplate, Py<PyAny>)> {
    let compacts = system.compacts(spec)?;
    let grid = GridParams { extra_mu, seed, ..GridParams::default() };
    let params = SearchParams { degree, attempts, seed, ..SearchParams::default() };
    let outcome = py
        .detach(|| template::search_template(&system.inner, &compacts, &base.inner, q, &grid, &params))
        .map_err(err)?;
    Ok((PyTemplate { inner: outcome.template().clone() }, to_py(py, &outcome)?))
}

/// Saturated least-squares left inverse of `cal_h`.
#[pyfunction]
#[pyo3(signature = (system, template, z, t, mu, q, rot = None, warm = None, spec = None))]
#[allow(clippy::too_many_arguments)]
fn phi_invert(
    py: Python<'_>,
    system: &PySystem,
    template: &PyTemplate,
    z: Vec<f64>,
    t: f64,
    mu: f64,
    q: usize,
    rot: Option<Vec<Vec<f64>>>,
    warm: Option<Vec<f64>>,
    spec: Option<&Bound<'_, PyDict>>,
) -> PyResult<Py<PyAny>> {
    let compacts = system.compacts(spec)?;
    let sat = SatMap::for_box(&compacts.outer);
    let rot = rotation(rot, system.inner.p())?;
    let warm = warm.unwrap_or_else(|| compacts.inner.center());
    let problem = PhiProblem { system: &system.inner, input: &template.inner, q, bound: sat.bound() };
    let res = problem.invert(&z, t, mu, &rot, &warm).map_err(err)?;
    to_py(py, &res)
}

/// One hybrid closed-loop arc. Returns `{t, i, x, z, s, mu, jumps, flags, summary}`.
#[pyfunction]
#[pyo3(signature = (system, template, x0, t_end, theta = None, delta = None, q = None, variant = "templated", z0 = None, s0 = 0.0, step = None, stride = 10, spec = None))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    py: Python<'_>,
    system: &PySystem,
    template: &PyTemplate,
    x0: Vec<f64>,
    t_end: f64,
    theta: Option<f64>,
    delta: Option<f64>,
    q: Option<usize>,
    variant: &str,
    z0: Option<Vec<f64>>,
    s0: f64,
    step: Option<f64>,
    stride: usize,
    spec: Option<&Bound<'_, PyDict>>,
) -> PyResult<Py<PyAny>> {
    let compacts = system.compacts(spec)?;
    let rec = system.builtin.as_ref();
    let pick = |v: Option<f64>, r: Option<f64>, what: &str| {
        v.or(r).ok_or_else(|| PyValueError::new_err(format!("`{what}` is required for inline systems")))
    };
    let theta = pick(theta, rec.map(|r| r.theta), "theta")?;
    let delta = pick(delta, rec.map(|r| r.delta), "delta")?;
    let q = q.or(rec.map(|r| r.q)).ok_or_else(|| PyValueError::new_err("`q` is required for inline systems"))?;
    let variant = LoopVariant::ALL
        .into_iter()
        .find(|v| v.name() == variant)
        .ok_or_else(|| PyValueError::new_err(format!("unknown variant {variant:?}")))?;
    let cfg = ObserverConfig::with_default_gains(q, theta, delta).map_err(err)?;
    let integ = IntegratorParams { step: step.unwrap_or(0.05 / theta), stride };
    let sys = &system.inner;
    let z = if variant.uses_observer() { z0.unwrap_or_else(|| vec![0.0; sys.m() * (q + 1)]) } else { Vec::new() };
    let init = HybridState::new(x0, z, s0, sys.p());
    let tpl = &template.inner;
    let arc = py
        .detach(|| match variant {
            LoopVariant::Templated => hybrid::simulate(sys, &compacts, tpl, &cfg, init, t_end, integ),
            LoopVariant::SampleHold => hybrid::simulate_sample_hold(sys, &compacts, &cfg, init, t_end, integ),
            LoopVariant::StateFeedback => hybrid::simulate_state_feedback(sys, &compacts, tpl, delta, init, t_end, integ),
        })
        .map_err(err)?;
    let summary = analysis::summarize(&arc, &compacts, sys, tpl);
    let out = PyDict::new(py);
    let samples: Vec<_> = arc.samples().collect();
    out.set_item("t", samples.iter().map(|s| s.t).collect::<Vec<_>>())?;
    out.set_item("i", samples.iter().map(|s| s.i).collect::<Vec<_>>())?;
    out.set_item("x", samples.iter().map(|s| s.state.x.clone()).collect::<Vec<_>>())?;
    out.set_item("z", samples.iter().map(|s| s.state.z.clone()).collect::<Vec<_>>())?;
    out.set_item("s", samples.iter().map(|s| s.state.s).collect::<Vec<_>>())?;
    out.set_item("mu", samples.iter().map(|s| s.state.mu).collect::<Vec<_>>())?;
    out.set_item("e_norm", samples.iter().map(|s| s.e_norm).collect::<Vec<_>>())?;
    out.set_item("jumps", to_py(py, &arc.jumps)?)?;
    out.set_item("flags", to_py(py, &arc.flags)?)?;
    out.set_item("summary", to_py(py, &summary)?)?;
    Ok(out.into_any().unbind())
}

/// `R` with `R e1 = u / |u|` (identity for `u = 0`), as a list of rows.
#[pyfunction]
fn isometry_from(u: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    if u.is_empty() {
        return Err(PyValueError::new_err("empty vector"));
    }
    Ok(rows(&template::isometry_from(&u)))
}

#[pyfunction]
fn isometry_update(u_prev: Vec<f64>, r_prev: Vec<Vec<f64>>, u_new: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
    let r = matrix(&r_prev)?;
    if u_prev.len() != r.nrows() || u_new.len() != r.nrows() {
        return Err(PyValueError::new_err("vectors and matrix disagree in dimension"));
    }
    Ok(rows(&template::isometry_update(&u_prev, &r, &u_new)))
}

/// Log-linear fit of the per-period peak envelope on `[start, end]`.
#[pyfunction]
#[pyo3(signature = (t, values, start, end, period = 0.0))]
fn fit_rate(py: Python<'_>, t: Vec<f64>, values: Vec<f64>, start: f64, end: f64, period: f64) -> PyResult<Py<PyAny>> {
    if t.len() != values.len() {
        return Err(PyValueError::new_err("t and values differ in length"));
    }
    let series: Vec<(f64, f64)> = t.into_iter().zip(values).collect();
    let fit = analysis::fit_rate(&series, FitWindow::new(start, end, period)).map_err(err)?;
    to_py(py, &fit)
}

#[pymodule]
fn templab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_class::<PyTemplate>()?;
    m.add_function(wrap_pyfunction!(builtin_names, m)?)?;
    m.add_function(wrap_pyfunction!(hurwitz_gains, m)?)?;
    m.add_function(wrap_pyfunction!(cal_h, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(search, m)?)?;
    m.add_function(wrap_pyfunction!(phi_invert, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(isometry_from, m)?)?;
    m.add_function(wrap_pyfunction!(isometry_update, m)?)?;
    m.add_function(wrap_pyfunction!(fit_rate, m)?)?;
    Ok(())
}
