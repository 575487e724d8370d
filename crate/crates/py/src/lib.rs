//! Python bindings.

use blaschke_lab as core;
use core::{classifier, commutant, continuation, partition, polyroots, report, Cplx, ToolConfig};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

create_exception!(blaschke_lab, BlaschkeLabError, PyException);

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::ZeroOutsideDisk(_)
        | core::Error::NonUnimodularConstant(_)
        | core::Error::EmptyProduct
        | core::Error::ZeroMultiplicity(_)
        | core::Error::NonFinite
        | core::Error::InvalidPartition(_)
        | core::Error::InvalidConfig(_)
        | core::Error::Parse { .. } => PyValueError::new_err(e.to_string()),
        other => BlaschkeLabError::new_err(other.to_string()),
    }
}

fn config(json: Option<&str>) -> PyResult<ToolConfig> {
    json.map_or_else(|| Ok(ToolConfig::default()), |text| ToolConfig::from_json(text).map_err(err))
}

/// Canonical report document converted to Python objects.
fn to_py<'py, T: Serialize>(py: Python<'py>, command: &str, cfg: &ToolConfig, body: &T) -> PyResult<Bound<'py, PyAny>> {
    let doc = report::document(command, cfg, body).map_err(err)?;
    py.import("json")?.call_method1("loads", (report::to_canonical_string(&doc),))
}

#[pyclass(name = "BlaschkeProduct", module = "blaschke_lab", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyBlaschke(core::BlaschkeProduct);

#[pymethods]
impl PyBlaschke {
    #[new]
    #[pyo3(signature = (zeros, unimodular = Cplx::new(1.0, 0.0)))]
    fn new(zeros: Vec<(Cplx, usize)>, unimodular: Cplx) -> PyResult<Self> {
        core::BlaschkeProduct::new(&zeros, unimodular).map(Self).map_err(err)
    }

    #[staticmethod]
    fn power(n: usize) -> PyResult<Self> {
        core::BlaschkeProduct::power(n).map(Self).map_err(err)
    }

    #[staticmethod]
    fn mobius(a: Cplx) -> PyResult<Self> {
        core::BlaschkeProduct::mobius(a).map(Self).map_err(err)
    }

    #[staticmethod]
    fn compose(outer: &Self, inner: &Self) -> PyResult<Self> {
        core::BlaschkeProduct::compose(&outer.0, &inner.0).map(Self).map_err(err)
    }

    #[getter]
    fn order(&self) -> usize {
        self.0.order()
    }

    #[getter]
    fn zeros(&self) -> Vec<(Cplx, usize)> {
        self.0.zero_list()
    }

    #[getter]
    fn unimodular(&self) -> Cplx {
        self.0.unimodular()
    }

    fn __call__(&self, z: Cplx) -> Cplx {
        self.0.eval(z)
    }

    fn eval(&self, z: Cplx) -> Cplx {
        self.0.eval(z)
    }

    fn derivative(&self, z: Cplx) -> Cplx {
        self.0.eval_derivative(z)
    }

    fn f_bivariate(&self, w: Cplx, z: Cplx) -> Cplx {
        self.0.f_bivariate(w, z)
    }

    /// Ascending coefficients `(P, Q)` with `phi = P / Q`.
    fn rational_rep(&self) -> (Vec<Cplx>, Vec<Cplx>) {
        let rep = self.0.rational_rep();
        (rep.p_coeffs, rep.q_coeffs)
    }

    fn __mul__(&self, other: &Self) -> Self {
        Self(self.0.mul(&other.0))
    }

    fn __pow__(&self, k: usize, _modulo: Option<usize>) -> PyResult<Self> {
        self.0.pow(k).map(Self).map_err(err)
    }

    fn equivalent_to_power(&self) -> bool {
        self.0.equivalent_to_power()
    }

    /// Critical points in the disk, repeated by multiplicity.
    fn critical_points(&self) -> PyResult<Vec<Cplx>> {
        polyroots::critical_points(&self.0, ToolConfig::default().multiplicity_tol).map_err(err)
    }

    fn preimages(&self, v: Cplx) -> PyResult<Vec<Cplx>> {
        polyroots::preimages(&self.0, v).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("BlaschkeProduct({})", self.0)
    }
}

#[pyclass(name = "Partition", module = "blaschke_lab", frozen, eq, hash, skip_from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
struct PyPartition(partition::Partition);

#[pymethods]
impl PyPartition {
    #[new]
    fn new(n: usize, blocks: Vec<Vec<usize>>) -> PyResult<Self> {
        partition::Partition::new(n, blocks).map(Self).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn q(&self) -> usize {
        self.0.q()
    }

    #[getter]
    fn blocks(&self) -> Vec<Vec<usize>> {
        self.0.blocks().to_vec()
    }

    fn dual(&self) -> Self {
        Self(partition::dual_partition(&self.0))
    }

    /// Admissibility conditions as a dict `{"a1": bool, ..}`.
    fn conditions<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = partition::check_conditions(&self.0);
        let d = PyDict::new(py);
        d.set_item("a1", c.a1)?;
        d.set_item("a2", c.a2)?;
        d.set_item("a3", c.a3)?;
        d.set_item("a4", c.a4)?;
        Ok(d)
    }

    fn subgroup_unions(&self) -> Vec<Vec<usize>> {
        partition::subgroup_unions(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("Partition({})", self.0)
    }
}

#[pyfunction]
#[pyo3(signature = (n, filter = false))]
fn enumerate_admissible(n: usize, filter: bool) -> PyResult<Vec<PyPartition>> {
    partition::enumerate_admissible(n, filter).map(|ps| ps.into_iter().map(PyPartition).collect()).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (b, config = None))]
fn monodromy_partition(b: &PyBlaschke, config: Option<&str>) -> PyResult<PyPartition> {
    let cfg = self::config(config)?;
    continuation::monodromy(&b.0, &cfg).map(|r| PyPartition(r.partition)).map_err(err)
}

/// Full monodromy report as a dict.
#[pyfunction]
#[pyo3(signature = (b, config = None))]
fn monodromy<'py>(py: Python<'py>, b: &PyBlaschke, config: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = self::config(config)?;
    let r = continuation::monodromy(&b.0, &cfg).map_err(err)?;
    to_py(py, "monodromy", &cfg, &r)
}

#[pyfunction]
#[pyo3(signature = (b, config = None))]
fn dirichlet_dim(b: &PyBlaschke, config: Option<&str>) -> PyResult<usize> {
    let cfg = self::config(config)?;
    commutant::dirichlet_dim(&b.0, &cfg).map(|r| r.dim).map_err(err)
}

/// Classification report as a dict.
#[pyfunction]
#[pyo3(signature = (b, config = None))]
fn classify<'py>(py: Python<'py>, b: &PyBlaschke, config: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = self::config(config)?;
    let r = py.detach(|| classifier::classify(&b.0, &cfg)).map_err(err)?;
    to_py(py, "classify", &cfg, &r)
}

/// Canonical JSON text of the classification report.
#[pyfunction]
#[pyo3(signature = (b, config = None))]
fn classify_json(py: Python<'_>, b: &PyBlaschke, config: Option<&str>) -> PyResult<String> {
    let cfg = self::config(config)?;
    let r = py.detach(|| classifier::classify(&b.0, &cfg)).map_err(err)?;
    Ok(report::to_canonical_string(&report::document("classify", &cfg, &r).map_err(err)?))
}

/// `(label, product, expected_dim)` for each row of the order-6 table.
#[pyfunction]
#[pyo3(signature = (seed = None))]
fn order6_case_suite(seed: Option<u64>) -> PyResult<Vec<(String, PyBlaschke, usize)>> {
    let seed = seed.unwrap_or(ToolConfig::default().seed);
    Ok(classifier::order6_case_suite(seed)
        .map_err(err)?
        .into_iter()
        .map(|c| (c.label.to_string(), PyBlaschke(c.product), c.expected_dim))
        .collect())
}

#[pymodule(name = "blaschke_lab")]
fn blaschke_lab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BlaschkeLabError", m.py().get_type::<BlaschkeLabError>())?;
    m.add("SCHEMA", report::SCHEMA)?;
    m.add_class::<PyBlaschke>()?;
    m.add_class::<PyPartition>()?;
    m.add_function(wrap_pyfunction!(enumerate_admissible, m)?)?;
    m.add_function(wrap_pyfunction!(monodromy_partition, m)?)?;
    m.add_function(wrap_pyfunction!(monodromy, m)?)?;
    m.add_function(wrap_pyfunction!(dirichlet_dim, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(classify_json, m)?)?;
    m.add_function(wrap_pyfunction!(order6_case_suite, m)?)?;
    Ok(())
}
