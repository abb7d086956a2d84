//! Python bindings: exact lattice elements, piecewise-linear functions,
//! matrix operators, and the probe runner. Rationals cross the boundary as
//! "p/q" strings so nothing is ever rounded.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;

use riesz_lab::lattice::LatticeElement;
use riesz_lab::operators::MatrixOp;
use riesz_lab::pwl::PwlFunc;
use riesz_lab::rational::{format_rational, format_rationals, parse_rational, parse_rationals};
use riesz_lab::runner::{self, ExperimentConfig, ProbeSpec};
use riesz_lab::sampling::DEFAULT_SEED;
use riesz_lab::spaces::SpaceTag;

fn err(e: riesz_lab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A vector with exact rational coordinates under the coordinatewise order.
#[pyclass(name = "LatticeElement", skip_from_py_object)]
#[derive(Clone)]
struct PyLatticeElement {
    inner: LatticeElement,
}

#[pymethods]
impl PyLatticeElement {
    #[new]
    fn new(coords: Vec<String>) -> PyResult<Self> {
        let parsed = parse_rationals(&coords).map_err(err)?;
        Ok(Self { inner: LatticeElement::new(parsed).map_err(err)? })
    }

    fn coords(&self) -> Vec<String> {
        format_rationals(self.inner.coords())
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn join(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.join(&other.inner).map_err(err)? })
    }

    fn meet(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.meet(&other.inner).map_err(err)? })
    }

    fn leq(&self, other: &Self) -> PyResult<bool> {
        self.inner.leq(&other.inner).map_err(err)
    }

    fn abs(&self) -> Self {
        Self { inner: self.inner.abs() }
    }

    fn pos_part(&self) -> Self {
        Self { inner: self.inner.pos_part() }
    }

    fn neg_part(&self) -> Self {
        Self { inner: self.inner.neg_part() }
    }

    fn add(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.add(&other.inner).map_err(err)? })
    }

    fn sub(&self, other: &Self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.sub(&other.inner).map_err(err)? })
    }

    fn scale(&self, factor: &str) -> PyResult<Self> {
        let c = parse_rational(factor).map_err(err)?;
        Ok(Self { inner: self.inner.scale(&c) })
    }

    fn is_positive(&self) -> bool {
        self.inner.is_positive()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("LatticeElement({:?})", self.coords())
    }
}

/// A continuous piecewise-linear function on [0, 1] with rational
/// breakpoints, canonical form maintained.
#[pyclass(name = "PwlFunc", skip_from_py_object)]
#[derive(Clone)]
struct PyPwlFunc {
    inner: PwlFunc,
}

#[pymethods]
impl PyPwlFunc {
    #[new]
    fn new(points: Vec<(String, String)>) -> PyResult<Self> {
        let parsed = points
            .iter()
            .map(|(t, v)| Ok((parse_rational(t)?, parse_rational(v)?)))
            .collect::<riesz_lab::Result<Vec<_>>>()
            .map_err(err)?;
        Ok(Self { inner: PwlFunc::new(parsed).map_err(err)? })
    }

    #[staticmethod]
    fn constant(value: &str) -> PyResult<Self> {
        let v = parse_rational(value).map_err(err)?;
        Ok(Self { inner: PwlFunc::constant(v) })
    }

    #[staticmethod]
    fn tent(k: u32) -> PyResult<Self> {
        Ok(Self { inner: PwlFunc::tent(k).map_err(err)? })
    }

    #[staticmethod]
    fn ramp(k: u32) -> PyResult<Self> {
        Ok(Self { inner: PwlFunc::ramp(k).map_err(err)? })
    }

    #[staticmethod]
    fn unit_l1_bump(index: u32, count: u32) -> PyResult<Self> {
        Ok(Self { inner: PwlFunc::unit_l1_bump(index, count).map_err(err)? })
    }

    fn points(&self) -> Vec<(String, String)> {
        self.inner
            .points()
            .iter()
            .map(|(t, v)| (format_rational(t), format_rational(v)))
            .collect()
    }

    fn eval(&self, t: &str) -> PyResult<String> {
        let t = parse_rational(t).map_err(err)?;
        Ok(format_rational(&self.inner.eval(&t).map_err(err)?))
    }

    fn join(&self, other: &Self) -> Self {
        Self { inner: self.inner.join(&other.inner) }
    }

    fn meet(&self, other: &Self) -> Self {
        Self { inner: self.inner.meet(&other.inner) }
    }

    fn abs(&self) -> Self {
        Self { inner: self.inner.abs() }
    }

    fn add(&self, other: &Self) -> Self {
        Self { inner: self.inner.add(&other.inner) }
    }

    fn sub(&self, other: &Self) -> Self {
        Self { inner: self.inner.sub(&other.inner) }
    }

    fn leq(&self, other: &Self) -> bool {
        self.inner.leq(&other.inner)
    }

    fn sup_norm(&self) -> String {
        format_rational(&self.inner.sup_norm())
    }

    fn l1_norm(&self) -> String {
        format_rational(&self.inner.l1_norm())
    }

    fn max_abs_slope(&self) -> String {
        format_rational(&self.inner.max_abs_slope())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("PwlFunc({:?})", self.points())
    }
}

/// A matrix operator between tagged coordinate spaces.
#[pyclass(name = "MatrixOp", skip_from_py_object)]
#[derive(Clone)]
struct PyMatrixOp {
    inner: MatrixOp,
}

#[pymethods]
impl PyMatrixOp {
    #[new]
    fn new(entries: Vec<Vec<String>>, domain: &str, range: &str) -> PyResult<Self> {
        let domain: SpaceTag = serde_json::from_str(domain).map_err(json_err)?;
        let range: SpaceTag = serde_json::from_str(range).map_err(json_err)?;
        let parsed = entries
            .iter()
            .map(|row| parse_rationals(row))
            .collect::<riesz_lab::Result<Vec<_>>>()
            .map_err(err)?;
        Ok(Self { inner: MatrixOp::new(parsed, domain, range).map_err(err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: serde_json::from_str(text).map_err(json_err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    fn entries(&self) -> Vec<Vec<String>> {
        self.inner.entries().iter().map(|row| format_rationals(row)).collect()
    }

    fn apply(&self, x: &PyLatticeElement) -> PyResult<PyLatticeElement> {
        Ok(PyLatticeElement { inner: self.inner.apply(&x.inner).map_err(err)? })
    }

    fn modulus(&self) -> Self {
        Self { inner: self.inner.modulus_matrix() }
    }

    fn modulus_rk(&self, x: &PyLatticeElement) -> PyResult<PyLatticeElement> {
        Ok(PyLatticeElement { inner: self.inner.modulus_rk(&x.inner).map_err(err)? })
    }

    fn induced_norm(&self) -> PyResult<String> {
        Ok(format_rational(&self.inner.induced_norm().map_err(err)?))
    }

    fn dominates(&self, other: &Self) -> PyResult<bool> {
        self.inner.dominates(&other.inner).map_err(err)
    }

    fn is_positive(&self) -> bool {
        self.inner.is_positive()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "MatrixOp({} -> {}, {} rows)",
            self.inner.domain().describe(),
            self.inner.range().describe(),
            self.inner.rows()
        )
    }
}

/// Run one probe by registry name. `params_json` matches the config schema;
/// the result is the report as a JSON string.
#[pyfunction]
#[pyo3(signature = (name, params_json = None, seed = None))]
fn run_probe(name: &str, params_json: Option<&str>, seed: Option<u64>) -> PyResult<String> {
    let params = match params_json {
        Some(text) => serde_json::from_str(text).map_err(json_err)?,
        None => runner::default_config()
            .probes
            .iter()
            .find(|p| p.name == name)
            .map(|p| p.params.clone())
            .ok_or_else(|| {
                PyValueError::new_err(format!("no default parameters for probe {name:?}"))
            })?,
    };
    let spec = ProbeSpec { name: name.into(), params };
    let prepared = runner::prepare_probe(&spec, seed.unwrap_or(DEFAULT_SEED)).map_err(err)?;
    let report = prepared.run().map_err(err)?;
    serde_json::to_string(&report).map_err(json_err)
}

/// Run a full experiment config (JSON) and return the manifest as JSON.
/// Nothing is written to disk.
#[pyfunction]
fn run_config(config_json: &str) -> PyResult<String> {
    let config = ExperimentConfig::from_json(config_json).map_err(err)?;
    let manifest = runner::run(&config).map_err(err)?;
    Ok(manifest.to_json())
}

/// The default probe battery as a config JSON string.
#[pyfunction]
fn default_config_json() -> PyResult<String> {
    serde_json::to_string_pretty(&runner::default_config()).map_err(json_err)
}

/// The probe registry: name to one-line description.
#[pyfunction]
fn probe_registry() -> std::collections::BTreeMap<String, String> {
    runner::probe_registry()
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

#[pyfunction]
fn version() -> &'static str {
    runner::TOOL_VERSION
}

#[pymodule]
fn riesz_lab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLatticeElement>()?;
    m.add_class::<PyPwlFunc>()?;
    m.add_class::<PyMatrixOp>()?;
    m.add_function(wrap_pyfunction!(run_probe, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(default_config_json, m)?)?;
    m.add_function(wrap_pyfunction!(probe_registry, m)?)?;
    m.add_function(wrap_pyfunction!(version, m)?)?;
    Ok(())
}
