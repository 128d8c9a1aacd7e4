//! Python bindings for `qcap_core`. Reports come back as plain dicts.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use qcap_core::channels::{self, Builtin};
use qcap_core::code_fidelity::{self, CodeSubspace};
use qcap_core::montecarlo::stream_rng;
use qcap_core::random_coding;
use qcap_core::typicality::{self, ReducedChannel, TypicalSetSpec};
use qcap_core::{ComplexMatrix, DensityOperator, EnsembleSpec, Error, ErrorKind, Limits, ProbabilityDistribution};

create_exception!(
    qcap,
    DomainError,
    PyValueError,
    "A mathematical precondition does not hold."
);
create_exception!(
    qcap,
    ResourceError,
    PyRuntimeError,
    "A configured size cap would be exceeded."
);

type Rows = Vec<Vec<Complex64>>;

fn py_err(e: Error) -> PyErr {
    match e.kind() {
        ErrorKind::Input => PyValueError::new_err(e.to_string()),
        ErrorKind::Domain => DomainError::new_err(e.to_string()),
        ErrorKind::Resource => ResourceError::new_err(e.to_string()),
    }
}

fn to_matrix(rows: &Rows) -> Result<ComplexMatrix, Error> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse("matrix rows must be non-empty and of equal length".into()));
    }
    Ok(ComplexMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn to_rows(m: &ComplexMatrix) -> Rows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn to_dict<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| py_err(e.into()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn state(rho: Option<Rows>, dim: usize) -> PyResult<DensityOperator> {
    match rho {
        None => Ok(DensityOperator::maximally_mixed(dim)),
        Some(r) => DensityOperator::new(to_matrix(&r).map_err(py_err)?).map_err(py_err),
    }
}

#[pyclass(name = "KrausChannel", module = "qcap", frozen)]
struct PyChannel {
    inner: qcap_core::KrausChannel,
}

fn wrap(r: qcap_core::Result<qcap_core::KrausChannel>) -> PyResult<PyChannel> {
    r.map(|inner| PyChannel { inner }).map_err(py_err)
}

#[pymethods]
impl PyChannel {
    #[new]
    #[pyo3(signature = (kraus, name=None))]
    fn new(kraus: Vec<Rows>, name: Option<String>) -> PyResult<Self> {
        let ops = kraus
            .iter()
            .map(to_matrix)
            .collect::<Result<Vec<_>, _>>()
            .map_err(py_err)?;
        let ch = qcap_core::KrausChannel::new(ops).map_err(py_err)?;
        Ok(PyChannel {
            inner: match name {
                Some(n) => ch.with_name(n),
                None => ch,
            },
        })
    }

    /// Parse `name:params`, e.g. `"depolarizing:0.3,3"`.
    #[staticmethod]
    fn builtin(spec: &str) -> PyResult<Self> {
        wrap(channels::make_channel(spec))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        wrap(qcap_core::KrausChannel::from_json(text))
    }

    #[staticmethod]
    fn identity(dim: usize) -> PyResult<Self> {
        wrap(qcap_core::KrausChannel::identity(dim))
    }

    #[staticmethod]
    fn phase_flip(p: f64) -> PyResult<Self> {
        wrap(qcap_core::KrausChannel::phase_flip(p))
    }

    #[staticmethod]
    #[pyo3(signature = (p, dim=2))]
    fn depolarizing(p: f64, dim: usize) -> PyResult<Self> {
        wrap(qcap_core::KrausChannel::depolarizing(p, dim))
    }

    #[staticmethod]
    fn amplitude_damping(gamma: f64) -> PyResult<Self> {
        wrap(qcap_core::KrausChannel::amplitude_damping(gamma))
    }

    #[staticmethod]
    fn haar_random(input_dim: usize, output_dim: usize, kraus_count: usize, seed: u64) -> PyResult<Self> {
        wrap(
            Builtin::HaarRandom {
                input_dim,
                output_dim,
                kraus_count,
                seed,
            }
            .build(),
        )
    }

    #[staticmethod]
    fn haar_random_unitary(dim: usize, count: usize, seed: u64) -> PyResult<Self> {
        wrap(Builtin::HaarRandomUnitary { dim, count, seed }.build())
    }

    #[getter]
    fn name(&self) -> Option<String> {
        self.inner.name().map(String::from)
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    #[getter]
    fn output_dim(&self) -> usize {
        self.inner.output_dim()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "KrausChannel(name={:?}, {}->{}, {} operators)",
            self.inner.name().unwrap_or(""),
            self.inner.input_dim(),
            self.inner.output_dim(),
            self.inner.len()
        )
    }

    fn kraus(&self) -> Vec<Rows> {
        self.inner.kraus().iter().map(to_rows).collect()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    fn minimal_length(&self) -> usize {
        self.inner.minimal_length()
    }

    fn is_trace_preserving(&self) -> bool {
        self.inner.is_trace_preserving()
    }

    fn diagonalize(&self) -> Self {
        PyChannel {
            inner: self.inner.diagonalize(),
        }
    }

    fn tensor_power(&self, n: usize) -> PyResult<Self> {
        wrap(self.inner.tensor_power(n, &Limits::default()))
    }

    /// Image of a density matrix.
    fn apply(&self, rho: Rows) -> PyResult<Rows> {
        let m = to_matrix(&rho).map_err(py_err)?;
        self.inner.apply_matrix(&m).map(|out| to_rows(&out)).map_err(py_err)
    }

    fn info(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_dict(py, &channels::classify(&self.inner).map_err(py_err)?)
    }
}

#[pyclass(name = "CodeSubspace", module = "qcap", frozen)]
struct PyCode {
    inner: CodeSubspace,
}

#[pymethods]
impl PyCode {
    /// Columns of `basis` must be orthonormal.
    #[new]
    fn new(basis: Rows) -> PyResult<Self> {
        let m = to_matrix(&basis).map_err(py_err)?;
        CodeSubspace::new(m).map(|inner| PyCode { inner }).map_err(py_err)
    }

    #[staticmethod]
    fn standard(ambient_dim: usize, code_dim: usize) -> PyResult<Self> {
        CodeSubspace::standard(ambient_dim, code_dim)
            .map(|inner| PyCode { inner })
            .map_err(py_err)
    }

    /// Haar-random code; the same seed always gives the same subspace.
    #[staticmethod]
    fn random(ambient_dim: usize, code_dim: usize, seed: u64) -> PyResult<Self> {
        random_coding::sample_code(ambient_dim, code_dim, &mut stream_rng(seed, 0))
            .map(|inner| PyCode { inner })
            .map_err(py_err)
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    #[getter]
    fn code_dim(&self) -> usize {
        self.inner.code_dim()
    }

    fn basis(&self) -> Rows {
        to_rows(self.inner.basis())
    }

    fn __repr__(&self) -> String {
        format!(
            "CodeSubspace({} in {})",
            self.inner.code_dim(),
            self.inner.ambient_dim()
        )
    }
}

/// Lower bound on the recovery-optimised entanglement fidelity, both forms.
#[pyfunction]
fn fidelity_bound(py: Python<'_>, code: &PyCode, channel: &PyChannel) -> PyResult<Py<PyAny>> {
    let r = code_fidelity::fidelity_lower_bound_states(&code.inner, &channel.inner).map_err(py_err)?;
    to_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (channel, rho=None))]
fn entanglement_fidelity(channel: &PyChannel, rho: Option<Rows>) -> PyResult<f64> {
    let rho = state(rho, channel.inner.input_dim())?;
    code_fidelity::entanglement_fidelity(&rho, &channel.inner).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (channel, rho=None))]
fn entropy_exchange(channel: &PyChannel, rho: Option<Rows>) -> PyResult<f64> {
    let rho = state(rho, channel.inner.input_dim())?;
    channels::entropy_exchange(&rho, &channel.inner).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (channel, rho=None))]
fn coherent_information(channel: &PyChannel, rho: Option<Rows>) -> PyResult<f64> {
    let rho = state(rho, channel.inner.input_dim())?;
    channels::coherent_information(&rho, &channel.inner).map_err(py_err)
}

#[pyfunction]
fn exact_average_d2(channel: &PyChannel, code_dim: usize) -> PyResult<f64> {
    random_coding::exact_average_d2(&channel.inner, code_dim).map_err(py_err)
}

#[pyfunction]
fn averaged_fidelity_bound(channel: &PyChannel, code_dim: usize) -> f64 {
    random_coding::averaged_fidelity_bound(&channel.inner, code_dim)
}

/// Monte Carlo over Haar codes next to the closed forms.
#[pyfunction]
fn ensemble(py: Python<'_>, channel: &PyChannel, code_dim: usize, samples: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let ch = &channel.inner;
    let r = py
        .detach(|| {
            let spec = EnsembleSpec::new(ch.input_dim(), code_dim, samples, seed)?;
            random_coding::ensemble_report(ch, &spec)
        })
        .map_err(py_err)?;
    to_dict(py, &r)
}

#[pyfunction]
fn haar_moments(py: Python<'_>, ambient_dim: usize, code_dim: usize, samples: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let r = py
        .detach(|| random_coding::haar_moment_suite(ambient_dim, code_dim, samples, seed))
        .map_err(py_err)?;
    to_dict(py, &r)
}

#[pyfunction]
fn typical_sequences(py: Python<'_>, probabilities: Vec<f64>, n: usize, epsilon: f64) -> PyResult<Py<PyAny>> {
    let p = ProbabilityDistribution::new(probabilities).map_err(py_err)?;
    let spec = TypicalSetSpec::new(p, n, epsilon).map_err(py_err)?;
    to_dict(py, &typicality::typical_sequences(&spec).map_err(py_err)?)
}

#[pyfunction]
fn reduced_channel(py: Python<'_>, channel: &PyChannel, n: usize, epsilon: f64) -> PyResult<Py<PyAny>> {
    let limits = Limits::default();
    let r = py
        .detach(|| ReducedChannel::new(&channel.inner, n, epsilon, &limits)?.report(&limits))
        .map_err(py_err)?;
    to_dict(py, &r)
}

#[pyfunction]
fn rate_demo(
    py: Python<'_>,
    channel: &PyChannel,
    rate: f64,
    epsilon: f64,
    n_values: Vec<usize>,
) -> PyResult<Py<PyAny>> {
    let r = py
        .detach(|| typicality::achievable_rate_demo(&channel.inner, rate, epsilon, &n_values, &Limits::default()))
        .map_err(py_err)?;
    to_dict(py, &r)
}

#[pymodule]
fn qcap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChannel>()?;
    m.add_class::<PyCode>()?;
    m.add("DomainError", m.py().get_type::<DomainError>())?;
    m.add("ResourceError", m.py().get_type::<ResourceError>())?;
    m.add_function(wrap_pyfunction!(fidelity_bound, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement_fidelity, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_exchange, m)?)?;
    m.add_function(wrap_pyfunction!(coherent_information, m)?)?;
    m.add_function(wrap_pyfunction!(exact_average_d2, m)?)?;
    m.add_function(wrap_pyfunction!(averaged_fidelity_bound, m)?)?;
    m.add_function(wrap_pyfunction!(ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(haar_moments, m)?)?;
    m.add_function(wrap_pyfunction!(typical_sequences, m)?)?;
    m.add_function(wrap_pyfunction!(reduced_channel, m)?)?;
    m.add_function(wrap_pyfunction!(rate_demo, m)?)?;
    Ok(())
}
