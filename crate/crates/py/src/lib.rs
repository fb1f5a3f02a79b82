//! Python bindings: correlation boxes, classification, Bell values and the
//! feasibility subproblems. Structured results come back as plain dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use oscone::boxes::{self, ClassifyOptions, Table};
use oscone::numerics::{GeneralMatrix, HermMatrix, C64};
use oscone::opsys::{self, LInfVec, NC2Coeff};
use oscone::tensorlab::{self, BoxMatrix, FactorWitness, MatTrigPoly};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serializes through JSON so that Python receives dicts and lists.
fn to_python<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_error)?;
    py.import("json")?.call_method1("loads", (text,))
}

pub fn general_matrix(rows: &[Vec<C64>]) -> Result<GeneralMatrix, String> {
    GeneralMatrix::from_rows(rows).map_err(|e| e.to_string())
}

pub fn herm_matrix(rows: &[Vec<C64>]) -> Result<HermMatrix, String> {
    HermMatrix::new(general_matrix(rows)?).map_err(|e| e.to_string())
}

pub fn four_by_four(rows: &[Vec<f64>]) -> Result<[[f64; 4]; 4], String> {
    let bad = || format!("expected a 4x4 matrix, got {} rows", rows.len());
    let rows: [Vec<f64>; 4] = rows.to_vec().try_into().map_err(|_| bad())?;
    let mut out = [[0.0; 4]; 4];
    for (dst, src) in out.iter_mut().zip(&rows) {
        *dst = src.as_slice().try_into().map_err(|_| bad())?;
    }
    Ok(out)
}

/// A two-input, two-output correlation box `p(a, b | x, y)`.
#[pyclass(name = "CorrelationBox", module = "pyoscone", frozen)]
pub struct PyBox {
    inner: boxes::CorrelationBox,
}

#[pymethods]
impl PyBox {
    /// Builds a box from `p[a][b][x][y]`.
    #[new]
    fn new(p: Table) -> PyResult<Self> {
        Ok(Self { inner: boxes::CorrelationBox::new(p).map_err(value_error)? })
    }

    /// Builds a box from the 4×4 matrix with rows `2x + a`, columns `2y + b`.
    #[staticmethod]
    fn from_matrix(m: Vec<Vec<f64>>) -> PyResult<Self> {
        let q = four_by_four(&m).map_err(value_error)?;
        Ok(Self { inner: boxes::CorrelationBox::from_matrix(&q).map_err(value_error)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: boxes::read_box_json(text).map_err(value_error)?.correlation })
    }

    #[staticmethod]
    fn pr() -> Self {
        Self { inner: boxes::CorrelationBox::pr() }
    }

    #[staticmethod]
    fn uniform() -> Self {
        Self { inner: boxes::CorrelationBox::uniform() }
    }

    #[staticmethod]
    fn deterministic(f: [usize; 2], g: [usize; 2]) -> Self {
        Self { inner: boxes::CorrelationBox::deterministic(f, g) }
    }

    fn table(&self) -> Table {
        *self.inner.table()
    }

    fn matrix(&self) -> [[f64; 4]; 4] {
        *self.inner.to_matrix().entries()
    }

    fn prob(&self, a: usize, b: usize, x: usize, y: usize) -> PyResult<f64> {
        if [a, b, x, y].iter().any(|&i| i > 1) {
            return Err(value_error("indices must be 0 or 1"));
        }
        Ok(self.inner.prob(a, b, x, y))
    }

    fn correlator(&self, x: usize, y: usize) -> f64 {
        self.inner.correlator(x, y)
    }

    fn chsh(&self) -> f64 {
        boxes::chsh_value(&self.inner)
    }

    fn to_json(&self) -> String {
        boxes::write_box_json(&self.inner)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("CorrelationBox({:?})", self.inner.to_matrix().entries())
    }
}

fn options(tol: f64, dim: usize, restarts: usize, seed: u64) -> ClassifyOptions {
    ClassifyOptions { tol, dim, restarts, seed }
}

/// Full classification report as a dict; `summary` holds the one-line verdict.
#[pyfunction]
#[pyo3(signature = (b, tol = 1e-9, dim = 2, restarts = 20, seed = 0))]
fn classify<'py>(py: Python<'py>, b: &PyBox, tol: f64, dim: usize, restarts: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let report = boxes::classify(&b.inner, &options(tol, dim, restarts, seed));
    let out = to_python(py, &report)?;
    out.set_item("summary", report.summary())?;
    Ok(out)
}

/// Classification of a matrix with any positive common block sum.
#[pyfunction]
#[pyo3(signature = (m, tol = 1e-9, dim = 2, restarts = 20, seed = 0))]
fn classify_matrix<'py>(
    py: Python<'py>,
    m: Vec<Vec<f64>>,
    tol: f64,
    dim: usize,
    restarts: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let q = four_by_four(&m).map_err(value_error)?;
    let report = boxes::classify_matrix(&q, &options(tol, dim, restarts, seed));
    let out = to_python(py, &report)?;
    out.set_item("summary", report.summary())?;
    Ok(out)
}

/// Both sides of the square-root Bell inequality for a balanced matrix.
#[pyfunction]
fn sqrt_bell_value<'py>(py: Python<'py>, m: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyAny>> {
    let b = BoxMatrix::new(four_by_four(&m).map_err(value_error)?).map_err(value_error)?;
    let v = tensorlab::sqrt_bell_value(&b).map_err(value_error)?;
    let out = to_python(py, &v)?;
    out.set_item("violated", v.any_violated())?;
    Ok(out)
}

/// `q_ij = Tr(X_i Y_j)` from eight Hermitian matrices.
#[pyfunction]
fn max_cone_construct(x: [Vec<Vec<C64>>; 4], y: [Vec<Vec<C64>>; 4]) -> PyResult<[[f64; 4]; 4]> {
    let conv = |ms: &[Vec<Vec<C64>>; 4]| -> PyResult<[HermMatrix; 4]> {
        let v: Vec<HermMatrix> = ms.iter().map(|m| herm_matrix(m)).collect::<Result<_, _>>().map_err(value_error)?;
        Ok(v.try_into().expect("four matrices"))
    };
    let w = FactorWitness::new(conv(&x)?, conv(&y)?).map_err(value_error)?;
    Ok(*tensorlab::max_cone_construct(&w).map_err(value_error)?.entries())
}

/// Seesaw lower bound on the quantum value of a functional on the matrix
/// picture; defaults to CHSH.
#[pyfunction]
#[pyo3(signature = (functional = None, dim = 2, restarts = 20, seed = 0))]
fn seesaw_maximize<'py>(
    py: Python<'py>,
    functional: Option<Vec<Vec<f64>>>,
    dim: usize,
    restarts: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let f = match functional {
        Some(m) => four_by_four(&m).map_err(value_error)?,
        None => boxes::chsh_functional(),
    };
    let r = boxes::seesaw_maximize(&f, dim, restarts, seed).map_err(value_error)?;
    let b = boxes::strategy_to_box(&r.strategy).map_err(value_error)?;
    let out = to_python(py, &r)?;
    out.set_item("box", PyBox { inner: b })?;
    Ok(out)
}

#[pyfunction]
fn numerical_radius(t: Vec<Vec<C64>>) -> PyResult<f64> {
    oscone::numerics::numerical_radius(&general_matrix(&t).map_err(value_error)?).map_err(value_error)
}

/// Solver report for `[[A, T], [T*, I - A]] ⪰ 0`.
#[pyfunction]
fn ando_split<'py>(py: Python<'py>, t: Vec<Vec<C64>>) -> PyResult<Bound<'py, PyAny>> {
    let r = opsys::ando_split(&general_matrix(&t).map_err(value_error)?).map_err(value_error)?;
    to_python(py, &r)
}

/// Solver report for positivity of `c0·1 + c1·h1 + c2·h2` with scalar coefficients.
#[pyfunction]
#[pyo3(signature = (c0, c1, c2, delta = 0.0))]
fn nc2_positivity<'py>(py: Python<'py>, c0: f64, c1: f64, c2: f64, delta: f64) -> PyResult<Bound<'py, PyAny>> {
    to_python(py, &opsys::nc2_positivity(&NC2Coeff::scalar(c0, c1, c2), delta))
}

#[pyfunction]
fn gamma_quotient(x: [f64; 4]) -> PyResult<[f64; 3]> {
    let c = opsys::gamma_quotient(&LInfVec::new(x.to_vec())).map_err(value_error)?;
    Ok(c.as_scalar().expect("scalar coefficients"))
}

/// Grid minimum of the smallest eigenvalue of the two-variable polynomial `h`.
#[pyfunction]
#[pyo3(signature = (grid = 1440))]
fn torus_min_eig_h(grid: usize) -> PyResult<f64> {
    Ok(tensorlab::torus_min_eig(&MatTrigPoly::h(), grid).map_err(value_error)?.value)
}

#[pymodule]
fn pyoscone(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBox>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(classify_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(sqrt_bell_value, m)?)?;
    m.add_function(wrap_pyfunction!(max_cone_construct, m)?)?;
    m.add_function(wrap_pyfunction!(seesaw_maximize, m)?)?;
    m.add_function(wrap_pyfunction!(numerical_radius, m)?)?;
    m.add_function(wrap_pyfunction!(ando_split, m)?)?;
    m.add_function(wrap_pyfunction!(nc2_positivity, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_quotient, m)?)?;
    m.add_function(wrap_pyfunction!(torus_min_eig_h, m)?)?;
    Ok(())
}
