//! Python bindings. Records come back as plain dicts.

use std::path::PathBuf;

use pyo3::exceptions::{PyArithmeticError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde_json::Value;

use zetalab_core as core;
use core::eli::{
    eli_bounds, min_combination_brute, min_combination_mitm, pigeonhole_small_combination,
    EliInstance,
};
use core::fejer::SmoothingPlan;
use core::random_model::{RandomModelConfig, SampleSet};
use core::tail::{TailSide, ETA_CUTOFF};
use core::zero_data::StepPolicy;
use core::{Error, WeightKind};

fn err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Io(_) => PyOSError::new_err(msg),
        Error::Precision(_) | Error::ZeroCombination { .. } | Error::Overflow(_) => {
            PyArithmeticError::new_err(msg)
        }
        Error::Quadrature { .. } | Error::Budget(_) | Error::Json(_) => PyRuntimeError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(a) => {
            let l = PyList::empty(py);
            for x in a {
                l.append(to_py(py, x)?)?;
            }
            l.into_any()
        }
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any()
        }
    })
}

fn record<'py, T: serde::Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(v).map_err(|e| err(e.into()))?;
    to_py(py, &v)
}

fn kind(name: &str) -> PyResult<WeightKind> {
    match name.replace('-', "_").as_str() {
        "pnt_exact" => Ok(WeightKind::PntExact),
        "pnt_sine" => Ok(WeightKind::PntSine),
        "mobius" => Ok(WeightKind::Mobius),
        other => Err(PyValueError::new_err(format!("unknown weight kind {other:?}"))),
    }
}

fn side(name: &str) -> PyResult<TailSide> {
    match name {
        "upper" => Ok(TailSide::Upper),
        "lower" => Ok(TailSide::Lower),
        other => Err(PyValueError::new_err(format!("unknown side {other:?}"))),
    }
}

/// Ordinates of zeros of ζ on the critical line.
#[pyclass(name = "ZeroTable", frozen)]
struct PyZeroTable(core::ZeroTable);

#[pymethods]
impl PyZeroTable {
    #[staticmethod]
    #[pyo3(signature = (t_max, target_error = 1e-10, cached = true))]
    fn compute(t_max: f64, target_error: f64, cached: bool) -> PyResult<Self> {
        let z = if cached {
            core::zero_data::compute_zeros_cached(t_max, target_error)
        } else {
            core::compute_zeros(t_max, target_error)
        };
        z.map(Self).map_err(err)
    }

    #[staticmethod]
    fn load(path: PathBuf, t_max: f64) -> PyResult<Self> {
        core::load_zero_table(&path, t_max).map(Self).map_err(err)
    }

    /// Copy with `|ζ'(ρ)|` attached.
    fn with_zprime_moduli(&self) -> PyResult<Self> {
        core::zero_data::zeta_prime_moduli(&self.0, StepPolicy::Adaptive)
            .map(Self)
            .map_err(err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.0.save(&path).map_err(err)
    }

    #[getter]
    fn ordinates(&self) -> Vec<f64> {
        self.0.ordinates().to_vec()
    }

    #[getter]
    fn zprime_moduli(&self) -> Option<Vec<f64>> {
        self.0.zprime_moduli().map(<[f64]>::to_vec)
    }

    #[getter]
    fn abs_error(&self) -> f64 {
        self.0.abs_error()
    }

    #[getter]
    fn coverage(&self) -> f64 {
        self.0.coverage()
    }

    #[getter]
    fn digest(&self) -> String {
        self.0.digest()
    }

    fn count_upto(&self, t: f64) -> usize {
        self.0.count_upto(t)
    }

    fn count_check<'py>(&self, py: Python<'py>, t: f64) -> PyResult<Bound<'py, PyAny>> {
        record(py, &core::zero_data::count_check(&self.0, t).map_err(err)?)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("ZeroTable(len={}, coverage={})", self.0.len(), self.0.coverage())
    }
}

/// Weights `r_γ = |r_γ| e^{iβ_γ}` for one of the error terms.
#[pyclass(name = "WeightSequence", frozen)]
struct PyWeights(core::WeightSequence);

#[pymethods]
impl PyWeights {
    #[new]
    fn new(kind_name: &str, table: &PyZeroTable) -> PyResult<Self> {
        core::make_weights(kind(kind_name)?, &table.0).map(Self).map_err(err)
    }

    #[getter]
    fn ordinates(&self) -> Vec<f64> {
        self.0.ordinates().to_vec()
    }

    #[getter]
    fn moduli(&self) -> Vec<f64> {
        self.0.moduli().to_vec()
    }

    #[getter]
    fn phases(&self) -> Vec<f64> {
        self.0.phases().to_vec()
    }

    /// `H(T) = Σ_{γ≤T} |r_γ|`.
    fn h(&self, cutoff: f64) -> f64 {
        self.0.h(cutoff)
    }

    fn eval_f(&self, t: f64, cutoff: f64) -> PyResult<f64> {
        self.0.eval_f(t, cutoff).map_err(err)
    }

    fn eval_phi(&self, x: f64, cutoff: f64) -> PyResult<f64> {
        self.0.eval_phi(x, cutoff).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyfunction]
fn psi(x: f64) -> PyResult<f64> {
    core::sieve::psi(x).map_err(err)
}

#[pyfunction]
fn mertens(x: f64) -> PyResult<i64> {
    core::sieve::mertens(x).map_err(err)
}

#[pyfunction]
fn smooth_count(t: f64) -> f64 {
    core::zero_data::smooth_count(t)
}

#[pyfunction]
fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    core::zero_sums::log_grid(lo, hi, n)
}

/// Fejér-smoothed `F` at `t`; returns a dict with value and error parts.
#[pyfunction]
#[pyo3(signature = (weights, t, cutoff, z, y, tol = 1e-8))]
fn smooth_f<'py>(
    py: Python<'py>,
    weights: &PyWeights,
    t: f64,
    cutoff: f64,
    z: f64,
    y: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let plan = SmoothingPlan::new(cutoff, z, tol).map_err(err)?;
    record(py, &core::fejer::smooth_f(&weights.0, t, &plan, y).map_err(err)?)
}

#[pyfunction]
fn bessel_i0(t: f64) -> PyResult<f64> {
    core::random_model::bessel_i0(t).map_err(err)
}

#[pyfunction]
fn log_bessel_i0(t: f64) -> f64 {
    core::random_model::log_bessel_i0(t)
}

#[pyfunction]
#[pyo3(signature = (gammas, abs_error = 1e-10))]
fn random_moment(gammas: Vec<f64>, abs_error: f64) -> PyResult<f64> {
    core::random_model::random_moment(&gammas, abs_error).map_err(err)
}

#[pyfunction]
fn exact_log_mgf(weights: &PyWeights, cutoff: f64, s: f64) -> PyResult<f64> {
    core::random_model::exact_log_mgf(&weights.0, cutoff, s).map_err(err)
}

/// Draws from the random model; the values depend only on the seed.
#[pyfunction]
#[pyo3(signature = (weights, cutoff, n_samples, seed))]
fn sample_model(weights: &PyWeights, cutoff: f64, n_samples: usize, seed: u64) -> PyResult<Vec<f64>> {
    let cfg = RandomModelConfig { t: cutoff, n_samples, seed };
    let s: SampleSet = core::random_model::sample_model(&weights.0, cfg).map_err(err)?;
    Ok(s.values)
}

#[pyfunction]
#[pyo3(signature = (weights, cutoff, x, levels, side_name = "upper"))]
fn empirical_tails<'py>(
    py: Python<'py>,
    weights: &PyWeights,
    cutoff: f64,
    x: f64,
    levels: Vec<f64>,
    side_name: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let grid = core::tail::tail_grid(&weights.0, cutoff, x).map_err(err)?;
    let t = core::tail::empirical_tails(&weights.0, cutoff, &levels, &grid, side(side_name)?)
        .map_err(err)?;
    record(py, &t)
}

#[pyfunction]
fn predicted_tail(v: f64, eta: f64) -> PyResult<f64> {
    core::tail::predicted_tail(v, eta).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (tol = 1e-10, cutoff = ETA_CUTOFF))]
fn eta<'py>(py: Python<'py>, tol: f64, cutoff: f64) -> PyResult<Bound<'py, PyAny>> {
    record(py, &core::tail::eta_convergent(tol, cutoff).map_err(err)?)
}

/// Smallest `|Σ ℓ_γ γ|` over the first `m` ordinates with `|ℓ_γ| ≤ l`.
#[pyfunction]
#[pyo3(signature = (table, m, l, method = "mitm"))]
fn eli_search<'py>(
    py: Python<'py>,
    table: &PyZeroTable,
    m: usize,
    l: i64,
    method: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let inst = EliInstance::from_table(&table.0, m, l).map_err(err)?;
    let r = match method {
        "brute" => min_combination_brute(&inst),
        "mitm" => min_combination_mitm(&inst),
        "pigeonhole" => pigeonhole_small_combination(&inst),
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    }
    .map_err(err)?;
    let out = record(py, &r)?;
    out.set_item("value", r.value())?;
    Ok(out)
}

#[pyfunction]
#[pyo3(signature = (t, epsilon = 0.1))]
fn eli_bounds_at<'py>(py: Python<'py>, t: f64, epsilon: f64) -> PyResult<Bound<'py, PyAny>> {
    record(py, &eli_bounds(t, epsilon).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (p_max = 100_000, k_max = 60))]
fn ng_constant_b<'py>(py: Python<'py>, p_max: u64, k_max: usize) -> PyResult<Bound<'py, PyAny>> {
    record(py, &core::constants::ng_constant_b(p_max, k_max).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (tol = 1e-12))]
fn zeta_prime_minus_one<'py>(py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    record(py, &core::constants::zeta_prime_minus_one(tol).map_err(err)?)
}

#[pyfunction]
fn montgomery_limit() -> f64 {
    core::constants::montgomery_limit()
}

#[pymodule]
fn zetalab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyZeroTable>()?;
    m.add_class::<PyWeights>()?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    m.add_function(wrap_pyfunction!(mertens, m)?)?;
    m.add_function(wrap_pyfunction!(smooth_count, m)?)?;
    m.add_function(wrap_pyfunction!(log_grid, m)?)?;
    m.add_function(wrap_pyfunction!(smooth_f, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_i0, m)?)?;
    m.add_function(wrap_pyfunction!(log_bessel_i0, m)?)?;
    m.add_function(wrap_pyfunction!(random_moment, m)?)?;
    m.add_function(wrap_pyfunction!(exact_log_mgf, m)?)?;
    m.add_function(wrap_pyfunction!(sample_model, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_tails, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_tail, m)?)?;
    m.add_function(wrap_pyfunction!(eta, m)?)?;
    m.add_function(wrap_pyfunction!(eli_search, m)?)?;
    m.add_function(wrap_pyfunction!(eli_bounds_at, m)?)?;
    m.add_function(wrap_pyfunction!(ng_constant_b, m)?)?;
    m.add_function(wrap_pyfunction!(zeta_prime_minus_one, m)?)?;
    m.add_function(wrap_pyfunction!(montgomery_limit, m)?)?;
    Ok(())
}
