//! Python bindings. Structured results come back as plain dicts and lists.

use gisk_core::continuity::{binomial_sequence, eq48_critical_ell, rational, uniform_grid, verify_path, PathKind};
use gisk_core::dhym::{dhym_coefficients as expand, reduce_coefficients, DhymSpec};
use gisk_core::figures::{figure_data, FigureKind, FigureParams};
use gisk_core::proplab::{run_named_suite, SuiteConfig};
use gisk_core::sampling::{rng_from_seed, sample_level_set};
use gisk_core::stability::{check_stability, cone_membership, dominance, in_polyhedron, is_cy, phi, psi, tee};
use gisk_core::symmfunc::{f_eval, h_eval};
use gisk_core::toymodel::{integrability_residual, intersection_numbers, subsolution_slack, D0Sample};
use gisk_core::{FullCoeffs, GiskError};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: GiskError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Serializes through JSON so nested reports arrive as native Python objects.
fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Reduced coefficients `(d_{n-2}, ..., d_0)` of `λ_1⋯λ_n = Σ d_k σ_k(λ)`.
#[pyclass(name = "Coeffs", module = "gisk", from_py_object)]
#[derive(Clone)]
struct PyCoeffs {
    inner: gisk_core::GiskCoeffs,
}

#[pymethods]
impl PyCoeffs {
    #[new]
    fn new(n: usize, d: Vec<f64>) -> PyResult<Self> {
        Ok(PyCoeffs {
            inner: gisk_core::GiskCoeffs::new(n, d).map_err(err)?,
        })
    }

    /// Reduce full coefficients `(c_{n-1}, ..., c_0)`; returns `(Coeffs, shift)`.
    #[staticmethod]
    fn from_full(n: usize, c: Vec<f64>) -> PyResult<(Self, f64)> {
        let r = reduce_coefficients(&FullCoeffs::new(n, c).map_err(err)?).map_err(err)?;
        Ok((PyCoeffs { inner: r.reduced }, r.shift))
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn d(&self) -> Vec<f64> {
        self.inner.d.clone()
    }

    /// Full stability certificate as a dict.
    fn check<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &check_stability(&self.inner))
    }

    fn status(&self) -> String {
        check_stability(&self.inner).status.to_string()
    }

    fn phi(&self) -> PyResult<PyRoots> {
        Ok(PyRoots {
            inner: phi(&self.inner).map_err(err)?,
        })
    }

    /// Largest admissible scaling; `inf` on the Monge–Ampère stratum.
    fn tee(&self) -> PyResult<f64> {
        Ok(tee(&self.inner).map_err(err)?.as_f64())
    }

    fn is_cy(&self) -> bool {
        is_cy(&self.inner)
    }

    /// `σ_n(λ) − Σ d_k σ_k(λ)`.
    fn f(&self, lam: Vec<f64>) -> PyResult<f64> {
        f_eval(&self.inner, &lam).map_err(err)
    }

    /// `(h, gradient, hessian)` of `Σ d_k σ_k / σ_n` at `λ`.
    fn h(&self, lam: Vec<f64>) -> PyResult<(f64, Vec<f64>, Vec<Vec<f64>>)> {
        let v = h_eval(&self.inner, &lam).map_err(err)?;
        Ok((v.h, v.grad, v.hess))
    }

    #[pyo3(signature = (lam, order = 1))]
    fn in_cone(&self, lam: Vec<f64>, order: usize) -> PyResult<bool> {
        cone_membership(&self.inner, &lam, order).map_err(err)
    }

    /// Whether this vector's first cone contains that of `other`.
    fn dominates(&self, other: &PyCoeffs) -> PyResult<bool> {
        Ok(dominance(&self.inner, &other.inner).map_err(err)?.dominates)
    }

    fn in_polyhedron_of(&self, d: &PyCoeffs) -> PyResult<bool> {
        in_polyhedron(&self.inner, &d.inner).map_err(err)
    }

    /// `count` seeded points on the boundary of the stable component.
    #[pyo3(signature = (count, seed = 42))]
    fn sample_level_set(&self, count: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        let x0 = phi(&self.inner).map_err(err)?.x0();
        let mut rng = rng_from_seed(seed);
        (0..count)
            .map(|_| {
                sample_level_set(&mut rng, &self.inner, x0, 10_000)
                    .ok_or_else(|| PyValueError::new_err("level-set sampler exhausted its attempts"))
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Coeffs(n={}, d={:?})", self.inner.n, self.inner.d)
    }
}

/// Root tuple `(x_{n-2}, ..., x_0)` of the derivative chain.
#[pyclass(name = "Roots", module = "gisk", from_py_object)]
#[derive(Clone)]
struct PyRoots {
    inner: gisk_core::RootTuple,
}

#[pymethods]
impl PyRoots {
    #[new]
    fn new(n: usize, x: Vec<f64>) -> PyResult<Self> {
        Ok(PyRoots {
            inner: gisk_core::RootTuple::new(n, x).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.x.clone()
    }

    #[getter]
    fn x0(&self) -> f64 {
        self.inner.x0()
    }

    #[getter]
    fn x1(&self) -> f64 {
        self.inner.x1()
    }

    fn psi(&self) -> PyResult<PyCoeffs> {
        Ok(PyCoeffs {
            inner: psi(&self.inner).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("Roots(n={}, x={:?})", self.inner.n, self.inner.x)
    }
}

/// Constant-eigenvalue model with a weighted `d_0` field of `(value, weight)` pairs.
#[pyclass(name = "ToyModel", module = "gisk", from_py_object)]
#[derive(Clone)]
struct PyToyModel {
    inner: gisk_core::ToyModel,
}

#[pymethods]
impl PyToyModel {
    #[new]
    #[pyo3(signature = (n, mu, d0, volume = None))]
    fn new(n: usize, mu: Vec<f64>, d0: Vec<(f64, f64)>, volume: Option<f64>) -> PyResult<Self> {
        let field: Vec<D0Sample> = d0.into_iter().map(|(value, weight)| D0Sample { value, weight }).collect();
        let total = volume.unwrap_or_else(|| field.iter().map(|s| s.weight).sum());
        Ok(PyToyModel {
            inner: gisk_core::ToyModel::new(n, mu, field, total).map_err(err)?,
        })
    }

    /// Intersection numbers `Ω_0, ..., Ω_n`.
    fn omega(&self) -> Vec<f64> {
        intersection_numbers(&self.inner).omega
    }

    fn integrability_residual(&self, d: &PyCoeffs) -> PyResult<f64> {
        integrability_residual(&self.inner, &d.inner).map_err(err)
    }

    /// Slack `κ` keeping `μ − 2κ` in the first cone of `d`.
    fn subsolution_slack(&self, d: &PyCoeffs) -> PyResult<f64> {
        Ok(subsolution_slack(&self.inner, &d.inner).map_err(err)?.kappa)
    }

    /// Build and check a continuity path; returns the report as a dict.
    #[pyo3(signature = (d, which = "thm41", grid = 101, ell = None))]
    fn path<'py>(
        &self,
        py: Python<'py>,
        d: &PyCoeffs,
        which: &str,
        grid: usize,
        ell: Option<f64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let kind = match which {
            "thm41" => PathKind::Thm41,
            "p42" => PathKind::P42,
            "eq48" => PathKind::Eq48 {
                ell: ell.unwrap_or_else(|| eq48_critical_ell(&d.inner)),
            },
            other => return Err(PyValueError::new_err(format!("unknown path {other:?}"))),
        };
        let report = verify_path(&d.inner, &self.inner, kind, &uniform_grid(grid)).map_err(err)?;
        to_py(py, &report)
    }
}

/// Unreduced coefficients `(c_{n-1}, ..., c_0)` of the phase equation at angle `theta`.
#[pyfunction]
fn dhym_coefficients(n: usize, theta: f64) -> PyResult<Vec<f64>> {
    Ok(expand(DhymSpec { n, theta }).map_err(err)?.c)
}

/// The weights `a_0..a_{n-1}` at rational `t = num/den`, by recurrence, as fraction strings.
#[pyfunction]
fn binomial_weights(n: usize, num: i64, den: i64) -> PyResult<Vec<String>> {
    if den == 0 {
        return Err(PyValueError::new_err("zero denominator"));
    }
    let seq = binomial_sequence(n, &rational(num, den)).map_err(err)?;
    Ok(seq.recurrence.iter().map(|r| r.to_string()).collect())
}

/// Run one property suite and return its report.
#[pyfunction]
#[pyo3(signature = (name, seed = 42, samples = 100, draws = 2, dims = vec![3, 4]))]
fn run_suite<'py>(
    py: Python<'py>,
    name: &str,
    seed: u64,
    samples: usize,
    draws: usize,
    dims: Vec<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = SuiteConfig {
        master_seed: seed,
        samples_per_case: samples,
        coeff_draws: draws,
        dims,
        ..SuiteConfig::default()
    };
    let result = py.detach(|| run_named_suite(name, &cfg)).map_err(err)?;
    to_py(py, &result)
}

/// Curve samples for `map21`, `polyhedron22` or `path41`.
#[pyfunction]
#[pyo3(signature = (which, points = 100))]
fn figure<'py>(py: Python<'py>, which: &str, points: usize) -> PyResult<Bound<'py, PyAny>> {
    let kind: FigureKind = which.parse().map_err(err)?;
    let mut params = FigureParams::default_for(kind);
    params.points = points;
    to_py(py, &figure_data(kind, &params).map_err(err)?)
}

#[pymodule]
fn gisk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCoeffs>()?;
    m.add_class::<PyRoots>()?;
    m.add_class::<PyToyModel>()?;
    m.add_function(wrap_pyfunction!(dhym_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_weights, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add_function(wrap_pyfunction!(figure, m)?)?;
    Ok(())
}
