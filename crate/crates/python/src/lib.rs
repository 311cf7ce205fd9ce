//! Python bindings: kernels, minimization, window energies and the lattice
//! decay fit. Validation failures raise `ValueError`, numerical ones
//! `RuntimeError`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use riesz_gas::diagnostics::{lattice_decay_fit as decay_fit, LatticeOptions};
use riesz_gas::field::{truncation_rate as rate, window_energy as window, FieldContext, QuadratureGrid};
use riesz_gas::kernels::{csd_constant, g_eval};
use riesz_gas::minimize::{hamiltonian as energy, minimize_from_equilibrium, MinimizeOptions};
use riesz_gas::model::equilibrium_measure;
use riesz_gas::{Configuration, DensityField, GasModel, Hyperrectangle, Potential};

fn err(e: riesz_gas::Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

#[pyclass(name = "KernelSpec", frozen, from_py_object)]
#[derive(Clone)]
struct PyKernel(riesz_gas::KernelSpec);

#[pymethods]
impl PyKernel {
    #[staticmethod]
    fn riesz(s: f64, d: usize) -> PyResult<Self> {
        riesz_gas::KernelSpec::riesz(s, d).map(PyKernel).map_err(err)
    }

    #[staticmethod]
    fn log1d() -> Self {
        PyKernel(riesz_gas::KernelSpec::log1d())
    }

    #[staticmethod]
    fn log2d() -> Self {
        PyKernel(riesz_gas::KernelSpec::log2d())
    }

    #[getter]
    fn s(&self) -> f64 {
        self.0.s()
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.d
    }

    #[getter]
    fn k(&self) -> usize {
        self.0.k
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma
    }

    /// Kernel value `g(x)`.
    fn g(&self, x: Vec<f64>) -> PyResult<f64> {
        g_eval(&self.0, &x).map_err(err)
    }

    /// Normalization constant `c_{s,d}`.
    fn csd(&self) -> f64 {
        csd_constant(&self.0)
    }

    fn __repr__(&self) -> String {
        format!("KernelSpec(s={}, d={}, k={})", self.0.s(), self.0.d, self.0.k)
    }
}

fn config(d: usize, points: &[Vec<f64>]) -> PyResult<Configuration> {
    Configuration::from_points(d, points).map_err(err)
}

fn model(kernel: &PyKernel, a: f64, n: usize) -> PyResult<GasModel> {
    let pot = Potential::quadratic(a).map_err(err)?;
    GasModel::new(kernel.0, pot, n).map_err(err)
}

/// `H_n` of `points` under the confinement `a|x|²`.
#[pyfunction]
fn hamiltonian(kernel: &PyKernel, a: f64, points: Vec<Vec<f64>>) -> PyResult<f64> {
    let m = model(kernel, a, points.len())?;
    energy(&m, &config(kernel.0.d, &points)?).map_err(err)
}

/// Minimizes `H_n` from equilibrium samples; returns points and a summary.
#[pyfunction]
#[pyo3(signature = (kernel, n, a = 1.0, seed = 0, max_iters = None, restarts = 0))]
fn minimize<'py>(
    py: Python<'py>,
    kernel: &PyKernel,
    n: usize,
    a: f64,
    seed: u64,
    max_iters: Option<usize>,
    restarts: usize,
) -> PyResult<(Vec<Vec<f64>>, Bound<'py, PyDict>)> {
    let m = model(kernel, a, n)?;
    let mut opts = MinimizeOptions { seed, restarts, ..MinimizeOptions::default() };
    if let Some(it) = max_iters {
        opts.max_iters = it;
    }
    let (cfg, trace) = py
        .detach(|| equilibrium_measure(&m).and_then(|mu| minimize_from_equilibrium(&m, &mu, &opts)))
        .map_err(err)?;
    let info = PyDict::new(py);
    info.set_item("energy", trace.final_energy())?;
    info.set_item("iterations", trace.entries.len())?;
    info.set_item("status", format!("{:?}", trace.status))?;
    info.set_item("restart", trace.restart)?;
    Ok((cfg.to_vecs(), info))
}

/// Truncated electric energy of `charges` in the box `[lo, hi]` with an
/// optional uniform background of the given density on `[bg_lo, bg_hi]`.
#[pyfunction]
#[pyo3(signature = (kernel, charges, lo, hi, eta, background = None, density = 1.0))]
fn window_energy<'py>(
    py: Python<'py>,
    kernel: &PyKernel,
    charges: Vec<Vec<f64>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    eta: f64,
    background: Option<(Vec<f64>, Vec<f64>)>,
    density: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let d = kernel.0.d;
    let bg = match background {
        Some((bl, bh)) => {
            let b = Hyperrectangle::from_bounds(&bl, &bh).map_err(err)?;
            Some(DensityField::uniform_box(b, density).map_err(err)?)
        }
        None => None,
    };
    let ctx = FieldContext::new(kernel.0, config(d, &charges)?, bg, eta).map_err(err)?;
    let grid = QuadratureGrid::new(Hyperrectangle::from_bounds(&lo, &hi).map_err(err)?);
    let r = py.detach(|| window(&ctx, &grid)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("w_eta", r.w_eta)?;
    out.set_item("quad_integral", r.quad_integral)?;
    out.set_item("smeared_mass", r.smeared_mass)?;
    out.set_item("point_count", r.point_count)?;
    out.set_item("volume", r.volume)?;
    out.set_item("per_volume", r.per_volume)?;
    out.set_item("eta", r.eta)?;
    Ok(out)
}

#[pyfunction]
fn truncation_rate(kernel: &PyKernel, eta: f64) -> f64 {
    rate(&kernel.0, eta)
}

/// Vertical decay fit for the unit lattice `ℤ` with its background.
#[pyfunction]
#[pyo3(signature = (kernel, t_values, radius = 400))]
fn lattice_decay_fit<'py>(
    py: Python<'py>,
    kernel: &PyKernel,
    t_values: Vec<f64>,
    radius: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let fit = py
        .detach(|| decay_fit(&[vec![1.0]], &kernel.0, &t_values, LatticeOptions { radius }))
        .map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("exponent", fit.exponent)?;
    out.set_item("constant", fit.constant)?;
    out.set_item("r2", fit.r2)?;
    out.set_item("bound", fit.bound)?;
    out.set_item("pass", fit.pass)?;
    out.set_item("profile", fit.profile)?;
    Ok(out)
}

#[pymodule]
fn rieszpy(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKernel>()?;
    m.add_function(wrap_pyfunction!(hamiltonian, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(window_energy, m)?)?;
    m.add_function(wrap_pyfunction!(truncation_rate, m)?)?;
    m.add_function(wrap_pyfunction!(lattice_decay_fit, m)?)?;
    Ok(())
}
