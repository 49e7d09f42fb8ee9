//! Python bindings for the `pathlab` crate.

#![allow(clippy::too_many_arguments)]

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pathlab::experiments::{self, Command, ExperimentConfig};
use pathlab::{
    ClassicalPathResult, GaussianPacket, KinematicQuantity, LatticePath, PhysicalConstants, Potential, SliceOperator,
    SolveOptions, SpaceGrid, TimeGrid, DEFAULT_ENUMERATION_CAP,
};

create_exception!(pathlab_py, PathlabError, PyException);

fn to_py(e: pathlab::Error) -> PyErr {
    PathlabError::new_err(e.to_string())
}

fn constants_or_natural(c: Option<PyRef<'_, Constants>>) -> PhysicalConstants {
    c.map(|c| c.inner).unwrap_or_else(PhysicalConstants::natural)
}

#[pyclass(name = "Constants", frozen, from_py_object)]
#[derive(Clone)]
struct Constants {
    inner: PhysicalConstants,
}

#[pymethods]
impl Constants {
    #[new]
    #[pyo3(signature = (hbar = 1.0, mass = 1.0))]
    fn new(hbar: f64, mass: f64) -> PyResult<Self> {
        Ok(Self { inner: PhysicalConstants::new(hbar, mass).map_err(to_py)? })
    }

    #[getter]
    fn hbar(&self) -> f64 {
        self.inner.hbar
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.inner.mass
    }

    fn __repr__(&self) -> String {
        format!("Constants(hbar={}, mass={})", self.inner.hbar, self.inner.mass)
    }
}

#[pyclass(name = "TimeGrid", frozen, from_py_object)]
#[derive(Clone)]
struct PyTimeGrid {
    inner: TimeGrid,
}

#[pymethods]
impl PyTimeGrid {
    #[new]
    fn new(t_start: f64, t_end: f64, n_slices: usize) -> PyResult<Self> {
        Ok(Self { inner: TimeGrid::new(t_start, t_end, n_slices).map_err(to_py)? })
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt()
    }

    #[getter]
    fn n_slices(&self) -> usize {
        self.inner.n_slices()
    }

    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes()
    }
}

#[pyclass(name = "SpaceGrid", frozen, from_py_object)]
#[derive(Clone)]
struct PySpaceGrid {
    inner: SpaceGrid,
}

#[pymethods]
impl PySpaceGrid {
    #[new]
    #[pyo3(signature = (x_min, x_max, n_points, absorbing_band = 0.0))]
    fn new(x_min: f64, x_max: f64, n_points: usize, absorbing_band: f64) -> PyResult<Self> {
        let inner = SpaceGrid::new(x_min, x_max, n_points)
            .and_then(|g| g.with_absorbing_band(absorbing_band))
            .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.inner.dx()
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.inner.n_points()
    }

    fn points(&self) -> Vec<f64> {
        self.inner.points()
    }

    fn weights(&self) -> Vec<f64> {
        self.inner.weights()
    }

    fn index_of(&self, x: f64) -> PyResult<usize> {
        self.inner.index_of(x).map_err(to_py)
    }
}

#[pyclass(name = "Potential", frozen, from_py_object)]
#[derive(Clone)]
struct PyPotential {
    inner: Potential,
}

#[pymethods]
impl PyPotential {
    #[staticmethod]
    fn free() -> Self {
        Self { inner: Potential::Free }
    }

    #[staticmethod]
    #[pyo3(signature = (omega, constants = None))]
    fn harmonic(omega: f64, constants: Option<PyRef<'_, Constants>>) -> PyResult<Self> {
        Ok(Self { inner: Potential::harmonic(omega, &constants_or_natural(constants)).map_err(to_py)? })
    }

    #[staticmethod]
    fn quartic(lam: f64) -> PyResult<Self> {
        Ok(Self { inner: Potential::quartic(lam).map_err(to_py)? })
    }

    #[staticmethod]
    fn polynomial(coefficients: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: Potential::polynomial(coefficients).map_err(to_py)? })
    }

    fn value(&self, x: f64) -> f64 {
        self.inner.value(x)
    }

    fn derivative(&self, x: f64) -> f64 {
        self.inner.derivative(x)
    }

    fn is_quadratic(&self) -> bool {
        self.inner.is_quadratic()
    }

    fn coefficients(&self) -> Vec<f64> {
        self.inner.coefficients()
    }
}

#[pyclass(name = "Kernel", frozen)]
struct PyKernel {
    inner: pathlab::Kernel,
}

#[pymethods]
impl PyKernel {
    fn at(&self, x2: f64, x1: f64) -> PyResult<Complex64> {
        self.inner.at(x2, x1).map_err(to_py)
    }

    fn get(&self, i2: usize, i1: usize) -> PyResult<Complex64> {
        let n = self.inner.grid.n_points();
        if i2 >= n || i1 >= n {
            return Err(PyValueError::new_err(format!("index out of range for {n} grid points")));
        }
        Ok(self.inner.get(i2, i1))
    }

    /// Rows index the final coordinate, columns the initial one.
    fn matrix(&self) -> Vec<Vec<Complex64>> {
        let n = self.inner.grid.n_points();
        (0..n).map(|i| self.inner.values.row(i).to_vec()).collect()
    }

    fn edge_leak(&self) -> f64 {
        self.inner.edge_leak()
    }

    #[getter]
    fn t_start(&self) -> f64 {
        self.inner.t_start
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.inner.t_end
    }
}

#[pyclass(name = "ClassicalPath", frozen)]
struct PyClassicalPath {
    inner: ClassicalPathResult,
}

#[pymethods]
impl PyClassicalPath {
    #[getter]
    fn positions(&self) -> Vec<f64> {
        self.inner.path.positions().to_vec()
    }

    #[getter]
    fn action(&self) -> f64 {
        self.inner.action.value()
    }

    #[getter]
    fn stationarity_residual(&self) -> f64 {
        self.inner.stationarity_residual
    }

    #[getter]
    fn is_positive_definite(&self) -> bool {
        self.inner.minimum_certificate.is_positive_definite_hessian
    }

    #[getter]
    fn smallest_eigen_estimate(&self) -> f64 {
        self.inner.minimum_certificate.smallest_eigen_estimate
    }

    #[pyo3(signature = (magnitude = 0.1, trials = 1000, seed = 0))]
    fn probe(&self, magnitude: f64, trials: usize, seed: u64) -> PyResult<f64> {
        pathlab::perturbation_probe(&self.inner, magnitude, trials, seed).map_err(to_py)
    }
}

fn parse_quantity(obj: &Bound<'_, PyAny>) -> PyResult<KinematicQuantity> {
    if let Ok(name) = obj.extract::<String>() {
        return match name.as_str() {
            "unit" => Ok(KinematicQuantity::unit()),
            "position" => Ok(KinematicQuantity::Position),
            "position_squared" => Ok(KinematicQuantity::PositionSquared),
            "potential_energy" => Ok(KinematicQuantity::PotentialEnergy),
            other => Err(PyValueError::new_err(format!("unknown quantity {other:?}"))),
        };
    }
    Ok(KinematicQuantity::Polynomial(obj.extract::<Vec<f64>>()?))
}

#[pyfunction]
#[pyo3(signature = (space, time, potential, constants = None))]
fn lattice_kernel(
    space: PyRef<'_, PySpaceGrid>,
    time: PyRef<'_, PyTimeGrid>,
    potential: PyRef<'_, PyPotential>,
    constants: Option<PyRef<'_, Constants>>,
) -> PyResult<PyKernel> {
    let c = constants_or_natural(constants);
    let inner = pathlab::lattice_kernel(&space.inner, &time.inner, &potential.inner, &c).map_err(to_py)?;
    Ok(PyKernel { inner })
}

#[pyfunction]
#[pyo3(signature = (space, time, potential, x1, x2, constants = None, cap = DEFAULT_ENUMERATION_CAP))]
fn brute_force_kernel(
    space: PyRef<'_, PySpaceGrid>,
    time: PyRef<'_, PyTimeGrid>,
    potential: PyRef<'_, PyPotential>,
    x1: f64,
    x2: f64,
    constants: Option<PyRef<'_, Constants>>,
    cap: u64,
) -> PyResult<Complex64> {
    let c = constants_or_natural(constants);
    pathlab::brute_force_kernel(&space.inner, &time.inner, &potential.inner, &c, x1, x2, cap).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (x2, x1, duration, constants = None))]
fn analytic_kernel_free(x2: f64, x1: f64, duration: f64, constants: Option<PyRef<'_, Constants>>) -> PyResult<Complex64> {
    pathlab::analytic_kernel_free(x2, x1, duration, &constants_or_natural(constants)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (x2, x1, duration, omega, constants = None))]
fn analytic_kernel_harmonic(
    x2: f64,
    x1: f64,
    duration: f64,
    omega: f64,
    constants: Option<PyRef<'_, Constants>>,
) -> PyResult<Complex64> {
    pathlab::analytic_kernel_harmonic(x2, x1, duration, omega, &constants_or_natural(constants)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (positions, time, potential, constants = None))]
fn discrete_action(
    positions: Vec<f64>,
    time: PyRef<'_, PyTimeGrid>,
    potential: PyRef<'_, PyPotential>,
    constants: Option<PyRef<'_, Constants>>,
) -> PyResult<f64> {
    let c = constants_or_natural(constants);
    let path = LatticePath::for_grid(&time.inner, positions).map_err(to_py)?;
    Ok(pathlab::discrete_action(&path, &potential.inner, &time.inner, &c).map_err(to_py)?.value())
}

#[pyfunction]
#[pyo3(signature = (positions, time, potential, constants = None))]
fn action_gradient(
    positions: Vec<f64>,
    time: PyRef<'_, PyTimeGrid>,
    potential: PyRef<'_, PyPotential>,
    constants: Option<PyRef<'_, Constants>>,
) -> PyResult<Vec<f64>> {
    let c = constants_or_natural(constants);
    let path = LatticePath::for_grid(&time.inner, positions).map_err(to_py)?;
    pathlab::action_gradient(&path, &potential.inner, &time.inner, &c).map_err(to_py)
}

/// `⟨f(τ)⟩` at every interior node, returned as a dict with `times`,
/// `samples`, `kernel` and `normalized`.
#[pyfunction]
#[pyo3(signature = (quantity, x1, x2, space, time, potential, constants = None))]
fn transition_quantity<'py>(
    py: Python<'py>,
    quantity: &Bound<'py, PyAny>,
    x1: f64,
    x2: f64,
    space: PyRef<'_, PySpaceGrid>,
    time: PyRef<'_, PyTimeGrid>,
    potential: PyRef<'_, PyPotential>,
    constants: Option<PyRef<'_, Constants>>,
) -> PyResult<Bound<'py, PyDict>> {
    let f = parse_quantity(quantity)?;
    let c = constants_or_natural(constants);
    let tq = pathlab::transition_quantity(&f, x1, x2, &space.inner, &time.inner, &potential.inner, &c)
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("quantity", tq.quantity.name())?;
    d.set_item("times", tq.times.clone())?;
    d.set_item("normalized", tq.normalized())?;
    d.set_item("samples", tq.samples)?;
    d.set_item("kernel", tq.kernel_value)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (x1, x2, time, potential, constants = None, tol = 1e-10, max_iters = 50))]
fn solve_classical_path(
    x1: f64,
    x2: f64,
    time: PyRef<'_, PyTimeGrid>,
    potential: PyRef<'_, PyPotential>,
    constants: Option<PyRef<'_, Constants>>,
    tol: f64,
    max_iters: usize,
) -> PyResult<PyClassicalPath> {
    let c = constants_or_natural(constants);
    let opts = SolveOptions { tol, max_iters, ..SolveOptions::default() };
    let inner = pathlab::solve_classical_path(x1, x2, &time.inner, &potential.inner, &c, &opts).map_err(to_py)?;
    Ok(PyClassicalPath { inner })
}

/// Steps a Gaussian packet through every slice and returns the final values.
#[pyfunction]
#[pyo3(signature = (space, time, potential, x0, sigma0, k0, constants = None))]
fn evolve_gaussian(
    space: PyRef<'_, PySpaceGrid>,
    time: PyRef<'_, PyTimeGrid>,
    potential: PyRef<'_, PyPotential>,
    x0: f64,
    sigma0: f64,
    k0: f64,
    constants: Option<PyRef<'_, Constants>>,
) -> PyResult<Vec<Complex64>> {
    let c = constants_or_natural(constants);
    let packet = GaussianPacket { x0, sigma0, k0, amplitude: 1.0 };
    let op = SliceOperator::new(&space.inner, time.inner.dt(), &potential.inner, &c).map_err(to_py)?;
    let mut psi = packet.sample(&space.inner, time.inner.t_start());
    for _ in 0..time.inner.n_slices() {
        psi = pathlab::step_wavefunction(&psi, &op).map_err(to_py)?;
    }
    Ok(psi.values)
}

/// Runs a CLI command on a JSON config without touching the filesystem.
/// Returns `{"summary", "passed", "files"}` with file contents as strings.
#[pyfunction]
fn run_command<'py>(py: Python<'py>, command: &str, config_json: &str) -> PyResult<Bound<'py, PyDict>> {
    let cmd = match command {
        "kernel" => Command::Kernel,
        "evolve" => Command::Evolve,
        "transition" => Command::Transition,
        "classical-path" => Command::ClassicalPath,
        "theorem-check" => Command::TheoremCheck,
        "variational-check" => Command::VariationalCheck,
        other => return Err(PyValueError::new_err(format!("unknown command {other:?}"))),
    };
    let cfg = ExperimentConfig::from_json(config_json).map_err(to_py)?;
    let outcome = experiments::run(cmd, &cfg).map_err(to_py)?;
    let files = PyDict::new(py);
    for name in outcome.files.names() {
        let text = String::from_utf8_lossy(outcome.files.get(name).unwrap_or_default()).into_owned();
        files.set_item(name, text)?;
    }
    let d = PyDict::new(py);
    d.set_item("summary", outcome.summary)?;
    d.set_item("passed", outcome.passed)?;
    d.set_item("files", files)?;
    Ok(d)
}

#[pymodule]
fn pathlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("PathlabError", m.py().get_type::<PathlabError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Constants>()?;
    m.add_class::<PyTimeGrid>()?;
    m.add_class::<PySpaceGrid>()?;
    m.add_class::<PyPotential>()?;
    m.add_class::<PyKernel>()?;
    m.add_class::<PyClassicalPath>()?;
    m.add_function(wrap_pyfunction!(lattice_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_kernel_free, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_kernel_harmonic, m)?)?;
    m.add_function(wrap_pyfunction!(discrete_action, m)?)?;
    m.add_function(wrap_pyfunction!(action_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(transition_quantity, m)?)?;
    m.add_function(wrap_pyfunction!(solve_classical_path, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_gaussian, m)?)?;
    m.add_function(wrap_pyfunction!(run_command, m)?)?;
    Ok(())
}
