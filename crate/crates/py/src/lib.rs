//! Python module `rmt_locallaw`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rmt_core::ensembles::{self, BandShape, EntryDistribution, MatrixSample, SymmetryClass, VarianceProfile};
use rmt_core::linalg::eigvalsh;
use rmt_core::locallaw::{self, DiagnosticsOptions, MinorRoute};
use rmt_core::moments::{self, MatchStrategy, MomentTarget};
use rmt_core::runner;
use rmt_core::semicircle::{self, ControlFunction, SpectralPoint};
use rmt_core::stats::{self, EmpiricalCdf};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn symmetry(beta: u8) -> PyResult<SymmetryClass> {
    match beta {
        1 => Ok(SymmetryClass::Real),
        2 => Ok(SymmetryClass::Complex),
        b => Err(PyValueError::new_err(format!("beta must be 1 or 2, got {b}"))),
    }
}

#[pyclass(name = "Profile", frozen)]
struct PyProfile(VarianceProfile);

#[pymethods]
impl PyProfile {
    #[staticmethod]
    fn wigner(n: usize) -> PyResult<Self> {
        ensembles::wigner_profile(n).map(Self).map_err(value_err)
    }

    /// Band profile with shape "indicator", "triangle" or "gaussian".
    #[staticmethod]
    #[pyo3(signature = (n, width, shape = "indicator"))]
    fn band(n: usize, width: usize, shape: &str) -> PyResult<Self> {
        let shape: BandShape = serde_json::from_value(serde_json::Value::String(shape.into())).map_err(value_err)?;
        ensembles::band_profile(n, width, |x| shape.eval(x)).map(Self).map_err(value_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn m_param(&self) -> f64 {
        self.0.m_param()
    }

    #[getter]
    fn delta_plus(&self) -> f64 {
        self.0.delta_plus()
    }

    #[getter]
    fn delta_minus(&self) -> f64 {
        self.0.delta_minus()
    }

    #[getter]
    fn edge_exponent_a(&self) -> u8 {
        self.0.edge_exponent_a()
    }

    #[getter]
    fn id(&self) -> String {
        self.0.id()
    }

    fn variance(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.0.n();
        if i >= n || j >= n {
            return Err(PyValueError::new_err(format!("index ({i}, {j}) out of range for n={n}")));
        }
        Ok(self.0.variance(i, j))
    }
}

#[pyclass(name = "Distribution", frozen)]
struct PyDistribution(EntryDistribution);

#[pymethods]
impl PyDistribution {
    /// "bernoulli", "gaussian" or "uniform".
    #[staticmethod]
    fn catalog(name: &str) -> PyResult<Self> {
        ensembles::catalog_distribution(name).map(Self).map_err(value_err)
    }

    #[staticmethod]
    fn from_atoms(atoms: Vec<(f64, f64)>) -> PyResult<Self> {
        EntryDistribution::from_atoms(atoms).map(Self).map_err(value_err)
    }

    #[staticmethod]
    fn three_point(m3: f64, m4: f64) -> PyResult<Self> {
        let t = MomentTarget::new(m3, m4).map_err(value_err)?;
        moments::three_point_construct(t).map(Self).map_err(value_err)
    }

    fn gaussian_divisible(&self, gamma: f64) -> PyResult<Self> {
        self.0.gaussian_divisible(gamma).map(Self).map_err(value_err)
    }

    #[getter]
    fn m3(&self) -> f64 {
        self.0.m3()
    }

    #[getter]
    fn m4(&self) -> f64 {
        self.0.m4()
    }

    #[getter]
    fn id(&self) -> String {
        self.0.id()
    }
}

#[pyclass(name = "Matrix", frozen)]
struct PyMatrix(MatrixSample);

#[pymethods]
impl PyMatrix {
    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    #[getter]
    fn beta(&self) -> u8 {
        self.0.symmetry_class.beta()
    }

    fn get(&self, i: usize, j: usize) -> PyResult<Complex64> {
        let n = self.0.n();
        if i >= n || j >= n {
            return Err(PyValueError::new_err(format!("index ({i}, {j}) out of range for n={n}")));
        }
        Ok(self.0.entries.get(i, j))
    }

    fn to_rows(&self) -> Vec<Vec<Complex64>> {
        let n = self.0.n();
        (0..n).map(|i| (0..n).map(|j| self.0.entries.get(i, j)).collect()).collect()
    }

    fn eigvalsh(&self, py: Python<'_>) -> PyResult<Vec<f64>> {
        py.detach(|| eigvalsh(&self.0.entries)).map_err(runtime_err)
    }
}

#[pyfunction]
#[pyo3(signature = (profile, distribution, beta = 2, seed = 0))]
fn sample_matrix(profile: &PyProfile, distribution: &PyDistribution, beta: u8, seed: u64) -> PyResult<PyMatrix> {
    ensembles::sample_matrix(&profile.0, &distribution.0, symmetry(beta)?, seed).map(PyMatrix).map_err(value_err)
}

#[pyfunction]
fn msc(z: Complex64) -> PyResult<Complex64> {
    if !(z.im > 0.0) {
        return Err(PyValueError::new_err("Im z must be positive"));
    }
    Ok(semicircle::msc(z))
}

#[pyfunction]
fn rho_sc(e: f64) -> f64 {
    semicircle::rho_sc(e)
}

#[pyfunction]
fn nsc(e: f64) -> f64 {
    semicircle::nsc(e)
}

#[pyfunction]
fn classical_locations(n: usize) -> Vec<f64> {
    semicircle::classical_locations(n)
}

#[pyfunction]
#[pyo3(signature = (e, eta, delta_plus = 1.0, edge_exponent_a = 1))]
fn theta(e: f64, eta: f64, delta_plus: f64, edge_exponent_a: u8) -> PyResult<f64> {
    let p = SpectralPoint::new(e, eta).map_err(value_err)?;
    Ok(semicircle::theta(p, &ControlFunction::new(delta_plus, edge_exponent_a)))
}

#[pyfunction]
#[pyo3(signature = (matrix, profile, z, route = "schur"))]
fn diagnostics<'py>(
    py: Python<'py>,
    matrix: &PyMatrix,
    profile: &PyProfile,
    z: Complex64,
    route: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let route = match route {
        "schur" => MinorRoute::Schur,
        "direct" => MinorRoute::Direct,
        r => return Err(PyValueError::new_err(format!("route must be \"schur\" or \"direct\", got {r}"))),
    };
    let opts = DiagnosticsOptions { route, ..DiagnosticsOptions::default() };
    let d = py.detach(|| locallaw::diagnostics(&matrix.0.entries, &profile.0, z, opts)).map_err(runtime_err)?;
    let out = PyDict::new(py);
    out.set_item("z", d.z)?;
    out.set_item("m_n", d.m_n)?;
    out.set_item("lambda_d", d.lambda_d)?;
    out.set_item("lambda_o", d.lambda_o)?;
    out.set_item("upsilon_max", d.upsilon_max)?;
    out.set_item("mainseeq_residual", d.mainseeq_residual)?;
    out.set_item("x_diag", d.x_diag)?;
    out.set_item("a_terms", d.a_terms)?;
    out.set_item("z_terms", d.z_terms)?;
    out.set_item("upsilon_terms", d.upsilon_terms)?;
    Ok(out)
}

#[pyfunction]
fn verify_perturbation_identities(matrix: &PyMatrix, z: Complex64, i: usize, j: usize, k: usize) -> PyResult<f64> {
    locallaw::verify_perturbation_identities(&matrix.0.entries, z, i, j, k).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (spectrum, a_exponent = 1.0))]
fn counting_gap(mut spectrum: Vec<f64>, a_exponent: f64) -> f64 {
    spectrum.sort_by(f64::total_cmp);
    locallaw::counting_gap(&spectrum, a_exponent)
}

#[pyfunction]
fn rigidity_stat(mut spectrum: Vec<f64>) -> f64 {
    spectrum.sort_by(f64::total_cmp);
    locallaw::rigidity_stat(&spectrum).total
}

#[pyfunction]
#[pyo3(signature = (spectrum, epsilon = 0.05))]
fn edge_check(py: Python<'_>, mut spectrum: Vec<f64>, epsilon: f64) -> PyResult<Bound<'_, PyDict>> {
    spectrum.sort_by(f64::total_cmp);
    let e = locallaw::edge_check(&spectrum, epsilon);
    let out = PyDict::new(py);
    out.set_item("bound", e.bound)?;
    out.set_item("lower_margin", e.lower_margin)?;
    out.set_item("upper_margin", e.upper_margin)?;
    out.set_item("passes", e.passes)?;
    out.set_item("norm_ok", e.norm_ok)?;
    Ok(out)
}

/// Returns (distribution, achieved_m3, achieved_m4).
#[pyfunction]
#[pyo3(signature = (m3, m4, gamma, strategy = "exact-fourth"))]
fn match_four_moments(m3: f64, m4: f64, gamma: f64, strategy: &str) -> PyResult<(PyDistribution, f64, f64)> {
    let strategy: MatchStrategy = serde_json::from_value(serde_json::Value::String(strategy.into())).map_err(value_err)?;
    let t = MomentTarget::new(m3, m4).map_err(value_err)?;
    let law = moments::match_four_moments(t, gamma, strategy).map_err(value_err)?;
    Ok((PyDistribution(law.distribution()), law.achieved_m3, law.achieved_m4))
}

#[pyfunction]
#[pyo3(signature = (spectrum, kappa_cut = 0.5))]
fn unfold(mut spectrum: Vec<f64>, kappa_cut: f64) -> Vec<f64> {
    spectrum.sort_by(f64::total_cmp);
    stats::unfold(&spectrum, kappa_cut).points
}

#[pyfunction]
fn ks_distance(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    let a = EmpiricalCdf::new(a).map_err(value_err)?;
    let b = EmpiricalCdf::new(b).map_err(value_err)?;
    Ok(stats::ks_distance(&a, &b))
}

#[pyfunction]
fn sine_kernel(x: f64) -> f64 {
    stats::sine_kernel(x)
}

/// Validates a JSON configuration and returns it with defaults filled in.
#[pyfunction]
fn parse_config(text: &str) -> PyResult<String> {
    runner::parse_config(text).map(|c| c.to_json()).map_err(value_err)
}

/// Runs a configuration, writes outputs to `out_dir`, returns the manifest JSON.
#[pyfunction]
fn run_config(py: Python<'_>, text: &str, out_dir: &str) -> PyResult<String> {
    let cfg = runner::parse_config(text).map_err(value_err)?;
    let m = py.detach(|| runner::run(&cfg, std::path::Path::new(out_dir))).map_err(runtime_err)?;
    serde_json::to_string_pretty(&m).map_err(runtime_err)
}

#[pymodule]
fn rmt_locallaw(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProfile>()?;
    m.add_class::<PyDistribution>()?;
    m.add_class::<PyMatrix>()?;
    m.add_function(wrap_pyfunction!(sample_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(msc, m)?)?;
    m.add_function(wrap_pyfunction!(rho_sc, m)?)?;
    m.add_function(wrap_pyfunction!(nsc, m)?)?;
    m.add_function(wrap_pyfunction!(classical_locations, m)?)?;
    m.add_function(wrap_pyfunction!(theta, m)?)?;
    m.add_function(wrap_pyfunction!(diagnostics, m)?)?;
    m.add_function(wrap_pyfunction!(verify_perturbation_identities, m)?)?;
    m.add_function(wrap_pyfunction!(counting_gap, m)?)?;
    m.add_function(wrap_pyfunction!(rigidity_stat, m)?)?;
    m.add_function(wrap_pyfunction!(edge_check, m)?)?;
    m.add_function(wrap_pyfunction!(match_four_moments, m)?)?;
    m.add_function(wrap_pyfunction!(unfold, m)?)?;
    m.add_function(wrap_pyfunction!(ks_distance, m)?)?;
    m.add_function(wrap_pyfunction!(sine_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(parse_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add("__version__", runner::ARTIFACT_VERSION)?;
    Ok(())
}
