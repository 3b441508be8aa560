//! Python bindings: model parameters, exact and sampled evolution, spectra,
//! and the variance-peak analysis.

use dtc_sim::criticality::{self, CouplingUnits, EvolutionBackend, HSamples};
use dtc_sim::{DisorderSpec, SeedDerivation};
use pyo3::exceptions::{PyValueError, PyRuntimeError};
use pyo3::prelude::*;

fn err(e: dtc_sim::Error) -> PyErr {
    match e.category() {
        "numeric" => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn trace(values: Vec<f64>) -> dtc_sim::MagnetizationTrace {
    dtc_sim::MagnetizationTrace::new(values)
}

#[pyclass(name = "FloquetParams", frozen, from_py_object)]
#[derive(Clone)]
struct PyFloquetParams(dtc_sim::FloquetParams);

#[pymethods]
impl PyFloquetParams {
    #[new]
    #[pyo3(signature = (eps, couplings, p = 0.0, steps = 50))]
    fn new(eps: f64, couplings: Vec<f64>, p: f64, steps: usize) -> PyResult<Self> {
        dtc_sim::FloquetParams::from_angles(eps, &couplings, p, steps)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }
    #[getter]
    fn eps(&self) -> f64 {
        self.0.eps()
    }
    #[getter]
    fn p(&self) -> f64 {
        self.0.p()
    }
    #[getter]
    fn steps(&self) -> usize {
        self.0.steps()
    }
    #[getter]
    fn couplings(&self) -> Vec<f64> {
        self.0.couplings().iter().map(|j| j.value()).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "FloquetParams(n={}, eps={}, p={}, steps={})",
            self.0.n(),
            self.0.eps(),
            self.0.p(),
            self.0.steps()
        )
    }
}

/// Exact dephasing-channel trace `m_1 … m_K`.
#[pyfunction]
fn evolve_exact(py: Python<'_>, params: PyFloquetParams) -> PyResult<Vec<f64>> {
    py.detach(|| dtc_sim::evolve_exact(&params.0))
        .map(|t| t.values)
        .map_err(err)
}

/// Same channel on the full density matrix (slow reference).
#[pyfunction]
fn evolve_density(py: Python<'_>, params: PyFloquetParams) -> PyResult<Vec<f64>> {
    py.detach(|| dtc_sim::evolve_density(&params.0))
        .map(|t| t.values)
        .map_err(err)
}

/// Mean and standard error over `count` sampled Z-error circuits.
#[pyfunction]
#[pyo3(signature = (params, count, seed = 0))]
fn trajectory_average(
    py: Python<'_>,
    params: PyFloquetParams,
    count: usize,
    seed: u64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let stream = SeedDerivation::new(seed, dtc_sim::seed::StreamPurpose::Noise);
    py.detach(|| dtc_sim::trajectory_average(&params.0, count, stream))
        .map(|a| (a.mean.values, a.std_err))
        .map_err(err)
}

#[pyfunction]
fn order_parameter(values: Vec<f64>) -> PyResult<f64> {
    dtc_sim::order_parameter(&trace(values))
        .map(|h| h.value())
        .map_err(err)
}

/// `(frequencies, amplitudes)` for bins `0..=K/2`.
#[pyfunction]
fn dft_spectrum(values: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
    dtc_sim::dft_spectrum(&trace(values))
        .map(|s| (s.frequencies, s.amplitudes))
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, realization, seed = 0, low = std::f64::consts::FRAC_PI_4, high = 3.0 * std::f64::consts::FRAC_PI_4))]
fn sample_disorder(n: usize, realization: usize, seed: u64, low: f64, high: f64) -> PyResult<Vec<f64>> {
    let spec = DisorderSpec::new(realization + 1, low, high, seed).map_err(err)?;
    Ok(dtc_sim::sample_disorder(&spec, n, realization)
        .into_iter()
        .map(|j| j.value())
        .collect())
}

#[pyclass(name = "PeakEstimate", frozen, get_all)]
struct PyPeakEstimate {
    location: f64,
    boundary_peak: bool,
    batch_locations: Vec<f64>,
    boundary_batches: usize,
    mean: f64,
    sigma: f64,
    single_batch: bool,
}

impl From<criticality::PeakEstimate> for PyPeakEstimate {
    fn from(e: criticality::PeakEstimate) -> Self {
        PyPeakEstimate {
            location: e.location,
            boundary_peak: e.boundary_peak,
            batch_locations: e.batch_locations,
            boundary_batches: e.boundary_batches,
            mean: e.mean,
            sigma: e.sigma,
            single_batch: e.single_batch,
        }
    }
}

#[pymethods]
impl PyPeakEstimate {
    fn __repr__(&self) -> String {
        format!("PeakEstimate(mean={}, sigma={}, location={})", self.mean, self.sigma, self.location)
    }
}

/// Disorder ensemble and evolution settings shared by a sweep.
#[pyclass(name = "Protocol", frozen, from_py_object)]
#[derive(Clone)]
struct PyProtocol(criticality::Protocol);

#[pymethods]
impl PyProtocol {
    #[new]
    #[pyo3(signature = (
        n, realizations, steps = 50, seed = 0,
        low = std::f64::consts::FRAC_PI_4, high = 3.0 * std::f64::consts::FRAC_PI_4,
        units = "rzz", trajectories = None,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        n: usize,
        realizations: usize,
        steps: usize,
        seed: u64,
        low: f64,
        high: f64,
        units: &str,
        trajectories: Option<usize>,
    ) -> PyResult<Self> {
        let units = match units {
            "rzz" => CouplingUnits::RzzAngle,
            "phase" => CouplingUnits::Phase,
            other => return Err(PyValueError::new_err(format!("units must be rzz or phase, got {other:?}"))),
        };
        let protocol = criticality::Protocol {
            n,
            steps,
            disorder: DisorderSpec::new(realizations, low, high, seed).map_err(err)?,
            backend: trajectories.map_or(EvolutionBackend::Exact, |count| EvolutionBackend::Trajectory { count }),
            units,
        };
        protocol.validate().map_err(err)?;
        Ok(Self(protocol))
    }

    /// Couplings of one realization, after unit conversion.
    fn couplings(&self, realization: usize) -> Vec<f64> {
        self.0.couplings(realization).iter().map(|j| j.value()).collect()
    }

    /// `h[e][r]` for every ε and realization.
    fn order_parameters(&self, py: Python<'_>, eps_grid: Vec<f64>, p: f64) -> PyResult<Vec<Vec<f64>>> {
        let count = self.0.disorder.count;
        py.detach(|| criticality::sample_order_parameters(&self.0, &eps_grid, p, 0, 0..count))
            .map(|s| s.values)
            .map_err(err)
    }

    /// Unbiased variance of `h` across realizations at each ε.
    fn variance_curve(&self, py: Python<'_>, eps_grid: Vec<f64>, p: f64) -> PyResult<Vec<f64>> {
        py.detach(|| criticality::variance_curve(&self.0, &eps_grid, p))
            .map(|(c, _)| c.variances)
            .map_err(err)
    }

    /// Variance matrix indexed `[p][eps]`.
    fn heatmap(&self, py: Python<'_>, eps_grid: Vec<f64>, p_grid: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        py.detach(|| criticality::heatmap_sweep(&self.0, &eps_grid, &p_grid))
            .map(|(g, _)| g.variance)
            .map_err(err)
    }

    #[pyo3(signature = (eps_grid, p, batches = 20))]
    fn peak(&self, py: Python<'_>, eps_grid: Vec<f64>, p: f64, batches: usize) -> PyResult<PyPeakEstimate> {
        py.detach(|| {
            let (_, samples) = criticality::variance_curve(&self.0, &eps_grid, p)?;
            criticality::batched_peak_estimate(&samples, batches)
        })
        .map(Into::into)
        .map_err(err)
    }
}

/// Smoothed-peak location of `y(x)`: `(location, on_boundary)`.
#[pyfunction]
fn estimate_peak(x: Vec<f64>, y: Vec<f64>) -> PyResult<(f64, bool)> {
    criticality::estimate_peak(&x, &y)
        .map(|p| (p.location, p.boundary))
        .map_err(err)
}

/// Batched peak estimate from `h[e][r]` samples.
#[pyfunction]
#[pyo3(signature = (eps_grid, values, batches = 20))]
fn batched_peak_estimate(eps_grid: Vec<f64>, values: Vec<Vec<f64>>, batches: usize) -> PyResult<PyPeakEstimate> {
    let samples = HSamples {
        eps_grid,
        p: 0.0,
        values,
    };
    criticality::batched_peak_estimate(&samples, batches)
        .map(Into::into)
        .map_err(err)
}

#[pymodule]
fn dtc_sim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFloquetParams>()?;
    m.add_class::<PyProtocol>()?;
    m.add_class::<PyPeakEstimate>()?;
    m.add_function(wrap_pyfunction!(evolve_exact, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_density, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory_average, m)?)?;
    m.add_function(wrap_pyfunction!(order_parameter, m)?)?;
    m.add_function(wrap_pyfunction!(dft_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(sample_disorder, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_peak, m)?)?;
    m.add_function(wrap_pyfunction!(batched_peak_estimate, m)?)?;
    Ok(())
}
