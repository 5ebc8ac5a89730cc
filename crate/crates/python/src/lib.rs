//! Python bindings for `dcws_core`.
//!
//! Vectors cross the boundary as plain lists in the crate's subband layout
//! (index `i` is subband `L0 - i`); matrices as lists of rows of `complex`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dcws_core::fusion::{self, MeasurementMatrix, MeasurementVector, SolverOptions, SolverReport};
use dcws_core::harness::{self, ExperimentConfig as CoreConfig, NoiseSpec};
use dcws_core::metrics::DetectionCounts;
use dcws_core::spectrum::{ChannelProfile, NoiseModel, SpectrumConfig as CoreSpectrum};
use dcws_core::{sampler, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(m) => PyIOError::new_err(m),
        Error::Numerical(_) | Error::CombinatorialGuard(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Band partition of width `W` into `L` subbands of width `B`.
#[pyclass(frozen)]
struct SpectrumConfig {
    inner: CoreSpectrum,
}

#[pymethods]
impl SpectrumConfig {
    #[new]
    fn new(total_bandwidth_hz: f64, subband_bandwidth_hz: f64) -> PyResult<Self> {
        let inner = CoreSpectrum::new(total_bandwidth_hz, subband_bandwidth_hz).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn with_subbands(subband_count: usize) -> PyResult<Self> {
        let inner = CoreSpectrum::with_subbands(subband_count).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn subband_count(&self) -> usize {
        self.inner.subband_count()
    }

    #[getter]
    fn half_count(&self) -> usize {
        self.inner.half_count()
    }

    /// Subband indices `l` in storage order.
    fn subbands(&self) -> Vec<i64> {
        self.inner.subbands().collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "SpectrumConfig(W={}, B={}, L={})",
            self.inner.total_bandwidth_hz(),
            self.inner.subband_bandwidth_hz(),
            self.inner.subband_count()
        )
    }
}

/// Experiment configuration; build from JSON, tweak fields, pass to
/// `run_trial` / `sweep_k` / `rate_table`.
#[pyclass]
struct ExperimentConfig {
    inner: CoreConfig,
}

#[pymethods]
impl ExperimentConfig {
    /// Defaults, overlaid with `json` when given.
    #[new]
    #[pyo3(signature = (json=None))]
    fn new(json: Option<&str>) -> PyResult<Self> {
        let inner = match json {
            Some(text) => CoreConfig::from_json(text).map_err(to_py)?,
            None => CoreConfig::default(),
        };
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn validate(&self) -> PyResult<SpectrumConfig> {
        Ok(SpectrumConfig {
            inner: self.inner.validate().map_err(to_py)?,
        })
    }

    #[getter]
    fn pu_count(&self) -> usize {
        self.inner.pu_count
    }

    #[setter]
    fn set_pu_count(&mut self, v: usize) {
        self.inner.pu_count = v;
    }

    #[getter]
    fn nodes(&self) -> Vec<usize> {
        self.inner.nodes.clone()
    }

    #[setter]
    fn set_nodes(&mut self, v: Vec<usize>) {
        self.inner.nodes = v;
    }

    #[getter]
    fn trials(&self) -> usize {
        self.inner.trials
    }

    #[setter]
    fn set_trials(&mut self, v: usize) {
        self.inner.trials = v;
    }

    #[getter]
    fn master_seed(&self) -> u64 {
        self.inner.master_seed
    }

    #[setter]
    fn set_master_seed(&mut self, v: u64) {
        self.inner.master_seed = v;
    }

    fn set_snr_db(&mut self, db: f64) {
        self.inner.noise = NoiseSpec::SnrDb(db);
    }

    fn set_sigma_w(&mut self, sigma: f64) {
        self.inner.noise = NoiseSpec::SigmaW(sigma);
    }

    fn __repr__(&self) -> String {
        format!("ExperimentConfig({})", self.inner.to_json())
    }
}

fn report_dict<'py>(py: Python<'py>, r: &SolverReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("iterations", r.iterations)?;
    d.set_item("residual_norm", r.residual_norm)?;
    d.set_item("l1_norm", r.l1_norm)?;
    d.set_item("converged", r.converged)?;
    d.set_item("feasible", r.feasible)?;
    d.set_item("kkt_residual", r.kkt_residual)?;
    d.set_item("epsilon", r.epsilon)?;
    Ok(d)
}

fn counts_dict<'py>(py: Python<'py>, c: &DetectionCounts) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("detect_hits", c.detect_hits)?;
    d.set_item("busy_count", c.busy_count)?;
    d.set_item("false_hits", c.false_hits)?;
    d.set_item("idle_count", c.idle_count)?;
    d.set_item("pd", c.pd())?;
    d.set_item("pf", c.pf())?;
    Ok(d)
}

fn matrix_from_rows(rows: Vec<Vec<Complex64>>) -> PyResult<MeasurementMatrix> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("matrix rows must have equal length"));
    }
    Ok(MeasurementMatrix::from_entries(DMatrix::from_fn(
        rows.len(),
        cols,
        |r, c| rows[r][c],
    )))
}

fn matrix_rows(a: &MeasurementMatrix) -> Vec<Vec<Complex64>> {
    a.entries().row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// ±1 chips of node `node_id` under `seed`.
#[pyfunction]
fn draw_mixing(node_id: u64, subband_count: usize, seed: u64) -> PyResult<Vec<i8>> {
    Ok(sampler::draw_mixing(node_id, subband_count, seed)
        .map_err(to_py)?
        .chips()
        .to_vec())
}

/// Fourier-series coefficients `c_l` of a chip waveform, in subband order.
#[pyfunction]
fn fourier_coeffs(chips: Vec<i8>) -> PyResult<Vec<Complex64>> {
    let seq = sampler::MixingSequence::from_chips(0, chips).map_err(to_py)?;
    Ok(sampler::fourier_coeffs(&seq).as_slice().to_vec())
}

/// Measurement matrix of nodes `node_ids` under `mixing_seed`, with unit
/// channel gains unless `gains` is given.
#[pyfunction]
#[pyo3(signature = (spectrum, mixing_seed, node_ids, gains=None))]
fn assemble_matrix(
    spectrum: &SpectrumConfig,
    mixing_seed: u64,
    node_ids: Vec<u64>,
    gains: Option<Vec<f64>>,
) -> PyResult<Vec<Vec<Complex64>>> {
    let channel = match gains {
        Some(g) => ChannelProfile::new(g).map_err(to_py)?,
        None => ChannelProfile::identity(&spectrum.inner),
    };
    let a = fusion::assemble_matrix(&spectrum.inner, mixing_seed, &node_ids, &channel).map_err(to_py)?;
    Ok(matrix_rows(&a))
}

/// Nonnegative basis pursuit denoising; returns `(x_hat, report)`.
#[pyfunction]
#[pyo3(signature = (a, y, sigma_w=0.0, epsilon=None, fold_symmetry=false))]
fn bp_recover<'py>(
    py: Python<'py>,
    a: Vec<Vec<Complex64>>,
    y: Vec<f64>,
    sigma_w: f64,
    epsilon: Option<f64>,
    fold_symmetry: bool,
) -> PyResult<(Vec<f64>, Bound<'py, PyDict>)> {
    let a = matrix_from_rows(a)?;
    let noise = NoiseModel::new(sigma_w).map_err(to_py)?;
    let opts = SolverOptions {
        epsilon,
        fold_symmetry,
        ..Default::default()
    };
    let r = fusion::bp_recover(&a, &MeasurementVector::new(y), noise, &opts).map_err(to_py)?;
    Ok((r.x_hat().to_vec(), report_dict(py, r.report())?))
}

/// Exhaustive-support reference solution with at most `s_max` nonzeros.
#[pyfunction]
fn oracle_recover(a: Vec<Vec<Complex64>>, y: Vec<f64>, s_max: usize) -> PyResult<Vec<f64>> {
    let a = matrix_from_rows(a)?;
    let r = fusion::oracle_recover(&a, &MeasurementVector::new(y), s_max).map_err(to_py)?;
    Ok(r.x_hat().to_vec())
}

/// Busy flags `x_hat > lam`.
#[pyfunction]
fn decide(x_hat: Vec<f64>, lam: f64) -> PyResult<Vec<bool>> {
    Ok(fusion::decide(&x_hat, lam).map_err(to_py)?.flags().to_vec())
}

#[pyfunction]
fn mse(x_hat: Vec<f64>, x_true: Vec<f64>) -> PyResult<f64> {
    dcws_core::metrics::mse(&x_hat, &x_true).map_err(to_py)
}

/// One seeded trial at `nodes` sensors and threshold `lam`.
#[pyfunction]
fn run_trial<'py>(
    py: Python<'py>,
    cfg: &ExperimentConfig,
    nodes: usize,
    trial_index: u64,
    lam: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let spectrum = cfg.inner.validate().map_err(to_py)?;
    let r = harness::run_trial(&cfg.inner, &spectrum, nodes, trial_index, lam).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("trial_seed", r.trial_seed)?;
    d.set_item("nodes", r.nodes)?;
    d.set_item("truth", r.truth)?;
    d.set_item("x_true", r.x_true)?;
    d.set_item("x_hat", r.x_hat)?;
    d.set_item("sigma_w", r.sigma_w)?;
    d.set_item("mse", r.outcome.mse)?;
    d.set_item("counts", counts_dict(py, &r.outcome.counts)?)?;
    d.set_item("report", report_dict(py, &r.report)?)?;
    Ok(d)
}

/// Full campaign. Returns per-K aggregates, ROC points and the operating
/// threshold.
#[pyfunction]
fn sweep_k<'py>(py: Python<'py>, cfg: &ExperimentConfig) -> PyResult<Bound<'py, PyDict>> {
    let inner = cfg.inner.clone();
    let report = py.detach(move || harness::sweep_k(&inner)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("operating_lambda", report.thresholds.operating)?;
    let per_k = report
        .per_k
        .iter()
        .map(|a| {
            let row = PyDict::new(py);
            row.set_item("K", a.nodes)?;
            row.set_item("mean_mse", a.mean_mse)?;
            row.set_item("mse_stderr", a.mse_stderr)?;
            row.set_item("pd", a.pd)?;
            row.set_item("pd_stderr", a.pd_stderr)?;
            row.set_item("pf", a.pf)?;
            row.set_item("pf_stderr", a.pf_stderr)?;
            row.set_item("nonconverged", a.nonconverged)?;
            Ok(row)
        })
        .collect::<PyResult<Vec<_>>>()?;
    d.set_item("per_k", per_k)?;
    let roc: Vec<(usize, Vec<(f64, f64, f64)>)> = report
        .roc
        .iter()
        .map(|(k, c)| (*k, c.points.iter().map(|p| (p.lambda, p.pf, p.pd)).collect()))
        .collect();
    d.set_item("roc", roc)?;
    Ok(d)
}

#[pyfunction]
fn rate_table<'py>(py: Python<'py>, cfg: &ExperimentConfig) -> PyResult<Bound<'py, PyDict>> {
    let t = harness::rate_table(&cfg.inner).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("nyquist_rate_hz", t.nyquist_rate_hz)?;
    d.set_item("existing_cs_rate_hz", t.existing_cs_rate_hz)?;
    d.set_item("per_node_rate_hz", t.per_node_rate_hz)?;
    d.set_item("sum_rate_hz", t.sum_rate_hz)?;
    Ok(d)
}

/// Largest relative error of the time-domain sampler against the aliasing
/// model over `seeds` random environments.
#[pyfunction]
#[pyo3(signature = (subbands=15, pu_count=2, oversample=64, periods=3, seeds=100))]
fn aliasing_selftest(
    subbands: usize,
    pu_count: usize,
    oversample: usize,
    periods: usize,
    seeds: usize,
) -> PyResult<f64> {
    Ok(harness::aliasing_selftest(subbands, pu_count, oversample, periods, seeds)
        .map_err(to_py)?
        .max_rel_error)
}

#[pymodule]
fn dcws(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<SpectrumConfig>()?;
    m.add_class::<ExperimentConfig>()?;
    m.add_function(wrap_pyfunction!(draw_mixing, m)?)?;
    m.add_function(wrap_pyfunction!(fourier_coeffs, m)?)?;
    m.add_function(wrap_pyfunction!(assemble_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(bp_recover, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_recover, m)?)?;
    m.add_function(wrap_pyfunction!(decide, m)?)?;
    m.add_function(wrap_pyfunction!(mse, m)?)?;
    m.add_function(wrap_pyfunction!(run_trial, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_k, m)?)?;
    m.add_function(wrap_pyfunction!(rate_table, m)?)?;
    m.add_function(wrap_pyfunction!(aliasing_selftest, m)?)?;
    Ok(())
}
