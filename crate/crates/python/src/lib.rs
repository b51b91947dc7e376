//! Python bindings for the `csi_feedback` core crate.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ::csi_feedback as core;
use core::bounds::{self, BoundForm, Scheme, SchemeParams};
use core::harness::{self, ExperimentConfig};

fn py_err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// AR(L) fading model x_k = Σ a_m x_{k-m} + ψ_k.
#[pyclass(name = "ArModel", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyArModel(core::ArModel);

#[pymethods]
impl PyArModel {
    #[new]
    fn new(coeffs: Vec<f64>, innovation_var: f64) -> PyResult<Self> {
        core::ArModel::new(coeffs, innovation_var).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn reference() -> Self {
        Self(core::ArModel::reference())
    }

    #[getter]
    fn order(&self) -> usize {
        self.0.order()
    }

    #[getter]
    fn coeffs(&self) -> Vec<f64> {
        self.0.coeffs().to_vec()
    }

    #[getter]
    fn innovation_var(&self) -> f64 {
        self.0.innovation_var()
    }

    fn spectral_radius(&self) -> f64 {
        self.0.spectral_radius()
    }

    fn is_stationary(&self) -> bool {
        core::channel::validate_stationarity(&self.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "ArModel(coeffs={:?}, innovation_var={})",
            self.0.coeffs(),
            self.0.innovation_var()
        )
    }
}

#[pyclass(name = "NoiseSpec", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyNoiseSpec(core::NoiseSpec);

#[pymethods]
impl PyNoiseSpec {
    #[new]
    fn new(obs_noise_var: f64) -> PyResult<Self> {
        core::NoiseSpec::new(obs_noise_var).map(Self).map_err(py_err)
    }

    #[getter]
    fn obs_noise_var(&self) -> f64 {
        self.0.obs_noise_var()
    }

    fn __repr__(&self) -> String {
        format!("NoiseSpec(obs_noise_var={})", self.0.obs_noise_var())
    }
}

#[pyclass(name = "UniformQuantizer", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyQuantizer(core::UniformQuantizer);

#[pymethods]
impl PyQuantizer {
    #[new]
    fn new(bits: u32, step: f64) -> PyResult<Self> {
        core::UniformQuantizer::new(bits, step).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn with_clip(bits: u32, clip: f64) -> PyResult<Self> {
        core::UniformQuantizer::with_clip(bits, clip).map(Self).map_err(py_err)
    }

    #[getter]
    fn bits(&self) -> u32 {
        self.0.bits()
    }

    #[getter]
    fn step(&self) -> f64 {
        self.0.step()
    }

    #[getter]
    fn clip(&self) -> f64 {
        self.0.clip()
    }

    fn noise_var(&self) -> f64 {
        self.0.noise_var()
    }

    /// Returns (index, reconstruction level).
    fn quantize(&self, v: f64) -> (u32, f64) {
        self.0.quantize(v)
    }

    fn dequantize(&self, index: u32) -> PyResult<f64> {
        self.0.dequantize(index).map_err(py_err)
    }
}

#[pyclass(name = "Encoder")]
struct PyEncoder(core::EncoderState);

#[pymethods]
impl PyEncoder {
    #[new]
    fn new(model: &PyArModel, noise: &PyNoiseSpec, quantizer: &PyQuantizer) -> PyResult<Self> {
        core::EncoderState::new(&model.0, &noise.0, quantizer.0)
            .map(Self)
            .map_err(py_err)
    }

    /// Returns (index, reconstruction x̂_k).
    fn encode(&mut self, y: f64) -> (u32, f64) {
        self.0.encode_step(y)
    }

    #[getter]
    fn gain(&self) -> f64 {
        self.0.gain()
    }

    #[getter]
    fn pred_err_var(&self) -> f64 {
        self.0.pred_err_var()
    }
}

#[pyclass(name = "Decoder")]
struct PyDecoder(core::DecoderState);

#[pymethods]
impl PyDecoder {
    #[new]
    fn new(model: &PyArModel, quantizer: &PyQuantizer) -> Self {
        Self(core::DecoderState::new(&model.0, quantizer.0))
    }

    fn decode(&mut self, index: u32) -> PyResult<f64> {
        self.0.decode_step(index).map_err(py_err)
    }
}

/// κ_x(0..=max_lag).
#[pyfunction]
fn autocovariance(model: &PyArModel, max_lag: usize) -> PyResult<Vec<f64>> {
    core::channel::autocovariance(&model.0, max_lag)
        .map(|a| a.lags().to_vec())
        .map_err(py_err)
}

/// Returns (x, y).
#[pyfunction]
#[pyo3(signature = (model, noise, n, seed, burn_in=None))]
fn generate_trace(
    model: &PyArModel,
    noise: &PyNoiseSpec,
    n: usize,
    seed: u64,
    burn_in: Option<usize>,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let burn_in = burn_in.unwrap_or_else(|| core::channel::default_burn_in(&model.0));
    core::channel::generate_trace(&model.0, &noise.0, n, seed, burn_in)
        .map(|t| (t.x, t.y))
        .map_err(py_err)
}

/// Returns (theta, sigma_p_sq).
#[pyfunction]
fn mmse_coefficients(
    model: &PyArModel,
    noise: &PyNoiseSpec,
    order: usize,
) -> PyResult<(Vec<f64>, f64)> {
    let acov = core::channel::autocovariance(&model.0, order.max(1)).map_err(py_err)?;
    let c = core::predictor::mmse_coefficients(&acov, &noise.0, order).map_err(py_err)?;
    Ok((c.theta().to_vec(), c.sigma_p_sq()))
}

/// Returns (alpha, sigma_z_sq).
#[pyfunction]
fn zh_estimator(model: &PyArModel, noise: &PyNoiseSpec) -> PyResult<(f64, f64)> {
    let acov = core::channel::autocovariance(&model.0, 1).map_err(py_err)?;
    let z = core::predictor::zh_estimator(&acov, &noise.0).map_err(py_err)?;
    Ok((z.alpha(), z.sigma_z_sq()))
}

fn scheme_params(model: &PyArModel, noise: &PyNoiseSpec, order: usize) -> PyResult<SchemeParams> {
    SchemeParams::new(&model.0, &noise.0, order).map_err(py_err)
}

/// Rate in bits per sample for a scheme tag such as "periodic".
#[pyfunction]
#[pyo3(signature = (scheme, distortion, model, noise, order, normalized=false))]
fn rate(
    scheme: &str,
    distortion: f64,
    model: &PyArModel,
    noise: &PyNoiseSpec,
    order: usize,
    normalized: bool,
) -> PyResult<f64> {
    let s: Scheme = scheme.parse().map_err(py_err)?;
    let p = scheme_params(model, noise, order)?;
    s.rate(distortion, &p, BoundForm::from_flag(normalized))
        .map_err(py_err)
}

/// Distortion floor of a scheme.
#[pyfunction]
fn floor(scheme: &str, model: &PyArModel, noise: &PyNoiseSpec, order: usize) -> PyResult<f64> {
    let s: Scheme = scheme.parse().map_err(py_err)?;
    Ok(s.floor(&scheme_params(model, noise, order)?))
}

/// Log-spaced sweep; returns a list of (distortion, rate).
#[pyfunction]
#[pyo3(signature = (scheme, model, noise, order, d_min, d_max, n_points, normalized=false))]
#[allow(clippy::too_many_arguments)]
fn sweep(
    scheme: &str,
    model: &PyArModel,
    noise: &PyNoiseSpec,
    order: usize,
    d_min: f64,
    d_max: f64,
    n_points: usize,
    normalized: bool,
) -> PyResult<Vec<(f64, f64)>> {
    let s: Scheme = scheme.parse().map_err(py_err)?;
    let p = scheme_params(model, noise, order)?;
    let c = bounds::sweep(s, &p, d_min, d_max, n_points, BoundForm::from_flag(normalized))
        .map_err(py_err)?;
    Ok(c.points.iter().map(|pt| (pt.distortion, pt.rate)).collect())
}

#[pyfunction]
#[pyo3(signature = (model, noise, bits, loading=4.0))]
fn load_quantizer(
    model: &PyArModel,
    noise: &PyNoiseSpec,
    bits: u32,
    loading: f64,
) -> PyResult<PyQuantizer> {
    core::codec::load_quantizer(&model.0, &noise.0, bits, loading)
        .map(PyQuantizer)
        .map_err(py_err)
}

type CodecRun = (Vec<u32>, Vec<f64>, Vec<f64>, f64);

/// Returns (indices, encoder_recon, decoder_recon, empirical_mse).
#[pyfunction]
fn run_codec(
    model: &PyArModel,
    noise: &PyNoiseSpec,
    quantizer: &PyQuantizer,
    x: Vec<f64>,
    y: Vec<f64>,
) -> PyResult<CodecRun> {
    let out = core::codec::run_codec(&model.0, &noise.0, quantizer.0, &x, &y).map_err(py_err)?;
    Ok((out.indices, out.encoder_recon, out.decoder_recon, out.empirical_mse))
}

#[pyfunction]
fn pack_indices(indices: Vec<u32>, bits: u32) -> PyResult<Vec<u8>> {
    core::codec::pack_indices(&indices, bits).map_err(py_err)
}

#[pyfunction]
fn unpack_indices(data: Vec<u8>, bits: u32, count: usize) -> PyResult<Vec<u32>> {
    core::codec::unpack_indices(&data, bits, count).map_err(py_err)
}

/// Predicted steady-state MSE of the closed-loop codec.
#[pyfunction]
#[pyo3(signature = (model, noise, bits, loading=4.0))]
fn steady_state_mse(model: &PyArModel, noise: &PyNoiseSpec, bits: u32, loading: f64) -> PyResult<f64> {
    harness::experiments::predicted_steady_state(&model.0, &noise.0, bits, loading).map_err(py_err)
}

fn parse_config(text: &str) -> PyResult<ExperimentConfig> {
    text.parse().map_err(py_err)
}

/// Theory sweep for a key=value config; returns CSV text.
#[pyfunction]
fn theory_csv(config: &str) -> PyResult<String> {
    let sweep = harness::run_theory_sweep(&parse_config(config)?).map_err(py_err)?;
    Ok(harness::csv::to_csv_string(&sweep.rows))
}

/// Monte Carlo codec comparison for a key=value config; returns CSV text.
#[pyfunction]
fn codec_csv(py: Python<'_>, config: &str) -> PyResult<String> {
    let cfg = parse_config(config)?;
    let rows = py
        .detach(|| harness::run_codec_experiment(&cfg))
        .map_err(py_err)?;
    Ok(harness::csv::to_csv_string(&rows))
}

#[pymodule]
#[pyo3(name = "csi_feedback")]
fn init_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyArModel>()?;
    m.add_class::<PyNoiseSpec>()?;
    m.add_class::<PyQuantizer>()?;
    m.add_class::<PyEncoder>()?;
    m.add_class::<PyDecoder>()?;
    m.add_function(wrap_pyfunction!(autocovariance, m)?)?;
    m.add_function(wrap_pyfunction!(generate_trace, m)?)?;
    m.add_function(wrap_pyfunction!(mmse_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(zh_estimator, m)?)?;
    m.add_function(wrap_pyfunction!(rate, m)?)?;
    m.add_function(wrap_pyfunction!(floor, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(load_quantizer, m)?)?;
    m.add_function(wrap_pyfunction!(run_codec, m)?)?;
    m.add_function(wrap_pyfunction!(pack_indices, m)?)?;
    m.add_function(wrap_pyfunction!(unpack_indices, m)?)?;
    m.add_function(wrap_pyfunction!(steady_state_mse, m)?)?;
    m.add_function(wrap_pyfunction!(theory_csv, m)?)?;
    m.add_function(wrap_pyfunction!(codec_csv, m)?)?;
    Ok(())
}
