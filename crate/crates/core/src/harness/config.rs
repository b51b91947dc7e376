//! Flat `key = value` experiment configuration.
//!
//! One key per line, `#` starts a comment, list values are comma-separated.
//!
//! ```text
//! ar_coeffs = 0.5, 0.2, 0.1, 0.05
//! innovation_var = 1
//! obs_noise_var = 1
//! schemes = periodic, aperiodic_prediction
//! quantizer_bits = 2, 4, 6
//! ```

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::bounds::Scheme;
use crate::channel::{ArModel, NoiseSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ArModel,
    pub noise: NoiseSpec,
    /// Extra σ_ψ² values for theory sweeps; empty means just the model's.
    pub innovation_var_sweep: Vec<f64>,
    /// Extra σ_ξ² values for theory sweeps; empty means just `noise`.
    pub obs_noise_var_sweep: Vec<f64>,
    pub predictor_order: usize,
    pub schemes: Vec<Scheme>,
    /// Explicit distortion grid bounds. When absent each scheme uses its
    /// own range from just above its floor to 10 σ_x².
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    pub n_points: usize,
    pub quantizer_bits: Vec<u32>,
    /// Quantizer half-range in standard deviations of the quantized signal.
    pub quantizer_loading: f64,
    pub trials: usize,
    pub samples_per_trial: usize,
    pub burn_in: Option<usize>,
    /// Leading samples of each trial excluded from empirical MSEs.
    pub warmup: Option<usize>,
    pub seed: u64,
    pub normalized_bounds: bool,
    pub output_path: Option<PathBuf>,
    /// R_q used by the steady-state check in `validate`.
    pub validate_bits: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: ArModel::reference(),
            noise: NoiseSpec::new(1.0).expect("positive"),
            innovation_var_sweep: Vec::new(),
            obs_noise_var_sweep: Vec::new(),
            predictor_order: 4,
            schemes: Scheme::ALL.to_vec(),
            d_min: None,
            d_max: None,
            n_points: 50,
            quantizer_bits: (2..=10).collect(),
            quantizer_loading: 4.0,
            trials: 4,
            samples_per_trial: 100_000,
            burn_in: None,
            warmup: None,
            seed: 0,
            normalized_bounds: false,
            output_path: None,
            validate_bits: 6,
        }
    }
}

const KEYS: &[&str] = &[
    "ar_coeffs",
    "innovation_var",
    "obs_noise_var",
    "innovation_var_sweep",
    "obs_noise_var_sweep",
    "predictor_order",
    "schemes",
    "d_min",
    "d_max",
    "n_points",
    "quantizer_bits",
    "quantizer_loading",
    "trials",
    "samples_per_trial",
    "burn_in",
    "warmup",
    "seed",
    "normalized_bounds",
    "output_path",
    "validate_bits",
];

fn config_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("line {line}: {msg}"))
}

fn scalar<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| config_err(line, format!("cannot parse '{v}' for {key}")))
}

fn list<T: FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| scalar(line, key, s))
        .collect()
}

fn boolean(line: usize, key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(config_err(line, format!("{key} expects true/false, got '{v}'"))),
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.predictor_order == 0 {
            return bad("predictor_order must be >= 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        if self.samples_per_trial < 10 * self.predictor_order.max(self.model.order()) {
            return bad(format!(
                "samples_per_trial must be at least 10 x order (got {})",
                self.samples_per_trial
            ));
        }
        if self.n_points < 2 {
            return bad("n_points must be >= 2".into());
        }
        match (self.d_min, self.d_max) {
            (Some(lo), Some(hi)) if !(lo > 0.0 && hi > lo) => {
                return bad(format!("need 0 < d_min < d_max (got {lo}, {hi})"));
            }
            (Some(_), None) | (None, Some(_)) => {
                return bad("d_min and d_max must be given together".into());
            }
            _ => {}
        }
        if self.schemes.is_empty() {
            return bad("schemes must not be empty".into());
        }
        if self.quantizer_bits.iter().any(|&b| b == 0 || b > 24) || self.validate_bits == 0 {
            return bad("quantizer bits must lie in 1..=24".into());
        }
        if !(self.quantizer_loading > 0.0 && self.quantizer_loading.is_finite()) {
            return bad("quantizer_loading must be positive".into());
        }
        if let Some(w) = self.warmup {
            if w >= self.samples_per_trial {
                return bad("warmup must be smaller than samples_per_trial".into());
            }
        }
        if self.innovation_var_sweep.iter().any(|v| !(*v > 0.0)) {
            return bad("innovation_var_sweep values must be positive".into());
        }
        if self.obs_noise_var_sweep.iter().any(|v| !(*v >= 0.0)) {
            return bad("obs_noise_var_sweep values must be non-negative".into());
        }
        if !(self.model.innovation_var() > 0.0) {
            return bad("innovation_var must be positive".into());
        }
        self.model
            .check_stationary()
            .map_err(|e| Error::Config(e.to_string()))
    }

    /// σ_ψ² values swept by theory runs.
    pub fn innovation_vars(&self) -> Vec<f64> {
        if self.innovation_var_sweep.is_empty() {
            vec![self.model.innovation_var()]
        } else {
            self.innovation_var_sweep.clone()
        }
    }

    /// σ_ξ² values swept by theory runs.
    pub fn obs_noise_vars(&self) -> Vec<f64> {
        if self.obs_noise_var_sweep.is_empty() {
            vec![self.noise.obs_noise_var()]
        } else {
            self.obs_noise_var_sweep.clone()
        }
    }

    /// Samples dropped at the start of each trial before scoring.
    pub fn warmup_samples(&self) -> usize {
        self.warmup.unwrap_or(self.samples_per_trial / 10)
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut coeffs = cfg.model.coeffs().to_vec();
        let mut innovation_var = cfg.model.innovation_var();
        let mut obs_noise_var = cfg.noise.obs_noise_var();
        let mut order = None;
        let mut seen = BTreeSet::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_err(line, format!("expected key = value, got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(config_err(line, format!("unknown key '{key}'")));
            }
            if !seen.insert(key.to_string()) {
                return Err(config_err(line, format!("duplicate key '{key}'")));
            }
            match key {
                "ar_coeffs" => coeffs = list(line, key, value)?,
                "innovation_var" => innovation_var = scalar(line, key, value)?,
                "obs_noise_var" => obs_noise_var = scalar(line, key, value)?,
                "innovation_var_sweep" => cfg.innovation_var_sweep = list(line, key, value)?,
                "obs_noise_var_sweep" => cfg.obs_noise_var_sweep = list(line, key, value)?,
                "predictor_order" => order = Some(scalar(line, key, value)?),
                "schemes" => {
                    cfg.schemes = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse().map_err(|e: Error| config_err(line, e)))
                        .collect::<Result<_>>()?
                }
                "d_min" => cfg.d_min = Some(scalar(line, key, value)?),
                "d_max" => cfg.d_max = Some(scalar(line, key, value)?),
                "n_points" => cfg.n_points = scalar(line, key, value)?,
                "quantizer_bits" => cfg.quantizer_bits = list(line, key, value)?,
                "quantizer_loading" => cfg.quantizer_loading = scalar(line, key, value)?,
                "trials" => cfg.trials = scalar(line, key, value)?,
                "samples_per_trial" => cfg.samples_per_trial = scalar(line, key, value)?,
                "burn_in" => cfg.burn_in = Some(scalar(line, key, value)?),
                "warmup" => cfg.warmup = Some(scalar(line, key, value)?),
                "seed" => cfg.seed = scalar(line, key, value)?,
                "normalized_bounds" => cfg.normalized_bounds = boolean(line, key, value)?,
                "output_path" => cfg.output_path = Some(PathBuf::from(value)),
                "validate_bits" => cfg.validate_bits = scalar(line, key, value)?,
                _ => unreachable!("key list checked above"),
            }
        }

        cfg.model =
            ArModel::new(coeffs, innovation_var).map_err(|e| Error::Config(e.to_string()))?;
        cfg.noise = NoiseSpec::new(obs_noise_var).map_err(|e| Error::Config(e.to_string()))?;
        cfg.predictor_order = order.unwrap_or(cfg.model.order());
        cfg.validate()?;
        Ok(cfg)
    }
}
