//! Theory sweeps, Monte Carlo codec comparisons and theory-vs-simulation
//! checks. Trial `i` uses seed `seed + i`; trial results are reduced in
//! trial order, so output does not depend on thread scheduling.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analysis::{self, ar1_fit, converged_gain, steady_state, Ar1Approx};
use crate::bounds::{default_range, sweep, BoundForm, SchemeParams};
use crate::channel::{autocovariance, default_burn_in, generate_trace, ArModel, ChannelTrace, NoiseSpec};
use crate::codec::{load_quantizer, run_codec, UniformQuantizer};
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::csv::{CsvRow, Source};
use crate::predictor::{mmse_coefficients, zh_estimate, zh_estimator, zh_mse, PredictorCoefficients};
use crate::stats::{mse, relative_error};

#[derive(Debug, Clone, PartialEq)]
pub struct TheorySweep {
    pub rows: Vec<CsvRow>,
    /// Grid points dropped because they fell at or below a scheme's floor.
    pub skipped: usize,
}

pub fn run_theory_sweep(cfg: &ExperimentConfig) -> Result<TheorySweep> {
    let form = BoundForm::from_flag(cfg.normalized_bounds);
    let mut rows = Vec::new();
    let mut skipped = 0;
    for psi in cfg.innovation_vars() {
        let model = cfg.model.with_innovation_var(psi)?;
        for xi in cfg.obs_noise_vars() {
            let noise = NoiseSpec::new(xi)?;
            let params = SchemeParams::new(&model, &noise, cfg.predictor_order)?;
            for &scheme in &cfg.schemes {
                let (lo, hi) = match (cfg.d_min, cfg.d_max) {
                    (Some(lo), Some(hi)) => (lo, hi),
                    _ => default_range(scheme, &params),
                };
                let curve = sweep(scheme, &params, lo, hi, cfg.n_points, form)?;
                skipped += curve.skipped;
                rows.extend(curve.points.iter().map(|p| CsvRow {
                    scheme: scheme.tag().to_string(),
                    sigma_psi_sq: psi,
                    sigma_xi_sq: xi,
                    distortion: p.distortion,
                    rate_bits: p.rate,
                    source: Source::Theory,
                    seed: 0,
                    n_samples: 0,
                }));
            }
        }
    }
    Ok(TheorySweep { rows, skipped })
}

/// The three feedback schemes compared by simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodecScheme {
    /// Uniform quantization of the Wiener prediction x'_{k+1}.
    DirectQuantization,
    /// AR(1) innovation codec that ignores observation noise (λ = 1).
    Ar1OpenLoop,
    /// Noise-weighted closed-loop innovation codec.
    ProposedClosedLoop,
}

impl CodecScheme {
    pub const ALL: [CodecScheme; 3] = [
        CodecScheme::DirectQuantization,
        CodecScheme::Ar1OpenLoop,
        CodecScheme::ProposedClosedLoop,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            CodecScheme::DirectQuantization => "direct_quantization",
            CodecScheme::Ar1OpenLoop => "ar1_open_loop",
            CodecScheme::ProposedClosedLoop => "proposed_closed_loop",
        }
    }
}

impl fmt::Display for CodecScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for CodecScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CodecScheme::ALL
            .iter()
            .copied()
            .find(|c| c.tag() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown codec scheme '{s}'")))
    }
}

/// Quantizers and coefficients for all three schemes at one bit-width.
#[derive(Debug, Clone)]
pub struct PracticalSetup {
    pub model: ArModel,
    pub noise: NoiseSpec,
    pub predictor: PredictorCoefficients,
    pub ar1: Ar1Approx,
    /// Loaded to ±loading·√(σ_x² + σ_P²).
    pub direct_quantizer: UniformQuantizer,
    /// Loaded to ±loading·σ_ι.
    pub open_loop_quantizer: UniformQuantizer,
    pub proposed_quantizer: UniformQuantizer,
}

impl PracticalSetup {
    pub fn new(
        model: &ArModel,
        noise: &NoiseSpec,
        order: usize,
        bits: u32,
        loading: f64,
    ) -> Result<Self> {
        let acov = autocovariance(model, order.max(1))?;
        let predictor = mmse_coefficients(&acov, noise, order)?;
        let ar1 = ar1_fit(&acov)?;
        let direct_clip = loading * (acov.variance() + predictor.sigma_p_sq()).sqrt();
        Ok(Self {
            model: model.clone(),
            noise: *noise,
            predictor,
            ar1,
            direct_quantizer: UniformQuantizer::with_clip(bits, direct_clip)?,
            open_loop_quantizer: UniformQuantizer::with_clip(bits, loading * ar1.iota_var.sqrt())?,
            proposed_quantizer: load_quantizer(model, noise, bits, loading)?,
        })
    }

    /// Reconstruction of x_k for every k of the trace. Samples without a
    /// full predictor window are reconstructed as 0 by the direct scheme.
    pub fn reconstruct(&self, scheme: CodecScheme, trace: &ChannelTrace) -> Result<Vec<f64>> {
        let y = &trace.y;
        match scheme {
            CodecScheme::DirectQuantization => {
                let theta = self.predictor.theta();
                let l = theta.len();
                let mut out = vec![0.0; y.len()];
                for k in l..y.len() {
                    let pred: f64 = theta.iter().enumerate().map(|(i, t)| t * y[k - 1 - i]).sum();
                    out[k] = self.direct_quantizer.quantize(pred).1;
                }
                Ok(out)
            }
            CodecScheme::Ar1OpenLoop => {
                let mut prev = 0.0;
                Ok(y
                    .iter()
                    .map(|&obs| {
                        let pred = self.ar1.beta * prev;
                        prev = pred + self.open_loop_quantizer.quantize(obs - pred).1;
                        prev
                    })
                    .collect())
            }
            CodecScheme::ProposedClosedLoop => Ok(run_codec(
                &self.model,
                &self.noise,
                self.proposed_quantizer,
                &trace.x,
                y,
            )?
            .encoder_recon),
        }
    }

    /// MSE against x over samples `warmup..`.
    pub fn mse(&self, scheme: CodecScheme, trace: &ChannelTrace, warmup: usize) -> Result<f64> {
        let recon = self.reconstruct(scheme, trace)?;
        if warmup >= recon.len() {
            return Err(Error::InvalidArgument("warmup covers the whole trace".into()));
        }
        Ok(mse(&trace.x[warmup..], &recon[warmup..]))
    }
}

fn trial_trace(cfg: &ExperimentConfig, model: &ArModel, trial: usize) -> Result<ChannelTrace> {
    let burn_in = cfg.burn_in.unwrap_or_else(|| default_burn_in(model));
    generate_trace(
        model,
        &cfg.noise,
        cfg.samples_per_trial,
        cfg.seed.wrapping_add(trial as u64),
        burn_in,
    )
}

/// Mean empirical MSE per (bit-width, scheme), one simulation row each.
pub fn run_codec_experiment(cfg: &ExperimentConfig) -> Result<Vec<CsvRow>> {
    let setups: Vec<PracticalSetup> = cfg
        .quantizer_bits
        .iter()
        .map(|&b| {
            PracticalSetup::new(&cfg.model, &cfg.noise, cfg.predictor_order, b, cfg.quantizer_loading)
        })
        .collect::<Result<_>>()?;
    let warmup = cfg.warmup_samples();

    let per_trial: Vec<Vec<f64>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let trace = trial_trace(cfg, &cfg.model, trial)?;
            let mut out = Vec::with_capacity(setups.len() * CodecScheme::ALL.len());
            for setup in &setups {
                for scheme in CodecScheme::ALL {
                    out.push(setup.mse(scheme, &trace, warmup)?);
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let scored = (cfg.samples_per_trial - warmup) as u64 * cfg.trials as u64;
    let mut rows = Vec::new();
    for (bi, &bits) in cfg.quantizer_bits.iter().enumerate() {
        for (si, scheme) in CodecScheme::ALL.iter().enumerate() {
            let idx = bi * CodecScheme::ALL.len() + si;
            let mean = per_trial.iter().map(|t| t[idx]).sum::<f64>() / cfg.trials as f64;
            rows.push(CsvRow {
                scheme: scheme.tag().to_string(),
                sigma_psi_sq: cfg.model.innovation_var(),
                sigma_xi_sq: cfg.noise.obs_noise_var(),
                distortion: mean,
                rate_bits: bits as f64,
                source: Source::Simulation,
                seed: cfg.seed,
                n_samples: scored,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub analytic: f64,
    pub empirical: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn relative_error(&self) -> f64 {
        relative_error(self.empirical, self.analytic)
    }

    pub fn passed(&self) -> bool {
        self.relative_error() < self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<14} analytic={:.6} empirical={:.6} rel_err={:.4} tol={}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.analytic,
            self.empirical,
            self.relative_error(),
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub n_samples: usize,
    pub seed: u64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples={} seed={}", self.n_samples, self.seed)?;
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(f, "{}", if self.passed() { "all checks passed" } else { "validation failed" })
    }
}

pub const MIN_VALIDATION_SAMPLES: usize = 100_000;

/// Compares σ_P², σ_Z² and ς̃_∞ with their empirical counterparts on one
/// trace of `samples_per_trial` samples. The exact MSE of the zero-holding
/// forecast is reported next to σ_Z², since the two differ when σ_ξ² > 0.
pub fn validate_theory(cfg: &ExperimentConfig) -> Result<ValidationReport> {
    if cfg.samples_per_trial < MIN_VALIDATION_SAMPLES {
        return Err(Error::Config(format!(
            "validate needs samples_per_trial >= {MIN_VALIDATION_SAMPLES}"
        )));
    }
    let model = &cfg.model;
    let noise = &cfg.noise;
    let order = cfg.predictor_order;
    let trace = trial_trace(cfg, model, 0)?;
    let acov = autocovariance(model, order.max(1))?;

    let pred = mmse_coefficients(&acov, noise, order)?;
    let theta = pred.theta();
    let (mut sq, mut count) = (0.0, 0usize);
    for k in order..trace.len() {
        let p: f64 = theta.iter().enumerate().map(|(i, t)| t * trace.y[k - 1 - i]).sum();
        sq += (trace.x[k] - p).powi(2);
        count += 1;
    }
    let pred_check = Check {
        name: "sigma_p_sq".into(),
        analytic: pred.sigma_p_sq(),
        empirical: sq / count as f64,
        tolerance: 0.02,
    };

    let zh = zh_estimator(&acov, noise)?;
    let zh_est: Vec<f64> = trace.y[..trace.len() - 1].iter().map(|y| zh_estimate(*y, &zh)).collect();
    let zh_empirical = mse(&zh_est, &trace.x[1..]);
    let zh_check = Check {
        name: "sigma_z_sq".into(),
        analytic: zh.sigma_z_sq(),
        empirical: zh_empirical,
        tolerance: 0.02,
    };
    let zh_exact_check = Check {
        name: "zh_mse".into(),
        analytic: zh_mse(&acov, noise)?,
        empirical: zh_empirical,
        tolerance: 0.02,
    };

    let q = load_quantizer(model, noise, cfg.validate_bits, cfg.quantizer_loading)?;
    let gain = converged_gain(model, noise, q.noise_var())?;
    let ss = steady_state(&ar1_fit(&acov)?, noise, gain.lambda, q.noise_var())?;
    let out = run_codec(model, noise, q, &trace.x, &trace.y)?;
    let warmup = cfg.warmup_samples();
    let ss_check = Check {
        name: "varsigma_inf".into(),
        analytic: ss.varsigma_inf,
        empirical: mse(&trace.x[warmup..], &out.encoder_recon[warmup..]),
        tolerance: 0.15,
    };

    Ok(ValidationReport {
        checks: vec![pred_check, zh_check, zh_exact_check, ss_check],
        n_samples: trace.len(),
        seed: cfg.seed,
    })
}

/// ς̃_∞ at the converged gain for a quantizer with the given bit-width.
pub fn predicted_steady_state(
    model: &ArModel,
    noise: &NoiseSpec,
    bits: u32,
    loading: f64,
) -> Result<f64> {
    let q = load_quantizer(model, noise, bits, loading)?;
    let gain = converged_gain(model, noise, q.noise_var())?;
    let approx = analysis::ar1_fit(&autocovariance(model, 1)?)?;
    Ok(steady_state(&approx, noise, gain.lambda, q.noise_var())?.varsigma_inf)
}
