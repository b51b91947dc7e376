//! Closed-loop innovation codec.
//!
//! Encoder, per sample y_k:
//!
//! ```text
//! x̂_{k|k-1} = Σ_m a_m x̂_{k-m}
//! λ_k       = P_k / (P_k + σ_ξ²)              P_k = E[e²_{k|k-1}]
//! ζ_k       = λ_k (y_k − x̂_{k|k-1})
//! (i, ζ^Q)  = Q(ζ_k)
//! x̂_k       = x̂_{k|k-1} + ζ^Q
//! ```
//!
//! The decoder only sees `i` and rebuilds x̂*_k = Σ_m a_m x̂*_{k-m} + Q⁻¹(i).
//! Both sides run the same prediction over the same history, so with equal
//! initial state their reconstructions agree bit for bit.

use crate::analysis;
use crate::channel::{autocovariance, ArModel, NoiseSpec};
use crate::error::{Error, Result};
use crate::history::History;

const MAX_BITS: u32 = 24;

/// Midrise uniform quantizer with 2^bits levels ±(i+½)Δ and saturation at
/// the outermost level. Zero input maps to +Δ/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformQuantizer {
    bits: u32,
    step: f64,
}

impl UniformQuantizer {
    pub fn new(bits: u32, step: f64) -> Result<Self> {
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::InvalidQuantizer(format!(
                "bits must be in 1..={MAX_BITS}, got {bits}"
            )));
        }
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidQuantizer(format!(
                "step must be positive and finite, got {step}"
            )));
        }
        Ok(Self { bits, step })
    }

    /// Quantizer whose saturation half-range is `clip`: Δ = clip / 2^{bits-1}.
    pub fn with_clip(bits: u32, clip: f64) -> Result<Self> {
        if bits == 0 || bits > MAX_BITS {
            return Err(Error::InvalidQuantizer(format!(
                "bits must be in 1..={MAX_BITS}, got {bits}"
            )));
        }
        Self::new(bits, clip / (1u32 << (bits - 1)) as f64)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn levels(&self) -> u32 {
        1u32 << self.bits
    }

    /// C = 2^{bits-1} Δ.
    pub fn clip(&self) -> f64 {
        (1u32 << (self.bits - 1)) as f64 * self.step
    }

    /// Δ²/12, the high-resolution noise variance.
    pub fn noise_var(&self) -> f64 {
        self.step * self.step / 12.0
    }

    pub fn quantize(&self, v: f64) -> (u32, f64) {
        let half = (self.levels() / 2) as i64;
        let cell = (v / self.step).floor() as i64;
        let index = (cell + half).clamp(0, self.levels() as i64 - 1) as u32;
        (index, self.reconstruct(index))
    }

    pub fn dequantize(&self, index: u32) -> Result<f64> {
        if index >= self.levels() {
            return Err(Error::UnknownIndex {
                index,
                levels: self.levels(),
            });
        }
        Ok(self.reconstruct(index))
    }

    fn reconstruct(&self, index: u32) -> f64 {
        let half = (self.levels() / 2) as f64;
        (index as f64 - half + 0.5) * self.step
    }
}

pub fn quantize(q: &UniformQuantizer, v: f64) -> (u32, f64) {
    q.quantize(v)
}

/// Prediction-error variance recursion with a ring of per-lag filtered
/// variances E[e²_{k-m}], m = 1..L.
#[derive(Debug, Clone)]
pub(crate) struct ErrorVarianceTracker {
    coeffs_sq: Vec<f64>,
    drive_var: f64,
    noise_var: f64,
    quant_var: f64,
    filtered: History,
    pred_err_var: f64,
    gain: f64,
}

impl ErrorVarianceTracker {
    /// Starts from the uninformed prior: every error variance equals σ_x².
    pub(crate) fn new(model: &ArModel, noise: &NoiseSpec, quant_var: f64) -> Result<Self> {
        let prior = autocovariance(model, 0)?.variance();
        let mut t = Self {
            coeffs_sq: model.coeffs().iter().map(|a| a * a).collect(),
            drive_var: model.innovation_var(),
            noise_var: noise.obs_noise_var(),
            quant_var,
            filtered: History::filled(model.order(), prior),
            pred_err_var: prior,
            gain: 0.0,
        };
        t.update_gain();
        Ok(t)
    }

    pub(crate) fn pred_err_var(&self) -> f64 {
        self.pred_err_var
    }

    pub(crate) fn gain(&self) -> f64 {
        self.gain
    }

    pub(crate) fn update_gain(&mut self) -> f64 {
        let p = self.pred_err_var;
        let denom = p + self.noise_var;
        self.gain = if denom > 0.0 { p / denom } else { 1.0 };
        self.gain
    }

    pub(crate) fn propagate(&mut self, filtered_err_var: f64) -> f64 {
        self.filtered.push(filtered_err_var);
        let sum_sq: f64 = self.coeffs_sq.iter().sum();
        self.pred_err_var =
            self.filtered.dot(&self.coeffs_sq) + self.drive_var + sum_sq * self.quant_var;
        self.pred_err_var
    }

    /// (1 − λ_k) P_k.
    pub(crate) fn filtered_err_var(&self) -> f64 {
        (1.0 - self.gain) * self.pred_err_var
    }

    /// One gain update followed by one propagation. Returns the new P.
    pub(crate) fn step(&mut self) -> f64 {
        self.update_gain();
        let f = self.filtered_err_var();
        self.propagate(f)
    }
}

#[derive(Debug, Clone)]
pub struct EncoderState {
    history: History,
    tracker: ErrorVarianceTracker,
    model: ArModel,
    noise: NoiseSpec,
    quantizer: UniformQuantizer,
}

impl EncoderState {
    /// Zero reconstruction history, prediction-error variance σ_x².
    pub fn new(model: &ArModel, noise: &NoiseSpec, quantizer: UniformQuantizer) -> Result<Self> {
        Ok(Self {
            history: History::filled(model.order(), 0.0),
            tracker: ErrorVarianceTracker::new(model, noise, quantizer.noise_var())?,
            model: model.clone(),
            noise: *noise,
            quantizer,
        })
    }

    pub fn model(&self) -> &ArModel {
        &self.model
    }

    pub fn noise(&self) -> &NoiseSpec {
        &self.noise
    }

    pub fn quantizer(&self) -> &UniformQuantizer {
        &self.quantizer
    }

    /// Last L reconstructions, newest first.
    pub fn history(&self) -> Vec<f64> {
        self.history.to_vec()
    }

    /// E[e²_{k|k-1}] for the next sample.
    pub fn pred_err_var(&self) -> f64 {
        self.tracker.pred_err_var()
    }

    /// Gain used for the most recent sample (or the initial gain).
    pub fn gain(&self) -> f64 {
        self.tracker.gain()
    }

    /// x̂_{k|k-1} = Σ_m a_m x̂_{k-m}.
    pub fn predict_from_history(&self) -> f64 {
        self.history.dot(self.model.coeffs())
    }

    /// λ_k = P_k (P_k + σ_ξ²)⁻¹, stored in the state.
    pub fn update_gain(&mut self) -> f64 {
        self.tracker.update_gain()
    }

    /// Pushes E[e²_k] into the per-lag ring and returns the next
    /// E[e²_{k+1|k}] = Σ a_m² E[e²_{k+1-m}] + σ_ψ² + Σ a_m² Δ²/12.
    pub fn propagate_pred_err(&mut self, filtered_err_var: f64) -> f64 {
        self.tracker.propagate(filtered_err_var)
    }

    /// Encodes one observation; returns the codeword index and x̂_k.
    pub fn encode_step(&mut self, y_k: f64) -> (u32, f64) {
        let predicted = self.predict_from_history();
        let gain = self.update_gain();
        let weighted = gain * (y_k - predicted);
        let (index, level) = self.quantizer.quantize(weighted);
        let recon = predicted + level;
        self.history.push(recon);
        let filtered = self.tracker.filtered_err_var();
        self.propagate_pred_err(filtered);
        (index, recon)
    }
}

#[derive(Debug, Clone)]
pub struct DecoderState {
    history: History,
    model: ArModel,
    quantizer: UniformQuantizer,
}

impl DecoderState {
    pub fn new(model: &ArModel, quantizer: UniformQuantizer) -> Self {
        Self {
            history: History::filled(model.order(), 0.0),
            model: model.clone(),
            quantizer,
        }
    }

    pub fn history(&self) -> Vec<f64> {
        self.history.to_vec()
    }

    pub fn decode_step(&mut self, index: u32) -> Result<f64> {
        let level = self.quantizer.dequantize(index)?;
        let recon = self.history.dot(self.model.coeffs()) + level;
        self.history.push(recon);
        Ok(recon)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodecOutput {
    pub indices: Vec<u32>,
    pub encoder_recon: Vec<f64>,
    pub decoder_recon: Vec<f64>,
    /// MSE of the encoder reconstruction against the true channel state.
    pub empirical_mse: f64,
}

impl CodecOutput {
    pub fn in_sync(&self) -> bool {
        self.encoder_recon.len() == self.decoder_recon.len()
            && self
                .encoder_recon
                .iter()
                .zip(&self.decoder_recon)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Runs encoder and decoder over the observations `y`; `x` is the true state
/// used only to score the reconstruction.
pub fn run_codec(
    model: &ArModel,
    noise: &NoiseSpec,
    quantizer: UniformQuantizer,
    x: &[f64],
    y: &[f64],
) -> Result<CodecOutput> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let mut enc = EncoderState::new(model, noise, quantizer)?;
    let mut dec = DecoderState::new(model, quantizer);
    let mut indices = Vec::with_capacity(y.len());
    let mut encoder_recon = Vec::with_capacity(y.len());
    let mut decoder_recon = Vec::with_capacity(y.len());
    for &obs in y {
        let (i, r) = enc.encode_step(obs);
        indices.push(i);
        encoder_recon.push(r);
        decoder_recon.push(dec.decode_step(i)?);
    }
    let empirical_mse = crate::stats::mse(x, &encoder_recon);
    Ok(CodecOutput {
        indices,
        encoder_recon,
        decoder_recon,
        empirical_mse,
    })
}

/// Quantizer whose half-range is `loading` standard deviations of the
/// steady-state weighted innovation ζ, var(ζ) = λ²(P + σ_ξ²).
///
/// Δ and the steady state depend on each other through the Δ²/12 term, so
/// the pair is iterated to a joint fixed point.
pub fn load_quantizer(
    model: &ArModel,
    noise: &NoiseSpec,
    bits: u32,
    loading: f64,
) -> Result<UniformQuantizer> {
    if !(loading > 0.0) {
        return Err(Error::InvalidQuantizer(format!(
            "loading factor must be positive, got {loading}"
        )));
    }
    let mut quant_var = 0.0;
    let mut q = None;
    for _ in 0..500 {
        let gp = analysis::converged_gain(model, noise, quant_var)?;
        let zeta_var = gp.lambda * gp.lambda * (gp.pred_err_var + noise.obs_noise_var());
        let next = UniformQuantizer::with_clip(bits, loading * zeta_var.sqrt())?;
        let done = q
            .map(|prev: UniformQuantizer| (prev.step() - next.step()).abs() <= 1e-12 * next.step())
            .unwrap_or(false);
        quant_var = next.noise_var();
        q = Some(next);
        if done {
            return Ok(next);
        }
    }
    Err(Error::NonConvergence { steps: 500 })
}

/// Packs indices as a contiguous most-significant-bit-first bit stream of
/// `bits` bits per index. The final byte is zero-padded.
pub fn pack_indices(indices: &[u32], bits: u32) -> Result<Vec<u8>> {
    if bits == 0 || bits > 32 {
        return Err(Error::InvalidArgument(format!("cannot pack {bits}-bit indices")));
    }
    let total = indices.len() * bits as usize;
    let mut out = vec![0u8; total.div_ceil(8)];
    let mut pos = 0usize;
    for &idx in indices {
        if bits < 32 && idx >> bits != 0 {
            return Err(Error::UnknownIndex {
                index: idx,
                levels: 1 << bits,
            });
        }
        for b in (0..bits).rev() {
            if (idx >> b) & 1 == 1 {
                out[pos / 8] |= 0x80 >> (pos % 8);
            }
            pos += 1;
        }
    }
    Ok(out)
}

pub fn unpack_indices(bytes: &[u8], bits: u32, count: usize) -> Result<Vec<u32>> {
    if bits == 0 || bits > 32 {
        return Err(Error::InvalidArgument(format!("cannot unpack {bits}-bit indices")));
    }
    let needed = (count * bits as usize).div_ceil(8);
    if bytes.len() < needed {
        return Err(Error::DimensionMismatch {
            expected: needed,
            got: bytes.len(),
        });
    }
    let mut pos = 0usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut v = 0u32;
        for _ in 0..bits {
            let bit = (bytes[pos / 8] >> (7 - pos % 8)) & 1;
            v = (v << 1) | bit as u32;
            pos += 1;
        }
        out.push(v);
    }
    Ok(out)
}
