//! Rate–distortion lower bounds for the feedback schemes and the
//! high-resolution rate of a uniform quantizer. All logs are base 2.
//!
//! Every rate has a `*_raw` form (the plain expression) and a clamped form
//! (`max(0, raw)`), since rates are bit counts. Orderings between schemes are
//! strict on the raw values; clamping can make two rates tie at zero.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analysis::{self, Ar1Approx};
use crate::channel::{autocovariance, ArModel, Autocovariance, NoiseSpec};
use crate::error::{Error, Result};
use crate::predictor::{mmse_coefficients, obs_toeplitz, zh_estimator, PredictorCoefficients, ZhEstimator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    AperiodicPrediction,
    AperiodicZh,
    Periodic,
    UniformAperiodic,
    PracticalAr1,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::AperiodicPrediction,
        Scheme::AperiodicZh,
        Scheme::Periodic,
        Scheme::UniformAperiodic,
        Scheme::PracticalAr1,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Scheme::AperiodicPrediction => "aperiodic_prediction",
            Scheme::AperiodicZh => "aperiodic_zh",
            Scheme::Periodic => "periodic",
            Scheme::UniformAperiodic => "uniform_aperiodic",
            Scheme::PracticalAr1 => "practical_ar1",
        }
    }

    /// Distortion at or below which the scheme's rate is undefined.
    pub fn floor(&self, p: &SchemeParams) -> f64 {
        match self {
            Scheme::AperiodicPrediction | Scheme::Periodic | Scheme::UniformAperiodic => {
                p.coeffs.sigma_p_sq()
            }
            Scheme::AperiodicZh => p.zh.sigma_z_sq(),
            Scheme::PracticalAr1 => p.practical_floor,
        }
    }

    pub fn raw_rate(&self, d: f64, p: &SchemeParams, form: BoundForm) -> Result<f64> {
        match self {
            Scheme::AperiodicPrediction => aperiodic_prediction_raw(d, p, form),
            Scheme::AperiodicZh => aperiodic_zh_raw(d, p, form),
            Scheme::Periodic => periodic_raw(d, p),
            Scheme::UniformAperiodic => {
                uniform_aperiodic_raw(d, p.acov.variance(), p.coeffs.sigma_p_sq())
            }
            Scheme::PracticalAr1 => {
                analysis::rate_practical_raw(d, &p.ar1, &p.noise, p.practical_gain)
            }
        }
    }

    pub fn rate(&self, d: f64, p: &SchemeParams, form: BoundForm) -> Result<f64> {
        Ok(self.raw_rate(d, p, form)?.max(0.0))
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .iter()
            .copied()
            .find(|sc| sc.tag() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scheme '{s}'")))
    }
}

/// Which algebraic form of the aperiodic bounds to evaluate.
///
/// `Verbatim` keeps the final printed expressions (log|K_y| without the 1/2L
/// factor, ½h(y_k) in the zero-holding bound). `Normalized` uses the
/// per-sample Gaussian forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundForm {
    #[default]
    Verbatim,
    Normalized,
}

impl BoundForm {
    pub fn from_flag(normalized: bool) -> Self {
        if normalized {
            BoundForm::Normalized
        } else {
            BoundForm::Verbatim
        }
    }
}

/// Everything the rate functions need for one (model, noise, L) setting.
#[derive(Debug, Clone)]
pub struct SchemeParams {
    pub model: ArModel,
    pub acov: Autocovariance,
    pub noise: NoiseSpec,
    pub coeffs: PredictorCoefficients,
    pub zh: ZhEstimator,
    pub sigma_nu_sq: f64,
    pub log_det_ky: f64,
    pub ar1: Ar1Approx,
    /// Converged codec gain without quantization noise.
    pub practical_gain: f64,
    pub practical_floor: f64,
}

impl SchemeParams {
    pub fn new(model: &ArModel, noise: &NoiseSpec, order: usize) -> Result<Self> {
        let acov = autocovariance(model, order.max(1))?;
        let coeffs = mmse_coefficients(&acov, noise, order)?;
        let zh = zh_estimator(&acov, noise)?;
        let sigma_nu_sq = nu_variance(model, noise)?;
        let log_det_ky = log_det_ky(&acov, noise, order)?;
        let ar1 = analysis::ar1_fit(&acov)?;
        let practical_gain = analysis::converged_gain(model, noise, 0.0)?.lambda;
        let practical_floor = analysis::practical_floor(&ar1, noise, practical_gain)?;
        Ok(Self {
            model: model.clone(),
            acov,
            noise: *noise,
            coeffs,
            zh,
            sigma_nu_sq,
            log_det_ky,
            ar1,
            practical_gain,
            practical_floor,
        })
    }

    pub fn order(&self) -> usize {
        self.coeffs.order()
    }

    /// ½ Σ_l log₂ θ_l².
    fn theta_term(&self) -> f64 {
        0.5 * self.coeffs.theta().iter().map(|t| (t * t).log2()).sum::<f64>()
    }
}

/// log₂|K_y| for the L×L Toeplitz matrix of κ_y.
pub fn log_det_ky(acov: &Autocovariance, noise: &NoiseSpec, order: usize) -> Result<f64> {
    if order == 0 {
        return Err(Error::InvalidArgument("order must be >= 1".into()));
    }
    let k = obs_toeplitz(acov, noise, order)?;
    let chol = k.cholesky().ok_or(Error::SingularSystem)?;
    let l = chol.l();
    let ld = 2.0 * (0..order).map(|i| l[(i, i)].log2()).sum::<f64>();
    if ld.is_finite() {
        Ok(ld)
    } else {
        Err(Error::SingularSystem)
    }
}

/// σ_ν² = (σ_x²σ_ξ²/(σ_x²+σ_ξ²)) Σ a_m² + σ_ψ² + σ_ξ².
pub fn nu_variance(model: &ArModel, noise: &NoiseSpec) -> Result<f64> {
    let sx = autocovariance(model, 0)?.variance();
    let sn = noise.obs_noise_var();
    Ok(sx * sn / (sx + sn) * model.sum_sq_coeffs() + model.innovation_var() + sn)
}

fn above_floor(d: f64, floor: f64) -> Result<f64> {
    if d > floor && d.is_finite() {
        Ok(d - floor)
    } else {
        Err(Error::DistortionBelowFloor {
            distortion: d,
            floor,
        })
    }
}

pub fn aperiodic_prediction_raw(d_x: f64, p: &SchemeParams, form: BoundForm) -> Result<f64> {
    let gap = above_floor(d_x, p.coeffs.sigma_p_sq())?;
    let entropy = match form {
        BoundForm::Verbatim => p.log_det_ky,
        BoundForm::Normalized => p.log_det_ky / (2.0 * p.order() as f64),
    };
    Ok(entropy - 0.5 * gap.log2() + p.theta_term())
}

/// Aperiodic feedback of the one-step predicted state.
pub fn rate_aperiodic_prediction(d_x: f64, p: &SchemeParams, form: BoundForm) -> Result<f64> {
    Ok(aperiodic_prediction_raw(d_x, p, form)?.max(0.0))
}

pub fn aperiodic_zh_raw(d_x: f64, p: &SchemeParams, form: BoundForm) -> Result<f64> {
    let gap = above_floor(d_x, p.zh.sigma_z_sq())?;
    let var_y = p.acov.variance() + p.noise.obs_noise_var();
    let alpha = p.zh.alpha();
    Ok(match form {
        BoundForm::Verbatim => {
            let h_y = 0.5 * (2.0 * PI * E * var_y).log2();
            0.5 * h_y + 0.5 * alpha.log2() - 0.5 * (2.0 * PI * E * gap).log2()
        }
        BoundForm::Normalized => 0.5 * (alpha * alpha * var_y / gap).log2(),
    })
}

/// Aperiodic feedback under zero-holding.
pub fn rate_aperiodic_zh(d_x: f64, p: &SchemeParams, form: BoundForm) -> Result<f64> {
    Ok(aperiodic_zh_raw(d_x, p, form)?.max(0.0))
}

pub fn periodic_raw(d_x: f64, p: &SchemeParams) -> Result<f64> {
    let gap = above_floor(d_x, p.coeffs.sigma_p_sq())?;
    Ok(0.5 * (p.sigma_nu_sq / gap).log2() + p.theta_term())
}

/// Periodic (innovation) feedback.
pub fn rate_periodic(d_x: f64, p: &SchemeParams) -> Result<f64> {
    Ok(periodic_raw(d_x, p)?.max(0.0))
}

pub fn uniform_aperiodic_raw(mse_target: f64, sigma_x_sq: f64, sigma_p_sq: f64) -> Result<f64> {
    let gap = above_floor(mse_target, sigma_p_sq)?;
    let spread = (2.0 * PI * E * (sigma_x_sq + sigma_p_sq)).sqrt() / 12.0;
    Ok(0.5 * (spread / gap).log2())
}

/// High-resolution uniform quantization of the predicted state.
pub fn rate_uniform_aperiodic(mse_target: f64, sigma_x_sq: f64, sigma_p_sq: f64) -> Result<f64> {
    Ok(uniform_aperiodic_raw(mse_target, sigma_x_sq, sigma_p_sq)?.max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RdPoint {
    pub distortion: f64,
    pub rate: f64,
}

/// Parameters a curve was computed with.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveParams {
    pub coeffs: Vec<f64>,
    pub innovation_var: f64,
    pub obs_noise_var: f64,
    pub order: usize,
    pub form: BoundForm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdCurve {
    pub scheme: Scheme,
    pub points: Vec<RdPoint>,
    pub params: CurveParams,
    /// Grid points dropped because they were at or below the floor.
    pub skipped: usize,
}

impl RdCurve {
    /// Ascending distortion with non-increasing rate.
    pub fn is_well_formed(&self) -> bool {
        self.points.windows(2).all(|w| {
            w[0].distortion < w[1].distortion && w[1].rate <= w[0].rate
        }) && self.points.iter().all(|p| p.rate >= 0.0)
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0) || !(hi > lo) || n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < d_min < d_max and n >= 2 (got {lo}, {hi}, {n})"
        )));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

/// Default distortion range: just above the floor up to 10 σ_x².
pub fn default_range(scheme: Scheme, p: &SchemeParams) -> (f64, f64) {
    (scheme.floor(p) * (1.0 + 1e-3), 10.0 * p.acov.variance())
}

pub fn sweep(
    scheme: Scheme,
    p: &SchemeParams,
    d_min: f64,
    d_max: f64,
    n_points: usize,
    form: BoundForm,
) -> Result<RdCurve> {
    let grid = log_grid(d_min, d_max, n_points)?;
    let evaluated: Vec<Result<f64>> = grid
        .par_iter()
        .map(|&d| scheme.rate(d, p, form))
        .collect();
    let mut points = Vec::with_capacity(grid.len());
    let mut skipped = 0;
    for (d, r) in grid.into_iter().zip(evaluated) {
        match r {
            Ok(rate) => points.push(RdPoint { distortion: d, rate }),
            Err(Error::DistortionBelowFloor { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(RdCurve {
        scheme,
        points,
        params: CurveParams {
            coeffs: p.model.coeffs().to_vec(),
            innovation_var: p.model.innovation_var(),
            obs_noise_var: p.noise.obs_noise_var(),
            order: p.order(),
            form,
        },
        skipped,
    })
}
