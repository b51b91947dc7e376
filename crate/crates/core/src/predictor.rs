//! Infinite-rate baselines: the order-L Wiener predictor of x_{k+1} from the
//! last L noisy observations, and the zero-holding estimator α·y_k.

use nalgebra::{DMatrix, DVector};

use crate::channel::{obs_autocovariance, Autocovariance, NoiseSpec};
use crate::error::{Error, Result};

/// Wiener coefficients θ_1..θ_L and the one-step prediction MSE σ_P².
///
/// θ_l multiplies y_{k+1-l}, so θ_1 weights the newest observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorCoefficients {
    theta: Vec<f64>,
    sigma_p_sq: f64,
}

impl PredictorCoefficients {
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn order(&self) -> usize {
        self.theta.len()
    }

    pub fn sigma_p_sq(&self) -> f64 {
        self.sigma_p_sq
    }
}

/// L×L Toeplitz matrix of κ_y.
pub(crate) fn obs_toeplitz(
    acov: &Autocovariance,
    noise: &NoiseSpec,
    order: usize,
) -> Result<DMatrix<f64>> {
    let ky: Vec<f64> = (0..order)
        .map(|lag| obs_autocovariance(acov, noise, lag))
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(order, order, |i, j| ky[i.abs_diff(j)]))
}

/// Solves K θ = r with K the κ_y Toeplitz matrix and r_l = κ_xy(l), then
/// σ_P² = σ_x² − rᵀK⁻¹r.
pub fn mmse_coefficients(
    acov: &Autocovariance,
    noise: &NoiseSpec,
    order: usize,
) -> Result<PredictorCoefficients> {
    if order == 0 {
        return Err(Error::InvalidArgument("predictor order must be >= 1".into()));
    }
    if acov.max_lag() < order {
        return Err(Error::LagOutOfRange {
            lag: order,
            max_lag: acov.max_lag(),
        });
    }
    let k = obs_toeplitz(acov, noise, order)?;
    let r = DVector::from_iterator(order, (1..=order).map(|l| acov.lags()[l]));
    let chol = k.cholesky().ok_or(Error::SingularSystem)?;
    let theta = chol.solve(&r);
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let sigma_p_sq = (acov.variance() - r.dot(&theta)).max(0.0);
    Ok(PredictorCoefficients {
        theta: theta.iter().copied().collect(),
        sigma_p_sq,
    })
}

/// x'_{k+1} = Σ_l θ_l y_{k+1-l} for a window ordered oldest → newest.
pub fn predict_one_step(coeffs: &PredictorCoefficients, window: &[f64]) -> Result<f64> {
    let l = coeffs.order();
    if window.len() != l {
        return Err(Error::DimensionMismatch {
            expected: l,
            got: window.len(),
        });
    }
    Ok(coeffs
        .theta
        .iter()
        .zip(window.iter().rev())
        .map(|(t, y)| t * y)
        .sum())
}

/// Zero-holding: forecast x_{k+1} by the MMSE estimate of x_k from y_k alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZhEstimator {
    alpha: f64,
    sigma_z_sq: f64,
}

impl ZhEstimator {
    /// α = σ_x²/(σ_x²+σ_ξ²).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma_z_sq(&self) -> f64 {
        self.sigma_z_sq
    }
}

/// σ_Z² = 2σ_x² − 2κ_x(1) + σ_x²σ_ξ²/(σ_x²+σ_ξ²).
pub fn zh_estimator(acov: &Autocovariance, noise: &NoiseSpec) -> Result<ZhEstimator> {
    let sx = acov.variance();
    let k1 = acov.lag(1)?;
    let sn = noise.obs_noise_var();
    let alpha = sx / (sx + sn);
    Ok(ZhEstimator {
        alpha,
        sigma_z_sq: 2.0 * sx - 2.0 * k1 + sx * sn / (sx + sn),
    })
}

pub fn zh_estimate(y_k: f64, est: &ZhEstimator) -> f64 {
    est.alpha * y_k
}

/// Actual MSE of α·y_k as a forecast of x_{k+1}:
/// σ_x² − 2ακ_x(1) + α²(σ_x² + σ_ξ²).
///
/// This exceeds [`ZhEstimator::sigma_z_sq`] by −2(1−α)(σ_x²−κ_x(1)); the two
/// agree when σ_ξ² = 0.
pub fn zh_mse(acov: &Autocovariance, noise: &NoiseSpec) -> Result<f64> {
    let sx = acov.variance();
    let k1 = acov.lag(1)?;
    let alpha = sx / (sx + noise.obs_noise_var());
    Ok(sx - 2.0 * alpha * k1 + alpha * alpha * (sx + noise.obs_noise_var()))
}
