//! Steady-state behaviour of the closed-loop codec.
//!
//! The exact order-L error recursion has no convenient closed form, so the
//! long-run MSE is approximated by fitting an AR(1) model x̃_k = β x̃_{k-1} + ι_k
//! to the channel and solving the scalar recursion
//! ς̃_k = (1−λ)²β² ς̃_{k-1} + (1−λ)²σ_ι² + λ²σ_ξ² + σ_Q².

use std::f64::consts::{E, PI};

use crate::channel::{autocovariance, ArModel, Autocovariance, NoiseSpec};
use crate::codec::ErrorVarianceTracker;
use crate::error::{Error, Result};

const RELATIVE_TOL: f64 = 1e-10;
const QUADRATURE_TOL: f64 = 1e-8;
const MAX_GAIN_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Approx {
    /// β = κ_x(1)/κ_x(0)
    pub beta: f64,
    /// σ_ι² = κ_x(0) − κ_x(1)²/κ_x(0)
    pub iota_var: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub varsigma_inf: f64,
    pub lambda_ss: f64,
    pub quant_noise_var: f64,
}

/// Fixed point of the codec's gain/variance recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainFixedPoint {
    pub lambda: f64,
    /// Converged E[e²_{k|k-1}].
    pub pred_err_var: f64,
}

pub fn ar1_fit(acov: &Autocovariance) -> Result<Ar1Approx> {
    let k0 = acov.variance();
    if !(k0 > 0.0) {
        return Err(Error::DegenerateCovariance(k0));
    }
    let k1 = acov.lag(1)?;
    Ok(Ar1Approx {
        beta: k1 / k0,
        iota_var: k0 - k1 * k1 / k0,
    })
}

fn check_gain(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "gain must lie in (0, 1], got {lambda}"
        )))
    }
}

/// Iterates ς_k = (1−λ)² Σ_m a_m² ς_{k-m} + (1−λ)²σ_ψ² + λ²σ_ξ² + σ_Q² from
/// ς_0 = σ_x² (all earlier values also σ_x²). The returned trajectory starts
/// with ς_0 and ends at the first value within 1e-10 (relative) of its
/// predecessor.
pub fn mse_recursion(
    model: &ArModel,
    noise: &NoiseSpec,
    lambda: f64,
    sigma_q_sq: f64,
    steps: usize,
) -> Result<Vec<f64>> {
    check_gain(lambda)?;
    let prior = autocovariance(model, 0)?.variance();
    let l = model.order();
    let coeffs_sq: Vec<f64> = model.coeffs().iter().map(|a| a * a).collect();
    let shrink = (1.0 - lambda) * (1.0 - lambda);
    let drive = shrink * model.innovation_var()
        + lambda * lambda * noise.obs_noise_var()
        + sigma_q_sq;

    let mut traj = vec![prior];
    for k in 1..=steps {
        let past: f64 = (1..=l)
            .map(|m| {
                let v = if k >= m { traj[k - m] } else { prior };
                coeffs_sq[m - 1] * v
            })
            .sum();
        let next = shrink * past + drive;
        let prev = traj[k - 1];
        traj.push(next);
        if !next.is_finite() {
            break;
        }
        if (next - prev).abs() <= RELATIVE_TOL * next.abs().max(f64::MIN_POSITIVE) {
            return Ok(traj);
        }
    }
    Err(Error::NonConvergence { steps })
}

/// ς̃_∞ = ((1−λ)²σ_ι² + λ²σ_ξ² + σ_Q²) / (1 − (1−λ)²β²).
pub fn steady_state(
    approx: &Ar1Approx,
    noise: &NoiseSpec,
    lambda: f64,
    sigma_q_sq: f64,
) -> Result<SteadyState> {
    let contraction = (1.0 - lambda).powi(2) * approx.beta * approx.beta;
    if !(lambda > 0.0 && lambda <= 1.0) || !(contraction < 1.0) {
        return Err(Error::ContractionViolated {
            lambda,
            beta: approx.beta,
        });
    }
    let num = (1.0 - lambda).powi(2) * approx.iota_var
        + lambda * lambda * noise.obs_noise_var()
        + sigma_q_sq;
    Ok(SteadyState {
        varsigma_inf: num / (1.0 - contraction),
        lambda_ss: lambda,
        quant_noise_var: sigma_q_sq,
    })
}

/// (1/2π) ∫_{-π}^{π} σ_ι² / |1 − β e^{jω}|² dω by the trapezoid rule, which
/// converges geometrically for this smooth periodic integrand. The grid is
/// doubled until successive estimates agree to 1e-8 (relative).
pub fn ar1_spectral_variance(approx: &Ar1Approx) -> Result<f64> {
    let beta = approx.beta;
    if !(beta.abs() < 1.0) {
        return Err(Error::ContractionViolated { lambda: 0.0, beta });
    }
    let density = |w: f64| approx.iota_var / (1.0 - 2.0 * beta * w.cos() + beta * beta);
    let mut n = 16usize;
    let mut prev = f64::NAN;
    while n <= 1 << 22 {
        let h = 2.0 * PI / n as f64;
        let s: f64 = (0..n).map(|j| density(-PI + j as f64 * h)).sum();
        let est = s / n as f64;
        if (est - prev).abs() <= QUADRATURE_TOL * est.abs() {
            return Ok(est);
        }
        prev = est;
        n *= 2;
    }
    Err(Error::QuadratureFailure)
}

/// E[ẽ_P²] = κ̃(0) − κ̃(1)²/(κ̃(0) + σ_ξ²) with κ̃(1) = β κ̃(0).
pub fn ep_variance_from_approx(approx: &Ar1Approx, noise: &NoiseSpec) -> Result<f64> {
    let k0 = ar1_spectral_variance(approx)?;
    let k1 = approx.beta * k0;
    Ok(k0 - k1 * k1 / (k0 + noise.obs_noise_var()))
}

pub fn ep_variance(acov: &Autocovariance, noise: &NoiseSpec) -> Result<f64> {
    ep_variance_from_approx(&ar1_fit(acov)?, noise)
}

/// σ_Q² implied by a target steady-state MSE (inverse of [`steady_state`]).
pub fn implied_quant_noise(
    varsigma_target: f64,
    approx: &Ar1Approx,
    noise: &NoiseSpec,
    lambda: f64,
) -> f64 {
    let shrink = (1.0 - lambda).powi(2);
    (1.0 - shrink * approx.beta * approx.beta) * varsigma_target
        - shrink * approx.iota_var
        - lambda * lambda * noise.obs_noise_var()
}

/// Smallest reachable steady-state MSE, i.e. ς̃_∞ at σ_Q² = 0.
pub fn practical_floor(approx: &Ar1Approx, noise: &NoiseSpec, lambda: f64) -> Result<f64> {
    Ok(steady_state(approx, noise, lambda, 0.0)?.varsigma_inf)
}

/// R_u before clamping at zero.
pub fn rate_practical_raw(
    varsigma_target: f64,
    approx: &Ar1Approx,
    noise: &NoiseSpec,
    lambda: f64,
) -> Result<f64> {
    check_gain(lambda)?;
    let q = implied_quant_noise(varsigma_target, approx, noise, lambda);
    if !(q > 0.0) {
        return Err(Error::DistortionBelowFloor {
            distortion: varsigma_target,
            floor: practical_floor(approx, noise, lambda)?,
        });
    }
    let ep = ep_variance_from_approx(approx, noise)?;
    Ok(0.5 * (1.0f64 / 12.0).log2() + 0.5 * (2.0 * PI * E * ep).sqrt().log2() - 0.5 * q.log2())
}

/// Bits per sample the uniform-quantized codec needs to reach a steady-state
/// MSE of `varsigma_target` under the high-resolution model, clamped at 0.
pub fn rate_practical(
    varsigma_target: f64,
    approx: &Ar1Approx,
    noise: &NoiseSpec,
    lambda: f64,
) -> Result<f64> {
    Ok(rate_practical_raw(varsigma_target, approx, noise, lambda)?.max(0.0))
}

/// Iterates the codec's gain update and per-lag variance propagation (with
/// quantization noise variance `sigma_q_sq`) to its fixed point.
pub fn converged_gain(
    model: &ArModel,
    noise: &NoiseSpec,
    sigma_q_sq: f64,
) -> Result<GainFixedPoint> {
    let mut tracker = ErrorVarianceTracker::new(model, noise, sigma_q_sq)?;
    let mut prev = tracker.pred_err_var();
    for _ in 0..MAX_GAIN_ITERATIONS {
        let next = tracker.step();
        if !next.is_finite() {
            break;
        }
        if (next - prev).abs() <= 1e-13 * next {
            let lambda = tracker.update_gain();
            return Ok(GainFixedPoint {
                lambda,
                pred_err_var: next,
            });
        }
        prev = next;
    }
    Err(Error::NonConvergence {
        steps: MAX_GAIN_ITERATIONS,
    })
}
