//! AR(L) fading channel observed through additive white Gaussian noise.
//!
//! The true state follows `x_k = sum_m a_m x_{k-m} + psi_k` with
//! `psi_k ~ N(0, innovation_var)`; the receiver sees `y_k = x_k + xi_k` with
//! `xi_k ~ N(0, obs_noise_var)`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::history::History;

/// Roots with modulus at or beyond this are treated as non-stationary.
pub const STATIONARITY_MARGIN: f64 = 1e-9;

const MAX_DEFAULT_BURN_IN: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ArModel {
    coeffs: Vec<f64>,
    innovation_var: f64,
}

impl ArModel {
    /// `coeffs[m - 1]` is a_m. The innovation variance must be finite and
    /// non-negative; zero is accepted so that a silent drive can be simulated,
    /// but covariance-based operations reject it.
    pub fn new(coeffs: Vec<f64>, innovation_var: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidModel("order must be at least 1".into()));
        }
        if coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidModel("coefficients must be finite".into()));
        }
        if !innovation_var.is_finite() || innovation_var < 0.0 {
            return Err(Error::InvalidModel(format!(
                "innovation variance must be finite and >= 0, got {innovation_var}"
            )));
        }
        Ok(Self {
            coeffs,
            innovation_var,
        })
    }

    /// The model used for all reference experiments: a = [0.5, 0.2, 0.1, 0.05], unit drive.
    pub fn reference() -> Self {
        Self {
            coeffs: vec![0.5, 0.2, 0.1, 0.05],
            innovation_var: 1.0,
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn innovation_var(&self) -> f64 {
        self.innovation_var
    }

    pub fn with_innovation_var(&self, innovation_var: f64) -> Result<Self> {
        Self::new(self.coeffs.clone(), innovation_var)
    }

    pub fn sum_sq_coeffs(&self) -> f64 {
        self.coeffs.iter().map(|a| a * a).sum()
    }

    /// Moduli of the roots of `z^L - a_1 z^{L-1} - ... - a_L`, i.e. the
    /// eigenvalues of the companion matrix. Trailing zero coefficients
    /// contribute roots at the origin. NaN marks a failed eigensolve.
    pub fn root_moduli(&self) -> Vec<f64> {
        let l = self.order();
        let k = self.coeffs.iter().rposition(|a| *a != 0.0).map_or(0, |i| i + 1);
        let mut moduli = vec![0.0; l - k];
        if k == 0 {
            return moduli;
        }
        let mut companion = DMatrix::<f64>::zeros(k, k);
        for (j, a) in self.coeffs[..k].iter().enumerate() {
            companion[(0, j)] = *a;
        }
        for i in 1..k {
            companion[(i, i - 1)] = 1.0;
        }
        match companion.try_schur(f64::EPSILON, 10_000) {
            Some(schur) => moduli.extend(schur.complex_eigenvalues().iter().map(|z| z.norm())),
            None => moduli.extend(std::iter::repeat_n(f64::NAN, k)),
        }
        moduli
    }

    pub fn spectral_radius(&self) -> f64 {
        self.root_moduli()
            .into_iter()
            .fold(0.0, |acc, r| if r.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(r) })
    }

    pub(crate) fn check_stationary(&self) -> Result<()> {
        let r = self.spectral_radius();
        if r < 1.0 - STATIONARITY_MARGIN {
            Ok(())
        } else {
            Err(Error::NonStationaryModel {
                max_root_modulus: r,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    obs_noise_var: f64,
}

impl NoiseSpec {
    pub fn new(obs_noise_var: f64) -> Result<Self> {
        if !obs_noise_var.is_finite() || obs_noise_var < 0.0 {
            return Err(Error::InvalidModel(format!(
                "observation noise variance must be finite and >= 0, got {obs_noise_var}"
            )));
        }
        Ok(Self { obs_noise_var })
    }

    pub fn noiseless() -> Self {
        Self { obs_noise_var: 0.0 }
    }

    pub fn obs_noise_var(&self) -> f64 {
        self.obs_noise_var
    }
}

/// Lag-indexed autocovariance κ_x(0..=max_lag) of the channel state.
#[derive(Debug, Clone, PartialEq)]
pub struct Autocovariance {
    lags: Vec<f64>,
}

impl Autocovariance {
    /// Wraps an externally supplied sequence. κ(0) must be positive and no
    /// lag may exceed it in magnitude.
    pub fn from_lags(lags: Vec<f64>) -> Result<Self> {
        let k0 = *lags
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty autocovariance".into()))?;
        if !(k0 > 0.0) || !k0.is_finite() {
            return Err(Error::DegenerateCovariance(k0));
        }
        if lags.iter().any(|k| !k.is_finite() || k.abs() > k0 * (1.0 + 1e-12)) {
            return Err(Error::InvalidArgument(
                "autocovariance lags must satisfy |k(t)| <= k(0)".into(),
            ));
        }
        Ok(Self { lags })
    }

    pub fn max_lag(&self) -> usize {
        self.lags.len() - 1
    }

    pub fn lags(&self) -> &[f64] {
        &self.lags
    }

    /// σ_x² = κ_x(0).
    pub fn variance(&self) -> f64 {
        self.lags[0]
    }

    pub fn lag(&self, lag: usize) -> Result<f64> {
        self.lags.get(lag).copied().ok_or(Error::LagOutOfRange {
            lag,
            max_lag: self.max_lag(),
        })
    }

    /// κ_xy(l) = E[x_{k+l} y_k] = κ_x(l), since ξ is independent of x.
    pub fn cross(&self, lag: usize) -> Result<f64> {
        self.lag(lag)
    }
}

pub fn validate_stationarity(model: &ArModel) -> bool {
    model.check_stationary().is_ok()
}

/// Exact κ_x(0..=max_lag) from the Yule–Walker equations.
///
/// The first L+1 lags come from the linear system
/// `κ(τ) - Σ_m a_m κ(|τ-m|) = σ_ψ² [τ = 0]`, τ = 0..=L; higher lags follow
/// the AR recursion.
pub fn autocovariance(model: &ArModel, max_lag: usize) -> Result<Autocovariance> {
    model.check_stationary()?;
    if model.innovation_var() <= 0.0 {
        return Err(Error::DegenerateCovariance(0.0));
    }
    let l = model.order();
    let a = model.coeffs();

    let mut sys = DMatrix::<f64>::identity(l + 1, l + 1);
    for t in 0..=l {
        for m in 1..=l {
            sys[(t, t.abs_diff(m))] -= a[m - 1];
        }
    }
    let mut rhs = DVector::<f64>::zeros(l + 1);
    rhs[0] = model.innovation_var();
    let sol = sys.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }

    let n = max_lag.max(l) + 1;
    let mut lags: Vec<f64> = sol.iter().copied().collect();
    lags.reserve(n.saturating_sub(lags.len()));
    for t in l + 1..n {
        let next = (1..=l).map(|m| a[m - 1] * lags[t - m]).sum();
        lags.push(next);
    }
    lags.truncate(max_lag + 1);
    Autocovariance::from_lags(lags)
}

/// κ_y(lag) = κ_x(lag) + σ_ξ² [lag = 0].
pub fn obs_autocovariance(acov: &Autocovariance, noise: &NoiseSpec, lag: usize) -> Result<f64> {
    let k = acov.lag(lag)?;
    Ok(if lag == 0 { k + noise.obs_noise_var() } else { k })
}

/// Burn-in used when a caller does not choose one: 10·L/(1 − spectral radius),
/// capped at 10⁴ samples.
pub fn default_burn_in(model: &ArModel) -> usize {
    let r = model.spectral_radius().min(1.0 - STATIONARITY_MARGIN);
    let n = (10.0 * model.order() as f64 / (1.0 - r)).ceil();
    if n.is_finite() {
        (n as usize).min(MAX_DEFAULT_BURN_IN)
    } else {
        MAX_DEFAULT_BURN_IN
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTrace {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub seed: u64,
    pub model: ArModel,
    pub noise: NoiseSpec,
}

impl ChannelTrace {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Seeded trace of `n` samples after discarding `burn_in` samples of the
/// recursion started from the zero state.
pub fn generate_trace(
    model: &ArModel,
    noise: &NoiseSpec,
    n: usize,
    seed: u64,
    burn_in: usize,
) -> Result<ChannelTrace> {
    model.check_stationary()?;
    if n == 0 {
        return Err(Error::InvalidArgument("trace length must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drive_sd = model.innovation_var().sqrt();
    let noise_sd = noise.obs_noise_var().sqrt();
    let mut state = History::filled(model.order(), 0.0);

    for _ in 0..burn_in {
        let psi: f64 = rng.sample(StandardNormal);
        let next = state.dot(model.coeffs()) + drive_sd * psi;
        state.push(next);
    }

    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let psi: f64 = rng.sample(StandardNormal);
        let xi: f64 = rng.sample(StandardNormal);
        let next = state.dot(model.coeffs()) + drive_sd * psi;
        state.push(next);
        x.push(next);
        y.push(next + noise_sd * xi);
    }

    Ok(ChannelTrace {
        x,
        y,
        seed,
        model: model.clone(),
        noise: *noise,
    })
}
