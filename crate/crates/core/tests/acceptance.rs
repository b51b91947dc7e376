//! End-to-end acceptance checks on the reference AR(4) setup
//! (a = [0.5, 0.2, 0.1, 0.05], σ_ψ² = 1, σ_ξ² = 1, L = 4).
//!
//! Runs without the libtest harness so that every check prints exactly one
//! PASS/FAIL line. The process exits non-zero if any check fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use csi_feedback::analysis::{ar1_fit, ep_variance, mse_recursion, steady_state};
use csi_feedback::bounds::{log_grid, BoundForm, Scheme, SchemeParams};
use csi_feedback::channel::{autocovariance, default_burn_in, generate_trace, ChannelTrace};
use csi_feedback::codec::{load_quantizer, UniformQuantizer};
use csi_feedback::harness::experiments::predicted_steady_state;
use csi_feedback::harness::{run_codec_experiment, ExperimentConfig};
use csi_feedback::predictor::{mmse_coefficients, zh_estimate, zh_estimator, zh_mse};
use csi_feedback::stats::{mse, relative_error};
use csi_feedback::{ArModel, DecoderState, EncoderState, NoiseSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const ORDER: usize = 4;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn reference() -> (ArModel, NoiseSpec) {
    (ArModel::reference(), NoiseSpec::new(1.0).unwrap())
}

fn trace(n: usize, seed: u64) -> ChannelTrace {
    let (model, noise) = reference();
    generate_trace(&model, &noise, n, seed, default_burn_in(&model)).unwrap()
}

fn prediction_mse(t: &ChannelTrace, theta: &[f64]) -> f64 {
    let mut sq = 0.0;
    for k in theta.len()..t.len() {
        let p: f64 = theta.iter().enumerate().map(|(i, c)| c * t.y[k - 1 - i]).sum();
        sq += (t.x[k] - p).powi(2);
    }
    sq / (t.len() - theta.len()) as f64
}

fn prediction_floor() -> Outcome {
    let start = Instant::now();
    let (model, noise) = reference();
    let acov = autocovariance(&model, ORDER).unwrap();
    let c = mmse_coefficients(&acov, &noise, ORDER).unwrap();
    let t = trace(1_000_000, 1);
    let emp = prediction_mse(&t, c.theta());
    let err = relative_error(emp, c.sigma_p_sq());
    let elapsed = start.elapsed();
    outcome(
        err < 0.02 && elapsed < Duration::from_secs(30),
        format!(
            "sigma_p_sq={:.6} empirical={emp:.6} rel_err={err:.4} (tol 0.02) time={elapsed:.2?}",
            c.sigma_p_sq()
        ),
    )
}

fn zero_holding_floor() -> Outcome {
    let (model, noise) = reference();
    let acov = autocovariance(&model, ORDER).unwrap();
    let p = mmse_coefficients(&acov, &noise, ORDER).unwrap();
    let z = zh_estimator(&acov, &noise).unwrap();
    let t = trace(1_000_000, 1);
    let est: Vec<f64> = t.y[..t.len() - 1].iter().map(|y| zh_estimate(*y, &z)).collect();
    let emp = mse(&est, &t.x[1..]);
    let err = relative_error(emp, z.sigma_z_sq());
    let ordered = p.sigma_p_sq() < z.sigma_z_sq();
    outcome(
        err < 0.02 && ordered,
        format!(
            "sigma_z_sq={:.6} empirical={emp:.6} rel_err={err:.4} (tol 0.02); \
             exact MSE of alpha*y_k={:.6}; sigma_p_sq<sigma_z_sq: {ordered}",
            z.sigma_z_sq(),
            zh_mse(&acov, &noise).unwrap()
        ),
    )
}

fn synchrony() -> Outcome {
    let start = Instant::now();
    let (model, noise) = reference();
    let q = load_quantizer(&model, &noise, 6, 4.0).unwrap();
    let t = trace(100_000, 2);
    let mut enc = EncoderState::new(&model, &noise, q).unwrap();
    let mut dec = DecoderState::new(&model, q);
    let mut mismatches = 0usize;
    for &y in &t.y {
        let (i, x_enc) = enc.encode_step(y);
        let x_dec = dec.decode_step(i).unwrap();
        if x_enc.to_bits() != x_dec.to_bits() {
            mismatches += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        mismatches == 0 && elapsed < Duration::from_secs(5),
        format!("100000 steps, mismatches={mismatches}, time={elapsed:.2?}"),
    )
}

fn no_accumulation() -> Outcome {
    let (model, noise) = reference();
    let q = load_quantizer(&model, &noise, 6, 4.0).unwrap();
    let t = trace(80_000, 3);
    let out = csi_feedback::codec::run_codec(&model, &noise, q, &t.x, &t.y).unwrap();
    let early = mse(&t.x[10_000..20_000], &out.encoder_recon[10_000..20_000]);
    let late = mse(&t.x[40_000..80_000], &out.encoder_recon[40_000..80_000]);
    let diff = relative_error(early, late);
    outcome(
        diff < 0.05,
        format!("MSE[1e4,2e4)={early:.6} MSE[4e4,8e4)={late:.6} rel_diff={diff:.4} (tol 0.05)"),
    )
}

fn steady_state_agreement() -> Outcome {
    let (model, noise) = reference();
    let t = trace(400_000, 4);
    let mut pass = true;
    let mut parts = Vec::new();
    for bits in [4, 6, 8] {
        let q = load_quantizer(&model, &noise, bits, 4.0).unwrap();
        let out = csi_feedback::codec::run_codec(&model, &noise, q, &t.x, &t.y).unwrap();
        let emp = mse(&t.x[20_000..], &out.encoder_recon[20_000..]);
        let theory = predicted_steady_state(&model, &noise, bits, 4.0).unwrap();
        let err = relative_error(emp, theory);
        pass &= err < 0.15;
        parts.push(format!("R_q={bits}: theory={theory:.5} empirical={emp:.5} rel_err={err:.4}"));
    }
    outcome(pass, format!("{} (tol 0.15)", parts.join("; ")))
}

fn bound_ordering() -> Outcome {
    let (model, noise) = reference();
    let p = SchemeParams::new(&model, &noise, ORDER).unwrap();
    let sp = Scheme::AperiodicPrediction.floor(&p);
    let sz = Scheme::AperiodicZh.floor(&p);
    let same_floor = sp == Scheme::Periodic.floor(&p);
    let grid = log_grid(sp * (1.0 + 1e-3), 10.0 * p.acov.variance(), 200).unwrap();
    let mut violations = 0;
    let mut compared = 0;
    for form in [BoundForm::Verbatim, BoundForm::Normalized] {
        for &d in &grid {
            let per = Scheme::Periodic.rate(d, &p, form).unwrap();
            let ap = Scheme::AperiodicPrediction.rate(d, &p, form).unwrap();
            compared += 1;
            if per > ap {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0 && same_floor && sz > sp,
        format!(
            "{compared} grid points (both forms), periodic>aperiodic at {violations}; \
             shared floor {sp:.6}: {same_floor}; zh floor {sz:.6} > {sp:.6}"
        ),
    )
}

fn variance_shift() -> Outcome {
    let (model, noise) = reference();
    let p1 = SchemeParams::new(&model, &noise, ORDER).unwrap();
    let p2 = SchemeParams::new(&model.with_innovation_var(2.0).unwrap(), &noise, ORDER).unwrap();
    let mut raw_bad = 0;
    let mut clamped_bad = 0;
    let mut clamped_ties = 0;
    let mut compared = 0;
    for scheme in Scheme::ALL {
        for form in [BoundForm::Verbatim, BoundForm::Normalized] {
            let lo = scheme.floor(&p1).max(scheme.floor(&p2)) * (1.0 + 1e-3);
            let hi = 10.0 * p2.acov.variance();
            for d in log_grid(lo, hi, 100).unwrap() {
                let r1 = scheme.raw_rate(d, &p1, form).unwrap();
                let r2 = scheme.raw_rate(d, &p2, form).unwrap();
                compared += 1;
                if r2 <= r1 || r2.is_nan() {
                    raw_bad += 1;
                }
                let (c1, c2) = (r1.max(0.0), r2.max(0.0));
                if c2 < c1 || (c2 > 0.0 && c2 <= c1) {
                    clamped_bad += 1;
                } else if c2 == 0.0 {
                    clamped_ties += 1;
                }
            }
        }
    }
    outcome(
        raw_bad == 0 && clamped_bad == 0,
        format!(
            "{compared} (scheme, form, D) points: raw rate not strictly larger at {raw_bad}; \
             clamped rate decreased or failed to increase while positive at {clamped_bad}; \
             both clamped to 0 at {clamped_ties}"
        ),
    )
}

fn practical_schemes() -> Outcome {
    let cfg = ExperimentConfig {
        quantizer_bits: (2..=10).collect(),
        trials: 4,
        samples_per_trial: 100_000,
        seed: 11,
        ..ExperimentConfig::default()
    };
    let rows = run_codec_experiment(&cfg).unwrap();
    let series = |tag: &str| -> Vec<f64> {
        rows.iter().filter(|r| r.scheme == tag).map(|r| r.distortion).collect()
    };
    let direct = series("direct_quantization");
    let open = series("ar1_open_loop");
    let proposed = series("proposed_closed_loop");
    let (model, noise) = reference();
    let acov = autocovariance(&model, ORDER).unwrap();
    let sp = mmse_coefficients(&acov, &noise, ORDER).unwrap().sigma_p_sq();
    let plateau: Vec<f64> = direct[6..].iter().map(|m| relative_error(*m, sp)).collect();
    let plateau_ok = plateau.iter().all(|e| *e < 0.10);
    let beaten: Vec<bool> = open.iter().zip(&proposed).map(|(o, p)| o > p).collect();
    let fmt = |v: &[f64]| v.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>().join(",");
    outcome(
        plateau_ok && beaten.iter().all(|b| *b),
        format!(
            "R_q=2..10 direct=[{}] open_loop=[{}] proposed=[{}]; direct within 10% of \
             sigma_p_sq={sp:.4} for R_q=8..10: {plateau_ok}; open_loop>proposed at all R_q: {}",
            fmt(&direct),
            fmt(&open),
            fmt(&proposed),
            beaten.iter().all(|b| *b)
        ),
    )
}

fn quantizer_noise() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let samples: Vec<f64> = (0..4_000_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for bits in 6..=10 {
        let q = UniformQuantizer::with_clip(bits, 4.0).unwrap();
        let emp = samples.iter().map(|v| (v - q.quantize(*v).1).powi(2)).sum::<f64>()
            / samples.len() as f64;
        let ratio = emp / q.noise_var();
        pass &= (ratio - 1.0).abs() < 0.10;
        parts.push(format!("R_q={bits}: ratio={ratio:.4}"));
    }
    outcome(pass, format!("empirical MSE / (step^2/12): {} (tol 0.10)", parts.join(", ")))
}

fn cross_module_identities() -> Outcome {
    let mut worst_ep: f64 = 0.0;
    let mut worst_rec: f64 = 0.0;
    for a in [0.3, 0.7, 0.9, 0.99] {
        for noise_var in [0.0, 0.5, 1.0, 3.0] {
            let model = ArModel::new(vec![a], 1.0).unwrap();
            let noise = NoiseSpec::new(noise_var).unwrap();
            let acov = autocovariance(&model, 1).unwrap();
            let sp = mmse_coefficients(&acov, &noise, 1).unwrap().sigma_p_sq();
            let ep = ep_variance(&acov, &noise).unwrap();
            worst_ep = worst_ep.max((ep - sp).abs());
            let approx = ar1_fit(&acov).unwrap();
            for lambda in [0.2, 0.6, 1.0] {
                for q in [0.0, 0.01, 0.3] {
                    let traj = mse_recursion(&model, &noise, lambda, q, 100_000).unwrap();
                    let closed = steady_state(&approx, &noise, lambda, q).unwrap().varsigma_inf;
                    worst_rec = worst_rec.max((traj.last().unwrap() - closed).abs());
                }
            }
        }
    }
    outcome(
        worst_ep < 1e-9 && worst_rec < 1e-9,
        format!(
            "max |ep_variance - sigma_p_sq| = {worst_ep:.3e}; \
             max |recursion fixed point - closed form| = {worst_rec:.3e} (tol 1e-9)"
        ),
    )
}

type NamedCheck = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let checks: [NamedCheck; 10] = [
        ("prediction floor vs simulation", prediction_floor),
        ("zero-holding floor vs simulation", zero_holding_floor),
        ("encoder/decoder synchrony", synchrony),
        ("no error accumulation", no_accumulation),
        ("steady-state MSE vs codec", steady_state_agreement),
        ("bound ordering and floors", bound_ordering),
        ("innovation variance shift", variance_shift),
        ("practical scheme comparison", practical_schemes),
        ("quantizer noise model", quantizer_noise),
        ("cross-module identities", cross_module_identities),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{:>2}] {} {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("{} of {} acceptance checks passed", checks.len() - failed, checks.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
