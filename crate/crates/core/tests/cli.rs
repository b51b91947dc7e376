use std::fs;
use std::path::Path;
use std::process::Command;

use csi_feedback::codec::{load_quantizer, run_codec, unpack_indices};
use csi_feedback::harness::cli::{run, EXIT_CONFIG, EXIT_OK, EXIT_VALIDATION};
use csi_feedback::harness::csv::{parse_rows, HEADER};
use csi_feedback::harness::{CsvRow, Source};
use csi_feedback::{ArModel, DecoderState, NoiseSpec};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_csi-feedback");

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("ref.cfg");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn run_capture(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["csi-feedback"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn theory_writes_csv_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "# reference model\nar_coeffs = 0.5, 0.2, 0.1, 0.05\nschemes = periodic, aperiodic_zh\nn_points = 7\n",
    );
    let out = dir.path().join("rd.csv");
    let status = Command::new(BIN)
        .args(["theory", "--config", &cfg, "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(EXIT_OK));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some(HEADER));
    let rows = parse_rows(&text).unwrap();
    assert_eq!(rows.len(), 14);
    assert!(rows.iter().all(|r| r.source == Source::Theory && r.rate_bits >= 0.0));
}

#[test]
fn missing_config_exits_with_config_error() {
    let output = Command::new(BIN)
        .args(["theory", "--config", "/nonexistent/ref.cfg"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(EXIT_CONFIG));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("/nonexistent/ref.cfg"), "{stderr}");
}

#[test]
fn bad_config_and_usage_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "trials = 0\n");
    assert_eq!(run_capture(&["codec", "--config", &cfg]).0, EXIT_CONFIG);
    let cfg = write_config(dir.path(), "mystery = 1\n");
    let (code, _, err) = run_capture(&["theory", "--config", &cfg]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("mystery"));
    assert_eq!(run_capture(&["plot"]).0, EXIT_CONFIG);
    assert_eq!(run_capture(&[]).0, EXIT_CONFIG);
    assert_eq!(run_capture(&["--help"]).0, EXIT_OK);
}

#[test]
fn flags_override_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "schemes = aperiodic_zh\nn_points = 4\nd_min = 2.0\nd_max = 2.5\n",
    );
    let (_, verbatim, _) = run_capture(&["theory", "--config", &cfg]);
    let (_, normalized, _) = run_capture(&["theory", "--config", &cfg, "--normalized-bounds"]);
    let v = parse_rows(&verbatim).unwrap();
    let n = parse_rows(&normalized).unwrap();
    assert_eq!(v.len(), 4);
    assert!(v.iter().zip(&n).all(|(a, b)| a.distortion == b.distortion));
    assert!(v.iter().zip(&n).any(|(a, b)| a.rate_bits != b.rate_bits));

    let cfg = write_config(
        dir.path(),
        "quantizer_bits = 3\ntrials = 1\nsamples_per_trial = 2000\nseed = 4\n",
    );
    let (code, text, _) = run_capture(&["codec", "--config", &cfg, "--seed", "9"]);
    assert_eq!(code, EXIT_OK);
    assert!(parse_rows(&text).unwrap().iter().all(|r| r.seed == 9));
}

#[test]
fn codec_output_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "quantizer_bits = 2, 6\ntrials = 3\nsamples_per_trial = 5000\nseed = 21\n",
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let code = run_capture(&["codec", "--config", &cfg, "--out", out.to_str().unwrap()]).0;
        assert_eq!(code, EXIT_OK);
    }
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    let rows: Vec<CsvRow> = parse_rows(std::str::from_utf8(&bytes).unwrap()).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.source == Source::Simulation && r.n_samples == 13_500));
}

#[test]
fn validate_reports_and_sets_exit_code() {
    let dir = TempDir::new().unwrap();
    let clean = write_config(dir.path(), "obs_noise_var = 0\nsamples_per_trial = 200000\nseed = 8\n");
    let (code, report, _) = run_capture(&["validate", "--config", &clean]);
    assert_eq!(code, EXIT_OK, "{report}");
    assert!(report.contains("PASS sigma_p_sq"));
    assert!(report.contains("all checks passed"));

    // With observation noise the zero-holding closed form misses the
    // simulated error by the dropped cross term.
    let noisy = write_config(dir.path(), "samples_per_trial = 200000\nseed = 8\n");
    let (code, report, _) = run_capture(&["validate", "--config", &noisy]);
    assert_eq!(code, EXIT_VALIDATION, "{report}");
    assert!(report.contains("FAIL sigma_z_sq"));
    assert!(report.contains("PASS zh_mse"));

    let short = write_config(dir.path(), "samples_per_trial = 1000\n");
    assert_eq!(run_capture(&["validate", "--config", &short]).0, EXIT_CONFIG);
}

#[test]
fn trace_dump_and_index_replay() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "seed = 12\n");
    let csv = dir.path().join("trace.csv");
    let idx = dir.path().join("idx.bin");
    let (code, _, err) = run_capture(&[
        "trace",
        "--config",
        &cfg,
        "--samples",
        "500",
        "--out",
        csv.to_str().unwrap(),
        "--indices-out",
        idx.to_str().unwrap(),
        "--bits",
        "5",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");

    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,x,y"));
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (k, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0].parse::<usize>().unwrap(), k);
        x.push(f[1].parse::<f64>().unwrap());
        y.push(f[2].parse::<f64>().unwrap());
    }
    assert_eq!(x.len(), 500);

    let bytes = fs::read(&idx).unwrap();
    assert_eq!(bytes.len(), (500usize * 5).div_ceil(8));
    let indices = unpack_indices(&bytes, 5, 500).unwrap();

    let model = ArModel::reference();
    let noise = NoiseSpec::new(1.0).unwrap();
    let q = load_quantizer(&model, &noise, 5, 4.0).unwrap();
    let reference = run_codec(&model, &noise, q, &x, &y).unwrap();
    assert_eq!(indices, reference.indices);
    let mut dec = DecoderState::new(&model, q);
    for (i, expected) in indices.iter().zip(&reference.encoder_recon) {
        assert_eq!(dec.decode_step(*i).unwrap().to_bits(), expected.to_bits());
    }
}

#[test]
fn trace_goes_to_stdout_without_out() {
    let (code, text, _) = run_capture(&["trace", "--samples", "3", "--seed", "1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(text.lines().count(), 4);
}
