//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or runtime error, 2 validation
//! failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::channel::{default_burn_in, generate_trace};
use crate::codec::{load_quantizer, pack_indices, run_codec};
use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::csv::{write_rows, write_trace};
use crate::harness::experiments::{run_codec_experiment, run_theory_sweep, validate_theory};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "csi-feedback", version, about = "CSI feedback overhead experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Theoretical rate-distortion curves as CSV.
    Theory(Common),
    /// Monte Carlo MSE of the three practical schemes per bit-width.
    Codec(Common),
    /// Check closed-form floors and steady state against simulation.
    Validate(Common),
    /// Dump one channel trace as CSV columns k,x,y.
    Trace(TraceArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// key=value configuration file; omitted keys take reference values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (defaults to output_path from the config, then stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the per-sample normalized form of the aperiodic bounds.
    #[arg(long)]
    normalized_bounds: bool,
}

#[derive(Debug, Args)]
struct TraceArgs {
    #[command(flatten)]
    common: Common,
    /// Trace length (defaults to samples_per_trial).
    #[arg(long)]
    samples: Option<usize>,
    /// Also encode the trace and write the packed index stream here.
    #[arg(long)]
    indices_out: Option<PathBuf>,
    /// Quantizer bits for --indices-out.
    #[arg(long, default_value_t = 6)]
    bits: u32,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output_path = Some(out.clone());
        }
        if self.normalized_bounds {
            cfg.normalized_bounds = true;
        }
        Ok(cfg)
    }
}

fn with_output<F>(cfg: &ExperimentConfig, stdout: &mut dyn Write, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match &cfg.output_path {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(stdout),
    }
}

/// Runs the CLI with `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_CONFIG
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Theory(c) => {
            let cfg = c.load()?;
            let sweep = run_theory_sweep(&cfg)?;
            if sweep.skipped > 0 {
                writeln!(stderr, "skipped {} grid points at or below a floor", sweep.skipped)?;
            }
            with_output(&cfg, stdout, |w| write_rows(w, &sweep.rows))?;
            Ok(EXIT_OK)
        }
        Command::Codec(c) => {
            let cfg = c.load()?;
            let rows = run_codec_experiment(&cfg)?;
            with_output(&cfg, stdout, |w| write_rows(w, &rows))?;
            Ok(EXIT_OK)
        }
        Command::Validate(c) => {
            let cfg = c.load()?;
            let report = validate_theory(&cfg)?;
            with_output(&cfg, stdout, |w| Ok(writeln!(w, "{report}")?))?;
            Ok(if report.passed() { EXIT_OK } else { EXIT_VALIDATION })
        }
        Command::Trace(t) => {
            let cfg = t.common.load()?;
            let n = t.samples.unwrap_or(cfg.samples_per_trial);
            let burn_in = cfg.burn_in.unwrap_or_else(|| default_burn_in(&cfg.model));
            let trace = generate_trace(&cfg.model, &cfg.noise, n, cfg.seed, burn_in)
                .map_err(|e| Error::Config(e.to_string()))?;
            with_output(&cfg, stdout, |w| write_trace(w, &trace))?;
            if let Some(path) = &t.indices_out {
                let q = load_quantizer(&cfg.model, &cfg.noise, t.bits, cfg.quantizer_loading)?;
                let out = run_codec(&cfg.model, &cfg.noise, q, &trace.x, &trace.y)?;
                std::fs::write(path, pack_indices(&out.indices, t.bits)?)?;
            }
            Ok(EXIT_OK)
        }
    }
}
