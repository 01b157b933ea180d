//! Command-line front end for the NOMA BER laboratory.
//!
//! ```text
//! noma analytic|simulate|compare [--preset NAME] [--config PATH] [--seed U64]
//!      [--out PATH] [--sign-variant paper-minus|derived-plus] [...]
//! ```
//!
//! Exit codes: 0 success, 1 `compare` found a point outside 3 standard
//! errors, 2 configuration (or I/O) error.

pub mod commands;
pub mod config;
pub mod output;
pub mod presets;

use clap::{Args, Parser, Subcommand};
use commands::{Command, RunOptions};
use config::{ConfigLayer, ScenarioConfig};
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_STAT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("numerical error: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}

#[derive(Debug, Parser)]
#[command(name = "noma", version, about = "Closed-form and Monte Carlo BER for two-user downlink NOMA over Nakagami-m fading")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Evaluate the closed-form average BERs over the sweep.
    Analytic,
    /// Monte Carlo BER estimates over the sweep.
    Simulate,
    /// Monte Carlo vs closed form with per-point z-scores and a 3-sigma verdict.
    Compare,
    /// List the built-in presets.
    Presets,
}

#[derive(Debug, Args)]
struct Opts {
    /// JSON scenario file (flat schema; flags override its values).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed for the Monte Carlo streams.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Built-in scenario: fig1a, fig1b, fig2, validate, smoke.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    /// Output CSV file, or directory for multi-curve presets (default: stdout).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Sign between the two far-user averages in the closed form.
    #[arg(long, global = true, value_parser = ["paper-minus", "derived-plus"])]
    sign_variant: Option<String>,
    /// Sweep axis: snr_db or alpha.
    #[arg(long, global = true, value_parser = ["snr_db", "alpha"])]
    axis: Option<String>,
    /// Comma-separated sweep points.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true, num_args = 1)]
    points: Option<Vec<f64>>,
    /// Near-user power fraction.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Transmit SNR in dB (used by alpha sweeps).
    #[arg(long, global = true, allow_negative_numbers = true)]
    snr_db: Option<f64>,
    /// Nakagami m of the near user.
    #[arg(long, global = true)]
    m_near: Option<f64>,
    /// Nakagami m of the far user.
    #[arg(long, global = true)]
    m_far: Option<f64>,
    /// Per-user bit-error target per point.
    #[arg(long, global = true)]
    min_bit_errors: Option<u64>,
    /// Trial cap per point.
    #[arg(long, global = true)]
    max_trials: Option<u64>,
    /// Worker threads (0 = all CPUs). Does not change the results.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Continue an interrupted run from OUT.partial.
    #[arg(long, global = true)]
    resume: bool,
    /// Suppress progress messages on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
}

impl Opts {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            alpha: self.alpha,
            snr_db: self.snr_db,
            m_near: self.m_near,
            m_far: self.m_far,
            axis: self.axis.clone(),
            points: self.points.clone(),
            sign_variant: self.sign_variant.clone(),
            min_bit_errors: self.min_bit_errors,
            max_trials: self.max_trials,
            seed: self.seed,
            workers: self.workers,
            out: self.out.clone(),
            ..Default::default()
        }
    }
}

fn list_presets(stdout: &mut dyn Write) -> Result<(), CliError> {
    for name in presets::NAMES {
        let p = presets::preset(name)?;
        writeln!(stdout, "{:<9} {}", p.name, p.description).map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = (|| {
        let cmd = match cli.command {
            Sub::Analytic => Command::Analytic,
            Sub::Simulate => Command::Simulate,
            Sub::Compare => Command::Compare,
            Sub::Presets => return list_presets(stdout).map(|_| EXIT_OK),
        };
        let file = cli.opts.config.as_deref().map(ConfigLayer::from_file).transpose()?;
        let scenario = ScenarioConfig::resolve(cli.opts.preset.as_deref(), file.as_ref(), &cli.opts.layer())?;
        let opts = RunOptions { resume: cli.opts.resume, quiet: cli.opts.quiet };
        commands::execute(cmd, &scenario, opts, stdout, stderr)
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
