//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use super::{run, Experiment, ExperimentConfig, Format};
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "edgelab", version, about = "Soft-edge random-matrix experiments")]
struct Cli {
    /// Master seed; every random draw derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of Monte Carlo replicas.
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output file, `-` for standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// File of `key = value` lines; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample tridiagonal β-ensembles and summarize entries and top eigenvalues.
    GbeSample(GbeSample),
    /// Count blow-ups of the stochastic Airy diffusion.
    SaoSimulate(SaoSimulate),
    /// Lower-tail frequencies of the rescaled top eigenvalue.
    TwTail(TwTail),
    /// Fraction of eigenvalues far from their classical locations.
    Rigidity(Rigidity),
    /// Bounded-Lipschitz distance between two measures stored as JSON.
    BlDistance(BlDistance),
    /// Rate functionals of a measure, or the Φ₋ function.
    RateFn(RateFn),
    /// Laplace-product estimators and lower-tail bounds.
    Kpz(Kpz),
    /// Decay diagnostics of the top eigenvector.
    Decay(Decay),
    /// First blow-up times of the diffusion started at a.
    BlowupTimes(BlowupTimes),
    /// Frequency of a low count of eigenvalues below the edge window.
    DeviationEvent(DeviationEvent),
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
#[command(allow_negative_numbers = true)]
struct GbeSample {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    top_k: Option<String>,
    /// Write the first sampled matrix to this CSV file.
    #[arg(long)]
    dump: Option<String>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
#[command(allow_negative_numbers = true)]
struct SaoSimulate {
    #[arg(long)]
    beta: Option<String>,
    /// Comma-separated levels.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    h0: Option<String>,
    /// Also count matrix eigenvalues at this size.
    #[arg(long)]
    matrix_n: Option<String>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
#[command(allow_negative_numbers = true)]
struct TwTail {
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    n: Option<String>,
    /// Comma-separated values of s.
    #[arg(long)]
    s_grid: Option<String>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
#[command(allow_negative_numbers = true)]
struct Rigidity {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    a: Option<String>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
#[command(allow_negative_numbers = true)]
struct BlDistance {
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    /// Pin the test function to zero at both ends of the window.
    #[arg(long)]
    pinned: bool,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
#[command(allow_negative_numbers = true)]
struct RateFn {
    #[arg(long)]
    phi_minus: bool,
    /// Comma-separated arguments for --phi-minus.
    #[arg(long)]
    z: Option<String>,
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    r0: Option<String>,
    #[arg(long)]
    r1: Option<String>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    k: Option<String>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
#[command(allow_negative_numbers = true)]
struct Kpz {
    /// sandwich, halfspace or bounds.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    s_grid: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    u: Option<String>,
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    k: Option<String>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
#[command(allow_negative_numbers = true)]
struct Decay {
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    i_star: Option<String>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
#[command(allow_negative_numbers = true)]
struct BlowupTimes {
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    h0: Option<String>,
    #[arg(long)]
    m: Option<String>,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
#[command(allow_negative_numbers = true)]
struct DeviationEvent {
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    k: Option<String>,
    /// Comma-separated thresholds.
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    beta: Option<String>,
}

impl Command {
    fn split(&self) -> (Experiment, BTreeMap<String, String>) {
        let (experiment, value) = match self {
            Command::GbeSample(a) => (Experiment::GbeSample, serde_json::to_value(a)),
            Command::SaoSimulate(a) => (Experiment::SaoSimulate, serde_json::to_value(a)),
            Command::TwTail(a) => (Experiment::TwTail, serde_json::to_value(a)),
            Command::Rigidity(a) => (Experiment::Rigidity, serde_json::to_value(a)),
            Command::BlDistance(a) => (Experiment::BlDistance, serde_json::to_value(a)),
            Command::RateFn(a) => (Experiment::RateFn, serde_json::to_value(a)),
            Command::Kpz(a) => (Experiment::Kpz, serde_json::to_value(a)),
            Command::Decay(a) => (Experiment::Decay, serde_json::to_value(a)),
            Command::BlowupTimes(a) => (Experiment::BlowupTimes, serde_json::to_value(a)),
            Command::DeviationEvent(a) => (Experiment::DeviationEvent, serde_json::to_value(a)),
        };
        let mut params = BTreeMap::new();
        if let Ok(Value::Object(fields)) = value {
            for (key, v) in fields {
                match v {
                    Value::String(s) => {
                        params.insert(key, s);
                    }
                    // unset flags stay absent so a config file can still set them
                    Value::Bool(true) => {
                        params.insert(key, "true".into());
                    }
                    _ => {}
                }
            }
        }
        (experiment, params)
    }
}

/// Parses `key = value` lines. Blank lines and `#` comments are ignored;
/// keys may be written with or without leading dashes.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::usage(format!("config line {}: expected key = value", lineno + 1)))?;
        let key = key.trim().trim_start_matches('-').replace('_', "-");
        if key.is_empty() {
            return Err(Error::usage(format!("config line {}: empty key", lineno + 1)));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

fn parse_global<T: std::str::FromStr>(file: &mut BTreeMap<String, String>, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match file.remove(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|e| Error::usage(format!("invalid value '{v}' for --{key} in config file: {e}"))),
    }
}

fn build_config(cli: Cli) -> Result<ExperimentConfig> {
    let mut file = match &cli.config {
        None => BTreeMap::new(),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            parse_config_file(&text)?
        }
    };
    let (experiment, cli_params) = cli.command.split();
    if let Some(name) = file.remove("experiment") {
        if name != experiment.name() {
            return Err(Error::usage(format!(
                "config file names experiment '{name}' but the command is {}",
                experiment.name()
            )));
        }
    }
    let seed = cli.seed.or(parse_global(&mut file, "seed")?).unwrap_or(0);
    let reps = cli.reps.or(parse_global(&mut file, "reps")?);
    let workers = cli.workers.or(parse_global(&mut file, "workers")?).unwrap_or(1);
    let out = cli.out.or(parse_global::<PathBuf>(&mut file, "out")?);
    let file_format = match file.remove("format").as_deref() {
        None => None,
        Some("csv") => Some(Format::Csv),
        Some("json") => Some(Format::Json),
        Some(other) => return Err(Error::usage(format!("invalid value '{other}' for --format: expected csv or json"))),
    };
    let format = match cli.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => file_format.unwrap_or_default(),
    };
    let mut params = file;
    params.extend(cli_params);
    Ok(ExperimentConfig {
        experiment,
        params,
        seed,
        reps,
        workers,
        out,
        format,
    })
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) if path != Path::new("-") => {
            std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        _ => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    let config = build_config(cli)?;
    let output = run(&config)?;
    write_output(config.out.as_deref(), &output.render(config.format))
}

/// Runs the command line and returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("edgelab: {e}");
            e.exit_code()
        }
    }
}
