//! Seeded Monte Carlo experiments and their serialized output.
//!
//! Every experiment is a pure function of its parameters, the master seed
//! and the replica count. Replica `i` draws from streams keyed by
//! `(seed, i)`; per-replica results are collected in replica order and
//! reduced sequentially, so the numerical payload does not depend on the
//! number of worker threads.

pub mod cli;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::kpz::{self, KpzParams};
use crate::measures::{self, SignedMeasure};
use crate::ratefn::{self, RateParams};
use crate::report::{Report, Table};
use crate::riccati::{self, DiffusionConfig};
use crate::spectra::{airy_count, AirySpectrumMode};
use crate::stats::{self, Accumulator};
use crate::tridiag::{self, matrix_stream, sample_gbeta};

/// Version of the output document layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Replicas evaluated per parallel batch before the ordered reduction.
const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    GbeSample,
    SaoSimulate,
    TwTail,
    Rigidity,
    BlDistance,
    RateFn,
    Kpz,
    Decay,
    BlowupTimes,
    DeviationEvent,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::GbeSample,
        Experiment::SaoSimulate,
        Experiment::TwTail,
        Experiment::Rigidity,
        Experiment::BlDistance,
        Experiment::RateFn,
        Experiment::Kpz,
        Experiment::Decay,
        Experiment::BlowupTimes,
        Experiment::DeviationEvent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::GbeSample => "gbe-sample",
            Experiment::SaoSimulate => "sao-simulate",
            Experiment::TwTail => "tw-tail",
            Experiment::Rigidity => "rigidity",
            Experiment::BlDistance => "bl-distance",
            Experiment::RateFn => "rate-fn",
            Experiment::Kpz => "kpz",
            Experiment::Decay => "decay",
            Experiment::BlowupTimes => "blowup-times",
            Experiment::DeviationEvent => "deviation-event",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == name)
            .ok_or_else(|| Error::usage(format!("unknown experiment '{name}'")))
    }

    /// Parameter keys accepted by this experiment.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Experiment::GbeSample => &["n", "beta", "top-k", "dump"],
            Experiment::SaoSimulate => &["beta", "lambda", "h0", "matrix-n"],
            Experiment::TwTail => &["beta", "n", "s-grid"],
            Experiment::Rigidity => &["n", "beta", "a"],
            Experiment::BlDistance => &["mu", "nu", "r", "grid", "pinned"],
            Experiment::RateFn => &["phi-minus", "z", "measure", "r0", "r1", "c", "n", "k"],
            Experiment::Kpz => &["mode", "n", "beta", "s-grid", "t", "u", "s", "epsilon", "c", "k"],
            Experiment::Decay => &["n", "beta", "i-star"],
            Experiment::BlowupTimes => &["a", "beta", "h0", "m"],
            Experiment::DeviationEvent => &["r", "k", "eta", "beta"],
        }
    }

    fn default_reps(self) -> usize {
        match self {
            Experiment::GbeSample => 1000,
            Experiment::SaoSimulate => 1000,
            Experiment::TwTail => 10_000,
            Experiment::Rigidity => 200,
            Experiment::BlDistance | Experiment::RateFn => 1,
            Experiment::Kpz => 1000,
            Experiment::Decay => 500,
            Experiment::BlowupTimes => 10_000,
            Experiment::DeviationEvent => 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Raw `key = value` parameters, keys without leading dashes.
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    /// `None` selects the experiment's default.
    pub reps: Option<usize>,
    pub workers: usize,
    /// `None` or `-` writes to standard output.
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            params: BTreeMap::new(),
            seed: 0,
            reps: None,
            workers: 1,
            out: None,
            format: Format::Json,
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn reps(mut self, reps: usize) -> Self {
        self.reps = Some(reps);
        self
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Typed access to the raw parameters; every value read is echoed.
struct Params<'a> {
    raw: &'a BTreeMap<String, String>,
    echo: BTreeMap<String, Value>,
}

impl<'a> Params<'a> {
    fn new(raw: &'a BTreeMap<String, String>) -> Self {
        Params {
            raw,
            echo: BTreeMap::new(),
        }
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw.get(key) {
            None => Ok(None),
            Some(v) => v
                .trim()
                .parse::<T>()
                .map(Some)
                .map_err(|e| Error::usage(format!("invalid value '{v}' for --{key}: {e}"))),
        }
    }

    fn missing(key: &str) -> Error {
        Error::usage(format!("missing required parameter --{key}"))
    }

    fn f64(&mut self, key: &str) -> Result<f64> {
        let v = self.parse::<f64>(key)?.ok_or_else(|| Self::missing(key))?;
        self.echo.insert(key.into(), json!(v));
        Ok(v)
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        let v = self.parse::<f64>(key)?.unwrap_or(default);
        self.echo.insert(key.into(), json!(v));
        Ok(v)
    }

    fn usize(&mut self, key: &str) -> Result<usize> {
        let v = self.parse::<usize>(key)?.ok_or_else(|| Self::missing(key))?;
        self.echo.insert(key.into(), json!(v));
        Ok(v)
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize> {
        let v = self.parse::<usize>(key)?.unwrap_or(default);
        self.echo.insert(key.into(), json!(v));
        Ok(v)
    }

    fn opt_usize(&mut self, key: &str) -> Result<Option<usize>> {
        let v = self.parse::<usize>(key)?;
        if let Some(x) = v {
            self.echo.insert(key.into(), json!(x));
        }
        Ok(v)
    }

    fn list(&mut self, key: &str) -> Result<Vec<f64>> {
        let raw = self.raw.get(key).ok_or_else(|| Self::missing(key))?;
        let values = raw
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::usage(format!("invalid value '{s}' in --{key}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        self.echo.insert(key.into(), json!(values));
        Ok(values)
    }

    fn flag(&mut self, key: &str) -> Result<bool> {
        let v = match self.raw.get(key).map(|s| s.trim()) {
            None | Some("false") => false,
            Some("true") | Some("") => true,
            Some(other) => return Err(Error::usage(format!("invalid value '{other}' for --{key}: expected true or false"))),
        };
        self.echo.insert(key.into(), json!(v));
        Ok(v)
    }

    fn string(&mut self, key: &str) -> Result<String> {
        let v = self.raw.get(key).ok_or_else(|| Self::missing(key))?.trim().to_string();
        self.echo.insert(key.into(), json!(v));
        Ok(v)
    }

    fn string_or(&mut self, key: &str, default: &str) -> String {
        let v = self.raw.get(key).map_or(default, |s| s.trim()).to_string();
        self.echo.insert(key.into(), json!(v));
        v
    }

    fn opt_string(&mut self, key: &str) -> Option<String> {
        let v = self.raw.get(key).map(|s| s.trim().to_string());
        if let Some(s) = &v {
            self.echo.insert(key.into(), json!(s));
        }
        v
    }
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub experiment: Experiment,
    pub report: Report,
    /// Resolved configuration, including defaults.
    pub config: Value,
    pub wall_time_s: f64,
}

impl RunOutput {
    /// The part of the output that must not depend on worker count or
    /// timing.
    pub fn payload(&self) -> Value {
        serde_json::to_value(&self.report).expect("reports serialize")
    }

    pub fn to_json(&self) -> String {
        let doc = json!({
            "schema": SCHEMA_VERSION,
            "experiment": self.experiment.name(),
            "config": self.config,
            "wall_time_s": self.wall_time_s,
            "result": self.payload(),
        });
        serde_json::to_string_pretty(&doc).expect("documents serialize") + "\n"
    }

    /// CSV with `#` header lines carrying the schema, the configuration and
    /// a JSON summary of the estimates, followed by the table (or by one
    /// row per estimate when the experiment has no table).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let summary = json!({
            "reps": self.report.reps,
            "estimates": self.report.estimates,
            "stderrs": self.report.stderrs,
            "notes": self.report.notes,
        });
        let _ = writeln!(out, "# schema: {SCHEMA_VERSION}");
        let _ = writeln!(out, "# experiment: {}", self.experiment.name());
        let _ = writeln!(out, "# config: {}", self.config);
        let _ = writeln!(out, "# wall_time_s: {}", self.wall_time_s);
        let _ = writeln!(out, "# summary: {summary}");
        if self.report.table.is_empty() {
            out.push_str("name,value,stderr\n");
            for (k, v) in &self.report.estimates {
                let err = self.report.stderrs.get(k).map_or(String::new(), |e| csv_number(*e));
                let _ = writeln!(out, "{k},{},{err}", csv_number(*v));
            }
        } else {
            out.push_str(&self.report.table.columns.join(","));
            out.push('\n');
            for row in &self.report.table.rows {
                let cells: Vec<String> = row.iter().map(|v| csv_number(*v)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
        }
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

/// Shortest round-trip representation; missing values are empty cells.
fn csv_number(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

/// Runs an experiment on a pool of `config.workers` threads.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    let experiment = config.experiment;
    if let Some(key) = config.params.keys().find(|k| !experiment.keys().contains(&k.as_str())) {
        return Err(Error::usage(format!(
            "unknown parameter --{key} for experiment {}",
            experiment.name()
        )));
    }
    if config.workers == 0 {
        return Err(Error::usage("--workers must be at least 1"));
    }
    let reps = config.reps.unwrap_or(experiment.default_reps());
    if reps == 0 {
        return Err(Error::usage("--reps must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Io(format!("cannot start worker pool: {e}")))?;
    let mut params = Params::new(&config.params);
    let start = Instant::now();
    let report = pool.install(|| dispatch(experiment, &mut params, config.seed, reps))?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let echo = json!({
        "experiment": experiment.name(),
        "seed": config.seed,
        "reps": reps,
        "workers": config.workers,
        "format": config.format,
        "out": config.out.as_ref().map(|p| p.display().to_string()),
        "params": params.echo,
    });
    Ok(RunOutput {
        experiment,
        report,
        config: echo,
        wall_time_s,
    })
}

fn dispatch(experiment: Experiment, p: &mut Params, seed: u64, reps: usize) -> Result<Report> {
    match experiment {
        Experiment::GbeSample => gbe_sample(p, seed, reps),
        Experiment::SaoSimulate => sao_simulate(p, seed, reps),
        Experiment::TwTail => tw_tail(p, seed, reps),
        Experiment::Rigidity => {
            let (n, beta, a) = (p.usize("n")?, p.f64("beta")?, p.f64("a")?);
            tridiag::rigidity_stats(n, beta, a, reps, seed)
        }
        Experiment::BlDistance => bl_distance(p),
        Experiment::RateFn => rate_fn(p),
        Experiment::Kpz => kpz_experiment(p, seed, reps),
        Experiment::Decay => decay(p, seed, reps),
        Experiment::BlowupTimes => blowup_times(p, seed, reps),
        Experiment::DeviationEvent => {
            let r = p.f64_or("r", 1.0)?;
            let k = p.f64_or("k", 1.0)?;
            let beta = p.f64_or("beta", 2.0)?;
            let etas = if p.raw.contains_key("eta") { p.list("eta")? } else { vec![15.0] };
            p.echo.insert("eta".into(), json!(etas));
            riccati::deviation_event_frequencies(r, k, &etas, beta, reps, seed)
        }
    }
}

/// Evaluates `f` on replicas `0..reps` in parallel batches and feeds the
/// results to `consume` in replica order.
fn for_each_replica<T: Send>(
    reps: usize,
    f: impl Fn(u64) -> Result<T> + Sync,
    mut consume: impl FnMut(T),
) -> Result<()> {
    let mut start = 0;
    while start < reps {
        let end = (start + CHUNK).min(reps);
        let batch = (start as u64..end as u64).into_par_iter().map(&f).collect::<Result<Vec<T>>>()?;
        batch.into_iter().for_each(&mut consume);
        start = end;
    }
    Ok(())
}

fn gbe_sample(p: &mut Params, seed: u64, reps: usize) -> Result<Report> {
    let n = p.usize("n")?;
    let beta = p.f64("beta")?;
    let top_k = p.usize_or("top-k", 1)?;
    let dump = p.opt_string("dump");
    if top_k == 0 || top_k > n {
        return Err(Error::usage(format!("--top-k must lie in 1..={n}")));
    }
    if let Some(path) = dump {
        let t = sample_gbeta(n, beta, matrix_stream(seed, 0))?;
        std::fs::write(&path, t.to_csv()).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    }
    let mut diag = vec![Accumulator::default(); n];
    let mut off = vec![Accumulator::default(); n.saturating_sub(1)];
    let mut pooled_diag = Accumulator::default();
    let mut tops = vec![Accumulator::default(); top_k];
    for_each_replica(
        reps,
        |i| {
            let t = sample_gbeta(n, beta, matrix_stream(seed, i))?;
            let top = tridiag::top_k_eigenvalues(&t, top_k, 1e-10)?.rescale();
            Ok((t, top.values))
        },
        |(t, top)| {
            for (acc, &d) in diag.iter_mut().zip(&t.diag) {
                acc.push(d);
                pooled_diag.push(d);
            }
            for (acc, &e) in off.iter_mut().zip(&t.offdiag) {
                acc.push(e * e);
            }
            for (acc, v) in tops.iter_mut().zip(top) {
                acc.push(v);
            }
        },
    )?;
    let mut report = Report::new(reps);
    let mut table = Table::new(&["i", "diag_mean", "diag_stderr", "offdiag_sq_mean", "offdiag_sq_stderr", "offdiag_sq_expected"]);
    for i in 0..n {
        let d = diag[i].summary();
        let (om, os, expected) = match off.get(i) {
            Some(acc) => {
                let s = acc.summary();
                (s.mean, s.stderr, (n - 1 - i) as f64)
            }
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        table.push(vec![(i + 1) as f64, d.mean, d.stderr, om, os, expected]);
    }
    report.table = table;
    report.set_summary("diag_mean", &pooled_diag.summary());
    if let Some(first) = off.first() {
        report.set_summary("offdiag_sq_mean_1", &first.summary());
    }
    for (j, acc) in tops.iter().enumerate() {
        let s = acc.summary();
        report.set_summary(&format!("lambda{}_mean", j + 1), &s);
        report.set(&format!("lambda{}_var", j + 1), s.variance);
    }
    Ok(report)
}

fn sao_simulate(p: &mut Params, seed: u64, reps: usize) -> Result<Report> {
    let beta = p.f64("beta")?;
    let lambdas = p.list("lambda")?;
    let h0 = p.f64_or("h0", DiffusionConfig::DEFAULT_STEP)?;
    let matrix_n = p.opt_usize("matrix-n")?;
    let mut report = Report::new(reps);
    let mut columns = vec!["lambda", "count_mean", "count_stderr", "airy_count"];
    if matrix_n.is_some() {
        columns.extend(["matrix_mean", "matrix_stderr"]);
    }
    let mut table = Table::new(&columns);
    let matrix_counts: Option<Vec<Vec<usize>>> = match matrix_n {
        None => None,
        Some(n) => {
            let mut all = Vec::with_capacity(reps);
            for_each_replica(
                reps,
                |i| {
                    let t = sample_gbeta(n, beta, matrix_stream(seed, i))?;
                    Ok(lambdas.iter().map(|&l| tridiag::edge_count(&t, l)).collect::<Vec<_>>())
                },
                |c| all.push(c),
            )?;
            Some(all)
        }
    };
    for (j, &lambda) in lambdas.iter().enumerate() {
        let config = DiffusionConfig::new(beta, lambda).with_step(h0);
        let counts = riccati::counts(&config, seed, reps)?;
        let s = stats::summarize(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>());
        report.set_summary(&format!("count_mean_l{lambda}"), &s);
        let exact = airy_count(lambda, AirySpectrumMode::Exact) as f64;
        let mut row = vec![lambda, s.mean, s.stderr, exact];
        if let Some(m) = &matrix_counts {
            let ms = stats::summarize(&m.iter().map(|c| c[j] as f64).collect::<Vec<_>>());
            report.set_summary(&format!("matrix_mean_l{lambda}"), &ms);
            row.extend([ms.mean, ms.stderr]);
        }
        table.push(row);
    }
    report.note("counts use the automatic horizon max(2λ, λ + 10)");
    report.table = table;
    Ok(report)
}

fn tw_tail(p: &mut Params, seed: u64, reps: usize) -> Result<Report> {
    let beta = p.f64("beta")?;
    let n = p.usize("n")?;
    let s_grid = p.list("s-grid")?;
    let nf = n as f64;
    let levels: Vec<f64> = s_grid.iter().map(|s| 2.0 * nf.sqrt() - s * nf.powf(-1.0 / 6.0)).collect();
    let mut hits = vec![0usize; s_grid.len()];
    for_each_replica(
        reps,
        |i| {
            let t = sample_gbeta(n, beta, matrix_stream(seed, i))?;
            // λ̃_1 < −s exactly when every eigenvalue lies below the level
            Ok(levels.iter().map(|&x| tridiag::count_below(&t, x) == n).collect::<Vec<bool>>())
        },
        |row| {
            for (h, b) in hits.iter_mut().zip(row) {
                *h += b as usize;
            }
        },
    )?;
    let mut report = Report::new(reps);
    let mut table = Table::new(&["s", "log_freq", "stderr", "freq", "hits"]);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (&s, &h) in s_grid.iter().zip(&hits) {
        let freq = h as f64 / reps as f64;
        let freq_err = (freq * (1.0 - freq) / reps as f64).sqrt();
        report.set_with_err(&format!("freq_s{s}"), freq, freq_err);
        if h == 0 {
            report.note(format!("no replica reached s = {s}; excluded from the fit"));
            table.push(vec![s, f64::NAN, f64::NAN, 0.0, 0.0]);
            continue;
        }
        let log_err = ((1.0 - freq) / (freq * reps as f64)).sqrt();
        table.push(vec![s, freq.ln(), log_err, freq, h as f64]);
        xs.push(s.powi(3));
        ys.push(freq.ln());
    }
    let (intercept, slope) = stats::linear_fit(&xs, &ys)
        .ok_or_else(|| Error::numerical("fewer than two tail levels were reached; cannot fit a slope"))?;
    report
        .set("slope", slope)
        .set("intercept", intercept)
        .set("target_slope", -beta / 24.0);
    report.table = table;
    Ok(report)
}

fn bl_distance(p: &mut Params) -> Result<Report> {
    let mu = SignedMeasure::load(std::path::Path::new(&p.string("mu")?))?;
    let nu = SignedMeasure::load(std::path::Path::new(&p.string("nu")?))?;
    let r = p.f64("r")?;
    let grid = p.usize_or("grid", measures::DEFAULT_GRID)?;
    let pinned = p.flag("pinned")?;
    let d = if pinned {
        measures::bl_distance_pinned(&mu, &nu, r, grid)?
    } else {
        measures::bl_distance(&mu, &nu, r, grid)?
    };
    let mut report = Report::new(1);
    report
        .set("distance", d.value)
        .set("error_bound", d.error_bound)
        .set("h", d.h)
        .set("under_resolved", if d.under_resolved { 1.0 } else { 0.0 });
    if d.under_resolved {
        report.note("two atoms are closer than the grid spacing; increase --grid");
    }
    let mut table = Table::new(&["x", "f"]);
    for (j, f) in d.test_function.iter().enumerate() {
        table.push(vec![-r + j as f64 * d.h, *f]);
    }
    report.table = table;
    Ok(report)
}

fn rate_fn(p: &mut Params) -> Result<Report> {
    let mut report = Report::new(1);
    if p.flag("phi-minus")? {
        let zs = p.list("z")?;
        let mut table = Table::new(&["z", "phi_minus"]);
        for &z in &zs {
            let v = ratefn::phi_minus(z)?;
            table.push(vec![z, v]);
            report.set(&format!("phi_minus_z{z}"), v);
        }
        if let [z] = zs[..] {
            report.set("phi_minus", ratefn::phi_minus(z)?);
        }
        report.table = table;
        return Ok(report);
    }
    let mu = SignedMeasure::load(std::path::Path::new(&p.string("measure")?))?;
    let mut params = RateParams::new(p.f64("r0")?, p.f64("r1")?);
    params.c = p.f64_or("c", 1.0)?;
    report
        .set("rate_i", ratefn::rate_i(&mu, &params)?)
        .set("interaction", ratefn::rate_interaction(&mu, &params)?)
        .set("potential", ratefn::potential_term(&mu));
    let trace = ratefn::psi_and_i2(&mu, &params)?;
    report.set("i2", trace.i2).set("i2_argmax", trace.argmax);
    match ratefn::log_energy_j(&mu) {
        Ok(j) => {
            report.set("j", j);
            if let (Some(n), Some(k)) = (p.opt_usize("n")?, p.opt_usize("k")?) {
                report.set("j0", ratefn::log_energy_j0(&mu, n, k)?);
            }
        }
        Err(e) => {
            report.note(format!("log-energy not computed: {e}"));
        }
    }
    report.note("the constant c of the ψ functional is not fixed by theory");
    let mut table = Table::new(&["x", "psi"]);
    for (x, v) in trace.points {
        table.push(vec![x, v]);
    }
    report.table = table;
    Ok(report)
}

fn kpz_experiment(p: &mut Params, seed: u64, reps: usize) -> Result<Report> {
    let mode = p.string_or("mode", "sandwich");
    match mode.as_str() {
        "bounds" => {
            let params = KpzParams {
                s: p.f64("s")?,
                t: p.f64("t")?,
                epsilon: p.f64("epsilon")?,
                c: p.f64("c")?,
                k: p.f64("k")?,
            };
            let full = kpz::kpz1_bounds(&params)?;
            let half = kpz::kpz2_bounds(&params)?;
            let mut report = Report::new(1);
            report
                .set("full_log_lower", full.log_lower)
                .set("full_log_upper", full.log_upper)
                .set("half_log_lower", half.log_lower)
                .set("half_log_upper", half.log_upper)
                .set("full_lower", full.lower)
                .set("full_upper", full.upper)
                .set("half_lower", half.lower)
                .set("half_upper", half.upper);
            if full.degenerate {
                report.note("s = 0: every term equals one and the bounds are uninformative");
            }
            report.note("the constants C and K are supplied by the caller");
            Ok(report)
        }
        "sandwich" => {
            let n = p.usize_or("n", 256)?;
            let beta = p.f64_or("beta", 2.0)?;
            let s_grid = p.list("s-grid")?;
            let t = p.f64("t")?;
            kpz::sandwich_experiment(n, beta, &s_grid, t, reps, seed)
        }
        "halfspace" => {
            let n = p.usize_or("n", 256)?;
            // the half-space identity involves the β = 1 edge
            let beta = p.f64_or("beta", 1.0)?;
            let u = p.f64("u")?;
            let t = p.f64("t")?;
            if !(u > 0.0) || !(t > 0.0) {
                return Err(Error::domain("u and T must be positive"));
            }
            let below = ((1.0 / (4.0 * u)).ln() - kpz::TRUNCATION_MARGIN) / t.cbrt() - 1e-9;
            let mut acc = Accumulator::default();
            for_each_replica(
                reps,
                |i| {
                    let points = kpz::edge_points(n, beta, below, seed, i)?;
                    Ok(kpz::laplace_product_halfspace(&points, u, t)?.value)
                },
                |v| acc.push(v),
            )?;
            let mut report = Report::new(reps);
            report.set_summary("halfspace_product", &acc.summary());
            Ok(report)
        }
        other => Err(Error::usage(format!(
            "invalid value '{other}' for --mode: expected bounds, sandwich or halfspace"
        ))),
    }
}

fn decay(p: &mut Params, seed: u64, reps: usize) -> Result<Report> {
    let n = p.usize("n")?;
    let beta = p.f64("beta")?;
    let i_star = p.usize_or("i-star", (4.0 * (n as f64).cbrt()).floor() as usize)?;
    let mut rows = Vec::with_capacity(reps);
    for_each_replica(
        reps,
        |i| {
            let t = sample_gbeta(n, beta, matrix_stream(seed, i))?;
            let lambda = tridiag::top_k_eigenvalues(&t, 1, 1e-12)?.values[0];
            let phi = tridiag::eigenvector(&t, lambda)?;
            let d = tridiag::decay_diagnostics(&phi, n, i_star)?;
            let negative = tridiag::discrete_riccati(&phi, n).negative_after_last_sign_change();
            Ok((d, negative))
        },
        |r| rows.push(r),
    )?;
    let ratio_ok: Vec<bool> = rows.iter().map(|(d, _)| d.last_ratio <= 9.0 / 8.0).collect();
    let sign: Vec<bool> = rows.iter().map(|(d, _)| d.sign_constant_beyond).collect();
    let negative: Vec<bool> = rows.iter().map(|(_, b)| *b).collect();
    let fits: Vec<f64> = rows.iter().map(|(d, _)| d.decay_fit).collect();
    let fit_ok: Vec<bool> = fits.iter().map(|&f| f <= -1.0 / 12.0).collect();
    let ratios: Vec<f64> = rows.iter().map(|(d, _)| d.last_ratio).collect();
    let mut report = Report::new(reps);
    report
        .set_summary("ratio_ok_frequency", &stats::frequency(&ratio_ok))
        .set_summary("sign_constant_frequency", &stats::frequency(&sign))
        .set_summary("riccati_negative_frequency", &stats::frequency(&negative))
        .set_summary("decay_fit_ok_frequency", &stats::frequency(&fit_ok))
        .set_summary("decay_fit_mean", &stats::summarize(&fits))
        .set_summary("last_ratio_mean", &stats::summarize(&ratios))
        .set("i_star", i_star as f64);
    let mut table = Table::new(&["replica", "last_ratio", "decay_fit", "sign_constant", "riccati_negative"]);
    for (i, (d, neg)) in rows.iter().enumerate() {
        table.push(vec![
            i as f64,
            d.last_ratio,
            d.decay_fit,
            d.sign_constant_beyond as u8 as f64,
            *neg as u8 as f64,
        ]);
    }
    report.table = table;
    Ok(report)
}

fn blowup_times(p: &mut Params, seed: u64, reps: usize) -> Result<Report> {
    let a = p.f64("a")?;
    let beta = p.f64("beta")?;
    let h0 = p.f64_or("h0", DiffusionConfig::DEFAULT_STEP)?;
    let m = p.f64_or("m", PI * a.sqrt())?;
    let sample = riccati::blowup_time_experiment_with_step(a, beta, reps, seed, h0)?;
    let mut report = sample.report();
    let (threshold, bound) = riccati::late_blowup_threshold(a, beta, m);
    report
        .set("late_threshold", threshold)
        .set("late_fraction", sample.fraction_above(threshold))
        .set("late_bound", bound.min(1.0));
    if !(PI * a.sqrt() <= m && m <= a * a / 100.0) {
        report.note("M lies outside [π√a, a²/100]; the late blow-up bound does not apply");
    }
    Ok(report)
}
