//! Batch commands behind the `retscale` binary.
//!
//! Configuration comes from an optional JSON file (`--config`) with flag
//! overrides on top. All randomness derives from the single master seed.
//! Per-instrument work runs on a bounded rayon pool (`RETSCALE_THREADS`);
//! results are gathered in input order and written by one thread.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::intervals::IntervalSeries;
use crate::io::{self as fmtio, fmt, write_json, write_table, OutputHeader};
use crate::multiscaling::{alpha_histogram, AlphaEnsemble, AlphaEstimate, CurveSource, DEFAULT_BIN_WIDTH};
use crate::pipeline::{analyze_series, AnalysisSettings, InstrumentAnalysis};
use crate::seed::{derive_seed, key_of, EXPERIMENT_SURROGATE};
use crate::simulate::{run_discreteness_experiment, run_finite_size_experiment, SimulationPlan};
use crate::surrogate::{run_surrogate, SurrogateConfig};
use crate::volatility::{compute_volatility, load_prices, VolatilityPoint};

pub const THREADS_ENV: &str = "RETSCALE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "retscale", version, about = "Volatility return-interval analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Fit range for α as `lo:hi`, meaning lo < ⟨τ⟩ ≤ hi.
    #[arg(long, global = true, value_parser = parse_range)]
    pub range: Option<(f64, f64)>,
    /// Repeat the analysis on IAAFT surrogates.
    #[arg(long, global = true)]
    pub surrogate: bool,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Input file or directory of CSV files (repeatable; replaces config inputs).
    #[arg(long = "input", global = true)]
    pub inputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Prices to normalized volatility series plus seasonal profiles.
    Volatility,
    /// Threshold sweeps, moments, α fits and survival curves.
    Analyze,
    /// Discreteness and finite-size Monte-Carlo experiments.
    Simulate,
    /// IAAFT surrogate volatility series.
    Surrogate,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
    Ok((lo, hi))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

fn runtime(context: impl std::fmt::Display, e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(format!("{context}: {e}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub discreteness: Option<SimulationPlan>,
    pub finite_size: Option<SimulationPlan>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            discreteness: Some(SimulationPlan::discreteness_default()),
            finite_size: Some(SimulationPlan::finite_size_default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    /// Restrict to these instrument ids; empty means all inputs.
    pub instruments: Vec<String>,
    pub analysis: AnalysisSettings,
    /// Surrogate settings; the seed is derived per instrument from `seed`.
    pub surrogate: SurrogateConfig,
    pub run_surrogate: bool,
    /// Plans run by `simulate`; their `rng_seed` is replaced by `seed`.
    pub simulation: SimulationConfig,
    pub histogram_bin_width: f64,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            instruments: Vec::new(),
            analysis: AnalysisSettings::default(),
            surrogate: SurrogateConfig::default(),
            run_surrogate: false,
            simulation: SimulationConfig::default(),
            histogram_bin_width: DEFAULT_BIN_WIDTH,
            out_dir: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let mut cfg = match &cli.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| runtime(path.display(), e))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        if let Some(range) = cli.range {
            cfg.analysis.fit_range = range;
        }
        if cli.surrogate {
            cfg.run_surrogate = true;
        }
        if let Some(out) = &cli.out {
            cfg.out_dir = out.clone();
        }
        if !cli.inputs.is_empty() {
            cfg.inputs = cli.inputs.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let mut errors = Vec::new();
        let (lo, hi) = self.analysis.fit_range;
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            errors.push(format!("analysis.fit_range: ({lo}, {hi}] is not a valid range"));
        }
        let t = &self.analysis.targets;
        if t.is_empty() || t.iter().any(|x| !(x.is_finite() && *x > 0.0)) || t.windows(2).any(|w| w[0] > w[1]) {
            errors.push("analysis.targets: must be positive and sorted ascending".into());
        }
        if self.analysis.m_values.is_empty() {
            errors.push("analysis.m_values: must not be empty".into());
        }
        if self.analysis.m_values.iter().any(|m| !m.is_finite() || *m == 0.0) {
            errors.push("analysis.m_values: orders must be finite and nonzero".into());
        }
        if self.analysis.q_values.iter().any(|q| !(q.is_finite() && *q > 0.0)) {
            errors.push("analysis.q_values: thresholds must be positive".into());
        }
        if self.surrogate.iterations == 0 {
            errors.push("surrogate.iterations: must be at least 1".into());
        }
        if !(self.histogram_bin_width.is_finite() && self.histogram_bin_width > 0.0) {
            errors.push("histogram_bin_width: must be positive".into());
        }
        for (name, plan) in [("discreteness", &self.simulation.discreteness), ("finite_size", &self.simulation.finite_size)] {
            if let Some(Err(crate::simulate::SimulateError::InvalidPlan(errs))) = plan.as_ref().map(|p| p.validate()) {
                errors.extend(errs.into_iter().map(|e| format!("simulation.{name}.{e}")));
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(errors.join("; ")))
        }
    }

    /// SHA-256 of the canonical JSON config, output directory excluded.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = PathBuf::new();
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    fn header(&self) -> OutputHeader {
        OutputHeader::new(self.hash(), self.seed)
    }
}

/// What a command produced, relative to the output directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub outputs: Vec<String>,
    pub skipped: Vec<(String, String)>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: &'a RunConfig,
    outputs: &'a [String],
    skipped: &'a [(String, String)],
}

pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    let cfg = RunConfig::from_cli(cli)?;
    let pool = thread_pool()?;
    fs::create_dir_all(&cfg.out_dir).map_err(|e| CliError::Validation(format!("output directory {}: {e}", cfg.out_dir.display())))?;
    let mut writer = OutputWriter::new(&cfg);
    let name = match cli.command {
        Command::Volatility => {
            pool.install(|| cmd_volatility(&cfg, &mut writer))?;
            "volatility"
        }
        Command::Analyze => {
            pool.install(|| cmd_analyze(&cfg, &mut writer))?;
            "analyze"
        }
        Command::Simulate => {
            pool.install(|| cmd_simulate(&cfg, &mut writer))?;
            "simulate"
        }
        Command::Surrogate => {
            pool.install(|| cmd_surrogate(&cfg, &mut writer))?;
            "surrogate"
        }
    };
    writer.finish(name)
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Validation(format!("{THREADS_ENV} must be a positive integer, got `{s}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))
}

struct OutputWriter<'a> {
    cfg: &'a RunConfig,
    header: OutputHeader,
    report: RunReport,
}

impl<'a> OutputWriter<'a> {
    fn new(cfg: &'a RunConfig) -> Self {
        Self { cfg, header: cfg.header(), report: RunReport::default() }
    }

    fn write<F>(&mut self, name: &str, f: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut BufWriter<File>, &OutputHeader) -> Result<(), fmtio::FormatError>,
    {
        let path = self.cfg.out_dir.join(name);
        let file = File::create(&path).map_err(|e| runtime(path.display(), e))?;
        let mut w = BufWriter::new(file);
        f(&mut w, &self.header).map_err(|e| runtime(path.display(), e))?;
        w.flush().map_err(|e| runtime(path.display(), e))?;
        self.report.outputs.push(name.to_owned());
        Ok(())
    }

    fn table(&mut self, name: &str, columns: &[&str], rows: Vec<Vec<String>>) -> Result<(), CliError> {
        self.write(name, |w, h| Ok(write_table(w, h, columns, rows)?))
    }

    fn skip(&mut self, id: &str, reason: impl Into<String>) {
        self.report.skipped.push((id.to_owned(), reason.into()));
    }

    fn finish(mut self, command: &str) -> Result<RunReport, CliError> {
        if !self.report.skipped.is_empty() {
            let rows = self.report.skipped.iter().map(|(id, r)| vec![id.clone(), csv_field(r)]).collect();
            self.table("skipped.csv", &["instrument", "reason"], rows)?;
        }
        let manifest = Manifest {
            command,
            config: self.cfg,
            outputs: &self.report.outputs,
            skipped: &self.report.skipped,
        };
        let path = self.cfg.out_dir.join("manifest.json");
        let file = File::create(&path).map_err(|e| runtime(path.display(), e))?;
        let mut w = BufWriter::new(file);
        write_json(&mut w, &self.header, &manifest).map_err(|e| runtime(path.display(), e))?;
        w.flush().map_err(|e| runtime(path.display(), e))?;
        Ok(self.report)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Input files in deterministic order, tagged with instrument ids.
pub fn discover_inputs(cfg: &RunConfig) -> Result<Vec<(String, PathBuf)>, CliError> {
    let mut files = BTreeSet::new();
    for input in &cfg.inputs {
        if input.is_dir() {
            let entries = fs::read_dir(input).map_err(|e| runtime(input.display(), e))?;
            for entry in entries {
                let path = entry.map_err(|e| runtime(input.display(), e))?.path();
                if path.is_file() && path.extension().is_some_and(|e| e == "csv") {
                    files.insert(path);
                }
            }
        } else if input.is_file() {
            files.insert(input.clone());
        } else {
            return Err(CliError::Runtime(format!("{}: no such file or directory", input.display())));
        }
    }
    let found: Vec<(String, PathBuf)> = files
        .into_iter()
        .map(|p| (instrument_id(&p), p))
        .filter(|(id, _)| cfg.instruments.is_empty() || cfg.instruments.contains(id))
        .collect();
    if found.is_empty() {
        return Err(CliError::Runtime("no instruments found".into()));
    }
    Ok(found)
}

fn instrument_id(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    for suffix in [".surrogate.volatility", ".volatility"] {
        if let Some(id) = stem.strip_suffix(suffix) {
            return id.to_owned();
        }
    }
    stem
}

/// A loaded instrument: volatility points plus the seasonal profile when
/// the input was prices.
struct Instrument {
    points: Vec<VolatilityPoint>,
    profile: Option<Vec<f64>>,
}

impl Instrument {
    fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.v).collect()
    }
}

fn load_instrument(id: &str, path: &Path) -> Result<Instrument, String> {
    let open = || File::open(path).map(BufReader::new).map_err(|e| format!("{}: {e}", path.display()));
    let header = fmtio::sniff_header(open()?).map_err(|e| format!("{}: {e}", path.display()))?;
    match header.as_deref() {
        Some("date,minute,price") => {
            let prices = load_prices(open()?, id).map_err(|e| format!("{}: {e}", path.display()))?;
            let vol = compute_volatility(&prices).map_err(|e| format!("{}: {e}", path.display()))?;
            Ok(Instrument { points: vol.points().to_vec(), profile: Some(vol.seasonal_profile().to_vec()) })
        }
        Some("day,minute,v") => {
            let points = fmtio::read_volatility_csv(open()?).map_err(|e| format!("{}: {e}", path.display()))?;
            if points.is_empty() {
                return Err(format!("{}: no volatility rows", path.display()));
            }
            Ok(Instrument { points, profile: None })
        }
        other => Err(format!(
            "{}: unrecognized header `{}` (expected `date,minute,price` or `day,minute,v`)",
            path.display(),
            other.unwrap_or("")
        )),
    }
}

fn cmd_volatility(cfg: &RunConfig, out: &mut OutputWriter) -> Result<(), CliError> {
    let inputs = discover_inputs(cfg)?;
    let loaded: Vec<Result<Instrument, String>> =
        inputs.par_iter().map(|(id, path)| load_instrument(id, path)).collect();
    for ((id, _), result) in inputs.iter().zip(loaded) {
        let inst = result.map_err(CliError::Runtime)?;
        let Some(profile) = &inst.profile else {
            return Err(CliError::Runtime(format!("{id}: input is already a volatility series")));
        };
        out.write(&format!("{id}.volatility.csv"), |w, h| Ok(fmtio::write_volatility_csv(w, h, &inst.points)?))?;
        out.write(&format!("{id}.profile.csv"), |w, h| Ok(fmtio::write_profile_csv(w, h, profile)?))?;
    }
    Ok(())
}

fn surrogate_config(cfg: &RunConfig, id: &str) -> SurrogateConfig {
    SurrogateConfig { rng_seed: derive_seed(cfg.seed, &[EXPERIMENT_SURROGATE, key_of(id)]), ..cfg.surrogate }
}

struct AnalyzedInstrument {
    original: Result<InstrumentAnalysis, String>,
    surrogate: Option<Result<(InstrumentAnalysis, f64), String>>,
}

fn cmd_analyze(cfg: &RunConfig, out: &mut OutputWriter) -> Result<(), CliError> {
    let inputs = discover_inputs(cfg)?;
    let results: Vec<AnalyzedInstrument> = inputs
        .par_iter()
        .map(|(id, path)| {
            let inst = match load_instrument(id, path) {
                Ok(i) => i,
                Err(e) => return AnalyzedInstrument { original: Err(e), surrogate: None },
            };
            let values = inst.values();
            let original = analyze_series(&values, CurveSource::Original, &cfg.analysis).map_err(|e| e.to_string());
            let surrogate = cfg.run_surrogate.then(|| {
                let run = run_surrogate(&values, &surrogate_config(cfg, id)).map_err(|e| e.to_string())?;
                let analysis = analyze_series(&run.values, CurveSource::Surrogate, &cfg.analysis).map_err(|e| e.to_string())?;
                Ok((analysis, run.final_distance()))
            });
            AnalyzedInstrument { original, surrogate }
        })
        .collect();

    let mut ensemble_original: Vec<AlphaEstimate> = Vec::new();
    let mut ensemble_surrogate: Vec<AlphaEstimate> = Vec::new();
    for ((id, _), result) in inputs.iter().zip(results) {
        match result.original {
            Ok(a) => {
                write_analysis(out, id, "", &a)?;
                ensemble_original.extend(a.alphas.iter().copied());
            }
            Err(e) => {
                out.skip(id, e);
                continue;
            }
        }
        match result.surrogate {
            Some(Ok((a, distance))) => {
                write_analysis(out, id, ".surrogate", &a)?;
                out.table(
                    &format!("{id}.surrogate.spectrum.csv"),
                    &["iterations", "spectrum_distance"],
                    vec![vec![cfg.surrogate.iterations.to_string(), fmt(distance)]],
                )?;
                ensemble_surrogate.extend(a.alphas.iter().copied());
            }
            Some(Err(e)) => out.skip(&format!("{id}.surrogate"), e),
            None => {}
        }
    }
    write_ensemble(out, cfg, "", &ensemble_original)?;
    if cfg.run_surrogate {
        write_ensemble(out, cfg, ".surrogate", &ensemble_surrogate)?;
    }
    Ok(())
}

fn write_analysis(out: &mut OutputWriter, id: &str, tag: &str, a: &InstrumentAnalysis) -> Result<(), CliError> {
    let sweep_rows = a
        .sweep
        .entries
        .iter()
        .map(|e| {
            vec![
                fmt(e.target),
                fmt(e.series.q),
                e.series.mean_tau.map(fmt).unwrap_or_default(),
                e.series.taus.len().to_string(),
                e.series.n_exceedances.to_string(),
            ]
        })
        .collect();
    out.table(&format!("{id}{tag}.sweep.csv"), &["target", "q", "mean_tau", "n_intervals", "n_exceedances"], sweep_rows)?;

    let moment_rows = a
        .curves
        .iter()
        .flat_map(|c| c.points.iter().map(move |&(t, mu)| vec![fmt(c.m), fmt(t), fmt(mu)]))
        .collect();
    out.table(&format!("{id}{tag}.moments.csv"), &["m", "mean_tau", "mu_m"], moment_rows)?;

    let alpha_rows = a
        .alphas
        .iter()
        .map(|e| vec![fmt(e.m), fmt(e.alpha), fmt(e.stderr), e.n_points.to_string(), e.is_significant().to_string()])
        .collect();
    out.table(&format!("{id}{tag}.alpha.csv"), &["m", "alpha", "stderr", "n_points", "significant"], alpha_rows)?;

    let series: Vec<IntervalSeries> = a.thresholds.iter().map(|t| t.series.clone()).collect();
    out.write(&format!("{id}{tag}.intervals.csv"), |w, h| Ok(fmtio::write_intervals_csv(w, h, &series)?))?;
    for t in &a.thresholds {
        if let Some(cdf) = &t.survival {
            out.write(&format!("{id}{tag}.survival_q{}.csv", fmt(t.q)), |w, h| Ok(fmtio::write_survival_csv(w, h, cdf)?))?;
        }
    }
    let gamma_rows = a
        .thresholds
        .iter()
        .filter_map(|t| t.gamma_fit.map(|g| vec![fmt(t.q), fmt(g.gamma), fmt(g.residual), g.n_samples.to_string()]))
        .collect();
    out.table(&format!("{id}{tag}.gamma.csv"), &["q", "gamma", "residual", "n"], gamma_rows)?;
    if let Some(report) = &a.collapse {
        out.write(&format!("{id}{tag}.collapse.json"), |w, h| write_json(w, h, report))?;
    }
    if !a.notes.is_empty() || !a.sweep.warnings.is_empty() {
        let mut rows: Vec<Vec<String>> =
            a.sweep.warnings.iter().map(|w| vec!["sweep".into(), csv_field(&format!("target {}: {}", fmt(w.target), w.reason))]).collect();
        rows.extend(a.notes.iter().map(|n| vec!["moments".into(), csv_field(n)]));
        out.table(&format!("{id}{tag}.diagnostics.csv"), &["stage", "message"], rows)?;
    }
    Ok(())
}

fn write_ensemble(out: &mut OutputWriter, cfg: &RunConfig, tag: &str, estimates: &[AlphaEstimate]) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for &m in &cfg.analysis.m_values {
        let members: Vec<AlphaEstimate> = estimates.iter().copied().filter(|e| e.m == m).collect();
        if members.is_empty() {
            continue;
        }
        let hist = alpha_histogram(&members, cfg.histogram_bin_width).map_err(|e| CliError::Runtime(e.to_string()))?;
        let ens = AlphaEnsemble::from_estimates(members).map_err(|e| CliError::Runtime(e.to_string()))?;
        rows.push(vec![fmt(m), fmt(ens.mean_alpha), fmt(ens.std_alpha), ens.members.len().to_string()]);
        let bins = hist.bins.iter().map(|b| vec![fmt(b.left), fmt(b.right), b.count.to_string()]).collect();
        out.table(&format!("alpha_hist_m{}{tag}.csv", fmt(m)), &["bin_left", "bin_right", "count"], bins)?;
    }
    out.table(&format!("ensemble_alpha{tag}.csv"), &["m", "mean_alpha", "std_alpha", "n"], rows)
}

fn cmd_surrogate(cfg: &RunConfig, out: &mut OutputWriter) -> Result<(), CliError> {
    let inputs = discover_inputs(cfg)?;
    type SurrogateOutput = (Vec<VolatilityPoint>, Vec<f64>);
    let results: Vec<Result<SurrogateOutput, String>> = inputs
        .par_iter()
        .map(|(id, path)| {
            let inst = load_instrument(id, path)?;
            let run = run_surrogate(&inst.values(), &surrogate_config(cfg, id)).map_err(|e| format!("{id}: {e}"))?;
            let points = inst.points.iter().zip(run.values).map(|(p, v)| VolatilityPoint { v, ..*p }).collect();
            Ok((points, run.distances))
        })
        .collect();
    for ((id, _), result) in inputs.iter().zip(results) {
        let (points, distances) = result.map_err(CliError::Runtime)?;
        out.write(&format!("{id}.surrogate.volatility.csv"), |w, h| Ok(fmtio::write_volatility_csv(w, h, &points)?))?;
        let rows = distances.iter().enumerate().map(|(i, d)| vec![(i + 1).to_string(), fmt(*d)]).collect();
        out.table(&format!("{id}.surrogate.spectrum.csv"), &["iterations", "spectrum_distance"], rows)?;
    }
    Ok(())
}

fn cmd_simulate(cfg: &RunConfig, out: &mut OutputWriter) -> Result<(), CliError> {
    let sim = &cfg.simulation;
    if sim.discreteness.is_none() && sim.finite_size.is_none() {
        return Err(CliError::Validation("simulation: no experiment configured".into()));
    }
    if let Some(plan) = &sim.discreteness {
        let plan = SimulationPlan { rng_seed: cfg.seed, ..plan.clone() };
        let curves = run_discreteness_experiment(&plan).map_err(|e| CliError::Validation(e.to_string()))?;
        let mut rows = Vec::new();
        for c in &curves {
            for (k, &(t, mu)) in c.curve.points.iter().enumerate() {
                rows.push(vec![
                    fmt(c.resolution),
                    fmt(c.curve.m),
                    fmt(t),
                    fmt(mu),
                    c.size.to_string(),
                    fmt(c.targets[k]),
                    fmt(c.mu_stderr[k]),
                ]);
            }
        }
        out.table(
            "discreteness.csv",
            &["resolution", "m", "mean_tau", "mu_m", "size", "target", "mu_stderr"],
            rows,
        )?;
    }
    if let Some(plan) = &sim.finite_size {
        let plan = SimulationPlan { rng_seed: cfg.seed, ..plan.clone() };
        let result = run_finite_size_experiment(&plan, cfg.analysis.fit_range).map_err(|e| CliError::Validation(e.to_string()))?;
        let rows = result
            .iter()
            .map(|r| {
                vec![
                    r.size.to_string(),
                    fmt(r.m),
                    fmt(r.mean_alpha),
                    fmt(r.std_alpha),
                    fmt(r.mean_alpha_full),
                    r.n_fits.to_string(),
                ]
            })
            .collect();
        out.table("finite_size.csv", &["size", "m", "mean_alpha", "std_alpha", "mean_alpha_full", "n_fits"], rows)?;
    }
    Ok(())
}
