//! Benchmark harness: generate scenarios, solve them with every strategy,
//! and write convergence data (CSV), a JSON summary and SVG plots.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::blockmat::{Block, SymBlock};
use crate::cells::{
    build_collision_graph, collision_kappa, derive_seed, find_contacts, random_normal_vector, assemble_rhs,
    collision_graph_from_contacts, domain_radius_for, generate_random_sphere, FrictionParams, ScenarioKind,
    ScenarioSpec, DEFAULT_VOLUME_FRACTION,
};
use crate::error::{Error, Result};
use crate::factor::direct_solve;
use crate::graph::{read_graph, MatrixWeightedGraph};
use crate::krylov::{pcg, ConvergenceRecord, PcgOptions, Status};
use crate::precond::{gremban_expand, Preconditioner, Strategy};
use crate::spectral::{
    congestion_dilation_check, generalized_extremal_eigs, kappa_edges, spectral_report, SpectralReport,
    GENERALIZED_LIMIT, LAMBDA_MIN_TOL,
};

/// Reference solutions are computed when `n * d` is at most this.
pub const REFERENCE_LIMIT: usize = 4096;

/// Noise levels swept for a hexagonal scenario without `sigma`.
pub const DEFAULT_SIGMA_SWEEP: [f64; 4] = [0.0, 0.02, 0.05, 0.1];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    /// Generated scenario; exclusive with `graph`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSpec>,
    /// Graph file in the text format of [`crate::graph::write_graph`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Base seed; falls back to the scenario's `seed`.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_true")]
    pub reference: bool,
    #[serde(default)]
    pub verify_bounds: bool,
    /// Draw new cell positions for every repetition (forces are always
    /// redrawn).
    #[serde(default = "default_true")]
    pub rerandomize_positions: bool,
    /// Noise levels for hexagonal scenarios without `sigma`.
    #[serde(default)]
    pub sigma_sweep: Option<Vec<f64>>,
}

fn default_strategies() -> Vec<Strategy> {
    Strategy::STANDARD.to_vec()
}
fn default_repetitions() -> usize {
    1
}
fn default_tol() -> f64 {
    1e-8
}
fn default_out() -> PathBuf {
    PathBuf::from("bench-out")
}
fn default_true() -> bool {
    true
}

impl BenchmarkConfig {
    pub fn new(scenario: ScenarioSpec) -> Self {
        BenchmarkConfig {
            scenario: Some(scenario),
            graph: None,
            strategies: default_strategies(),
            repetitions: 1,
            tol: default_tol(),
            max_iter: None,
            out: default_out(),
            seed: None,
            reference: true,
            verify_bounds: false,
            rerandomize_positions: true,
            sigma_sweep: None,
        }
    }

    /// Parses a config file. A bare scenario object (one with a `type` key)
    /// is accepted as a config with default settings.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let config = if value.get("type").is_some() {
            BenchmarkConfig::new(serde_json::from_value(value)?)
        } else {
            serde_json::from_value(value)?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut config = Self::from_json(&fs::read_to_string(path)?)?;
        if let Some(g) = &config.graph {
            if g.is_relative() {
                if let Some(dir) = path.parent() {
                    config.graph = Some(dir.join(g));
                }
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.scenario, &self.graph) {
            (Some(s), None) => s.validate()?,
            (None, Some(_)) => {}
            _ => return Err(Error::Config("exactly one of `scenario` and `graph` is required".into())),
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("strategies must be non-empty".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("tol must be positive".into()));
        }
        if self.max_iter == Some(0) {
            return Err(Error::Config("max_iter must be positive".into()));
        }
        if let Some(sweep) = &self.sigma_sweep {
            if sweep.is_empty() || sweep.iter().any(|s| !(*s >= 0.0)) {
                return Err(Error::Config("sigma_sweep needs non-negative values".into()));
            }
        }
        Ok(())
    }

    pub fn base_seed(&self) -> u64 {
        self.seed.or(self.scenario.as_ref().map(|s| s.seed)).unwrap_or(0)
    }

    /// The concrete scenarios to run, with defaults filled in.
    pub fn scenarios(&self) -> Result<Vec<ScenarioSpec>> {
        let Some(spec) = &self.scenario else { return Ok(Vec::new()) };
        let spec = spec.resolved()?;
        if spec.kind == ScenarioKind::HexLattice && spec.sigma.is_none() {
            let sweep = self.sigma_sweep.clone().unwrap_or_else(|| DEFAULT_SIGMA_SWEEP.to_vec());
            return Ok(sweep
                .into_iter()
                .map(|sigma| ScenarioSpec { sigma: Some(sigma), ..spec.clone() })
                .collect());
        }
        Ok(vec![spec])
    }
}

/// One solve of one strategy on one repetition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    #[serde(flatten)]
    pub record: ConvergenceRecord,
    pub n: usize,
    pub m: usize,
    pub edge_vertex_ratio: f64,
    /// `max A_ij gamma_max / gamma_min` for generated scenarios, else the
    /// maximum edge condition number.
    pub kappa: f64,
    /// Preconditioner construction time in seconds.
    pub setup_time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralReport>,
}

/// Everything a run produces, before it is written out.
#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkResults {
    pub config: BenchmarkConfig,
    pub seed: u64,
    pub scenarios: Vec<ScenarioResult>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioResult {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<ScenarioSpec>,
    pub contact_model: &'static str,
    pub force_model: String,
    pub runs: Vec<RunRecord>,
    /// Mean iteration count per strategy over the repetitions.
    pub mean_iterations: BTreeMap<String, f64>,
}

impl BenchmarkResults {
    pub fn records(&self) -> impl Iterator<Item = &RunRecord> {
        self.scenarios.iter().flat_map(|s| &s.runs)
    }

    pub fn all_failed(&self) -> bool {
        self.records().all(|r| r.record.status == Status::Failed)
    }
}

struct Instance {
    graph: MatrixWeightedGraph,
    rhs: Vec<f64>,
    kappa: f64,
}

fn generate_instance(spec: &ScenarioSpec, position_seed: u64, force_seed: u64) -> Result<Instance> {
    let config = spec.generate(position_seed)?;
    let params = spec.params();
    let contacts = find_contacts(&config)?;
    let graph = collision_graph_from_contacts(config.len(), &contacts, &params)?;
    let rhs = assemble_rhs(&config, spec.force_model, force_seed)?;
    Ok(Instance { graph, rhs, kappa: collision_kappa(&contacts, &params) })
}

fn failed_record(label: &str, strategy: Strategy, seed: u64) -> ConvergenceRecord {
    ConvergenceRecord {
        strategy: strategy.to_string(),
        seed,
        scenario: label.to_string(),
        status: Status::Failed,
        iterations: 0,
        residual_history: Vec::new(),
        error_history: None,
        energy_error_history: None,
        true_residuals: Vec::new(),
        wall_time: 0.0,
    }
}

fn solve_one(
    config: &BenchmarkConfig,
    label: &str,
    inst: &Instance,
    reference: Option<&[f64]>,
    strategy: Strategy,
    seed: u64,
) -> RunRecord {
    let g = &inst.graph;
    let mut run = RunRecord {
        record: failed_record(label, strategy, seed),
        n: g.n(),
        m: g.edge_count(),
        edge_vertex_ratio: g.edge_vertex_ratio(),
        kappa: inst.kappa,
        setup_time: 0.0,
        error: None,
        spectral: None,
    };
    let start = Instant::now();
    let p = match Preconditioner::build(strategy, g) {
        Ok(p) => p,
        Err(e) => {
            run.error = Some(e.to_string());
            return run;
        }
    };
    run.setup_time = start.elapsed().as_secs_f64();
    let options = PcgOptions { tol: config.tol, max_iter: config.max_iter, ..PcgOptions::default() };
    match pcg(g, &inst.rhs, &p, &options, reference) {
        Ok((_, mut record)) => {
            record.strategy = strategy.to_string();
            record.seed = seed;
            record.scenario = label.to_string();
            run.record = record;
        }
        Err(e) => run.error = Some(e.to_string()),
    }
    if config.verify_bounds && g.n() * g.dim() <= GENERALIZED_LIMIT {
        match spectral_report(g, &p, inst.kappa) {
            Ok(r) => run.spectral = Some(r),
            Err(e) => run.error = Some(e.to_string()),
        }
    }
    run
}

fn mean_iterations(runs: &[RunRecord], strategies: &[Strategy]) -> BTreeMap<String, f64> {
    strategies
        .iter()
        .map(|s| {
            let token = s.to_string();
            let its: Vec<f64> = runs
                .iter()
                .filter(|r| r.record.strategy == token && r.record.status != Status::Failed)
                .map(|r| r.record.iterations as f64)
                .collect();
            let mean = if its.is_empty() { f64::NAN } else { its.iter().sum::<f64>() / its.len() as f64 };
            (token, mean)
        })
        .collect()
}

/// Runs every (scenario, repetition, strategy) combination. Solver errors
/// are recorded as failed runs; generation and config errors abort.
pub fn execute(config: &BenchmarkConfig) -> Result<BenchmarkResults> {
    config.validate()?;
    let base = config.base_seed();
    let mut scenarios = Vec::new();
    let sources: Vec<(String, Option<ScenarioSpec>)> = match &config.graph {
        Some(path) => {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            vec![(format!("graph-{stem}"), None)]
        }
        None => config.scenarios()?.into_iter().map(|s| (s.label(), Some(s))).collect(),
    };
    let replay = match &config.graph {
        Some(path) => Some(read_graph(BufReader::new(fs::File::open(path)?))?),
        None => None,
    };
    for (label, spec) in sources {
        let mut runs = Vec::new();
        for rep in 0..config.repetitions {
            let seed = derive_seed(base, rep as u64);
            let force_seed = derive_seed(seed, 1);
            let inst = match (&spec, &replay) {
                (Some(spec), _) => {
                    let position_seed = if config.rerandomize_positions { seed } else { derive_seed(base, 0) };
                    generate_instance(spec, position_seed, force_seed)?
                }
                (None, Some(g)) => Instance {
                    graph: g.clone(),
                    rhs: random_normal_vector(g.n() * g.dim(), force_seed),
                    kappa: kappa_edges(g),
                },
                (None, None) => unreachable!("validated config has a source"),
            };
            let g = &inst.graph;
            let reference = if config.reference && g.n() * g.dim() <= REFERENCE_LIMIT {
                Some(direct_solve(g, &inst.rhs)?)
            } else {
                None
            };
            if rep == 0 {
                // Warm-up solve, not recorded.
                let _ = solve_one(config, &label, &inst, reference.as_deref(), config.strategies[0], seed);
            }
            for &strategy in &config.strategies {
                runs.push(solve_one(config, &label, &inst, reference.as_deref(), strategy, seed));
            }
        }
        let mean_iterations = mean_iterations(&runs, &config.strategies);
        scenarios.push(ScenarioResult {
            label,
            force_model: match &spec {
                Some(s) => serde_json::to_value(s.force_model)?.as_str().unwrap_or_default().to_string(),
                None => "random-normal".to_string(),
            },
            spec,
            contact_model: "hertz: area = pi * R_eff * overlap, R_eff = R_i R_j / (R_i + R_j)",
            runs,
            mean_iterations,
        });
    }
    Ok(BenchmarkResults { config: config.clone(), seed: base, scenarios })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// `scenario,strategy,seed,iteration,rel_residual,rel_error`, one row per
/// recorded iteration. `rel_error` is empty without a reference.
pub fn emit_csv<'a>(records: impl IntoIterator<Item = &'a ConvergenceRecord>, mut out: impl Write) -> Result<()> {
    writeln!(out, "scenario,strategy,seed,iteration,rel_residual,rel_error")?;
    for r in records {
        for (k, res) in r.residual_history.iter().enumerate() {
            let err = r.error_history.as_ref().and_then(|h| h.get(k).copied());
            writeln!(out, "{},{},{},{},{},{}", r.scenario, r.strategy, r.seed, k, res, fmt_opt(err))?;
        }
    }
    Ok(())
}

/// Per-iteration mean of `series` after padding each with its final value.
pub fn mean_curve(series: &[&[f64]]) -> Vec<f64> {
    let len = series.iter().map(|s| s.len()).max().unwrap_or(0);
    let count = series.iter().filter(|s| !s.is_empty()).count();
    (0..len)
        .map(|k| {
            series
                .iter()
                .filter_map(|s| s.get(k).or(s.last()))
                .sum::<f64>()
                / count as f64
        })
        .collect()
}

/// Mean convergence curve of one (scenario, strategy) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanCurve {
    pub scenario: String,
    pub strategy: String,
    pub residual: Vec<f64>,
    pub error: Option<Vec<f64>>,
}

pub fn mean_curves(results: &BenchmarkResults) -> Vec<MeanCurve> {
    let mut out = Vec::new();
    for s in &results.scenarios {
        for strategy in &results.config.strategies {
            let token = strategy.to_string();
            let runs: Vec<&ConvergenceRecord> = s
                .runs
                .iter()
                .map(|r| &r.record)
                .filter(|r| r.strategy == token && !r.residual_history.is_empty())
                .collect();
            if runs.is_empty() {
                continue;
            }
            let residual = mean_curve(&runs.iter().map(|r| r.residual_history.as_slice()).collect::<Vec<_>>());
            let error = runs
                .iter()
                .map(|r| r.error_history.as_deref())
                .collect::<Option<Vec<_>>>()
                .map(|h| mean_curve(&h));
            out.push(MeanCurve { scenario: s.label.clone(), strategy: token, residual, error });
        }
    }
    out
}

/// `scenario,strategy,iteration,mean_rel_residual,mean_rel_error`.
pub fn emit_mean_csv(curves: &[MeanCurve], mut out: impl Write) -> Result<()> {
    writeln!(out, "scenario,strategy,iteration,mean_rel_residual,mean_rel_error")?;
    for c in curves {
        for (k, res) in c.residual.iter().enumerate() {
            let err = c.error.as_ref().and_then(|e| e.get(k).copied());
            writeln!(out, "{},{},{},{},{}", c.scenario, c.strategy, k, res, fmt_opt(err))?;
        }
    }
    Ok(())
}

const SVG_WIDTH: f64 = 800.0;
const SVG_HEIGHT: f64 = 500.0;
const PLOT_LEFT: f64 = 80.0;
const PLOT_RIGHT: f64 = 620.0;
const PLOT_TOP: f64 = 40.0;
const PLOT_BOTTOM: f64 = 440.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

/// Axis ranges of a plot: iterations on x, `log10` of the values on y, both
/// padded by 5% of the data span on each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotFrame {
    pub x_min: f64,
    pub x_max: f64,
    pub log_y_min: f64,
    pub log_y_max: f64,
}

impl PlotFrame {
    pub fn fit(series: &[(String, Vec<f64>)]) -> Self {
        let len = series.iter().map(|(_, v)| v.len()).max().unwrap_or(1).max(2);
        let logs: Vec<f64> = series
            .iter()
            .flat_map(|(_, v)| v.iter())
            .filter(|v| **v > 0.0 && v.is_finite())
            .map(|v| v.log10())
            .collect();
        let (lo, hi) = logs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
        let y_span = if hi > lo { hi - lo } else { 1.0 };
        let x_span = (len - 1) as f64;
        PlotFrame {
            x_min: -0.05 * x_span,
            x_max: x_span * 1.05,
            log_y_min: lo - 0.05 * y_span,
            log_y_max: hi + 0.05 * y_span,
        }
    }

    pub fn px(&self, x: f64) -> f64 {
        PLOT_LEFT + (x - self.x_min) / (self.x_max - self.x_min) * (PLOT_RIGHT - PLOT_LEFT)
    }

    pub fn py(&self, y: f64) -> f64 {
        PLOT_BOTTOM - (y.log10() - self.log_y_min) / (self.log_y_max - self.log_y_min) * (PLOT_BOTTOM - PLOT_TOP)
    }
}

/// Plain SVG line plot with a logarithmic y axis; one polyline and one
/// legend entry per series. Non-positive values are skipped.
pub fn emit_plot(series: &[(String, Vec<f64>)], title: &str, y_label: &str) -> String {
    let frame = PlotFrame::fit(series);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SVG_WIDTH}" height="{SVG_HEIGHT}" viewBox="0 0 {SVG_WIDTH} {SVG_HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, (PLOT_LEFT + PLOT_RIGHT) / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<rect x="{PLOT_LEFT}" y="{PLOT_TOP}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        PLOT_RIGHT - PLOT_LEFT,
        PLOT_BOTTOM - PLOT_TOP
    );
    for e in frame.log_y_min.ceil() as i32..=frame.log_y_max.floor() as i32 {
        let y = frame.py(10f64.powi(e));
        let _ = writeln!(s, r##"<line x1="{PLOT_LEFT}" y1="{y:.2}" x2="{PLOT_RIGHT}" y2="{y:.2}" stroke="#dddddd"/>"##);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{e}</text>"#, PLOT_LEFT - 6.0, y + 4.0);
    }
    let x_hi = frame.x_max / 1.05;
    let step = nice_step(x_hi / 5.0);
    let mut tick = 0.0;
    while tick <= x_hi + 1e-9 {
        let x = frame.px(tick);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{PLOT_BOTTOM}" x2="{x:.2}" y2="{}" stroke="black"/>"#, PLOT_BOTTOM + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{tick}</text>"#, PLOT_BOTTOM + 18.0);
        tick += step;
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">iteration</text>"#, (PLOT_LEFT + PLOT_RIGHT) / 2.0, PLOT_BOTTOM + 40.0);
    let _ = writeln!(
        s,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        (PLOT_TOP + PLOT_BOTTOM) / 2.0,
        escape(y_label)
    );
    for (k, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > 0.0 && v.is_finite())
            .map(|(i, v)| format!("{:.2},{:.2}", frame.px(i as f64), frame.py(*v)))
            .collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, points.join(" "));
        let y = PLOT_TOP + 10.0 + 20.0 * k as f64;
        let _ = writeln!(s, r#"<line x1="640" y1="{y}" x2="665" y2="{y}" stroke="{color}" stroke-width="2"/>"#);
        let _ = writeln!(s, r#"<text class="legend" x="672" y="{}">{}</text>"#, y + 4.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}

fn nice_step(raw: f64) -> f64 {
    if !(raw > 0.0) {
        return 1.0;
    }
    let p = 10f64.powf(raw.log10().floor());
    let m = raw / p;
    let nice = if m <= 1.0 { 1.0 } else if m <= 2.0 { 2.0 } else if m <= 5.0 { 5.0 } else { 10.0 };
    (nice * p).max(1.0)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn file_safe(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' }).collect()
}

/// Files written by [`write_artifacts`].
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub mean_csv: PathBuf,
    pub summary: PathBuf,
    pub plots: Vec<PathBuf>,
}

pub fn write_artifacts(results: &BenchmarkResults, dir: &Path) -> Result<Artifacts> {
    fs::create_dir_all(dir)?;
    let csv = dir.join("convergence.csv");
    let mut w = BufWriter::new(fs::File::create(&csv)?);
    emit_csv(results.records().map(|r| &r.record), &mut w)?;
    w.flush()?;

    let curves = mean_curves(results);
    let mean_csv = dir.join("mean_curves.csv");
    let mut w = BufWriter::new(fs::File::create(&mean_csv)?);
    emit_mean_csv(&curves, &mut w)?;
    w.flush()?;

    let summary = dir.join("summary.json");
    fs::write(&summary, serde_json::to_string_pretty(results)?)?;

    let mut plots = Vec::new();
    for s in &results.scenarios {
        let mine: Vec<&MeanCurve> = curves.iter().filter(|c| c.scenario == s.label).collect();
        if mine.is_empty() {
            continue;
        }
        let use_error = mine.iter().all(|c| c.error.is_some());
        let series: Vec<(String, Vec<f64>)> = mine
            .iter()
            .map(|c| {
                let v = if use_error { c.error.clone().unwrap_or_default() } else { c.residual.clone() };
                (c.strategy.clone(), v)
            })
            .collect();
        let y_label = if use_error { "mean relative error" } else { "mean relative residual" };
        let path = dir.join(format!("{}.svg", file_safe(&s.label)));
        fs::write(&path, emit_plot(&series, &s.label, y_label))?;
        plots.push(path);
    }
    Ok(Artifacts { csv, mean_csv, summary, plots })
}

/// [`execute`] followed by [`write_artifacts`] into `config.out`.
pub fn run(config: &BenchmarkConfig) -> Result<(BenchmarkResults, Artifacts)> {
    let results = execute(config)?;
    let artifacts = write_artifacts(&results, &config.out)?;
    Ok((results, artifacts))
}

/// Collision graph of a scenario spec at `seed`. A hexagonal spec without
/// `sigma` uses the unperturbed lattice.
pub fn generate_graph(spec: &ScenarioSpec, seed: u64) -> Result<MatrixWeightedGraph> {
    let config = spec.generate(seed)?;
    build_collision_graph(&config, &spec.params())
}

/// Outcome of one named check of the spectral property suite.
#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: usize,
    pub trials: usize,
    /// Largest observed `lambda_max / bound` for bound checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_ratio: Option<f64>,
}

impl CheckResult {
    pub fn ok(&self) -> bool {
        self.passed == self.trials
    }
}

fn random_spd(rng: &mut impl rand::Rng) -> SymBlock {
    let mut b = Block::zeros(3);
    for i in 0..3 {
        for j in 0..3 {
            b.set(i, j, rng.random_range(-1.0..1.0));
        }
    }
    &SymBlock::symmetrize(&b.mul_transpose(&b)) + &SymBlock::scaled_identity(3, 0.2)
}

/// Spectral property suite on `trials` random-sphere scenarios with
/// `10 <= n <= n_max`: the lambda_min guarantee, the MST bound with the
/// collision kappa `max A_ij gamma_max / gamma_min`, the augmented-tree bound
/// with the maximum edge condition number, the congestion-dilation
/// inequality, the reciprocal-pair identity and the doubling reduction.
pub fn verify_suite(n_max: usize, trials: usize, seed: u64) -> Result<Vec<CheckResult>> {
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::SplitMix64;

    if n_max < 10 {
        return Err(Error::Config("verify needs n >= 10".into()));
    }
    if n_max * 3 > GENERALIZED_LIMIT {
        return Err(Error::Config(format!("verify needs n <= {}", GENERALIZED_LIMIT / 3)));
    }
    let mut rng = SplitMix64::seed_from_u64(seed);
    let check = |name: &str| CheckResult { name: name.to_string(), passed: 0, trials, worst_ratio: None };
    let mut lmin = check("lambda_min(Gamma, P_mst) >= 1");
    let mut mst = check("lambda_max(Gamma, P_mst) <= kappa_collision m (n - 1)");
    let mut aug = check("lambda_max(Gamma, P_aug) <= 2 kappa_edges D^3 n^2 / t^2");
    let mut congestion = check("congestion-dilation inequality");
    let mut reciprocal = check("lambda_max(B, A) = 1 / lambda_min(A, B)");
    let mut doubling = check("doubling reduction recovers the solution");
    let params = FrictionParams::default();
    let worst = |c: &mut CheckResult, r: f64| c.worst_ratio = Some(c.worst_ratio.map_or(r, |w: f64| w.max(r)));

    for trial in 0..trials {
        let n = rng.random_range(10..=n_max);
        let cells = generate_random_sphere(n, domain_radius_for(n, 0.5, DEFAULT_VOLUME_FRACTION), 0.5, 0.9, derive_seed(seed, trial as u64))?;
        let contacts = find_contacts(&cells)?;
        let g = collision_graph_from_contacts(n, &contacts, &params)?;
        let kappa = collision_kappa(&contacts, &params);

        let p = Preconditioner::build(Strategy::Mst, &g)?;
        let r = spectral_report(&g, &p, kappa)?;
        lmin.passed += usize::from(r.lambda_min >= 1.0 - LAMBDA_MIN_TOL);
        mst.passed += usize::from(r.lambda_max <= r.bound_mst);
        if r.bound_mst > 0.0 {
            worst(&mut mst, r.lambda_max / r.bound_mst);
        }

        let t = 2 + trial % 2;
        let p = Preconditioner::build(Strategy::AugmentedMst(Some(t)), &g)?;
        let r = spectral_report(&g, &p, kappa_edges(&g))?;
        let bound = r.bound_aug.unwrap_or(0.0);
        aug.passed += usize::from(r.lambda_max <= bound);
        if bound > 0.0 {
            worst(&mut aug, r.lambda_max / bound);
        }

        let k = rng.random_range(1..=6);
        let edge = random_spd(&mut rng);
        let path: Vec<_> = (0..k).map(|_| random_spd(&mut rng)).collect();
        congestion.passed += usize::from(congestion_dilation_check(&edge, &path)?);

        let a = g.assemble_dense()?;
        let b = p.graph().assemble_dense()?;
        let (lo, _) = generalized_extremal_eigs(&a, &b)?;
        let (_, hi) = generalized_extremal_eigs(&b, &a)?;
        reciprocal.passed += usize::from((hi * lo - 1.0).abs() <= 1e-8);

        let bm = crate::factor::BlockMatrix::from_graph(&g);
        let expansion = gremban_expand(&bm)?;
        let rhs = random_normal_vector(3 * n, derive_seed(seed, 1000 + trial as u64));
        let x = expansion.recover(&direct_solve(expansion.graph(), &expansion.embed(&rhs)?)?)?;
        let back = g.laplacian_matvec(&x)?;
        let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let res = back.iter().zip(&rhs).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
        doubling.passed += usize::from(res <= 1e-9 * rhs_norm);
    }
    Ok(vec![lmin, mst, aug, congestion, reciprocal, doubling])
}
