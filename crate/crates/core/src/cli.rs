//! Command-line front end. [`run`] does all the work and returns the
//! rendered output plus an exit code, so the binary is a thin wrapper.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::datasets::{self, Dataset, BUILTIN_NAMES};
use crate::dpd::{fit, FitConfig, FitResult};
use crate::error::Error;
use crate::influence::{influence_report, leverage_probe, ProbeMode};
use crate::lifetime::{characteristic_ci, param_ci, Characteristic};
use crate::model::{ModelParams, StressPlan};
use crate::montecarlo::{metrics_table, run_scenario, run_sweep, ScenarioSpec, SweepParam};
use crate::report::{render, Cell, Format, Metadata, Table};
use crate::tuning::{select_beta, TuningConfig};
use crate::wald::{wald_statistic_at, LinearConstraint, DEFAULT_LEVELS};

pub const EXIT_OK: i32 = 0;
/// Generic failure, e.g. the output file could not be written.
pub const EXIT_IO: i32 = 1;
/// Bad flags, constraint strings or config files.
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
/// A fit did not converge or no β could be selected.
pub const EXIT_CONVERGENCE: i32 = 4;
/// Singular matrices, non-finite values, domain errors.
pub const EXIT_NUMERIC: i32 = 5;

pub const SCENARIO_CLEAN: &str = include_str!("../configs/scenario_clean.toml");
pub const SCENARIO_A0_SWEEP: &str = include_str!("../configs/scenario_a0_sweep.toml");
pub const BUNDLED_SCENARIOS: [&str; 2] = ["scenario_clean", "scenario_a0_sweep"];

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::Config(_) => EXIT_PARSE,
        Error::Data(_) => EXIT_DATA,
        Error::Estimation(_) => EXIT_CONVERGENCE,
        Error::NonFinite(_) | Error::Singular(_) | Error::Domain(_) => EXIT_NUMERIC,
    }
}

#[derive(Debug, Parser)]
#[command(name = "robust-ssalt", version, about = "Robust inference for step-stress life tests on one-shot devices")]
pub struct Cli {
    /// Log verbosity (error, warn, info, debug).
    #[arg(long, global = true, default_value = "warn")]
    pub log_level: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one or more β and report parameters and lifetime characteristics.
    Fit(FitArgs),
    /// Interval for a single lifetime characteristic.
    Ci(CiArgs),
    /// Wald-type test of a linear hypothesis.
    Test(TestArgs),
    /// Data-driven choice of β.
    Tune(TuneArgs),
    /// Influence functions per cell, or a leverage probe.
    Influence(InfluenceArgs),
    /// Run a Monte Carlo scenario or sweep from a config file.
    Simulate(SimulateArgs),
    /// List the bundled datasets, or show one.
    Datasets(DatasetsArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Pretty,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Self {
        match f {
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
            OutputFormat::Pretty => Format::Pretty,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "pretty")]
    pub format: OutputFormat,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Builtin name (solar, transistor, led) or path to a dataset file.
    #[arg(long)]
    pub data: String,
    /// Keep right-censored survivors that the dataset file marks for dropping.
    #[arg(long)]
    pub keep_survivors: bool,
    /// Starting points per fit.
    #[arg(long, default_value_t = 5)]
    pub multistart: usize,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Comma-separated β values; omitted means the tuned β ("Optimal").
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    /// Operating stress in physical units (defaults to the dataset's).
    #[arg(long)]
    pub x0: Option<f64>,
    /// Mission time for the reliability (defaults to the dataset's).
    #[arg(long)]
    pub t: Option<f64>,
    /// Reliability level of the reported quantile.
    #[arg(long, default_value_t = 0.95)]
    pub qrel: f64,
    #[arg(long, default_value_t = 0.95)]
    pub conf: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    Reliability,
    Quantile,
    Mean,
}

#[derive(Debug, Args)]
pub struct CiArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Mission time (reliability only).
    #[arg(long, conflicts_with = "q")]
    pub t: Option<f64>,
    /// Reliability level (quantile only).
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub x0: Option<f64>,
    #[arg(long, default_value_t = 0.95)]
    pub conf: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Rows "c0,c1,c2,d" separated by ';', each meaning c·θ = d.
    #[arg(long, allow_hyphen_values = true)]
    pub constraint: String,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<f64>,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 20)]
    pub max_rounds: usize,
    /// Initial pilot "a0,a1,eta"; defaults to the average of the grid fits.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub pilot: Vec<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProbeArg {
    InspectionTime,
    StressLevel,
}

#[derive(Debug, Args)]
pub struct InfluenceArgs {
    /// Dataset whose plan and fit are used; defaults to the simulation design.
    #[arg(long)]
    pub data: Option<String>,
    /// Parameters "a0,a1,eta"; defaults to the fit on --data or (5.3,-0.05,1.5).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    /// Null hypothesis for the Wald IF; defaults to a1 equal to its value in θ.
    #[arg(long, allow_hyphen_values = true)]
    pub constraint: Option<String>,
    /// Sample size in the Wald IF; defaults to the dataset total or 200.
    #[arg(long)]
    pub n: Option<u64>,
    /// Run a leverage probe instead of the per-cell table.
    #[arg(long, value_enum, requires = "grid")]
    pub probe: Option<ProbeArg>,
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML scenario file or a bundled name (scenario_clean, scenario_a0_sweep).
    #[arg(long)]
    pub config: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DatasetsArgs {
    /// Show the cell counts of one dataset.
    pub name: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Rendered output with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub text: String,
    /// Diagnostic for stderr.
    pub message: Option<String>,
}

struct Report {
    metadata: Metadata,
    tables: Vec<(&'static str, Table)>,
    /// Non-fatal failure (e.g. a non-converged fit) reported after output.
    soft_error: Option<Error>,
}

fn base_metadata(command: &str) -> Metadata {
    vec![("version".into(), env!("CARGO_PKG_VERSION").into()), ("command".into(), command.into())]
}

fn dataset_metadata(meta: &mut Metadata, d: &Dataset) {
    meta.push(("dataset".into(), d.name.clone()));
    meta.push(("dataset_sha256".into(), d.sha256.clone()));
    meta.push(("n_total".into(), d.data.total().to_string()));
    if d.dropped_survivors > 0 {
        meta.push(("dropped_survivors".into(), d.dropped_survivors.to_string()));
    }
    for c in &d.corrections {
        meta.push(("correction".into(), c.clone()));
    }
}

fn list(v: &[f64]) -> String {
    v.iter().map(|b| b.to_string()).collect::<Vec<_>>().join(",")
}

fn load_data(args: &DataArgs) -> crate::Result<Dataset> {
    let d = datasets::load(&args.data)?;
    if args.keep_survivors {
        d.with_survivors()
    } else {
        Ok(d)
    }
}

fn fit_config(args: &DataArgs, beta: f64) -> FitConfig {
    FitConfig { beta, multistart: args.multistart, ..FitConfig::default() }
}

fn x0_for(d: &Dataset, flag: Option<f64>) -> crate::Result<(f64, f64)> {
    let phys = flag.or(d.x0).unwrap_or(d.plan_raw.stress_levels()[0]);
    Ok((phys, d.normalized_x0(phys)?))
}

fn params_from(v: &[f64], what: &str) -> crate::Result<ModelParams> {
    if v.len() != 3 {
        return Err(Error::InvalidInput(format!("{what} needs three values a0,a1,eta, got {}", v.len())));
    }
    ModelParams::new(v[0], v[1], v[2])
}

fn beta_label(b: f64) -> String {
    if b == 0.0 {
        "MLE".into()
    } else {
        format!("beta={b}")
    }
}

fn cmd_fit(a: &FitArgs) -> crate::Result<Report> {
    let d = load_data(&a.data)?;
    let plan = d.plan()?;
    let (x0_phys, x0) = x0_for(&d, a.x0)?;
    let mut meta = base_metadata("fit");
    dataset_metadata(&mut meta, &d);

    let fits: Vec<(String, FitResult)> = if a.beta.is_empty() {
        let cfg = TuningConfig { fit: fit_config(&a.data, 0.0), ..TuningConfig::default() };
        meta.push(("beta_grid".into(), list(&cfg.beta_grid)));
        let t = select_beta(&plan, &d.data, &cfg)?;
        meta.push(("tuning_rounds".into(), t.rounds.to_string()));
        let f = *t.fits.iter().find(|f| f.beta == t.beta_opt).expect("winner is among the fits");
        vec![("Optimal".into(), f)]
    } else {
        meta.push(("beta_grid".into(), list(&a.beta)));
        a.beta
            .iter()
            .map(|&b| Ok((beta_label(b), fit(&plan, &d.data, &fit_config(&a.data, b))?)))
            .collect::<crate::Result<_>>()?
    };
    meta.push(("x0".into(), format!("{x0_phys} (normalized {x0})")));
    meta.push(("confidence".into(), a.conf.to_string()));

    let mut est = Table::new([
        "label",
        "beta",
        "a0",
        "a0_lo",
        "a0_hi",
        "a1",
        "a1_lo",
        "a1_hi",
        "eta",
        "eta_lo",
        "eta_hi",
        "converged",
        "wide_ci",
        "condition",
    ]);
    let mut chars = Table::new([
        "label",
        "beta",
        "characteristic",
        "arg",
        "value",
        "std_error",
        "direct_lo",
        "direct_hi",
        "transformed_lo",
        "transformed_hi",
    ]);
    let mut kinds = vec![Characteristic::Mean];
    if let Some(t) = a.t.or(d.mission_time) {
        kinds.push(Characteristic::Reliability { t });
    }
    kinds.push(Characteristic::Quantile { q: a.qrel });

    let mut soft_error = None;
    for (label, f) in &fits {
        let ci = param_ci(f, a.conf)?;
        let th = f.params.to_array();
        let mut row: Vec<Cell> = vec![label.as_str().into(), f.beta.into()];
        for i in 0..3 {
            row.extend([th[i].into(), ci[i].0.into(), ci[i].1.into()]);
        }
        row.extend([f.converged.into(), f.wide_ci.into(), f.condition.into()]);
        est.push(row);
        if !f.converged {
            soft_error = Some(Error::Estimation(format!("fit at beta={} did not converge", f.beta)));
            continue;
        }
        for kind in &kinds {
            let e = characteristic_ci(f, x0, *kind, a.conf)?;
            let arg = match *kind {
                Characteristic::Reliability { t } => t,
                Characteristic::Quantile { q } => q,
                Characteristic::Mean => f64::NAN,
            };
            chars.push(vec![
                label.as_str().into(),
                f.beta.into(),
                kind.label().into(),
                arg.into(),
                e.value.into(),
                e.std_error.into(),
                e.ci_direct.0.into(),
                e.ci_direct.1.into(),
                e.ci_transformed.0.into(),
                e.ci_transformed.1.into(),
            ]);
        }
    }
    Ok(Report { metadata: meta, tables: vec![("estimates", est), ("characteristics", chars)], soft_error })
}

fn cmd_ci(a: &CiArgs) -> crate::Result<Report> {
    let d = load_data(&a.data)?;
    let plan = d.plan()?;
    let (x0_phys, x0) = x0_for(&d, a.x0)?;
    let kind = match a.kind {
        KindArg::Reliability => Characteristic::Reliability {
            t: a.t.or(d.mission_time).ok_or_else(|| Error::InvalidInput("reliability needs --t".into()))?,
        },
        KindArg::Quantile => Characteristic::Quantile { q: a.q.unwrap_or(0.95) },
        KindArg::Mean => Characteristic::Mean,
    };
    let f = fit(&plan, &d.data, &fit_config(&a.data, a.beta))?;
    let mut meta = base_metadata("ci");
    dataset_metadata(&mut meta, &d);
    meta.push(("beta_grid".into(), a.beta.to_string()));
    meta.push(("x0".into(), format!("{x0_phys} (normalized {x0})")));
    let e = characteristic_ci(&f, x0, kind, a.conf)?;
    let mut t = Table::new([
        "characteristic",
        "beta",
        "confidence",
        "value",
        "std_error",
        "direct_lo",
        "direct_hi",
        "transformed_lo",
        "transformed_hi",
    ]);
    t.push(vec![
        kind.label().into(),
        a.beta.into(),
        a.conf.into(),
        e.value.into(),
        e.std_error.into(),
        e.ci_direct.0.into(),
        e.ci_direct.1.into(),
        e.ci_transformed.0.into(),
        e.ci_transformed.1.into(),
    ]);
    Ok(Report { metadata: meta, tables: vec![("interval", t)], soft_error: None })
}

fn cmd_test(a: &TestArgs) -> crate::Result<Report> {
    let d = load_data(&a.data)?;
    let plan = d.plan()?;
    let c = LinearConstraint::parse(&a.constraint)?;
    let f = fit(&plan, &d.data, &fit_config(&a.data, a.beta))?;
    if !f.converged {
        return Err(Error::Estimation(format!("fit at beta={} did not converge", a.beta)));
    }
    let levels = if a.levels.is_empty() { DEFAULT_LEVELS.to_vec() } else { a.levels.clone() };
    let r = wald_statistic_at(&f.params, &f.covariance, f.n_total, &c, &levels)?;
    let mut meta = base_metadata("test");
    dataset_metadata(&mut meta, &d);
    meta.push(("beta_grid".into(), a.beta.to_string()));
    meta.push(("constraint".into(), a.constraint.clone()));
    let mut cols = vec!["beta".to_string(), "statistic".into(), "df".into(), "p_value".into()];
    cols.extend(levels.iter().map(|l| format!("reject_{l}")));
    cols.push("pseudo_inverse".into());
    let mut t = Table::new(cols);
    let mut row: Vec<Cell> = vec![a.beta.into(), r.statistic.into(), r.df.into(), r.p_value.into()];
    row.extend(r.reject_at.iter().map(|&(_, rej)| Cell::from(rej)));
    row.push(r.pseudo_inverse.into());
    t.push(row);
    Ok(Report { metadata: meta, tables: vec![("test", t)], soft_error: None })
}

fn cmd_tune(a: &TuneArgs) -> crate::Result<Report> {
    let d = load_data(&a.data)?;
    let plan = d.plan()?;
    let mut cfg = TuningConfig {
        epsilon: a.epsilon,
        max_rounds: a.max_rounds,
        fit: fit_config(&a.data, 0.0),
        ..TuningConfig::default()
    };
    if !a.grid.is_empty() {
        cfg.beta_grid = a.grid.clone();
    }
    if !a.pilot.is_empty() {
        cfg.pilot = Some(params_from(&a.pilot, "--pilot")?);
    }
    let r = select_beta(&plan, &d.data, &cfg)?;
    let mut meta = base_metadata("tune");
    dataset_metadata(&mut meta, &d);
    meta.push(("beta_grid".into(), list(&cfg.beta_grid)));
    let mut sel = Table::new(["beta_opt", "a0", "a1", "eta", "rounds", "converged", "excluded"]);
    sel.push(vec![
        r.beta_opt.into(),
        r.theta_opt.a0.into(),
        r.theta_opt.a1.into(),
        r.theta_opt.eta.into(),
        r.rounds.into(),
        r.converged.into(),
        list(&r.excluded).into(),
    ]);
    let mut curve = Table::new(["beta", "mse"]);
    for &(b, m) in &r.mse_curve {
        curve.push(vec![b.into(), m.into()]);
    }
    let soft_error =
        (!r.converged).then(|| Error::Estimation(format!("pilot did not settle within {} rounds", cfg.max_rounds)));
    Ok(Report { metadata: meta, tables: vec![("selection", sel), ("mse_curve", curve)], soft_error })
}

fn design_plan() -> StressPlan {
    ScenarioSpec::clean_design(1, 0).plan
}

fn cmd_influence(a: &InfluenceArgs) -> crate::Result<Report> {
    let mut meta = base_metadata("influence");
    let (plan, default_theta, default_n) = match &a.data {
        Some(spec) => {
            let d = datasets::load(spec)?;
            dataset_metadata(&mut meta, &d);
            let plan = d.plan()?;
            let theta = if a.theta.is_empty() {
                let f = fit(&plan, &d.data, &FitConfig::with_beta(a.beta))?;
                if !f.converged {
                    return Err(Error::Estimation("fit for the influence analysis did not converge".into()));
                }
                f.params
            } else {
                params_from(&a.theta, "--theta")?
            };
            (plan, theta, d.data.total())
        }
        None => {
            meta.push(("plan".into(), "simulation design".into()));
            (design_plan(), ScenarioSpec::clean_design(1, 0).theta_true, 200)
        }
    };
    let theta = if a.theta.is_empty() { default_theta } else { params_from(&a.theta, "--theta")? };
    meta.push(("beta_grid".into(), a.beta.to_string()));
    meta.push(("theta".into(), format!("{},{},{}", theta.a0, theta.a1, theta.eta)));

    if let Some(p) = a.probe {
        let mode = match p {
            ProbeArg::InspectionTime => ProbeMode::InspectionTime,
            ProbeArg::StressLevel => ProbeMode::StressLevel,
        };
        let norms = leverage_probe(&theta, &plan, a.beta, mode, &a.grid)?;
        let mut t = Table::new(["value", "norm"]);
        for (v, n) in a.grid.iter().zip(norms) {
            t.push(vec![(*v).into(), n.into()]);
        }
        return Ok(Report { metadata: meta, tables: vec![("probe", t)], soft_error: None });
    }

    let constraint = match &a.constraint {
        Some(s) => LinearConstraint::parse(s)?,
        None => LinearConstraint::new([0.0, 1.0, 0.0], theta.a1),
    };
    let n = a.n.unwrap_or(default_n);
    meta.push(("n".into(), n.to_string()));
    let mut t = Table::new(["cell", "if_a0", "if_a1", "if_eta", "if_wald_second_order", "pseudo_inverse"]);
    for cell in 1..=plan.n_cells() {
        let r = influence_report(&theta, &plan, a.beta, &constraint, cell, n)?;
        t.push(vec![
            cell.into(),
            r.if_vector[0].into(),
            r.if_vector[1].into(),
            r.if_vector[2].into(),
            r.if_wald_second_order.into(),
            r.pseudo_inverse.into(),
        ]);
    }
    Ok(Report { metadata: meta, tables: vec![("influence", t)], soft_error: None })
}

/// Contamination sweep section of a scenario file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub param: SweepParam,
    /// Defaults to the standard grid for `param`.
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default = "default_cell")]
    pub cell: usize,
}

fn default_cell() -> usize {
    3
}

/// A scenario file: one `[scenario]` table and an optional `[sweep]`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

pub fn parse_simulation_config(text: &str) -> crate::Result<SimulationConfig> {
    let c: SimulationConfig = toml::from_str(text).map_err(|e| Error::Config(format!("scenario file: {e}")))?;
    c.scenario.validate()?;
    Ok(c)
}

fn load_simulation_config(spec: &str) -> crate::Result<SimulationConfig> {
    let text = match spec {
        "scenario_clean" => SCENARIO_CLEAN.to_string(),
        "scenario_a0_sweep" => SCENARIO_A0_SWEEP.to_string(),
        path => std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {path}: {e}")))?,
    };
    parse_simulation_config(&text)
}

fn cmd_simulate(a: &SimulateArgs) -> crate::Result<Report> {
    let mut c = load_simulation_config(&a.config)?;
    if let Some(s) = a.seed {
        c.scenario.seed = s;
    }
    if let Some(r) = a.replications {
        c.scenario.replications = r;
    }
    c.scenario.validate()?;
    let s = &c.scenario;
    let mut meta = base_metadata("simulate");
    meta.push(("config".into(), a.config.clone()));
    meta.push(("seed".into(), s.seed.to_string()));
    meta.push(("replications".into(), s.replications.to_string()));
    meta.push(("n".into(), s.n.to_string()));
    meta.push(("beta_grid".into(), list(&s.beta_grid)));
    let table = match &c.sweep {
        Some(sw) => {
            let values = sw.values.clone().unwrap_or_else(|| sw.param.default_grid().to_vec());
            let runs = run_sweep(s, sw.param, &values, sw.cell)?;
            metrics_table(sw.param.label(), &runs)
        }
        None => {
            let m = run_scenario(s)?;
            meta.push(("true_reliability".into(), m.true_reliability.to_string()));
            meta.push(("true_mean".into(), m.true_mean.to_string()));
            metrics_table("none", &[(0.0, m)])
        }
    };
    Ok(Report { metadata: meta, tables: vec![("metrics", table)], soft_error: None })
}

fn cmd_datasets(a: &DatasetsArgs) -> crate::Result<Report> {
    let mut meta = base_metadata("datasets");
    match &a.name {
        None => {
            let mut t =
                Table::new(["name", "n_total", "n_levels", "n_cells", "dropped_survivors", "sha256", "description"]);
            for name in BUILTIN_NAMES {
                let d = datasets::builtin(name)?;
                t.push(vec![
                    d.name.as_str().into(),
                    d.data.total().into(),
                    d.plan_raw.n_levels().into(),
                    d.plan_raw.n_cells().into(),
                    d.dropped_survivors.into(),
                    d.sha256.as_str().into(),
                    d.description.as_str().into(),
                ]);
            }
            Ok(Report { metadata: meta, tables: vec![("datasets", t)], soft_error: None })
        }
        Some(name) => {
            let d = datasets::load(name)?;
            dataset_metadata(&mut meta, &d);
            let plan = d.plan()?;
            let norm = d.normalization()?;
            let times = d.plan_raw.inspection_times();
            let mut t = Table::new(["cell", "from", "to", "stress", "stress_normalized", "count"]);
            for (j, &c) in d.data.counts().iter().enumerate() {
                let from = if j == 0 { 0.0 } else { times[j - 1] };
                let to = times.get(j).copied().unwrap_or(f64::INFINITY);
                let seg = if j < times.len() { d.plan_raw.segment_closed_right(to) } else { d.plan_raw.n_levels() - 1 };
                let x = d.plan_raw.stress_levels()[seg];
                t.push(vec![(j + 1).into(), from.into(), to.into(), x.into(), norm.apply(x).into(), c.into()]);
            }
            debug_assert_eq!(plan.n_cells(), d.data.counts().len());
            Ok(Report { metadata: meta, tables: vec![("cells", t)], soft_error: None })
        }
    }
}

fn output_args(c: &Command) -> &OutputArgs {
    match c {
        Command::Fit(a) => &a.out,
        Command::Ci(a) => &a.out,
        Command::Test(a) => &a.out,
        Command::Tune(a) => &a.out,
        Command::Influence(a) => &a.out,
        Command::Simulate(a) => &a.out,
        Command::Datasets(a) => &a.out,
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Ci(a) => cmd_ci(a),
        Command::Test(a) => cmd_test(a),
        Command::Tune(a) => cmd_tune(a),
        Command::Influence(a) => cmd_influence(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Datasets(a) => cmd_datasets(a),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => return Outcome { code: exit_code(&e), text: String::new(), message: Some(e.to_string()) },
    };
    let out = output_args(&cli.command);
    let tables: Vec<(&str, &Table)> = report.tables.iter().map(|(n, t)| (*n, t)).collect();
    let text = render(out.format.into(), &report.metadata, &tables);
    let (code, message) = match &report.soft_error {
        Some(e) => (exit_code(e), Some(e.to_string())),
        None => (EXIT_OK, None),
    };
    if let Some(path) = &out.output {
        if let Err(e) = std::fs::write(path, &text) {
            return Outcome {
                code: EXIT_IO,
                text: String::new(),
                message: Some(format!("cannot write {}: {e}", path.display())),
            };
        }
        return Outcome { code, text: String::new(), message };
    }
    Outcome { code, text, message }
}

/// Parses `args` (program name first) and runs the command. Parse errors
/// come back as [`EXIT_PARSE`] with clap's message; help and version
/// requests exit 0.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            Outcome {
                code,
                text: if code == EXIT_OK { e.to_string() } else { String::new() },
                message: e.use_stderr().then(|| e.to_string()),
            }
        }
    }
}
