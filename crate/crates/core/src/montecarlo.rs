//! Seeded Monte Carlo engine: multinomial sampling, one-cell contamination
//! and per-β performance metrics.
//!
//! Replication `r` draws its null-model sample from ChaCha8 stream `2r` and
//! its power-model sample from stream `2r+1`, both keyed by the scenario
//! seed. Replications run in parallel and are aggregated in index order, so
//! results do not depend on the thread count.

use log::warn;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dpd::{fit, FitConfig, FitResult};
use crate::error::{Error, Result};
use crate::lifetime::{characteristic_ci, characteristic_value, Characteristic};
use crate::model::{cell_probabilities, IntervalData, ModelParams, StressPlan};
use crate::report::{Cell, Table};
use crate::wald::{wald_statistic_at, LinearConstraint};

/// Rows with a larger share of failed fits are flagged unreliable.
pub const UNRELIABLE_FAILURE_RATE: f64 = 0.05;

/// Contamination sweeps used in the simulation study.
pub const SWEEP_A0: [f64; 6] = [5.3, 5.7, 6.0, 6.5, 7.0, 8.0];
pub const SWEEP_A1: [f64; 6] = [-0.05, -0.03, -0.02, -0.01, -0.005, 0.0];
pub const SWEEP_ETA: [f64; 6] = [1.5, 1.7, 2.0, 2.2, 2.7, 3.0];

/// Two-sided Wald test of `a1 = a1_null`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TestSpec {
    pub a1_null: f64,
    pub alpha: f64,
    /// Parameters generating the power samples.
    pub theta_power: Option<ModelParams>,
}

impl Default for TestSpec {
    fn default() -> Self {
        TestSpec { a1_null: -0.05, alpha: 0.05, theta_power: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub plan: StressPlan,
    pub theta_true: ModelParams,
    #[serde(default)]
    pub theta_tilde: Option<ModelParams>,
    /// 1-based cell index.
    #[serde(default)]
    pub contaminated_cell: Option<usize>,
    pub replications: usize,
    pub seed: u64,
    pub beta_grid: Vec<f64>,
    pub n: u64,
    #[serde(default = "default_x0")]
    pub x0: f64,
    #[serde(default = "default_mission_time")]
    pub mission_time: f64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub test: TestSpec,
    #[serde(default)]
    pub fit: FitConfig,
}

fn default_x0() -> f64 {
    20.0
}

fn default_mission_time() -> f64 {
    40.0
}

fn default_confidence() -> f64 {
    0.95
}

impl ScenarioSpec {
    /// The clean simulation design with θ0 = (5.3, −0.05, 1.5) and N = 200.
    pub fn clean_design(replications: usize, seed: u64) -> Self {
        ScenarioSpec {
            plan: StressPlan::new(
                vec![30.0, 40.0],
                vec![18.0, 52.0],
                vec![6.0, 10.0, 14.0, 18.0, 20.0, 24.0, 28.0, 32.0, 36.0, 40.0, 44.0, 48.0, 52.0],
            )
            .expect("static plan is valid"),
            theta_true: ModelParams { a0: 5.3, a1: -0.05, eta: 1.5 },
            theta_tilde: None,
            contaminated_cell: None,
            replications,
            seed,
            beta_grid: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            n: 200,
            x0: default_x0(),
            mission_time: default_mission_time(),
            confidence: default_confidence(),
            test: TestSpec::default(),
            fit: FitConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.theta_true.validate()?;
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::Config("sample size must be positive".into()));
        }
        if self.beta_grid.is_empty() || self.beta_grid.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::Config("beta grid must be non-empty and non-negative".into()));
        }
        match (&self.theta_tilde, self.contaminated_cell) {
            (Some(t), Some(c)) => {
                t.validate()?;
                if c == 0 || c > self.plan.n_cells() {
                    return Err(Error::Config(format!("contaminated cell must lie in 1..={}", self.plan.n_cells())));
                }
            }
            (None, None) | (None, Some(_)) => {}
            (Some(_), None) => return Err(Error::Config("theta_tilde needs a contaminated_cell".into())),
        }
        if let Some(p) = &self.test.theta_power {
            p.validate()?;
        }
        if !(self.test.alpha > 0.0 && self.test.alpha < 1.0) {
            return Err(Error::Config("test alpha must lie in (0, 1)".into()));
        }
        if !(self.mission_time > 0.0) {
            return Err(Error::Config("mission time must be positive".into()));
        }
        self.fit.validate()
    }

    /// Default alternative: the true parameters with `a1` moved by −0.01.
    pub fn theta_power(&self) -> ModelParams {
        self.test.theta_power.unwrap_or(ModelParams { a1: self.test.a1_null - 0.01, ..self.theta_true })
    }

    fn contamination(&self) -> Option<(ModelParams, usize)> {
        match (self.theta_tilde, self.contaminated_cell) {
            (Some(t), Some(c)) => Some((t, c)),
            _ => None,
        }
    }

    /// Cell probabilities that generate samples from `theta`, contaminated
    /// as configured.
    pub fn sampling_probabilities(&self, theta: &ModelParams) -> Result<Vec<f64>> {
        let pi = cell_probabilities(theta, &self.plan)?;
        match self.contamination() {
            Some((tilde, cell)) => contaminate(&pi, &tilde, &self.plan, cell),
            None => Ok(pi),
        }
    }
}

/// Replace cell `cell` (1-based) with its probability under `params_tilde`
/// and renormalise.
pub fn contaminate(pi: &[f64], params_tilde: &ModelParams, plan: &StressPlan, cell: usize) -> Result<Vec<f64>> {
    if pi.len() != plan.n_cells() {
        return Err(Error::invalid(format!("expected {} probabilities, got {}", plan.n_cells(), pi.len())));
    }
    if cell == 0 || cell > plan.n_cells() {
        return Err(Error::invalid(format!("cell must lie in 1..={}, got {cell}", plan.n_cells())));
    }
    if cell == 1 || cell == plan.n_cells() {
        warn!("contaminating boundary cell {cell}; only interior cells are usual");
    }
    let tilde = cell_probabilities(params_tilde, plan)?;
    let replaced = tilde[cell - 1];
    if replaced == pi[cell - 1] {
        return Ok(pi.to_vec());
    }
    let mut out = pi.to_vec();
    out[cell - 1] = replaced;
    let s: f64 = out.iter().sum();
    if !(s > 0.0) {
        return Err(Error::NonFinite("contaminated probabilities sum to zero".into()));
    }
    for v in &mut out {
        *v /= s;
    }
    assert!(out.iter().all(|&v| v >= 0.0), "renormalised probabilities must be non-negative");
    Ok(out)
}

/// One multinomial draw of size `n` by inverse-cdf sampling of `n`
/// categorical variables.
pub fn simulate_counts<R: rand::Rng + ?Sized>(pi: &[f64], n: u64, rng: &mut R) -> Result<IntervalData> {
    if pi.is_empty() || pi.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(Error::invalid("probabilities must be finite and non-negative"));
    }
    let total: f64 = pi.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("probabilities sum to {total}, expected 1")));
    }
    let mut cum = Vec::with_capacity(pi.len());
    let mut s = 0.0;
    for p in pi {
        s += p;
        cum.push(s);
    }
    let last_nonzero = pi.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    let mut counts = vec![0u64; pi.len()];
    for _ in 0..n {
        let u: f64 = rng.random::<f64>() * total;
        let j = cum.partition_point(|&c| c <= u).min(last_nonzero);
        counts[j] += 1;
    }
    IntervalData::new(counts)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mean with Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Acc {
    fn push(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sum_sq += v * v;
    }

    fn push_bool(&mut self, b: bool) {
        self.push(if b { 1.0 } else { 0.0 });
    }

    fn mean(&self) -> Estimate {
        if self.n == 0 {
            return Estimate { value: f64::NAN, se: f64::NAN, n: 0 };
        }
        let n = self.n as f64;
        let m = self.sum / n;
        let var = if self.n > 1 { ((self.sum_sq - n * m * m) / (n - 1.0)).max(0.0) } else { 0.0 };
        Estimate { value: m, se: (var / n).sqrt(), n: self.n }
    }

    /// Root of the mean, with a delta-method standard error.
    fn root_mean(&self) -> Estimate {
        let m = self.mean();
        let value = m.value.sqrt();
        let se = if value > 0.0 { m.se / (2.0 * value) } else { 0.0 };
        Estimate { value, se, n: m.n }
    }
}

/// Metrics for one β.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub beta: f64,
    pub fits_ok: usize,
    pub fits_failed: usize,
    pub failure_rate: f64,
    /// More than 5% of the fits failed.
    pub unreliable: bool,
    /// Root mean squared Euclidean error of θ̂.
    pub rmse_theta: Estimate,
    pub rmse_a0: Estimate,
    pub rmse_a1: Estimate,
    pub rmse_eta: Estimate,
    pub mse_reliability: Estimate,
    pub mse_mean: Estimate,
    pub coverage_direct_reliability: Estimate,
    pub coverage_transformed_reliability: Estimate,
    pub coverage_direct_mean: Estimate,
    pub coverage_transformed_mean: Estimate,
    /// Rejection rate on samples from the (possibly contaminated) true model.
    pub level: Estimate,
    /// Rejection rate on samples from the alternative.
    pub power: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub replications: usize,
    pub seed: u64,
    pub true_reliability: f64,
    pub true_mean: f64,
    pub rows: Vec<MetricsRow>,
}

/// Per-β outcome of one replication; `None` marks a failed fit.
#[derive(Debug, Clone, Copy)]
struct RepOutcome {
    fit: Option<FitSummary>,
    reject_power: Option<bool>,
}

#[derive(Debug, Clone, Copy)]
struct FitSummary {
    err: [f64; 3],
    rel: Option<(f64, bool, bool)>,
    mean: Option<(f64, bool, bool)>,
    reject: Option<bool>,
}

fn covers(ci: (f64, f64), v: f64) -> bool {
    ci.0 <= v && v <= ci.1
}

fn fit_ok(plan: &StressPlan, data: &IntervalData, cfg: &FitConfig) -> Option<FitResult> {
    match fit(plan, data, cfg) {
        Ok(f) if f.converged => Some(f),
        _ => None,
    }
}

fn rejects(f: &FitResult, h0: &LinearConstraint, alpha: f64) -> Option<bool> {
    wald_statistic_at(&f.params, &f.covariance, f.n_total, h0, &[alpha]).ok().map(|t| t.p_value < alpha)
}

fn summarize(spec: &ScenarioSpec, f: &FitResult, truth: (f64, f64), h0: &LinearConstraint) -> FitSummary {
    let a = f.params.to_array();
    let b = spec.theta_true.to_array();
    let err = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let ci = |kind: Characteristic, true_value: f64| {
        characteristic_ci(f, spec.x0, kind, spec.confidence).ok().map(|e| {
            ((e.value - true_value).powi(2), covers(e.ci_direct, true_value), covers(e.ci_transformed, true_value))
        })
    };
    FitSummary {
        err,
        rel: ci(Characteristic::Reliability { t: spec.mission_time }, truth.0),
        mean: ci(Characteristic::Mean, truth.1),
        reject: rejects(f, h0, spec.test.alpha),
    }
}

fn replicate(
    spec: &ScenarioSpec,
    rep: usize,
    pi_null: &[f64],
    pi_power: &[f64],
    truth: (f64, f64),
    h0: &LinearConstraint,
) -> Result<Vec<RepOutcome>> {
    let mut rng = stream_rng(spec.seed, 2 * rep as u64);
    let data = simulate_counts(pi_null, spec.n, &mut rng)?;
    let mut rng = stream_rng(spec.seed, 2 * rep as u64 + 1);
    let data_power = simulate_counts(pi_power, spec.n, &mut rng)?;
    Ok(spec
        .beta_grid
        .iter()
        .map(|&beta| {
            let cfg = FitConfig { beta, ..spec.fit };
            let fit = fit_ok(&spec.plan, &data, &cfg).map(|f| summarize(spec, &f, truth, h0));
            let reject_power = fit_ok(&spec.plan, &data_power, &cfg).and_then(|f| rejects(&f, h0, spec.test.alpha));
            RepOutcome { fit, reject_power }
        })
        .collect())
}

/// Runs all replications and aggregates per β.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<MetricsTable> {
    spec.validate()?;
    let truth = (
        characteristic_value(&spec.theta_true, spec.x0, &Characteristic::Reliability { t: spec.mission_time })?,
        characteristic_value(&spec.theta_true, spec.x0, &Characteristic::Mean)?,
    );
    let pi_null = spec.sampling_probabilities(&spec.theta_true)?;
    let pi_power = spec.sampling_probabilities(&spec.theta_power())?;
    let h0 = LinearConstraint::new([0.0, 1.0, 0.0], spec.test.a1_null);

    let outcomes: Vec<Vec<RepOutcome>> = (0..spec.replications)
        .into_par_iter()
        .map(|rep| replicate(spec, rep, &pi_null, &pi_power, truth, &h0))
        .collect::<Result<_>>()?;

    let rows = spec
        .beta_grid
        .iter()
        .enumerate()
        .map(|(b, &beta)| {
            let mut acc = [Acc::default(); 12];
            let mut failed = 0;
            for rep in &outcomes {
                let o = rep[b];
                if let Some(p) = o.reject_power {
                    acc[11].push_bool(p);
                }
                let Some(s) = o.fit else {
                    failed += 1;
                    continue;
                };
                acc[0].push(s.err.iter().map(|e| e * e).sum());
                for i in 0..3 {
                    acc[1 + i].push(s.err[i] * s.err[i]);
                }
                if let Some((se, d, t)) = s.rel {
                    acc[4].push(se);
                    acc[6].push_bool(d);
                    acc[7].push_bool(t);
                }
                if let Some((se, d, t)) = s.mean {
                    acc[5].push(se);
                    acc[8].push_bool(d);
                    acc[9].push_bool(t);
                }
                if let Some(r) = s.reject {
                    acc[10].push_bool(r);
                }
            }
            let failure_rate = failed as f64 / spec.replications as f64;
            MetricsRow {
                beta,
                fits_ok: spec.replications - failed,
                fits_failed: failed,
                failure_rate,
                unreliable: failure_rate > UNRELIABLE_FAILURE_RATE,
                rmse_theta: acc[0].root_mean(),
                rmse_a0: acc[1].root_mean(),
                rmse_a1: acc[2].root_mean(),
                rmse_eta: acc[3].root_mean(),
                mse_reliability: acc[4].mean(),
                mse_mean: acc[5].mean(),
                coverage_direct_reliability: acc[6].mean(),
                coverage_transformed_reliability: acc[7].mean(),
                coverage_direct_mean: acc[8].mean(),
                coverage_transformed_mean: acc[9].mean(),
                level: acc[10].mean(),
                power: acc[11].mean(),
            }
        })
        .collect();
    Ok(MetricsTable {
        replications: spec.replications,
        seed: spec.seed,
        true_reliability: truth.0,
        true_mean: truth.1,
        rows,
    })
}

/// Parameter perturbed along a contamination sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    A0,
    A1,
    Eta,
}

impl SweepParam {
    pub fn label(&self) -> &'static str {
        match self {
            SweepParam::A0 => "a0",
            SweepParam::A1 => "a1",
            SweepParam::Eta => "eta",
        }
    }

    pub fn default_grid(&self) -> &'static [f64] {
        match self {
            SweepParam::A0 => &SWEEP_A0,
            SweepParam::A1 => &SWEEP_A1,
            SweepParam::Eta => &SWEEP_ETA,
        }
    }
}

/// One scenario per grid value, contaminating `cell` with `θ̃` equal to the
/// true parameters except for the swept component.
pub fn run_sweep(
    base: &ScenarioSpec,
    param: SweepParam,
    values: &[f64],
    cell: usize,
) -> Result<Vec<(f64, MetricsTable)>> {
    values
        .iter()
        .map(|&v| {
            let mut t = base.theta_true;
            match param {
                SweepParam::A0 => t.a0 = v,
                SweepParam::A1 => t.a1 = v,
                SweepParam::Eta => t.eta = v,
            }
            let spec = ScenarioSpec { theta_tilde: Some(t), contaminated_cell: Some(cell), ..base.clone() };
            Ok((v, run_scenario(&spec)?))
        })
        .collect()
}

/// Column order of [`metrics_csv`].
pub const CSV_COLUMNS: [&str; 32] = [
    "sweep",
    "value",
    "beta",
    "fits_ok",
    "fits_failed",
    "failure_rate",
    "unreliable",
    "rmse_theta",
    "rmse_theta_se",
    "rmse_a0",
    "rmse_a0_se",
    "rmse_a1",
    "rmse_a1_se",
    "rmse_eta",
    "rmse_eta_se",
    "mse_reliability",
    "mse_reliability_se",
    "mse_mean",
    "mse_mean_se",
    "cov_direct_reliability",
    "cov_direct_reliability_se",
    "cov_transformed_reliability",
    "cov_transformed_reliability_se",
    "cov_direct_mean",
    "cov_direct_mean_se",
    "cov_transformed_mean",
    "cov_transformed_mean_se",
    "level",
    "level_se",
    "power",
    "power_se",
    "n_power",
];

/// Metrics as a table with [`CSV_COLUMNS`]; one row per (sweep value, β).
/// `sweep` is `none` for a single scenario.
pub fn metrics_table(sweep: &str, tables: &[(f64, MetricsTable)]) -> Table {
    let mut out = Table::new(CSV_COLUMNS);
    for (value, table) in tables {
        for r in &table.rows {
            let mut row: Vec<Cell> = vec![
                sweep.into(),
                (*value).into(),
                r.beta.into(),
                r.fits_ok.into(),
                r.fits_failed.into(),
                r.failure_rate.into(),
                r.unreliable.into(),
            ];
            for e in [
                r.rmse_theta,
                r.rmse_a0,
                r.rmse_a1,
                r.rmse_eta,
                r.mse_reliability,
                r.mse_mean,
                r.coverage_direct_reliability,
                r.coverage_transformed_reliability,
                r.coverage_direct_mean,
                r.coverage_transformed_mean,
                r.level,
                r.power,
            ] {
                row.push(e.value.into());
                row.push(e.se.into());
            }
            row.push(r.power.n.into());
            out.push(row);
        }
    }
    out
}

pub fn metrics_csv(sweep: &str, tables: &[(f64, MetricsTable)]) -> String {
    metrics_table(sweep, tables).to_csv()
}
