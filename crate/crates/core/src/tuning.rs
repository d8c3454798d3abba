//! Data-driven choice of β by the iterated Warwick–Jones rule: minimise
//! squared distance to a pilot plus the trace of the estimated variance,
//! then move the pilot to the winner until it settles.

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dpd::{fit, FitConfig, FitResult};
use crate::error::{Error, Result};
use crate::model::{IntervalData, ModelParams, StressPlan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TuningConfig {
    pub beta_grid: Vec<f64>,
    /// Stop once the pilot moves less than this, measured in `(a0, a1, log η)`.
    pub epsilon: f64,
    pub max_rounds: usize,
    /// Defaults to the componentwise average of the grid fits.
    pub pilot: Option<ModelParams>,
    /// Template for every grid fit; its `beta` is overwritten.
    pub fit: FitConfig,
}

impl Default for TuningConfig {
    fn default() -> Self {
        TuningConfig {
            beta_grid: (0..=10).map(|i| i as f64 / 10.0).collect(),
            epsilon: 1e-4,
            max_rounds: 20,
            pilot: None,
            fit: FitConfig::default(),
        }
    }
}

impl TuningConfig {
    pub fn validate(&self) -> Result<()> {
        if self.beta_grid.is_empty() {
            return Err(Error::invalid("beta grid is empty"));
        }
        if self.beta_grid.iter().any(|b| !(0.0..=1.0).contains(b)) {
            return Err(Error::invalid("beta grid must lie in [0, 1]"));
        }
        if self.beta_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("beta grid must be strictly increasing"));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::invalid(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_rounds == 0 {
            return Err(Error::invalid("max_rounds must be at least 1"));
        }
        if let Some(p) = &self.pilot {
            p.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningResult {
    pub beta_opt: f64,
    pub theta_opt: ModelParams,
    pub rounds: usize,
    /// Pilot moved less than epsilon before `max_rounds` ran out.
    pub converged: bool,
    /// `(β, MSE)` against the pilot of the final round, converged fits only.
    pub mse_curve: Vec<(f64, f64)>,
    pub pilot_initial: ModelParams,
    pub pilot_final: ModelParams,
    /// Grid values whose fit failed.
    pub excluded: Vec<f64>,
    /// Fits for the retained grid values.
    pub fits: Vec<FitResult>,
}

/// `‖θ̂ − θ_P‖² + Tr(Σ)/N`.
pub fn estimated_mse(fit: &FitResult, pilot: &ModelParams, n: u64) -> Result<f64> {
    if !fit.converged {
        return Err(Error::Estimation("MSE criterion needs a converged fit".into()));
    }
    if n == 0 {
        return Err(Error::invalid("sample size must be positive"));
    }
    let a = fit.params.to_array();
    let b = pilot.to_array();
    let bias: f64 = (0..3).map(|i| (a[i] - b[i]).powi(2)).sum();
    Ok(bias + fit.covariance.trace() / n as f64)
}

fn pilot_distance(a: &ModelParams, b: &ModelParams) -> f64 {
    let u = a.to_unconstrained();
    let v = b.to_unconstrained();
    (0..3).map(|i| (u[i] - v[i]).powi(2)).sum::<f64>().sqrt()
}

fn average(fits: &[FitResult]) -> ModelParams {
    let n = fits.len() as f64;
    let mut s = [0.0; 3];
    for f in fits {
        let a = f.params.to_array();
        for i in 0..3 {
            s[i] += a[i] / n;
        }
    }
    ModelParams::from_array(s)
}

/// Index of the smallest MSE; ties go to the earlier (smaller) β.
fn argmin(curve: &[(f64, f64)]) -> usize {
    let mut best = 0;
    for (i, &(_, v)) in curve.iter().enumerate() {
        if v < curve[best].1 {
            best = i;
        }
    }
    best
}

/// Iterated selection of β over the configured grid.
pub fn select_beta(plan: &StressPlan, data: &IntervalData, config: &TuningConfig) -> Result<TuningResult> {
    config.validate()?;
    data.check_plan(plan)?;
    let n = data.total();
    let attempts: Vec<(f64, Result<FitResult>)> = config
        .beta_grid
        .par_iter()
        .map(|&beta| {
            let cfg = FitConfig { beta, ..config.fit };
            (beta, fit(plan, data, &cfg))
        })
        .collect();
    let mut fits = Vec::new();
    let mut excluded = Vec::new();
    for (beta, r) in attempts {
        match r {
            Ok(f) if f.converged => fits.push(f),
            Ok(_) => {
                warn!("fit at beta={beta} did not converge, excluded from selection");
                excluded.push(beta);
            }
            Err(e) => {
                warn!("fit at beta={beta} failed ({e}), excluded from selection");
                excluded.push(beta);
            }
        }
    }
    if fits.is_empty() {
        return Err(Error::Estimation("no fit on the beta grid converged".into()));
    }

    let pilot_initial = config.pilot.unwrap_or_else(|| average(&fits));
    let mut pilot = pilot_initial;
    let mut rounds = 0;
    let mut converged = false;
    let mut curve = Vec::new();
    let mut best = 0;
    while rounds < config.max_rounds {
        rounds += 1;
        curve = fits.iter().map(|f| Ok((f.beta, estimated_mse(f, &pilot, n)?))).collect::<Result<Vec<_>>>()?;
        best = argmin(&curve);
        let winner = fits[best].params;
        let moved = pilot_distance(&winner, &pilot);
        if moved < config.epsilon {
            converged = true;
            break;
        }
        pilot = winner;
    }
    if !converged {
        warn!("beta selection stopped after {rounds} rounds without the pilot settling");
    }
    Ok(TuningResult {
        beta_opt: fits[best].beta,
        theta_opt: fits[best].params,
        rounds,
        converged,
        mse_curve: curve,
        pilot_initial,
        pilot_final: pilot,
        excluded,
        fits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpd::fit_proportions;
    use crate::model::cell_probabilities;
    use crate::special::Mat3;

    fn design_plan() -> StressPlan {
        StressPlan::new(
            vec![30.0, 40.0],
            vec![18.0, 52.0],
            vec![6.0, 10.0, 14.0, 18.0, 20.0, 24.0, 28.0, 32.0, 36.0, 40.0, 44.0, 48.0, 52.0],
        )
        .unwrap()
    }

    #[test]
    fn mse_examples() {
        let plan = design_plan();
        let th = ModelParams::new(5.3, -0.05, 1.5).unwrap();
        let pi = cell_probabilities(&th, &plan).unwrap();
        let mut f = fit_proportions(&plan, &pi, 200, &FitConfig::default()).unwrap();
        f.covariance = Mat3::zeros();
        assert!(estimated_mse(&f, &f.params, 200).unwrap() == 0.0);
        let mut shifted = f.params.to_array();
        shifted[0] -= 1.0;
        let v = estimated_mse(&f, &ModelParams::from_array(shifted), 200).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        f.converged = false;
        assert!(estimated_mse(&f, &th, 200).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TuningConfig::default().validate().is_ok());
        let bad = TuningConfig { beta_grid: vec![0.5, 0.2], ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = TuningConfig { beta_grid: vec![0.0, 1.5], ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = TuningConfig { epsilon: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn ties_go_to_smaller_beta() {
        assert_eq!(argmin(&[(0.0, 1.0), (0.1, 0.5), (0.2, 0.5)]), 1);
    }
}
