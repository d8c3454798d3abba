//! Lifetime characteristics at a constant operating stress `x0` and their
//! delta-method confidence intervals.
//!
//! At constant stress the lifetime is Weibull with scale
//! `α0 = exp(a0 + a1·x0)` and shape `η`.

use serde::{Deserialize, Serialize};

use crate::dpd::FitResult;
use crate::error::{Error, Result};
use crate::model::{scale_at_level, ModelParams};
use crate::special::{digamma_fn, gamma_fn, z_two_sided, Mat3};

/// Which characteristic, with its extra argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Characteristic {
    /// Reliability at mission time `t`.
    Reliability {
        t: f64,
    },
    /// Time at which reliability equals `q`.
    Quantile {
        q: f64,
    },
    Mean,
}

impl Characteristic {
    pub fn label(&self) -> &'static str {
        match self {
            Characteristic::Reliability { .. } => "reliability",
            Characteristic::Quantile { .. } => "quantile",
            Characteristic::Mean => "mean",
        }
    }
}

/// Point estimate with standard error and both interval families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicEstimate {
    pub value: f64,
    /// Already scaled by `1/√N`.
    pub std_error: f64,
    pub ci_direct: (f64, f64),
    pub ci_transformed: (f64, f64),
    pub kind: Characteristic,
    pub x0: f64,
    pub confidence: f64,
}

/// `R(t) = exp(−(t/α0)^η)`.
pub fn reliability(params: &ModelParams, x0: f64, t: f64) -> Result<f64> {
    params.validate()?;
    if !(t > 0.0) {
        return Err(Error::invalid(format!("mission time must be positive, got {t}")));
    }
    let a = scale_at_level(params, x0)?;
    Ok((-(params.eta * (t / a).ln()).exp()).exp())
}

/// Time `Q` with `R(Q) = q`: `α0 (−log q)^{1/η}`.
pub fn quantile(params: &ModelParams, x0: f64, q: f64) -> Result<f64> {
    params.validate()?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid(format!("reliability level must lie in (0, 1), got {q}")));
    }
    let a = scale_at_level(params, x0)?;
    Ok(a * (-q.ln()).powf(1.0 / params.eta))
}

/// `E(T) = α0 Γ(1 + 1/η)`.
pub fn mean_lifetime(params: &ModelParams, x0: f64) -> Result<f64> {
    params.validate()?;
    let a = scale_at_level(params, x0)?;
    Ok(a * gamma_fn(1.0 + 1.0 / params.eta)?)
}

pub fn characteristic_value(params: &ModelParams, x0: f64, kind: &Characteristic) -> Result<f64> {
    match *kind {
        Characteristic::Reliability { t } => reliability(params, x0, t),
        Characteristic::Quantile { q } => quantile(params, x0, q),
        Characteristic::Mean => mean_lifetime(params, x0),
    }
}

/// Gradient with respect to `(a0, a1, η)`.
pub fn characteristic_gradient(params: &ModelParams, x0: f64, kind: &Characteristic) -> Result<[f64; 3]> {
    let eta = params.eta;
    match *kind {
        Characteristic::Reliability { t } => {
            let r = reliability(params, x0, t)?;
            let a = scale_at_level(params, x0)?;
            let log_ratio = (t / a).ln();
            let s = (eta * log_ratio).exp();
            let c = eta * s * r;
            Ok([c, c * x0, -s * r * log_ratio])
        }
        Characteristic::Quantile { q } => {
            let v = quantile(params, x0, q)?;
            Ok([v, v * x0, -v * (-q.ln()).ln() / (eta * eta)])
        }
        Characteristic::Mean => {
            let v = mean_lifetime(params, x0)?;
            let psi = digamma_fn(1.0 + 1.0 / eta)?;
            Ok([v, v * x0, -v * psi / (eta * eta)])
        }
    }
}

fn checked_variance(cov: &Mat3, grad: &[f64; 3]) -> Result<f64> {
    let v = cov.quad_form(grad);
    let scale: f64 = (0..3).map(|i| cov.0[i][i].abs() * grad[i] * grad[i]).sum::<f64>();
    if !v.is_finite() || v < -1e-10 * scale.max(1e-300) {
        return Err(Error::NonFinite(format!(
            "covariance is not positive semi-definite along the gradient (quadratic form {v:e})"
        )));
    }
    Ok(v.max(0.0))
}

/// Intervals from a per-observation covariance `cov` and sample size `n`.
pub fn characteristic_ci_from(
    params: &ModelParams,
    cov: &Mat3,
    n: u64,
    x0: f64,
    kind: Characteristic,
    confidence: f64,
) -> Result<CharacteristicEstimate> {
    let z = z_two_sided(confidence)?;
    let value = characteristic_value(params, x0, &kind)?;
    let grad = characteristic_gradient(params, x0, &kind)?;
    let std_error = (checked_variance(cov, &grad)? / n as f64).sqrt();
    let half = z * std_error;
    let ci_direct = (value - half, value + half);
    let ci_transformed = match kind {
        Characteristic::Reliability { .. } => {
            if value <= 0.0 || value >= 1.0 {
                (value, value)
            } else {
                let s = (half / (value * (1.0 - value))).exp();
                (value / (value + (1.0 - value) * s), value / (value + (1.0 - value) / s))
            }
        }
        _ => {
            let f = (half / value).exp();
            (value / f, value * f)
        }
    };
    Ok(CharacteristicEstimate { value, std_error, ci_direct, ci_transformed, kind, x0, confidence })
}

/// Direct and transformed intervals for a characteristic of a fitted model.
pub fn characteristic_ci(
    fit: &FitResult,
    x0: f64,
    kind: Characteristic,
    confidence: f64,
) -> Result<CharacteristicEstimate> {
    if !fit.converged {
        return Err(Error::Estimation("confidence intervals need a converged fit".into()));
    }
    characteristic_ci_from(&fit.params, &fit.covariance, fit.n_total, x0, kind, confidence)
}

/// `θ̂_i ± z sqrt(Σ_ii / N)` for a0, a1 and η.
pub fn param_ci(fit: &FitResult, confidence: f64) -> Result<[(f64, f64); 3]> {
    let z = z_two_sided(confidence)?;
    let se = fit.std_errors();
    let th = fit.params.to_array();
    Ok([0, 1, 2].map(|i| (th[i] - z * se[i], th[i] + z * se[i])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::EULER_GAMMA;

    fn solar_mle() -> ModelParams {
        ModelParams::new(1.804, -2.388, 1.535).unwrap()
    }

    #[test]
    fn reliability_examples() {
        let p = solar_mle();
        assert!((reliability(&p, 0.0, 1e-12).unwrap() - 1.0).abs() < 1e-12);
        assert!((reliability(&p, 0.0, 4.0).unwrap() - 0.591).abs() < 5e-4);
        let e = ModelParams::new(2.0, -1.0, 1.0).unwrap();
        let a = 1f64.exp();
        assert!((reliability(&e, 1.0, a).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert!(reliability(&p, 0.0, 0.0).is_err());
    }

    #[test]
    fn quantile_examples() {
        let p = solar_mle();
        let unit = quantile(&p, 0.3, (-1f64).exp()).unwrap();
        assert!((unit - (1.804f64 - 2.388 * 0.3).exp()).abs() < 1e-12);
        assert!((quantile(&p, 0.0, 0.95).unwrap() - 0.877).abs() < 5e-4);
        let b1 = ModelParams::new(1.836, -2.370, 1.401).unwrap();
        assert!((quantile(&b1, 0.0, 0.95).unwrap() - 0.752).abs() < 2e-3);
        assert!(quantile(&p, 0.0, 1.0).is_err());
        assert!(quantile(&p, 0.0, 0.0).is_err());
    }

    #[test]
    fn mean_examples() {
        let e = ModelParams::new(0.7, 0.2, 1.0).unwrap();
        assert!((mean_lifetime(&e, 2.0).unwrap() - 1.1f64.exp()).abs() < 1e-13);
        assert!((mean_lifetime(&solar_mle(), 0.0).unwrap() - 5.468).abs() < 2e-3);
        let b1 = ModelParams::new(1.836, -2.370, 1.401).unwrap();
        assert!((mean_lifetime(&b1, 0.0).unwrap() - 5.717).abs() < 2e-3);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let p = ModelParams::new(1.2, -0.8, 1.7).unwrap();
        let kinds = [Characteristic::Reliability { t: 2.5 }, Characteristic::Quantile { q: 0.9 }, Characteristic::Mean];
        for kind in kinds {
            let g = characteristic_gradient(&p, 0.4, &kind).unwrap();
            let th = p.to_array();
            for c in 0..3 {
                let h = 1e-6 * (1.0 + th[c].abs());
                let mut up = th;
                let mut dn = th;
                up[c] += h;
                dn[c] -= h;
                let f = |t| characteristic_value(&ModelParams::from_array(t), 0.4, &kind).unwrap();
                let fd = (f(up) - f(dn)) / (2.0 * h);
                assert!((fd - g[c]).abs() <= 1e-5 * fd.abs().max(1e-8), "{kind:?} c={c} fd={fd} g={}", g[c]);
            }
        }
        let m = characteristic_gradient(&p, 0.4, &Characteristic::Mean).unwrap();
        let e = mean_lifetime(&p, 0.4).unwrap();
        assert!((m[0] / e - 1.0).abs() < 1e-15);
        let one = ModelParams::new(1.2, -0.8, 1.0).unwrap();
        let m = characteristic_gradient(&one, 0.4, &Characteristic::Mean).unwrap();
        let e = mean_lifetime(&one, 0.4).unwrap();
        assert!((m[2] + e * (1.0 - EULER_GAMMA)).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_collapses_intervals() {
        let p = solar_mle();
        for kind in [Characteristic::Reliability { t: 4.0 }, Characteristic::Quantile { q: 0.95 }, Characteristic::Mean]
        {
            let est = characteristic_ci_from(&p, &Mat3::zeros(), 31, 0.0, kind, 0.95).unwrap();
            assert_eq!(est.ci_direct, (est.value, est.value));
            assert!((est.ci_transformed.0 - est.value).abs() < 1e-15);
            assert!((est.ci_transformed.1 - est.value).abs() < 1e-15);
        }
    }

    #[test]
    fn transformed_reliability_stays_in_unit_interval() {
        let p = solar_mle();
        let cov = Mat3::from_diag([50.0, 80.0, 30.0]);
        for conf in [0.5, 0.9, 0.95, 0.999] {
            let est = characteristic_ci_from(&p, &cov, 5, 0.0, Characteristic::Reliability { t: 4.0 }, conf).unwrap();
            assert!(est.ci_transformed.0 > 0.0 && est.ci_transformed.1 < 1.0);
            assert!(est.ci_transformed.0 <= est.value && est.value <= est.ci_transformed.1);
        }
    }

    #[test]
    fn non_psd_covariance_is_rejected() {
        let p = solar_mle();
        let cov = Mat3::from_diag([-1.0, -1.0, -1.0]);
        assert!(characteristic_ci_from(&p, &cov, 10, 0.0, Characteristic::Mean, 0.95).is_err());
    }
}
