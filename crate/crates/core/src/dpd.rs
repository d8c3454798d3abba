//! Minimum density power divergence estimation.
//!
//! The divergence between the empirical cell proportions `p̂` and the model
//! probabilities `π(θ)` is minimized over `θ`; `β = 0` gives the
//! Kullback–Leibler divergence and hence the multinomial MLE. Asymptotic
//! covariance is the sandwich `J⁻¹ K J⁻¹` on a per-observation scale, so
//! `Var(θ̂) ≈ Σ / N`.

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, IntervalData, ModelEval, ModelParams, StressPlan};
use crate::special::{norm3, Mat3};

/// Lower bound applied to model probabilities before negative powers.
pub const PROB_FLOOR: f64 = 1e-12;

/// Offsets added to the pilot in (a0, a1, log η) for the extra starts.
const START_OFFSETS: [[f64; 3]; 8] = [
    [0.0, 0.0, 0.0],
    [0.5, 0.0, 0.3],
    [-0.5, 0.0, -0.3],
    [0.0, 0.5, 0.5],
    [0.0, -0.5, -0.5],
    [1.0, -1.0, 0.0],
    [-1.0, 1.0, 0.7],
    [0.3, 0.3, -0.7],
];

/// Two-sided 95% normal quantile used by the wide-interval diagnostic.
const WIDE_CI_Z: f64 = 1.959_963_984_540_054;

/// Largest step allowed in a single quasi-Newton move, in (a0, a1, log η).
const MAX_STEP: f64 = 2.0;

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("tuning parameter must be finite and ≥ 0, got {beta}")));
    }
    Ok(())
}

/// Density power divergence `d_β(p̂, π)`; the KL divergence at `β = 0`.
pub fn dpd_loss(p_hat: &[f64], pi: &[f64], beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if p_hat.len() != pi.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} proportions vs {} probabilities",
            p_hat.len(),
            pi.len()
        )));
    }
    if p_hat.iter().any(|&p| !(p >= 0.0)) {
        return Err(Error::invalid("proportions must be non-negative"));
    }
    let mut s = 0.0;
    if beta == 0.0 {
        for (&p, &q) in p_hat.iter().zip(pi) {
            if p > 0.0 {
                s += p * (p / q.max(PROB_FLOOR)).ln();
            }
        }
    } else {
        let c = 1.0 + 1.0 / beta;
        for (&p, &q) in p_hat.iter().zip(pi) {
            let q = q.max(PROB_FLOOR);
            let qb = q.powf(beta);
            s += q * qb - c * p * qb + p.powf(1.0 + beta) / beta;
        }
    }
    Ok(s)
}

fn residual_from(eval: &ModelEval, p_hat: &[f64], beta: f64) -> [f64; 3] {
    let mut r = [0.0; 3];
    for ((w, &pi), &p) in eval.w.iter().zip(&eval.pi).zip(p_hat) {
        let f = pi.max(PROB_FLOOR).powf(beta - 1.0) * (p - pi);
        for c in 0..3 {
            r[c] += w[c] * f;
        }
    }
    r
}

/// Estimating-equation residual `Wᵀ D_π^{β−1} (p̂ − π)`. The gradient of
/// the divergence is `−(β + 1)` times this vector.
pub fn estimating_residual(
    params: &ModelParams,
    plan: &StressPlan,
    data: &IntervalData,
    beta: f64,
) -> Result<[f64; 3]> {
    check_beta(beta)?;
    data.check_plan(plan)?;
    let eval = model::evaluate(params, plan)?;
    Ok(residual_from(&eval, &data.proportions(), beta))
}

/// Same as [`estimating_residual`] for a raw proportion vector.
pub fn estimating_residual_proportions(
    params: &ModelParams,
    plan: &StressPlan,
    p_hat: &[f64],
    beta: f64,
) -> Result<[f64; 3]> {
    check_beta(beta)?;
    check_proportions(plan, p_hat)?;
    let eval = model::evaluate(params, plan)?;
    Ok(residual_from(&eval, p_hat, beta))
}

/// `J_β = Wᵀ D^{β−1} W` and `K_β = Wᵀ (D^{2β−1} − π^β π^βᵀ) W`.
pub fn sandwich_matrices(params: &ModelParams, plan: &StressPlan, beta: f64) -> Result<(Mat3, Mat3)> {
    check_beta(beta)?;
    let eval = model::evaluate(params, plan)?;
    Ok(sandwich_from(&eval, beta))
}

fn sandwich_from(eval: &ModelEval, beta: f64) -> (Mat3, Mat3) {
    let mut j = Mat3::zeros();
    let mut k = Mat3::zeros();
    let mut v = [0.0; 3];
    for (w, &pi) in eval.w.iter().zip(&eval.pi) {
        let q = pi.max(PROB_FLOOR);
        let a = q.powf(beta - 1.0);
        let b = q.powf(2.0 * beta - 1.0);
        let pb = q.powf(beta);
        for r in 0..3 {
            v[r] += pb * w[r];
            for c in 0..3 {
                j.0[r][c] += a * w[r] * w[c];
                k.0[r][c] += b * w[r] * w[c];
            }
        }
    }
    for r in 0..3 {
        for c in 0..3 {
            k.0[r][c] -= v[r] * v[c];
        }
    }
    (j.symmetrized(), k.symmetrized())
}

/// Sandwich covariance with its building blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Covariance {
    /// `J⁻¹ K J⁻¹`, per observation.
    pub matrix: Mat3,
    pub j: Mat3,
    pub k: Mat3,
    /// Condition number of `J`.
    pub condition: f64,
    /// `J` was inverted with the pseudo-inverse.
    pub ill_conditioned: bool,
}

/// Asymptotic covariance `Σ_β = J⁻¹ K J⁻¹` at `params`.
pub fn asymptotic_covariance(params: &ModelParams, plan: &StressPlan, beta: f64) -> Result<Covariance> {
    check_beta(beta)?;
    let eval = model::evaluate(params, plan)?;
    covariance_from(&eval, beta)
}

fn covariance_from(eval: &ModelEval, beta: f64) -> Result<Covariance> {
    let (j, k) = sandwich_from(eval, beta);
    let inv = j.symmetric_inverse()?;
    let matrix = inv.matrix.mul(&k).mul(&inv.matrix).symmetrized();
    if !matrix.is_finite() {
        return Err(Error::NonFinite("sandwich covariance is not finite".into()));
    }
    Ok(Covariance { matrix, j, k, condition: inv.condition, ill_conditioned: inv.ill_conditioned })
}

/// Optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub beta: f64,
    pub max_iters: usize,
    /// Convergence threshold on the norm of the estimating residual.
    pub grad_tol: f64,
    pub param_tol: f64,
    /// Number of starting points, the pilot estimate included.
    pub multistart: usize,
    /// Replaces the pilot as the first start when given.
    pub start: Option<ModelParams>,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { beta: 0.0, max_iters: 500, grad_tol: 1e-8, param_tol: 1e-10, multistart: 5, start: None }
    }
}

impl FitConfig {
    pub fn with_beta(beta: f64) -> Self {
        Self { beta, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        check_beta(self.beta)?;
        if !(self.grad_tol > 0.0 && self.param_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.max_iters == 0 || self.multistart == 0 {
            return Err(Error::Config("max_iters and multistart must be at least 1".into()));
        }
        Ok(())
    }
}

/// Outcome of a fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: ModelParams,
    pub beta: f64,
    /// Per-observation sandwich covariance; divide by `n_total` for `Var(θ̂)`.
    pub covariance: Mat3,
    pub j: Mat3,
    pub k: Mat3,
    /// Final divergence value.
    pub objective: f64,
    pub converged: bool,
    /// Norm of the estimating residual at `params`.
    pub grad_norm: f64,
    pub iterations: usize,
    pub n_total: u64,
    pub condition: f64,
    /// `J` was near singular and the pseudo-inverse was used.
    pub ill_conditioned: bool,
    /// Some 95% parameter interval is wider than the estimate itself, a
    /// symptom of weak information.
    pub wide_ci: bool,
}

impl FitResult {
    /// `Var(θ̂) ≈ Σ / N`.
    pub fn variance(&self) -> Mat3 {
        self.covariance.scale(1.0 / self.n_total as f64)
    }

    pub fn std_errors(&self) -> [f64; 3] {
        let v = self.variance();
        [0, 1, 2].map(|i| v.0[i][i].max(0.0).sqrt())
    }
}

fn check_proportions(plan: &StressPlan, p_hat: &[f64]) -> Result<()> {
    if p_hat.len() != plan.n_cells() {
        return Err(Error::Data(format!("expected {} cells (L + 1), got {}", plan.n_cells(), p_hat.len())));
    }
    if p_hat.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(Error::Data("proportions must be finite and non-negative".into()));
    }
    let s: f64 = p_hat.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::Data(format!("proportions sum to {s}, expected 1")));
    }
    Ok(())
}

/// Fits the MDPDE to interval data.
pub fn fit(plan: &StressPlan, data: &IntervalData, config: &FitConfig) -> Result<FitResult> {
    data.check_plan(plan)?;
    fit_proportions(plan, &data.proportions(), data.total(), config)
}

/// Fits the MDPDE to a proportion vector standing for `n_total` devices.
pub fn fit_proportions(plan: &StressPlan, p_hat: &[f64], n_total: u64, config: &FitConfig) -> Result<FitResult> {
    config.validate()?;
    check_proportions(plan, p_hat)?;
    if n_total == 0 {
        return Err(Error::Data("sample size must be positive".into()));
    }
    if p_hat.iter().filter(|&&p| p > 0.0).count() < 2 {
        return Err(Error::Estimation("all observations fall in a single cell".into()));
    }
    let problem = Problem { plan, p_hat, beta: config.beta };

    let mut starts = Vec::with_capacity(config.multistart);
    let pilot = match config.start {
        Some(s) => {
            s.validate()?;
            s
        }
        None => pilot_estimate(plan, p_hat),
    };
    let base = pilot.to_unconstrained();
    // offsets act on log-scale at the mean stress and on the slope per unit
    // of stress range, so they mean the same thing for raw and normalised x
    let x = plan.stress_levels();
    let xbar = x.iter().sum::<f64>() / x.len() as f64;
    let range = x[x.len() - 1] - x[0];
    let range = if range > 0.0 { range } else { 1.0 };
    for off in START_OFFSETS.iter().cycle().take(config.multistart).enumerate() {
        let (round, d) = (off.0 / START_OFFSETS.len(), off.1);
        let scale = 1.0 + round as f64;
        let slope = scale * d[1] / range;
        starts.push([base[0] + scale * d[0] - slope * xbar, base[1] + slope, base[2] + scale * d[2]]);
    }

    let mut best: Option<Candidate> = None;
    for u0 in starts {
        let Some(c) = problem.minimize(u0, config) else { continue };
        debug!("start {u0:?} -> {:?} f={} |r|={}", c.u, c.f, c.resid_norm);
        let better = match &best {
            None => true,
            Some(b) => {
                let c_ok = c.resid_norm <= config.grad_tol;
                let b_ok = b.resid_norm <= config.grad_tol;
                (c_ok && !b_ok) || (c_ok == b_ok && c.f < b.f - 1e-14 * (1.0 + b.f.abs()))
            }
        };
        if better {
            best = Some(c);
        }
    }
    let best = best.ok_or_else(|| Error::Estimation("no starting point gave a finite objective".into()))?;
    let params = ModelParams::from_unconstrained(best.u);
    let eval = model::evaluate(&params, plan)?;
    let cov = covariance_from(&eval, config.beta)?;
    let converged = best.resid_norm <= config.grad_tol;
    if !converged {
        warn!("fit at beta={} did not converge (residual norm {:e})", config.beta, best.resid_norm);
    }
    if params.a1 >= 0.0 {
        warn!("fitted slope a1 = {} is non-negative", params.a1);
    }
    let se = [0, 1, 2].map(|i| (cov.matrix.0[i][i].max(0.0) / n_total as f64).sqrt());
    let th = params.to_array();
    let wide_ci = cov.ill_conditioned || (0..3).any(|i| WIDE_CI_Z * se[i] > th[i].abs());
    if cov.ill_conditioned {
        warn!("information matrix is near singular (condition {:e})", cov.condition);
    }
    Ok(FitResult {
        params,
        beta: config.beta,
        covariance: cov.matrix,
        j: cov.j,
        k: cov.k,
        objective: best.f,
        converged,
        grad_norm: best.resid_norm,
        iterations: best.iterations,
        n_total,
        condition: cov.condition,
        ill_conditioned: cov.ill_conditioned,
        wide_ci,
    })
}

/// Cheap starting value: per-segment exponential rates from the empirical
/// cumulative hazard, then a log-linear regression of the scales on stress.
pub fn pilot_estimate(plan: &StressPlan, p_hat: &[f64]) -> ModelParams {
    let times = plan.inspection_times();
    let tau = plan.change_times();
    let x = plan.stress_levels();
    let k = x.len();
    let mut cum = 0.0;
    let hazard_at = |t: f64, cum_list: &[(f64, f64)]| -> f64 {
        cum_list.iter().find(|(s, _)| (*s - t).abs() <= 1e-12 * t.abs().max(1.0)).map_or(0.0, |(_, h)| *h)
    };
    let mut hz = Vec::with_capacity(times.len());
    for (t, p) in times.iter().zip(p_hat) {
        cum += p;
        let surv = (1.0 - cum).max(1e-3);
        hz.push((*t, -surv.ln()));
    }
    let mut slopes = Vec::with_capacity(k);
    let mut prev_t = 0.0;
    let mut prev_h = 0.0;
    for &t in tau {
        let h = hazard_at(t, &hz);
        slopes.push(((h - prev_h) / (t - prev_t)).max(0.0));
        prev_t = t;
        prev_h = h;
    }
    let min_pos = slopes.iter().copied().filter(|&s| s > 0.0).fold(f64::INFINITY, f64::min);
    let floor = if min_pos.is_finite() { 0.1 * min_pos } else { 0.1 / plan.termination_time() };
    let log_alpha: Vec<f64> = slopes.iter().map(|&s| -(s.max(floor)).ln()).collect();
    let (a0, a1) = if k == 1 {
        (log_alpha[0] - 0.0, 0.0)
    } else {
        let mx = x.iter().sum::<f64>() / k as f64;
        let my = log_alpha.iter().sum::<f64>() / k as f64;
        let sxy: f64 = x.iter().zip(&log_alpha).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        let a1 = sxy / sxx;
        (my - a1 * mx, a1)
    };
    ModelParams { a0, a1, eta: 1.0 }
}

struct Problem<'a> {
    plan: &'a StressPlan,
    p_hat: &'a [f64],
    beta: f64,
}

struct Point {
    u: [f64; 3],
    f: f64,
    /// gradient with respect to u
    g: [f64; 3],
    resid: [f64; 3],
    eval: ModelEval,
}

struct Candidate {
    u: [f64; 3],
    f: f64,
    resid_norm: f64,
    iterations: usize,
}

impl Problem<'_> {
    fn point(&self, u: [f64; 3]) -> Option<Point> {
        if u.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let params = ModelParams::from_unconstrained(u);
        let eval = model::evaluate(&params, self.plan).ok()?;
        let f = dpd_loss(self.p_hat, &eval.pi, self.beta).ok()?;
        let resid = residual_from(&eval, self.p_hat, self.beta);
        let s = -(self.beta + 1.0);
        let g = [s * resid[0], s * resid[1], s * resid[2] * params.eta];
        if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some(Point { u, f, g, resid, eval })
    }

    /// Expected Hessian `(β+1) J` in optimizer coordinates.
    fn scoring_inverse(&self, p: &Point) -> Mat3 {
        let (j, _) = sandwich_from(&p.eval, self.beta);
        let d = Mat3::from_diag([1.0, 1.0, p.u[2].exp()]);
        let h = d.mul(&j).mul(&d).scale(self.beta + 1.0);
        match h.symmetric_inverse() {
            Ok(inv) if inv.matrix.is_finite() && inv.matrix.trace() > 0.0 => inv.matrix,
            _ => Mat3::identity(),
        }
    }

    fn minimize(&self, u0: [f64; 3], cfg: &FitConfig) -> Option<Candidate> {
        let mut p = self.point(u0)?;
        let mut hinv = self.scoring_inverse(&p);
        let mut iters = 0;
        let mut stalled = 0;
        while iters < cfg.max_iters {
            if norm3(&p.resid) <= cfg.grad_tol {
                break;
            }
            iters += 1;
            let mut d = neg(hinv.mul_vec(&p.g));
            if dot(&d, &p.g) >= 0.0 {
                hinv = self.scoring_inverse(&p);
                d = neg(hinv.mul_vec(&p.g));
                if dot(&d, &p.g) >= 0.0 {
                    hinv = Mat3::identity();
                    d = neg(p.g);
                }
            }
            let dmax = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if dmax > MAX_STEP {
                d = d.map(|v| v * MAX_STEP / dmax);
            }
            let slope = dot(&d, &p.g);
            let mut s = 1.0;
            let mut next = None;
            for _ in 0..60 {
                let u = [p.u[0] + s * d[0], p.u[1] + s * d[1], p.u[2] + s * d[2]];
                if let Some(q) = self.point(u) {
                    if q.f <= p.f + 1e-4 * s * slope {
                        next = Some(q);
                        break;
                    }
                }
                s *= 0.5;
            }
            let Some(q) = next else {
                // no decrease representable in floating point: hand over to the polish
                break;
            };
            let sk = [q.u[0] - p.u[0], q.u[1] - p.u[1], q.u[2] - p.u[2]];
            let yk = [q.g[0] - p.g[0], q.g[1] - p.g[1], q.g[2] - p.g[2]];
            let sy = dot(&sk, &yk);
            if sy > 1e-12 * norm3(&sk) * norm3(&yk) {
                hinv = bfgs_update(&hinv, &sk, &yk, sy);
            }
            let small = norm3(&sk) <= cfg.param_tol * (1.0 + norm3(&q.u));
            p = q;
            if small {
                stalled += 1;
                if stalled >= 3 {
                    break;
                }
            } else {
                stalled = 0;
            }
        }
        let (p, extra) = self.polish(p, cfg);
        Some(Candidate { u: p.u, f: p.f, resid_norm: norm3(&p.resid), iterations: iters + extra })
    }

    /// Newton iterations on the estimating equations with a finite-difference
    /// Jacobian; the objective may not rise beyond roundoff.
    fn polish(&self, mut p: Point, cfg: &FitConfig) -> (Point, usize) {
        let mut iters = 0;
        for _ in 0..50 {
            let rn = norm3(&p.resid);
            if rn <= cfg.grad_tol {
                break;
            }
            iters += 1;
            let Some(jac) = self.residual_jacobian(&p.u) else { break };
            let neg_r = neg(p.resid);
            let step = match jac.solve3(&neg_r) {
                Ok(s) if s.iter().all(|v| v.is_finite()) => s,
                _ => match jac.pseudo_inverse3() {
                    Ok(pi) => pi.mul_vec(&neg_r),
                    Err(_) => break,
                },
            };
            let mut s = 1.0;
            let mut accepted = None;
            for _ in 0..30 {
                let u = [p.u[0] + s * step[0], p.u[1] + s * step[1], p.u[2] + s * step[2]];
                if let Some(q) = self.point(u) {
                    if norm3(&q.resid) < rn && q.f <= p.f + 1e-12 * (1.0 + p.f.abs()) {
                        accepted = Some(q);
                        break;
                    }
                }
                s *= 0.5;
            }
            match accepted {
                Some(q) => p = q,
                None => break,
            }
        }
        (p, iters)
    }

    fn residual_jacobian(&self, u: &[f64; 3]) -> Option<Mat3> {
        let mut jac = Mat3::zeros();
        for c in 0..3 {
            let h = 1e-6 * (1.0 + u[c].abs());
            let mut up = *u;
            let mut dn = *u;
            up[c] += h;
            dn[c] -= h;
            let ru = self.point(up)?.resid;
            let rd = self.point(dn)?.resid;
            for r in 0..3 {
                jac.0[r][c] = (ru[r] - rd[r]) / (2.0 * h);
            }
        }
        jac.is_finite().then_some(jac)
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn neg(a: [f64; 3]) -> [f64; 3] {
    [-a[0], -a[1], -a[2]]
}

fn bfgs_update(h: &Mat3, s: &[f64; 3], y: &[f64; 3], sy: f64) -> Mat3 {
    let rho = 1.0 / sy;
    let mut a = Mat3::identity();
    for i in 0..3 {
        for j in 0..3 {
            a.0[i][j] -= rho * s[i] * y[j];
        }
    }
    let mut out = a.mul(h).mul(&a.transpose());
    for i in 0..3 {
        for j in 0..3 {
            out.0[i][j] += rho * s[i] * s[j];
        }
    }
    out.symmetrized()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn design_plan() -> StressPlan {
        StressPlan::new(
            vec![30.0, 40.0],
            vec![18.0, 52.0],
            vec![6.0, 10.0, 14.0, 18.0, 20.0, 24.0, 28.0, 32.0, 36.0, 40.0, 44.0, 48.0, 52.0],
        )
        .unwrap()
    }

    fn theta0() -> ModelParams {
        ModelParams::new(5.3, -0.05, 1.5).unwrap()
    }

    #[test]
    fn loss_examples() {
        let p = [0.2, 0.3, 0.5];
        for b in [0.0, 0.3, 1.0] {
            assert!(dpd_loss(&p, &p, b).unwrap().abs() < 1e-15);
        }
        let kl = dpd_loss(&[1.0, 0.0], &[0.5, 0.5], 0.0).unwrap();
        assert!((kl - 2f64.ln()).abs() < 1e-15);
        let d = dpd_loss(&[0.6, 0.4], &[0.5, 0.5], 1.0).unwrap();
        assert!((d - 0.02).abs() < 1e-15);
        assert!(dpd_loss(&[1.0], &[0.5, 0.5], 1.0).is_err());
        assert!(dpd_loss(&[0.5, 0.5], &[0.5, 0.5], -0.1).is_err());
    }

    #[test]
    fn residual_matches_loss_gradient() {
        let plan = design_plan();
        let p_hat = model::cell_probabilities(&ModelParams::new(5.5, -0.04, 1.8).unwrap(), &plan).unwrap();
        let th = theta0().to_array();
        for beta in [0.0, 0.4, 1.0] {
            let r = estimating_residual_proportions(&theta0(), &plan, &p_hat, beta).unwrap();
            for c in 0..3 {
                let h = 1e-6 * (1.0 + th[c].abs());
                let mut up = th;
                let mut dn = th;
                up[c] += h;
                dn[c] -= h;
                let f = |t: [f64; 3]| {
                    let pi = model::cell_probabilities(&ModelParams::from_array(t), &plan).unwrap();
                    dpd_loss(&p_hat, &pi, beta).unwrap()
                };
                let fd = (f(up) - f(dn)) / (2.0 * h);
                let an = -(beta + 1.0) * r[c];
                assert!((fd - an).abs() <= 1e-5 * an.abs() + 1e-9, "beta={beta} c={c} fd={fd} an={an}");
            }
        }
    }

    #[test]
    fn exact_data_recovers_truth() {
        let plan = design_plan();
        let pi = model::cell_probabilities(&theta0(), &plan).unwrap();
        for beta in [0.0, 0.2, 0.5, 1.0] {
            let r = fit_proportions(&plan, &pi, 200, &FitConfig::with_beta(beta)).unwrap();
            assert!(r.converged, "beta={beta} {r:?}");
            let e = r.params.to_array();
            let t = theta0().to_array();
            for c in 0..3 {
                assert!((e[c] - t[c]).abs() < 1e-6, "beta={beta} {e:?}");
            }
            assert!(r.objective.abs() < 1e-12);
        }
    }

    #[test]
    fn mle_sandwich_collapses_to_inverse_fisher() {
        let plan = design_plan();
        let (j, k) = sandwich_matrices(&theta0(), &plan, 0.0).unwrap();
        let cov = asymptotic_covariance(&theta0(), &plan, 0.0).unwrap();
        let fisher_inv = j.symmetric_inverse().unwrap().matrix;
        for r in 0..3 {
            for c in 0..3 {
                assert!((cov.matrix.0[r][c] - fisher_inv.0[r][c]).abs() <= 1e-8 * (1.0 + fisher_inv.0[r][c].abs()));
                assert!((j.0[r][c] - k.0[r][c]).abs() <= 1e-10 * (1.0 + j.0[r][c].abs()));
            }
        }
        assert!(j.max_asymmetry() < 1e-12 && k.max_asymmetry() < 1e-12);
    }

    #[test]
    fn degenerate_data_is_rejected() {
        let plan = design_plan();
        let mut p = vec![0.0; 14];
        p[13] = 1.0;
        assert!(matches!(fit_proportions(&plan, &p, 10, &FitConfig::default()), Err(Error::Estimation(_))));
    }

    #[test]
    fn pilot_is_exact_for_exponential_single_level() {
        let plan = StressPlan::new(vec![0.0], vec![4.0], vec![1.0, 2.0, 4.0]).unwrap();
        let truth = ModelParams::new(1.0, 0.0, 1.0).unwrap();
        let pi = model::cell_probabilities(&truth, &plan).unwrap();
        let pilot = pilot_estimate(&plan, &pi);
        assert!((pilot.a0 - 1.0).abs() < 1e-12);
    }
}
