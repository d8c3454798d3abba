//! Influence functions of the MDPDE and of Wald-type statistics, and the
//! leverage probes that track the IF's second factor as a plan is stretched.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dpd::{asymptotic_covariance, sandwich_matrices};
use crate::error::{Error, Result};
use crate::model::{evaluate, ModelParams, StressPlan};
use crate::special::{dot3, norm3, Mat3};
use crate::wald::{middle, Constraint};

/// First-order IF at one contaminated cell plus the second-order IF of a
/// Wald statistic built on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IFReport {
    pub if_vector: [f64; 3],
    pub if_wald_second_order: f64,
    /// 1-based cell index, `L+1` is the survivor cell.
    pub cell: usize,
    /// `J` was inverted with the pseudo-inverse.
    pub pseudo_inverse: bool,
}

/// IF vector with the inversion flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IfVector {
    pub vector: [f64; 3],
    pub pseudo_inverse: bool,
}

fn check_cell(plan: &StressPlan, cell: usize) -> Result<()> {
    if cell == 0 || cell > plan.n_cells() {
        return Err(Error::invalid(format!("cell index must lie in 1..={}, got {cell}", plan.n_cells())));
    }
    Ok(())
}

/// `Wᵀ D^{β−1} (Δ − π)` for a point mass at `cell`.
fn second_factor(params: &ModelParams, plan: &StressPlan, beta: f64, cell: usize) -> Result<[f64; 3]> {
    let eval = evaluate(params, plan)?;
    let mut s = [0.0; 3];
    for (j, (w, &pi)) in eval.w.iter().zip(&eval.pi).enumerate() {
        let q = pi.max(crate::dpd::PROB_FLOOR);
        let delta = if j + 1 == cell { 1.0 } else { 0.0 };
        let c = q.powf(beta - 1.0) * (delta - pi);
        for r in 0..3 {
            s[r] += c * w[r];
        }
    }
    Ok(s)
}

/// `J_β⁻¹ Wᵀ D^{β−1}(−π + Δ_cell)` with the pseudo-inverse flag.
pub fn if_mdpde_full(params: &ModelParams, plan: &StressPlan, beta: f64, cell: usize) -> Result<IfVector> {
    check_cell(plan, cell)?;
    let (j, _) = sandwich_matrices(params, plan, beta)?;
    let inv = j.symmetric_inverse()?;
    let s = second_factor(params, plan, beta, cell)?;
    let vector = inv.matrix.mul_vec(&s);
    if !vector.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("influence function is not finite".into()));
    }
    Ok(IfVector { vector, pseudo_inverse: inv.ill_conditioned })
}

/// IF of the MDPDE at a point mass on `cell` (1-based).
pub fn if_mdpde(params: &ModelParams, plan: &StressPlan, beta: f64, cell: usize) -> Result<[f64; 3]> {
    Ok(if_mdpde_full(params, plan, beta, cell)?.vector)
}

fn check_null(params: &ModelParams, constraint: &dyn Constraint) -> Result<()> {
    let m = constraint.value(params);
    let scale = 1.0 + params.to_array().iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if m.iter().any(|v| v.abs() > 1e-8 * scale) {
        return Err(Error::invalid(format!("parameters do not satisfy the null hypothesis, m(θ) = {m:?}")));
    }
    Ok(())
}

/// `2N · IFᵀ M (Mᵀ Σ M)⁻¹ Mᵀ IF` for an arbitrary IF vector.
pub fn if_wald_from_vector(
    params: &ModelParams,
    cov: &Mat3,
    n: u64,
    constraint: &dyn Constraint,
    if_vector: &[f64; 3],
) -> Result<f64> {
    let m = constraint.jacobian(params);
    if m.len() != constraint.rank() {
        return Err(Error::invalid("constraint Jacobian does not match its rank"));
    }
    let mid = middle(cov, &m)?;
    let proj: Vec<f64> = m.iter().map(|col| dot3(col, if_vector)).collect();
    let v = 2.0 * n as f64 * mid.quad(&proj);
    if !v.is_finite() {
        return Err(Error::NonFinite("second-order influence function is not finite".into()));
    }
    Ok(v.max(0.0))
}

/// Second-order IF of the Wald statistic at a null point.
pub fn if_wald(
    params_null: &ModelParams,
    plan: &StressPlan,
    beta: f64,
    constraint: &dyn Constraint,
    cell: usize,
    n: u64,
) -> Result<f64> {
    check_null(params_null, constraint)?;
    let ifv = if_mdpde(params_null, plan, beta, cell)?;
    let cov = asymptotic_covariance(params_null, plan, beta)?;
    if_wald_from_vector(params_null, &cov.matrix, n, constraint, &ifv)
}

/// First-order IF of the Wald functional, `2N mᵀ (Mᵀ Σ M)⁻¹ Mᵀ IF`. Zero at
/// any null point.
pub fn if_wald_first_order(
    params: &ModelParams,
    plan: &StressPlan,
    beta: f64,
    constraint: &dyn Constraint,
    cell: usize,
    n: u64,
) -> Result<f64> {
    let ifv = if_mdpde(params, plan, beta, cell)?;
    let cov = asymptotic_covariance(params, plan, beta)?;
    let m = constraint.jacobian(params);
    let mid = middle(&cov.matrix, &m)?;
    let mv = constraint.value(params);
    let proj: Vec<f64> = m.iter().map(|col| dot3(col, &ifv)).collect();
    let r = mid.r;
    let mut s = 0.0;
    for a in 0..r {
        for b in 0..r {
            s += mv[a] * mid.inv[a * r + b] * proj[b];
        }
    }
    Ok(2.0 * n as f64 * s)
}

/// Both influence quantities for one cell.
pub fn influence_report(
    params_null: &ModelParams,
    plan: &StressPlan,
    beta: f64,
    constraint: &dyn Constraint,
    cell: usize,
    n: u64,
) -> Result<IFReport> {
    let ifv = if_mdpde_full(params_null, plan, beta, cell)?;
    check_null(params_null, constraint)?;
    let cov = asymptotic_covariance(params_null, plan, beta)?;
    let w = if_wald_from_vector(params_null, &cov.matrix, n, constraint, &ifv.vector)?;
    Ok(IFReport { if_vector: ifv.vector, if_wald_second_order: w, cell, pseudo_inverse: ifv.pseudo_inverse })
}

/// What the leverage probe stretches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeMode {
    /// The last inspection time, which is also the termination time.
    InspectionTime,
    /// The last stress level.
    StressLevel,
}

fn probe_plan(template: &StressPlan, mode: ProbeMode, value: f64) -> Result<StressPlan> {
    let mut x = template.stress_levels().to_vec();
    let mut tau = template.change_times().to_vec();
    let mut it = template.inspection_times().to_vec();
    match mode {
        ProbeMode::InspectionTime => {
            *it.last_mut().unwrap() = value;
            *tau.last_mut().unwrap() = value;
        }
        ProbeMode::StressLevel => *x.last_mut().unwrap() = value,
    }
    StressPlan::new(x, tau, it)
}

/// `‖w_j‖ π_j^{β−1}` without flooring, so the β = 0 divergence is visible.
fn term_norm(w: &[f64; 3], pi: f64, beta: f64) -> f64 {
    let n = norm3(w);
    if n == 0.0 {
        return 0.0;
    }
    if pi <= 0.0 {
        return if beta < 1.0 { f64::INFINITY } else { 0.0 };
    }
    n * pi.powf(beta - 1.0)
}

/// Largest IF second-factor term `‖(z_j − z_{j−1}) π_j^{β−1}‖` among the
/// cells that lie beyond the stretched point, for each grid value.
///
/// In inspection-time mode the last inspection time (and the termination
/// time with it) is set to the grid value and the cell beyond it is the
/// survivor cell. In stress-level mode the last stress level is set to the
/// grid value and the cells are those opening at or after the last change
/// of stress.
pub fn leverage_probe(
    params: &ModelParams,
    plan_template: &StressPlan,
    beta: f64,
    mode: ProbeMode,
    grid: &[f64],
) -> Result<Vec<f64>> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta must be non-negative, got {beta}")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("probe grid must be strictly increasing"));
    }
    grid.par_iter()
        .map(|&v| {
            let plan = probe_plan(plan_template, mode, v)?;
            let eval = evaluate(params, &plan)?;
            let times = plan.inspection_times();
            let start = match mode {
                ProbeMode::InspectionTime => *times.last().unwrap(),
                ProbeMode::StressLevel => {
                    let tau = plan.change_times();
                    if tau.len() > 1 {
                        tau[tau.len() - 2]
                    } else {
                        0.0
                    }
                }
            };
            let mut best = 0.0_f64;
            for j in 0..eval.pi.len() {
                let lower = if j == 0 { 0.0 } else { times[j - 1] };
                if lower >= start {
                    best = best.max(term_norm(&eval.w[j], eval.pi[j], beta));
                }
            }
            Ok(best)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dpd::{fit_proportions, FitConfig};
    use crate::model::cell_probabilities;
    use crate::wald::LinearConstraint;

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

    fn refit_derivative(beta: f64, cell: usize, eps: f64) -> [f64; 3] {
        let plan = design_plan();
        let th = theta0();
        let pi = cell_probabilities(&th, &plan).unwrap();
        let p: Vec<f64> =
            pi.iter().enumerate().map(|(j, &q)| (1.0 - eps) * q + if j + 1 == cell { eps } else { 0.0 }).collect();
        let cfg = FitConfig { start: Some(th), multistart: 1, ..FitConfig::with_beta(beta) };
        let fit = fit_proportions(&plan, &p, 200, &cfg).unwrap();
        let a = fit.params.to_array();
        let b = th.to_array();
        [0, 1, 2].map(|i| (a[i] - b[i]) / eps)
    }

    #[test]
    fn matches_refit_derivative() {
        for &(beta, cell) in &[(0.0, 3), (0.3, 1), (0.5, 14), (1.0, 8)] {
            let ifv = if_mdpde(&theta0(), &design_plan(), beta, cell).unwrap();
            let fd = refit_derivative(beta, cell, 1e-4);
            let scale = norm3(&ifv);
            for i in 0..3 {
                assert!((fd[i] - ifv[i]).abs() < 0.02 * scale, "beta={beta} cell={cell} i={i}: {fd:?} vs {ifv:?}");
            }
        }
    }

    #[test]
    fn fisher_consistency() {
        let plan = design_plan();
        let th = theta0();
        let pi = cell_probabilities(&th, &plan).unwrap();
        for beta in [0.0, 0.4, 1.0] {
            let mut s = [0.0; 3];
            for cell in 1..=plan.n_cells() {
                let v = if_mdpde(&th, &plan, beta, cell).unwrap();
                for i in 0..3 {
                    s[i] += pi[cell - 1] * v[i];
                }
            }
            let scale = norm3(&if_mdpde(&th, &plan, beta, 1).unwrap());
            assert!(norm3(&s) < 1e-10 * scale.max(1.0), "beta={beta}: {s:?}");
        }
    }

    #[test]
    fn two_cell_mle_moves_probabilities_to_the_point_mass() {
        // one level, one inspection: binomial, the MLE functional tracks p exactly
        let plan = StressPlan::new(vec![0.5], vec![3.0], vec![3.0]).unwrap();
        let th = ModelParams::new(1.0, 0.2, 1.3).unwrap();
        let eval = evaluate(&th, &plan).unwrap();
        for cell in 1..=2 {
            let r = if_mdpde_full(&th, &plan, 0.0, cell).unwrap();
            assert!(r.pseudo_inverse);
            for j in 0..2 {
                let dpi = dot3(&eval.w[j], &r.vector);
                let target = if j + 1 == cell { 1.0 } else { 0.0 } - eval.pi[j];
                assert!((dpi - target).abs() < 1e-9, "cell={cell} j={j}: {dpi} vs {target}");
            }
        }
    }

    #[test]
    fn bad_cell_rejected() {
        assert!(if_mdpde(&theta0(), &design_plan(), 0.5, 0).is_err());
        assert!(if_mdpde(&theta0(), &design_plan(), 0.5, 15).is_err());
    }

    #[test]
    fn wald_if_properties() {
        let plan = design_plan();
        let th = theta0();
        let h0 = LinearConstraint::new([0.0, 1.0, 0.0], -0.05);
        for b in 0..=5 {
            let beta = b as f64 * 0.2;
            for cell in 1..=plan.n_cells() {
                let v = if_wald(&th, &plan, beta, &h0, cell, 200).unwrap();
                assert!(v >= 0.0 && v.is_finite());
                let f = if_wald_first_order(&th, &plan, beta, &h0, cell, 200).unwrap();
                assert!(f.abs() < 1e-9);
            }
        }
        let cov = asymptotic_covariance(&th, &plan, 0.4).unwrap().matrix;
        let ifv = if_mdpde(&th, &plan, 0.4, 5).unwrap();
        let one = if_wald_from_vector(&th, &cov, 200, &h0, &ifv).unwrap();
        let two = if_wald_from_vector(&th, &cov, 200, &h0, &ifv.map(|v| 2.0 * v)).unwrap();
        assert!((two - 4.0 * one).abs() <= 1e-12 * two.abs());
        // IF orthogonal to the constrained direction
        assert_eq!(if_wald_from_vector(&th, &cov, 200, &h0, &[1.0, 0.0, 3.0]).unwrap(), 0.0);
        let off = ModelParams::new(5.3, -0.04, 1.5).unwrap();
        assert!(if_wald(&off, &plan, 0.4, &h0, 3, 200).is_err());
    }

    #[test]
    fn leverage_dichotomy() {
        let grid = [50.0, 100.0, 500.0, 1000.0];
        let mle = leverage_probe(&theta0(), &design_plan(), 0.0, ProbeMode::InspectionTime, &grid).unwrap();
        assert!(mle.windows(2).all(|w| w[1] > w[0]), "{mle:?}");
        let robust = leverage_probe(&theta0(), &design_plan(), 0.4, ProbeMode::InspectionTime, &grid).unwrap();
        let imax = robust.iter().enumerate().fold(0, |b, (i, v)| if *v > robust[b] { i } else { b });
        assert!(imax < grid.len() - 1, "{robust:?}");
        assert!(robust[3] < 1e-6);
        let one = leverage_probe(&theta0(), &design_plan(), 1.0, ProbeMode::InspectionTime, &grid).unwrap();
        assert!(one[3] < one[0] && one[3] < 1e-6);
    }

    #[test]
    fn probe_rejects_unordered_grid() {
        assert!(leverage_probe(&theta0(), &design_plan(), 0.4, ProbeMode::InspectionTime, &[100.0, 50.0]).is_err());
        assert!(leverage_probe(&theta0(), &design_plan(), 0.4, ProbeMode::StressLevel, &[20.0]).is_err());
    }

    #[test]
    fn stress_probe_runs() {
        let v = leverage_probe(&theta0(), &design_plan(), 0.5, ProbeMode::StressLevel, &[45.0, 60.0, 100.0]).unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
    }
}
