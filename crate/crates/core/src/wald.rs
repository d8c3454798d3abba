//! Wald-type tests of composite hypotheses `H0: m(θ) = 0` built on the
//! MDPDE, with power approximations.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dpd::{asymptotic_covariance, FitResult};
use crate::error::{Error, Result};
use crate::model::{ModelParams, StressPlan};
use crate::special::{
    chi2_critical, chi2_sf, noncentral_chi2_cdf, std_normal_cdf, symmetric_eigen, symmetric_inverse, Mat3,
};

/// Restriction `m(θ) = 0` with `r` components and Jacobian `M = ∂mᵀ/∂θ`.
pub trait Constraint: Send + Sync {
    fn rank(&self) -> usize;
    fn value(&self, theta: &ModelParams) -> Vec<f64>;
    /// Columns of the 3×r matrix `M`, one 3-vector per constraint.
    fn jacobian(&self, theta: &ModelParams) -> Vec<[f64; 3]>;
}

/// `m(θ) = Cθ − d`, one row of `C` per constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub rows: Vec<([f64; 3], f64)>,
}

impl LinearConstraint {
    /// Single restriction `c·θ = d`.
    pub fn new(c: [f64; 3], d: f64) -> Self {
        Self { rows: vec![(c, d)] }
    }

    pub fn from_rows(rows: Vec<([f64; 3], f64)>) -> Result<Self> {
        if rows.is_empty() || rows.len() > 3 {
            return Err(Error::invalid("a constraint needs between 1 and 3 rows"));
        }
        Ok(Self { rows })
    }

    /// Parses `"c0,c1,c2,d"`; several restrictions are separated by `;`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let v = part
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|e| Error::invalid(format!("constraint '{part}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            if v.len() != 4 {
                return Err(Error::invalid(format!("constraint '{part}' must have 4 numbers c0,c1,c2,d")));
            }
            rows.push(([v[0], v[1], v[2]], v[3]));
        }
        Self::from_rows(rows)
    }
}

impl Constraint for LinearConstraint {
    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn value(&self, theta: &ModelParams) -> Vec<f64> {
        let t = theta.to_array();
        self.rows.iter().map(|(c, d)| c[0] * t[0] + c[1] * t[1] + c[2] * t[2] - d).collect()
    }

    fn jacobian(&self, _theta: &ModelParams) -> Vec<[f64; 3]> {
        self.rows.iter().map(|(c, _)| *c).collect()
    }
}

type ValueFn = dyn Fn(&ModelParams) -> Vec<f64> + Send + Sync;
type JacobianFn = dyn Fn(&ModelParams) -> Vec<[f64; 3]> + Send + Sync;

/// Non-linear restriction given by closures.
#[derive(Clone)]
pub struct FnConstraint {
    r: usize,
    m: Arc<ValueFn>,
    jac: Arc<JacobianFn>,
}

impl FnConstraint {
    pub fn new(
        r: usize,
        m: impl Fn(&ModelParams) -> Vec<f64> + Send + Sync + 'static,
        jac: impl Fn(&ModelParams) -> Vec<[f64; 3]> + Send + Sync + 'static,
    ) -> Self {
        Self { r, m: Arc::new(m), jac: Arc::new(jac) }
    }
}

impl fmt::Debug for FnConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnConstraint").field("r", &self.r).finish_non_exhaustive()
    }
}

impl Constraint for FnConstraint {
    fn rank(&self) -> usize {
        self.r
    }

    fn value(&self, theta: &ModelParams) -> Vec<f64> {
        (self.m)(theta)
    }

    fn jacobian(&self, theta: &ModelParams) -> Vec<[f64; 3]> {
        (self.jac)(theta)
    }
}

/// Outcome of a Wald-type test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// `(significance level, reject)` pairs.
    pub reject_at: Vec<(f64, bool)>,
    /// The middle matrix was inverted with the pseudo-inverse.
    pub pseudo_inverse: bool,
}

impl TestResult {
    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Default significance levels reported by [`wald_statistic`].
pub const DEFAULT_LEVELS: [f64; 3] = [0.01, 0.05, 0.10];

/// Inverse of the r×r matrix `Mᵀ Σ M`.
pub(crate) struct Middle {
    pub inv: Vec<f64>,
    pub r: usize,
    pub pseudo: bool,
}

fn check_jacobian(m: &[[f64; 3]], r: usize) -> Result<()> {
    if m.len() != r || r == 0 {
        return Err(Error::invalid(format!("constraint Jacobian has {} columns, expected rank {r}", m.len())));
    }
    let mut gram = vec![0.0; r * r];
    for a in 0..r {
        for b in 0..r {
            gram[a * r + b] = (0..3).map(|i| m[a][i] * m[b][i]).sum();
        }
    }
    let (vals, _) = symmetric_eigen(&gram, r);
    let max = vals.iter().fold(0.0_f64, |x, v| x.max(v.abs()));
    let min = vals.iter().fold(f64::INFINITY, |x, v| x.min(v.abs()));
    if !(max > 0.0) || min <= 1e-12 * max {
        return Err(Error::Singular("constraint Jacobian M is rank deficient".into()));
    }
    Ok(())
}

pub(crate) fn middle(cov: &Mat3, m: &[[f64; 3]]) -> Result<Middle> {
    let r = m.len();
    let mut a = vec![0.0; r * r];
    for p in 0..r {
        let sm = cov.mul_vec(&m[p]);
        for q in 0..r {
            a[q * r + p] = (0..3).map(|i| m[q][i] * sm[i]).sum();
        }
    }
    let inv = symmetric_inverse(&a, r)?;
    Ok(Middle { inv: inv.matrix, r, pseudo: inv.pseudo_inverse })
}

impl Middle {
    pub fn quad(&self, v: &[f64]) -> f64 {
        let r = self.r;
        let mut s = 0.0;
        for a in 0..r {
            for b in 0..r {
                s += v[a] * self.inv[a * r + b] * v[b];
            }
        }
        s
    }
}

/// `W_N = N mᵀ (Mᵀ Σ M)⁻¹ m` at the fitted parameters, referred to `χ²_r`.
pub fn wald_statistic(fit: &FitResult, constraint: &dyn Constraint) -> Result<TestResult> {
    if !fit.converged {
        return Err(Error::Estimation("the Wald test needs a converged fit".into()));
    }
    wald_statistic_at(&fit.params, &fit.covariance, fit.n_total, constraint, &DEFAULT_LEVELS)
}

/// Wald statistic from explicit parameters and per-observation covariance.
pub fn wald_statistic_at(
    params: &ModelParams,
    cov: &Mat3,
    n: u64,
    constraint: &dyn Constraint,
    levels: &[f64],
) -> Result<TestResult> {
    let r = constraint.rank();
    let m = constraint.jacobian(params);
    check_jacobian(&m, r)?;
    let mid = middle(cov, &m)?;
    let mv = constraint.value(params);
    let statistic = (n as f64 * mid.quad(&mv)).max(0.0);
    if !statistic.is_finite() {
        return Err(Error::NonFinite("Wald statistic is not finite".into()));
    }
    let p_value = chi2_sf(statistic, r as f64)?.clamp(0.0, 1.0);
    let reject_at = levels.iter().map(|&a| (a, p_value < a)).collect();
    Ok(TestResult { statistic, df: r, p_value, reject_at, pseudo_inverse: mid.pseudo })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("significance level must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Normal approximation to the power at a fixed alternative `θ*`.
///
/// Uses `ℓ(θ) = mᵀ(θ) (Mᵀ Σ M)⁻¹|_{θ*} m(θ)` (no factor `N`, so that it is
/// comparable with `χ²_{r,α}/N`) and the standard deviation
/// `σ = sqrt(∇ℓᵀ Σ ∇ℓ)` with `∇ℓ` by central differences.
pub fn asymptotic_power(
    theta_star: &ModelParams,
    plan: &StressPlan,
    constraint: &dyn Constraint,
    beta: f64,
    n: u64,
    alpha: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    let r = constraint.rank();
    let mv = constraint.value(theta_star);
    if mv.iter().all(|&v| v == 0.0) {
        return Err(Error::invalid("power is undefined at a parameter satisfying the null hypothesis"));
    }
    let cov = asymptotic_covariance(theta_star, plan, beta)?.matrix;
    let m = constraint.jacobian(theta_star);
    check_jacobian(&m, r)?;
    let mid = middle(&cov, &m)?;
    let ell = |t: &ModelParams| mid.quad(&constraint.value(t));
    let l_star = ell(theta_star);
    let th = theta_star.to_array();
    let mut grad = [0.0; 3];
    for c in 0..3 {
        let h = 1e-6 * (1.0 + th[c].abs());
        let mut up = th;
        let mut dn = th;
        up[c] += h;
        dn[c] -= h;
        grad[c] = (ell(&ModelParams::from_array(up)) - ell(&ModelParams::from_array(dn))) / (2.0 * h);
    }
    let sigma = cov.quad_form(&grad).max(0.0).sqrt();
    if !(sigma > 0.0) {
        return Err(Error::Singular("power approximation has zero variance".into()));
    }
    let crit = chi2_critical(alpha, r as f64)?;
    let nf = n as f64;
    Ok(std_normal_cdf(-nf.sqrt() / sigma * (crit / nf - l_star)))
}

/// Local alternative `θ_N = θ0 + d/√N` or `m(θ_N) = δ/√N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LocalAlternative {
    Direction([f64; 3]),
    Delta(Vec<f64>),
}

/// Non-centrality of the limiting `χ²_r(ν)` under a local alternative.
pub fn noncentrality(
    theta0: &ModelParams,
    alt: &LocalAlternative,
    plan: &StressPlan,
    constraint: &dyn Constraint,
    beta: f64,
) -> Result<f64> {
    let r = constraint.rank();
    let m = constraint.jacobian(theta0);
    check_jacobian(&m, r)?;
    let cov = asymptotic_covariance(theta0, plan, beta)?.matrix;
    let mid = middle(&cov, &m)?;
    let delta: Vec<f64> = match alt {
        LocalAlternative::Direction(d) => m.iter().map(|col| col[0] * d[0] + col[1] * d[1] + col[2] * d[2]).collect(),
        LocalAlternative::Delta(v) => {
            if v.len() != r {
                return Err(Error::invalid(format!("δ has {} entries, expected {r}", v.len())));
            }
            v.clone()
        }
    };
    Ok(mid.quad(&delta).max(0.0))
}

/// `1 − F_{χ²_r(ν)}(χ²_{r,α})` under a contiguous alternative.
pub fn contiguous_power(
    theta0: &ModelParams,
    alt: &LocalAlternative,
    plan: &StressPlan,
    constraint: &dyn Constraint,
    beta: f64,
    alpha: f64,
) -> Result<f64> {
    check_alpha(alpha)?;
    let nu = noncentrality(theta0, alt, plan, constraint, beta)?;
    power_from_noncentrality(nu, constraint.rank(), alpha)
}

pub fn power_from_noncentrality(nu: f64, df: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let crit = chi2_critical(alpha, df as f64)?;
    Ok(1.0 - noncentral_chi2_cdf(crit, df as f64, nu)?)
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

    fn slope_null() -> LinearConstraint {
        LinearConstraint::new([0.0, 1.0, 0.0], -0.05)
    }

    #[test]
    fn parse_constraints() {
        let c = LinearConstraint::parse("0,0,1,1").unwrap();
        assert_eq!(c.rows, vec![([0.0, 0.0, 1.0], 1.0)]);
        assert_eq!(LinearConstraint::parse("0,1,0,0; 1,0,0,2").unwrap().rank(), 2);
        assert!(LinearConstraint::parse("0,1,0").is_err());
        assert!(LinearConstraint::parse("a,1,0,0").is_err());
    }

    #[test]
    fn statistic_zero_on_null() {
        let p = ModelParams::new(5.3, -0.05, 1.5).unwrap();
        let cov = crate::dpd::asymptotic_covariance(&p, &design_plan(), 0.0).unwrap().matrix;
        let t = wald_statistic_at(&p, &cov, 200, &slope_null(), &DEFAULT_LEVELS).unwrap();
        assert!(t.statistic.abs() < 1e-20);
        assert!((t.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scale_invariance() {
        let p = ModelParams::new(5.3, -0.06, 1.5).unwrap();
        let cov = crate::dpd::asymptotic_covariance(&p, &design_plan(), 0.3).unwrap().matrix;
        let a = wald_statistic_at(&p, &cov, 200, &slope_null(), &DEFAULT_LEVELS).unwrap();
        let scaled = LinearConstraint::new([0.0, -7.0, 0.0], 0.35);
        let b = wald_statistic_at(&p, &cov, 200, &scaled, &DEFAULT_LEVELS).unwrap();
        assert!((a.statistic - b.statistic).abs() <= 1e-10 * a.statistic);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let p = ModelParams::new(5.3, -0.06, 1.5).unwrap();
        let c = LinearConstraint::from_rows(vec![([0.0, 1.0, 0.0], 0.0), ([0.0, 2.0, 0.0], 0.0)]).unwrap();
        let cov = Mat3::identity();
        assert!(matches!(wald_statistic_at(&p, &cov, 10, &c, &DEFAULT_LEVELS), Err(Error::Singular(_))));
    }

    #[test]
    fn contiguous_power_examples() {
        let p = ModelParams::new(5.3, -0.05, 1.5).unwrap();
        let plan = design_plan();
        let c = slope_null();
        let zero = contiguous_power(&p, &LocalAlternative::Direction([0.0; 3]), &plan, &c, 0.2, 0.05).unwrap();
        assert!((zero - 0.05).abs() < 1e-10);
        let d = [0.3, -0.2, 0.1];
        let a = noncentrality(&p, &LocalAlternative::Direction(d), &plan, &c, 0.2).unwrap();
        let b = noncentrality(&p, &LocalAlternative::Delta(vec![-0.2]), &plan, &c, 0.2).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        let pw = power_from_noncentrality(5.0, 1, 0.05).unwrap();
        assert!((pw - 0.609).abs() < 1e-3);
        let mut last = 0.0;
        for nu in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
            let p = power_from_noncentrality(nu, 2, 0.05).unwrap();
            assert!(p >= last);
            last = p;
        }
    }

    #[test]
    fn asymptotic_power_limits() {
        let plan = design_plan();
        let c = slope_null();
        let star = ModelParams::new(5.3, -0.06, 1.5).unwrap();
        let big = asymptotic_power(&star, &plan, &c, 0.0, 100_000_000, 0.05).unwrap();
        assert!((1.0 - big) < 1e-6);
        let mut last = 0.0;
        for a1 in [-0.052, -0.055, -0.06, -0.065, -0.07] {
            let s = ModelParams::new(5.3, a1, 1.5).unwrap();
            let p = asymptotic_power(&s, &plan, &c, 0.0, 200, 0.05).unwrap();
            assert!(p > last, "a1={a1} p={p}");
            last = p;
        }
        let null = ModelParams::new(5.3, -0.05, 1.5).unwrap();
        assert!(asymptotic_power(&null, &plan, &c, 0.0, 200, 0.05).is_err());
    }
}
