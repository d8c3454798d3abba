//! Cumulative-exposure Weibull step-stress model.
//!
//! Devices start at stress `x_1`; at each change time `τ_i` the stress steps
//! up to `x_{i+1}`. Under cumulative exposure the lifetime cdf on segment `i`
//! is a Weibull cdf evaluated at the shifted time `t + h_{i-1}`, with scale
//! `α_i = exp(a0 + a1·x_i)` and common shape `η`. The shifts keep the cdf
//! continuous at every change time.
//!
//! Interval data are counted between consecutive inspection times; every
//! change time is also an inspection time and the last inspection time is
//! the termination time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to match change times against inspection times.
const TIME_MATCH_TOL: f64 = 1e-12;

/// Test design: stress levels, stress change times and inspection times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StressPlanRaw", into = "StressPlanRaw")]
pub struct StressPlan {
    stress_levels: Vec<f64>,
    change_times: Vec<f64>,
    inspection_times: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StressPlanRaw {
    stress_levels: Vec<f64>,
    change_times: Vec<f64>,
    inspection_times: Vec<f64>,
}

impl TryFrom<StressPlanRaw> for StressPlan {
    type Error = Error;
    fn try_from(r: StressPlanRaw) -> Result<Self> {
        StressPlan::new(r.stress_levels, r.change_times, r.inspection_times)
    }
}

impl From<StressPlan> for StressPlanRaw {
    fn from(p: StressPlan) -> Self {
        StressPlanRaw {
            stress_levels: p.stress_levels,
            change_times: p.change_times,
            inspection_times: p.inspection_times,
        }
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIME_MATCH_TOL * a.abs().max(b.abs()).max(1.0)
}

impl StressPlan {
    /// Validates and builds a plan. `change_times` has one entry per stress
    /// level; its last entry is the termination time.
    pub fn new(stress_levels: Vec<f64>, change_times: Vec<f64>, inspection_times: Vec<f64>) -> Result<Self> {
        let k = stress_levels.len();
        if k == 0 {
            return Err(Error::invalid("at least one stress level is required"));
        }
        if change_times.len() != k {
            return Err(Error::invalid(format!(
                "expected {k} change times (last = termination), got {}",
                change_times.len()
            )));
        }
        if inspection_times.is_empty() {
            return Err(Error::invalid("at least one inspection time is required"));
        }
        let all = stress_levels.iter().chain(&change_times).chain(&inspection_times);
        if all.into_iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("plan contains non-finite values"));
        }
        if !strictly_increasing(&stress_levels) {
            return Err(Error::invalid("stress levels must be strictly increasing"));
        }
        if !strictly_increasing(&change_times) || change_times[0] <= 0.0 {
            return Err(Error::invalid("change times must be positive and strictly increasing"));
        }
        if !strictly_increasing(&inspection_times) || inspection_times[0] <= 0.0 {
            return Err(Error::invalid("inspection times must be positive and strictly increasing"));
        }
        for tau in &change_times {
            if !inspection_times.iter().any(|t| same_time(*t, *tau)) {
                return Err(Error::invalid(format!("change time {tau} is not an inspection time")));
            }
        }
        let last_it = *inspection_times.last().unwrap_or(&0.0);
        let last_tau = *change_times.last().unwrap_or(&0.0);
        if !same_time(last_it, last_tau) {
            return Err(Error::invalid(format!(
                "last inspection time {last_it} must equal the termination time {last_tau}"
            )));
        }
        Ok(Self { stress_levels, change_times, inspection_times })
    }

    pub fn stress_levels(&self) -> &[f64] {
        &self.stress_levels
    }

    pub fn change_times(&self) -> &[f64] {
        &self.change_times
    }

    pub fn inspection_times(&self) -> &[f64] {
        &self.inspection_times
    }

    /// Number of stress levels `k`.
    pub fn n_levels(&self) -> usize {
        self.stress_levels.len()
    }

    /// Number of inspection times `L`.
    pub fn n_inspections(&self) -> usize {
        self.inspection_times.len()
    }

    /// Number of multinomial cells, `L + 1`.
    pub fn n_cells(&self) -> usize {
        self.inspection_times.len() + 1
    }

    pub fn termination_time(&self) -> f64 {
        *self.change_times.last().expect("validated non-empty")
    }

    /// Segment (0-based) with `τ_{i-1} < t ≤ τ_i`; times past termination
    /// belong to the last segment.
    pub fn segment_closed_right(&self, t: f64) -> usize {
        self.change_times.iter().position(|&tau| t <= tau).unwrap_or(self.stress_levels.len() - 1)
    }

    /// Segment (0-based) with `τ_{i-1} ≤ t < τ_i`, i.e. the right limit at
    /// change times.
    pub fn segment_closed_left(&self, t: f64) -> usize {
        self.change_times.iter().position(|&tau| t < tau).unwrap_or(self.stress_levels.len() - 1)
    }

    /// Copy with all times multiplied by `c`.
    pub fn rescaled_time(&self, c: f64) -> Result<Self> {
        Self::new(
            self.stress_levels.clone(),
            self.change_times.iter().map(|t| t * c).collect(),
            self.inspection_times.iter().map(|t| t * c).collect(),
        )
    }
}

/// Model parameter θ = (a0, a1, η).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub a0: f64,
    pub a1: f64,
    pub eta: f64,
}

impl ModelParams {
    pub fn new(a0: f64, a1: f64, eta: f64) -> Result<Self> {
        let p = Self { a0, a1, eta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a0.is_finite() && self.a1.is_finite() && self.eta.is_finite()) {
            return Err(Error::invalid(format!("non-finite parameters {self:?}")));
        }
        if self.eta <= 0.0 {
            return Err(Error::invalid(format!("shape must be positive, got {}", self.eta)));
        }
        Ok(())
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.a0, self.a1, self.eta]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self { a0: v[0], a1: v[1], eta: v[2] }
    }

    /// Unconstrained optimizer coordinates (a0, a1, log η).
    pub fn to_unconstrained(&self) -> [f64; 3] {
        [self.a0, self.a1, self.eta.ln()]
    }

    pub fn from_unconstrained(v: [f64; 3]) -> Self {
        Self { a0: v[0], a1: v[1], eta: v[2].exp() }
    }
}

/// Failure counts per inspection interval, last entry = survivors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalData {
    counts: Vec<u64>,
    total: u64,
}

impl IntervalData {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Data("interval data must contain at least one device".into()));
        }
        if counts.len() < 2 {
            return Err(Error::Data("interval data need at least two cells".into()));
        }
        Ok(Self { counts, total })
    }

    /// Builds data and checks the cell count against the plan.
    pub fn for_plan(counts: Vec<u64>, plan: &StressPlan) -> Result<Self> {
        let d = Self::new(counts)?;
        d.check_plan(plan)?;
        Ok(d)
    }

    pub fn check_plan(&self, plan: &StressPlan) -> Result<()> {
        if self.counts.len() != plan.n_cells() {
            return Err(Error::Data(format!("expected {} cells (L + 1), got {}", plan.n_cells(), self.counts.len())));
        }
        Ok(())
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn survivors(&self) -> u64 {
        *self.counts.last().expect("validated non-empty")
    }

    /// Empirical cell proportions p̂ = n / N.
    pub fn proportions(&self) -> Vec<f64> {
        let n = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Per-level scales and cumulative-exposure shifts.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftTerms {
    /// α_1..α_k
    pub alphas: Vec<f64>,
    /// h_0..h_{k-1}, h_0 = 0
    pub h: Vec<f64>,
    /// h*_0..h*_{k-1} = ∂h_i/∂a1, h*_0 = 0
    pub h_star: Vec<f64>,
}

/// α(x) = exp(a0 + a1·x).
pub fn scale_at_level(params: &ModelParams, x: f64) -> Result<f64> {
    let alpha = (params.a0 + params.a1 * x).exp();
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::NonFinite(format!(
            "scale exp({} + {}·{x}) is not a positive finite number",
            params.a0, params.a1
        )));
    }
    Ok(alpha)
}

/// Computes α_i, h_i and h*_i for every level.
pub fn shift_terms(params: &ModelParams, plan: &StressPlan) -> Result<ShiftTerms> {
    let x = plan.stress_levels();
    let tau = plan.change_times();
    let k = x.len();
    let alphas = x.iter().map(|&xi| scale_at_level(params, xi)).collect::<Result<Vec<_>>>()?;
    let mut h = vec![0.0; k];
    let mut h_star = vec![0.0; k];
    for i in 1..k {
        let mut s = 0.0;
        let mut s_star = 0.0;
        for m in 0..i {
            s += (1.0 / alphas[m] - 1.0 / alphas[m + 1]) * tau[m];
            s_star += (x[m + 1] / alphas[m + 1] - x[m] / alphas[m]) * tau[m];
        }
        h[i] = alphas[i] * s;
        h_star[i] = h[i] * x[i] + alphas[i] * s_star;
    }
    if h.iter().chain(&h_star).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("shift terms overflowed".into()));
    }
    Ok(ShiftTerms { alphas, h, h_star })
}

/// Shifted, scaled time `u = (t + h_{i-1})/α_i` on the given segment.
fn scaled_time(terms: &ShiftTerms, seg: usize, t: f64) -> Result<(f64, f64)> {
    let shifted = t + terms.h[seg];
    if !(shifted > 0.0) {
        return Err(Error::domain(format!(
            "shifted time t + h = {shifted} is not positive (t = {t}, segment {})",
            seg + 1
        )));
    }
    Ok((shifted, shifted / terms.alphas[seg]))
}

fn survival_with(terms: &ShiftTerms, plan: &StressPlan, eta: f64, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Ok(1.0);
    }
    let seg = plan.segment_closed_right(t);
    let (_, u) = scaled_time(terms, seg, t)?;
    Ok((-(eta * u.ln()).exp()).exp())
}

/// Lifetime cdf G_T(t).
pub fn cdf(params: &ModelParams, plan: &StressPlan, t: f64) -> Result<f64> {
    if t.is_nan() {
        return Err(Error::invalid("cdf evaluated at NaN"));
    }
    let terms = shift_terms(params, plan)?;
    if t <= 0.0 {
        return Ok(0.0);
    }
    let seg = plan.segment_closed_right(t);
    let (_, u) = scaled_time(&terms, seg, t)?;
    Ok((-(-(params.eta * u.ln()).exp()).exp_m1()).clamp(0.0, 1.0))
}

/// cdf evaluated with the formula of a specific (0-based) segment; used to
/// check continuity at change times.
pub fn cdf_on_segment(params: &ModelParams, plan: &StressPlan, seg: usize, t: f64) -> Result<f64> {
    if seg >= plan.n_levels() {
        return Err(Error::invalid(format!("segment {seg} out of range")));
    }
    let terms = shift_terms(params, plan)?;
    let (_, u) = scaled_time(&terms, seg, t)?;
    Ok(-(-(params.eta * u.ln()).exp()).exp_m1())
}

/// Lifetime density g_T(t); at a change time the new-stress branch (right
/// limit) is returned.
pub fn pdf(params: &ModelParams, plan: &StressPlan, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid(format!("pdf requires t > 0, got {t}")));
    }
    let terms = shift_terms(params, plan)?;
    let seg = plan.segment_closed_left(t);
    density_on(&terms, params.eta, seg, t)
}

fn density_on(terms: &ShiftTerms, eta: f64, seg: usize, t: f64) -> Result<f64> {
    let (_, u) = scaled_time(terms, seg, t)?;
    let ue = (eta * u.ln()).exp();
    Ok(eta / terms.alphas[seg] * ue / u * (-ue).exp())
}

/// Cell probabilities and the gradient matrix W evaluated together.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelEval {
    /// π_1..π_{L+1}
    pub pi: Vec<f64>,
    /// Rows w_j = z_j - z_{j-1} = ∂π_j/∂θ, j = 1..L+1.
    pub w: Vec<[f64; 3]>,
}

/// Evaluates π(θ) and W(θ) in one pass.
pub fn evaluate(params: &ModelParams, plan: &StressPlan) -> Result<ModelEval> {
    params.validate()?;
    let terms = shift_terms(params, plan)?;
    let x = plan.stress_levels();
    let eta = params.eta;
    let times = plan.inspection_times();
    let l = times.len();

    // survival R(t_j) and z_j = ∂G(t_j)/∂θ for j = 1..L; index 0 is t_0 = 0
    let mut surv = Vec::with_capacity(l + 1);
    let mut z = Vec::with_capacity(l + 2);
    surv.push(1.0);
    z.push([0.0; 3]);
    for &t in times {
        let seg = plan.segment_closed_right(t);
        let (shifted, u) = scaled_time(&terms, seg, t)?;
        let log_u = u.ln();
        let ue = (eta * log_u).exp();
        let r = (-ue).exp();
        surv.push(r);
        // g(t)·(t + h) = η u^η exp(-u^η)
        let gt = eta * ue * r;
        let g = gt / shifted;
        z.push([-gt, -gt * x[seg] + g * terms.h_star[seg], gt * log_u / eta]);
    }
    z.push([0.0; 3]);

    let mut pi = Vec::with_capacity(l + 1);
    for j in 1..=l {
        pi.push((surv[j - 1] - surv[j]).clamp(0.0, 1.0));
    }
    pi.push(surv[l].clamp(0.0, 1.0));

    let w = (1..=l + 1).map(|j| [z[j][0] - z[j - 1][0], z[j][1] - z[j - 1][1], z[j][2] - z[j - 1][2]]).collect();
    Ok(ModelEval { pi, w })
}

/// π_j = G(t_j) - G(t_{j-1}) for j = 1..L and π_{L+1} = 1 - G(t_L).
pub fn cell_probabilities(params: &ModelParams, plan: &StressPlan) -> Result<Vec<f64>> {
    params.validate()?;
    let terms = shift_terms(params, plan)?;
    let times = plan.inspection_times();
    let mut pi = Vec::with_capacity(times.len() + 1);
    let mut prev = 1.0;
    for &t in times {
        let r = survival_with(&terms, plan, params.eta, t)?;
        pi.push((prev - r).clamp(0.0, 1.0));
        prev = r;
    }
    pi.push(prev.clamp(0.0, 1.0));
    Ok(pi)
}

/// The (L+1)×3 matrix W with rows ∂π_j/∂θ.
pub fn gradient_matrix(params: &ModelParams, plan: &StressPlan) -> Result<Vec<[f64; 3]>> {
    Ok(evaluate(params, plan)?.w)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn design_plan() -> StressPlan {
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
    fn scale_examples() {
        let p = ModelParams::new(0.0, 0.0, 2.0).unwrap();
        assert_eq!(scale_at_level(&p, 123.0).unwrap(), 1.0);
        let a = scale_at_level(&theta0(), 30.0).unwrap();
        assert!((a - 3.8f64.exp()).abs() < 1e-12);
        assert!((a - 44.701).abs() < 1e-3);
        let solar = ModelParams::new(1.804, -2.388, 1.535).unwrap();
        assert!((scale_at_level(&solar, 0.0).unwrap() - 6.074).abs() < 1e-3);
        let big = ModelParams::new(800.0, 0.0, 1.0).unwrap();
        assert!(matches!(scale_at_level(&big, 0.0), Err(Error::NonFinite(_))));
    }

    #[test]
    fn shift_examples() {
        let plan = design_plan();
        let flat = ModelParams::new(3.0, 0.0, 1.5).unwrap();
        let t = shift_terms(&flat, &plan).unwrap();
        assert_eq!(t.h, vec![0.0, 0.0]);

        let t = shift_terms(&theta0(), &plan).unwrap();
        let expected = 18.0 * (3.3f64.exp() / 3.8f64.exp() - 1.0);
        assert!((t.h[1] - expected).abs() < 1e-12);
        assert!((t.h[1] + 7.083).abs() < 1e-3);
        // continuity identity G_2(τ1 + h1) = G_1(τ1)
        let g1 = cdf_on_segment(&theta0(), &plan, 0, 18.0).unwrap();
        let g2 = cdf_on_segment(&theta0(), &plan, 1, 18.0).unwrap();
        assert!((g1 - g2).abs() < 1e-14);

        let single = StressPlan::new(vec![1.0], vec![10.0], vec![5.0, 10.0]).unwrap();
        let t = shift_terms(&theta0(), &single).unwrap();
        assert_eq!(t.h, vec![0.0]);
        assert_eq!(t.h_star, vec![0.0]);
    }

    #[test]
    fn h_star_is_derivative_of_h() {
        let plan = StressPlan::new(
            vec![0.1, 0.4, 0.7, 1.0],
            vec![2.0, 3.5, 4.0, 6.0],
            vec![1.0, 2.0, 3.0, 3.5, 4.0, 5.0, 6.0],
        )
        .unwrap();
        let p = ModelParams::new(1.2, -1.7, 1.3).unwrap();
        let step = 1e-6;
        let up = shift_terms(&ModelParams { a1: p.a1 + step, ..p }, &plan).unwrap();
        let dn = shift_terms(&ModelParams { a1: p.a1 - step, ..p }, &plan).unwrap();
        let t = shift_terms(&p, &plan).unwrap();
        for i in 0..4 {
            let fd = (up.h[i] - dn.h[i]) / (2.0 * step);
            assert!((fd - t.h_star[i]).abs() < 1e-6 * (1.0 + fd.abs()), "i={i} fd={fd} h*={}", t.h_star[i]);
        }
    }

    #[test]
    fn cdf_examples() {
        let plan = design_plan();
        assert_eq!(cdf(&theta0(), &plan, 0.0).unwrap(), 0.0);
        let at_tau = cdf(&theta0(), &plan, 18.0).unwrap();
        let expected = 1.0 - (-(18.0 / 3.8f64.exp()).powf(1.5)).exp();
        assert!((at_tau - expected).abs() < 1e-12);
        assert!((at_tau - 0.2255).abs() < 1e-4);
        assert!((cdf(&theta0(), &plan, 1e6).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pdf_examples() {
        let plan = design_plan();
        let a1 = 3.8f64.exp();
        let expected = 1.5 / a1 * (10.0 / a1).powf(0.5) * (-(10.0 / a1).powf(1.5)).exp();
        assert!((pdf(&theta0(), &plan, 10.0).unwrap() - expected).abs() < 1e-14);
        let h = 1e-5;
        let fd = (cdf(&theta0(), &plan, 10.0 + h).unwrap() - cdf(&theta0(), &plan, 10.0 - h).unwrap()) / (2.0 * h);
        assert!((fd - expected).abs() / expected < 1e-6);

        // shape 1 reduces to exponential density on each branch
        let p = ModelParams::new(5.3, -0.05, 1.0).unwrap();
        let terms = shift_terms(&p, &plan).unwrap();
        for &t in &[3.0, 17.0, 18.0, 30.0, 51.0] {
            let seg = plan.segment_closed_left(t);
            let a = terms.alphas[seg];
            let e = (1.0 / a) * (-(t + terms.h[seg]) / a).exp();
            assert!((pdf(&p, &plan, t).unwrap() - e).abs() < 1e-15);
        }
        // right limit at the change time
        let right = density_on(&shift_terms(&theta0(), &plan).unwrap(), 1.5, 1, 18.0).unwrap();
        assert_eq!(pdf(&theta0(), &plan, 18.0).unwrap(), right);
        assert!(pdf(&theta0(), &plan, 0.0).is_err());
    }

    #[test]
    fn cell_probability_examples() {
        let plan = design_plan();
        let pi = cell_probabilities(&theta0(), &plan).unwrap();
        assert_eq!(pi.len(), 14);
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(pi.iter().all(|&p| p >= 0.0));
        let first = 1.0 - (-(6.0 / 3.8f64.exp()).powf(1.5)).exp();
        assert!((pi[0] - first).abs() < 1e-14);
        assert!((pi[0] - 0.04798).abs() < 1e-5);

        // no failures before termination
        let late = ModelParams::new(20.0, 0.0, 8.0).unwrap();
        let pi = cell_probabilities(&late, &plan).unwrap();
        assert!((pi[13] - 1.0).abs() < 1e-12);
        assert!(pi[..13].iter().all(|&p| p < 1e-12));
    }

    #[test]
    fn evaluate_agrees_with_cell_probabilities() {
        let plan = design_plan();
        let e = evaluate(&theta0(), &plan).unwrap();
        let pi = cell_probabilities(&theta0(), &plan).unwrap();
        for (a, b) in e.pi.iter().zip(&pi) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn gradient_rows_sum_to_zero_and_match_fd() {
        let plan = design_plan();
        let w = gradient_matrix(&theta0(), &plan).unwrap();
        for c in 0..3 {
            let s: f64 = w.iter().map(|r| r[c]).sum();
            assert!(s.abs() < 1e-12);
        }
        let th = theta0().to_array();
        for c in 0..3 {
            let step = 1e-6 * (1.0 + th[c].abs());
            let mut up = th;
            let mut dn = th;
            up[c] += step;
            dn[c] -= step;
            let pu = cell_probabilities(&ModelParams::from_array(up), &plan).unwrap();
            let pd = cell_probabilities(&ModelParams::from_array(dn), &plan).unwrap();
            for j in 0..plan.n_cells() {
                let fd = (pu[j] - pd[j]) / (2.0 * step);
                assert!((fd - w[j][c]).abs() <= 1e-5 * fd.abs() + 1e-9, "j={j} c={c} fd={fd} w={}", w[j][c]);
            }
        }
    }

    #[test]
    fn gradient_shape_one_third_column() {
        let plan = design_plan();
        let p = ModelParams::new(5.3, -0.05, 1.0).unwrap();
        let terms = shift_terms(&p, &plan).unwrap();
        let w = gradient_matrix(&p, &plan).unwrap();
        // z_j third component at η = 1: g·log((t+h)/α)·(t+h)
        let z3 = |t: f64| {
            let seg = plan.segment_closed_right(t);
            let s = t + terms.h[seg];
            let a = terms.alphas[seg];
            (1.0 / a) * (-s / a).exp() * (s / a).ln() * s
        };
        let its = plan.inspection_times();
        assert!((w[0][2] - z3(its[0])).abs() < 1e-14);
        for j in 1..its.len() {
            assert!((w[j][2] - (z3(its[j]) - z3(its[j - 1]))).abs() < 1e-14);
        }
    }

    #[test]
    fn single_level_is_plain_weibull() {
        let plan = StressPlan::new(vec![0.5], vec![9.0], vec![2.0, 4.0, 9.0]).unwrap();
        let p = ModelParams::new(1.5, -0.7, 1.7).unwrap();
        let a = (1.5f64 - 0.35).exp();
        for &t in &[0.5, 2.0, 7.3, 9.0, 15.0] {
            let g = 1.0 - (-(t / a).powf(1.7)).exp();
            assert!((cdf(&p, &plan, t).unwrap() - g).abs() < 1e-14);
        }
    }

    #[test]
    fn plan_validation() {
        assert!(StressPlan::new(vec![2.0, 1.0], vec![1.0, 2.0], vec![1.0, 2.0]).is_err());
        assert!(StressPlan::new(vec![1.0, 2.0], vec![1.0, 2.0], vec![0.5, 2.0]).is_err());
        assert!(StressPlan::new(vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(StressPlan::new(vec![1.0], vec![2.0, 3.0], vec![2.0]).is_err());
        assert!(StressPlan::new(vec![1.0, 2.0], vec![1.0, 2.0], vec![1.0, 1.5, 2.0]).is_ok());
        assert!(ModelParams::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn interval_data_checks() {
        let plan = design_plan();
        assert!(IntervalData::for_plan(vec![1; 14], &plan).is_ok());
        assert!(IntervalData::for_plan(vec![1; 13], &plan).is_err());
        assert!(IntervalData::new(vec![0, 0]).is_err());
        let d = IntervalData::new(vec![1, 3]).unwrap();
        assert_eq!(d.total(), 4);
        assert_eq!(d.proportions(), vec![0.25, 0.75]);
    }
}
