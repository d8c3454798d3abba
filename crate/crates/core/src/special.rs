//! Special functions and fixed-size linear algebra used by the statistical
//! routines.
//!
//! Everything here is dependency free. The model has exactly three
//! parameters, so matrices are hardcoded as 3×3 ([`Mat3`]); the only
//! variable-size kernel is a small symmetric eigensolver used for the r×r
//! Wald middle matrix.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument (z - 1)
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// Natural log of |Γ(x)| for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let s = (std::f64::consts::PI * x).sin();
        return Ok(std::f64::consts::PI.ln() - s.ln() - ln_gamma(1.0 - x)?);
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok(LN_SQRT_2PI + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln())
}

/// Gamma function for x > 0.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("gamma requires x > 0, got {x}")));
    }
    if x < 0.5 {
        let s = (std::f64::consts::PI * x).sin();
        return Ok(std::f64::consts::PI / (s * gamma_fn(1.0 - x)?));
    }
    if x > 140.0 {
        return Ok(ln_gamma(x)?.exp());
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    Ok((2.0 * std::f64::consts::PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z))
}

/// Digamma ψ₀(x) = d/dx ln Γ(x) for x > 0.
pub fn digamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("digamma requires x > 0, got {x}")));
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli-number asymptotic tail
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32_760.0)))));
    Ok(acc + x.ln() - 0.5 * inv - tail)
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> Result<f64> {
    let (p, _) = incomplete_gamma(a, x)?;
    Ok(p)
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    let (_, q) = incomplete_gamma(a, x)?;
    Ok(q)
}

// Series below a+1, continued fraction above; both halves are returned
// so the tail that is computed directly keeps full relative precision.
fn incomplete_gamma(a: f64, x: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain(format!("incomplete gamma requires a > 0, got {a}")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain(format!("incomplete gamma requires x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x.is_infinite() {
        return Ok((1.0, 0.0));
    }
    let log_prefix = a * x.ln() - x - ln_gamma(a)?;
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..10_000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        let p = (sum.ln() + log_prefix).exp().min(1.0);
        Ok((p, 1.0 - p))
    } else {
        // modified Lentz for the continued fraction of Q
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        let q = (log_prefix + h.ln()).exp().min(1.0);
        Ok((1.0 - q, q))
    }
}

/// CDF of the central chi-square distribution.
pub fn chi2_cdf(x: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    gamma_p(df / 2.0, x / 2.0)
}

/// Upper tail of the central chi-square distribution.
pub fn chi2_sf(x: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if x <= 0.0 {
        return Ok(1.0);
    }
    gamma_q(df / 2.0, x / 2.0)
}

/// Inverse CDF of the central chi-square distribution by bisection.
pub fn chi2_quantile(p: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if !(0.0..1.0).contains(&p) {
        return Err(Error::domain(format!("chi2 quantile requires 0 <= p < 1, got {p}")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = df.max(1.0);
    while chi2_cdf(hi, df)? < p {
        lo = hi;
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::NonFinite("chi2 quantile bracket overflow".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chi2_cdf(mid, df)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi.max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Upper α critical value χ²_{df,α}.
pub fn chi2_critical(alpha: f64, df: f64) -> Result<f64> {
    chi2_quantile(1.0 - alpha, df)
}

/// CDF of the non-central chi-square distribution as a Poisson mixture of
/// central chi-square CDFs, summed outward from the Poisson mode.
pub fn noncentral_chi2_cdf(x: f64, df: f64, ncp: f64) -> Result<f64> {
    check_df(df)?;
    if !(ncp >= 0.0) || !ncp.is_finite() {
        return Err(Error::domain(format!("non-centrality must be >= 0, got {ncp}")));
    }
    if ncp == 0.0 {
        return chi2_cdf(x, df);
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    let lambda = ncp / 2.0;
    let log_w = |k: f64| -> Result<f64> { Ok(-lambda + k * lambda.ln() - ln_gamma(k + 1.0)?) };
    let mode = lambda.floor();
    let mut total = 0.0;
    let mut mass = 0.0;
    let mut k = mode;
    loop {
        let w = log_w(k)?.exp();
        total += w * chi2_cdf(x, df + 2.0 * k)?;
        mass += w;
        if k == 0.0 || w < 1e-17 {
            break;
        }
        k -= 1.0;
    }
    let mut k = mode + 1.0;
    loop {
        let w = log_w(k)?.exp();
        total += w * chi2_cdf(x, df + 2.0 * k)?;
        mass += w;
        if (w < 1e-17 && k > lambda) || 1.0 - mass < 1e-15 {
            break;
        }
        k += 1.0;
        if k > mode + 100_000.0 {
            break;
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

fn check_df(df: f64) -> Result<()> {
    if !(df > 0.0) || !df.is_finite() {
        return Err(Error::domain(format!("degrees of freedom must be > 0, got {df}")));
    }
    Ok(())
}

/// Standard normal CDF Φ(x).
pub fn std_normal_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let h = 0.5 * x * x;
    if h == 0.0 {
        return 0.5;
    }
    // a = 1/2 is always valid, so the incomplete gamma cannot fail here
    let (p, q) = incomplete_gamma(0.5, h).unwrap_or((f64::NAN, f64::NAN));
    if x < 0.0 {
        0.5 * q
    } else {
        0.5 * (1.0 + p)
    }
}

/// Standard normal quantile Φ⁻¹(p): Acklam's rational approximation followed
/// by one Halley refinement against [`std_normal_cdf`].
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("normal quantile requires 0 < p < 1, got {p}")));
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] =
        [7.784_695_709_041_462e-3, 3.224_671_290_700_398e-1, 2.445_134_137_142_996, 3.754_408_661_907_416];
    const P_LOW: f64 = 0.024_25;
    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let e = std_normal_cdf(x) - p;
    let u = e * (2.0 * std::f64::consts::PI).sqrt() * (0.5 * x * x).exp();
    Ok(x - u / (1.0 + 0.5 * x * u))
}

/// Upper α/2 point of the standard normal for a two-sided interval with the
/// given confidence level.
pub fn z_two_sided(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::invalid(format!("confidence must lie in (0,1), got {confidence}")));
    }
    std_normal_quantile(0.5 + 0.5 * confidence)
}

/// Eigen-decomposition of a symmetric `n×n` matrix (row-major) by cyclic
/// Jacobi rotations. Returns eigenvalues and the eigenvectors as columns of a
/// row-major matrix.
pub fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        let scale: f64 = (0..n).map(|i| m[i * n + i] * m[i * n + i]).sum::<f64>() + off;
        if off <= 1e-32 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[i * n + i]).collect(), v)
}

/// Result of a symmetric inversion through the eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct SymInverse {
    pub matrix: Vec<f64>,
    /// |λ|max / |λ|min; infinite when an eigenvalue is exactly zero.
    pub condition: f64,
    /// Set when the condition number exceeded [`CONDITION_LIMIT`] and the
    /// Moore–Penrose pseudo-inverse was returned instead.
    pub pseudo_inverse: bool,
}

/// Condition number above which inverses fall back to the pseudo-inverse.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Relative eigenvalue threshold below which directions are dropped from the
/// pseudo-inverse.
pub const PINV_RELATIVE_CUTOFF: f64 = 1e-12;

/// Inverts a symmetric `n×n` matrix. Falls back to the pseudo-inverse when
/// the condition number exceeds [`CONDITION_LIMIT`].
pub fn symmetric_inverse(a: &[f64], n: usize) -> Result<SymInverse> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("matrix has non-finite entries".into()));
    }
    let (vals, vecs) = symmetric_eigen(a, n);
    let max_abs = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if max_abs == 0.0 {
        return Err(Error::Singular("zero matrix".into()));
    }
    let min_abs = vals.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let condition = if min_abs == 0.0 { f64::INFINITY } else { max_abs / min_abs };
    let pseudo = condition > CONDITION_LIMIT;
    let mut out = vec![0.0; n * n];
    for (k, &lam) in vals.iter().enumerate() {
        if pseudo && lam.abs() <= PINV_RELATIVE_CUTOFF * max_abs {
            continue;
        }
        let inv = 1.0 / lam;
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] += vecs[i * n + k] * inv * vecs[j * n + k];
            }
        }
    }
    Ok(SymInverse { matrix: out, condition, pseudo_inverse: pseudo })
}

/// A 3×3 real matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat3(pub [[f64; 3]; 3]);

/// Inverse with an attached condition estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inverse3 {
    pub matrix: Mat3,
    pub condition: f64,
    pub ill_conditioned: bool,
}

impl Mat3 {
    pub const fn zeros() -> Self {
        Mat3([[0.0; 3]; 3])
    }

    pub const fn identity() -> Self {
        Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn from_diag(d: [f64; 3]) -> Self {
        let mut m = Self::zeros();
        for (i, v) in d.iter().enumerate() {
            m.0[i][i] = *v;
        }
        m
    }

    fn from_flat(v: &[f64]) -> Self {
        let mut m = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = v[i * 3 + j];
            }
        }
        m
    }

    pub fn to_flat(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                out[i * 3 + j] = self.0[i][j];
            }
        }
        out
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = self.0[j][i];
            }
        }
        t
    }

    pub fn mul(&self, other: &Mat3) -> Self {
        let mut out = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|k| self.0[i][k] * v[k]).sum();
        }
        out
    }

    /// vᵀ A v
    pub fn quad_form(&self, v: &[f64; 3]) -> f64 {
        dot3(v, &self.mul_vec(v))
    }

    pub fn add(&self, other: &Mat3) -> Self {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] += other.0[i][j];
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                m = m.max((self.0[i][j] - self.0[j][i]).abs());
            }
        }
        m
    }

    /// Symmetrized copy, (A + Aᵀ)/2.
    pub fn symmetrized(&self) -> Self {
        self.add(&self.transpose()).scale(0.5)
    }

    fn norm1(&self) -> f64 {
        (0..3).map(|j| (0..3).map(|i| self.0[i][j].abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Eigenvalues and eigenvectors (as columns) of the symmetric part.
    pub fn symmetric_eigen(&self) -> ([f64; 3], Mat3) {
        let (vals, vecs) = symmetric_eigen(&self.symmetrized().to_flat(), 3);
        ([vals[0], vals[1], vals[2]], Mat3::from_flat(&vecs))
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting.
    pub fn solve3(&self, b: &[f64; 3]) -> Result<[f64; 3]> {
        let mut a = self.0;
        let mut rhs = *b;
        for col in 0..3 {
            let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap_or(col);
            if a[piv][col] == 0.0 || !a[piv][col].is_finite() {
                return Err(Error::Singular("solve3: zero pivot".into()));
            }
            a.swap(col, piv);
            rhs.swap(col, piv);
            for row in (col + 1)..3 {
                let f = a[row][col] / a[col][col];
                for k in col..3 {
                    a[row][k] -= f * a[col][k];
                }
                rhs[row] -= f * rhs[col];
            }
        }
        let mut x = [0.0; 3];
        for i in (0..3).rev() {
            let s: f64 = ((i + 1)..3).map(|k| a[i][k] * x[k]).sum();
            x[i] = (rhs[i] - s) / a[i][i];
        }
        Ok(x)
    }

    /// General inverse via the adjugate, with a 1-norm condition estimate.
    pub fn inverse3(&self) -> Result<Inverse3> {
        if !self.is_finite() {
            return Err(Error::NonFinite("inverse3: non-finite entries".into()));
        }
        let det = self.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular("inverse3: zero determinant".into()));
        }
        let m = &self.0;
        let mut inv = Mat3::zeros();
        for i in 0..3 {
            for j in 0..3 {
                let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
                let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
                inv.0[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
            }
        }
        let condition = self.norm1() * inv.norm1();
        Ok(Inverse3 { matrix: inv, condition, ill_conditioned: condition > CONDITION_LIMIT })
    }

    /// Moore–Penrose pseudo-inverse. Symmetric input is decomposed directly;
    /// otherwise `pinv(AᵀA) Aᵀ` is used.
    pub fn pseudo_inverse3(&self) -> Result<Mat3> {
        if !self.is_finite() {
            return Err(Error::NonFinite("pseudo_inverse3: non-finite entries".into()));
        }
        let sym_pinv = |s: &Mat3| -> Mat3 {
            let (vals, vecs) = s.symmetric_eigen();
            let max_abs = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let mut out = Mat3::zeros();
            for (k, &lam) in vals.iter().enumerate() {
                if max_abs == 0.0 || lam.abs() <= PINV_RELATIVE_CUTOFF * max_abs {
                    continue;
                }
                for i in 0..3 {
                    for j in 0..3 {
                        out.0[i][j] += vecs.0[i][k] * vecs.0[j][k] / lam;
                    }
                }
            }
            out
        };
        if self.max_asymmetry() <= 1e-14 * self.norm1().max(1e-300) {
            Ok(sym_pinv(self))
        } else {
            let ata = self.transpose().mul(self);
            Ok(sym_pinv(&ata).mul(&self.transpose()))
        }
    }

    /// Inverse of a symmetric matrix through its eigendecomposition, falling
    /// back to the pseudo-inverse above [`CONDITION_LIMIT`].
    pub fn symmetric_inverse(&self) -> Result<Inverse3> {
        let inv = symmetric_inverse(&self.symmetrized().to_flat(), 3)?;
        Ok(Inverse3 {
            matrix: Mat3::from_flat(&inv.matrix),
            condition: inv.condition,
            ill_conditioned: inv.pseudo_inverse,
        })
    }
}

pub fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm3(a: &[f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}
