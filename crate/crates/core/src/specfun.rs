//! Special functions behind the closed-form interval methods.
//!
//! Everything here works in `f64`. The log-gamma family uses the Stirling
//! series with an explicit correction term so that differences such as
//! `ln B(a, b)` keep their relative accuracy for large shapes; the normal and
//! F quantiles are obtained by refining against the corresponding CDF.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const LN_SQRT_PI: f64 = 0.572_364_942_924_700_1;

/// A probability in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Probability(f64);

impl Probability {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::domain(format!("probability {value} outside [0, 1]")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

fn check_level(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("level {q} outside (0, 1)")))
    }
}

fn check_shape(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "shape {name} = {v} must be positive"
        )))
    }
}

/// Remainder of the Stirling approximation,
/// `ln Γ(z) - ((z - 1/2) ln z - z + ln √(2π))`, valid for `z >= 10`.
fn stirling_correction(z: f64) -> f64 {
    let r = 1.0 / z;
    let r2 = r * r;
    r * (1.0 / 12.0
        - r2 * (1.0 / 360.0
            - r2 * (1.0 / 1260.0
                - r2 * (1.0 / 1680.0
                    - r2 * (1.0 / 1188.0 - r2 * (691.0 / 360_360.0 - r2 / 156.0))))))
}

fn ln_gamma_unchecked(z: f64) -> f64 {
    if z == 1.0 || z == 2.0 {
        return 0.0;
    }
    if z >= 10.0 {
        return (z - 0.5) * z.ln() - z + LN_SQRT_2PI + stirling_correction(z);
    }
    // Shift up into the asymptotic range: Γ(z) = Γ(z + m) / (z (z+1) ... (z+m-1)).
    let mut shifted = z;
    let mut product = 1.0;
    while shifted < 10.0 {
        product *= shifted;
        shifted += 1.0;
    }
    ln_gamma_unchecked(shifted) - product.ln()
}

/// Natural logarithm of the gamma function for `z > 0`.
pub fn ln_gamma(z: f64) -> Result<f64> {
    if z.is_nan() || z <= 0.0 || !z.is_finite() {
        return Err(Error::domain(format!("ln_gamma requires z > 0, got {z}")));
    }
    Ok(ln_gamma_unchecked(z))
}

/// `ln B(a, b)` without cancellation between the three log-gamma terms.
fn ln_beta_unchecked(a: f64, b: f64) -> f64 {
    let p = a.min(b);
    let q = a.max(b);
    let s = p + q;
    if p >= 10.0 {
        let corr = stirling_correction(p) + stirling_correction(q) - stirling_correction(s);
        -0.5 * q.ln() + LN_SQRT_2PI + corr + (p - 0.5) * (p / s).ln() + q * (-p / s).ln_1p()
    } else if q >= 10.0 {
        let corr = stirling_correction(q) - stirling_correction(s);
        ln_gamma_unchecked(p) + corr + p - p * s.ln() + (q - 0.5) * (-p / s).ln_1p()
    } else {
        ln_gamma_unchecked(p) + ln_gamma_unchecked(q) - ln_gamma_unchecked(s)
    }
}

/// Natural logarithm of the beta function `B(a, b)`.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    check_shape("a", a)?;
    check_shape("b", b)?;
    Ok(ln_beta_unchecked(a, b))
}

/// `ln C(n, x)`.
///
/// Evaluated as `-ln(n + 1) - ln B(x + 1, n - x + 1)`; the result is exactly
/// symmetric in `x <-> n - x` and exactly zero at `x = 0` and `x = n`.
pub fn ln_choose(n: u64, x: u64) -> Result<f64> {
    if x > n {
        return Err(Error::domain(format!(
            "ln_choose requires x <= n, got n = {n}, x = {x}"
        )));
    }
    Ok(ln_choose_unchecked(n, x))
}

pub(crate) fn ln_choose_unchecked(n: u64, x: u64) -> f64 {
    if x == 0 || x == n {
        return 0.0;
    }
    let nf = n as f64;
    -(nf + 1.0).ln() - ln_beta_unchecked(x as f64 + 1.0, (n - x) as f64 + 1.0)
}

/// Regularized lower incomplete gamma by its power series (`x < a + 1`).
fn gamma_p_series(a: f64, x: f64, ln_gamma_a: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..1000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * f64::EPSILON {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma_a).exp()
}

/// Regularized upper incomplete gamma by its continued fraction (`x >= a + 1`).
fn gamma_q_fraction(a: f64, x: f64, ln_gamma_a: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < f64::EPSILON {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma_a).exp() * h
}

/// `erfc(|t|)`-style upper tail: `Q(1/2, t)` for `t >= 0`.
fn half_gamma_q(t: f64) -> f64 {
    if t < 1.5 {
        1.0 - gamma_p_series(0.5, t, LN_SQRT_PI)
    } else {
        gamma_q_fraction(0.5, t, LN_SQRT_PI)
    }
}

/// Standard normal CDF, accurate to a few ulps in both tails.
pub fn normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    let tail = 0.5 * half_gamma_q(0.5 * z * z);
    if z < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

// Rational approximation of the normal quantile (relative error ~1e-9),
// used only as a starting point for Halley refinement.
const QA: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const QB: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const QC: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const QD: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];

fn normal_quantile_guess(p: f64) -> f64 {
    const P_LOW: f64 = 0.024_25;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((QC[0] * q + QC[1]) * q + QC[2]) * q + QC[3]) * q + QC[4]) * q + QC[5])
            / ((((QD[0] * q + QD[1]) * q + QD[2]) * q + QD[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((QA[0] * r + QA[1]) * r + QA[2]) * r + QA[3]) * r + QA[4]) * r + QA[5]) * q
            / (((((QB[0] * r + QB[1]) * r + QB[2]) * r + QB[3]) * r + QB[4]) * r + 1.0)
    }
}

/// Lower-half quantile (`p < 1/2`), refined against the lower tail.
fn normal_quantile_lower(p: f64) -> f64 {
    let mut z = normal_quantile_guess(p);
    for _ in 0..2 {
        let e = 0.5 * half_gamma_q(0.5 * z * z) - p;
        let u = e * (2.0 * PI).sqrt() * (0.5 * z * z).exp();
        z -= u / (1.0 + 0.5 * z * u);
    }
    z
}

/// The `q`-quantile of the standard normal distribution.
pub fn normal_quantile(q: f64) -> Result<f64> {
    check_level(q)?;
    Ok(if q == 0.5 {
        0.0
    } else if q < 0.5 {
        normal_quantile_lower(q)
    } else {
        -normal_quantile_lower(1.0 - q)
    })
}

fn beta_fraction(a: f64, b: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..5000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    h
}

fn reg_inc_beta_unchecked(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta_unchecked(a, b);
    if x < a / (a + b) {
        ln_front.exp() * beta_fraction(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_fraction(b, a, 1.0 - x) / b
    }
}

/// The regularized incomplete beta function `I_x(a, b)`.
pub fn reg_inc_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    check_shape("a", a)?;
    check_shape("b", b)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("x = {x} outside [0, 1]")));
    }
    Ok(reg_inc_beta_unchecked(a, b, x))
}

fn inc_beta_inv_guess(a: f64, b: f64, q: f64) -> f64 {
    if a >= 1.0 && b >= 1.0 {
        let pp = if q < 0.5 { q } else { 1.0 - q };
        let t = (-2.0 * pp.ln()).sqrt();
        let mut x = (2.307_53 + t * 0.270_61) / (1.0 + t * (0.992_29 + t * 0.044_81)) - t;
        if q < 0.5 {
            x = -x;
        }
        let al = (x * x - 3.0) / 6.0;
        let h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0));
        let w = x * (al + h).sqrt() / h
            - (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) * (al + 5.0 / 6.0 - 2.0 / (3.0 * h));
        a / (a + b * (2.0 * w).exp())
    } else {
        let lna = (a / (a + b)).ln();
        let lnb = (b / (a + b)).ln();
        let t = (a * lna).exp() / a;
        let u = (b * lnb).exp() / b;
        let w = t + u;
        if q < t / w {
            (a * w * q).powf(1.0 / a)
        } else {
            1.0 - (b * w * (1.0 - q)).powf(1.0 / b)
        }
    }
}

/// Inverse of `I_x(a, b)` in `x`: Newton steps kept inside a shrinking
/// bisection bracket.
pub fn reg_inc_beta_inv(a: f64, b: f64, q: f64) -> Result<f64> {
    check_shape("a", a)?;
    check_shape("b", b)?;
    check_level(q)?;

    let ln_b = ln_beta_unchecked(a, b);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x = inc_beta_inv_guess(a, b, q);
    if !(x > 0.0 && x < 1.0) {
        x = 0.5;
    }
    for _ in 0..300 {
        let f = reg_inc_beta_unchecked(a, b, x) - q;
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let ln_pdf = (a - 1.0) * x.ln() + (b - 1.0) * (-x).ln_1p() - ln_b;
        let step = f / ln_pdf.exp();
        let mut next = x - step;
        if !step.is_finite() || step == 0.0 || next <= lo || next >= hi {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * next.abs() || hi - lo <= f64::MIN_POSITIVE {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// CDF of the F distribution with `(v1, v2)` degrees of freedom.
pub fn f_cdf(f: f64, v1: f64, v2: f64) -> Result<f64> {
    check_dof(v1, v2)?;
    if f <= 0.0 {
        return Ok(0.0);
    }
    let t = v1 * f;
    Ok(reg_inc_beta_unchecked(0.5 * v1, 0.5 * v2, t / (t + v2)))
}

fn check_dof(v1: f64, v2: f64) -> Result<()> {
    if v1 >= 1.0 && v2 >= 1.0 && v1.is_finite() && v2.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "degrees of freedom must be >= 1, got ({v1}, {v2})"
        )))
    }
}

/// The `q`-quantile of `F(v1, v2)`, through the beta inverse:
/// if `X ~ Beta(v1/2, v2/2)` then `v2 X / (v1 (1 - X))` is F-distributed.
pub fn f_quantile(q: f64, v1: f64, v2: f64) -> Result<f64> {
    check_dof(v1, v2)?;
    check_level(q)?;
    if q <= 0.5 {
        let x = reg_inc_beta_inv(0.5 * v1, 0.5 * v2, q)?;
        Ok(v2 * x / (v1 * (1.0 - x)))
    } else {
        // Work with 1 - X directly so the upper tail keeps its digits.
        let y = reg_inc_beta_inv(0.5 * v2, 0.5 * v1, 1.0 - q)?;
        Ok(v2 * (1.0 - y) / (v1 * y))
    }
}
