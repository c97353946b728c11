//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's special functions.

#![allow(dead_code)]

/// `ln m!` for `m = 0..=max` by direct summation.
pub fn ln_factorials(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for i in 1..=max {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

/// Binomial tail oracle: `P(Bin(m, p) in range)` by summing terms in the
/// log domain.
fn binomial_sum(lf: &[f64], m: usize, p: f64, range: std::ops::RangeInclusive<usize>) -> f64 {
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    range
        .map(|j| {
            let lc = lf[m] - lf[j] - lf[m - j];
            let a = if j == 0 { 0.0 } else { j as f64 * lp };
            let b = if j == m { 0.0 } else { (m - j) as f64 * lq };
            (lc + a + b).exp()
        })
        .sum()
}

fn bisect(mut lo: f64, mut hi: f64, increasing: bool, f: impl Fn(f64) -> f64, target: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) < target) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Equal-tailed quantiles of `Beta(x + 1, n - x + 1)` at `alpha / 2` and
/// `1 - alpha / 2`, using `I_p(x+1, n-x+1) = P(Bin(n+1, p) >= x+1)`. Closed
/// forms at `x = 0` and `x = n`.
pub fn beta_equal_tailed(lf: &[f64], n: usize, x: usize, alpha: f64) -> (f64, f64) {
    let half = 0.5 * alpha;
    let m = n + 1;
    let e = 1.0 / m as f64;
    if x == 0 {
        return (1.0 - (1.0 - half).powf(e), 1.0 - half.powf(e));
    }
    if x == n {
        return (half.powf(e), (1.0 - half).powf(e));
    }
    let lower = bisect(0.0, 1.0, true, |p| binomial_sum(lf, m, p, x + 1..=m), half);
    let upper = bisect(0.0, 1.0, false, |p| binomial_sum(lf, m, p, 0..=x), half);
    (lower, upper)
}

/// One-sided quantile of `Beta(x + 1, n - x + 1)` at level `q`.
pub fn beta_quantile(lf: &[f64], n: usize, x: usize, q: f64) -> f64 {
    let m = n + 1;
    if q < 0.5 {
        bisect(0.0, 1.0, true, |p| binomial_sum(lf, m, p, x + 1..=m), q)
    } else {
        bisect(0.0, 1.0, false, |p| binomial_sum(lf, m, p, 0..=x), 1.0 - q)
    }
}
