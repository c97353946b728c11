//! The binomial likelihood `L(p; n, x) = C(n, x) p^x (1 - p)^(n - x)` and the
//! two point estimators built on it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{ln_choose_unchecked, Probability};

/// `x` successes observed in `n` Bernoulli trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Observation {
    n: u64,
    x: u64,
}

impl Observation {
    pub fn new(n: u64, x: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("n must be at least 1"));
        }
        if x > n {
            return Err(Error::domain("x must not exceed n"));
        }
        Ok(Observation { n, x })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn failures(&self) -> u64 {
        self.n - self.x
    }

    /// The observation with successes and failures swapped.
    pub fn reflected(&self) -> Self {
        Observation {
            n: self.n,
            x: self.n - self.x,
        }
    }
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}, x={}", self.n, self.x)
    }
}

/// `a ln b` with the convention `0 ln 0 = 0`.
#[inline]
fn xlogy(a: f64, ln_b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * ln_b
    }
}

/// Pre-computed pieces of `ln L(p; n, x)` for repeated evaluation.
///
/// The two power terms are added as a single commutative pair, so evaluating
/// `(n, x)` at `p` and `(n, n - x)` at `1 - p` gives bit-identical results.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LogKernel {
    ln_choose: f64,
    successes: f64,
    failures: f64,
}

impl LogKernel {
    pub(crate) fn new(obs: Observation) -> Self {
        LogKernel {
            ln_choose: ln_choose_unchecked(obs.n, obs.x),
            successes: obs.x as f64,
            failures: obs.failures() as f64,
        }
    }

    pub(crate) fn ln_choose(&self) -> f64 {
        self.ln_choose
    }

    /// `x ln p + (n - x) ln(1 - p)` from the two logarithms.
    #[inline]
    pub(crate) fn power_terms(&self, ln_p: f64, ln_q: f64) -> f64 {
        xlogy(self.successes, ln_p) + xlogy(self.failures, ln_q)
    }

    /// The power terms at the mode `p = x / n`.
    pub(crate) fn power_terms_at_mode(&self) -> f64 {
        let n = self.successes + self.failures;
        let term = |a: f64| if a == 0.0 { 0.0 } else { a * (a / n).ln() };
        term(self.successes) + term(self.failures)
    }
}

/// `ln L(p; n, x)`; `-inf` where the likelihood vanishes (e.g. `p = 0`, `x > 0`).
pub fn log_likelihood(obs: Observation, p: f64) -> Result<f64> {
    Probability::new(p)?;
    let kernel = LogKernel::new(obs);
    Ok(kernel.ln_choose + kernel.power_terms(p.ln(), (-p).ln_1p()))
}

/// The maximum-likelihood estimate `x / n`.
pub fn mle_estimate(obs: Observation) -> Probability {
    Probability::new(obs.x as f64 / obs.n as f64).expect("x <= n")
}

/// The Laplace-smoothed estimate `(x + 1) / (n + 2)`, the posterior mean
/// under a uniform prior. Always strictly inside `(0, 1)`.
pub fn laplace_estimate(obs: Observation) -> Probability {
    Probability::new((obs.x as f64 + 1.0) / (obs.n as f64 + 2.0)).expect("strictly interior")
}

/// `∫₀¹ L(p; n, x) dp = 1 / (n + 1)`, independent of `x`.
pub fn analytic_total_mass(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    Ok(1.0 / (n as f64 + 1.0))
}
