//! Interval estimates for a binomial proportion: the equal-tailed interval of
//! the normalized likelihood (found by quadrature), its one-sided variant, the
//! normal-approximation (Wald) interval and the Clopper–Pearson interval.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{mle_estimate, Observation};
use crate::quadrature::{stream_crossings, PrefixMassGrid, QuadratureConfig};
use crate::specfun::{f_quantile, normal_quantile, reg_inc_beta_inv};

/// Two-sided miss probability; the confidence level is `1 - alpha`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Alpha(value))
        } else {
            Err(Error::domain(format!(
                "alpha must lie in (0, 1), got {value}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn confidence(self) -> f64 {
        1.0 - self.0
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Alpha::new(v)
    }
}

impl From<Alpha> for f64 {
    fn from(a: Alpha) -> f64 {
        a.0
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::domain(format!("invalid alpha '{s}'")))?;
        Alpha::new(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactNumeric,
    Normal,
    ClopperPearson,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::ExactNumeric, Method::Normal, Method::ClopperPearson];

    pub fn name(self) -> &'static str {
        match self {
            Method::ExactNumeric => "exact-numeric",
            Method::Normal => "normal",
            Method::ClopperPearson => "clopper-pearson",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" | "exact-numeric" | "numeric" => Ok(Method::ExactNumeric),
            "normal" | "wald" => Ok(Method::Normal),
            "clopper-pearson" | "cp" => Ok(Method::ClopperPearson),
            other => Err(Error::domain(format!("unknown method '{other}'"))),
        }
    }
}

/// Range conditions attached to an interval. Each flag is set exactly when
/// its numeric condition holds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntervalFlags {
    /// `lower < 0`
    pub lower_out_of_range: bool,
    /// `upper > 1`
    pub upper_out_of_range: bool,
    /// `lower == 0`
    pub lower_degenerate_zero: bool,
    /// `upper == 1`
    pub upper_degenerate_one: bool,
}

impl IntervalFlags {
    const TOKENS: [&'static str; 4] = [
        "lower-out-of-range",
        "upper-out-of-range",
        "lower-degenerate-zero",
        "upper-degenerate-one",
    ];

    pub fn from_bounds(lower: f64, upper: f64) -> Self {
        IntervalFlags {
            lower_out_of_range: lower < 0.0,
            upper_out_of_range: upper > 1.0,
            lower_degenerate_zero: lower == 0.0,
            upper_degenerate_one: upper == 1.0,
        }
    }

    fn bits(&self) -> [bool; 4] {
        [
            self.lower_out_of_range,
            self.upper_out_of_range,
            self.lower_degenerate_zero,
            self.upper_degenerate_one,
        ]
    }

    pub fn is_empty(&self) -> bool {
        !self.bits().iter().any(|b| *b)
    }

    pub fn tokens(&self) -> Vec<&'static str> {
        Self::TOKENS
            .iter()
            .zip(self.bits())
            .filter_map(|(t, set)| set.then_some(*t))
            .collect()
    }
}

/// Semicolon-joined tokens, empty when no flag is set.
impl fmt::Display for IntervalFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens().join(";"))
    }
}

impl FromStr for IntervalFlags {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut flags = IntervalFlags::default();
        for token in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            match token {
                "lower-out-of-range" => flags.lower_out_of_range = true,
                "upper-out-of-range" => flags.upper_out_of_range = true,
                "lower-degenerate-zero" => flags.lower_degenerate_zero = true,
                "upper-degenerate-one" => flags.upper_degenerate_one = true,
                other => return Err(Error::domain(format!("unknown flag '{other}'"))),
            }
        }
        Ok(flags)
    }
}

/// Which end of a one-sided interval is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    /// `[0, c]`: all of alpha in the right tail.
    UpperBound,
    /// `[c, 1]`: all of alpha in the left tail.
    LowerBound,
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "upper" | "upper-bound" => Ok(Side::UpperBound),
            "lower" | "lower-bound" => Ok(Side::LowerBound),
            other => Err(Error::domain(format!("unknown side '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lower: f64,
    upper: f64,
    method: Method,
    alpha: Alpha,
    #[serde(skip_serializing_if = "Option::is_none")]
    one_sided: Option<Side>,
    flags: IntervalFlags,
}

impl Interval {
    fn new(lower: f64, upper: f64, method: Method, alpha: Alpha) -> Self {
        debug_assert!(lower <= upper, "{lower} > {upper}");
        Interval {
            lower,
            upper,
            method,
            alpha,
            one_sided: None,
            flags: IntervalFlags::from_bounds(lower, upper),
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha
    }

    /// `Some` for intervals from [`one_sided_interval`].
    pub fn one_sided(&self) -> Option<Side> {
        self.one_sided
    }

    pub fn flags(&self) -> IntervalFlags {
        self.flags
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Closed-interval membership.
    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }

    /// Whether `other` lies inside this interval.
    pub fn encloses(&self, other: &Interval) -> bool {
        self.lower <= other.lower && other.upper <= self.upper
    }

    /// Bounds clipped to `[0, 1]`, flags recomputed. Table output never uses
    /// this; it is for callers that need a valid probability range.
    pub fn clamped(&self) -> Interval {
        let mut out = *self;
        out.lower = self.lower.clamp(0.0, 1.0);
        out.upper = self.upper.clamp(0.0, 1.0);
        out.flags = IntervalFlags::from_bounds(out.lower, out.upper);
        out
    }
}

/// Source of the normal critical value `z_{α/2}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalValue {
    /// The normal quantile at full precision.
    #[default]
    Exact,
    /// The quantile rounded to two decimals as printed in statistical tables
    /// (1.96 at 95%, 2.58 at 99%).
    Tabulated,
}

impl CriticalValue {
    pub fn z(self, alpha: Alpha) -> f64 {
        let z = normal_quantile(1.0 - 0.5 * alpha.value()).expect("alpha in (0, 1)");
        match self {
            CriticalValue::Exact => z,
            CriticalValue::Tabulated => (z * 100.0).round() / 100.0,
        }
    }
}

impl FromStr for CriticalValue {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(CriticalValue::Exact),
            "tabulated" | "table" => Ok(CriticalValue::Tabulated),
            other => Err(Error::domain(format!(
                "unknown critical value source '{other}'"
            ))),
        }
    }
}

impl fmt::Display for CriticalValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CriticalValue::Exact => "exact",
            CriticalValue::Tabulated => "tabulated",
        })
    }
}

/// Equal-tailed interval of the normalized likelihood, with `k` cells.
pub fn exact_interval(obs: Observation, alpha: Alpha, k: usize) -> Result<Interval> {
    exact_interval_with(obs, alpha, QuadratureConfig::new(k)?)
}

pub fn exact_interval_with(
    obs: Observation,
    alpha: Alpha,
    cfg: QuadratureConfig,
) -> Result<Interval> {
    let grid = PrefixMassGrid::build_with(obs, cfg)?;
    exact_interval_from_grid(&grid, alpha)
}

/// Reads the equal-tailed interval off an existing grid: the lower bound is
/// the first grid point whose left mass reaches `alpha/2 * total`, the upper
/// bound the last grid point whose right mass still does.
pub fn exact_interval_from_grid(grid: &PrefixMassGrid, alpha: Alpha) -> Result<Interval> {
    let target = 0.5 * alpha.value() * grid.total();
    let lower = grid.point(grid.lower_crossing(target)?);
    let upper = grid.point(grid.upper_crossing(target)?);
    Ok(Interval::new(lower, upper, Method::ExactNumeric, alpha))
}

/// Equal-tailed intervals for several alphas in one streaming pass pair,
/// without holding the prefix array. Same results as [`exact_interval_with`].
pub fn exact_intervals_streaming(
    obs: Observation,
    alphas: &[Alpha],
    cfg: QuadratureConfig,
) -> Result<Vec<Interval>> {
    let fractions: Vec<f64> = alphas.iter().map(|a| 0.5 * a.value()).collect();
    let crossings = stream_crossings(obs, cfg, &fractions)?;
    let k = cfg.k() as f64;
    Ok(alphas
        .iter()
        .enumerate()
        .map(|(j, &alpha)| {
            Interval::new(
                crossings.lower[j] as f64 / k,
                crossings.upper[j] as f64 / k,
                Method::ExactNumeric,
                alpha,
            )
        })
        .collect())
}

/// One-sided interval with all of `alpha` in one tail of the normalized
/// likelihood: `[0, c]` for [`Side::UpperBound`], `[c, 1]` for
/// [`Side::LowerBound`].
pub fn one_sided_interval(
    obs: Observation,
    alpha: Alpha,
    side: Side,
    k: usize,
) -> Result<Interval> {
    one_sided_interval_with(obs, alpha, side, QuadratureConfig::new(k)?)
}

pub fn one_sided_interval_with(
    obs: Observation,
    alpha: Alpha,
    side: Side,
    cfg: QuadratureConfig,
) -> Result<Interval> {
    let grid = PrefixMassGrid::build_with(obs, cfg)?;
    let target = alpha.value() * grid.total();
    let mut interval = match side {
        Side::UpperBound => {
            let c = grid.point(grid.upper_crossing(target)?);
            Interval::new(0.0, c, Method::ExactNumeric, alpha)
        }
        Side::LowerBound => {
            let c = grid.point(grid.lower_crossing(target)?);
            Interval::new(c, 1.0, Method::ExactNumeric, alpha)
        }
    };
    interval.one_sided = Some(side);
    Ok(interval)
}

/// Wald interval `p̂ ± z √(p̂(1-p̂)/n)` with the exact critical value. Bounds
/// are returned unclamped.
pub fn normal_interval(obs: Observation, alpha: Alpha) -> Interval {
    normal_interval_with(obs, alpha, CriticalValue::Exact)
}

pub fn normal_interval_with(obs: Observation, alpha: Alpha, critical: CriticalValue) -> Interval {
    let p = mle_estimate(obs).value();
    let half_width = critical.z(alpha) * (p * (1.0 - p) / obs.n() as f64).sqrt();
    Interval::new(p - half_width, p + half_width, Method::Normal, alpha)
}

/// Clopper–Pearson interval via beta quantiles:
/// `lower = B⁻¹(α/2; x, n-x+1)`, `upper = B⁻¹(1-α/2; x+1, n-x)`, with
/// `lower = 0` at `x = 0` and `upper = 1` at `x = n`.
pub fn clopper_pearson(obs: Observation, alpha: Alpha) -> Interval {
    let (n, x) = (obs.n() as f64, obs.x() as f64);
    let half = 0.5 * alpha.value();
    let lower = if obs.x() == 0 {
        0.0
    } else {
        reg_inc_beta_inv(x, n - x + 1.0, half).expect("valid shapes")
    };
    let upper = if obs.x() == obs.n() {
        1.0
    } else {
        reg_inc_beta_inv(x + 1.0, n - x, 1.0 - half).expect("valid shapes")
    };
    Interval::new(lower, upper, Method::ClopperPearson, alpha)
}

/// The same bounds through F quantiles, with `v1 = 2(n-x+1)`, `v2 = 2x`,
/// `v3 = 2(x+1)`, `v4 = 2(n-x)`:
/// `lower = v2 / (v2 + v1 F(v1, v2))`, `upper = v3 F(v3, v4) / (v4 + v3 F(v3, v4))`,
/// where `F(a, b)` is the upper `α/2` point of the F distribution.
pub fn clopper_pearson_f_form(obs: Observation, alpha: Alpha) -> (f64, f64) {
    let (n, x) = (obs.n() as f64, obs.x() as f64);
    let level = 1.0 - 0.5 * alpha.value();
    let lower = if obs.x() == 0 {
        0.0
    } else {
        let (v1, v2) = (2.0 * (n - x + 1.0), 2.0 * x);
        let f = f_quantile(level, v1, v2).expect("valid degrees of freedom");
        v2 / (v2 + v1 * f)
    };
    let upper = if obs.x() == obs.n() {
        1.0
    } else {
        let (v3, v4) = (2.0 * (x + 1.0), 2.0 * (n - x));
        let f = f_quantile(level, v3, v4).expect("valid degrees of freedom");
        v3 * f / (v4 + v3 * f)
    };
    (lower, upper)
}

/// Count threshold used by the normal-approximation rules of thumb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Threshold {
    Five,
    Ten,
}

impl Threshold {
    pub fn value(self) -> f64 {
        match self {
            Threshold::Five => 5.0,
            Threshold::Ten => 10.0,
        }
    }
}

impl FromStr for Threshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "5" => Ok(Threshold::Five),
            "10" => Ok(Threshold::Ten),
            other => Err(Error::domain(format!(
                "threshold must be 5 or 10, got '{other}'"
            ))),
        }
    }
}

/// Settings for [`applicability`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApplicabilityRules {
    pub threshold: Threshold,
    /// Smallest `n` counted as "quite large".
    pub large_n: u64,
    /// Estimates below this count as "very small p".
    pub small_p: f64,
}

impl ApplicabilityRules {
    pub fn new(threshold: Threshold) -> Self {
        ApplicabilityRules {
            threshold,
            large_n: 30,
            small_p: 0.01,
        }
    }
}

impl Default for ApplicabilityRules {
    fn default() -> Self {
        ApplicabilityRules::new(Threshold::Five)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Condition {
    pub id: u8,
    pub description: &'static str,
    pub holds: bool,
    /// Stated for the unknown true `p`; evaluated at `p̂ = x/n`.
    pub heuristic: bool,
}

/// Outcome of the six rules of thumb for the normal approximation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub observation: Observation,
    pub rules: ApplicabilityRules,
    pub conditions: Vec<Condition>,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }

    pub fn condition(&self, id: u8) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.id == id)
    }

    pub fn failed(&self) -> Vec<u8> {
        self.conditions
            .iter()
            .filter(|c| !c.holds)
            .map(|c| c.id)
            .collect()
    }
}

/// Evaluates the normal-approximation conditions
/// (1) `np, n(1-p) >= t`, (2) `np(1-p) >= t`, (3) `np̂, n(1-p̂) >= t`,
/// (4) `p̂ ± 3 √(p̂(1-p̂)/n)` inside `(0, 1)`, (5) `n` large,
/// (6) `n >= 50` unless `p` is very small.
pub fn applicability(obs: Observation, rules: ApplicabilityRules) -> ConditionReport {
    let n = obs.n() as f64;
    let p = mle_estimate(obs).value();
    let t = rules.threshold.value();
    let sigma = (p * (1.0 - p) / n).sqrt();
    let counts = n * p >= t && n * (1.0 - p) >= t;
    let condition = |id, description, holds, heuristic| Condition {
        id,
        description,
        holds,
        heuristic,
    };
    ConditionReport {
        observation: obs,
        rules,
        conditions: vec![
            condition(1, "np and n(1-p) at least the threshold", counts, true),
            condition(
                2,
                "np(1-p) at least the threshold",
                n * p * (1.0 - p) >= t,
                true,
            ),
            condition(
                3,
                "n p-hat and n(1-p-hat) at least the threshold",
                counts,
                false,
            ),
            condition(
                4,
                "p-hat +/- 3 sigma-hat excludes 0 and 1",
                p - 3.0 * sigma > 0.0 && p + 3.0 * sigma < 1.0,
                false,
            ),
            condition(5, "n quite large", obs.n() >= rules.large_n, false),
            condition(
                6,
                "n >= 50 unless p is very small",
                obs.n() >= 50 || p < rules.small_p,
                true,
            ),
        ],
    }
}
