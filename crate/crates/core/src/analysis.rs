//! Comparison of the approximate intervals against the quadrature interval,
//! and the grid-doubling accuracy audit.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::{
    clopper_pearson, exact_interval_from_grid, normal_interval_with, Alpha, CriticalValue,
    Interval, Method,
};
use crate::likelihood::Observation;
use crate::quadrature::{PrefixMassGrid, QuadratureConfig};

/// Observations used throughout the published comparison:
/// `n = 5` with every `x`, and `n = 1000` with `x ∈ {0, 500, 1000}`.
pub fn paper_cases() -> Vec<Observation> {
    let small = (0..=5).map(|x| (5, x));
    let large = [(1000, 0), (1000, 500), (1000, 1000)];
    small
        .chain(large)
        .map(|(n, x)| Observation::new(n, x).expect("valid case"))
        .collect()
}

/// `(approx - exact) / exact × 100`.
pub fn error_percentage(exact: f64, approx: f64) -> Result<f64> {
    if exact == 0.0 {
        return Err(Error::domain(
            "error percentage undefined for an exact value of 0",
        ));
    }
    Ok((approx - exact) / exact * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSide {
    Lower,
    Upper,
}

impl BoundSide {
    pub fn of(self, interval: &Interval) -> f64 {
        match self {
            BoundSide::Lower => interval.lower(),
            BoundSide::Upper => interval.upper(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundSide::Lower => "lower",
            BoundSide::Upper => "upper",
        }
    }
}

/// The closed-form methods compared against the quadrature interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Approximation {
    Normal,
    ClopperPearson,
}

impl Approximation {
    pub fn method(self) -> Method {
        match self {
            Approximation::Normal => Method::Normal,
            Approximation::ClopperPearson => Method::ClopperPearson,
        }
    }
}

impl TryFrom<Method> for Approximation {
    type Error = Error;

    fn try_from(m: Method) -> Result<Self> {
        match m {
            Method::Normal => Ok(Approximation::Normal),
            Method::ClopperPearson => Ok(Approximation::ClopperPearson),
            Method::ExactNumeric => Err(Error::domain(
                "the exact-numeric interval is the reference, not an approximation",
            )),
        }
    }
}

/// Why a bound is left out of the error-percentage comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exclusion {
    /// Forced to 0 or 1 at `x = 0` / `x = n`.
    Degenerate,
    /// At or below 0.
    NonPositive,
    /// At or above 1.
    AtLeastOne,
}

/// Settings shared by the comparison and accuracy studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyConfig {
    pub quadrature: QuadratureConfig,
    pub critical_value: CriticalValue,
}

impl StudyConfig {
    /// `k = 2^20`, native precision, two-decimal critical values: the
    /// settings behind the published tables.
    pub fn paper() -> Self {
        StudyConfig {
            quadrature: QuadratureConfig::default(),
            critical_value: CriticalValue::Tabulated,
        }
    }

    pub fn with_k(mut self, k: usize) -> Result<Self> {
        self.quadrature = QuadratureConfig::new(k)?.with_precision(self.quadrature.precision());
        Ok(self)
    }
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            quadrature: QuadratureConfig::default(),
            critical_value: CriticalValue::Exact,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub obs: Observation,
    pub alpha: Alpha,
    pub side: BoundSide,
    pub method: Approximation,
    pub exact: f64,
    pub approx: f64,
    /// `None` when the row is excluded.
    pub error_percent: Option<f64>,
    pub excluded: Option<Exclusion>,
}

impl ComparisonRow {
    fn new(
        obs: Observation,
        side: BoundSide,
        method: Approximation,
        exact: &Interval,
        approx: &Interval,
    ) -> Result<Self> {
        let exact_value = side.of(exact);
        let approx_value = side.of(approx);
        let flags = approx.flags();
        let degenerate = match side {
            BoundSide::Lower => flags.lower_degenerate_zero,
            BoundSide::Upper => flags.upper_degenerate_one,
        };
        let excluded = if degenerate {
            Some(Exclusion::Degenerate)
        } else if approx_value <= 0.0 {
            Some(Exclusion::NonPositive)
        } else if approx_value >= 1.0 {
            Some(Exclusion::AtLeastOne)
        } else {
            None
        };
        let error_percent = match excluded {
            Some(_) => None,
            None => Some(error_percentage(exact_value, approx_value)?),
        };
        Ok(ComparisonRow {
            obs,
            alpha: exact.alpha(),
            side,
            method,
            exact: exact_value,
            approx: approx_value,
            error_percent,
            excluded,
        })
    }

    pub fn is_excluded(&self) -> bool {
        self.excluded.is_some()
    }
}

fn approximate(
    obs: Observation,
    alpha: Alpha,
    method: Approximation,
    cfg: &StudyConfig,
) -> Interval {
    match method {
        Approximation::Normal => normal_interval_with(obs, alpha, cfg.critical_value),
        Approximation::ClopperPearson => clopper_pearson(obs, alpha),
    }
}

/// One row per `(case, side)`, lower before upper, in input order. Excluded
/// rows are kept and marked.
pub fn comparison_table(
    cases: &[Observation],
    alpha: Alpha,
    method: Approximation,
    cfg: &StudyConfig,
) -> Result<Vec<ComparisonRow>> {
    let per_case: Vec<Result<[ComparisonRow; 2]>> = cases
        .par_iter()
        .map(|&obs| {
            let grid = PrefixMassGrid::build_with(obs, cfg.quadrature)?;
            let exact = exact_interval_from_grid(&grid, alpha)?;
            let approx = approximate(obs, alpha, method, cfg);
            Ok([
                ComparisonRow::new(obs, BoundSide::Lower, method, &exact, &approx)?,
                ComparisonRow::new(obs, BoundSide::Upper, method, &exact, &approx)?,
            ])
        })
        .collect();
    let mut rows = Vec::with_capacity(2 * cases.len());
    for pair in per_case {
        rows.extend(pair?);
    }
    Ok(rows)
}

/// Number of decimals examined by the accuracy audit.
pub const AUDIT_DECIMALS: u32 = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyRow {
    pub obs: Observation,
    pub alpha: Alpha,
    pub side: BoundSide,
    pub k: usize,
    pub value_k: f64,
    pub value_2k: f64,
    /// First decimal position (1-based, 0 for the integer part) where the
    /// truncated 8-decimal renderings differ.
    pub first_differing_decimal: Option<u32>,
}

/// Recomputes each quadrature interval with `2k` cells and records where the
/// 8-decimal values change.
pub fn accuracy_study(
    cases: &[Observation],
    alpha: Alpha,
    cfg: &StudyConfig,
) -> Result<Vec<AccuracyRow>> {
    let coarse = cfg.quadrature;
    let fine = coarse.doubled()?;
    let per_case: Vec<Result<[AccuracyRow; 2]>> = cases
        .par_iter()
        .map(|&obs| {
            let at_k = exact_interval_from_grid(&PrefixMassGrid::build_with(obs, coarse)?, alpha)?;
            let at_2k = exact_interval_from_grid(&PrefixMassGrid::build_with(obs, fine)?, alpha)?;
            let row = |side: BoundSide| {
                let (a, b) = (side.of(&at_k), side.of(&at_2k));
                AccuracyRow {
                    obs,
                    alpha,
                    side,
                    k: coarse.k(),
                    value_k: a,
                    value_2k: b,
                    first_differing_decimal: first_differing_decimal(a, b, AUDIT_DECIMALS),
                }
            };
            Ok([row(BoundSide::Lower), row(BoundSide::Upper)])
        })
        .collect();
    let mut rows = Vec::with_capacity(2 * cases.len());
    for pair in per_case {
        rows.extend(pair?);
    }
    Ok(rows)
}

/// `v` scaled by `10^places` and truncated toward zero. Products within
/// floating-point noise of an integer are taken as that integer.
pub(crate) fn truncated_units(v: f64, places: u32) -> i128 {
    let scaled = v * 10f64.powi(places as i32);
    let nearest = scaled.round();
    if (scaled - nearest).abs() <= 1e-12 * nearest.abs().max(1.0) {
        nearest as i128
    } else {
        scaled.trunc() as i128
    }
}

/// `v` truncated (not rounded) to `places` decimals.
pub fn truncate_decimals(v: f64, places: u32) -> f64 {
    truncated_units(v, places) as f64 / 10f64.powi(places as i32)
}

/// Fixed-point rendering of `v` truncated to `places` decimals.
pub fn fixed_truncated(v: f64, places: u32) -> String {
    format_units(truncated_units(v, places), places)
}

pub(crate) fn format_units(units: i128, places: u32) -> String {
    let sign = if units < 0 { "-" } else { "" };
    let magnitude = units.unsigned_abs();
    let base = 10u128.pow(places);
    if places == 0 {
        return format!("{sign}{magnitude}");
    }
    format!(
        "{sign}{}.{:0width$}",
        magnitude / base,
        magnitude % base,
        width = places as usize
    )
}

/// Position of the first differing decimal between the truncated renderings
/// of `a` and `b` (0 when the integer parts differ), or `None` when they
/// agree in all `places` decimals.
pub fn first_differing_decimal(a: f64, b: f64, places: u32) -> Option<u32> {
    let (sa, sb) = (fixed_truncated(a, places), fixed_truncated(b, places));
    let (ia, fa) = sa.split_once('.').unwrap_or((&sa, ""));
    let (ib, fb) = sb.split_once('.').unwrap_or((&sb, ""));
    if ia != ib {
        return Some(0);
    }
    fa.bytes()
        .zip(fb.bytes())
        .position(|(x, y)| x != y)
        .map(|i| i as u32 + 1)
}
