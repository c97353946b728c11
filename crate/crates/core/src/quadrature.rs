//! Composite Simpson integration of the binomial likelihood over `[0, 1]`.
//!
//! The unit interval is cut into `k` equal cells of width `h = 1/k`. Each
//! cell is integrated by three-point Simpson using its own midpoint, so the
//! grid carries a prefix mass at every cell boundary (`2k + 1` likelihood
//! evaluations in total). Interval bounds are read off where the prefix mass
//! crosses a tail target.
//!
//! In native precision the likelihood is evaluated as
//! `exp(ln L(p) - ln L(x/n))`, i.e. relative to its maximum, and the common
//! factor is applied once; this keeps every evaluation in range for large `n`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use astro_float::{BigFloat, RoundingMode};

use crate::error::{Error, Result};
use crate::likelihood::{LogKernel, Observation};
use crate::precision::Precision;

/// `2^20`, the subdivision count used for the published tables.
pub const DEFAULT_SUBDIVISIONS: usize = 1 << 20;

/// Upper bound on `k`.
pub const MAX_SUBDIVISIONS: usize = 1 << 26;

// Log tables larger than this are not memoized.
const MAX_CACHED_TABLE: usize = 1 << 22;

pub fn check_subdivisions(k: usize) -> Result<()> {
    if k > MAX_SUBDIVISIONS {
        return Err(Error::Resource(format!(
            "k = {k} exceeds the limit of {MAX_SUBDIVISIONS} subdivisions"
        )));
    }
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "k must be even and at least 2, got {k}"
        )));
    }
    Ok(())
}

/// Grid size and arithmetic backend for the likelihood quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadratureConfig {
    k: usize,
    precision: Precision,
}

impl QuadratureConfig {
    pub fn new(k: usize) -> Result<Self> {
        check_subdivisions(k)?;
        Ok(QuadratureConfig {
            k,
            precision: Precision::Native,
        })
    }

    pub fn with_precision(mut self, precision: Precision) -> Self {
        self.precision = precision;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn h(&self) -> f64 {
        1.0 / self.k as f64
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// The same configuration with `k` doubled.
    pub fn doubled(&self) -> Result<Self> {
        Ok(QuadratureConfig::new(self.k * 2)?.with_precision(self.precision))
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            k: DEFAULT_SUBDIVISIONS,
            precision: Precision::Native,
        }
    }
}

/// Composite Simpson's rule for `∫_a^b f` with `k` (even) sub-intervals:
/// `h/3 [f(y0) + 4 Σ f(y_odd) + 2 Σ f(y_even) + f(yk)]`.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, k: usize) -> Result<f64> {
    check_subdivisions(k)?;
    let h = (b - a) / k as f64;
    let mut odd = CompensatedSum::default();
    let mut even = CompensatedSum::default();
    for i in 1..k {
        let v = f(a + i as f64 * h);
        if i % 2 == 1 {
            odd.add(v);
        } else {
            even.add(v);
        }
    }
    Ok(h / 3.0 * (f(a) + 4.0 * odd.value() + 2.0 * even.value() + f(b)))
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `ln(j / 2k)` for `j = 0..=2k`, i.e. the logarithms of every cell boundary
/// and midpoint. `1 - j/2k = (2k - j)/2k` exactly, so one table serves both
/// `ln p` and `ln(1 - p)`.
enum LnHalfGrid {
    Table(Arc<Vec<f64>>),
    Direct { two_k: f64 },
}

fn ln_half_step(j: usize, two_k: f64) -> f64 {
    (j as f64 / two_k).ln()
}

impl LnHalfGrid {
    fn for_k(k: usize) -> Self {
        if k > MAX_CACHED_TABLE {
            return LnHalfGrid::Direct {
                two_k: (2 * k) as f64,
            };
        }
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<f64>>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(table) = cache.lock().expect("log table cache poisoned").get(&k) {
            return LnHalfGrid::Table(Arc::clone(table));
        }
        // Built outside the lock; concurrent builders for the same k produce
        // identical tables and the last insert wins.
        let two_k = (2 * k) as f64;
        let table: Arc<Vec<f64>> = Arc::new((0..=2 * k).map(|j| ln_half_step(j, two_k)).collect());
        let mut guard = cache.lock().expect("log table cache poisoned");
        if guard.len() >= 8 {
            guard.clear();
        }
        guard.insert(k, Arc::clone(&table));
        LnHalfGrid::Table(table)
    }

    #[inline]
    fn get(&self, j: usize) -> f64 {
        match self {
            LnHalfGrid::Table(t) => t[j],
            LnHalfGrid::Direct { two_k } => ln_half_step(j, *two_k),
        }
    }
}

/// Walks the grid left to right, calling `visit(i, prefix_i)` for every cell
/// boundary `i = 0..=k`, and returns the total mass.
fn scan_prefix(obs: Observation, cfg: QuadratureConfig, visit: impl FnMut(usize, f64)) -> f64 {
    match cfg.precision {
        Precision::Native => scan_native(obs, cfg.k, visit),
        Precision::Extended { bits } => scan_extended(obs, cfg.k, bits, visit),
    }
}

const UNDERFLOW_EXPONENT: f64 = -746.0;

fn scan_native(obs: Observation, k: usize, mut visit: impl FnMut(usize, f64)) -> f64 {
    let kernel = LogKernel::new(obs);
    let mode = kernel.power_terms_at_mode();
    let logs = LnHalfGrid::for_k(k);
    let two_k = 2 * k;
    let g = |j: usize| {
        let e = kernel.power_terms(logs.get(j), logs.get(two_k - j)) - mode;
        // exp underflows to exactly zero below about -745.13
        if e < UNDERFLOW_EXPONENT {
            0.0
        } else {
            e.exp()
        }
    };
    let factor = (kernel.ln_choose() + mode).exp() / (6.0 * k as f64);

    let mut acc = CompensatedSum::default();
    let mut prev = 0.0;
    visit(0, 0.0);
    let mut left = g(0);
    for i in 0..k {
        let mid = g(2 * i + 1);
        let right = g(2 * i + 2);
        acc.add(left + 4.0 * mid + right);
        let value = (factor * acc.value()).max(prev);
        visit(i + 1, value);
        prev = value;
        left = right;
    }
    prev
}

/// Nearest `f64` to a software float (via its top 64 mantissa bits).
fn big_to_f64(v: &BigFloat) -> f64 {
    match v.as_raw_parts() {
        Some((words, _, sign, exponent, _)) => {
            let top = *words.last().unwrap_or(&0);
            if top == 0 {
                return 0.0;
            }
            let magnitude = top as f64 * 2f64.powi(exponent - 64);
            if sign.is_negative() {
                -magnitude
            } else {
                magnitude
            }
        }
        None => f64::NAN,
    }
}

fn scan_extended(
    obs: Observation,
    k: usize,
    bits: usize,
    mut visit: impl FnMut(usize, f64),
) -> f64 {
    let rm = RoundingMode::ToEven;
    let x = obs.x() as usize;
    let y = obs.failures() as usize;

    let mut choose = BigFloat::from_u64(1, bits);
    for i in 0..x.min(y) as u64 {
        choose = choose
            .mul(&BigFloat::from_u64(obs.n() - i, bits), bits, rm)
            .div(&BigFloat::from_u64(i + 1, bits), bits, rm);
    }
    let two_k = (2 * k) as u64;
    let denom = BigFloat::from_u64(two_k, bits);
    let likelihood = |j: u64| -> BigFloat {
        let p = BigFloat::from_u64(j, bits).div(&denom, bits, rm);
        let q = BigFloat::from_u64(two_k - j, bits).div(&denom, bits, rm);
        choose
            .mul(&p.powi(x, bits, rm), bits, rm)
            .mul(&q.powi(y, bits, rm), bits, rm)
    };
    let weight = BigFloat::from_u64(1, bits).div(&BigFloat::from_u64(6 * k as u64, bits), bits, rm);
    let four = BigFloat::from_u64(4, bits);

    let mut acc = BigFloat::from_u64(0, bits);
    let mut prev = 0.0;
    visit(0, 0.0);
    let mut left = likelihood(0);
    for i in 0..k as u64 {
        let mid = likelihood(2 * i + 1);
        let right = likelihood(2 * i + 2);
        let cell = left
            .add(&four.mul(&mid, bits, rm), bits, rm)
            .add(&right, bits, rm);
        acc = acc.add(&cell, bits, rm);
        let value = big_to_f64(&acc.mul(&weight, bits, rm)).max(prev);
        visit(i as usize + 1, value);
        prev = value;
        left = right;
    }
    prev
}

/// Prefix masses of `L(p; n, x)` at every cell boundary of a `k`-cell grid.
#[derive(Debug, Clone)]
pub struct PrefixMassGrid {
    obs: Observation,
    k: usize,
    prefix: Vec<f64>,
}

impl PrefixMassGrid {
    /// Native-precision grid with `k` cells.
    pub fn build(obs: Observation, k: usize) -> Result<Self> {
        Self::build_with(obs, QuadratureConfig::new(k)?)
    }

    pub fn build_with(obs: Observation, cfg: QuadratureConfig) -> Result<Self> {
        check_subdivisions(cfg.k)?;
        let mut prefix = Vec::new();
        prefix
            .try_reserve_exact(cfg.k + 1)
            .map_err(|e| Error::Resource(format!("prefix array for k = {}: {e}", cfg.k)))?;
        scan_prefix(obs, cfg, |_, v| prefix.push(v));
        Ok(PrefixMassGrid {
            obs,
            k: cfg.k,
            prefix,
        })
    }

    pub fn observation(&self) -> Observation {
        self.obs
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn h(&self) -> f64 {
        1.0 / self.k as f64
    }

    /// `prefix[i] ≈ ∫₀^{i h} L(p; n, x) dp`.
    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    pub fn total(&self) -> f64 {
        self.prefix[self.k]
    }

    /// Grid coordinate of index `i`.
    pub fn point(&self, i: usize) -> f64 {
        i as f64 / self.k as f64
    }

    fn check_target(&self, target: f64) -> Result<()> {
        if target > 0.0 && target < self.total() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "tail target {target} outside (0, {})",
                self.total()
            )))
        }
    }

    /// Smallest index whose prefix mass reaches `target`.
    pub fn lower_crossing(&self, target: f64) -> Result<usize> {
        self.check_target(target)?;
        Ok(self.prefix.partition_point(|&v| v < target))
    }

    /// Largest index whose remaining mass `total - prefix[i]` is still at
    /// least `target`.
    pub fn upper_crossing(&self, target: f64) -> Result<usize> {
        self.check_target(target)?;
        let total = self.total();
        Ok(self.prefix.partition_point(|&v| total - v >= target) - 1)
    }
}

/// Crossing indices found by [`stream_crossings`], one per requested tail
/// fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct TailCrossings {
    pub total: f64,
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
}

/// Locates the lower and upper crossings for each tail fraction
/// (`target = fraction * total`) without storing the prefix array.
///
/// Two passes over the grid: the first finds the total, the second tracks the
/// crossings. Results are identical to [`PrefixMassGrid::lower_crossing`] and
/// [`PrefixMassGrid::upper_crossing`] for the same configuration.
pub fn stream_crossings(
    obs: Observation,
    cfg: QuadratureConfig,
    fractions: &[f64],
) -> Result<TailCrossings> {
    check_subdivisions(cfg.k)?;
    if let Some(f) = fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
        return Err(Error::domain(format!("tail fraction {f} outside (0, 1)")));
    }
    let total = scan_prefix(obs, cfg, |_, _| {});
    let targets: Vec<f64> = fractions.iter().map(|f| f * total).collect();
    let mut lower = vec![usize::MAX; targets.len()];
    let mut upper = vec![0; targets.len()];
    scan_prefix(obs, cfg, |i, v| {
        for (j, &t) in targets.iter().enumerate() {
            if lower[j] == usize::MAX && v >= t {
                lower[j] = i;
            }
            if total - v >= t {
                upper[j] = i;
            }
        }
    });
    Ok(TailCrossings {
        total,
        lower,
        upper,
    })
}
