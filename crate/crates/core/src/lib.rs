//! Confidence intervals for a binomial proportion.
//!
//! The central quantity is the equal-tailed interval obtained by integrating
//! the binomial likelihood in `p` numerically: the lower limit leaves
//! `alpha / 2` of the likelihood mass to its left and the upper limit leaves
//! the same mass to its right. The normal approximation and the
//! Clopper-Pearson interval are provided for comparison.
//!
//! ```
//! use laplace_ci::{exact_interval, Alpha, Observation};
//!
//! let obs = Observation::new(5, 2).unwrap();
//! let ci = exact_interval(obs, Alpha::new(0.05).unwrap(), 1 << 16).unwrap();
//! assert!(ci.lower() < 0.4 && 0.4 < ci.upper());
//! ```

pub mod analysis;
pub mod cli;
pub mod error;
pub mod export;
pub mod intervals;
pub mod likelihood;
pub mod precision;
pub mod quadrature;
pub mod report;
pub mod specfun;

pub use error::{Error, Result};
pub use intervals::{
    clopper_pearson, exact_interval, exact_interval_with, normal_interval, normal_interval_with,
    one_sided_interval, Alpha, CriticalValue, Interval, IntervalFlags, Method, Side,
};
pub use likelihood::{laplace_estimate, mle_estimate, Observation};
pub use precision::Precision;
pub use quadrature::{PrefixMassGrid, QuadratureConfig, DEFAULT_SUBDIVISIONS};
