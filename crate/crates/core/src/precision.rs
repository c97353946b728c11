//! Arithmetic backend selection for the likelihood quadrature.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Environment variable read by [`Precision::from_env`].
pub const PRECISION_ENV: &str = "LAPLACE_CI_PRECISION";

pub const DEFAULT_EXTENDED_BITS: usize = 256;
pub const MIN_EXTENDED_BITS: usize = 64;
pub const MAX_EXTENDED_BITS: usize = 4096;

/// How likelihood values and prefix masses are accumulated.
///
/// `Native` evaluates the likelihood in the log domain in `f64` with
/// compensated summation. `Extended` evaluates `C(n, x) p^x (1 - p)^(n - x)`
/// directly in software floating point with the given mantissa width; it is
/// several hundred times slower and meant for audits at moderate `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Precision {
    #[default]
    Native,
    Extended {
        bits: usize,
    },
}

impl Precision {
    /// Reads [`PRECISION_ENV`]; unset or empty means [`Precision::Native`].
    pub fn from_env() -> Result<Self> {
        match std::env::var(PRECISION_ENV) {
            Ok(v) if !v.trim().is_empty() => v.parse(),
            _ => Ok(Precision::Native),
        }
    }

    pub fn extended(bits: usize) -> Result<Self> {
        if (MIN_EXTENDED_BITS..=MAX_EXTENDED_BITS).contains(&bits) {
            Ok(Precision::Extended { bits })
        } else {
            Err(Error::domain(format!(
                "extended precision must use {MIN_EXTENDED_BITS}..={MAX_EXTENDED_BITS} mantissa bits, got {bits}"
            )))
        }
    }
}

impl FromStr for Precision {
    type Err = Error;

    /// Accepts `native`, `extended` or `extended:<bits>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.split_once(':') {
            None if s == "native" => Ok(Precision::Native),
            None if s == "extended" => Precision::extended(DEFAULT_EXTENDED_BITS),
            Some(("extended", bits)) => {
                let bits = bits
                    .parse()
                    .map_err(|_| Error::domain(format!("invalid mantissa width '{bits}'")))?;
                Precision::extended(bits)
            }
            _ => Err(Error::domain(format!(
                "unknown precision mode '{s}' (expected native or extended:<bits>)"
            ))),
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Native => f.write_str("native"),
            Precision::Extended { bits } => write!(f, "extended:{bits}"),
        }
    }
}
