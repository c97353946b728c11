//! Compares the native and software floating-point quadrature backends.
//!
//!     cargo run --release --example extended_precision

use laplace_ci::quadrature::stream_crossings;
use laplace_ci::{Observation, Precision, QuadratureConfig};

fn main() -> laplace_ci::Result<()> {
    let native = QuadratureConfig::new(1 << 12)?;
    let extended = native.with_precision(Precision::extended(256)?);
    for (n, x) in [(5, 0), (1000, 500)] {
        let obs = Observation::new(n, x)?;
        for cfg in [native, extended] {
            let c = stream_crossings(obs, cfg, &[0.025])?;
            println!(
                "{obs} {:>12}: total {:.17e}, crossings {} / {}",
                cfg.precision().to_string(),
                c.total,
                c.lower[0],
                c.upper[0]
            );
        }
    }
    Ok(())
}
