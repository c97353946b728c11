//! The three intervals for one observation, plus the normal-approximation
//! rules of thumb.
//!
//!     cargo run --example single_interval -- 20 3

use laplace_ci::intervals::{applicability, ApplicabilityRules, Threshold};
use laplace_ci::{
    clopper_pearson, exact_interval, laplace_estimate, normal_interval, Alpha, Observation,
};

fn main() -> laplace_ci::Result<()> {
    let mut args = std::env::args()
        .skip(1)
        .map(|a| a.parse::<u64>().expect("integer argument"));
    let n = args.next().unwrap_or(20);
    let x = args.next().unwrap_or(3);
    let obs = Observation::new(n, x)?;
    let alpha = Alpha::new(0.05)?;

    println!(
        "{obs}, Laplace estimate {:.6}",
        laplace_estimate(obs).value()
    );
    for ci in [
        exact_interval(obs, alpha, 1 << 20)?,
        normal_interval(obs, alpha),
        clopper_pearson(obs, alpha),
    ] {
        println!(
            "{:>16}  [{:.8}, {:.8}]  {}",
            ci.method().name(),
            ci.lower(),
            ci.upper(),
            ci.flags()
        );
    }

    let report = applicability(obs, ApplicabilityRules::new(Threshold::Five));
    println!(
        "normal approximation conditions failing: {:?}",
        report.failed()
    );
    Ok(())
}
