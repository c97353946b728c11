//! Error percentage of the normal and Clopper-Pearson bounds against the
//! quadrature interval over every x for a given n.
//!
//!     cargo run --example compare_methods -- 30

use laplace_ci::analysis::{comparison_table, Approximation, StudyConfig};
use laplace_ci::report::{comparison_rows_table, OutputFormat};
use laplace_ci::{Alpha, Observation};

fn main() -> laplace_ci::Result<()> {
    let n: u64 = std::env::args()
        .nth(1)
        .map_or(30, |a| a.parse().expect("integer n"));
    let cases = (0..=n)
        .map(|x| Observation::new(n, x))
        .collect::<laplace_ci::Result<Vec<_>>>()?;
    let cfg = StudyConfig::default().with_k(1 << 18)?;
    let alpha = Alpha::new(0.05)?;

    for method in [Approximation::Normal, Approximation::ClopperPearson] {
        let rows = comparison_table(&cases, alpha, method, &cfg)?;
        let title = format!("{} against quadrature, n = {n}", method.method());
        println!(
            "{}",
            comparison_rows_table(title, &rows, true).render(OutputFormat::Human)
        );
    }
    Ok(())
}
