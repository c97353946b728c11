//! Recomputes intervals with twice the subdivisions and reports the first
//! decimal that changes.
//!
//!     cargo run --example accuracy_audit

use laplace_ci::analysis::{accuracy_study, paper_cases, StudyConfig};
use laplace_ci::report::{accuracy_rows_table, OutputFormat};
use laplace_ci::{Alpha, Observation};

fn main() -> laplace_ci::Result<()> {
    let mut cases = paper_cases();
    cases.extend([Observation::new(50, 1)?, Observation::new(200, 100)?]);
    let cfg = StudyConfig::default();
    for a in [0.05, 0.01] {
        let rows = accuracy_study(&cases, Alpha::new(a)?, &cfg)?;
        let title = format!("alpha = {a}");
        println!(
            "{}",
            accuracy_rows_table(title, &rows).render(OutputFormat::Human)
        );
    }
    Ok(())
}
