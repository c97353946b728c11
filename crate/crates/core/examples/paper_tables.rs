//! Prints the published comparison tables I through VIII.
//!
//!     cargo run --example paper_tables -- IV

use laplace_ci::analysis::StudyConfig;
use laplace_ci::report::{paper_table, OutputFormat, PaperTable};

fn main() -> laplace_ci::Result<()> {
    let tables: Vec<PaperTable> = match std::env::args().nth(1) {
        Some(name) => vec![name.parse()?],
        None => PaperTable::ALL.to_vec(),
    };
    let cfg = StudyConfig::paper();
    for t in tables {
        println!("{}", paper_table(t, &cfg)?.render(OutputFormat::Human));
    }
    Ok(())
}
