//! Writes every interval for a range of sample sizes to CSV with a manifest,
//! then reads the file back.
//!
//!     cargo run --example export_dataset -- /tmp/intervals.csv

use laplace_ci::export::{manifest_path, parse_csv, write_export, ExportSpec};
use laplace_ci::QuadratureConfig;

fn main() -> laplace_ci::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("laplace-ci-intervals.csv"));

    let mut spec = ExportSpec::new((1..=30).collect(), &out);
    spec.quadrature = QuadratureConfig::new(1 << 16)?;
    let manifest = write_export(&spec)?;
    println!("{} rows -> {}", manifest.rows, out.display());
    println!("manifest -> {}", manifest_path(&out).display());

    let text = std::fs::read_to_string(&out).expect("export readable");
    let records = parse_csv(&text)?;
    for r in records.iter().filter(|r| r.n == 30 && r.x == 0) {
        println!(
            "{:>16} {} [{}, {}] {}",
            r.method, r.alpha, r.lower, r.upper, r.flags
        );
    }
    Ok(())
}
