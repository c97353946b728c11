//! Command-line front end. The `laplace-ci` binary forwards to [`run`].

use std::ffi::OsString;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{accuracy_study, comparison_table, paper_cases, Approximation, StudyConfig};
use crate::error::{Error, Result};
use crate::export::{render_records, write_export, ExportFormat, ExportRecord, ExportSpec, Fixed8};
use crate::intervals::{
    applicability, clopper_pearson, exact_interval_with, normal_interval_with,
    one_sided_interval_with, Alpha, ApplicabilityRules, ConditionReport, CriticalValue, Interval,
    Method, Side, Threshold,
};
use crate::likelihood::Observation;
use crate::precision::Precision;
use crate::quadrature::{QuadratureConfig, DEFAULT_SUBDIVISIONS};
use crate::report::{
    accuracy_rows_table, comparison_rows_table, paper_table, OutputFormat, PaperTable,
};

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_case(s: &str) -> std::result::Result<Observation, String> {
    let (n, x) = s
        .split_once(':')
        .ok_or_else(|| format!("expected n:x, got '{s}'"))?;
    let n = n
        .trim()
        .parse()
        .map_err(|_| format!("invalid n in '{s}'"))?;
    let x = x
        .trim()
        .parse()
        .map_err(|_| format!("invalid x in '{s}'"))?;
    Observation::new(n, x).map_err(|e| e.to_string())
}

fn parse_n_range(s: &str) -> std::result::Result<RangeInclusive<u64>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got '{s}'"))?;
    let a: u64 = a
        .trim()
        .parse()
        .map_err(|_| format!("invalid range start in '{s}'"))?;
    let b: u64 = b
        .trim()
        .trim_start_matches('=')
        .parse()
        .map_err(|_| format!("invalid range end in '{s}'"))?;
    if a > b {
        return Err(format!("empty range '{s}'"));
    }
    Ok(a..=b)
}

#[derive(Debug, Parser)]
#[command(
    name = "laplace-ci",
    version,
    about = "Confidence intervals for a binomial proportion by likelihood quadrature",
    after_help = "Set LAPLACE_CI_PRECISION=extended[:bits] for the software floating-point backend."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One interval for one observation.
    Interval(IntervalArgs),
    /// Reproduce one of the published tables I through VIII.
    Table(TableArgs),
    /// Error percentages of an approximation against the quadrature interval.
    Compare(CompareArgs),
    /// Agreement of the quadrature interval at k and 2k subdivisions.
    Accuracy(AccuracyArgs),
    /// Write every (n, x, alpha, method) row over a range of sample sizes.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct QuadratureArgs {
    /// Simpson subdivisions of [0, 1] (even).
    #[arg(long, default_value_t = DEFAULT_SUBDIVISIONS)]
    pub k: usize,
}

impl QuadratureArgs {
    fn config(&self) -> Result<QuadratureConfig> {
        Ok(QuadratureConfig::new(self.k)?.with_precision(Precision::from_env()?))
    }
}

#[derive(Debug, Args)]
pub struct IntervalArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub x: u64,
    #[arg(long, default_value = "0.05", value_parser = parse::<Alpha>)]
    pub alpha: Alpha,
    /// exact-numeric, normal or clopper-pearson.
    #[arg(long, default_value = "exact-numeric", value_parser = parse::<Method>)]
    pub method: Method,
    /// One-sided interval (quadrature only): `upper` gives [0, c], `lower` gives [c, 1].
    #[arg(long, value_parser = parse::<Side>)]
    pub side: Option<Side>,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
    /// Critical value for the normal method: exact or tabulated.
    #[arg(long, default_value = "exact", value_parser = parse::<CriticalValue>)]
    pub critical_value: CriticalValue,
    /// Count threshold for the normal-approximation conditions (5 or 10).
    #[arg(long, default_value = "5", value_parser = parse::<Threshold>)]
    pub threshold: Threshold,
    #[arg(long, default_value = "human", value_parser = parse::<OutputFormat>)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Table number, I through VIII.
    #[arg(long, value_parser = parse::<PaperTable>)]
    pub paper_table: PaperTable,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
    #[arg(long, default_value = "tabulated", value_parser = parse::<CriticalValue>)]
    pub critical_value: CriticalValue,
    #[arg(long, default_value = "human", value_parser = parse::<OutputFormat>)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct CaseArgs {
    /// Observations as n:x (repeatable or comma separated).
    #[arg(long = "case", value_delimiter = ',', value_parser = parse_case)]
    pub cases: Vec<Observation>,
    /// Every x from 0 to n for each given n (repeatable or comma separated).
    #[arg(long = "n", value_delimiter = ',')]
    pub n_values: Vec<u64>,
}

impl CaseArgs {
    /// Explicit cases, then full sweeps; the published cases when neither is given.
    fn resolve(&self) -> Result<Vec<Observation>> {
        let mut cases = self.cases.clone();
        for &n in &self.n_values {
            for x in 0..=n {
                cases.push(Observation::new(n, x)?);
            }
        }
        Ok(if cases.is_empty() {
            paper_cases()
        } else {
            cases
        })
    }
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub cases: CaseArgs,
    #[arg(long, default_value = "0.05", value_parser = parse::<Alpha>)]
    pub alpha: Alpha,
    /// normal or clopper-pearson.
    #[arg(long, default_value = "normal", value_parser = parse::<Method>)]
    pub method: Method,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
    #[arg(long, default_value = "exact", value_parser = parse::<CriticalValue>)]
    pub critical_value: CriticalValue,
    /// Also list rows excluded from the error percentages.
    #[arg(long)]
    pub include_excluded: bool,
    #[arg(long, default_value = "human", value_parser = parse::<OutputFormat>)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct AccuracyArgs {
    #[command(flatten)]
    pub cases: CaseArgs,
    #[arg(long, default_value = "0.05", value_parser = parse::<Alpha>)]
    pub alpha: Alpha,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
    #[arg(long, default_value = "human", value_parser = parse::<OutputFormat>)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// Sample sizes (repeatable or comma separated).
    #[arg(long = "n", value_delimiter = ',')]
    pub n_values: Vec<u64>,
    /// Inclusive range of sample sizes, e.g. 1..50.
    #[arg(long, value_parser = parse_n_range)]
    pub n_range: Option<RangeInclusive<u64>>,
    #[arg(long, value_delimiter = ',', default_values = ["0.05", "0.01"], value_parser = parse::<Alpha>)]
    pub alpha: Vec<Alpha>,
    #[arg(
        long,
        value_delimiter = ',',
        default_values = ["exact-numeric", "normal", "clopper-pearson"],
        value_parser = parse::<Method>
    )]
    pub method: Vec<Method>,
    #[command(flatten)]
    pub quadrature: QuadratureArgs,
    #[arg(long, default_value = "exact", value_parser = parse::<CriticalValue>)]
    pub critical_value: CriticalValue,
    #[arg(long, default_value = "csv", value_parser = parse::<ExportFormat>)]
    pub format: ExportFormat,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code: 0 success, 2 invalid input, 3 resource limit, 4 I/O.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return if code == 0 { 0 } else { 2 };
        }
    };
    match execute(cli.command) {
        Ok(text) => match stdout.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(stderr, "error: writing output: {e}");
                4
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command and returns what it prints.
pub fn execute(command: Command) -> Result<String> {
    match command {
        Command::Interval(a) => interval(a),
        Command::Table(a) => {
            let cfg = StudyConfig {
                quadrature: a.quadrature.config()?,
                critical_value: a.critical_value,
            };
            Ok(paper_table(a.paper_table, &cfg)?.render(a.format))
        }
        Command::Compare(a) => {
            let method = Approximation::try_from(a.method)?;
            let cfg = StudyConfig {
                quadrature: a.quadrature.config()?,
                critical_value: a.critical_value,
            };
            let rows = comparison_table(&a.cases.resolve()?, a.alpha, method, &cfg)?;
            let title = format!(
                "Error percentage of {} against the quadrature interval, alpha = {}",
                method.method(),
                a.alpha
            );
            Ok(comparison_rows_table(title, &rows, a.include_excluded).render(a.format))
        }
        Command::Accuracy(a) => {
            let cfg = StudyConfig {
                quadrature: a.quadrature.config()?,
                ..StudyConfig::default()
            };
            let rows = accuracy_study(&a.cases.resolve()?, a.alpha, &cfg)?;
            let title = format!("Quadrature interval at k and 2k, alpha = {}", a.alpha);
            Ok(accuracy_rows_table(title, &rows).render(a.format))
        }
        Command::Export(a) => {
            let mut n_values = a.n_values;
            n_values.extend(a.n_range.into_iter().flatten());
            let spec = ExportSpec {
                n_values,
                alphas: a.alpha,
                methods: a.method,
                quadrature: a.quadrature.config()?,
                critical_value: a.critical_value,
                format: a.format,
                out: a.out,
            };
            let manifest = write_export(&spec)?;
            Ok(format!(
                "wrote {} rows to {}\n",
                manifest.rows,
                spec.out.display()
            ))
        }
    }
}

#[derive(Serialize)]
struct IntervalReport {
    n: u64,
    x: u64,
    alpha: Alpha,
    method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    side: Option<Side>,
    lower: Fixed8,
    upper: Fixed8,
    lower_full: f64,
    upper_full: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    precision: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    critical_value: Option<CriticalValue>,
    flags: Vec<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    applicability: Option<ConditionReport>,
}

fn interval(a: IntervalArgs) -> Result<String> {
    let obs = Observation::new(a.n, a.x)?;
    if a.side.is_some() && a.method != Method::ExactNumeric {
        return Err(Error::domain(
            "--side applies to the exact-numeric method only",
        ));
    }
    let quadrature = match a.method {
        Method::ExactNumeric => Some(a.quadrature.config()?),
        _ => None,
    };
    let ci: Interval = match (a.method, a.side) {
        (Method::ExactNumeric, Some(side)) => {
            one_sided_interval_with(obs, a.alpha, side, quadrature.expect("quadrature method"))?
        }
        (Method::ExactNumeric, None) => {
            exact_interval_with(obs, a.alpha, quadrature.expect("quadrature method"))?
        }
        (Method::Normal, _) => normal_interval_with(obs, a.alpha, a.critical_value),
        (Method::ClopperPearson, _) => clopper_pearson(obs, a.alpha),
    };
    let record = ExportRecord {
        n: obs.n(),
        x: obs.x(),
        alpha: a.alpha,
        method: a.method,
        lower: Fixed8::truncate(ci.lower()),
        upper: Fixed8::truncate(ci.upper()),
        k: quadrature.map(|q| q.k()),
        flags: ci.flags(),
    };
    let report = IntervalReport {
        n: obs.n(),
        x: obs.x(),
        alpha: a.alpha,
        method: a.method,
        side: a.side,
        lower: record.lower,
        upper: record.upper,
        lower_full: ci.lower(),
        upper_full: ci.upper(),
        k: record.k,
        precision: quadrature.map(|q| q.precision().to_string()),
        critical_value: (a.method == Method::Normal).then_some(a.critical_value),
        flags: ci.flags().tokens(),
        applicability: (a.method == Method::Normal)
            .then(|| applicability(obs, ApplicabilityRules::new(a.threshold))),
    };
    Ok(match a.format {
        OutputFormat::Csv => render_records(&[record], ExportFormat::Csv),
        OutputFormat::Markdown => render_records(&[record], ExportFormat::Markdown),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
        OutputFormat::Human => human_interval(&report),
    })
}

fn human_interval(r: &IntervalReport) -> String {
    let mut lines = vec![
        format!("observation     n={}, x={}", r.n, r.x),
        format!("method          {}", r.method),
        format!("alpha           {}", r.alpha),
    ];
    if let Some(side) = r.side {
        let side = match side {
            Side::UpperBound => "upper bound",
            Side::LowerBound => "lower bound",
        };
        lines.push(format!("one-sided       {side}"));
    }
    if let (Some(k), Some(p)) = (r.k, &r.precision) {
        lines.push(format!("k               {k} ({p})"));
    }
    if let Some(c) = r.critical_value {
        lines.push(format!("critical value  {c}"));
    }
    lines.push(format!("lower           {}", r.lower));
    lines.push(format!("upper           {}", r.upper));
    let flags = if r.flags.is_empty() {
        "none".to_string()
    } else {
        r.flags.join(", ")
    };
    lines.push(format!("flags           {flags}"));
    if let Some(report) = &r.applicability {
        lines.push(format!(
            "conditions      threshold {}",
            report.rules.threshold.value()
        ));
        for c in &report.conditions {
            lines.push(format!(
                "  ({}) {:<5} {}{}",
                c.id,
                if c.holds { "yes" } else { "no" },
                c.description,
                if c.heuristic {
                    " [evaluated at p-hat]"
                } else {
                    ""
                }
            ));
        }
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}
