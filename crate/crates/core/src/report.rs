//! Text tables: the published comparison tables and renderings of the
//! comparison and accuracy rows in several output formats.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    accuracy_study, comparison_table, fixed_truncated, paper_cases, AccuracyRow, Approximation,
    BoundSide, ComparisonRow, Exclusion, StudyConfig, AUDIT_DECIMALS,
};
use crate::error::{Error, Result};
use crate::intervals::{
    clopper_pearson, exact_interval_from_grid, normal_interval_with, Alpha, Interval,
};
use crate::likelihood::Observation;
use crate::quadrature::PrefixMassGrid;

/// Decimals shown for interval limits in the comparison tables (truncated).
pub const LIMIT_DECIMALS: u32 = 5;
/// Decimals shown for error percentages (rounded).
pub const PERCENT_DECIMALS: usize = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Human,
    Csv,
    Json,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "human" | "text" => Ok(OutputFormat::Human),
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            other => Err(Error::domain(format!("unknown format '{other}'"))),
        }
    }
}

/// A rendered table: a title, column headers and pre-formatted cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        Table {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Human => self.render_human(),
            OutputFormat::Markdown => self.render_markdown(),
            OutputFormat::Csv => self.render_csv(),
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("table serializes");
                s.push('\n');
                s
            }
        }
    }

    fn render_human(&self) -> String {
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| r[c].len())
                    .chain([self.columns[c].len()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect();
            padded.join("  ").trim_end().to_string()
        };
        let mut out = format!("{}\n", self.title);
        out.push_str(&line(&self.columns));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }

    fn render_markdown(&self) -> String {
        let mut out = format!("**{}**\n\n| {} |\n", self.title, self.columns.join(" | "));
        out.push_str(&format!("|{}\n", "---:|".repeat(self.columns.len())));
        for row in &self.rows {
            out.push_str(&format!("| {} |\n", row.join(" | ")));
        }
        out
    }

    fn render_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }
}

/// The eight published tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PaperTable {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
}

enum TableKind {
    Limits,
    Errors(Approximation),
    Accuracy,
}

impl PaperTable {
    pub const ALL: [PaperTable; 8] = [
        PaperTable::I,
        PaperTable::II,
        PaperTable::III,
        PaperTable::IV,
        PaperTable::V,
        PaperTable::VI,
        PaperTable::VII,
        PaperTable::VIII,
    ];

    pub fn alpha(self) -> Alpha {
        let a = match self {
            PaperTable::I | PaperTable::II | PaperTable::III | PaperTable::VII => 0.05,
            _ => 0.01,
        };
        Alpha::new(a).expect("valid alpha")
    }

    fn kind(self) -> TableKind {
        match self {
            PaperTable::I | PaperTable::IV => TableKind::Limits,
            PaperTable::II | PaperTable::V => TableKind::Errors(Approximation::Normal),
            PaperTable::III | PaperTable::VI => TableKind::Errors(Approximation::ClopperPearson),
            PaperTable::VII | PaperTable::VIII => TableKind::Accuracy,
        }
    }

    pub fn title(self) -> String {
        let level = format!("{}%", percent_label(self.alpha()));
        match self.kind() {
            TableKind::Limits => {
                format!("Table {self}. Lower and upper limits of the {level} interval")
            }
            TableKind::Errors(Approximation::Normal) => {
                format!(
                    "Table {self}. Error percentage of the {level} interval (normal approximation)"
                )
            }
            TableKind::Errors(Approximation::ClopperPearson) => {
                format!("Table {self}. Error percentage of the {level} interval (Clopper-Pearson)")
            }
            TableKind::Accuracy => {
                format!("Table {self}. Accuracy of the {level} quadrature interval")
            }
        }
    }
}

fn percent_label(alpha: Alpha) -> String {
    let pct = alpha.confidence() * 100.0;
    let rounded = (pct * 1e6).round() / 1e6;
    format!("{rounded}")
}

impl fmt::Display for PaperTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PaperTable::I => "I",
            PaperTable::II => "II",
            PaperTable::III => "III",
            PaperTable::IV => "IV",
            PaperTable::V => "V",
            PaperTable::VI => "VI",
            PaperTable::VII => "VII",
            PaperTable::VIII => "VIII",
        })
    }
}

impl FromStr for PaperTable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        PaperTable::ALL
            .into_iter()
            .enumerate()
            .find(|(i, table)| table.to_string() == t || (i + 1).to_string() == t)
            .map(|(_, table)| table)
            .ok_or_else(|| Error::domain(format!("unknown table '{s}' (expected I through VIII)")))
    }
}

/// All three intervals for one observation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitRow {
    pub obs: Observation,
    pub exact: Interval,
    pub normal: Interval,
    pub clopper_pearson: Interval,
}

pub fn limit_rows(cases: &[Observation], alpha: Alpha, cfg: &StudyConfig) -> Result<Vec<LimitRow>> {
    cases
        .par_iter()
        .map(|&obs| {
            let grid = PrefixMassGrid::build_with(obs, cfg.quadrature)?;
            Ok(LimitRow {
                obs,
                exact: exact_interval_from_grid(&grid, alpha)?,
                normal: normal_interval_with(obs, alpha, cfg.critical_value),
                clopper_pearson: clopper_pearson(obs, alpha),
            })
        })
        .collect()
}

fn limit(v: f64) -> String {
    fixed_truncated(v, LIMIT_DECIMALS)
}

pub fn limits_table(title: impl Into<String>, rows: &[LimitRow]) -> Table {
    let mut table = Table::new(
        title,
        &[
            "n",
            "x",
            "numeric lower",
            "numeric upper",
            "normal lower",
            "normal upper",
            "clopper-pearson lower",
            "clopper-pearson upper",
        ],
    );
    for r in rows {
        table.rows.push(vec![
            r.obs.n().to_string(),
            r.obs.x().to_string(),
            limit(r.exact.lower()),
            limit(r.exact.upper()),
            limit(r.normal.lower()),
            limit(r.normal.upper()),
            limit(r.clopper_pearson.lower()),
            limit(r.clopper_pearson.upper()),
        ]);
    }
    table
}

fn exclusion_label(e: Option<Exclusion>) -> &'static str {
    match e {
        None => "",
        Some(Exclusion::Degenerate) => "degenerate",
        Some(Exclusion::NonPositive) => "at or below 0",
        Some(Exclusion::AtLeastOne) => "at or above 1",
    }
}

/// Error-percentage table: lower-side rows first, then upper-side rows.
/// Excluded rows are dropped unless `include_excluded` is set.
pub fn comparison_rows_table(
    title: impl Into<String>,
    rows: &[ComparisonRow],
    include_excluded: bool,
) -> Table {
    let mut columns = vec!["side", "n", "x", "numeric", "approximation", "error [%]"];
    if include_excluded {
        columns.push("excluded");
    }
    let mut table = Table::new(title, &columns);
    for side in [BoundSide::Lower, BoundSide::Upper] {
        for r in rows.iter().filter(|r| r.side == side) {
            if r.is_excluded() && !include_excluded {
                continue;
            }
            let mut cells = vec![
                side.name().to_string(),
                r.obs.n().to_string(),
                r.obs.x().to_string(),
                limit(r.exact),
                limit(r.approx),
                r.error_percent
                    .map(|e| format!("{e:.PERCENT_DECIMALS$}"))
                    .unwrap_or_default(),
            ];
            if include_excluded {
                cells.push(exclusion_label(r.excluded).to_string());
            }
            table.rows.push(cells);
        }
    }
    table
}

/// One line per observation with both sides at `k` and `2k`.
pub fn accuracy_rows_table(title: impl Into<String>, rows: &[AccuracyRow]) -> Table {
    let k = rows.first().map(|r| r.k).unwrap_or(0);
    let lk = format!("lower k={k}");
    let l2k = format!("lower k={}", 2 * k);
    let uk = format!("upper k={k}");
    let u2k = format!("upper k={}", 2 * k);
    let mut table = Table::new(
        title,
        &[
            "n",
            "x",
            &lk,
            &l2k,
            "lower first diff",
            &uk,
            &u2k,
            "upper first diff",
        ],
    );
    let digits = |v: f64| fixed_truncated(v, AUDIT_DECIMALS);
    let diff = |d: Option<u32>| d.map(|d| d.to_string()).unwrap_or_else(|| "-".into());
    for pair in rows.chunks(2) {
        let (lower, upper) = match pair {
            [a, b] if a.side == BoundSide::Lower && b.side == BoundSide::Upper => (a, b),
            _ => continue,
        };
        table.rows.push(vec![
            lower.obs.n().to_string(),
            lower.obs.x().to_string(),
            digits(lower.value_k),
            digits(lower.value_2k),
            diff(lower.first_differing_decimal),
            digits(upper.value_k),
            digits(upper.value_2k),
            diff(upper.first_differing_decimal),
        ]);
    }
    table
}

/// Builds one of the published tables over its published case list.
pub fn paper_table(table: PaperTable, cfg: &StudyConfig) -> Result<Table> {
    let cases = paper_cases();
    let alpha = table.alpha();
    Ok(match table.kind() {
        TableKind::Limits => limits_table(table.title(), &limit_rows(&cases, alpha, cfg)?),
        TableKind::Errors(method) => {
            let rows = comparison_table(&cases, alpha, method, cfg)?;
            comparison_rows_table(table.title(), &rows, false)
        }
        TableKind::Accuracy => {
            accuracy_rows_table(table.title(), &accuracy_study(&cases, alpha, cfg)?)
        }
    })
}
