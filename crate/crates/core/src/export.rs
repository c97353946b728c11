//! Dataset export: every `(n, x, alpha, method)` combination over a range of
//! sample sizes, written atomically with a manifest beside it.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{format_units, truncated_units};
use crate::error::{Error, Result};
use crate::intervals::{
    clopper_pearson, exact_intervals_streaming, normal_interval_with, Alpha, CriticalValue,
    Interval, IntervalFlags, Method,
};
use crate::likelihood::Observation;
use crate::quadrature::QuadratureConfig;

/// Decimals written for interval bounds.
pub const EXPORT_DECIMALS: u32 = 8;
const SCALE: f64 = 1e8;

pub const CSV_HEADER: [&str; 8] = ["n", "x", "alpha", "method", "lower", "upper", "k", "flags"];

/// A bound truncated to eight decimals, held as an integer count of `1e-8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fixed8(i64);

impl Fixed8 {
    pub fn truncate(v: f64) -> Self {
        Fixed8(truncated_units(v, EXPORT_DECIMALS) as i64)
    }

    pub fn units(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / SCALE
    }
}

impl fmt::Display for Fixed8 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_units(self.0 as i128, EXPORT_DECIMALS))
    }
}

impl FromStr for Fixed8 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::domain(format!("invalid fixed-point value '{s}'"));
        let t = s.trim();
        let (negative, t) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t),
        };
        let (int, frac) = t.split_once('.').unwrap_or((t, ""));
        if int.is_empty()
            || frac.len() > EXPORT_DECIMALS as usize
            || !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit())
        {
            return Err(bad());
        }
        let int: i64 = int.parse().map_err(|_| bad())?;
        let frac_units: i64 = if frac.is_empty() {
            0
        } else {
            let digits: i64 = frac.parse().map_err(|_| bad())?;
            digits * 10i64.pow(EXPORT_DECIMALS - frac.len() as u32)
        };
        let units = int
            .checked_mul(SCALE as i64)
            .and_then(|u| u.checked_add(frac_units))
            .ok_or_else(bad)?;
        Ok(Fixed8(if negative { -units } else { units }))
    }
}

impl Serialize for Fixed8 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.to_f64())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportFormat {
    #[default]
    Csv,
    Json,
    Markdown,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            "markdown" | "md" => Ok(ExportFormat::Markdown),
            other => Err(Error::domain(format!("unknown export format '{other}'"))),
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Json => "json",
            ExportFormat::Markdown => "markdown",
        })
    }
}

/// What to export and where.
#[derive(Debug, Clone)]
pub struct ExportSpec {
    pub n_values: Vec<u64>,
    pub alphas: Vec<Alpha>,
    pub methods: Vec<Method>,
    pub quadrature: QuadratureConfig,
    pub critical_value: CriticalValue,
    pub format: ExportFormat,
    pub out: PathBuf,
}

impl ExportSpec {
    pub fn new(n_values: Vec<u64>, out: impl Into<PathBuf>) -> Self {
        ExportSpec {
            n_values,
            alphas: vec![Alpha::new(0.05).unwrap(), Alpha::new(0.01).unwrap()],
            methods: Method::ALL.to_vec(),
            quadrature: QuadratureConfig::default(),
            critical_value: CriticalValue::default(),
            format: ExportFormat::default(),
            out: out.into(),
        }
    }

    /// Sorted, de-duplicated copy; fails on empty lists or `n = 0`.
    pub fn normalized(&self) -> Result<ExportSpec> {
        if self.n_values.is_empty() {
            return Err(Error::domain("no sample sizes to export"));
        }
        if self.n_values.contains(&0) {
            return Err(Error::domain("n must be at least 1"));
        }
        if self.alphas.is_empty() {
            return Err(Error::domain("no alpha values to export"));
        }
        if self.methods.is_empty() {
            return Err(Error::domain("no methods to export"));
        }
        let mut spec = self.clone();
        spec.n_values.sort_unstable();
        spec.n_values.dedup();
        spec.alphas.sort_by(|a, b| a.value().total_cmp(&b.value()));
        spec.alphas.dedup();
        spec.methods.sort_by_key(|m| m.name());
        spec.methods.dedup();
        Ok(spec)
    }

    /// Number of rows the export will contain.
    pub fn row_count(&self) -> u64 {
        let per_x = (self.alphas.len() * self.methods.len()) as u64;
        self.n_values.iter().map(|n| (n + 1) * per_x).sum()
    }
}

/// One exported row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExportRecord {
    pub n: u64,
    pub x: u64,
    pub alpha: Alpha,
    pub method: Method,
    pub lower: Fixed8,
    pub upper: Fixed8,
    /// Subdivisions used; present only for the quadrature method.
    pub k: Option<usize>,
    pub flags: IntervalFlags,
}

impl ExportRecord {
    fn from_interval(obs: Observation, interval: &Interval, k: Option<usize>) -> Self {
        ExportRecord {
            n: obs.n(),
            x: obs.x(),
            alpha: interval.alpha(),
            method: interval.method(),
            lower: Fixed8::truncate(interval.lower()),
            upper: Fixed8::truncate(interval.upper()),
            k,
            flags: interval.flags(),
        }
    }

    fn cells(&self) -> [String; 8] {
        [
            self.n.to_string(),
            self.x.to_string(),
            self.alpha.to_string(),
            self.method.to_string(),
            self.lower.to_string(),
            self.upper.to_string(),
            self.k.map(|k| k.to_string()).unwrap_or_default(),
            self.flags.to_string(),
        ]
    }
}

/// Rows for one observation, ordered by alpha then method name. `spec` must
/// be normalized.
fn records_for(obs: Observation, spec: &ExportSpec) -> Result<Vec<ExportRecord>> {
    let exact = if spec.methods.contains(&Method::ExactNumeric) {
        exact_intervals_streaming(obs, &spec.alphas, spec.quadrature)?
    } else {
        Vec::new()
    };
    let mut rows = Vec::with_capacity(spec.alphas.len() * spec.methods.len());
    for (j, &alpha) in spec.alphas.iter().enumerate() {
        for &method in &spec.methods {
            let record = match method {
                Method::ExactNumeric => {
                    ExportRecord::from_interval(obs, &exact[j], Some(spec.quadrature.k()))
                }
                Method::Normal => ExportRecord::from_interval(
                    obs,
                    &normal_interval_with(obs, alpha, spec.critical_value),
                    None,
                ),
                Method::ClopperPearson => {
                    ExportRecord::from_interval(obs, &clopper_pearson(obs, alpha), None)
                }
            };
            rows.push(record);
        }
    }
    Ok(rows)
}

/// All rows for sample size `n`, in export order. `spec` must be normalized.
fn records_for_n(n: u64, spec: &ExportSpec) -> Result<Vec<ExportRecord>> {
    let per_x: Vec<Vec<ExportRecord>> = (0..=n)
        .into_par_iter()
        .map(|x| records_for(Observation::new(n, x)?, spec))
        .collect::<Result<_>>()?;
    Ok(per_x.into_iter().flatten().collect())
}

/// Computes every row of the export in memory, in export order.
pub fn compute_records(spec: &ExportSpec) -> Result<Vec<ExportRecord>> {
    let spec = spec.normalized()?;
    let mut out = Vec::new();
    for &n in &spec.n_values {
        out.extend(records_for_n(n, &spec)?);
    }
    Ok(out)
}

struct RecordWriter<W: Write> {
    inner: W,
    format: ExportFormat,
    written: u64,
}

impl<W: Write> RecordWriter<W> {
    fn new(mut inner: W, format: ExportFormat) -> std::io::Result<Self> {
        match format {
            ExportFormat::Csv => writeln!(inner, "{}", CSV_HEADER.join(","))?,
            ExportFormat::Json => write!(inner, "[")?,
            ExportFormat::Markdown => {
                writeln!(inner, "| {} |", CSV_HEADER.join(" | "))?;
                writeln!(inner, "|{}", "---|".repeat(CSV_HEADER.len()))?;
            }
        }
        Ok(RecordWriter {
            inner,
            format,
            written: 0,
        })
    }

    fn write(&mut self, record: &ExportRecord) -> std::io::Result<()> {
        match self.format {
            ExportFormat::Csv => writeln!(self.inner, "{}", record.cells().join(","))?,
            ExportFormat::Markdown => writeln!(self.inner, "| {} |", record.cells().join(" | "))?,
            ExportFormat::Json => {
                let sep = if self.written == 0 { "\n  " } else { ",\n  " };
                let json = serde_json::to_string(record).map_err(std::io::Error::other)?;
                write!(self.inner, "{sep}{json}")?;
            }
        }
        self.written += 1;
        Ok(())
    }

    fn finish(mut self) -> std::io::Result<W> {
        if self.format == ExportFormat::Json {
            writeln!(self.inner, "\n]")?;
        }
        self.inner.flush()?;
        Ok(self.inner)
    }
}

/// Renders records in the given format; same bytes as [`write_export`].
pub fn render_records(records: &[ExportRecord], format: ExportFormat) -> String {
    let mut w = RecordWriter::new(Vec::new(), format).expect("in-memory write");
    for r in records {
        w.write(r).expect("in-memory write");
    }
    String::from_utf8(w.finish().expect("in-memory write")).expect("utf-8 output")
}

/// Parses CSV produced by [`render_records`].
pub fn parse_csv(text: &str) -> Result<Vec<ExportRecord>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::domain(format!("malformed CSV header: {e}")))?;
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::domain(format!(
            "unexpected CSV header, expected {}",
            CSV_HEADER.join(",")
        )));
    }
    reader
        .records()
        .enumerate()
        .map(|(i, row)| {
            let row =
                row.map_err(|e| Error::domain(format!("malformed CSV row {}: {e}", i + 1)))?;
            let field = |j: usize| &row[j];
            let int = |j: usize| {
                field(j)
                    .parse::<u64>()
                    .map_err(|_| Error::domain(format!("row {}: invalid {}", i + 1, CSV_HEADER[j])))
            };
            let k = match field(6) {
                "" => None,
                s => Some(
                    s.parse::<usize>()
                        .map_err(|_| Error::domain(format!("row {}: invalid k", i + 1)))?,
                ),
            };
            Ok(ExportRecord {
                n: int(0)?,
                x: int(1)?,
                alpha: field(2).parse()?,
                method: field(3).parse()?,
                lower: field(4).parse()?,
                upper: field(5).parse()?,
                k,
                flags: field(7).parse()?,
            })
        })
        .collect()
}

/// Sidecar metadata written next to an export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub format: String,
    pub k: usize,
    pub precision: String,
    pub critical_value: String,
    pub n_values: Vec<u64>,
    pub alphas: Vec<f64>,
    pub methods: Vec<String>,
    pub rows: u64,
}

/// Path of the manifest that accompanies `out`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn staging_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    out.with_file_name(name)
}

/// Writes `bytes` through `write` into a staging file and renames it over
/// `target`; the staging file is removed on failure.
fn write_atomically<T>(
    target: &Path,
    write: impl FnOnce(&mut BufWriter<fs::File>) -> Result<T>,
) -> Result<T> {
    let staging = staging_path(target);
    let result = (|| {
        let file = fs::File::create(&staging).map_err(|e| Error::io(&staging, e))?;
        let mut buf = BufWriter::new(file);
        let value = write(&mut buf)?;
        let file = buf
            .into_inner()
            .map_err(|e| Error::io(&staging, e.into_error()))?;
        file.sync_all().map_err(|e| Error::io(&staging, e))?;
        fs::rename(&staging, target).map_err(|e| Error::io(target, e))?;
        Ok(value)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&staging);
    }
    result
}

/// Computes and writes the export plus its manifest. Rows are produced one
/// sample size at a time, so memory stays proportional to the largest `n`.
/// On failure no output file is left behind.
pub fn write_export(spec: &ExportSpec) -> Result<Manifest> {
    let spec = spec.normalized()?;
    let out = spec.out.clone();
    let rows = write_atomically(&out, |buf| {
        let mut w = RecordWriter::new(buf, spec.format).map_err(|e| Error::io(&out, e))?;
        for &n in &spec.n_values {
            for record in records_for_n(n, &spec)? {
                w.write(&record).map_err(|e| Error::io(&out, e))?;
            }
        }
        let rows = w.written;
        w.finish().map_err(|e| Error::io(&out, e))?;
        Ok(rows)
    })?;

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        format: spec.format.to_string(),
        k: spec.quadrature.k(),
        precision: spec.quadrature.precision().to_string(),
        critical_value: spec.critical_value.to_string(),
        n_values: spec.n_values.clone(),
        alphas: spec.alphas.iter().map(|a| a.value()).collect(),
        methods: spec.methods.iter().map(|m| m.name().to_string()).collect(),
        rows,
    };
    let path = manifest_path(&out);
    let written = write_atomically(&path, |buf| {
        serde_json::to_writer_pretty(&mut *buf, &manifest)
            .map_err(|e| Error::io(&path, std::io::Error::other(e)))?;
        buf.write_all(b"\n").map_err(|e| Error::io(&path, e))
    });
    if let Err(e) = written {
        let _ = fs::remove_file(&out);
        return Err(e);
    }
    Ok(manifest)
}
