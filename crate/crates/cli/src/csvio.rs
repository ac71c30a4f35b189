//! CSV input and output.

use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use ipl_core::timeseries::RawSeries;

use crate::config::DataConfig;
use crate::error::{CliError, CliResult};

/// A numeric CSV table with its header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    /// Row-major values.
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }
}

/// Parses CSV text with a header row. Handles LF and CRLF endings, quoted
/// fields and `#` comment lines; rejects ragged rows and non-numeric cells
/// with the offending line number.
pub fn parse_table(text: &str, source: &str) -> CliResult<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::input(format!("{source}: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(CliError::input(format!("{source}: missing header row")));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { pos, expected_len, len } => CliError::input(format!(
                "{source}: line {}: expected {expected_len} fields, found {len}",
                pos.as_ref().map_or(0, |p| p.line())
            )),
            _ => CliError::input(format!("{source}: {e}")),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = rec
            .iter()
            .zip(&headers)
            .map(|(cell, h)| {
                cell.parse::<f64>().map_err(|_| {
                    CliError::input(format!("{source}: line {line}: column '{h}': invalid number '{cell}'"))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::input(format!("{source}: no data rows")));
    }
    Ok(Table { headers, rows })
}

pub fn read_table(path: &Path) -> CliResult<Table> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    parse_table(&text, &path.display().to_string())
}

/// Resolved column roles for a table.
#[derive(Debug, Clone, PartialEq)]
pub struct Columns {
    pub timestamp: Option<String>,
    pub features: Vec<String>,
    pub target: String,
}

pub fn resolve_columns(table: &Table, data: &DataConfig) -> CliResult<Columns> {
    let timestamp = match &data.timestamp_column {
        Some(c) => Some(c.clone()),
        None => table.column_index("timestamp").map(|_| "timestamp".to_string()),
    };
    let non_time: Vec<&String> = table
        .headers
        .iter()
        .filter(|h| Some(*h) != timestamp.as_ref())
        .collect();
    let target = match &data.target_column {
        Some(t) => t.clone(),
        None => non_time
            .last()
            .map(|s| s.to_string())
            .ok_or_else(|| CliError::input("no target column available"))?,
    };
    let features = match &data.feature_columns {
        Some(f) => f.clone(),
        None => non_time.iter().filter(|h| ***h != target).map(|s| s.to_string()).collect(),
    };
    if features.is_empty() {
        return Err(CliError::input("no feature columns available"));
    }
    Ok(Columns {
        timestamp,
        features,
        target,
    })
}

/// Builds the raw series for `cols`, naming every missing column.
pub fn series_from_table(table: &Table, cols: &Columns) -> CliResult<RawSeries> {
    let mut wanted: Vec<&String> = cols.features.iter().collect();
    wanted.push(&cols.target);
    if let Some(t) = &cols.timestamp {
        wanted.push(t);
    }
    let missing: Vec<&str> = wanted
        .iter()
        .filter(|c| table.column_index(c).is_none())
        .map(|c| c.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::input(format!("missing columns: {}", missing.join(", "))));
    }
    let idx = |c: &str| table.column_index(c).unwrap_or(0);
    let fidx: Vec<usize> = cols.features.iter().map(|c| idx(c)).collect();
    let n = table.rows.len();
    let x = DMatrix::from_fn(n, fidx.len(), |i, k| table.rows[i][fidx[k]]);
    let y = table.column(idx(&cols.target));
    let ts = cols.timestamp.as_ref().map(|t| table.column(idx(t)));
    Ok(RawSeries::new(ts, x, y, cols.features.clone(), cols.target.clone())?)
}

/// Writes rows as CSV, preceded by `# ` comment lines, to `path` or stdout.
pub fn write_csv(path: Option<&Path>, comments: &[String], headers: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let mut buf = Vec::new();
    for c in comments {
        buf.extend_from_slice(format!("# {c}\n").as_bytes());
    }
    {
        let mut w = csv::WriterBuilder::new().from_writer(&mut buf);
        w.write_record(headers)
            .map_err(|e| CliError::input(format!("CSV write failed: {e}")))?;
        for r in rows {
            w.write_record(r)
                .map_err(|e| CliError::input(format!("CSV write failed: {e}")))?;
        }
        w.flush().map_err(|e| CliError::input(format!("CSV write failed: {e}")))?;
    }
    write_output(path, &buf)
}

pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::input(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::input(format!("cannot write output: {e}"))),
    }
}

/// Shortest text that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
