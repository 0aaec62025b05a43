//! CSV and JSON files produced and consumed by sweeps.
//!
//! Floats are written with Rust's shortest round-trip formatting, so loading
//! a file reproduces every value bit for bit. Writes go to a temporary file
//! in the target directory and are renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::engines::EngineKind;
use crate::error::{Error, Result};
use crate::experiment::{ReportSummary, SolutionRecord};
use crate::problem::{DecisionVector, ObjectiveVector, WeightVector};

pub const FRONTIER_HEADER: [&str; 17] = [
    "engine", "w1", "w2", "w3", "w4", "run_id", "seed", "A", "B", "C", "D", "f1", "f2", "f3", "f4", "F", "aer",
];

pub const TRACE_HEADER: [&str; 2] = ["generation", "best_F"];

pub const WEIGHTS_HEADER: [&str; 4] = ["w1", "w2", "w3", "w4"];

/// Relative tolerance of the load-time aggregate audit.
const AGGREGATE_AUDIT_TOLERANCE: f64 = 1e-9;

/// Writes `contents` to `path` through a sibling temporary file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."));
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::io(path, std::io::Error::other("path has no file name")))?;
    let tmp: PathBuf = dir.join(format!(".{}.tmp-{}", file_name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(Error::io(path, e));
    }
    Ok(())
}

pub fn frontier_csv(records: &[SolutionRecord]) -> String {
    let mut out = FRONTIER_HEADER.join(",");
    out.push('\n');
    for r in records {
        let w = r.weights.values();
        let x = r.decision;
        let f = r.objectives.values();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.engine,
            w[0],
            w[1],
            w[2],
            w[3],
            r.run_id,
            r.seed,
            x.a,
            x.b,
            x.c,
            x.d,
            f[0],
            f[1],
            f[2],
            f[3],
            r.fitness,
            r.aer
        ));
    }
    out
}

pub fn write_frontier(path: &Path, records: &[SolutionRecord]) -> Result<()> {
    write_atomic(path, frontier_csv(records).as_bytes())
}

pub fn trace_csv(trace: &[f64]) -> String {
    let mut out = TRACE_HEADER.join(",");
    out.push('\n');
    for (g, v) in trace.iter().enumerate() {
        out.push_str(&format!("{},{}\n", g + 1, v));
    }
    out
}

pub fn write_trace(path: &Path, trace: &[f64]) -> Result<()> {
    write_atomic(path, trace_csv(trace).as_bytes())
}

pub fn weights_csv(weights: &[WeightVector]) -> String {
    let mut out = WEIGHTS_HEADER.join(",");
    out.push('\n');
    for w in weights {
        let v = w.values();
        out.push_str(&format!("{},{},{},{}\n", v[0], v[1], v[2], v[3]));
    }
    out
}

pub fn write_weights(path: &Path, weights: &[WeightVector]) -> Result<()> {
    write_atomic(path, weights_csv(weights).as_bytes())
}

pub fn summary_json(summaries: &[ReportSummary]) -> String {
    let mut s = serde_json::to_string_pretty(summaries).expect("summaries serialize");
    s.push('\n');
    s
}

pub fn write_summary(path: &Path, summaries: &[ReportSummary]) -> Result<()> {
    write_atomic(path, summary_json(summaries).as_bytes())
}

pub fn read_summary(path: &Path) -> Result<Vec<ReportSummary>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// A CSV file opened against an expected header, with column lookup by name.
struct Table {
    path: PathBuf,
    columns: Vec<usize>,
    reader: csv::Reader<fs::File>,
}

impl Table {
    fn open(path: &Path, expected: &[&str]) -> Result<Self> {
        let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(file);
        let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
        let columns = expected
            .iter()
            .map(|name| {
                header.iter().position(|h| h == *name).ok_or_else(|| Error::Schema {
                    path: path.to_path_buf(),
                    line: 1,
                    message: format!("missing column `{name}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Table {
            path: path.to_path_buf(),
            columns,
            reader,
        })
    }

    /// Reads every row as strings ordered like the expected header.
    fn rows(&mut self) -> Result<Vec<(usize, Vec<String>)>> {
        let mut out = Vec::new();
        for row in self.reader.records() {
            let row = row.map_err(|e| csv_error(&self.path, e))?;
            let line = row.position().map_or(0, |p| p.line() as usize);
            let fields = self
                .columns
                .iter()
                .map(|&c| row.get(c).unwrap_or("").to_string())
                .collect();
            out.push((line, fields));
        }
        Ok(out)
    }

    fn schema(&self, line: usize, message: String) -> Error {
        Error::Schema {
            path: self.path.clone(),
            line,
            message,
        }
    }

    fn parse<T: FromStr>(&self, line: usize, column: &str, text: &str) -> Result<T> {
        text.parse()
            .map_err(|_| self.schema(line, format!("column `{column}`: cannot parse `{text}`")))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::Schema {
            path: path.to_path_buf(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

/// Loads a frontier CSV, checking bounds, weights and the stored aggregate.
pub fn read_frontier(path: &Path) -> Result<Vec<SolutionRecord>> {
    let mut table = Table::open(path, &FRONTIER_HEADER)?;
    let rows = table.rows()?;
    let mut records = Vec::with_capacity(rows.len());
    for (line, f) in rows {
        let num = |i: usize| -> Result<f64> { table.parse(line, FRONTIER_HEADER[i], &f[i]) };
        let engine: EngineKind = f[0]
            .parse()
            .map_err(|_| table.schema(line, format!("column `engine`: unknown engine `{}`", f[0])))?;
        let weights =
            WeightVector::new([num(1)?, num(2)?, num(3)?, num(4)?]).map_err(|e| table.schema(line, e.to_string()))?;
        let decision = DecisionVector::new(num(7)?, num(8)?, num(9)?, num(10)?);
        decision.check_bounds().map_err(|e| table.schema(line, e.to_string()))?;
        let record = SolutionRecord {
            engine,
            weights,
            run_id: table.parse(line, "run_id", &f[5])?,
            seed: table.parse(line, "seed", &f[6])?,
            decision,
            objectives: ObjectiveVector([num(11)?, num(12)?, num(13)?, num(14)?]),
            fitness: num(15)?,
            aer: num(16)?,
        };
        let residual = record.aggregate_residual().abs();
        if residual > AGGREGATE_AUDIT_TOLERANCE * record.fitness.abs().max(1.0) {
            return Err(table.schema(
                line,
                format!("stored F = {} differs from sum(w_i f_i) by {residual}", record.fitness),
            ));
        }
        records.push(record);
    }
    Ok(records)
}

pub fn read_trace(path: &Path) -> Result<Vec<f64>> {
    let mut table = Table::open(path, &TRACE_HEADER)?;
    let rows = table.rows()?;
    rows.iter()
        .map(|(line, f)| table.parse(*line, "best_F", &f[1]))
        .collect()
}

pub fn read_weights(path: &Path) -> Result<Vec<WeightVector>> {
    let mut table = Table::open(path, &WEIGHTS_HEADER)?;
    let rows = table.rows()?;
    let mut out = Vec::with_capacity(rows.len());
    for (line, f) in rows {
        let mut w = [0.0; 4];
        for (i, slot) in w.iter_mut().enumerate() {
            *slot = table.parse(line, WEIGHTS_HEADER[i], &f[i])?;
        }
        out.push(WeightVector::new(w).map_err(|e| table.schema(line, e.to_string()))?);
    }
    Ok(out)
}
