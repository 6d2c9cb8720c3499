//! Per-seed CSV traces and the JSON run summary.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use gmvi_core::EvalRecord;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::CliError;

pub const SUMMARY_SCHEMA: &str = "gmvi-summary/1";
pub const CSV_HEADER: [&str; 6] = ["iter", "oracle_calls", "elapsed_ns", "gap", "sup_gap", "dist_sq"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct CsvRow {
    iter: u64,
    oracle_calls: u64,
    elapsed_ns: u64,
    gap: Option<f64>,
    sup_gap: Option<f64>,
    dist_sq: Option<f64>,
}

impl From<&EvalRecord> for CsvRow {
    fn from(r: &EvalRecord) -> Self {
        CsvRow {
            iter: r.iteration,
            oracle_calls: r.oracle_calls,
            elapsed_ns: r.elapsed_ns,
            gap: r.gap,
            sup_gap: r.sup_gap,
            dist_sq: r.dist_sq,
        }
    }
}

impl From<CsvRow> for EvalRecord {
    fn from(r: CsvRow) -> Self {
        EvalRecord {
            iteration: r.iter,
            oracle_calls: r.oracle_calls,
            elapsed_ns: r.elapsed_ns,
            gap: r.gap,
            sup_gap: r.sup_gap,
            dist_sq: r.dist_sq,
        }
    }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes records as CSV; absent metrics become empty fields.
pub fn write_csv(records: &[EvalRecord], path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    if records.is_empty() {
        w.write_record(CSV_HEADER).map_err(|e| csv_err(path, e))?;
    }
    for r in records {
        w.serialize(CsvRow::from(r)).map_err(|e| csv_err(path, e))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<EvalRecord>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(CliError::Io(format!("{}: unexpected header", path.display())));
    }
    r.deserialize::<CsvRow>().map(|row| row.map(EvalRecord::from).map_err(|e| csv_err(path, e))).collect()
}

/// Mean and sample standard deviation of one metric over the successful runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

impl MetricStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(MetricStats { count: values.len(), mean, std })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    Diverged,
}

/// One seed's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub status: RunStatus,
    pub reason: Option<String>,
    /// CSV file name relative to the output directory.
    pub csv: Option<String>,
    pub iterations: u64,
    pub oracle_calls: u64,
    pub final_gap: Option<f64>,
    pub final_sup_gap: Option<f64>,
    pub final_dist_sq: Option<f64>,
}

/// Echo of the resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub problem: String,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub density: Option<f64>,
    pub exponent: Option<f64>,
    pub gen_seed: Option<u64>,
    pub sampling: String,
    pub gamma: Option<f64>,
    pub step: Option<f64>,
    pub iterations: u64,
    pub stride: u64,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub ok_runs: usize,
    pub oracle_calls_total: u64,
    pub gap: Option<MetricStats>,
    pub sup_gap: Option<MetricStats>,
    pub dist_sq: Option<MetricStats>,
}

impl Aggregate {
    /// Statistics over the `ok` rows. Rejects an empty run list.
    pub fn from_runs(runs: &[SeedRun]) -> Result<Self, CliError> {
        if runs.is_empty() {
            return Err(CliError::Config("a summary needs at least one run".into()));
        }
        let ok: Vec<&SeedRun> = runs.iter().filter(|r| r.status == RunStatus::Ok).collect();
        let stats = |f: fn(&SeedRun) -> Option<f64>| {
            let values: Vec<f64> = ok.iter().filter_map(|r| f(r)).collect();
            MetricStats::from_values(&values)
        };
        Ok(Aggregate {
            ok_runs: ok.len(),
            oracle_calls_total: runs.iter().map(|r| r.oracle_calls).sum(),
            gap: stats(|r| r.final_gap),
            sup_gap: stats(|r| r.final_sup_gap),
            dist_sq: stats(|r| r.final_dist_sq),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema: String,
    pub tool: String,
    pub version: String,
    pub solver: String,
    pub family: String,
    pub m: usize,
    pub dim: usize,
    pub config: ConfigEcho,
    pub runs: Vec<SeedRun>,
    pub aggregate: Aggregate,
    pub failed_seeds: Vec<u64>,
    pub partial_failure: bool,
}

impl RunSummary {
    pub fn new(solver: &str, family: &str, m: usize, dim: usize, config: ConfigEcho, runs: Vec<SeedRun>) -> Result<Self, CliError> {
        let aggregate = Aggregate::from_runs(&runs)?;
        let failed_seeds: Vec<u64> = runs.iter().filter(|r| r.status != RunStatus::Ok).map(|r| r.seed).collect();
        Ok(RunSummary {
            schema: SUMMARY_SCHEMA.into(),
            tool: "gmvi".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            solver: solver.into(),
            family: family.into(),
            m,
            dim,
            config,
            partial_failure: !failed_seeds.is_empty(),
            failed_seeds,
            runs,
            aggregate,
        })
    }
}

/// Pretty printing with every float written to 17 significant digits.
struct Digits17(PrettyFormatter<'static>);

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn summary_to_string(summary: &RunSummary) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    summary.serialize(&mut ser).map_err(|e| CliError::Io(e.to_string()))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("json is utf-8"))
}

pub fn write_summary(summary: &RunSummary, path: &Path) -> Result<(), CliError> {
    let text = summary_to_string(summary)?;
    let mut f = BufWriter::new(File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?);
    f.write_all(text.as_bytes())?;
    f.flush()?;
    Ok(())
}

/// Loads a summary, recomputing the aggregate from the per-seed rows.
pub fn load_summary(path: &Path) -> Result<RunSummary, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut s: RunSummary = serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    if s.runs.len() != s.config.seeds.len() {
        return Err(CliError::Io(format!(
            "{}: {} runs for {} seeds",
            path.display(),
            s.runs.len(),
            s.config.seeds.len()
        )));
    }
    s.aggregate = Aggregate::from_runs(&s.runs)?;
    Ok(s)
}
