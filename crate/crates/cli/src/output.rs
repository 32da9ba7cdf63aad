//! File formats written by the command-line driver.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mubell_core::correlation::Correlation;
use mubell_core::estimator::{write_records_csv, EstimateSummary, GridCell, TrialConfig, TrialRecord};
use mubell_core::stats::Histogram;
use mubell_core::Result;

pub const SUMMARY_FILE: &str = "summary.json";
pub const RECORDS_FILE: &str = "records.csv";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const HEATMAP_FILE: &str = "heatmap.csv";
pub const CURVES_FILE: &str = "curves.csv";
pub const DUMP_DIR: &str = "nonviolating";

/// A list of campaigns for `mubell curves`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CampaignFile {
    pub configs: Vec<TrialConfig>,
    /// Output directory; the command-line value wins when given.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Table names to replicate after the sweep.
    #[serde(default)]
    pub compare: Vec<String>,
}

/// One row of `histogram.csv`; the overflow row has no bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub kind: String,
    pub low: Option<f64>,
    pub high: Option<f64>,
    pub count: u64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapRow {
    pub i: usize,
    pub j: usize,
    pub alpha: f64,
    pub beta: f64,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub d: usize,
    pub mu: usize,
    pub nu: usize,
    pub fraction: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary(dir: &Path, summary: &EstimateSummary) -> Result<()> {
    serde_json::to_writer_pretty(create(&dir.join(SUMMARY_FILE))?, summary)?;
    Ok(())
}

pub fn write_records(dir: &Path, records: &[TrialRecord]) -> Result<()> {
    write_records_csv(records, create(&dir.join(RECORDS_FILE))?)
}

pub fn histogram_rows(h: &Histogram) -> Vec<HistogramRow> {
    let mut rows: Vec<HistogramRow> = h
        .bins
        .iter()
        .map(|b| HistogramRow {
            kind: "bin".into(),
            low: Some(b.low),
            high: Some(b.high),
            count: b.count,
            frequency: b.frequency,
        })
        .collect();
    rows.push(HistogramRow {
        kind: "overflow".into(),
        low: None,
        high: None,
        count: h.overflow,
        frequency: if h.total == 0 { 0.0 } else { h.overflow as f64 / h.total as f64 },
    });
    rows
}

pub fn write_histogram(dir: &Path, h: &Histogram) -> Result<()> {
    write_rows(&dir.join(HISTOGRAM_FILE), histogram_rows(h))
}

pub fn write_heatmap(dir: &Path, cells: &[GridCell]) -> Result<()> {
    write_rows(
        &dir.join(HEATMAP_FILE),
        cells.iter().map(|c| HeatmapRow {
            i: c.i,
            j: c.j,
            alpha: c.alpha,
            beta: c.beta,
            fraction: c.summary.fraction,
            ci_low: c.summary.ci_low,
            ci_high: c.summary.ci_high,
        }),
    )
}

pub fn write_curves(dir: &Path, summaries: &[EstimateSummary]) -> Result<()> {
    write_rows(
        &dir.join(CURVES_FILE),
        summaries.iter().map(|s| CurveRow {
            d: s.config.d,
            mu: s.config.mu,
            nu: s.config.nu,
            fraction: s.fraction,
            ci_low: s.ci_low,
            ci_high: s.ci_high,
        }),
    )
}

/// Writes `nonviolating/trial_<index>.json` for each dumped correlation.
pub fn write_dumps(dir: &Path, dumps: &[(u64, Correlation)]) -> Result<()> {
    if dumps.is_empty() {
        return Ok(());
    }
    let sub = dir.join(DUMP_DIR);
    fs::create_dir_all(&sub)?;
    for (i, p) in dumps {
        serde_json::to_writer(create(&sub.join(format!("trial_{i}.json")))?, &p.to_json())?;
    }
    Ok(())
}

pub fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
