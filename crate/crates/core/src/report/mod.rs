//! Best-layer tables, layer curves and file exports.
//!
//! Every export is plot-ready: one row per (model, task, probe, layer).

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiments::{LayerResult, SweepRow, Task};
use crate::probes::{ConfusionMatrix, ProbeKind};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("no results for {0}")]
    EmptyResults(String),
    #[error("layer axes differ: {0}")]
    AxisMismatch(String),
    #[error("duplicate result row: {0}")]
    DuplicateRow(String),
    #[error("unknown export format {0:?} (expected csv or json)")]
    UnknownFormat(String),
}

impl ReportError {
    pub fn is_validation(&self) -> bool {
        match self {
            ReportError::Io(_) => false,
            ReportError::Csv(e) => !e.is_io_error(),
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(ReportError::UnknownFormat(s.to_string())),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// A [`LayerResult`] flattened for export, tagged with its model and probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub model_id: String,
    pub task: Task,
    pub probe: ProbeKind,
    pub layer: usize,
    pub mcc: f64,
    pub accuracy: f64,
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub degenerate: bool,
    pub fallback_verbs: usize,
}

/// Column order of [`ResultRow`] exports.
pub const RESULT_COLUMNS: [&str; 12] =
    ["model_id", "task", "probe", "layer", "mcc", "accuracy", "tp", "tn", "fp", "fn", "degenerate", "fallback_verbs"];

/// Column order of [`SweepRow`] exports.
pub const SWEEP_COLUMNS: [&str; 12] = [
    "frame",
    "layer",
    "probe",
    "k",
    "train_prop",
    "l2",
    "real_accuracy",
    "control_accuracy",
    "selectivity",
    "real_mcc",
    "control_mcc",
    "error",
];

impl ResultRow {
    pub fn new(model_id: &str, probe: ProbeKind, r: &LayerResult) -> ResultRow {
        ResultRow {
            model_id: model_id.to_string(),
            task: r.task,
            probe,
            layer: r.layer,
            mcc: r.mcc,
            accuracy: r.accuracy,
            tp: r.confusion.tp,
            tn: r.confusion.tn,
            fp: r.confusion.fp,
            fn_: r.confusion.fn_,
            degenerate: r.degenerate,
            fallback_verbs: r.fallback_verbs,
        }
    }

    pub fn confusion(&self) -> ConfusionMatrix {
        ConfusionMatrix::new(self.tp, self.tn, self.fp, self.fn_)
    }

    fn key(&self) -> (String, Task, ProbeKind) {
        (self.model_id.clone(), self.task, self.probe)
    }
}

/// Best layer of one (model, task, probe) series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub model_id: String,
    pub task: Task,
    pub probe: ProbeKind,
    pub best_mcc: f64,
    pub best_mcc_layer: usize,
    /// Accuracy at the best-MCC layer.
    pub best_accuracy: f64,
    pub degenerate: bool,
    /// `(layer, mcc)` in layer order.
    pub series: Vec<(usize, f64)>,
}

impl TableRow {
    /// `0.972 [10]`; degenerate tasks render as a bare `0.000`.
    pub fn mcc_cell(&self) -> String {
        if self.degenerate {
            "0.000".to_string()
        } else {
            format!("{:.3} [{}]", self.best_mcc, self.best_mcc_layer)
        }
    }

    pub fn accuracy_cell(&self) -> String {
        if self.degenerate {
            "1.000".to_string()
        } else {
            format!("{:.3}", self.best_accuracy)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportTable {
    /// Sorted by model, task, probe.
    pub rows: Vec<TableRow>,
}

impl ReportTable {
    /// Fixed-width text rendering; degenerate tasks are starred.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<16} {:<24} {:<7} {:>12} {:>9}", "model", "task", "probe", "mcc [layer]", "accuracy");
        for r in &self.rows {
            let task = if r.degenerate { format!("{}*", r.task) } else { r.task.to_string() };
            let _ = writeln!(
                out,
                "{:<16} {:<24} {:<7} {:>12} {:>9}",
                r.model_id,
                task,
                r.probe,
                r.mcc_cell(),
                r.accuracy_cell()
            );
        }
        out
    }
}

fn group(rows: &[ResultRow]) -> Result<BTreeMap<(String, Task, ProbeKind), Vec<&ResultRow>>, ReportError> {
    let mut groups: BTreeMap<_, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.key()).or_default().push(r);
    }
    for (key, series) in groups.iter_mut() {
        series.sort_by_key(|r| r.layer);
        if let Some(w) = series.windows(2).find(|w| w[0].layer == w[1].layer) {
            return Err(ReportError::DuplicateRow(format!("{} {} {} layer {}", key.0, key.1, key.2, w[0].layer)));
        }
    }
    Ok(groups)
}

/// Best layer per (model, task, probe), by MCC with ties going to the lowest
/// layer. The result does not depend on the order of `rows`.
pub fn best_layer_table(rows: &[ResultRow]) -> Result<ReportTable, ReportError> {
    if rows.is_empty() {
        return Err(ReportError::EmptyResults("best-layer table".into()));
    }
    let rows = group(rows)?
        .into_iter()
        .map(|((model_id, task, probe), series)| {
            let mut best = series[0];
            for r in &series[1..] {
                if r.mcc > best.mcc {
                    best = r;
                }
            }
            TableRow {
                model_id,
                task,
                probe,
                best_mcc: best.mcc,
                best_mcc_layer: best.layer,
                best_accuracy: best.accuracy,
                degenerate: series.iter().any(|r| r.degenerate),
                series: series.iter().map(|r| (r.layer, r.mcc)).collect(),
            }
        })
        .collect();
    Ok(ReportTable { rows })
}

/// A metric over layers. `task` is `None` for a mean over tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSeries {
    pub model_id: String,
    pub probe: ProbeKind,
    pub task: Option<Task>,
    pub x: Vec<usize>,
    pub y: Vec<f64>,
}

/// Per-task MCC curves.
pub fn task_curves(rows: &[ResultRow]) -> Result<Vec<CurveSeries>, ReportError> {
    Ok(group(rows)?
        .into_iter()
        .map(|((model_id, task, probe), series)| CurveSeries {
            model_id,
            probe,
            task: Some(task),
            x: series.iter().map(|r| r.layer).collect(),
            y: series.iter().map(|r| r.mcc).collect(),
        })
        .collect())
}

/// Unweighted mean MCC over tasks, per layer, for each (model, probe).
/// Degenerate tasks are left out. All remaining tasks of a (model, probe)
/// must cover the same layers.
pub fn mean_curve(rows: &[ResultRow]) -> Result<Vec<CurveSeries>, ReportError> {
    let mut by_model: BTreeMap<(String, ProbeKind), Vec<CurveSeries>> = BTreeMap::new();
    let live: Vec<ResultRow> = {
        let curves = best_layer_table(rows)?;
        let dead: Vec<_> =
            curves.rows.iter().filter(|r| r.degenerate).map(|r| (r.model_id.clone(), r.task, r.probe)).collect();
        rows.iter().filter(|r| !dead.contains(&r.key())).cloned().collect()
    };
    for c in task_curves(&live)? {
        by_model.entry((c.model_id.clone(), c.probe)).or_default().push(c);
    }
    if by_model.is_empty() {
        return Err(ReportError::EmptyResults("mean curve (every task is degenerate)".into()));
    }
    by_model
        .into_iter()
        .map(|((model_id, probe), curves)| {
            let x = curves[0].x.clone();
            if let Some(c) = curves.iter().find(|c| c.x != x) {
                return Err(ReportError::AxisMismatch(format!(
                    "{model_id}: {} has layers {:?}, {} has {:?}",
                    curves[0].task.unwrap(),
                    x,
                    c.task.unwrap(),
                    c.x
                )));
            }
            let y = (0..x.len()).map(|i| curves.iter().map(|c| c.y[i]).sum::<f64>() / curves.len() as f64).collect();
            Ok(CurveSeries { model_id, probe, task: None, x, y })
        })
        .collect()
}

/// Flat `(model_id, probe, task, layer, mcc)` rows for plotting; mean
/// curves use the task label `mean`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub model_id: String,
    pub probe: ProbeKind,
    pub task: String,
    pub layer: usize,
    pub mcc: f64,
}

pub const CURVE_COLUMNS: [&str; 5] = ["model_id", "probe", "task", "layer", "mcc"];

pub fn curve_points(curves: &[CurveSeries]) -> Vec<CurvePoint> {
    curves
        .iter()
        .flat_map(|c| {
            let task = c.task.map_or_else(|| "mean".to_string(), |t| t.to_string());
            c.x.iter().zip(&c.y).map(move |(&layer, &mcc)| CurvePoint {
                model_id: c.model_id.clone(),
                probe: c.probe,
                task: task.clone(),
                layer,
                mcc,
            })
        })
        .collect()
}

/// Write rows as CSV (header always present) or as a JSON array.
pub fn write_rows<T: Serialize, W: Write>(
    rows: &[T],
    columns: &[&str],
    format: Format,
    out: W,
) -> Result<(), ReportError> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(columns)?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

pub fn read_rows<T: DeserializeOwned, R: Read>(format: Format, input: R) -> Result<Vec<T>, ReportError> {
    match format {
        Format::Csv => Ok(csv::Reader::from_reader(input).deserialize().collect::<Result<_, _>>()?),
        Format::Json => Ok(serde_json::from_reader(input)?),
    }
}

pub fn export_results(rows: &[ResultRow], path: impl AsRef<Path>, format: Format) -> Result<(), ReportError> {
    write_rows(rows, &RESULT_COLUMNS, format, BufWriter::new(File::create(path)?))
}

pub fn import_results(path: impl AsRef<Path>, format: Format) -> Result<Vec<ResultRow>, ReportError> {
    read_rows(format, BufReader::new(File::open(path)?))
}

pub fn export_sweep(rows: &[SweepRow], path: impl AsRef<Path>, format: Format) -> Result<(), ReportError> {
    write_rows(rows, &SWEEP_COLUMNS, format, BufWriter::new(File::create(path)?))
}

pub fn import_sweep(path: impl AsRef<Path>, format: Format) -> Result<Vec<SweepRow>, ReportError> {
    read_rows(format, BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(task: &str, layer: usize, mcc: f64) -> ResultRow {
        ResultRow {
            model_id: "m".into(),
            task: task.parse().unwrap(),
            probe: ProbeKind::Linear,
            layer,
            mcc,
            accuracy: 0.5 + mcc / 2.0,
            tp: 1,
            tn: 1,
            fp: 0,
            fn_: 0,
            degenerate: false,
            fallback_verbs: 0,
        }
    }

    #[test]
    fn ties_go_to_the_lowest_layer() {
        let rows = vec![row("there.there", 1, 0.1), row("there.there", 2, 0.9), row("there.there", 3, 0.9)];
        let t = best_layer_table(&rows).unwrap();
        assert_eq!(t.rows[0].best_mcc_layer, 2);
        let single = best_layer_table(&rows[..1]).unwrap();
        assert_eq!(single.rows[0].best_mcc_layer, 1);
    }

    #[test]
    fn table_cells_match_the_published_shape() {
        let mut rows: Vec<ResultRow> = (0..13).map(|l| row("there.there", l, if l == 9 { 1.0 } else { 0.8 })).collect();
        rows.push(row("there.there", 10, 1.0));
        rows.retain(|r| !(r.layer == 10 && r.mcc < 1.0));
        let t = best_layer_table(&rows).unwrap();
        assert_eq!(t.rows[0].mcc_cell(), "1.000 [9]");

        let mut degenerate = row("caus_inch.causative", 0, 0.0);
        degenerate.degenerate = true;
        degenerate.accuracy = 1.0;
        let t = best_layer_table(&[degenerate]).unwrap();
        assert_eq!((t.rows[0].mcc_cell().as_str(), t.rows[0].accuracy_cell().as_str()), ("0.000", "1.000"));
        assert!(t.render().contains("caus_inch.causative*"));
    }

    #[test]
    fn empty_and_duplicate_inputs_are_rejected() {
        assert!(matches!(best_layer_table(&[]), Err(ReportError::EmptyResults(_))));
        let dup = vec![row("there.there", 1, 0.1), row("there.there", 1, 0.2)];
        assert!(matches!(best_layer_table(&dup), Err(ReportError::DuplicateRow(_))));
    }

    #[test]
    fn mean_curve_averages_live_tasks() {
        let mut rows = Vec::new();
        for l in 0..3 {
            rows.push(row("there.there", l, 0.4));
            rows.push(row("spray_load.with", l, 0.6));
            let mut d = row("caus_inch.causative", l, 0.0);
            d.degenerate = true;
            rows.push(d);
        }
        let mean = mean_curve(&rows).unwrap();
        assert_eq!(mean.len(), 1);
        assert_eq!(mean[0].x, vec![0, 1, 2]);
        for y in &mean[0].y {
            assert!((y - 0.5).abs() < 1e-15);
        }
        let one = mean_curve(&rows[..1]).unwrap();
        assert_eq!(one[0].y, vec![0.4]);
    }

    #[test]
    fn mismatched_axes_are_rejected() {
        let rows = vec![row("there.there", 0, 0.4), row("there.there", 1, 0.4), row("spray_load.with", 0, 0.6)];
        assert!(matches!(mean_curve(&rows), Err(ReportError::AxisMismatch(_))));
    }

    #[test]
    fn exports_round_trip_and_empty_csv_is_header_only() {
        let rows = vec![row("there.there", 0, 0.25), row("combined", 3, -1.0 / 3.0)];
        for format in [Format::Csv, Format::Json] {
            let mut buf = Vec::new();
            write_rows(&rows, &RESULT_COLUMNS, format, &mut buf).unwrap();
            let back: Vec<ResultRow> = read_rows(format, buf.as_slice()).unwrap();
            assert_eq!(back, rows);
        }
        let mut buf = Vec::new();
        write_rows::<ResultRow, _>(&[], &RESULT_COLUMNS, Format::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), RESULT_COLUMNS.join(",") + "\n");
    }

    #[test]
    fn csv_header_matches_serialized_fields() {
        let mut buf = Vec::new();
        let mut w = csv::Writer::from_writer(&mut buf);
        w.serialize(row("there.there", 0, 0.0)).unwrap();
        drop(w);
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), RESULT_COLUMNS.join(","));
    }
}
