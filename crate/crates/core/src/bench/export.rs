//! CSV records, violin-summary JSON, per-run event logs and plot data.
//!
//! Floats are written in shortest round-trip form, so parsing an
//! exported CSV gives back the exact values and identical inputs always
//! produce identical bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::experiment::{BenchFunction, Method, RunOutput, RunRecord};
use super::metrics::{advantage, Spread};
use super::BenchError;
use crate::fv::EVENT_LOG_HEADER;

pub const CSV_HEADER: &str =
    "function_id,method,replication,best_value,relative_error,eval_count,absorptions,reinitializations,reactivations,seed";

fn csv_text<T: Serialize>(header: &str, rows: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header.split(',')).expect("in-memory write");
    for row in rows {
        w.serialize(row).expect("flat rows serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

pub fn to_csv<'a>(records: impl IntoIterator<Item = &'a RunRecord>) -> String {
    csv_text(CSV_HEADER, records)
}

pub fn write_csv<'a>(path: &Path, records: impl IntoIterator<Item = &'a RunRecord>) -> Result<(), BenchError> {
    fs::write(path, to_csv(records)).map_err(|e| BenchError::io(path, e))
}

pub fn parse_csv(text: &str) -> Result<Vec<RunRecord>, BenchError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| BenchError::Parse(e.to_string()))?;
    if header.iter().ne(CSV_HEADER.split(',')) {
        return Err(BenchError::Parse(format!("unexpected header {:?}", header.as_slice())));
    }
    r.deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| BenchError::Parse(e.to_string()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionSummary {
    pub function_id: usize,
    pub advantage: f64,
    #[serde(rename = "SA")]
    pub sa: Spread,
    #[serde(rename = "FV")]
    pub fv: Spread,
    pub replications: usize,
    pub fstar: Option<f64>,
    pub fworst: Option<f64>,
    pub source_seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean_advantage: f64,
    pub positive_advantage_count: usize,
    /// Sorted by decreasing advantage.
    pub functions: Vec<FunctionSummary>,
}

fn errors(records: &[&RunRecord], id: usize, method: Method) -> Vec<f64> {
    records
        .iter()
        .filter(|r| r.function_id == id && r.method == method)
        .map(|r| r.relative_error)
        .collect()
}

/// Per-function spreads and advantages, sorted by decreasing advantage
/// (ties by function id).
pub fn summarize<'a>(records: impl IntoIterator<Item = &'a RunRecord>, functions: &[BenchFunction]) -> Summary {
    let records: Vec<&RunRecord> = records.into_iter().collect();
    let mut ids: Vec<usize> = records.iter().map(|r| r.function_id).collect();
    ids.sort_unstable();
    ids.dedup();
    let mut out: Vec<FunctionSummary> = ids
        .into_iter()
        .filter_map(|id| {
            let (sa, fv) = (errors(&records, id, Method::Sa), errors(&records, id, Method::Fv));
            if sa.is_empty() || fv.is_empty() {
                return None;
            }
            let info = functions.iter().find(|f| f.id == id);
            Some(FunctionSummary {
                function_id: id,
                advantage: advantage(&sa, &fv),
                sa: Spread::of(&sa),
                fv: Spread::of(&fv),
                replications: sa.len().min(fv.len()),
                fstar: info.map(|f| f.instance.fstar()),
                fworst: info.map(|f| f.instance.fworst()),
                source_seed: info.map(|f| f.source_seed),
            })
        })
        .collect();
    out.sort_by(|a, b| b.advantage.total_cmp(&a.advantage).then(a.function_id.cmp(&b.function_id)));
    let mean_advantage = out.iter().map(|s| s.advantage).sum::<f64>() / out.len().max(1) as f64;
    Summary {
        mean_advantage,
        positive_advantage_count: out.iter().filter(|s| s.advantage > 0.0).count(),
        functions: out,
    }
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<(), BenchError> {
    let text = serde_json::to_string_pretty(summary).expect("summary serializes");
    fs::write(path, text + "\n").map_err(|e| BenchError::io(path, e))
}

/// One `iter,particle,event,source,ref_gradient,window_mean` file per FV run,
/// named `function_<f>_replication_<r>.csv`.
pub fn write_event_logs(dir: &Path, runs: &[RunOutput]) -> Result<(), BenchError> {
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    for run in runs.iter().filter(|r| r.record.method == Method::Fv) {
        let text = csv_text(EVENT_LOG_HEADER, &run.events);
        let path = dir.join(format!(
            "function_{}_replication_{}.csv",
            run.record.function_id, run.record.replication
        ));
        fs::write(&path, text).map_err(|e| BenchError::io(&path, e))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PlotSeries<'a> {
    function_id: usize,
    advantage: f64,
    #[serde(rename = "SA")]
    sa: Vec<f64>,
    #[serde(rename = "FV")]
    fv: Vec<f64>,
    ansatze: Vec<&'a [Vec<f64>]>,
}

/// Raw relative errors per function and method, in summary order, plus the
/// ansätze of every replication.
pub fn write_plot_data(path: &Path, runs: &[RunOutput], summary: &Summary) -> Result<(), BenchError> {
    let records: Vec<&RunRecord> = runs.iter().map(|r| &r.record).collect();
    let series: Vec<PlotSeries> = summary
        .functions
        .iter()
        .map(|s| PlotSeries {
            function_id: s.function_id,
            advantage: s.advantage,
            sa: errors(&records, s.function_id, Method::Sa),
            fv: errors(&records, s.function_id, Method::Fv),
            ansatze: runs
                .iter()
                .filter(|r| r.record.function_id == s.function_id && r.record.method == Method::Fv)
                .map(|r| r.ansatze.as_slice())
                .collect(),
        })
        .collect();
    let text = serde_json::to_string_pretty(&series).expect("plot data serializes");
    fs::write(path, text + "\n").map_err(|e| BenchError::io(path, e))
}
