//! The combination table (CSV) and the full per-pair stats dump (JSON).

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::accuracy::AccuracyCounts;
use super::pose::PoseLabel;
use super::run::{CombinationResult, Dataset};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 9] = [
    "detector",
    "descriptor",
    "total_time_sec",
    "accuracy_pct",
    "ground_truth_cases",
    "correct_matches_per_sec",
    "config_hash",
    "seed",
    "timing_mode",
];

/// One table row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub detector: String,
    pub descriptor: String,
    pub total_time_sec: f64,
    pub accuracy_pct: f64,
    pub ground_truth_cases: usize,
    pub correct_matches_per_sec: f64,
}

impl From<&CombinationResult> for ReportRow {
    fn from(r: &CombinationResult) -> Self {
        ReportRow {
            detector: r.combination.detector.to_string(),
            descriptor: r.combination.descriptor.to_string(),
            total_time_sec: r.total_time,
            accuracy_pct: r.accuracy,
            ground_truth_cases: r.ground_truth_cases,
            correct_matches_per_sec: r.correct_matches_per_second,
        }
    }
}

/// Run-level values repeated on every row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunStamp {
    pub config_hash: String,
    pub seed: u64,
    pub timing_mode: String,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Serialization(e.to_string())
}

pub fn write_csv<W: Write>(rows: &[ReportRow], stamp: &RunStamp, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.detector.clone(),
            r.descriptor.clone(),
            format!("{:.3}", r.total_time_sec),
            format!("{:.2}", r.accuracy_pct),
            r.ground_truth_cases.to_string(),
            format!("{:.3}", r.correct_matches_per_sec),
            stamp.config_hash.clone(),
            stamp.seed.to_string(),
            stamp.timing_mode.clone(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Serialization(e.to_string()))
}

pub fn csv_string(rows: &[ReportRow], stamp: &RunStamp) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, stamp, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Rows back from CSV text written by [`write_csv`].
pub fn read_csv(text: &str) -> Result<Vec<ReportRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header.len() < 6 || header[..6] != CSV_HEADER[..6] {
        return Err(Error::Serialization(format!("unexpected CSV header {header:?}")));
    }
    let num = |s: &str| -> Result<f64> {
        s.parse().map_err(|_| Error::Serialization(format!("bad number {s:?}")))
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        rows.push(ReportRow {
            detector: rec[0].to_string(),
            descriptor: rec[1].to_string(),
            total_time_sec: num(&rec[2])?,
            accuracy_pct: num(&rec[3])?,
            ground_truth_cases: num(&rec[4])? as usize,
            correct_matches_per_sec: num(&rec[5])?,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDump {
    pub query: String,
    pub template: String,
    pub query_pose: PoseLabel,
    pub template_pose: PoseLabel,
    /// Query and template are the same image.
    pub identical: bool,
    pub histogram_score: f64,
    pub query_features: usize,
    pub template_features: usize,
    pub n_correct: usize,
    pub mean_angle_diff: f64,
    pub min_distance: f64,
    pub accepted: bool,
    pub time_sec: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinationDump {
    pub combination: String,
    pub detector: String,
    pub descriptor: String,
    pub total_time: f64,
    pub accuracy: f64,
    pub counts: AccuracyCounts,
    pub ground_truth_cases: usize,
    pub total_matches: usize,
    pub correct_matches_per_second: f64,
    pub pairs: Vec<PairDump>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsDump {
    pub config_hash: String,
    pub seed: u64,
    pub timing_mode: String,
    pub decode_time: f64,
    pub combinations: Vec<CombinationDump>,
}

impl StatsDump {
    /// Image paths are written relative to `base_dir` when they lie under it.
    pub fn build(results: &[CombinationResult], ds: &Dataset, stamp: &RunStamp, base_dir: &Path) -> Self {
        let rel = |p: &Path| p.strip_prefix(base_dir).unwrap_or(p).to_string_lossy().into_owned();
        let combinations = results
            .iter()
            .map(|r| CombinationDump {
                combination: r.combination.to_string(),
                detector: r.combination.detector.to_string(),
                descriptor: r.combination.descriptor.to_string(),
                total_time: r.total_time,
                accuracy: r.accuracy,
                counts: r.counts,
                ground_truth_cases: r.ground_truth_cases,
                total_matches: r.total_matches,
                correct_matches_per_second: r.correct_matches_per_second,
                pairs: r
                    .pairs
                    .iter()
                    .map(|p| {
                        let q = &ds.manifest.queries[p.query];
                        let t = &ds.manifest.templates[p.template];
                        PairDump {
                            query: rel(&q.path),
                            template: rel(&t.path),
                            query_pose: q.pose,
                            template_pose: t.pose,
                            identical: ds.query_hashes[p.query] == ds.template_hashes[p.template],
                            histogram_score: p.histogram_score,
                            query_features: p.query_features,
                            template_features: p.template_features,
                            n_correct: p.stats.n_correct,
                            mean_angle_diff: p.stats.mean_angle_diff,
                            min_distance: p.stats.min_distance,
                            accepted: p.accepted,
                            time_sec: p.time_sec,
                        }
                    })
                    .collect(),
            })
            .collect();
        StatsDump {
            config_hash: stamp.config_hash.clone(),
            seed: stamp.seed,
            timing_mode: stamp.timing_mode.clone(),
            decode_time: ds.decode_time,
            combinations,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}
