//! Result files. Every float is written in plain decimal with 17 significant
//! digits so that identical runs produce identical bytes.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use fogalloc_core::engine::{CampaignResult, GapPoint, RegretPoint, ReplicaResult, RoundRecord};
use fogalloc_core::{Result, StrategyKind};
use serde::Serialize;

pub const REGRET_HEADER: [&str; 4] = ["t", "node", "cumulative_regret", "average_regret"];
pub const TRACE_HEADER: [&str; 7] = ["t", "node", "task", "x", "a", "clean_utility", "observed_utility"];
pub const HISTOGRAM_HEADER: [&str; 7] = ["seed", "node", "task", "bin", "bin_lo", "bin_hi", "count"];
pub const FINAL_ACTIONS_HEADER: [&str; 5] = ["seed", "node", "task", "final_window_mean", "tail_mean"];

pub fn fmt17(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (16 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

type CsvOut = csv::Writer<BufWriter<File>>;

fn create(path: &Path, header: &[&str]) -> Result<CsvOut> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(header)?;
    Ok(w)
}

pub fn write_regret_csv(path: &Path, series: &[RegretPoint]) -> Result<()> {
    let mut w = create(path, &REGRET_HEADER)?;
    for p in series {
        for (k, c) in p.cumulative.iter().enumerate() {
            w.write_record([p.t.to_string(), k.to_string(), fmt17(*c), fmt17(c / p.t as f64)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_histogram_csv<'a>(path: &Path, tasks: usize, replicas: impl Iterator<Item = &'a ReplicaResult>) -> Result<()> {
    let mut w = create(path, &HISTOGRAM_HEADER)?;
    for r in replicas {
        let bins = r.histogram.bins;
        for (cell, counts) in r.histogram.counts.iter().enumerate() {
            for (b, n) in counts.iter().enumerate() {
                w.write_record([
                    r.replica.to_string(),
                    (cell / tasks).to_string(),
                    (cell % tasks).to_string(),
                    b.to_string(),
                    fmt17(b as f64 / bins as f64),
                    fmt17((b + 1) as f64 / bins as f64),
                    n.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-seed rows followed by seed-mean rows labelled `mean`.
pub fn write_final_actions_csv(path: &Path, result: &CampaignResult, strategy: StrategyKind) -> Result<()> {
    let mut w = create(path, &FINAL_ACTIONS_HEADER)?;
    let mut rows = |seed: String, fw: &fogalloc_core::Matrix, tail: &fogalloc_core::Matrix| -> Result<()> {
        for k in 0..fw.rows() {
            for m in 0..fw.cols() {
                w.write_record([seed.clone(), k.to_string(), m.to_string(), fmt17(fw.get(k, m)), fmt17(tail.get(k, m))])?;
            }
        }
        Ok(())
    };
    for r in result.replicas_of(strategy) {
        rows(r.replica.to_string(), &r.final_window_mean, &r.tail_mean)?;
    }
    if let Some(s) = result.summary(strategy) {
        rows("mean".into(), &s.final_window_mean, &s.tail_mean)?;
    }
    w.flush()?;
    Ok(())
}

/// Streams round records, one row per (t, node, task).
pub struct TraceWriter {
    inner: CsvOut,
}

impl TraceWriter {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(TraceWriter {
            inner: create(path, &TRACE_HEADER)?,
        })
    }

    pub fn write(&mut self, r: &RoundRecord) -> Result<()> {
        for k in 0..r.x.nodes() {
            for m in 0..r.x.tasks() {
                self.inner.write_record([
                    r.t.to_string(),
                    k.to_string(),
                    m.to_string(),
                    fmt17(r.x.get(k, m)),
                    fmt17(r.a.get(k, m)),
                    fmt17(r.clean_utility.get(k, m)),
                    fmt17(r.observed_utility.get(k, m)),
                ])?;
            }
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

#[derive(Debug, Serialize)]
struct ReplicaBrief<'a> {
    strategy: StrategyKind,
    replica: usize,
    seed: u64,
    final_average_regret: f64,
    normalized_average_regret: f64,
    final_cumulative: &'a [f64],
    slope: Option<f64>,
    slope_error: Option<&'a str>,
    gap_trajectory: &'a [GapPoint],
}

#[derive(Debug, Serialize)]
struct SummaryDoc<'a> {
    metadata: &'a fogalloc_core::engine::CampaignMetadata,
    nash: &'a fogalloc_core::engine::NashSolution,
    strategies: &'a [fogalloc_core::engine::StrategySummary],
    replicas: Vec<ReplicaBrief<'a>>,
}

pub fn summary_json(result: &CampaignResult) -> Result<String> {
    let doc = SummaryDoc {
        metadata: &result.metadata,
        nash: &result.nash,
        strategies: &result.summaries,
        replicas: result
            .replicas
            .iter()
            .map(|r| ReplicaBrief {
                strategy: r.strategy,
                replica: r.replica,
                seed: r.seed,
                final_average_regret: r.final_average_regret,
                normalized_average_regret: r.normalized_average_regret,
                final_cumulative: &r.final_cumulative,
                slope: r.slope,
                slope_error: r.slope_error.as_deref(),
                gap_trajectory: &r.gap_trajectory,
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc)?)
}
