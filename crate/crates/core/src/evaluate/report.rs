use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::metrics::RocPoint;
use super::protocol::ProtocolResult;
use super::stats::MetricSample;
use super::EvaluateError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub stdev: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl From<&MetricSample> for MetricSummary {
    fn from(s: &MetricSample) -> Self {
        MetricSummary {
            mean: s.mean(),
            stdev: s.stdev(),
            min: s.min(),
            max: s.max(),
            n: s.len(),
        }
    }
}

/// `trial,auroc,train_acc,val_acc`, one row per trial.
pub fn write_metrics_csv<W: Write>(w: W, result: &ProtocolResult) -> Result<(), EvaluateError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["trial", "auroc", "train_acc", "val_acc"])?;
    for t in &result.trials {
        out.write_record([
            t.trial.to_string(),
            t.auroc.to_string(),
            t.train_acc.to_string(),
            t.val_acc.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn summarize(result: &ProtocolResult) -> BTreeMap<String, MetricSummary> {
    result
        .metrics()
        .iter()
        .map(|m| (m.name.clone(), MetricSummary::from(m)))
        .collect()
}

/// Pretty JSON: protocol, seed, trial count, `mean_<metric>` shortcuts, then
/// `{metric: {mean, stdev, min, max, n}}` per metric.
pub fn write_summary_json<W: Write>(w: W, result: &ProtocolResult) -> Result<(), EvaluateError> {
    #[derive(Serialize)]
    struct Summary {
        protocol: String,
        seed: u64,
        trials: usize,
        mean_auroc: f64,
        mean_train_acc: f64,
        mean_val_acc: f64,
        #[serde(flatten)]
        metrics: BTreeMap<String, MetricSummary>,
    }
    let summary = Summary {
        protocol: result.protocol.to_string(),
        seed: result.seed,
        trials: result.trials.len(),
        mean_auroc: result.auroc().mean(),
        mean_train_acc: result.train_acc().mean(),
        mean_val_acc: result.val_acc().mean(),
        metrics: summarize(result),
    };
    serde_json::to_writer_pretty(w, &summary)?;
    Ok(())
}

/// `fpr,tpr,threshold`; the first point's threshold is `inf`.
pub fn write_roc_csv<W: Write>(w: W, points: &[RocPoint]) -> Result<(), EvaluateError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["fpr", "tpr", "threshold"])?;
    for p in points {
        out.write_record([p.fpr.to_string(), p.tpr.to_string(), p.threshold.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
