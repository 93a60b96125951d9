//! Evaluation quantities: trajectory error, detection time, biases, top-k.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs_distances, Graph, NodeId, UNREACHABLE};

/// `(1/N) Σ_i dist(estimate_i, target)`.
pub fn average_error(estimates: &[NodeId], target: NodeId, g: &Graph) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::EmptyInstances);
    }
    g.check(target)?;
    let dist = bfs_distances(g, target);
    let mut total = 0u64;
    for &v in estimates {
        g.check(v)?;
        match dist[v.index()] {
            UNREACHABLE => return Err(Error::Unreachable(v, target)),
            d => total += d as u64,
        }
    }
    Ok(total as f64 / estimates.len() as f64)
}

/// Zero-based stage at which `target` is first estimated, `None` if never.
pub fn first_detected_time(estimates: &[NodeId], target: NodeId) -> Option<usize> {
    estimates.iter().position(|&v| v == target)
}

/// `|(approx - exact) / exact| * 100` for log-domain values.
pub fn bias_approx(approx_log: f64, exact_log: f64) -> Result<f64> {
    if !approx_log.is_finite() || !exact_log.is_finite() {
        return Err(Error::NonFinite {
            layer: 0,
            what: format!("bias inputs {approx_log}, {exact_log}"),
        });
    }
    if exact_log == 0.0 {
        return Err(Error::DegenerateNormalization(
            "exact average probability is 1, its log is 0".into(),
        ));
    }
    Ok(((approx_log - exact_log) / exact_log).abs() * 100.0)
}

/// Bias of a model's predicted log likelihood against the exact one.
pub fn bias_gnn(predicted_log: f64, exact_log: f64) -> Result<f64> {
    bias_approx(predicted_log, exact_log)
}

/// Mean of [`bias_approx`] over paired values.
pub fn mean_bias(approx: &[f64], exact: &[f64]) -> Result<f64> {
    if approx.len() != exact.len() {
        return Err(Error::LengthMismatch {
            left: approx.len(),
            right: exact.len(),
        });
    }
    if approx.is_empty() {
        return Err(Error::EmptyInstances);
    }
    let mut total = 0.0;
    for (&a, &e) in approx.iter().zip(exact) {
        total += bias_approx(a, e)?;
    }
    Ok(total / approx.len() as f64)
}

/// Refuses reference scores that are all equal: ranking against them says
/// nothing.
pub fn check_informative(scores: &[f64]) -> Result<()> {
    match scores.first() {
        None => Err(Error::EmptyInstances),
        Some(&first) if scores.iter().all(|&s| (s - first).abs() <= 1e-12 * first.abs().max(1.0)) => {
            Err(Error::DegenerateNormalization(
                "reference scores are constant over the graph".into(),
            ))
        }
        Some(_) => Ok(()),
    }
}

/// Fraction of instances whose ground truth is among the first `k` entries
/// of its ranking.
pub fn topk_accuracy(rankings: &[Vec<NodeId>], truths: &[NodeId], k: usize) -> Result<f64> {
    if rankings.len() != truths.len() {
        return Err(Error::LengthMismatch {
            left: rankings.len(),
            right: truths.len(),
        });
    }
    if rankings.is_empty() {
        return Err(Error::EmptyInstances);
    }
    let hits = rankings
        .iter()
        .zip(truths)
        .filter(|(r, t)| r.iter().take(k).any(|v| v == *t))
        .count();
    Ok(hits as f64 / rankings.len() as f64)
}

/// Indices of `scores` sorted best first, ties by index.
pub fn rank_indices(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx
}

fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with average ranks for ties; `None` when either
/// side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<Option<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::EmptyInstances);
    }
    let (rx, ry) = (average_ranks(xs), average_ranks(ys));
    let n = xs.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some(sxy / (sxx * syy).sqrt()))
}

/// One metric over a set of instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metric: String,
    /// Named summary values, e.g. `mean`, or `top1`, `top5`.
    pub values: BTreeMap<String, f64>,
    pub instances: Vec<String>,
    pub breakdown: Vec<f64>,
    pub config: serde_json::Value,
}

impl EvalReport {
    /// A report whose only summary value is the breakdown mean.
    pub fn from_breakdown(
        metric: impl Into<String>,
        instances: Vec<String>,
        breakdown: Vec<f64>,
        config: serde_json::Value,
    ) -> Result<Self> {
        if breakdown.is_empty() {
            return Err(Error::EmptyInstances);
        }
        let mean = breakdown.iter().sum::<f64>() / breakdown.len() as f64;
        let mut values = BTreeMap::new();
        values.insert("mean".to_string(), mean);
        let r = EvalReport {
            metric: metric.into(),
            values,
            instances,
            breakdown,
            config,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.instances.len() != self.breakdown.len() {
            return Err(Error::LengthMismatch {
                left: self.instances.len(),
                right: self.breakdown.len(),
            });
        }
        let bad = self
            .values
            .values()
            .chain(&self.breakdown)
            .any(|x| !x.is_finite());
        if bad {
            return Err(Error::NonFinite {
                layer: 0,
                what: format!("{} report value", self.metric),
            });
        }
        Ok(())
    }

    pub fn mean(&self) -> Option<f64> {
        self.values.get("mean").copied()
    }

    /// `instance,<metric>` rows, one per instance.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["instance", self.metric.as_str()])
            .map_err(csv_error)?;
        for (name, v) in self.instances.iter().zip(&self.breakdown) {
            w.write_record([name.clone(), v.to_string()])
                .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}
