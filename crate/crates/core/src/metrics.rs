//! Evaluation statistics: frame-level ROC AUC, anomaly saliency, normal GE
//! levels and their ratios, and Pearson correlation against target counts.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::block::BlockSpec;
use crate::error::{Error, Result};
use crate::scoring::NormalizationMode;
use crate::series::{check_same_layout, LabelSeries, ScoreSeries};

/// Area under the ROC curve of `scores` against binary `labels`.
pub fn roc_auc(scores: &ScoreSeries, labels: &LabelSeries) -> Result<f64> {
    check_same_layout(scores.layout(), labels.layout())?;
    roc_auc_slices(scores.values(), labels.labels())
}

/// Mann-Whitney form of the AUC: the probability that a random positive
/// outranks a random negative, counting ties as one half.
///
/// Sorts once and assigns mid-ranks to tied groups, `O(n log n)`.
pub fn roc_auc_slices(scores: &[f64], labels: &[u8]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let n_pos = labels.iter().filter(|&&l| l == 1).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass {
            class: if n_pos == 0 { 0 } else { 1 },
        });
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of 1-based ranks of positives, tied groups sharing their mid-rank.
    // Doubled ranks keep the arithmetic in integers until the final division.
    let mut doubled_rank_sum: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]].total_cmp(&scores[order[i]]) == Ordering::Equal {
            j += 1;
        }
        // ranks i+1 ..= j, mid-rank (i + 1 + j) / 2
        let doubled_mid = (i + 1 + j) as u128;
        let pos_in_group = order[i..j].iter().filter(|&&k| labels[k] == 1).count() as u128;
        doubled_rank_sum += doubled_mid * pos_in_group;
        i = j;
    }
    let n_pos = n_pos as u128;
    // 2U = 2R - n_pos (n_pos + 1)
    let doubled_u = doubled_rank_sum - n_pos * (n_pos + 1);
    Ok(doubled_u as f64 / (2.0 * n_pos as f64 * n_neg as f64))
}

fn class_means(values: &[f64], labels: &[u8]) -> Result<(f64, f64)> {
    let (mut sum_n, mut cnt_n, mut sum_a, mut cnt_a) = (0.0, 0usize, 0.0, 0usize);
    for (&v, &l) in values.iter().zip(labels) {
        if l == 1 {
            sum_a += v;
            cnt_a += 1;
        } else {
            sum_n += v;
            cnt_n += 1;
        }
    }
    if cnt_n == 0 {
        return Err(Error::SingleClass { class: 1 });
    }
    if cnt_a == 0 {
        return Err(Error::SingleClass { class: 0 });
    }
    Ok((sum_n / cnt_n as f64, sum_a / cnt_a as f64))
}

/// Relative elevation of the abnormal-frame mean GE over the normal-frame
/// mean GE: `(abnormal - normal) / normal`. Means are taken over the whole
/// series, not per segment.
pub fn anomaly_saliency(ges: &ScoreSeries, labels: &LabelSeries) -> Result<f64> {
    check_same_layout(ges.layout(), labels.layout())?;
    let (normal, abnormal) = class_means(ges.values(), labels.labels())?;
    if normal == 0.0 {
        return Err(Error::ZeroNormalLevel);
    }
    Ok((abnormal - normal) / normal)
}

/// Mean GE over the normal frames of one segment.
pub fn normal_ge_level(segment: &str, ges: &[f64], labels: &[u8]) -> Result<f64> {
    let (sum, count) = ges
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l == 0)
        .fold((0.0, 0usize), |(s, c), (&v, _)| (s + v, c + 1));
    if count == 0 {
        return Err(Error::NoNormalFrames {
            segment: segment.to_string(),
        });
    }
    Ok(sum / count as f64)
}

/// Normal GE level of every segment, in layout order.
pub fn segment_normal_levels(ges: &ScoreSeries, labels: &LabelSeries) -> Result<Vec<Result<f64>>> {
    check_same_layout(ges.layout(), labels.layout())?;
    Ok(ges
        .layout()
        .spans()
        .iter()
        .enumerate()
        .map(|(k, span)| normal_ge_level(&span.id, ges.segment_values(k), labels.segment_labels(k)))
        .collect())
}

/// Higher level divided by the lower one; always `>= 1`.
pub fn ge_level_ratio(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::NonPositiveLevel { a, b });
    }
    Ok(a.max(b) / a.min(b))
}

/// Sample Pearson correlation coefficient, clamped to `[-1, 1]`.
pub fn pearson_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} xs vs {} ys",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::TooFewSegments { got: xs.len() });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance { which: "xs" });
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance { which: "ys" });
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Configuration echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub exponent: u8,
    pub block: BlockSpec,
    pub radius: usize,
    pub normalization: NormalizationMode,
    pub population: String,
    pub weights: Vec<(String, f64)>,
    pub seed: Option<u64>,
    /// Border rule and stride used for block means.
    pub anchors: String,
    /// How class means for saliency are pooled.
    pub saliency_pooling: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentLevel {
    pub segment: String,
    pub target_count: Option<f64>,
    pub frame_level: Option<f64>,
    pub block_level: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub segment_a: String,
    pub segment_b: String,
    pub frame_level: Option<f64>,
    pub block_level: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub block: BlockSpec,
    pub auc: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormCompareRow {
    pub population: String,
    pub mode: NormalizationMode,
    pub auc: Option<f64>,
    pub error: Option<String>,
}

/// A metric that could not be computed, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricError {
    pub metric: String,
    pub error: String,
}

/// Every statistic a run produces. Sections that a subcommand does not
/// compute stay `None` or empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub config: ConfigEcho,
    pub auc_block: Option<f64>,
    pub auc_frame: Option<f64>,
    pub saliency_block: Option<f64>,
    pub saliency_frame: Option<f64>,
    pub correlation_block: Option<f64>,
    pub correlation_frame: Option<f64>,
    pub segment_levels: Vec<SegmentLevel>,
    pub ratios: Vec<RatioRow>,
    pub sweep: Vec<SweepRow>,
    pub sweep_best: Option<BlockSpec>,
    pub norm_compare: Vec<NormCompareRow>,
    pub degenerate_ranges: Vec<String>,
    pub errors: Vec<MetricError>,
    /// Free-text observations, e.g. a flagged normalization degradation.
    #[serde(default)]
    pub notes: Vec<String>,
}

impl EvalReport {
    pub fn new(dataset: impl Into<String>, config: ConfigEcho) -> Self {
        Self {
            dataset: dataset.into(),
            config,
            auc_block: None,
            auc_frame: None,
            saliency_block: None,
            saliency_frame: None,
            correlation_block: None,
            correlation_frame: None,
            segment_levels: Vec::new(),
            ratios: Vec::new(),
            sweep: Vec::new(),
            sweep_best: None,
            norm_compare: Vec::new(),
            degenerate_ranges: Vec::new(),
            errors: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Store `Ok` values, record errors without aborting.
    pub fn record(&mut self, metric: &str, result: Result<f64>) -> Option<f64> {
        match result {
            Ok(v) => Some(v),
            Err(e) => {
                self.errors.push(MetricError {
                    metric: metric.to_string(),
                    error: e.to_string(),
                });
                None
            }
        }
    }
}
