//! Min-max normalization of GE series into anomaly scores, and weighted
//! fusion of several score series.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{check_same_layout, ScoreSeries};

/// Scope over which min and max are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    /// One min/max over every frame of every segment (norm0).
    #[default]
    Dataset,
    /// A separate min/max inside each segment (norm1).
    PerVideo,
}

impl fmt::Display for NormalizationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormalizationMode::Dataset => "dataset",
            NormalizationMode::PerVideo => "video",
        })
    }
}

impl FromStr for NormalizationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dataset" | "norm0" => Ok(NormalizationMode::Dataset),
            "video" | "per_video" | "norm1" => Ok(NormalizationMode::PerVideo),
            other => Err(Error::InvalidConfig(format!(
                "unknown normalization mode {other:?} (expected dataset or video)"
            ))),
        }
    }
}

/// Normalized scores plus the scopes whose range collapsed.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub series: ScoreSeries,
    /// `"dataset"` or the ids of segments with `max == min`; those scopes
    /// score zero everywhere.
    pub degenerate: Vec<String>,
}

pub fn normalize(series: &ScoreSeries, mode: NormalizationMode) -> Result<Normalized> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let layout = series.layout();
    let mut degenerate = Vec::new();
    let values = match mode {
        NormalizationMode::Dataset => {
            // pass 1: global extrema, pass 2: per-frame affine map
            let (lo, hi) = series
                .values()
                .par_iter()
                .fold(
                    || (f64::INFINITY, f64::NEG_INFINITY),
                    |(lo, hi), &v| (lo.min(v), hi.max(v)),
                )
                .reduce(
                    || (f64::INFINITY, f64::NEG_INFINITY),
                    |a, b| (a.0.min(b.0), a.1.max(b.1)),
                );
            if hi > lo {
                series
                    .values()
                    .par_iter()
                    .map(|&v| rescale(v, lo, hi))
                    .collect()
            } else {
                degenerate.push("dataset".to_string());
                vec![0.0; series.len()]
            }
        }
        NormalizationMode::PerVideo => {
            let mut out = Vec::with_capacity(series.len());
            for (k, span) in layout.spans().iter().enumerate() {
                let seg = series.segment_values(k);
                if seg.is_empty() {
                    continue;
                }
                let lo = seg.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = seg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if hi > lo {
                    out.extend(seg.iter().map(|&v| rescale(v, lo, hi)));
                } else {
                    degenerate.push(span.id.clone());
                    out.extend(std::iter::repeat_n(0.0, seg.len()));
                }
            }
            out
        }
    };
    Ok(Normalized {
        series: ScoreSeries::new(layout.clone(), values)?,
        degenerate,
    })
}

#[inline]
fn rescale(v: f64, lo: f64, hi: f64) -> f64 {
    ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
}

/// Named non-negative weights, one per fused series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionWeights(Vec<(String, f64)>);

impl FusionWeights {
    pub fn new(entries: Vec<(String, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidWeights(
                "at least one weight is required".into(),
            ));
        }
        if let Some((id, w)) = entries.iter().find(|(_, w)| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidWeights(format!(
                "weight for {id} must be finite and non-negative, got {w}"
            )));
        }
        Ok(Self(entries))
    }

    /// Weight 1 for each id.
    pub fn uniform<I: IntoIterator<Item = S>, S: Into<String>>(ids: I) -> Result<Self> {
        Self::new(ids.into_iter().map(|id| (id.into(), 1.0)).collect())
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Pointwise `sum_i weight_i * series_i`; weights pair with series by position.
pub fn fuse(series_list: &[&ScoreSeries], weights: &FusionWeights) -> Result<ScoreSeries> {
    let first = series_list.first().ok_or(Error::EmptySeries)?;
    if series_list.len() != weights.len() {
        return Err(Error::InvalidWeights(format!(
            "{} series but {} weights",
            series_list.len(),
            weights.len()
        )));
    }
    for s in &series_list[1..] {
        check_same_layout(first.layout(), s.layout())?;
    }
    let mut acc = vec![0.0f64; first.len()];
    for (s, (_, w)) in series_list.iter().zip(weights.entries()) {
        for (a, v) in acc.iter_mut().zip(s.values()) {
            *a += w * v;
        }
    }
    ScoreSeries::new(first.layout().clone(), acc)
}
