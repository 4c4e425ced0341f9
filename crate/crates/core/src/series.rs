//! Per-frame series laid out as consecutive video segments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One segment's slice of a flat per-frame series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentSpan {
    pub id: String,
    pub start: usize,
    pub len: usize,
}

impl SegmentSpan {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Segment boundaries shared by every series over the same dataset.
///
/// Spans are contiguous, in order, and cover `0..total` exactly.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Layout {
    spans: Vec<SegmentSpan>,
}

impl Layout {
    /// Build a layout from `(id, length)` pairs in order.
    pub fn from_lengths<I, S>(segments: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut spans = Vec::new();
        let mut start = 0;
        for (id, len) in segments {
            let id = id.into();
            if spans.iter().any(|s: &SegmentSpan| s.id == id) {
                return Err(Error::DuplicateSegmentId(id));
            }
            spans.push(SegmentSpan { id, start, len });
            start += len;
        }
        Ok(Self { spans })
    }

    /// A single segment named `id` covering `len` frames.
    pub fn single(id: impl Into<String>, len: usize) -> Self {
        Self {
            spans: vec![SegmentSpan {
                id: id.into(),
                start: 0,
                len,
            }],
        }
    }

    pub fn spans(&self) -> &[SegmentSpan] {
        &self.spans
    }

    pub fn total(&self) -> usize {
        self.spans.last().map_or(0, |s| s.start + s.len)
    }

    pub fn segment_count(&self) -> usize {
        self.spans.len()
    }

    /// Indices of the first frame of every segment after the first.
    pub fn boundaries(&self) -> Vec<usize> {
        self.spans.iter().skip(1).map(|s| s.start).collect()
    }

    /// Restrict to the segments whose positions are listed, re-packing starts.
    pub fn select(&self, keep: &[usize]) -> Layout {
        let mut start = 0;
        let spans = keep
            .iter()
            .map(|&k| {
                let s = &self.spans[k];
                let span = SegmentSpan {
                    id: s.id.clone(),
                    start,
                    len: s.len,
                };
                start += s.len;
                span
            })
            .collect();
        Layout { spans }
    }

    fn validate(&self) -> Result<()> {
        let mut expected = 0;
        for s in &self.spans {
            if s.start != expected {
                return Err(Error::InvalidSeries(format!(
                    "segment {} starts at {} but previous segments end at {expected}",
                    s.id, s.start
                )));
            }
            expected += s.len;
        }
        Ok(())
    }
}

/// One finite scalar per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries {
    layout: Layout,
    values: Vec<f64>,
}

impl ScoreSeries {
    pub fn new(layout: Layout, values: Vec<f64>) -> Result<Self> {
        layout.validate()?;
        if layout.total() != values.len() {
            return Err(Error::InvalidSeries(format!(
                "layout covers {} frames but {} values were given",
                layout.total(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput { index });
        }
        Ok(Self { layout, values })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn segment_values(&self, k: usize) -> &[f64] {
        &self.values[self.layout.spans[k].range()]
    }

    /// Apply `f` to every value, keeping the layout.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ScoreSeries> {
        ScoreSeries::new(
            self.layout.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn select(&self, keep: &[usize]) -> ScoreSeries {
        let values = keep
            .iter()
            .flat_map(|&k| self.segment_values(k).iter().copied())
            .collect();
        ScoreSeries {
            layout: self.layout.select(keep),
            values,
        }
    }

    /// Append the segments of `other` after this series' segments.
    pub fn concat(&self, other: &ScoreSeries) -> Result<ScoreSeries> {
        let layout = Layout::from_lengths(
            self.layout
                .spans
                .iter()
                .chain(&other.layout.spans)
                .map(|s| (s.id.clone(), s.len)),
        )?;
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        ScoreSeries::new(layout, values)
    }
}

/// One binary label per frame: 0 normal, 1 abnormal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSeries {
    layout: Layout,
    labels: Vec<u8>,
}

impl LabelSeries {
    pub fn new(layout: Layout, labels: Vec<u8>) -> Result<Self> {
        layout.validate()?;
        if layout.total() != labels.len() {
            return Err(Error::InvalidSeries(format!(
                "layout covers {} frames but {} labels were given",
                layout.total(),
                labels.len()
            )));
        }
        if let Some(frame) = labels.iter().position(|&l| l > 1) {
            let span = layout
                .spans
                .iter()
                .find(|s| s.range().contains(&frame))
                .expect("frame inside layout");
            return Err(Error::LabelOutOfRange {
                segment: span.id.clone(),
                frame: frame - span.start,
                value: labels[frame] as i64,
            });
        }
        Ok(Self { layout, labels })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn segment_labels(&self, k: usize) -> &[u8] {
        &self.labels[self.layout.spans[k].range()]
    }

    pub fn select(&self, keep: &[usize]) -> LabelSeries {
        let labels = keep
            .iter()
            .flat_map(|&k| self.segment_labels(k).iter().copied())
            .collect();
        LabelSeries {
            layout: self.layout.select(keep),
            labels,
        }
    }

    /// Positions of segments with at least one abnormal frame.
    pub fn anomalous_segments(&self) -> Vec<usize> {
        (0..self.layout.segment_count())
            .filter(|&k| self.segment_labels(k).contains(&1))
            .collect()
    }

    pub fn concat(&self, other: &LabelSeries) -> Result<LabelSeries> {
        let layout = Layout::from_lengths(
            self.layout
                .spans
                .iter()
                .chain(&other.layout.spans)
                .map(|s| (s.id.clone(), s.len)),
        )?;
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        LabelSeries::new(layout, labels)
    }
}

pub(crate) fn check_same_layout(a: &Layout, b: &Layout) -> Result<()> {
    if a != b {
        return Err(Error::ShapeMismatch(format!(
            "segment structures differ ({} segments / {} frames vs {} segments / {} frames)",
            a.segment_count(),
            a.total(),
            b.segment_count(),
            b.total()
        )));
    }
    Ok(())
}
