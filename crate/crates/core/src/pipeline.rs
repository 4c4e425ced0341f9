//! Frame reduction and score assembly shared by the subcommands.
//!
//! Per-frame work (loading or computing the GE map, building its integral
//! table, reducing it for every requested block) runs as one parallel map
//! over frames. Filtering and normalization follow as whole-series passes.

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::block::{block_level_from_table, frame_level_ge, integral_image, BlockSpec};
use crate::error::{Error, Result};
use crate::ge::{compute_ge_map, ErrorExponent, GeMap};
use crate::io::{
    read_frame, read_gemap, write_gemap, DatasetManifest, DegenerateFlags, FrameSource, Population,
};
use crate::metrics::{
    anomaly_saliency, ge_level_ratio, normal_ge_level, pearson_correlation, roc_auc, EvalReport,
    NormCompareRow, RatioRow, SegmentLevel, SweepRow,
};
use crate::scoring::{fuse, normalize, FusionWeights, NormalizationMode};
use crate::series::{check_same_layout, LabelSeries, Layout, ScoreSeries};
use crate::temporal::median_filter;

/// Per-frame GE statistics for a whole dataset.
#[derive(Debug)]
pub struct Reduction {
    pub layout: Layout,
    /// One entry per requested block, in request order. A block that does
    /// not fit some frame yields that frame's error.
    pub block: Vec<Result<ScoreSeries>>,
    pub frame: ScoreSeries,
}

/// Reduce `layout.total()` frames produced by `load(index)`.
pub fn reduce_frames<F>(layout: &Layout, blocks: &[BlockSpec], load: F) -> Result<Reduction>
where
    F: Fn(usize) -> Result<GeMap> + Sync,
{
    let per_frame: Vec<(Vec<Result<f64>>, f64)> = (0..layout.total())
        .into_par_iter()
        .map(|i| {
            let map = load(i)?;
            let table = integral_image(&map);
            let levels = blocks
                .iter()
                .map(|&b| block_level_from_table(&table, b))
                .collect();
            Ok((levels, frame_level_ge(&map)))
        })
        .collect::<Result<_>>()?;

    let mut block = Vec::with_capacity(blocks.len());
    for b in 0..blocks.len() {
        let mut values = Vec::with_capacity(per_frame.len());
        let mut failure = None;
        for (levels, _) in &per_frame {
            match &levels[b] {
                Ok(v) => values.push(*v),
                Err(e) => {
                    failure = Some(clone_error(e));
                    break;
                }
            }
        }
        block.push(match failure {
            Some(e) => Err(e),
            None => ScoreSeries::new(layout.clone(), values),
        });
    }
    let frame = ScoreSeries::new(layout.clone(), per_frame.iter().map(|(_, f)| *f).collect())?;
    Ok(Reduction {
        layout: layout.clone(),
        block,
        frame,
    })
}

/// Reduce GE maps already in memory, one per frame in layout order.
pub fn reduce_maps(layout: &Layout, maps: &[GeMap], blocks: &[BlockSpec]) -> Result<Reduction> {
    if maps.len() != layout.total() {
        return Err(Error::ShapeMismatch(format!(
            "{} maps for {} frames",
            maps.len(),
            layout.total()
        )));
    }
    reduce_frames(layout, blocks, |i| Ok(maps[i].clone()))
}

/// The GE map of one manifest frame: read directly, or computed from a
/// prediction / ground-truth pair.
pub fn load_ge_map(
    manifest: &DatasetManifest,
    source: &FrameSource,
    exponent: ErrorExponent,
) -> Result<GeMap> {
    match source {
        FrameSource::Ge(p) => read_gemap(&manifest.resolve(p)),
        FrameSource::Pair { pred, gt } => {
            let pred = read_frame(&manifest.resolve(pred))?;
            let gt = read_frame(&manifest.resolve(gt))?;
            compute_ge_map(&pred, &gt, exponent)
        }
    }
}

/// Reduce every frame of a manifest. With `save_ge`, each map is also
/// written as `<dir>/<segment>/<frame>.gem`.
pub fn reduce_manifest(
    manifest: &DatasetManifest,
    exponent: ErrorExponent,
    blocks: &[BlockSpec],
    save_ge: Option<&Path>,
) -> Result<Reduction> {
    let layout = manifest.layout();
    let sources: Vec<&FrameSource> = manifest.frames().collect();
    let names: Vec<(String, usize)> = layout
        .spans()
        .iter()
        .flat_map(|s| (0..s.len).map(move |t| (s.id.clone(), t)))
        .collect();
    if let Some(dir) = save_ge {
        for span in layout.spans() {
            let d = dir.join(&span.id);
            fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        }
    }
    reduce_frames(&layout, blocks, |i| {
        let map = load_ge_map(manifest, sources[i], exponent)?;
        if let Some(dir) = save_ge {
            let (seg, t) = &names[i];
            write_gemap(&dir.join(seg).join(format!("{t:06}.gem")), &map)?;
        }
        Ok(map)
    })
}

/// Segment indices that make up a normalization population.
pub fn population_segments(population: Population, labels: &LabelSeries) -> Vec<usize> {
    match population {
        Population::All => (0..labels.layout().segment_count()).collect(),
        Population::Anomalous => labels.anomalous_segments(),
    }
}

/// Final anomaly scores with the scopes whose range collapsed.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub score: ScoreSeries,
    pub degenerate: Vec<String>,
}

/// Median filter, then normalize.
pub fn score_series(ges: &ScoreSeries, radius: usize, mode: NormalizationMode) -> Result<Scored> {
    let filtered = median_filter(ges, radius)?;
    let n = normalize(&filtered, mode)?;
    Ok(Scored {
        score: n.series,
        degenerate: n.degenerate,
    })
}

/// Score each modality separately, then take the weighted sum. Degenerate
/// scopes of modality `m` are reported as `m:scope` when there is more than
/// one modality.
pub fn score_modalities(
    ges: &[&ScoreSeries],
    weights: &FusionWeights,
    radius: usize,
    mode: NormalizationMode,
) -> Result<Scored> {
    if ges.len() != weights.len() {
        return Err(Error::InvalidWeights(format!(
            "{} weights for {} modalities",
            weights.len(),
            ges.len()
        )));
    }
    let mut scored = Vec::with_capacity(ges.len());
    let mut degenerate = Vec::new();
    for (g, (name, _)) in ges.iter().zip(weights.entries()) {
        let s = score_series(g, radius, mode)?;
        if ges.len() == 1 {
            degenerate.extend(s.degenerate);
        } else {
            degenerate.extend(s.degenerate.into_iter().map(|d| format!("{name}:{d}")));
        }
        scored.push(s.score);
    }
    let refs: Vec<&ScoreSeries> = scored.iter().collect();
    Ok(Scored {
        score: fuse(&refs, weights)?,
        degenerate,
    })
}

/// AUC of the final scores, saliency of the raw GEs and per-segment normal
/// levels, for the block path and (when present) the frame path.
pub fn evaluate_into(
    report: &mut EvalReport,
    labels: &LabelSeries,
    block_ge: &ScoreSeries,
    block_score: &ScoreSeries,
    frame: Option<(&ScoreSeries, &ScoreSeries)>,
    target_counts: Option<&[Option<f64>]>,
    degenerate: &DegenerateFlags,
) {
    report.auc_block = {
        let r = roc_auc(block_score, labels);
        report.record("auc_block", r)
    };
    report.saliency_block = {
        let r = anomaly_saliency(block_ge, labels);
        report.record("saliency_block", r)
    };
    if let Some((frame_ge, frame_score)) = frame {
        report.auc_frame = {
            let r = roc_auc(frame_score, labels);
            report.record("auc_frame", r)
        };
        report.saliency_frame = {
            let r = anomaly_saliency(frame_ge, labels);
            report.record("saliency_frame", r)
        };
    }
    report.segment_levels =
        segment_levels(report, labels, block_ge, frame.map(|f| f.0), target_counts);
    report.degenerate_ranges = degenerate
        .block
        .iter()
        .cloned()
        .chain(degenerate.frame.iter().map(|d| format!("frame:{d}")))
        .collect();
}

fn segment_levels(
    report: &mut EvalReport,
    labels: &LabelSeries,
    block_ge: &ScoreSeries,
    frame_ge: Option<&ScoreSeries>,
    target_counts: Option<&[Option<f64>]>,
) -> Vec<SegmentLevel> {
    let mut rows = Vec::new();
    for (k, span) in labels.layout().spans().iter().enumerate() {
        let lab = labels.segment_labels(k);
        let block = {
            let r = normal_ge_level(&span.id, block_ge.segment_values(k), lab);
            report.record(&format!("level_block:{}", span.id), r)
        };
        let frame = frame_ge.and_then(|f| {
            let r = normal_ge_level(&span.id, f.segment_values(k), lab);
            report.record(&format!("level_frame:{}", span.id), r)
        });
        rows.push(SegmentLevel {
            segment: span.id.clone(),
            target_count: target_counts.and_then(|c| c.get(k).copied().flatten()),
            frame_level: frame,
            block_level: block,
        });
    }
    rows
}

/// Pearson correlation between target counts and normal GE levels, plus the
/// level ratio of every segment pair. Segments without a count or a level
/// are left out of the correlation.
pub fn correlate_into(
    report: &mut EvalReport,
    labels: &LabelSeries,
    block_ge: &ScoreSeries,
    frame_ge: &ScoreSeries,
    target_counts: &[Option<f64>],
) -> Result<()> {
    check_same_layout(labels.layout(), block_ge.layout())?;
    check_same_layout(labels.layout(), frame_ge.layout())?;
    let levels = segment_levels(
        report,
        labels,
        block_ge,
        Some(frame_ge),
        Some(target_counts),
    );

    let pairs = |pick: fn(&SegmentLevel) -> Option<f64>| -> (Vec<f64>, Vec<f64>) {
        levels
            .iter()
            .filter_map(|l| Some((l.target_count?, pick(l)?)))
            .unzip()
    };
    let (xs, ys) = pairs(|l| l.frame_level);
    report.correlation_frame = {
        let r = pearson_correlation(&xs, &ys);
        report.record("correlation_frame", r)
    };
    let (xs, ys) = pairs(|l| l.block_level);
    report.correlation_block = {
        let r = pearson_correlation(&xs, &ys);
        report.record("correlation_block", r)
    };

    let mut ratios = Vec::new();
    for (i, a) in levels.iter().enumerate() {
        for b in &levels[i + 1..] {
            let ratio = |x: Option<f64>, y: Option<f64>| match (x, y) {
                (Some(x), Some(y)) => Some(ge_level_ratio(x, y)),
                _ => None,
            };
            let frame_level = match ratio(a.frame_level, b.frame_level) {
                Some(r) => report.record(&format!("ratio_frame:{}:{}", a.segment, b.segment), r),
                None => None,
            };
            let block_level = match ratio(a.block_level, b.block_level) {
                Some(r) => report.record(&format!("ratio_block:{}:{}", a.segment, b.segment), r),
                None => None,
            };
            ratios.push(RatioRow {
                segment_a: a.segment.clone(),
                segment_b: b.segment.clone(),
                frame_level,
                block_level,
            });
        }
    }
    report.segment_levels = levels;
    report.ratios = ratios;
    Ok(())
}

/// Score and evaluate each block of a sweep. Rows keep grid order; the best
/// block is the first one reaching the highest AUC.
pub fn sweep_into(
    report: &mut EvalReport,
    blocks: &[BlockSpec],
    reduction: &Reduction,
    labels: &LabelSeries,
    radius: usize,
    mode: NormalizationMode,
) {
    let mut best: Option<(BlockSpec, f64)> = None;
    for (&block, ges) in blocks.iter().zip(&reduction.block) {
        let auc = match ges {
            Ok(g) => score_series(g, radius, mode).and_then(|s| roc_auc(&s.score, labels)),
            Err(e) => Err(clone_error(e)),
        };
        let row = match auc {
            Ok(a) => {
                if best.is_none_or(|(_, b)| a > b) {
                    best = Some((block, a));
                }
                SweepRow {
                    block,
                    auc: Some(a),
                    error: None,
                }
            }
            Err(e) => SweepRow {
                block,
                auc: None,
                error: Some(e.to_string()),
            },
        };
        report.sweep.push(row);
    }
    report.sweep_best = best.map(|(b, _)| b);
}

/// Per-block errors are stored once and handed out by value.
pub(crate) fn clone_error(e: &Error) -> Error {
    match e {
        Error::BlockTooLarge {
            block_h,
            block_w,
            map_h,
            map_w,
        } => Error::BlockTooLarge {
            block_h: *block_h,
            block_w: *block_w,
            map_h: *map_h,
            map_w: *map_w,
        },
        Error::InvalidBlock { h, w } => Error::InvalidBlock { h: *h, w: *w },
        other => Error::InvalidConfig(other.to_string()),
    }
}

/// AUC for both normalization modes on the anomalous-segment population and
/// on all segments. Adds a note when per-video normalization loses more
/// than `0.05` AUC on the mixed population.
pub fn norm_compare_into(
    report: &mut EvalReport,
    ges: &ScoreSeries,
    labels: &LabelSeries,
    radius: usize,
) {
    let mut mixed = [None, None];
    for population in [Population::Anomalous, Population::All] {
        let keep = population_segments(population, labels);
        let (g, l) = (ges.select(&keep), labels.select(&keep));
        for (m, mode) in [NormalizationMode::Dataset, NormalizationMode::PerVideo]
            .into_iter()
            .enumerate()
        {
            let auc = if keep.is_empty() {
                Err(Error::EmptySeries)
            } else {
                score_series(&g, radius, mode).and_then(|s| roc_auc(&s.score, &l))
            };
            let (auc, error) = match auc {
                Ok(a) => (Some(a), None),
                Err(e) => (None, Some(e.to_string())),
            };
            if population == Population::All {
                mixed[m] = auc;
            }
            report.norm_compare.push(NormCompareRow {
                population: population.to_string(),
                mode,
                auc,
                error,
            });
        }
    }
    if let [Some(n0), Some(n1)] = mixed {
        if n1 < n0 - 0.05 {
            report.notes.push(format!(
                "per-video normalization on the mixed population loses {:.4} AUC ({n1:.4} vs {n0:.4})",
                n0 - n1
            ));
        }
    }
}
