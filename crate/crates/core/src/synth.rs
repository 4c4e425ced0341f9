//! Seeded synthetic GE-map datasets.
//!
//! Each frame is uniform background noise in `[0, noise)` plus `target_count`
//! square "foreground" blobs of constant intensity at random non-overlapping
//! positions. Frames inside an anomaly window additionally carry one square
//! blob of the window's size and intensity. Blobs are placed by rejection
//! sampling; each segment draws from its own ChaCha8 stream so segments can
//! be generated independently and in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ge::GeMap;
use crate::series::{LabelSeries, Layout};

/// Identifier recorded in manifests of generated datasets.
pub const GENERATOR_ID: &str = "chacha8:seed_from_u64:stream=segment_index";

pub const DEFAULT_MAX_RETRIES: usize = 1000;

/// Frames `[start, end)` of a segment contain a `size x size` blob of
/// `intensity`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyWindow {
    pub start: usize,
    pub end: usize,
    pub size: usize,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentConfig {
    pub length: usize,
    pub target_count: usize,
    #[serde(default)]
    pub anomalies: Vec<AnomalyWindow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub height: usize,
    pub width: usize,
    pub normal_blob: usize,
    pub normal_intensity: f64,
    #[serde(default)]
    pub noise: f64,
    pub seed: u64,
    #[serde(default = "default_retries")]
    pub max_retries: usize,
    pub segments: Vec<SegmentConfig>,
}

fn default_name() -> String {
    "synth".to_string()
}

fn default_retries() -> usize {
    DEFAULT_MAX_RETRIES
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.height == 0 || self.width == 0 {
            return bad("frame size must be at least 1x1".into());
        }
        if self.normal_blob == 0 || self.normal_blob > self.height.min(self.width) {
            return bad(format!(
                "normal blob size {} does not fit a {}x{} frame",
                self.normal_blob, self.height, self.width
            ));
        }
        if !(self.normal_intensity.is_finite() && self.normal_intensity >= 0.0) {
            return bad("normal intensity must be finite and >= 0".into());
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return bad("noise amplitude must be finite and >= 0".into());
        }
        if self.max_retries == 0 {
            return bad("max_retries must be positive".into());
        }
        if self.segments.is_empty() {
            return bad("at least one segment is required".into());
        }
        for (k, seg) in self.segments.iter().enumerate() {
            for a in &seg.anomalies {
                if a.start >= a.end || a.end > seg.length {
                    return bad(format!(
                        "segment {k}: anomaly window [{}, {}) outside [0, {})",
                        a.start, a.end, seg.length
                    ));
                }
                if a.size == 0 || a.size > self.height.min(self.width) {
                    return bad(format!(
                        "segment {k}: anomaly blob size {} does not fit",
                        a.size
                    ));
                }
                if !(a.intensity.is_finite() && a.intensity > self.normal_intensity) {
                    return bad(format!(
                        "segment {k}: anomaly intensity {} must exceed normal intensity {}",
                        a.intensity, self.normal_intensity
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn segment_id(k: usize) -> String {
        format!("seg{k:03}")
    }
}

/// Generated maps, labels and per-segment target counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    pub config: SynthConfig,
    pub layout: Layout,
    /// One map per frame in layout order.
    pub maps: Vec<GeMap>,
    pub labels: LabelSeries,
    pub target_counts: Vec<usize>,
}

impl SynthDataset {
    pub fn segment_maps(&self, k: usize) -> &[GeMap] {
        &self.maps[self.layout.spans()[k].range()]
    }
}

pub fn generate(config: &SynthConfig) -> Result<SynthDataset> {
    config.validate()?;
    let per_segment: Vec<(Vec<GeMap>, Vec<u8>)> = config
        .segments
        .par_iter()
        .enumerate()
        .map(|(k, seg)| generate_segment(config, k, seg))
        .collect::<Result<_>>()?;

    let layout = Layout::from_lengths(
        config
            .segments
            .iter()
            .enumerate()
            .map(|(k, s)| (SynthConfig::segment_id(k), s.length)),
    )?;
    let mut maps = Vec::with_capacity(layout.total());
    let mut labels = Vec::with_capacity(layout.total());
    for (m, l) in per_segment {
        maps.extend(m);
        labels.extend(l);
    }
    Ok(SynthDataset {
        config: config.clone(),
        labels: LabelSeries::new(layout.clone(), labels)?,
        layout,
        maps,
        target_counts: config.segments.iter().map(|s| s.target_count).collect(),
    })
}

fn generate_segment(
    config: &SynthConfig,
    k: usize,
    seg: &SegmentConfig,
) -> Result<(Vec<GeMap>, Vec<u8>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(k as u64);
    let mut maps = Vec::with_capacity(seg.length);
    let mut labels = Vec::with_capacity(seg.length);
    for t in 0..seg.length {
        let active: Vec<&AnomalyWindow> = seg
            .anomalies
            .iter()
            .filter(|a| (a.start..a.end).contains(&t))
            .collect();
        labels.push(u8::from(!active.is_empty()));
        maps.push(generate_frame(
            config,
            &mut rng,
            seg.target_count,
            &active,
            k,
            t,
        )?);
    }
    Ok((maps, labels))
}

fn generate_frame(
    config: &SynthConfig,
    rng: &mut ChaCha8Rng,
    targets: usize,
    anomalies: &[&AnomalyWindow],
    segment: usize,
    frame: usize,
) -> Result<GeMap> {
    let (h, w) = (config.height, config.width);
    let noise = config.noise as f32;
    let mut values: Vec<f32> = if noise > 0.0 {
        (0..h * w).map(|_| rng.random::<f32>() * noise).collect()
    } else {
        vec![0.0; h * w]
    };
    let mut occupied = vec![false; h * w];

    // larger blobs first; they are the hardest to fit
    let mut blobs: Vec<(usize, f32)> = anomalies
        .iter()
        .map(|a| (a.size, a.intensity as f32))
        .collect();
    blobs.extend(std::iter::repeat_n(
        (config.normal_blob, config.normal_intensity as f32),
        targets,
    ));

    for (size, intensity) in blobs {
        let (r0, c0) = place(rng, &occupied, h, w, size, config.max_retries).ok_or(
            Error::PlacementFailure {
                segment,
                frame,
                size,
                retries: config.max_retries,
            },
        )?;
        for i in r0..r0 + size {
            for j in c0..c0 + size {
                occupied[i * w + j] = true;
                values[i * w + j] += intensity;
            }
        }
    }
    GeMap::new(h, w, values)
}

fn place(
    rng: &mut ChaCha8Rng,
    occupied: &[bool],
    h: usize,
    w: usize,
    size: usize,
    retries: usize,
) -> Option<(usize, usize)> {
    for _ in 0..retries {
        let r0 = rng.random_range(0..=h - size);
        let c0 = rng.random_range(0..=w - size);
        let free =
            (r0..r0 + size).all(|i| !occupied[i * w + c0..i * w + c0 + size].contains(&true));
        if free {
            return Some((r0, c0));
        }
    }
    None
}
