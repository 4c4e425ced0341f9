//! Dataset manifests.
//!
//! A manifest is one TOML file. Frame paths are relative to the manifest's
//! directory and listed in temporal order; that order is authoritative.
//!
//! ```toml
//! schema_version = 1
//! name = "lobby-test"
//! exponent = 2          # optional echo
//! block = [30, 30]      # optional echo
//!
//! [[segments]]
//! id = "01"
//! target_count = 12.5   # optional
//! ge = ["01/0000.gem", "01/0001.gem"]
//! labels = [0, 1]
//!
//! [[segments]]
//! id = "02"
//! pred = ["02/pred0.ppm"]
//! gt = ["02/gt0.ppm"]
//! labels = [0]
//! ```

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::block::BlockSpec;
use crate::error::{Error, Result};
use crate::ge::ErrorExponent;
use crate::series::{LabelSeries, Layout};
use crate::synth::{SynthDataset, GENERATOR_ID};

use super::gem::write_gemap;

pub const SCHEMA_VERSION: u32 = 1;

/// Which segments enter normalization and evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Population {
    /// Every segment in the manifest.
    #[default]
    All,
    /// Only segments containing at least one abnormal frame.
    Anomalous,
}

impl fmt::Display for Population {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Population::All => "all",
            Population::Anomalous => "anomalous",
        })
    }
}

impl FromStr for Population {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Population::All),
            "anomalous" => Ok(Population::Anomalous),
            other => Err(Error::InvalidConfig(format!(
                "unknown population {other:?} (expected all or anomalous)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameSource {
    /// A precomputed GE map (GEM1 or PGM).
    Ge(PathBuf),
    /// A predicted frame and its ground truth (PGM or PPM).
    Pair { pred: PathBuf, gt: PathBuf },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentEntry {
    pub id: String,
    pub target_count: Option<f64>,
    pub frames: Vec<FrameSource>,
    pub labels: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub name: String,
    pub exponent: Option<ErrorExponent>,
    pub block: Option<BlockSpec>,
    pub population: Option<Population>,
    pub generator: Option<String>,
    pub seed: Option<u64>,
    pub segments: Vec<SegmentEntry>,
    /// Directory that relative frame paths resolve against.
    pub base_dir: PathBuf,
}

impl DatasetManifest {
    pub fn layout(&self) -> Layout {
        Layout::from_lengths(self.segments.iter().map(|s| (s.id.clone(), s.frames.len())))
            .expect("segment ids validated unique")
    }

    pub fn labels(&self) -> LabelSeries {
        LabelSeries::new(
            self.layout(),
            self.segments
                .iter()
                .flat_map(|s| s.labels.iter().copied())
                .collect(),
        )
        .expect("labels validated at load")
    }

    pub fn frame_count(&self) -> usize {
        self.segments.iter().map(|s| s.frames.len()).sum()
    }

    /// All frame sources in layout order.
    pub fn frames(&self) -> impl Iterator<Item = &FrameSource> {
        self.segments.iter().flat_map(|s| s.frames.iter())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn target_counts(&self) -> Vec<Option<f64>> {
        self.segments.iter().map(|s| s.target_count).collect()
    }

    fn validate(&self, path: &Path) -> Result<()> {
        let mut seen = HashSet::new();
        for seg in &self.segments {
            if !seen.insert(seg.id.as_str()) {
                return Err(Error::DuplicateSegmentId(seg.id.clone()));
            }
            if let Some(c) = seg.target_count {
                if !(c.is_finite() && c >= 0.0) {
                    return Err(Error::ParseError {
                        path: path.to_path_buf(),
                        message: format!(
                            "segments.{}.target_count must be finite and >= 0",
                            seg.id
                        ),
                    });
                }
            }
            for frame in &seg.frames {
                let paths: Vec<&PathBuf> = match frame {
                    FrameSource::Ge(p) => vec![p],
                    FrameSource::Pair { pred, gt } => vec![pred, gt],
                };
                for p in paths {
                    let full = self.resolve(p);
                    if !full.is_file() {
                        return Err(Error::MissingFile(full));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    schema_version: u32,
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exponent: Option<ErrorExponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    block: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    population: Option<Population>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default)]
    segments: Vec<RawSegment>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_count: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ge: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pred: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gt: Option<Vec<String>>,
    labels: Vec<i64>,
}

fn path_string(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

impl RawSegment {
    fn into_entry(self, path: &Path) -> Result<SegmentEntry> {
        let field_err = |field: &str, message: String| Error::ParseError {
            path: path.to_path_buf(),
            message: format!("segments.{}.{field}: {message}", self.id),
        };
        let frames: Vec<FrameSource> = match (&self.ge, &self.pred, &self.gt) {
            (Some(ge), None, None) => ge
                .iter()
                .map(|p| FrameSource::Ge(PathBuf::from(p)))
                .collect(),
            (None, Some(pred), Some(gt)) => {
                if pred.len() != gt.len() {
                    return Err(field_err(
                        "gt",
                        format!(
                            "{} ground-truth paths for {} predictions",
                            gt.len(),
                            pred.len()
                        ),
                    ));
                }
                pred.iter()
                    .zip(gt)
                    .map(|(p, g)| FrameSource::Pair {
                        pred: PathBuf::from(p),
                        gt: PathBuf::from(g),
                    })
                    .collect()
            }
            _ => {
                return Err(field_err(
                    "ge",
                    "give either `ge` or both `pred` and `gt`".into(),
                ))
            }
        };
        if frames.len() != self.labels.len() {
            return Err(field_err(
                "labels",
                format!("{} labels for {} frames", self.labels.len(), frames.len()),
            ));
        }
        let mut labels = Vec::with_capacity(self.labels.len());
        for (frame, &value) in self.labels.iter().enumerate() {
            if value != 0 && value != 1 {
                return Err(Error::LabelOutOfRange {
                    segment: self.id.clone(),
                    frame,
                    value,
                });
            }
            labels.push(value as u8);
        }
        Ok(SegmentEntry {
            id: self.id,
            target_count: self.target_count,
            frames,
            labels,
        })
    }

    fn from_entry(seg: &SegmentEntry) -> Self {
        let has_pairs = seg
            .frames
            .iter()
            .any(|f| matches!(f, FrameSource::Pair { .. }));
        let (ge, pred, gt) = if has_pairs {
            let mut pred = Vec::new();
            let mut gt = Vec::new();
            for f in &seg.frames {
                if let FrameSource::Pair { pred: p, gt: g } = f {
                    pred.push(path_string(p));
                    gt.push(path_string(g));
                }
            }
            (None, Some(pred), Some(gt))
        } else {
            let ge = seg
                .frames
                .iter()
                .filter_map(|f| match f {
                    FrameSource::Ge(p) => Some(path_string(p)),
                    FrameSource::Pair { .. } => None,
                })
                .collect();
            (Some(ge), None, None)
        };
        RawSegment {
            id: seg.id.clone(),
            target_count: seg.target_count,
            ge,
            pred,
            gt,
            labels: seg.labels.iter().map(|&l| l as i64).collect(),
        }
    }
}

/// Load and fully validate a manifest; every referenced file must exist.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    let raw: RawManifest = toml::from_str(&text).map_err(|e| Error::ParseError {
        path: path.to_path_buf(),
        message: e.to_string().trim_end().to_string(),
    })?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(Error::ParseError {
            path: path.to_path_buf(),
            message: format!(
                "schema_version: unsupported version {} (expected {SCHEMA_VERSION})",
                raw.schema_version
            ),
        });
    }
    let block = raw
        .block
        .map(|[h, w]| BlockSpec::new(h, w))
        .transpose()
        .map_err(|e| Error::ParseError {
            path: path.to_path_buf(),
            message: format!("block: {e}"),
        })?;
    let segments = raw
        .segments
        .into_iter()
        .map(|s| s.into_entry(path))
        .collect::<Result<Vec<_>>>()?;
    let manifest = DatasetManifest {
        name: raw.name,
        exponent: raw.exponent,
        block,
        population: raw.population,
        generator: raw.generator,
        seed: raw.seed,
        segments,
        base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    manifest.validate(path)?;
    Ok(manifest)
}

pub fn manifest_to_string(manifest: &DatasetManifest) -> String {
    let raw = RawManifest {
        schema_version: SCHEMA_VERSION,
        name: manifest.name.clone(),
        exponent: manifest.exponent,
        block: manifest.block.map(|b| [b.h, b.w]),
        population: manifest.population,
        generator: manifest.generator.clone(),
        seed: manifest.seed,
        segments: manifest
            .segments
            .iter()
            .map(RawSegment::from_entry)
            .collect(),
    };
    toml::to_string(&raw).expect("manifest serializes")
}

pub fn save_manifest(path: &Path, manifest: &DatasetManifest) -> Result<()> {
    fs::write(path, manifest_to_string(manifest)).map_err(|e| Error::io(path, e))
}

/// Write every map of a generated dataset as GEM1 under `dir` and save a
/// manifest next to them. Returns the manifest as written.
pub fn write_synth_dataset(dataset: &SynthDataset, dir: &Path) -> Result<DatasetManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut segments = Vec::with_capacity(dataset.layout.segment_count());
    for (k, span) in dataset.layout.spans().iter().enumerate() {
        let seg_dir = dir.join(&span.id);
        fs::create_dir_all(&seg_dir).map_err(|e| Error::io(&seg_dir, e))?;
        let mut frames = Vec::with_capacity(span.len);
        for (t, map) in dataset.segment_maps(k).iter().enumerate() {
            let rel = PathBuf::from(format!("{}/{t:06}.gem", span.id));
            write_gemap(&dir.join(&rel), map)?;
            frames.push(FrameSource::Ge(rel));
        }
        segments.push(SegmentEntry {
            id: span.id.clone(),
            target_count: Some(dataset.target_counts[k] as f64),
            frames,
            labels: dataset.labels.segment_labels(k).to_vec(),
        });
    }
    let manifest = DatasetManifest {
        name: dataset.config.name.clone(),
        exponent: None,
        block: None,
        population: None,
        generator: Some(GENERATOR_ID.to_string()),
        seed: Some(dataset.config.seed),
        segments,
        base_dir: dir.to_path_buf(),
    };
    save_manifest(&dir.join("manifest.toml"), &manifest)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ge::GeMap;

    fn write_map(dir: &Path, rel: &str) {
        let p = dir.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        write_gemap(&p, &GeMap::new(2, 2, vec![0.0, 1.0, 2.0, 3.0]).unwrap()).unwrap();
    }

    #[test]
    fn minimal_manifest_round_trips_bytes() {
        let dir = tempfile::tempdir().unwrap();
        write_map(dir.path(), "a/0.gem");
        let text = "schema_version = 1\nname = \"tiny\"\n\n[[segments]]\nid = \"a\"\nge = [\"a/0.gem\"]\nlabels = [0]\n";
        let p = dir.path().join("m.toml");
        fs::write(&p, text).unwrap();
        let m = load_manifest(&p).unwrap();
        assert_eq!(m.frame_count(), 1);
        assert_eq!(m.segments[0].labels, vec![0]);
        let p2 = dir.path().join("m2.toml");
        save_manifest(&p2, &m).unwrap();
        assert_eq!(fs::read_to_string(&p2).unwrap(), text);
    }

    #[test]
    fn missing_file_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.toml");
        fs::write(
            &p,
            "schema_version = 1\nname = \"x\"\n[[segments]]\nid = \"a\"\nge = [\"nope.gem\"]\nlabels = [0]\n",
        )
        .unwrap();
        match load_manifest(&p) {
            Err(Error::MissingFile(path)) => assert!(path.ends_with("nope.gem")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn label_and_duplicate_errors() {
        let dir = tempfile::tempdir().unwrap();
        write_map(dir.path(), "0.gem");
        let p = dir.path().join("m.toml");
        fs::write(
            &p,
            "schema_version = 1\nname = \"x\"\n[[segments]]\nid = \"a\"\nge = [\"0.gem\", \"0.gem\"]\nlabels = [0, 2]\n",
        )
        .unwrap();
        assert!(matches!(
            load_manifest(&p),
            Err(Error::LabelOutOfRange {
                frame: 1,
                value: 2,
                ..
            })
        ));
        fs::write(
            &p,
            "schema_version = 1\nname = \"x\"\n[[segments]]\nid = \"a\"\nge = [\"0.gem\"]\nlabels = [0]\n[[segments]]\nid = \"a\"\nge = [\"0.gem\"]\nlabels = [1]\n",
        )
        .unwrap();
        assert!(matches!(
            load_manifest(&p),
            Err(Error::DuplicateSegmentId(_))
        ));
    }

    #[test]
    fn parse_errors_carry_location() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.toml");
        fs::write(&p, "schema_version = 1\nname = \n").unwrap();
        match load_manifest(&p) {
            Err(Error::ParseError { message, .. }) => {
                assert!(message.contains("line 2"), "{message}")
            }
            other => panic!("unexpected {other:?}"),
        }
        fs::write(
            &p,
            "schema_version = 1\nname = \"x\"\n[[segments]]\nid = \"a\"\nlabels = []\n",
        )
        .unwrap();
        match load_manifest(&p) {
            Err(Error::ParseError { message, .. }) => {
                assert!(message.contains("segments.a.ge"), "{message}")
            }
            other => panic!("unexpected {other:?}"),
        }
        fs::write(&p, "schema_version = 9\nname = \"x\"\n").unwrap();
        assert!(matches!(load_manifest(&p), Err(Error::ParseError { .. })));
    }

    #[test]
    fn pair_segments_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for f in ["p0.pgm", "g0.pgm"] {
            fs::write(dir.path().join(f), b"P5\n1 1\n255\n\x10").unwrap();
        }
        let p = dir.path().join("m.toml");
        fs::write(
            &p,
            "schema_version = 1\nname = \"pairs\"\nexponent = 1\nblock = [4, 6]\n\n[[segments]]\nid = \"v\"\ntarget_count = 3.0\npred = [\"p0.pgm\"]\ngt = [\"g0.pgm\"]\nlabels = [1]\n",
        )
        .unwrap();
        let m = load_manifest(&p).unwrap();
        assert_eq!(m.exponent, Some(ErrorExponent::Abs));
        assert_eq!(m.block, Some(BlockSpec { h: 4, w: 6 }));
        save_manifest(&p, &m).unwrap();
        assert_eq!(load_manifest(&p).unwrap(), m);
    }
}
