//! Score files: tab-separated, one row per frame in layout order
//! (columns below are spaced for reading).
//!
//! ```text
//! # blockge-scores 1
//! # config {"exponent":2,...}
//! # degenerate {"block":[],"frame":["dataset"]}
//! segment  frame  label  block_ge  frame_ge  score  frame_score
//! seg000   0      0      0.0123    0.0041    0.25   NA
//! ```
//!
//! `block_ge` / `frame_ge` are the unfiltered per-frame GEs of the first
//! modality; `score` / `frame_score` are the final (filtered, normalized,
//! fused) anomaly scores. Frame-level columns hold `NA` unless requested.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::ConfigEcho;
use crate::series::{LabelSeries, Layout, ScoreSeries};

const MAGIC_LINE: &str = "# blockge-scores 1";
const HEADER: &str = "segment\tframe\tlabel\tblock_ge\tframe_ge\tscore\tframe_score";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DegenerateFlags {
    pub block: Vec<String>,
    pub frame: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreFile {
    pub config: ConfigEcho,
    pub degenerate: DegenerateFlags,
    pub labels: LabelSeries,
    pub block_ge: ScoreSeries,
    pub frame_ge: Option<ScoreSeries>,
    pub score: ScoreSeries,
    pub frame_score: Option<ScoreSeries>,
}

impl ScoreFile {
    pub fn layout(&self) -> &Layout {
        self.labels.layout()
    }
}

fn fmt_opt(out: &mut String, v: Option<f64>) {
    match v {
        Some(v) => write!(out, "{v}").unwrap(),
        None => out.push_str("NA"),
    }
}

pub fn scores_to_string(file: &ScoreFile) -> Result<String> {
    let layout = file.layout();
    for s in [
        Some(&file.block_ge),
        file.frame_ge.as_ref(),
        Some(&file.score),
        file.frame_score.as_ref(),
    ]
    .into_iter()
    .flatten()
    {
        crate::series::check_same_layout(layout, s.layout())?;
    }
    let mut out = String::new();
    out.push_str(MAGIC_LINE);
    out.push('\n');
    writeln!(
        out,
        "# config {}",
        serde_json::to_string(&file.config).unwrap()
    )
    .unwrap();
    writeln!(
        out,
        "# degenerate {}",
        serde_json::to_string(&file.degenerate).unwrap()
    )
    .unwrap();
    out.push_str(HEADER);
    out.push('\n');
    for (k, span) in layout.spans().iter().enumerate() {
        if span.id.contains(['\t', '\n', '\r']) {
            return Err(Error::InvalidConfig(format!(
                "segment id {:?} contains a tab or newline",
                span.id
            )));
        }
        for (t, idx) in span.range().enumerate() {
            write!(
                out,
                "{}\t{t}\t{}\t{}\t",
                span.id,
                file.labels.segment_labels(k)[t],
                file.block_ge.values()[idx]
            )
            .unwrap();
            fmt_opt(&mut out, file.frame_ge.as_ref().map(|s| s.values()[idx]));
            write!(out, "\t{}\t", file.score.values()[idx]).unwrap();
            fmt_opt(&mut out, file.frame_score.as_ref().map(|s| s.values()[idx]));
            out.push('\n');
        }
    }
    Ok(out)
}

pub fn write_scores(path: &Path, file: &ScoreFile) -> Result<()> {
    let text = scores_to_string(file)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_scores(path: &Path) -> Result<ScoreFile> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::io(path, e),
    })?;
    let err = |line: usize, message: String| Error::ParseError {
        path: path.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, MAGIC_LINE)) => {}
        _ => {
            return Err(Error::BadMagic {
                path: path.to_path_buf(),
            })
        }
    }
    let mut config = None;
    let mut degenerate = DegenerateFlags::default();
    let mut header_seen = false;
    let mut segments: Vec<(String, usize)> = Vec::new();
    let mut labels = Vec::new();
    let mut cols: [Vec<Option<f64>>; 4] = Default::default();

    for (n, line) in lines {
        if let Some(rest) = line.strip_prefix("# config ") {
            config = Some(
                serde_json::from_str::<ConfigEcho>(rest)
                    .map_err(|e| err(n, format!("config: {e}")))?,
            );
            continue;
        }
        if let Some(rest) = line.strip_prefix("# degenerate ") {
            degenerate =
                serde_json::from_str(rest).map_err(|e| err(n, format!("degenerate: {e}")))?;
            continue;
        }
        if !header_seen {
            if line != HEADER {
                return Err(err(n, "expected column header".into()));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 7 {
            return Err(err(
                n,
                format!("expected 7 columns, found {}", fields.len()),
            ));
        }
        let frame: usize = fields[1]
            .parse()
            .map_err(|_| err(n, "frame: not an integer".into()))?;
        match segments.last_mut() {
            Some((id, len)) if id == fields[0] => {
                if frame != *len {
                    return Err(err(n, format!("frame: expected {len}, found {frame}")));
                }
                *len += 1;
            }
            _ => {
                if frame != 0 {
                    return Err(err(n, "frame: segment must start at 0".into()));
                }
                segments.push((fields[0].to_string(), 1));
            }
        }
        let label: i64 = fields[2]
            .parse()
            .map_err(|_| err(n, "label: not an integer".into()))?;
        if label != 0 && label != 1 {
            return Err(Error::LabelOutOfRange {
                segment: fields[0].to_string(),
                frame,
                value: label,
            });
        }
        labels.push(label as u8);
        for (c, (name, text)) in ["block_ge", "frame_ge", "score", "frame_score"]
            .iter()
            .zip(&fields[3..])
            .enumerate()
        {
            let v = if *text == "NA" {
                None
            } else {
                Some(
                    text.parse::<f64>()
                        .map_err(|_| err(n, format!("{name}: not a number")))?,
                )
            };
            cols[c].push(v);
        }
    }
    let config = config.ok_or_else(|| err(2, "missing `# config` line".into()))?;
    let layout = Layout::from_lengths(segments)?;
    let required = |c: usize, name: &str| -> Result<ScoreSeries> {
        let values: Option<Vec<f64>> = cols[c].iter().copied().collect();
        let values = values.ok_or_else(|| err(0, format!("{name}: NA is not allowed")))?;
        ScoreSeries::new(layout.clone(), values)
    };
    let optional = |c: usize, name: &str| -> Result<Option<ScoreSeries>> {
        if cols[c].iter().all(Option::is_none) {
            return Ok(None);
        }
        required(c, name).map(Some)
    };
    Ok(ScoreFile {
        config,
        degenerate,
        labels: LabelSeries::new(layout.clone(), labels)?,
        block_ge: required(0, "block_ge")?,
        frame_ge: optional(1, "frame_ge")?,
        score: required(2, "score")?,
        frame_score: optional(3, "frame_score")?,
    })
}
