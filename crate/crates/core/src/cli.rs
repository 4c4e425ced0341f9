//! Command-line front end.
//!
//! Every subcommand writes its results under `--out` (default `.`):
//!
//! | subcommand     | files                                                        |
//! |----------------|--------------------------------------------------------------|
//! | `score`        | `scores.tsv`, `scores.svg` with `--plot`                     |
//! | `evaluate`     | `report.json`, `report.tsv`, `report.svg` with `--plot`      |
//! | `sweep`        | `sweep.json`, `sweep.tsv`, `sweep.svg` with `--plot`         |
//! | `correlate`    | `correlate.json`, `correlate.tsv`                            |
//! | `norm-compare` | `norm_compare.json`, `norm_compare.tsv`, `norm_compare.svg`  |
//! | `synth`        | `manifest.toml` and one GEM1 file per frame                  |
//!
//! Progress and timings go to the log on stderr, never into these files.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::info;

use crate::block::BlockSpec;
use crate::error::{Error, Result};
use crate::ge::ErrorExponent;
use crate::io::{
    load_manifest, read_scores, write_scores, write_synth_dataset, DatasetManifest,
    DegenerateFlags, Population, ScoreFile,
};
use crate::metrics::{ConfigEcho, EvalReport};
use crate::pipeline::{
    clone_error, correlate_into, evaluate_into, load_ge_map, norm_compare_into,
    population_segments, reduce_manifest, score_modalities, score_series, sweep_into, Reduction,
};
use crate::report::{
    emit_curve_plot, emit_sweep_plot, write_report, write_svg, Panel, PlotSpec, ReportFormat,
};
use crate::scoring::{FusionWeights, NormalizationMode};
use crate::series::{check_same_layout, LabelSeries, ScoreSeries};
use crate::synth::{generate, SynthConfig};
use crate::temporal::DEFAULT_RADIUS;

/// Environment variable that sets the worker thread count.
pub const THREADS_ENV: &str = "BLOCKGE_THREADS";

pub const DEFAULT_SWEEP_SIZES: [usize; 8] = [2, 5, 10, 15, 20, 30, 45, 60];

const ANCHORS: &str = "valid, stride 1";
const SALIENCY_POOLING: &str = "dataset";

#[derive(Debug, Parser)]
#[command(
    name = "blockge",
    version,
    about = "Block-level GE scoring and evaluation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-frame GE -> median filter -> normalization -> score file.
    Score(ScoreArgs),
    /// AUC, saliency and normal GE levels for block and frame paths.
    Evaluate(EvaluateArgs),
    /// AUC across a grid of block sizes.
    Sweep(SweepArgs),
    /// Correlation of normal GE levels with target counts, and level ratios.
    Correlate(CorrelateArgs),
    /// Generate a seeded synthetic dataset.
    Synth(SynthArgs),
    /// AUC for dataset vs per-video normalization on two populations.
    NormCompare(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Dataset manifest; repeat once per modality to fuse.
    #[arg(long = "manifest")]
    pub manifests: Vec<PathBuf>,
    #[arg(long, num_args = 2, value_names = ["H", "W"])]
    pub block: Option<Vec<usize>>,
    /// 1 = absolute, 2 = squared error.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub exponent: Option<u8>,
    #[arg(long, default_value_t = DEFAULT_RADIUS)]
    pub radius: usize,
    /// dataset (norm0) or video (norm1).
    #[arg(long, default_value = "dataset")]
    pub norm: NormalizationMode,
    /// all or anomalous.
    #[arg(long)]
    pub population: Option<Population>,
    /// Comma-separated `name=w` or `w`, one per manifest.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also compute the frame-level baseline.
    #[arg(long)]
    pub emit_frame_level: bool,
    #[arg(long)]
    pub plot: bool,
    /// Store every GE map under this directory.
    #[arg(long)]
    pub save_ge: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Evaluate an existing score file instead of scoring the manifest.
    #[arg(long)]
    pub scores: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Square block sizes, or `full` for the whole frame.
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Restrict ratio rows to `A:B` segment pairs; repeatable.
    #[arg(long = "pair")]
    pub pairs: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// TOML synth configuration.
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub manifests: Vec<PathBuf>,
    pub exponent: ErrorExponent,
    pub block: BlockSpec,
    pub radius: usize,
    pub normalization: NormalizationMode,
    pub population: Population,
    /// `None` means weight 1 for every modality.
    pub weights: Option<Vec<(Option<String>, f64)>>,
    pub out: PathBuf,
    pub sweep: Vec<SweepSize>,
    pub seed: Option<u64>,
    pub emit_frame_level: bool,
    pub plot: bool,
    pub save_ge: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            manifests: Vec::new(),
            exponent: ErrorExponent::default(),
            block: BlockSpec::default(),
            radius: DEFAULT_RADIUS,
            normalization: NormalizationMode::default(),
            population: Population::default(),
            weights: None,
            out: PathBuf::from("."),
            sweep: DEFAULT_SWEEP_SIZES
                .iter()
                .map(|&s| SweepSize::Square(s))
                .collect(),
            seed: None,
            emit_frame_level: false,
            plot: false,
            save_ge: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepSize {
    Square(usize),
    Full,
}

fn parse_sweep_size(s: &str) -> Result<SweepSize> {
    match s.trim() {
        "full" => Ok(SweepSize::Full),
        t => t
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .map(SweepSize::Square)
            .ok_or_else(|| Error::InvalidConfig(format!("bad block size {s:?}"))),
    }
}

/// Parse `name=w,...` or `w,...`.
pub fn parse_weights(s: &str) -> Result<Vec<(Option<String>, f64)>> {
    s.split(',')
        .map(|item| {
            let (name, w) = match item.split_once('=') {
                Some((n, w)) => (Some(n.trim().to_string()), w),
                None => (None, item),
            };
            let w: f64 = w
                .trim()
                .parse()
                .map_err(|_| Error::InvalidWeights(format!("cannot parse weight {item:?}")))?;
            Ok((name, w))
        })
        .collect()
}

impl RunConfig {
    /// Flags override manifest echoes, which override the defaults.
    pub fn resolve(args: &CommonArgs, first: Option<&DatasetManifest>) -> Result<Self> {
        let block = match &args.block {
            Some(v) => BlockSpec::new(v[0], v[1])?,
            None => first.and_then(|m| m.block).unwrap_or_default(),
        };
        let exponent = match args.exponent {
            Some(p) => ErrorExponent::try_from(p).map_err(Error::InvalidConfig)?,
            None => first.and_then(|m| m.exponent).unwrap_or_default(),
        };
        Ok(Self {
            manifests: args.manifests.clone(),
            exponent,
            block,
            radius: args.radius,
            normalization: args.norm,
            population: args
                .population
                .or_else(|| first.and_then(|m| m.population))
                .unwrap_or_default(),
            weights: args.weights.as_deref().map(parse_weights).transpose()?,
            out: args.out.clone(),
            sweep: RunConfig::default().sweep,
            seed: args.seed.or_else(|| first.and_then(|m| m.seed)),
            emit_frame_level: args.emit_frame_level,
            plot: args.plot,
            save_ge: args.save_ge.clone(),
        })
    }

    /// Weights named after the modalities they apply to.
    pub fn fusion_weights(&self, names: &[String]) -> Result<FusionWeights> {
        match &self.weights {
            None => FusionWeights::uniform(names.iter().cloned()),
            Some(ws) => {
                if ws.len() != names.len() {
                    return Err(Error::InvalidWeights(format!(
                        "{} weights for {} manifests",
                        ws.len(),
                        names.len()
                    )));
                }
                FusionWeights::new(
                    ws.iter()
                        .zip(names)
                        .map(|((n, w), default)| (n.clone().unwrap_or_else(|| default.clone()), *w))
                        .collect(),
                )
            }
        }
    }

    pub fn echo(&self, weights: &FusionWeights) -> ConfigEcho {
        ConfigEcho {
            exponent: self.exponent.as_u8(),
            block: self.block,
            radius: self.radius,
            normalization: self.normalization,
            population: self.population.to_string(),
            weights: weights.entries().to_vec(),
            seed: self.seed,
            anchors: ANCHORS.to_string(),
            saliency_pooling: SALIENCY_POOLING.to_string(),
        }
    }
}

/// Manifests of one run, checked to share segments and labels.
struct Inputs {
    manifests: Vec<DatasetManifest>,
    names: Vec<String>,
    labels: LabelSeries,
}

fn load_inputs(paths: &[PathBuf]) -> Result<Inputs> {
    if paths.is_empty() {
        return Err(Error::InvalidConfig(
            "at least one --manifest is required".into(),
        ));
    }
    let manifests = paths
        .iter()
        .map(|p| load_manifest(p))
        .collect::<Result<Vec<_>>>()?;
    let labels = manifests[0].labels();
    for (m, p) in manifests.iter().zip(paths).skip(1) {
        check_same_layout(labels.layout(), &m.layout())?;
        if m.labels() != labels {
            return Err(Error::ShapeMismatch(format!(
                "labels in {} differ from {}",
                p.display(),
                paths[0].display()
            )));
        }
    }
    let mut names: Vec<String> = manifests.iter().map(|m| m.name.clone()).collect();
    if names
        .iter()
        .enumerate()
        .any(|(i, n)| names[..i].contains(n))
    {
        names = (0..manifests.len()).map(|i| format!("m{i}")).collect();
    }
    Ok(Inputs {
        manifests,
        names,
        labels,
    })
}

fn reduce_all(inputs: &Inputs, cfg: &RunConfig, blocks: &[BlockSpec]) -> Result<Vec<Reduction>> {
    inputs
        .manifests
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let start = Instant::now();
            let save = cfg.save_ge.as_ref().map(|d| {
                if inputs.manifests.len() > 1 {
                    d.join(&inputs.names[i])
                } else {
                    d.clone()
                }
            });
            let r = reduce_manifest(m, cfg.exponent, blocks, save.as_deref())?;
            info!(
                "reduced {} frames of {} in {:.2?}",
                r.layout.total(),
                m.name,
                start.elapsed()
            );
            Ok(r)
        })
        .collect()
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_reports(report: &EvalReport, out: &Path, stem: &str) -> Result<()> {
    ensure_dir(out)?;
    write_report(
        report,
        &out.join(format!("{stem}.json")),
        ReportFormat::Json,
    )?;
    write_report(
        report,
        &out.join(format!("{stem}.tsv")),
        ReportFormat::Table,
    )
}

/// Score the selected population and return the score file contents.
pub fn cmd_score(cfg: &RunConfig) -> Result<ScoreFile> {
    let inputs = load_inputs(&cfg.manifests)?;
    let weights = cfg.fusion_weights(&inputs.names)?;
    let reductions = reduce_all(&inputs, cfg, &[cfg.block])?;
    let keep = population_segments(cfg.population, &inputs.labels);
    if keep.is_empty() {
        return Err(Error::InvalidConfig(format!(
            "population {} selects no segments",
            cfg.population
        )));
    }

    let mut block_ges = Vec::with_capacity(reductions.len());
    let mut frame_ges = Vec::with_capacity(reductions.len());
    for r in &reductions {
        let block = match &r.block[0] {
            Ok(s) => s.select(&keep),
            Err(e) => return Err(clone_error(e)),
        };
        block_ges.push(block);
        frame_ges.push(r.frame.select(&keep));
    }
    let refs: Vec<&ScoreSeries> = block_ges.iter().collect();
    let block = score_modalities(&refs, &weights, cfg.radius, cfg.normalization)?;
    let frame = if cfg.emit_frame_level {
        let refs: Vec<&ScoreSeries> = frame_ges.iter().collect();
        Some(score_modalities(
            &refs,
            &weights,
            cfg.radius,
            cfg.normalization,
        )?)
    } else {
        None
    };
    Ok(ScoreFile {
        config: cfg.echo(&weights),
        degenerate: DegenerateFlags {
            block: block.degenerate,
            frame: frame
                .as_ref()
                .map(|f| f.degenerate.clone())
                .unwrap_or_default(),
        },
        labels: inputs.labels.select(&keep),
        block_ge: block_ges.swap_remove(0),
        frame_ge: cfg.emit_frame_level.then(|| frame_ges.swap_remove(0)),
        score: block.score,
        frame_score: frame.map(|f| f.score),
    })
}

fn curve_plot(file: &ScoreFile, ge: bool) -> Result<String> {
    let (block, frame) = if ge {
        (&file.block_ge, file.frame_ge.as_ref())
    } else {
        (&file.score, file.frame_score.as_ref())
    };
    let mut panels = Vec::new();
    if let Some(f) = frame {
        panels.push(Panel {
            title: "frame-level".into(),
            series: vec![("frame".into(), f.clone())],
        });
    }
    panels.push(Panel {
        title: "block-level".into(),
        series: vec![("block".into(), block.clone())],
    });
    emit_curve_plot(&PlotSpec {
        panels,
        labels: Some(file.labels.clone()),
        x_label: "frame".into(),
        y_label: if ge { "GE".into() } else { "score".into() },
    })
}

fn run_score(cfg: &RunConfig) -> Result<()> {
    let file = cmd_score(cfg)?;
    ensure_dir(&cfg.out)?;
    write_scores(&cfg.out.join("scores.tsv"), &file)?;
    if cfg.plot {
        write_svg(&cfg.out.join("scores.svg"), &curve_plot(&file, false)?)?;
    }
    Ok(())
}

/// Evaluate a score file, or score the manifests (with the frame-level
/// baseline) and evaluate the result.
pub fn cmd_evaluate(cfg: &RunConfig, scores: Option<&Path>) -> Result<(EvalReport, ScoreFile)> {
    let (file, dataset, counts) = match scores {
        Some(p) => {
            let file = read_scores(p)?;
            let counts = match cfg.manifests.first() {
                Some(m) => {
                    let m = load_manifest(m)?;
                    let layout = m.layout();
                    let ids: Vec<&str> = file
                        .layout()
                        .spans()
                        .iter()
                        .map(|s| s.id.as_str())
                        .collect();
                    Some(
                        ids.iter()
                            .map(|id| {
                                layout
                                    .spans()
                                    .iter()
                                    .position(|s| s.id == *id)
                                    .and_then(|k| m.segments[k].target_count)
                            })
                            .collect(),
                    )
                }
                None => None,
            };
            let name = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            (file, name, counts)
        }
        None => {
            let mut with_frame = cfg.clone();
            with_frame.emit_frame_level = true;
            let file = cmd_score(&with_frame)?;
            let first = load_manifest(&cfg.manifests[0])?;
            let keep = population_segments(cfg.population, &first.labels());
            let counts: Vec<Option<f64>> = keep
                .iter()
                .map(|&k| first.segments[k].target_count)
                .collect();
            (file, first.name.clone(), Some(counts))
        }
    };
    let mut report = EvalReport::new(dataset, file.config.clone());
    let frame = match (&file.frame_ge, &file.frame_score) {
        (Some(g), Some(s)) => Some((g, s)),
        _ => None,
    };
    evaluate_into(
        &mut report,
        &file.labels,
        &file.block_ge,
        &file.score,
        frame,
        counts.as_deref(),
        &file.degenerate,
    );
    Ok((report, file))
}

fn run_evaluate(cfg: &RunConfig, scores: Option<&Path>) -> Result<()> {
    let (report, file) = cmd_evaluate(cfg, scores)?;
    write_reports(&report, &cfg.out, "report")?;
    if cfg.plot {
        write_svg(&cfg.out.join("report.svg"), &curve_plot(&file, true)?)?;
    }
    Ok(())
}

/// AUC per block size. `Full` resolves against the first frame.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<EvalReport> {
    if cfg.sweep.is_empty() {
        return Err(Error::InvalidConfig("empty sweep grid".into()));
    }
    let inputs = load_inputs(&cfg.manifests[..1.min(cfg.manifests.len())])?;
    let m = &inputs.manifests[0];
    let first_dims = match m.frames().next() {
        Some(src) => {
            let map = load_ge_map(m, src, cfg.exponent)?;
            (map.height(), map.width())
        }
        None => return Err(Error::EmptySeries),
    };
    let blocks: Vec<BlockSpec> = cfg
        .sweep
        .iter()
        .map(|s| match *s {
            SweepSize::Square(n) => BlockSpec::square(n),
            SweepSize::Full => BlockSpec::new(first_dims.0, first_dims.1),
        })
        .collect::<Result<_>>()?;
    let weights = cfg.fusion_weights(&inputs.names)?;
    let reductions = reduce_all(&inputs, cfg, &blocks)?;
    let keep = population_segments(cfg.population, &inputs.labels);
    let r = &reductions[0];
    let selected = Reduction {
        layout: r.layout.select(&keep),
        block: r
            .block
            .iter()
            .map(|b| match b {
                Ok(s) => Ok(s.select(&keep)),
                Err(e) => Err(clone_error(e)),
            })
            .collect(),
        frame: r.frame.select(&keep),
    };
    let labels = inputs.labels.select(&keep);
    let mut report = EvalReport::new(m.name.clone(), cfg.echo(&weights));
    sweep_into(
        &mut report,
        &blocks,
        &selected,
        &labels,
        cfg.radius,
        cfg.normalization,
    );
    Ok(report)
}

fn run_sweep(cfg: &RunConfig) -> Result<()> {
    let mut report = cmd_sweep(cfg)?;
    if cfg.plot {
        let sizes: Vec<usize> = report.sweep.iter().map(|r| r.block.h).collect();
        let aucs: Vec<f64> = report
            .sweep
            .iter()
            .map(|r| r.auc.unwrap_or(f64::NAN))
            .collect();
        match emit_sweep_plot(&sizes, &[(report.dataset.clone(), aucs)]) {
            Ok(doc) => {
                ensure_dir(&cfg.out)?;
                write_svg(&cfg.out.join("sweep.svg"), &doc)?;
            }
            Err(e) => {
                report.record("plot", Err(e));
            }
        }
    }
    write_reports(&report, &cfg.out, "sweep")
}

pub fn cmd_correlate(cfg: &RunConfig, pairs: &[String]) -> Result<EvalReport> {
    let inputs = load_inputs(&cfg.manifests[..1.min(cfg.manifests.len())])?;
    let m = &inputs.manifests[0];
    let weights = cfg.fusion_weights(&inputs.names)?;
    let reductions = reduce_all(&inputs, cfg, &[cfg.block])?;
    let keep = population_segments(cfg.population, &inputs.labels);
    if keep.len() < 2 {
        return Err(Error::TooFewSegments { got: keep.len() });
    }
    let r = &reductions[0];
    let block = match &r.block[0] {
        Ok(s) => s.select(&keep),
        Err(e) => return Err(clone_error(e)),
    };
    let counts: Vec<Option<f64>> = keep.iter().map(|&k| m.segments[k].target_count).collect();
    let mut report = EvalReport::new(m.name.clone(), cfg.echo(&weights));
    correlate_into(
        &mut report,
        &inputs.labels.select(&keep),
        &block,
        &r.frame.select(&keep),
        &counts,
    )?;
    if !pairs.is_empty() {
        let wanted: Vec<(String, String)> = pairs
            .iter()
            .map(|p| {
                p.split_once(':')
                    .map(|(a, b)| (a.to_string(), b.to_string()))
                    .ok_or_else(|| Error::InvalidConfig(format!("pair {p:?} is not A:B")))
            })
            .collect::<Result<_>>()?;
        report.ratios.retain(|row| {
            wanted.iter().any(|(a, b)| {
                (row.segment_a == *a && row.segment_b == *b)
                    || (row.segment_a == *b && row.segment_b == *a)
            })
        });
    }
    Ok(report)
}

pub fn cmd_norm_compare(cfg: &RunConfig) -> Result<(EvalReport, Option<String>)> {
    let inputs = load_inputs(&cfg.manifests[..1.min(cfg.manifests.len())])?;
    let m = &inputs.manifests[0];
    let weights = cfg.fusion_weights(&inputs.names)?;
    let reductions = reduce_all(&inputs, cfg, &[cfg.block])?;
    let block = match &reductions[0].block[0] {
        Ok(s) => s.clone(),
        Err(e) => return Err(clone_error(e)),
    };
    let mut report = EvalReport::new(m.name.clone(), cfg.echo(&weights));
    norm_compare_into(&mut report, &block, &inputs.labels, cfg.radius);
    let plot = if cfg.plot {
        let n0 = score_series(&block, cfg.radius, NormalizationMode::Dataset)?;
        let n1 = score_series(&block, cfg.radius, NormalizationMode::PerVideo)?;
        Some(emit_curve_plot(&PlotSpec {
            panels: vec![
                Panel {
                    title: "dataset normalization".into(),
                    series: vec![("norm0".into(), n0.score)],
                },
                Panel {
                    title: "per-video normalization".into(),
                    series: vec![("norm1".into(), n1.score)],
                },
            ],
            labels: Some(inputs.labels.clone()),
            x_label: "frame".into(),
            y_label: "score".into(),
        })?)
    } else {
        None
    };
    Ok((report, plot))
}

pub fn cmd_synth(config: &Path, out: &Path, seed: Option<u64>) -> Result<DatasetManifest> {
    let text = fs::read_to_string(config).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(config.to_path_buf()),
        _ => Error::io(config, e),
    })?;
    let mut cfg: SynthConfig = toml::from_str(&text).map_err(|e| Error::ParseError {
        path: config.to_path_buf(),
        message: e.to_string().trim_end().to_string(),
    })?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let start = Instant::now();
    let dataset = generate(&cfg)?;
    info!(
        "generated {} frames in {:.2?}",
        dataset.maps.len(),
        start.elapsed()
    );
    write_synth_dataset(&dataset, out)
}

/// Configure the global thread pool from [`THREADS_ENV`], if set.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "{THREADS_ENV} must be a positive integer, got {v:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))
}

fn first_manifest(args: &CommonArgs) -> Result<Option<DatasetManifest>> {
    args.manifests.first().map(|p| load_manifest(p)).transpose()
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Score(a) => {
            let cfg = RunConfig::resolve(&a.common, first_manifest(&a.common)?.as_ref())?;
            run_score(&cfg)
        }
        Command::Evaluate(a) => {
            let cfg = RunConfig::resolve(&a.common, first_manifest(&a.common)?.as_ref())?;
            if a.scores.is_none() && cfg.manifests.is_empty() {
                return Err(Error::InvalidConfig(
                    "evaluate needs --scores or --manifest".into(),
                ));
            }
            run_evaluate(&cfg, a.scores.as_deref())
        }
        Command::Sweep(a) => {
            let mut cfg = RunConfig::resolve(&a.common, first_manifest(&a.common)?.as_ref())?;
            if !a.sizes.is_empty() {
                cfg.sweep = a
                    .sizes
                    .iter()
                    .map(|s| parse_sweep_size(s))
                    .collect::<Result<_>>()?;
            }
            run_sweep(&cfg)
        }
        Command::Correlate(a) => {
            let cfg = RunConfig::resolve(&a.common, first_manifest(&a.common)?.as_ref())?;
            let report = cmd_correlate(&cfg, &a.pairs)?;
            write_reports(&report, &cfg.out, "correlate")
        }
        Command::NormCompare(a) => {
            let cfg = RunConfig::resolve(&a, first_manifest(&a)?.as_ref())?;
            let (report, plot) = cmd_norm_compare(&cfg)?;
            write_reports(&report, &cfg.out, "norm_compare")?;
            if let Some(doc) = plot {
                write_svg(&cfg.out.join("norm_compare.svg"), &doc)?;
            }
            Ok(())
        }
        Command::Synth(a) => cmd_synth(&a.config, &a.out, a.seed).map(|_| ()),
    }
}
