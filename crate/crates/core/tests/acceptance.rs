//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::fs;
use std::panic;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blockge::block::{block_level_ge, block_means, frame_level_ge, BlockSpec};
use blockge::cli::{cmd_evaluate, cmd_score, RunConfig};
use blockge::ge::GeMap;
use blockge::io::{
    load_manifest, manifest_to_string, read_gemap, read_scores, scores_to_string, write_scores,
    write_synth_dataset,
};
use blockge::metrics::{
    anomaly_saliency, normal_ge_level, pearson_correlation, roc_auc, roc_auc_slices,
};
use blockge::pipeline::{reduce_frames, reduce_maps, score_modalities, score_series};
use blockge::report::{
    emit_curve_plot, emit_sweep_plot, report_to_string, Panel, PlotSpec, ReportFormat,
};
use blockge::scoring::{FusionWeights, NormalizationMode};
use blockge::series::{LabelSeries, Layout, ScoreSeries};
use blockge::synth::{
    generate, AnomalyWindow, SegmentConfig, SynthConfig, SynthDataset, DEFAULT_MAX_RETRIES,
};
use blockge::temporal::median_filter;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const COUNTS: [usize; 5] = [5, 10, 15, 20, 25];

/// 64x64 frames, 8x8 normal blobs at 0.2, a 12x12 anomaly blob at 1.0 in
/// frames [80, 140) of each 200-frame segment.
fn family(seed: u64, noise: f64, counts: &[usize], window: Option<(usize, usize)>) -> SynthConfig {
    SynthConfig {
        name: "family".into(),
        height: 64,
        width: 64,
        normal_blob: 8,
        normal_intensity: 0.2,
        noise,
        seed,
        max_retries: DEFAULT_MAX_RETRIES,
        segments: counts
            .iter()
            .map(|&c| SegmentConfig {
                length: 200,
                target_count: c,
                anomalies: window
                    .map(|(start, end)| AnomalyWindow {
                        start,
                        end,
                        size: 12,
                        intensity: 1.0,
                    })
                    .into_iter()
                    .collect(),
            })
            .collect(),
    }
}

fn criterion5_dataset(seed: u64) -> SynthDataset {
    generate(&family(seed, 0.02, &COUNTS, Some((80, 140)))).expect("criterion 5 dataset")
}

fn block30() -> BlockSpec {
    BlockSpec::square(30).unwrap()
}

fn random_map(rng: &mut ChaCha8Rng, h: usize, w: usize, scale: f32) -> GeMap {
    GeMap::new(
        h,
        w,
        (0..h * w).map(|_| rng.random::<f32>() * scale).collect(),
    )
    .unwrap()
}

fn c1_block_mean_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let map = random_map(&mut rng, 64, 64, 1.0);
        let v = map.values();
        for h in 1..=16 {
            for w in 1..=16 {
                let grid = block_means(&map, BlockSpec::new(h, w).unwrap()).unwrap();
                for r in 0..=64 - h {
                    for c in 0..=64 - w {
                        let mut sum = 0.0f64;
                        for i in r..r + h {
                            for j in c..c + w {
                                sum += v[i * 64 + j] as f64;
                            }
                        }
                        let expected = sum / (h * w) as f64;
                        let rel = (grid.get(r, c) - expected).abs()
                            / expected.abs().max(f64::MIN_POSITIVE);
                        worst = worst.max(rel);
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-5 && elapsed < Duration::from_secs(60),
        format!("max relative error {worst:.2e} (<= 1e-5), {elapsed:.2?} (< 60 s)"),
    )
}

fn c2_degenerate_blocks() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut worst_max, mut worst_mean) = (0.0f64, 0.0f64);
    for n in 0..1000 {
        let h = rng.random_range(1..=48);
        let w = rng.random_range(1..=48);
        let scale = [1.0, 0.01, 10.0][n % 3];
        let map = random_map(&mut rng, h, w, scale);
        let one = block_level_ge(&map, BlockSpec::new(1, 1).unwrap()).unwrap();
        worst_max = worst_max.max((one - map.max_value() as f64).abs());
        let full = block_level_ge(&map, BlockSpec::full_frame(&map)).unwrap();
        worst_mean = worst_mean.max((full - frame_level_ge(&map)).abs());
    }
    outcome(
        worst_max <= 1e-9 && worst_mean <= 1e-9,
        format!("1x1 vs pixel max {worst_max:.2e}, HxW vs frame mean {worst_mean:.2e} (<= 1e-9) on 1000 maps"),
    )
}

fn naive_median(values: &[f64], radius: usize) -> Vec<f64> {
    (0..values.len())
        .map(|t| {
            let lo = t.saturating_sub(radius);
            let hi = (t + radius + 1).min(values.len());
            let mut w = values[lo..hi].to_vec();
            w.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let m = w.len();
            if m % 2 == 1 {
                w[m / 2]
            } else {
                (w[m / 2 - 1] + w[m / 2]) / 2.0
            }
        })
        .collect()
}

fn c3_median_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut mismatches = 0;
    for n in 0..1000 {
        let len = rng.random_range(1..=500);
        let radius = rng.random_range(0..=20);
        let values: Vec<f64> = (0..len)
            .map(|_| {
                if n % 2 == 0 {
                    rng.random_range(0..6) as f64
                } else {
                    rng.random::<f64>()
                }
            })
            .collect();
        // split into 1-4 segments
        let mut cuts: Vec<usize> = (0..rng.random_range(0..=3))
            .map(|_| rng.random_range(0..=len))
            .collect();
        cuts.push(0);
        cuts.push(len);
        cuts.sort_unstable();
        let lengths: Vec<(String, usize)> = cuts
            .windows(2)
            .enumerate()
            .map(|(i, c)| (format!("s{i}"), c[1] - c[0]))
            .collect();
        let layout = Layout::from_lengths(lengths).unwrap();
        let series = ScoreSeries::new(layout.clone(), values.clone()).unwrap();
        let out = median_filter(&series, radius).unwrap();
        for (k, span) in layout.spans().iter().enumerate() {
            if out.segment_values(k) != naive_median(&values[span.range()], radius).as_slice() {
                mismatches += 1;
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{mismatches} mismatching segments over 1000 series (exact)"),
    )
}

fn pairwise_auc(scores: &[f64], labels: &[u8]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        if labels[i] != 1 {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] != 0 {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

fn c4_auc_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (mut worst, mut worst_mono) = (0.0f64, 0.0f64);
    let mut done = 0;
    while done < 200 {
        let n = rng.random_range(2..=300);
        let levels = [2, 3, 5, 1000][done % 4];
        let scores: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0..levels) as f64 / 7.0)
            .collect();
        let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.3))).collect();
        if labels.iter().all(|&l| l == labels[0]) {
            continue;
        }
        let auc = roc_auc_slices(&scores, &labels).unwrap();
        worst = worst.max((auc - pairwise_auc(&scores, &labels)).abs());
        for f in [
            |x: f64| 3.0 * x - 1.0,
            |x: f64| x * x * x + x,
            |x: f64| (x + 1.0).ln(),
        ] {
            let t: Vec<f64> = scores.iter().map(|&x| f(x)).collect();
            worst_mono = worst_mono.max((roc_auc_slices(&t, &labels).unwrap() - auc).abs());
        }
        done += 1;
    }
    outcome(
        worst <= 1e-9 && worst_mono <= 1e-12,
        format!("vs pairwise {worst:.2e} (<= 1e-9), monotone transforms {worst_mono:.2e} (<= 1e-12), 200 instances"),
    )
}

fn c5_saliency() -> Outcome {
    let start = Instant::now();
    let d = criterion5_dataset(1);
    let r = reduce_maps(&d.layout, &d.maps, &[block30()]).unwrap();
    let block = anomaly_saliency(r.block[0].as_ref().unwrap(), &d.labels).unwrap();
    let frame = anomaly_saliency(&r.frame, &d.labels).unwrap();
    let elapsed = start.elapsed();
    let ratio = block / frame;
    outcome(
        ratio >= 1.5 && elapsed < Duration::from_secs(30),
        format!("block saliency {block:.4} / frame saliency {frame:.4} = {ratio:.3} (>= 1.5), {elapsed:.2?} (< 30 s)"),
    )
}

fn segment_levels(ges: &ScoreSeries, labels: &LabelSeries) -> Vec<f64> {
    labels
        .layout()
        .spans()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            normal_ge_level(&s.id, ges.segment_values(k), labels.segment_labels(k)).unwrap()
        })
        .collect()
}

fn c6_correlation() -> Outcome {
    let d = generate(&family(1, 0.0, &COUNTS, Some((80, 140)))).unwrap();
    let r = reduce_maps(&d.layout, &d.maps, &[block30()]).unwrap();
    let counts: Vec<f64> = COUNTS.iter().map(|&c| c as f64).collect();
    let frame = pearson_correlation(&counts, &segment_levels(&r.frame, &d.labels)).unwrap();
    let block_levels = segment_levels(r.block[0].as_ref().unwrap(), &d.labels);
    let block = pearson_correlation(&counts, &block_levels);
    let block_text = match &block {
        Ok(b) => format!("{b:.4}"),
        Err(e) => e.to_string(),
    };
    let pass = (frame - 1.0).abs() <= 1e-9 && matches!(block, Ok(b) if b <= 0.5);
    outcome(
        pass,
        format!("frame-level r {frame:.12} (1 +- 1e-9), block-level r {block_text} (<= 0.5)"),
    )
}

fn c7_ratio() -> Outcome {
    let d = match generate(&family(1, 0.0, &[30, 10], None)) {
        Ok(d) => d,
        Err(e) => return outcome(false, format!("dataset generation failed: {e}")),
    };
    let r = reduce_maps(&d.layout, &d.maps, &[block30()]).unwrap();
    let f = segment_levels(&r.frame, &d.labels);
    let b = segment_levels(r.block[0].as_ref().unwrap(), &d.labels);
    let frame = f[0] / f[1];
    let block = b[0].max(b[1]) / b[0].min(b[1]);
    outcome(
        (frame - 3.0).abs() <= 1e-6 && block <= 1.2,
        format!("frame-level ratio {frame:.9} (3 +- 1e-6), block-level ratio {block:.4} (<= 1.2)"),
    )
}

fn scored_auc(ges: &ScoreSeries, labels: &LabelSeries, mode: NormalizationMode) -> f64 {
    let s = score_series(ges, 15, mode).unwrap();
    roc_auc(&s.score, labels).unwrap()
}

fn c8_auc_improvement() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for seed in SEEDS {
        let d = criterion5_dataset(seed);
        let r = reduce_maps(&d.layout, &d.maps, &[block30()]).unwrap();
        let block = scored_auc(
            r.block[0].as_ref().unwrap(),
            &d.labels,
            NormalizationMode::Dataset,
        );
        let frame = scored_auc(&r.frame, &d.labels, NormalizationMode::Dataset);
        pass &= block >= frame + 0.05 && block >= 0.95;
        parts.push(format!("seed {seed}: block {block:.4} frame {frame:.4}"));
    }
    outcome(
        pass,
        format!("{} (block >= frame + 0.05 and >= 0.95)", parts.join("; ")),
    )
}

const SWEEP: [usize; 8] = [2, 5, 10, 15, 20, 30, 45, 60];

fn c9_sweep_shape() -> Outcome {
    let blocks: Vec<BlockSpec> = SWEEP
        .iter()
        .map(|&s| BlockSpec::square(s).unwrap())
        .collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for seed in SEEDS {
        let d = criterion5_dataset(seed);
        let r = reduce_maps(&d.layout, &d.maps, &blocks).unwrap();
        let aucs: Vec<f64> = r
            .block
            .iter()
            .map(|g| scored_auc(g.as_ref().unwrap(), &d.labels, NormalizationMode::Dataset))
            .collect();
        // first occurrence of the maximum
        let best = aucs
            .iter()
            .enumerate()
            .fold(0, |b, (i, &a)| if a > aucs[b] { i } else { b });
        let interior = best != 0 && best != SWEEP.len() - 1;
        pass &= interior && (6..=24).contains(&SWEEP[best]);
        let curve: Vec<String> = aucs.iter().map(|a| format!("{a:.3}")).collect();
        parts.push(format!(
            "seed {seed}: argmax {} [{}]",
            SWEEP[best],
            curve.join(" ")
        ));
    }
    outcome(
        pass,
        format!("{} (interior argmax within [6, 24])", parts.join("; ")),
    )
}

fn c10_normalization() -> Outcome {
    let mut cfg = family(1, 0.02, &COUNTS, Some((80, 140)));
    for c in [10, 20] {
        cfg.segments.push(SegmentConfig {
            length: 200,
            target_count: c,
            anomalies: vec![],
        });
    }
    let d = generate(&cfg).unwrap();
    let r = reduce_maps(&d.layout, &d.maps, &[block30()]).unwrap();
    let ges = r.block[0].as_ref().unwrap();
    let norm0 = scored_auc(ges, &d.labels, NormalizationMode::Dataset);
    let norm1 = scored_auc(ges, &d.labels, NormalizationMode::PerVideo);
    let raw = roc_auc(&median_filter(ges, 15).unwrap(), &d.labels).unwrap();
    outcome(
        norm1 <= norm0 - 0.05 && (norm0 - raw).abs() <= 1e-12,
        format!(
            "norm0 {norm0:.4}, norm1 {norm1:.4} (<= norm0 - 0.05), |norm0 - raw| {:.1e} (<= 1e-12)",
            (norm0 - raw).abs()
        ),
    )
}

fn c11_fusion() -> Outcome {
    // modality A sees the anomaly in the first half of the window, B in the second
    let a = generate(&family(11, 0.02, &COUNTS, Some((80, 110)))).unwrap();
    let b = generate(&family(12, 0.02, &COUNTS, Some((110, 140)))).unwrap();
    let union: Vec<u8> = a
        .labels
        .labels()
        .iter()
        .zip(b.labels.labels())
        .map(|(&x, &y)| x | y)
        .collect();
    let labels = LabelSeries::new(a.layout.clone(), union).unwrap();
    let ga = reduce_maps(&a.layout, &a.maps, &[block30()])
        .unwrap()
        .block
        .remove(0)
        .unwrap();
    let gb = reduce_maps(&b.layout, &b.maps, &[block30()])
        .unwrap()
        .block
        .remove(0)
        .unwrap();
    let auc_a = scored_auc(&ga, &labels, NormalizationMode::Dataset);
    let auc_b = scored_auc(&gb, &labels, NormalizationMode::Dataset);
    let w = FusionWeights::new(vec![("a".into(), 1.0), ("b".into(), 1.0)]).unwrap();
    let fused = score_modalities(&[&ga, &gb], &w, 15, NormalizationMode::Dataset).unwrap();
    let auc = roc_auc(&fused.score, &labels).unwrap();
    outcome(
        auc >= auc_a.max(auc_b),
        format!("fused {auc:.4} vs A {auc_a:.4}, B {auc_b:.4} (fused >= max)"),
    )
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn c12_determinism() -> Outcome {
    let cfg = SynthConfig {
        name: "det".into(),
        height: 40,
        width: 48,
        normal_blob: 6,
        normal_intensity: 0.3,
        noise: 0.05,
        seed: 9,
        max_retries: DEFAULT_MAX_RETRIES,
        segments: vec![
            SegmentConfig {
                length: 30,
                target_count: 4,
                anomalies: vec![AnomalyWindow {
                    start: 10,
                    end: 18,
                    size: 10,
                    intensity: 1.5,
                }],
            },
            SegmentConfig {
                length: 25,
                target_count: 7,
                anomalies: vec![],
            },
        ],
    };
    let tmp = tempfile::tempdir().unwrap();
    let (d1, d2) = (tmp.path().join("a"), tmp.path().join("b"));
    let data = generate(&cfg).unwrap();
    write_synth_dataset(&data, &d1).unwrap();
    write_synth_dataset(&generate(&cfg).unwrap(), &d2).unwrap();
    let mut problems = Vec::new();

    let listing = files(&d1);
    if listing != files(&d2) {
        problems.push("dataset file lists differ".to_string());
    }
    for f in &listing {
        if fs::read(d1.join(f)).unwrap() != fs::read(d2.join(f)).unwrap() {
            problems.push(format!("dataset file {} differs", f.display()));
        }
    }

    // GEM1 bit-exact
    let mut i = 0;
    for span in data.layout.spans() {
        for t in 0..span.len {
            let back = read_gemap(&d1.join(&span.id).join(format!("{t:06}.gem"))).unwrap();
            let same = back.height() == data.maps[i].height()
                && back
                    .values()
                    .iter()
                    .map(|v| v.to_bits())
                    .eq(data.maps[i].values().iter().map(|v| v.to_bits()));
            if !same {
                problems.push(format!("GEM1 round trip differs for frame {i}"));
            }
            i += 1;
        }
    }

    // manifest text round trip
    let mpath = d1.join("manifest.toml");
    let text = fs::read_to_string(&mpath).unwrap();
    let manifest = load_manifest(&mpath).unwrap();
    if manifest_to_string(&manifest) != text {
        problems.push("manifest round trip changed the text".into());
    }

    // score files, reports, plots
    let run = |dir: &Path| {
        let rc = RunConfig {
            manifests: vec![dir.join("manifest.toml")],
            block: BlockSpec::square(12).unwrap(),
            radius: 3,
            emit_frame_level: true,
            ..RunConfig::default()
        };
        let file = cmd_score(&rc).unwrap();
        let (report, _) = cmd_evaluate(&rc, None).unwrap();
        let plot = emit_curve_plot(&PlotSpec {
            panels: vec![
                Panel {
                    title: "frame".into(),
                    series: vec![("frame".into(), file.frame_score.clone().unwrap())],
                },
                Panel {
                    title: "block".into(),
                    series: vec![("block".into(), file.score.clone())],
                },
            ],
            labels: Some(file.labels.clone()),
            x_label: "frame".into(),
            y_label: "score".into(),
        })
        .unwrap();
        let sweep = emit_sweep_plot(&[2, 5, 10], &[("det".into(), vec![0.5, 0.9, 0.7])]).unwrap();
        (
            file.clone(),
            scores_to_string(&file).unwrap(),
            report_to_string(&report, ReportFormat::Json),
            report_to_string(&report, ReportFormat::Table),
            plot,
            sweep,
        )
    };
    let first = run(&d1);
    let second = run(&d1);
    let other = run(&d2);
    for (name, a, b, c) in [
        ("score file", &first.1, &second.1, &other.1),
        ("json report", &first.2, &second.2, &other.2),
        ("table report", &first.3, &second.3, &other.3),
        ("curve svg", &first.4, &second.4, &other.4),
        ("sweep svg", &first.5, &second.5, &other.5),
    ] {
        if a != b || a != c {
            problems.push(format!("{name} not byte-identical"));
        }
    }
    let spath = tmp.path().join("scores.tsv");
    write_scores(&spath, &first.0).unwrap();
    if read_scores(&spath).unwrap() != first.0 {
        problems.push("score file round trip differs".into());
    }

    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!(
                "{} dataset files, score file, reports and SVGs byte-identical; GEM1, manifest and score round trips lossless",
                listing.len()
            )
        } else {
            problems.join("; ")
        },
    )
}

fn c13_performance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1313);
    let pool: Vec<GeMap> = (0..16)
        .map(|_| random_map(&mut rng, 384, 512, 1.0))
        .collect();
    let layout = Layout::from_lengths((0..10).map(|k| (format!("v{k}"), 100))).unwrap();
    let start = Instant::now();
    let r = reduce_frames(&layout, &[block30()], |i| Ok(pool[i % pool.len()].clone())).unwrap();
    let scored =
        score_series(r.block[0].as_ref().unwrap(), 15, NormalizationMode::Dataset).unwrap();
    let elapsed = start.elapsed();
    outcome(
        scored.score.len() == 1000 && elapsed < Duration::from_secs(10),
        format!(
            "1000 frames of 384x512, 30x30 block, filter + normalize in {elapsed:.2?} (< 10 s) on {} thread(s)",
            rayon::current_num_threads()
        ),
    )
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 13] = [
        ("block-mean oracle", c1_block_mean_oracle),
        ("degenerate-block identities", c2_degenerate_blocks),
        ("median-filter oracle", c3_median_oracle),
        ("AUC oracle", c4_auc_oracle),
        ("saliency direction", c5_saliency),
        ("correlation direction", c6_correlation),
        ("ratio direction", c7_ratio),
        ("AUC improvement direction", c8_auc_improvement),
        ("sweep shape", c9_sweep_shape),
        ("normalization comparison", c10_normalization),
        ("fusion", c11_fusion),
        ("determinism and round trips", c12_determinism),
        ("performance envelope", c13_performance),
    ];
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.2?}]",
            n + 1,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            start.elapsed()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
