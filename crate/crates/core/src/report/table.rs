//! Tabular report layout.
//!
//! Tab-separated. A two-line preamble (`# dataset`, `# config`) is followed
//! by these sections, always in this order and always with their column
//! header, even when empty:
//!
//! | section            | columns                                                                                   |
//! |--------------------|-------------------------------------------------------------------------------------------|
//! | `[summary]`        | auc_block, auc_frame, saliency_block, saliency_frame, correlation_block, correlation_frame, degenerate_ranges |
//! | `[segment_levels]` | segment, target_count, frame_level, block_level                                           |
//! | `[ratios]`         | segment_a, segment_b, frame_level, block_level                                            |
//! | `[sweep]`          | block, auc, error                                                                         |
//! | `[norm_compare]`   | population, mode, auc, error                                                              |
//! | `[errors]`         | metric, error                                                                             |
//! | `[notes]`          | note                                                                                      |
//!
//! Missing values are written as `NA`.

use std::fmt::Write as _;

use crate::metrics::EvalReport;

fn na(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

fn na_str(v: Option<&str>) -> String {
    v.map_or_else(|| "NA".to_string(), |s| s.replace(['\t', '\n'], " "))
}

pub fn report_to_table(r: &EvalReport) -> String {
    let mut out = String::new();
    let c = &r.config;
    let weights = c
        .weights
        .iter()
        .map(|(id, w)| format!("{id}:{w}"))
        .collect::<Vec<_>>()
        .join(",");
    writeln!(out, "# dataset\t{}", r.dataset).unwrap();
    writeln!(
        out,
        "# config\texponent={}\tblock={}\tradius={}\tnormalization={}\tpopulation={}\tweights={}\tseed={}\tanchors={}\tsaliency_pooling={}",
        c.exponent,
        c.block,
        c.radius,
        c.normalization,
        c.population,
        weights,
        c.seed.map_or_else(|| "NA".to_string(), |s| s.to_string()),
        c.anchors,
        c.saliency_pooling,
    )
    .unwrap();

    out.push_str("[summary]\n");
    out.push_str("auc_block\tauc_frame\tsaliency_block\tsaliency_frame\tcorrelation_block\tcorrelation_frame\tdegenerate_ranges\n");
    let degenerate = if r.degenerate_ranges.is_empty() {
        "NA".to_string()
    } else {
        r.degenerate_ranges.join(",")
    };
    writeln!(
        out,
        "{}\t{}\t{}\t{}\t{}\t{}\t{}",
        na(r.auc_block),
        na(r.auc_frame),
        na(r.saliency_block),
        na(r.saliency_frame),
        na(r.correlation_block),
        na(r.correlation_frame),
        degenerate
    )
    .unwrap();

    out.push_str("[segment_levels]\nsegment\ttarget_count\tframe_level\tblock_level\n");
    for l in &r.segment_levels {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            l.segment,
            na(l.target_count),
            na(l.frame_level),
            na(l.block_level)
        )
        .unwrap();
    }

    out.push_str("[ratios]\nsegment_a\tsegment_b\tframe_level\tblock_level\n");
    for row in &r.ratios {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            row.segment_a,
            row.segment_b,
            na(row.frame_level),
            na(row.block_level)
        )
        .unwrap();
    }

    out.push_str("[sweep]\nblock\tauc\terror\n");
    for row in &r.sweep {
        writeln!(
            out,
            "{}\t{}\t{}",
            row.block,
            na(row.auc),
            na_str(row.error.as_deref())
        )
        .unwrap();
    }

    out.push_str("[norm_compare]\npopulation\tmode\tauc\terror\n");
    for row in &r.norm_compare {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            row.population,
            row.mode,
            na(row.auc),
            na_str(row.error.as_deref())
        )
        .unwrap();
    }

    out.push_str("[errors]\nmetric\terror\n");
    for e in &r.errors {
        writeln!(out, "{}\t{}", e.metric, na_str(Some(&e.error))).unwrap();
    }

    out.push_str("[notes]\nnote\n");
    for n in &r.notes {
        writeln!(out, "{}", na_str(Some(n))).unwrap();
    }
    out
}
