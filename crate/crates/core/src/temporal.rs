//! Temporal median smoothing of per-frame GE values.
//!
//! The window for frame `t` is `[t - radius, t + radius]` clipped to the
//! frame's own segment, so it shrinks near segment edges and never crosses
//! into a neighbouring video. Even-sized windows take the mean of the two
//! middle order statistics.

use rayon::prelude::*;

use crate::error::Result;
use crate::series::ScoreSeries;

/// Default radius in frames (window length 31).
pub const DEFAULT_RADIUS: usize = 15;

pub fn median_filter(series: &ScoreSeries, radius: usize) -> Result<ScoreSeries> {
    if radius == 0 {
        return Ok(series.clone());
    }
    let layout = series.layout();
    let filtered: Vec<Vec<f64>> = layout
        .spans()
        .par_iter()
        .map(|span| filter_segment(&series.values()[span.range()], radius))
        .collect();
    ScoreSeries::new(layout.clone(), filtered.concat())
}

/// Sliding median over one segment.
///
/// Keeps the current window in a sorted buffer; each step removes the value
/// leaving the window and inserts the one entering it by binary search.
fn filter_segment(values: &[f64], radius: usize) -> Vec<f64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let mut window: Vec<f64> = Vec::with_capacity(2 * radius + 1);
    let mut out = Vec::with_capacity(n);
    // window covers [lo, hi)
    let mut lo = 0;
    let mut hi = 0;
    for t in 0..n {
        let want_lo = t.saturating_sub(radius);
        let want_hi = (t + radius + 1).min(n);
        while hi < want_hi {
            let v = values[hi];
            let pos = window.partition_point(|x| x.total_cmp(&v).is_lt());
            window.insert(pos, v);
            hi += 1;
        }
        while lo < want_lo {
            let v = values[lo];
            let pos = window.partition_point(|x| x.total_cmp(&v).is_lt());
            debug_assert!(window[pos].total_cmp(&v).is_eq());
            window.remove(pos);
            lo += 1;
        }
        out.push(sorted_median(&window));
    }
    out
}

pub(crate) fn sorted_median(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Layout;
    use proptest::prelude::*;

    fn naive(values: &[f64], radius: usize) -> Vec<f64> {
        (0..values.len())
            .map(|t| {
                let lo = t.saturating_sub(radius);
                let hi = (t + radius + 1).min(values.len());
                let mut w = values[lo..hi].to_vec();
                w.sort_by(f64::total_cmp);
                let m = w.len();
                if m % 2 == 1 {
                    w[m / 2]
                } else {
                    (w[m / 2 - 1] + w[m / 2]) / 2.0
                }
            })
            .collect()
    }

    #[test]
    fn radius_zero_is_identity() {
        let s = ScoreSeries::new(Layout::single("v", 4), vec![3.0, 1.0, 4.0, 1.5]).unwrap();
        assert_eq!(median_filter(&s, 0).unwrap(), s);
    }

    #[test]
    fn constant_segment_unchanged() {
        let s = ScoreSeries::new(Layout::single("v", 50), vec![0.7; 50]).unwrap();
        assert_eq!(median_filter(&s, 15).unwrap(), s);
    }

    #[test]
    fn shrinking_edges_use_even_mean() {
        let s = ScoreSeries::new(Layout::single("v", 4), vec![1.0, 5.0, 2.0, 8.0]).unwrap();
        let out = median_filter(&s, 1).unwrap();
        // t=0: {1,5} -> 3; t=1: {1,5,2} -> 2; t=2: {5,2,8} -> 5; t=3: {2,8} -> 5
        assert_eq!(out.values(), &[3.0, 2.0, 5.0, 5.0]);
    }

    #[test]
    fn matches_sort_oracle_on_long_segment() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(200);
        let values: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
        let s = ScoreSeries::new(Layout::single("v", 200), values.clone()).unwrap();
        assert_eq!(
            median_filter(&s, 15).unwrap().values(),
            naive(&values, 15).as_slice()
        );
    }

    #[test]
    fn segments_are_isolated() {
        let layout = Layout::from_lengths([("a", 3), ("b", 3)]).unwrap();
        let s = ScoreSeries::new(layout.clone(), vec![0.0, 0.0, 0.0, 9.0, 9.0, 9.0]).unwrap();
        let out = median_filter(&s, 5).unwrap();
        assert_eq!(out.values(), &[0.0, 0.0, 0.0, 9.0, 9.0, 9.0]);
    }

    fn segmented() -> impl Strategy<Value = (Vec<usize>, Vec<f64>)> {
        proptest::collection::vec(0usize..40, 1..5).prop_flat_map(|lens| {
            let total: usize = lens.iter().sum();
            // small integer grid forces plenty of ties
            let vals = proptest::collection::vec((0i32..8).prop_map(f64::from), total);
            (Just(lens), vals)
        })
    }

    proptest! {
        #[test]
        fn oracle_range_and_isolation((lens, values) in segmented(), radius in 0usize..12, bump in 0.5f64..5.0) {
            let layout = Layout::from_lengths(lens.iter().enumerate().map(|(i, &l)| (format!("s{i}"), l))).unwrap();
            let s = ScoreSeries::new(layout.clone(), values.clone()).unwrap();
            let out = median_filter(&s, radius).unwrap();
            for (k, span) in layout.spans().iter().enumerate() {
                let seg = &values[span.range()];
                let expected = naive(seg, radius);
                prop_assert_eq!(out.segment_values(k), expected.as_slice());
                if let (Some(lo), Some(hi)) = (
                    seg.iter().copied().reduce(f64::min),
                    seg.iter().copied().reduce(f64::max),
                ) {
                    prop_assert!(out.segment_values(k).iter().all(|&v| v >= lo && v <= hi));
                }
            }
            // perturb the first segment only
            if let Some(first) = layout.spans().first() {
                let mut perturbed = values.clone();
                for v in &mut perturbed[first.range()] {
                    *v += bump;
                }
                let p = median_filter(&ScoreSeries::new(layout.clone(), perturbed).unwrap(), radius).unwrap();
                for k in 1..layout.segment_count() {
                    prop_assert_eq!(p.segment_values(k), out.segment_values(k));
                }
            }
        }
    }
}
