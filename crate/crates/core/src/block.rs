//! Block-level generation error.
//!
//! Every fully contained `h x w` window (stride 1) gets its mean GE; the
//! block-level GE of a frame is the largest of those means. Window sums come
//! from a summed-area table, so the cost per frame is `O(H * W)` regardless
//! of block size.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ge::GeMap;

/// Window height and width in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockSpec {
    pub h: usize,
    pub w: usize,
}

impl BlockSpec {
    pub fn new(h: usize, w: usize) -> Result<Self> {
        if h == 0 || w == 0 {
            return Err(Error::InvalidBlock { h, w });
        }
        Ok(Self { h, w })
    }

    pub fn square(size: usize) -> Result<Self> {
        Self::new(size, size)
    }

    /// The block covering a whole `height x width` frame.
    pub fn full_frame(map: &GeMap) -> Self {
        Self {
            h: map.height(),
            w: map.width(),
        }
    }

    pub fn area(&self) -> usize {
        self.h * self.w
    }

    fn check_fits(&self, map: &GeMap) -> Result<()> {
        self.check_fits_dims(map.height(), map.width())
    }

    fn check_fits_dims(&self, height: usize, width: usize) -> Result<()> {
        if self.h == 0 || self.w == 0 {
            return Err(Error::InvalidBlock {
                h: self.h,
                w: self.w,
            });
        }
        if self.h > height || self.w > width {
            return Err(Error::BlockTooLarge {
                block_h: self.h,
                block_w: self.w,
                map_h: height,
                map_w: width,
            });
        }
        Ok(())
    }
}

impl Default for BlockSpec {
    fn default() -> Self {
        Self { h: 30, w: 30 }
    }
}

impl fmt::Display for BlockSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.h, self.w)
    }
}

impl FromStr for BlockSpec {
    type Err = Error;

    /// Parses `HxW` or a single square size.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("cannot parse block spec {s:?}"));
        match s.split_once(['x', 'X']) {
            Some((h, w)) => {
                let h = h.trim().parse().map_err(|_| bad())?;
                let w = w.trim().parse().map_err(|_| bad())?;
                BlockSpec::new(h, w)
            }
            None => BlockSpec::square(s.trim().parse().map_err(|_| bad())?),
        }
    }
}

/// Summed-area table with a zero first row and column.
///
/// Entry `(i, j)` holds the sum of the source values in rows `[0, i)` and
/// columns `[0, j)`, accumulated in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralTable {
    rows: usize,
    cols: usize,
    sums: Vec<f64>,
}

impl IntegralTable {
    /// Source height + 1.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Source width + 1.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sums[i * self.cols + j]
    }

    /// Sum of the source rectangle with rows `[top, bottom)` and columns
    /// `[left, right)`.
    pub fn rect_sum(&self, top: usize, left: usize, bottom: usize, right: usize) -> f64 {
        debug_assert!(top <= bottom && left <= right);
        let c = self.cols;
        let s = &self.sums;
        s[bottom * c + right] - s[top * c + right] - s[bottom * c + left] + s[top * c + left]
    }
}

pub fn integral_image(map: &GeMap) -> IntegralTable {
    let (h, w) = (map.height(), map.width());
    let cols = w + 1;
    let mut sums = vec![0.0f64; (h + 1) * cols];
    let src = map.values();
    for i in 0..h {
        let mut row_sum = 0.0f64;
        let (prev, cur) = sums.split_at_mut((i + 1) * cols);
        let prev = &prev[i * cols..];
        for j in 0..w {
            row_sum += src[i * w + j] as f64;
            cur[j + 1] = prev[j + 1] + row_sum;
        }
    }
    IntegralTable {
        rows: h + 1,
        cols,
        sums,
    }
}

/// Mean GE at every valid top-left anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMeanGrid {
    anchors_h: usize,
    anchors_w: usize,
    values: Vec<f64>,
}

impl BlockMeanGrid {
    pub fn anchors_h(&self) -> usize {
        self.anchors_h
    }

    pub fn anchors_w(&self) -> usize {
        self.anchors_w
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.anchors_w + c]
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn block_means(map: &GeMap, block: BlockSpec) -> Result<BlockMeanGrid> {
    block.check_fits(map)?;
    let table = integral_image(map);
    let anchors_h = map.height() - block.h + 1;
    let anchors_w = map.width() - block.w + 1;
    let inv_area = 1.0 / block.area() as f64;
    let mut values = Vec::with_capacity(anchors_h * anchors_w);
    for r in 0..anchors_h {
        for c in 0..anchors_w {
            // Cancellation can leave a tiny negative residue on all-zero windows.
            let sum = table.rect_sum(r, c, r + block.h, c + block.w).max(0.0);
            values.push(sum * inv_area);
        }
    }
    Ok(BlockMeanGrid {
        anchors_h,
        anchors_w,
        values,
    })
}

/// Maximum window mean over all valid anchors.
pub fn block_level_ge(map: &GeMap, block: BlockSpec) -> Result<f64> {
    block.check_fits(map)?;
    block_level_from_table(&integral_image(map), block)
}

/// Same as [`block_level_ge`] on a prebuilt table, so several block sizes
/// can share one pass over the map.
pub fn block_level_from_table(table: &IntegralTable, block: BlockSpec) -> Result<f64> {
    let (h, w) = (table.rows - 1, table.cols - 1);
    block.check_fits_dims(h, w)?;
    let anchors_h = h - block.h + 1;
    let anchors_w = w - block.w + 1;
    let mut best = 0.0f64;
    for r in 0..anchors_h {
        for c in 0..anchors_w {
            let sum = table.rect_sum(r, c, r + block.h, c + block.w);
            if sum > best {
                best = sum;
            }
        }
    }
    Ok(best / block.area() as f64)
}

/// Mean GE over all pixels.
pub fn frame_level_ge(map: &GeMap) -> f64 {
    let sum: f64 = map.values().iter().map(|&v| v as f64).sum();
    sum / map.values().len() as f64
}
