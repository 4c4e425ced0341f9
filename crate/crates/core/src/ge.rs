//! Frame rasters and per-pixel generation-error maps.
//!
//! A GE map compares a generated frame against its ground truth pixel by
//! pixel: `E[i,j] = sum_c |pred[i,j,c] - gt[i,j,c]|^p` with `p` in {1, 2}.
//! Channel sums accumulate in `f64` and are stored as `f32`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `H x W x C` raster, row-major with interleaved channels.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameImage {
    height: usize,
    width: usize,
    channels: usize,
    values: Vec<f32>,
}

impl FrameImage {
    pub fn new(height: usize, width: usize, channels: usize, values: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::InvalidShape(format!(
                "frame must be at least 1x1x1, got {height}x{width}x{channels}"
            )));
        }
        let expected = height * width * channels;
        if values.len() != expected {
            return Err(Error::InvalidShape(format!(
                "frame {height}x{width}x{channels} needs {expected} values, got {}",
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput { index });
        }
        Ok(Self {
            height,
            width,
            channels,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Value at row `i`, column `j`, channel `c`.
    pub fn get(&self, i: usize, j: usize, c: usize) -> f32 {
        self.values[(i * self.width + j) * self.channels + c]
    }

    /// Extract a single channel as a one-channel frame.
    pub fn channel(&self, c: usize) -> Result<FrameImage> {
        if c >= self.channels {
            return Err(Error::InvalidShape(format!(
                "channel {c} out of range for {}-channel frame",
                self.channels
            )));
        }
        let values = self
            .values
            .chunks_exact(self.channels)
            .map(|px| px[c])
            .collect();
        FrameImage::new(self.height, self.width, 1, values)
    }

    fn shape(&self) -> String {
        format!("{}x{}x{}", self.height, self.width, self.channels)
    }
}

/// An `H x W` raster of non-negative, finite generation errors.
#[derive(Debug, Clone, PartialEq)]
pub struct GeMap {
    height: usize,
    width: usize,
    values: Vec<f32>,
}

impl GeMap {
    pub fn new(height: usize, width: usize, values: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidShape(format!(
                "GE map must be at least 1x1, got {height}x{width}"
            )));
        }
        if values.len() != height * width {
            return Err(Error::InvalidShape(format!(
                "GE map {height}x{width} needs {} values, got {}",
                height * width,
                values.len()
            )));
        }
        for (index, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteInput { index });
            }
            if *v < 0.0 {
                return Err(Error::NegativeValue { index });
            }
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self> {
        Self::new(height, width, vec![0.0; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f32 {
        self.values[i * self.width + j]
    }

    pub fn max_value(&self) -> f32 {
        self.values.iter().copied().fold(0.0, f32::max)
    }
}

/// Exponent applied to the absolute per-channel difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ErrorExponent {
    Abs,
    #[default]
    Squared,
}

impl ErrorExponent {
    pub fn as_u8(self) -> u8 {
        match self {
            ErrorExponent::Abs => 1,
            ErrorExponent::Squared => 2,
        }
    }

    #[inline]
    fn apply(self, diff: f64) -> f64 {
        let d = diff.abs();
        match self {
            ErrorExponent::Abs => d,
            ErrorExponent::Squared => d * d,
        }
    }
}

impl TryFrom<u8> for ErrorExponent {
    type Error = String;

    fn try_from(p: u8) -> std::result::Result<Self, String> {
        match p {
            1 => Ok(ErrorExponent::Abs),
            2 => Ok(ErrorExponent::Squared),
            other => Err(format!("exponent must be 1 or 2, got {other}")),
        }
    }
}

impl From<ErrorExponent> for u8 {
    fn from(p: ErrorExponent) -> u8 {
        p.as_u8()
    }
}

impl fmt::Display for ErrorExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Per-pixel generation error between a predicted frame and its ground truth.
pub fn compute_ge_map(
    pred: &FrameImage,
    gt: &FrameImage,
    exponent: ErrorExponent,
) -> Result<GeMap> {
    if pred.height != gt.height || pred.width != gt.width || pred.channels != gt.channels {
        return Err(Error::DimensionMismatch {
            left: pred.shape(),
            right: gt.shape(),
        });
    }
    let values = pred
        .values
        .chunks_exact(pred.channels)
        .zip(gt.values.chunks_exact(gt.channels))
        .map(|(a, b)| {
            let sum: f64 = a
                .iter()
                .zip(b)
                .map(|(&x, &y)| exponent.apply(x as f64 - y as f64))
                .sum();
            sum as f32
        })
        .collect();
    GeMap::new(pred.height, pred.width, values)
}
