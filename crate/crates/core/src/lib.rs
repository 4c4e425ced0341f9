//! Block-level generation-error (GE) scoring for frame-prediction video
//! anomaly detection.
//!
//! A GE map is reduced to one number per frame by taking the largest mean
//! over all `h x w` windows (via a summed-area table), the resulting series
//! is median-filtered per segment and min-max normalized into anomaly
//! scores. The crate also evaluates those scores (ROC AUC, saliency, normal
//! GE levels) and generates seeded synthetic datasets to exercise them.

pub mod block;
pub mod cli;
pub mod error;
pub mod ge;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod scoring;
pub mod series;
pub mod synth;
pub mod temporal;

pub use error::{Error, Result};
