//! On-disk formats: GEM1 rasters, binary PGM/PPM frames, TOML dataset
//! manifests and tab-separated score files.

mod gem;
mod manifest;
mod pnm;
mod scores;

pub use gem::{read_gemap, write_gemap, GEM1_MAGIC};
pub use manifest::{
    load_manifest, manifest_to_string, save_manifest, write_synth_dataset, DatasetManifest,
    FrameSource, Population, SegmentEntry, SCHEMA_VERSION,
};
pub use pnm::{read_frame, write_frame, write_gemap_pgm};
pub use scores::{read_scores, scores_to_string, write_scores, DegenerateFlags, ScoreFile};
