//! Labelled corpora: manifests, reproducible splits and feature caches.

mod cache;
mod manifest;
mod split;

pub use cache::{
    band_select, build_cache, load_cache, parse_cache, write_cache, CacheHeader, CacheRow,
    ExtractionFailure, FeatureCache,
};
pub use manifest::{load_manifest, parse_manifest, DatasetManifest, ManifestEntry};
pub use split::{split, split_indices, SplitSpec};
