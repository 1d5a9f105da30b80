//! Experiment protocols and the synthetic corpus that exercises them.

mod protocol;
mod stats;
mod synth;
mod video;

pub use protocol::{
    balanced_subsample, band_grid, default_breakpoints, sample_size_sweep, train_and_score,
    BandCell, BandGridResult, SweepResult, SweepRow,
};
pub use stats::{class_stats, ClassStats};
pub use synth::{generate_synthetic, synth_pair, SynthConfig, SynthPair, MANIFEST_NAME};
pub use video::{label_noise_trial, video_majority_vote, VideoEvaluation, VideoOutcome};
