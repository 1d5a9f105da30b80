//! Spectral forensics kit.
//!
//! Detects GAN-generated face images by reducing each image to a 1D
//! azimuthally averaged power-spectrum profile and classifying the profiles
//! with logistic regression, an RBF support vector machine, or k-means.
//!
//! The crate is organised along the pipeline:
//!
//! - [`spectrum`]: grayscale conversion, 2D DFT, centred power map, radial
//!   profile, interpolation and DC normalisation.
//! - [`classify`]: the three classifiers, evaluation metrics and the text
//!   model format.
//! - [`dataset`]: manifests, seeded stratified splits, feature caches and
//!   frequency band selection.
//! - [`experiments`]: the synthetic corpus and the sample-size, band-grid,
//!   class-statistics and per-video protocols.
//! - [`cli`]: the `sfk` command line front end.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cli;
pub mod dataset;
mod error;
pub mod experiments;
pub mod numfmt;
pub mod spectrum;

pub use error::{Error, Result};
