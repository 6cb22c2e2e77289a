//! Speaker accent recognition from mean-MFCC features.
//!
//! The crate covers the whole pipeline: WAV ingestion, the MFCC front end,
//! four classifier families (LDA, QDA, kernel SVM, k-NN), and a repeated
//! stratified-holdout benchmark harness with timing. Everything stochastic
//! is keyed by a single 64-bit seed and reproduces bit-for-bit.

pub mod audio;
pub mod classify;
pub mod dsp;
mod error;
pub mod eval;
pub mod features;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};

/// Version of the model file and feature CSV formats.
pub const FORMAT_VERSION: u32 = 1;
