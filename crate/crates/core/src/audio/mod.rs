//! Audio ingestion: PCM WAV files and labeled corpus manifests.

mod manifest;
mod wav;

pub use manifest::{load_manifest, write_manifest, CorpusManifest, ManifestEntry};
pub use wav::{load_wav, write_wav_mono16, write_wav_planar16};

use crate::{Error, Result};

/// A sampled mono waveform. `samples` is the raw signal indexed by sample
/// number, normalized to [-1, 1] by the loader.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
    pub source_id: String,
}

impl AudioClip {
    /// Builds a clip, checking the ingest invariants: nonempty, finite,
    /// in [-1, 1], positive sample rate.
    pub fn new(samples: Vec<f64>, sample_rate: u32, source_id: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Data("audio clip has no samples".into()));
        }
        if sample_rate == 0 {
            return Err(Error::Data("sample rate must be positive".into()));
        }
        for (i, &s) in samples.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::Data(format!("sample {i} is not finite")));
            }
            if !(-1.0..=1.0).contains(&s) {
                return Err(Error::Data(format!(
                    "sample {i} = {s} outside [-1, 1]"
                )));
            }
        }
        Ok(Self {
            samples,
            sample_rate,
            source_id: source_id.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}
