//! Seeded synthetic two-class speech-like corpora for tests and benchmarks.
//!
//! Each clip is a harmonic series whose spectral envelope follows one of two
//! formant templates (roughly an /a/-like and an /i/-like vowel), with a
//! random fundamental, per-clip formant jitter, and random phases. The two
//! templates give the classes distinct filterbank energy patterns while the
//! fundamental variation keeps clips within a class from being copies.

use std::path::{Path, PathBuf};

use crate::audio::{write_manifest, write_wav_mono16, AudioClip, ManifestEntry};
use crate::rng::{rep_seed, SplitMix64};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub clips_per_class: usize,
    pub sample_rate: u32,
    pub duration_secs: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        // mirrors the balanced 165/165 corpus of ~1 s clips at 44.1 kHz
        Self {
            clips_per_class: 165,
            sample_rate: 44_100,
            duration_secs: 1.0,
            seed: 0,
        }
    }
}

/// (center Hz, bandwidth Hz, amplitude) per formant.
const TEMPLATES: [&[(f64, f64, f64)]; 2] = [
    &[(730.0, 90.0, 1.0), (1090.0, 110.0, 0.6), (2440.0, 140.0, 0.35)],
    &[(270.0, 70.0, 1.0), (2290.0, 130.0, 0.55), (3010.0, 150.0, 0.4)],
];

const MAX_HARMONIC_HZ: f64 = 5_000.0;

fn envelope(f: f64, formants: &[(f64, f64, f64)]) -> f64 {
    formants
        .iter()
        .map(|&(center, sigma, amp)| {
            let d = (f - center) / sigma;
            amp * (-0.5 * d * d).exp()
        })
        .sum()
}

fn formant_clip(class: u8, n_samples: usize, sample_rate: u32, rng: &mut SplitMix64) -> Vec<f64> {
    let f0 = rng.range_f64(105.0, 220.0);
    let formants: Vec<(f64, f64, f64)> = TEMPLATES[class as usize]
        .iter()
        .map(|&(c, s, a)| (c * rng.range_f64(0.96, 1.04), s, a))
        .collect();

    let n_harmonics = (MAX_HARMONIC_HZ / f0).floor() as usize;
    let mut partials = Vec::with_capacity(n_harmonics);
    for h in 1..=n_harmonics {
        let freq = h as f64 * f0;
        let amp = envelope(freq, &formants);
        let phase = rng.range_f64(0.0, std::f64::consts::TAU);
        partials.push((freq, amp, phase));
    }

    let mut samples = vec![0.0f64; n_samples];
    for &(freq, amp, phase) in &partials {
        let step = std::f64::consts::TAU * freq / sample_rate as f64;
        for (n, s) in samples.iter_mut().enumerate() {
            *s += amp * (step * n as f64 + phase).sin();
        }
    }
    // fixed peak level keeps overall energy comparable across clips
    let peak = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if peak > 0.0 {
        let scale = 0.8 / peak;
        for s in &mut samples {
            *s *= scale;
        }
    }
    samples
}

/// Generates the corpus in class-major order (all label-0 clips, then all
/// label-1 clips). Clip i of class c is a pure function of
/// (seed, c, i), independent of how many clips are requested.
pub fn generate_corpus(spec: &SynthSpec) -> Result<Vec<(AudioClip, u8)>> {
    if spec.clips_per_class == 0 {
        return Err(Error::Config("need at least one clip per class".into()));
    }
    let n_samples = (spec.duration_secs * spec.sample_rate as f64).round() as usize;
    if n_samples == 0 {
        return Err(Error::Config("clip duration too short".into()));
    }
    let mut out = Vec::with_capacity(spec.clips_per_class * 2);
    for class in 0..2u8 {
        for i in 0..spec.clips_per_class {
            let clip_key = (class as u64) << 32 | i as u64;
            let mut rng = SplitMix64::new(rep_seed(spec.seed, clip_key));
            let samples = formant_clip(class, n_samples, spec.sample_rate, &mut rng);
            let name = if class == 0 {
                format!("us_{i:03}.wav")
            } else {
                format!("nonus_{i:03}.wav")
            };
            out.push((AudioClip::new(samples, spec.sample_rate, name)?, class));
        }
    }
    Ok(out)
}

/// Writes the corpus as 16-bit WAV files plus a `manifest.csv` into `dir`;
/// returns the manifest path.
pub fn write_corpus(dir: impl AsRef<Path>, spec: &SynthSpec) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut entries = Vec::new();
    for (clip, label) in generate_corpus(spec)? {
        write_wav_mono16(dir.join(&clip.source_id), &clip.samples, clip.sample_rate)?;
        entries.push(ManifestEntry {
            path: clip.source_id,
            label,
        });
    }
    let manifest = dir.join("manifest.csv");
    write_manifest(&manifest, &entries)?;
    Ok(manifest)
}
