//! The MFCC front end: pre-emphasis, framing with a Hamming window, power
//! spectrum, mel filterbank log-energies, and the cepstral DCT, plus the
//! mean-vector summary that turns a clip into one feature vector.

mod dct;
mod fft;
mod mel;

pub use dct::dct_cepstrum;
pub use fft::{fft_in_place, next_pow2};
pub use mel::{
    build_filterbank, filterbank_log_energies, hz_to_mel, mel_to_hz, MelFilterbank,
    LOG_ENERGY_FLOOR,
};

use crate::audio::AudioClip;
use crate::features::FeatureVector;
use crate::{Error, Result};

/// Every knob of the MFCC pipeline. `f_high = None` means the Nyquist
/// frequency of whatever clip is being processed.
#[derive(Debug, Clone, PartialEq)]
pub struct MfccConfig {
    /// Pre-emphasis coefficient, in [0, 1).
    pub alpha: f64,
    /// Frame length in milliseconds.
    pub frame_ms: f64,
    /// Hop between frame starts in milliseconds.
    pub hop_ms: f64,
    /// Number of mel filters M.
    pub num_filters: usize,
    /// Number of cepstral coefficients q to keep.
    pub num_coeffs: usize,
    /// Lower edge of the filterbank in Hz.
    pub f_low: f64,
    /// Upper edge of the filterbank in Hz; `None` = Nyquist.
    pub f_high: Option<f64>,
    /// Whether c0 is included (coefficients 0..q-1) or skipped (1..q).
    pub include_c0: bool,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            alpha: 0.97,
            frame_ms: 25.0,
            hop_ms: 10.0,
            num_filters: 26,
            num_coeffs: 13,
            f_low: 0.0,
            f_high: None,
            include_c0: true,
        }
    }
}

impl MfccConfig {
    /// Rate-independent sanity checks.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::Config(format!(
                "pre-emphasis alpha must be in [0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.frame_ms > 0.0) {
            return Err(Error::Config("frame length must be positive".into()));
        }
        if !(self.hop_ms > 0.0 && self.hop_ms <= self.frame_ms) {
            return Err(Error::Config(format!(
                "hop ({} ms) must be in (0, frame legnth {} ms]",
                self.hop_ms, self.frame_ms
            )));
        }
        if self.num_filters == 0 {
            return Err(Error::Config("need at least one mel filter".into()));
        }
        if self.num_coeffs == 0 || self.num_coeffs > self.num_filters {
            return Err(Error::Config(format!(
                "num_coeffs must be in 1..=num_filters ({}), got {}",
                self.num_filters, self.num_coeffs
            )));
        }
        if self.f_low < 0.0 {
            return Err(Error::Config("f_low must be nonnegative".into()));
        }
        if let Some(fh) = self.f_high {
            if fh <= self.f_low {
                return Err(Error::Config(format!(
                    "f_high ({fh} Hz) must exceed f_low ({} Hz)",
                    self.f_low
                )));
            }
        }
        Ok(())
    }

    /// Frame length in samples; ties round to even, matching the framing
    /// arithmetic used throughout (25 ms at 44.1 kHz is 1102 samples).
    pub fn frame_len(&self, sample_rate: u32) -> usize {
        ((self.frame_ms * sample_rate as f64) / 1000.0).round_ties_even() as usize
    }

    pub fn hop_len(&self, sample_rate: u32) -> usize {
        (((self.hop_ms * sample_rate as f64) / 1000.0).round_ties_even() as usize).max(1)
    }

    pub fn f_high_for(&self, sample_rate: u32) -> f64 {
        self.f_high.unwrap_or(sample_rate as f64 / 2.0)
    }

    /// Flat key=value text form, one pair per line.
    pub fn to_kv_text(&self) -> String {
        let f_high = match self.f_high {
            Some(v) => format!("{v}"),
            None => "nyquist".into(),
        };
        format!(
            "alpha={}\nframe_ms={}\nhop_ms={}\nnum_filters={}\nnum_coeffs={}\nf_low={}\nf_high={}\ninclude_c0={}\n",
            self.alpha,
            self.frame_ms,
            self.hop_ms,
            self.num_filters,
            self.num_coeffs,
            self.f_low,
            f_high,
            self.include_c0
        )
    }

    /// Parses the key=value form; keys may appear in any order and missing
    /// keys keep their defaults.
    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got {line:?}", lineno + 1))
            })?;
            let bad = |what: &str| {
                Error::Config(format!("line {}: bad {what} value {value:?}", lineno + 1))
            };
            match key.trim() {
                "alpha" => cfg.alpha = value.parse().map_err(|_| bad("alpha"))?,
                "frame_ms" => cfg.frame_ms = value.parse().map_err(|_| bad("frame_ms"))?,
                "hop_ms" => cfg.hop_ms = value.parse().map_err(|_| bad("hop_ms"))?,
                "num_filters" => cfg.num_filters = value.parse().map_err(|_| bad("num_filters"))?,
                "num_coeffs" => cfg.num_coeffs = value.parse().map_err(|_| bad("num_coeffs"))?,
                "f_low" => cfg.f_low = value.parse().map_err(|_| bad("f_low"))?,
                "f_high" => {
                    cfg.f_high = if value.trim() == "nyquist" {
                        None
                    } else {
                        Some(value.parse().map_err(|_| bad("f_high"))?)
                    }
                }
                "include_c0" => cfg.include_c0 = value.parse().map_err(|_| bad("include_c0"))?,
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown key {other:?}",
                        lineno + 1
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Windowed frames of one clip, row-major n_frames x frame_len.
#[derive(Debug, Clone)]
pub struct FrameMatrix {
    data: Vec<f64>,
    pub n_frames: usize,
    pub frame_len: usize,
    pub sample_rate: u32,
}

impl FrameMatrix {
    pub fn frame(&self, a: usize) -> &[f64] {
        &self.data[a * self.frame_len..(a + 1) * self.frame_len]
    }

    /// Test-support constructor from explicit rows (already windowed).
    pub fn from_rows(rows: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        let n_frames = rows.len();
        let frame_len = rows.first().map(|r| r.len()).unwrap_or(0);
        if n_frames == 0 || frame_len == 0 || rows.iter().any(|r| r.len() != frame_len) {
            return Err(Error::Dsp("frame rows must be nonempty and rectangular".into()));
        }
        Ok(Self {
            data: rows.into_iter().flatten().collect(),
            n_frames,
            frame_len,
            sample_rate,
        })
    }
}

/// One-sided power spectra, row-major n_frames x (fft_size/2 + 1).
#[derive(Debug, Clone)]
pub struct PowerSpectra {
    data: Vec<f64>,
    pub n_frames: usize,
    pub n_bins: usize,
    pub fft_size: usize,
    pub sample_rate: u32,
}

impl PowerSpectra {
    pub fn row(&self, a: usize) -> &[f64] {
        &self.data[a * self.n_bins..(a + 1) * self.n_bins]
    }
}

/// Cepstral coefficients, row-major n_frames x num_coeffs, with the config
/// that produced them.
#[derive(Debug, Clone)]
pub struct MfccMatrix {
    data: Vec<f64>,
    pub n_frames: usize,
    pub num_coeffs: usize,
    pub config: MfccConfig,
    pub source_id: String,
}

impl MfccMatrix {
    pub fn row(&self, a: usize) -> &[f64] {
        &self.data[a * self.num_coeffs..(a + 1) * self.num_coeffs]
    }
}

/// First-order high-pass filter s[n] = x[n] - alpha*x[n-1]; s[0] = x[0].
pub fn pre_emphasis(clip: &AudioClip, alpha: f64) -> Result<AudioClip> {
    if clip.samples.is_empty() {
        return Err(Error::Dsp("empty clip".into()));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Config(format!(
            "pre-emphasis alpha must be in [0, 1), got {alpha}"
        )));
    }
    let x = &clip.samples;
    let mut s = Vec::with_capacity(x.len());
    s.push(x[0]);
    for n in 1..x.len() {
        s.push(x[n] - alpha * x[n - 1]);
    }
    Ok(AudioClip {
        samples: s,
        sample_rate: clip.sample_rate,
        source_id: clip.source_id.clone(),
    })
}

/// Hamming window w[n] = 0.54 - 0.46*cos(2*pi*n/(length-1)), built
/// symmetrically so w[n] == w[length-1-n] holds exactly.
pub fn hamming_window(length: usize) -> Result<Vec<f64>> {
    if length < 2 {
        return Err(Error::Dsp(format!("window length {length} < 2")));
    }
    let mut w = vec![0.0; length];
    for n in 0..length.div_ceil(2) {
        let v = 0.54 - 0.46 * (std::f64::consts::TAU * n as f64 / (length - 1) as f64).cos();
        w[n] = v;
        w[length - 1 - n] = v;
    }
    Ok(w)
}

/// Slices the clip into overlapping frames starting at multiples of the hop
/// and multiplies each by the Hamming window. Trailing samples that do not
/// fill a frame are dropped.
pub fn frame_and_window(clip: &AudioClip, config: &MfccConfig) -> Result<FrameMatrix> {
    config.validate()?;
    let frame_len = config.frame_len(clip.sample_rate);
    let hop_len = config.hop_len(clip.sample_rate);
    if frame_len < 2 {
        return Err(Error::Config(format!(
            "frame of {} ms at {} Hz is only {frame_len} samples",
            config.frame_ms, clip.sample_rate
        )));
    }
    if clip.len() < frame_len {
        return Err(Error::Dsp(format!(
            "clip {} has {} samples, shorter than one {frame_len}-sample frame",
            clip.source_id,
            clip.len()
        )));
    }
    let window = hamming_window(frame_len)?;
    let n_frames = 1 + (clip.len() - frame_len) / hop_len;
    let mut data = Vec::with_capacity(n_frames * frame_len);
    for a in 0..n_frames {
        let start = a * hop_len;
        for (x, w) in clip.samples[start..start + frame_len].iter().zip(&window) {
            data.push(x * w);
        }
    }
    Ok(FrameMatrix {
        data,
        n_frames,
        frame_len,
        sample_rate: clip.sample_rate,
    })
}

/// Squared-magnitude DFT of each frame, zero-padded to the next power of
/// two; keeps bins 0..=fft_size/2 (the rest are redundant for real input).
pub fn power_spectrum(frames: &FrameMatrix) -> Result<PowerSpectra> {
    if frames.n_frames == 0 {
        return Err(Error::Dsp("no frames".into()));
    }
    let fft_size = next_pow2(frames.frame_len);
    let n_bins = fft_size / 2 + 1;
    let mut data = Vec::with_capacity(frames.n_frames * n_bins);
    let mut re = vec![0.0; fft_size];
    let mut im = vec![0.0; fft_size];
    for a in 0..frames.n_frames {
        re[..frames.frame_len].copy_from_slice(frames.frame(a));
        re[frames.frame_len..].fill(0.0);
        im.fill(0.0);
        fft_in_place(&mut re, &mut im);
        for k in 0..n_bins {
            data.push(re[k] * re[k] + im[k] * im[k]);
        }
    }
    Ok(PowerSpectra {
        data,
        n_frames: frames.n_frames,
        n_bins,
        fft_size,
        sample_rate: frames.sample_rate,
    })
}

/// The whole front end: pre-emphasis -> framing/windowing -> power spectrum
/// -> filterbank log-energies -> cepstral DCT, one row per frame.
pub fn compute_mfcc(clip: &AudioClip, config: &MfccConfig) -> Result<MfccMatrix> {
    config.validate()?;
    let emphasized = pre_emphasis(clip, config.alpha)?;
    let frames = frame_and_window(&emphasized, config)?;
    let spectra = power_spectrum(&frames)?;
    let bank = build_filterbank(
        config.num_filters,
        config.f_low,
        config.f_high_for(clip.sample_rate),
        spectra.fft_size,
        clip.sample_rate,
    )?;
    let table = dct::CosTable::new(config.num_filters, config.num_coeffs, config.include_c0);
    let mut data = Vec::with_capacity(spectra.n_frames * config.num_coeffs);
    for a in 0..spectra.n_frames {
        let energies = filterbank_log_energies(spectra.row(a), &bank)?;
        table.apply(&energies, &mut data);
    }
    Ok(MfccMatrix {
        data,
        n_frames: spectra.n_frames,
        num_coeffs: config.num_coeffs,
        config: config.clone(),
        source_id: clip.source_id.clone(),
    })
}

/// Column means of the MFCC matrix: the clip's feature vector.
pub fn summarize_mean(m: &MfccMatrix) -> Result<FeatureVector> {
    if m.n_frames == 0 {
        return Err(Error::Dsp("cannot summarize an empty MFCC matrix".into()));
    }
    let mut values = vec![0.0; m.num_coeffs];
    for a in 0..m.n_frames {
        for (acc, v) in values.iter_mut().zip(m.row(a)) {
            *acc += v;
        }
    }
    for v in &mut values {
        *v /= m.n_frames as f64;
    }
    Ok(FeatureVector {
        values,
        label: None,
        source_id: m.source_id.clone(),
    })
}
