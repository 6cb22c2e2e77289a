//! RIFF/WAVE reader for uncompressed PCM and IEEE-float audio.
//!
//! Accepts format tags 1 (integer PCM, 8/16/24/32-bit) and 3 (32-bit float),
//! any channel count. Multichannel input is downmixed by the arithmetic mean
//! of the channels per frame. Integer samples are scaled to [-1, 1] by the
//! type's maximum magnitude (2^(bits-1)), so the most negative code maps to
//! -1.0 exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::AudioClip;
use crate::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;

struct FmtChunk {
    format_tag: u16,
    channels: u16,
    sample_rate: u32,
    bits_per_sample: u16,
}

/// Loads a WAV file as a mono clip with `source_id` set to the path as given.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_wav(&bytes, path.to_string_lossy().as_ref())
}

/// Decodes WAV bytes; split out so tests can feed byte buffers directly.
pub(crate) fn decode_wav(bytes: &[u8], source_id: &str) -> Result<AudioClip> {
    let err = |msg: String| Error::Wav(format!("{source_id}: {msg}"));

    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(err("not a RIFF/WAVE container".into()));
    }

    let mut fmt: Option<FmtChunk> = None;
    let mut data: Option<&[u8]> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start
            .checked_add(size)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| err(format!("chunk {:?} overruns file", String::from_utf8_lossy(id))))?;
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if body.len() < 16 {
                    return Err(err("fmt chunk too short".into()));
                }
                fmt = Some(FmtChunk {
                    format_tag: u16::from_le_bytes(body[0..2].try_into().unwrap()),
                    channels: u16::from_le_bytes(body[2..4].try_into().unwrap()),
                    sample_rate: u32::from_le_bytes(body[4..8].try_into().unwrap()),
                    bits_per_sample: u16::from_le_bytes(body[14..16].try_into().unwrap()),
                });
            }
            b"data" => {
                data = Some(body);
            }
            _ => {}
        }
        // chunks are word-aligned: odd sizes carry a pad byte
        pos = body_end + (size & 1);
    }

    let fmt = fmt.ok_or_else(|| err("missing fmt chunk".into()))?;
    let data = data.ok_or_else(|| err("missing data chunk".into()))?;

    if fmt.format_tag != FORMAT_PCM && fmt.format_tag != FORMAT_IEEE_FLOAT {
        return Err(err(format!(
            "compressed or unsupported codec (format tag {}); only PCM (1) and IEEE float (3) are accepted",
            fmt.format_tag
        )));
    }
    if fmt.channels == 0 {
        return Err(err("zero channels".into()));
    }
    if fmt.sample_rate == 0 {
        return Err(err("zero sample rate".into()));
    }
    if data.is_empty() {
        return Err(err("zero-length data chunk".into()));
    }

    let bytes_per_sample = match (fmt.format_tag, fmt.bits_per_sample) {
        (FORMAT_PCM, 8) => 1,
        (FORMAT_PCM, 16) => 2,
        (FORMAT_PCM, 24) => 3,
        (FORMAT_PCM, 32) => 4,
        (FORMAT_IEEE_FLOAT, 32) => 4,
        (tag, bits) => {
            return Err(err(format!(
                "unsupported sample width: {bits}-bit with format tag {tag}"
            )))
        }
    };
    let frame_bytes = bytes_per_sample * fmt.channels as usize;
    if data.len() % frame_bytes != 0 {
        return Err(err(format!(
            "data chunk length {} is not a whole number of {}-byte frames",
            data.len(),
            frame_bytes
        )));
    }
    let n_frames = data.len() / frame_bytes;
    let channels = fmt.channels as usize;

    let mut samples = Vec::with_capacity(n_frames);
    for frame in 0..n_frames {
        let mut acc = 0.0f64;
        for ch in 0..channels {
            let off = frame * frame_bytes + ch * bytes_per_sample;
            let v = match (fmt.format_tag, fmt.bits_per_sample) {
                (FORMAT_PCM, 8) => (data[off] as i16 - 128) as f64 / 128.0,
                (FORMAT_PCM, 16) => {
                    i16::from_le_bytes(data[off..off + 2].try_into().unwrap()) as f64 / 32768.0
                }
                (FORMAT_PCM, 24) => {
                    let raw = (data[off] as i32)
                        | ((data[off + 1] as i32) << 8)
                        | ((data[off + 2] as i8 as i32) << 16);
                    raw as f64 / 8_388_608.0
                }
                (FORMAT_PCM, 32) => {
                    i32::from_le_bytes(data[off..off + 4].try_into().unwrap()) as f64
                        / 2_147_483_648.0
                }
                (FORMAT_IEEE_FLOAT, 32) => {
                    let x = f32::from_le_bytes(data[off..off + 4].try_into().unwrap()) as f64;
                    if !x.is_finite() {
                        return Err(err(format!("non-finite float sample at frame {frame}")));
                    }
                    x.clamp(-1.0, 1.0)
                }
                _ => unreachable!(),
            };
            acc += v;
        }
        samples.push(acc / channels as f64);
    }

    AudioClip::new(samples, fmt.sample_rate, source_id)
}

/// Writes a mono 16-bit PCM WAV file. Samples are clamped to [-1, 1] and
/// quantized by rounding toward the nearest 16-bit code.
pub fn write_wav_mono16(path: impl AsRef<Path>, samples: &[f64], sample_rate: u32) -> Result<()> {
    write_wav_planar16(path, &[samples.to_vec()], sample_rate)
}

/// Writes an interleaved 16-bit PCM WAV file from per-channel sample planes.
/// All planes must have equal length. Used for test fixtures and synthetic
/// corpora.
pub fn write_wav_planar16(
    path: impl AsRef<Path>,
    channels: &[Vec<f64>],
    sample_rate: u32,
) -> Result<()> {
    let path = path.as_ref();
    if channels.is_empty() || channels[0].is_empty() {
        return Err(Error::Wav("refusing to write empty wav".into()));
    }
    let n_frames = channels[0].len();
    if channels.iter().any(|c| c.len() != n_frames) {
        return Err(Error::Wav("channel planes differ in length".into()));
    }

    let n_ch = channels.len() as u16;
    let data_len = (n_frames * channels.len() * 2) as u32;
    let byte_rate = sample_rate * n_ch as u32 * 2;
    let block_align = n_ch * 2;

    let mut out = Vec::with_capacity(44 + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&n_ch.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&block_align.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for frame in 0..n_frames {
        for plane in channels {
            let code = (plane[frame].clamp(-1.0, 1.0) * 32767.0).round() as i16;
            out.extend_from_slice(&code.to_le_bytes());
        }
    }

    let mut file = fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(&out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wav_bytes(format_tag: u16, channels: u16, rate: u32, bits: u16, data: &[u8]) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data.len() as u32).to_le_bytes());
        out.extend_from_slice(b"WAVE");
        out.extend_from_slice(b"fmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&format_tag.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&rate.to_le_bytes());
        out.extend_from_slice(&(rate * channels as u32 * (bits / 8) as u32).to_le_bytes());
        out.extend_from_slice(&(channels * (bits / 8)).to_le_bytes());
        out.extend_from_slice(&bits.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(data);
        out
    }

    #[test]
    fn mono16_constant_scales_by_32768() {
        let data: Vec<u8> = std::iter::repeat(16384i16.to_le_bytes())
            .take(8)
            .flatten()
            .collect();
        let clip = decode_wav(&wav_bytes(1, 1, 8000, 16, &data), "t").unwrap();
        assert_eq!(clip.samples, vec![0.5; 8]);
        assert_eq!(clip.sample_rate, 8000);
    }

    #[test]
    fn stereo_opposite_channels_downmix_to_zero() {
        let mut data = Vec::new();
        for _ in 0..5 {
            data.extend_from_slice(&16384i16.to_le_bytes()); // +0.5
            data.extend_from_slice(&(-16384i16).to_le_bytes()); // -0.5
        }
        let clip = decode_wav(&wav_bytes(1, 2, 44100, 16, &data), "t").unwrap();
        assert_eq!(clip.samples, vec![0.0; 5]);
    }

    #[test]
    fn downmix_preserves_frame_count() {
        let mut data = Vec::new();
        for i in 0..7i16 {
            for ch in 0..3i16 {
                data.extend_from_slice(&(i * 100 + ch).to_le_bytes());
            }
        }
        let clip = decode_wav(&wav_bytes(1, 3, 16000, 16, &data), "t").unwrap();
        assert_eq!(clip.len(), 7);
    }

    #[test]
    fn one_second_at_44100_has_44100_samples() {
        let data = vec![0u8; 44100 * 2];
        let clip = decode_wav(&wav_bytes(1, 1, 44100, 16, &data), "t").unwrap();
        // the paper's "more than 30,000 entries" for ~1 s clips
        assert_eq!(clip.len(), 44100);
        assert!(clip.len() > 30_000);
    }

    #[test]
    fn most_negative_code_maps_to_minus_one() {
        let data = i16::MIN.to_le_bytes().to_vec();
        let clip = decode_wav(&wav_bytes(1, 1, 8000, 16, &data), "t").unwrap();
        assert_eq!(clip.samples, vec![-1.0]);
    }

    #[test]
    fn eight_bit_is_unsigned_midpoint_128() {
        let clip = decode_wav(&wav_bytes(1, 1, 8000, 8, &[128, 0, 255]), "t").unwrap();
        assert_eq!(clip.samples[0], 0.0);
        assert_eq!(clip.samples[1], -1.0);
        assert!((clip.samples[2] - 127.0 / 128.0).abs() < 1e-15);
    }

    #[test]
    fn twenty_four_bit_scaling() {
        // +2^22 -> 0.5, sign extension for negative values
        let mut data = Vec::new();
        data.extend_from_slice(&[0x00, 0x00, 0x40]); // 2^22
        data.extend_from_slice(&[0x00, 0x00, 0x80]); // -2^23
        let clip = decode_wav(&wav_bytes(1, 1, 8000, 24, &data), "t").unwrap();
        assert_eq!(clip.samples, vec![0.5, -1.0]);
    }

    #[test]
    fn thirty_two_bit_int_and_float() {
        let data = (1i32 << 30).to_le_bytes().to_vec();
        let clip = decode_wav(&wav_bytes(1, 1, 8000, 32, &data), "t").unwrap();
        assert_eq!(clip.samples, vec![0.5]);

        let fdata = 0.25f32.to_le_bytes().to_vec();
        let clip = decode_wav(&wav_bytes(3, 1, 8000, 32, &fdata), "t").unwrap();
        assert_eq!(clip.samples, vec![0.25]);
    }

    #[test]
    fn float_samples_clamp_to_unit_range() {
        let mut fdata = Vec::new();
        fdata.extend_from_slice(&1.5f32.to_le_bytes());
        fdata.extend_from_slice(&(-2.0f32).to_le_bytes());
        let clip = decode_wav(&wav_bytes(3, 1, 8000, 32, &fdata), "t").unwrap();
        assert_eq!(clip.samples, vec![1.0, -1.0]);
    }

    #[test]
    fn rejects_non_riff() {
        assert!(matches!(
            decode_wav(b"OggS\x00\x00\x00\x00\x00\x00\x00\x00junkjunk", "t"),
            Err(crate::Error::Wav(_))
        ));
    }

    #[test]
    fn rejects_compressed_codec() {
        // format tag 85 = MP3
        let out = wav_bytes(85, 1, 8000, 16, &[0, 0]);
        let msg = decode_wav(&out, "t").unwrap_err().to_string();
        assert!(msg.contains("codec"), "{msg}");
    }

    #[test]
    fn rejects_zero_length_data() {
        let out = wav_bytes(1, 1, 8000, 16, &[]);
        let msg = decode_wav(&out, "t").unwrap_err().to_string();
        assert!(msg.contains("zero-length"), "{msg}");
    }

    #[test]
    fn rejects_truncated_data_chunk() {
        let mut out = wav_bytes(1, 1, 8000, 16, &[0, 0, 0, 0]);
        out.truncate(out.len() - 2);
        assert!(decode_wav(&out, "t").is_err());
    }

    #[test]
    fn skips_unknown_chunks() {
        // LIST chunk between fmt and data
        let mut out = Vec::new();
        let data = 16384i16.to_le_bytes();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(4 + 24 + 12 + 8 + data.len() as u32).to_le_bytes());
        out.extend_from_slice(b"WAVE");
        out.extend_from_slice(b"fmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&1u16.to_le_bytes());
        out.extend_from_slice(&8000u32.to_le_bytes());
        out.extend_from_slice(&16000u32.to_le_bytes());
        out.extend_from_slice(&2u16.to_le_bytes());
        out.extend_from_slice(&16u16.to_le_bytes());
        out.extend_from_slice(b"LIST");
        out.extend_from_slice(&4u32.to_le_bytes());
        out.extend_from_slice(b"INFO");
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(&data);
        let clip = decode_wav(&out, "t").unwrap();
        assert_eq!(clip.samples, vec![0.5]);
    }

    #[test]
    fn decode_is_deterministic() {
        let data: Vec<u8> = (0..100i16).flat_map(|i| (i * 131).to_le_bytes()).collect();
        let bytes = wav_bytes(1, 1, 22050, 16, &data);
        assert_eq!(
            decode_wav(&bytes, "t").unwrap(),
            decode_wav(&bytes, "t").unwrap()
        );
    }

    #[test]
    fn write_then_read_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.wav");
        let samples: Vec<f64> = (0..512)
            .map(|i| ((i as f64) * 0.013).sin() * 0.8)
            .collect();
        write_wav_mono16(&path, &samples, 16000).unwrap();
        let clip = load_wav(&path).unwrap();
        assert_eq!(clip.sample_rate, 16000);
        assert_eq!(clip.len(), samples.len());
        // one code of write rounding plus the 32767/32768 scale mismatch
        for (a, b) in clip.samples.iter().zip(&samples) {
            assert!((a - b).abs() < 1.0 / 16384.0, "{a} vs {b}");
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_wav("/nonexistent/definitely-not-here.wav"),
            Err(crate::Error::Io { .. })
        ));
    }
}
