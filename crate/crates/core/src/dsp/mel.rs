//! Mel-scale warping and the triangular filterbank.
//!
//! The warping is piecewise: identity below 1 kHz, 2595*log10(1 + f/700)
//! above. The inverse mirrors it with the base-10 exponential so the
//! frequency roundtrip holds. There is a ~0.015 mel discontinuity at the
//! 1 kHz seam inherent to this piecewise form; it is below the 0.1 mel
//! continuity budget and irrelevant at filterbank edge spacing.

use crate::{Error, Result};

/// Floor inside the log of the filterbank energies, so silent frames map to
/// ln(floor) instead of -inf.
pub const LOG_ENERGY_FLOOR: f64 = 1e-12;

/// Hertz to mel.
pub fn hz_to_mel(f: f64) -> Result<f64> {
    if !(f >= 0.0) {
        return Err(Error::Dsp(format!("negative or NaN frequency {f}")));
    }
    Ok(if f <= 1000.0 {
        f
    } else {
        2595.0 * (1.0 + f / 700.0).log10()
    })
}

/// Mel to Hertz, the exact inverse of the log branch of [`hz_to_mel`].
pub fn mel_to_hz(mel: f64) -> Result<f64> {
    if !(mel >= 0.0) {
        return Err(Error::Dsp(format!("negative or NaN mel value {mel}")));
    }
    Ok(if mel <= 1000.0 {
        mel
    } else {
        700.0 * (10f64.powf(mel / 2595.0) - 1.0)
    })
}

/// Triangular mel filterbank over the one-sided power-spectrum bins.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    /// num_filters x n_bins, row-major; weights in [0, 1], peak exactly 1.
    weights: Vec<f64>,
    /// Exact (unsnapped) center frequency of each filter in Hz, equally
    /// spaced on the mel axis.
    center_freqs: Vec<f64>,
    num_filters: usize,
    n_bins: usize,
}

impl MelFilterbank {
    pub fn num_filters(&self) -> usize {
        self.num_filters
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn center_freqs(&self) -> &[f64] {
        &self.center_freqs
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.weights[m * self.n_bins..(m + 1) * self.n_bins]
    }

    /// Test-support constructor for synthetic banks; no triangle shape is
    /// assumed, only matching dimensions.
    pub fn from_rows(rows: Vec<Vec<f64>>, center_freqs: Vec<f64>) -> Result<Self> {
        let num_filters = rows.len();
        let n_bins = rows.first().map(|r| r.len()).unwrap_or(0);
        if num_filters == 0 || n_bins == 0 {
            return Err(Error::Dsp("empty filterbank".into()));
        }
        if rows.iter().any(|r| r.len() != n_bins) || center_freqs.len() != num_filters {
            return Err(Error::Dsp("ragged filterbank rows".into()));
        }
        Ok(Self {
            weights: rows.into_iter().flatten().collect(),
            center_freqs,
            num_filters,
            n_bins,
        })
    }
}

/// Builds `num_filters` unit-peak triangles whose edges are equally spaced on
/// the mel axis between `f_low` and `f_high`, snapped to FFT bins.
pub fn build_filterbank(
    num_filters: usize,
    f_low: f64,
    f_high: f64,
    fft_size: usize,
    sample_rate: u32,
) -> Result<MelFilterbank> {
    let nyquist = sample_rate as f64 / 2.0;
    if num_filters == 0 {
        return Err(Error::Config("need at least one mel filter".into()));
    }
    if !(0.0 <= f_low && f_low < f_high && f_high <= nyquist) {
        return Err(Error::Config(format!(
            "need 0 <= f_low < f_high <= Nyquist, got f_low={f_low}, f_high={f_high}, Nyquist={nyquist}"
        )));
    }
    let n_bins = fft_size / 2 + 1;

    let mel_lo = hz_to_mel(f_low)?;
    let mel_hi = hz_to_mel(f_high)?;
    let n_edges = num_filters + 2;
    let mut hz_edges = Vec::with_capacity(n_edges);
    for i in 0..n_edges {
        let mel = mel_lo + (mel_hi - mel_lo) * i as f64 / (n_edges - 1) as f64;
        hz_edges.push(mel_to_hz(mel)?);
    }

    // snap edges to integer bins; every edge must land on its own bin or the
    // triangles degenerate
    let bin_edges: Vec<usize> = hz_edges
        .iter()
        .map(|hz| ((hz * fft_size as f64 / sample_rate as f64).round() as usize).min(n_bins - 1))
        .collect();
    for w in bin_edges.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Dsp(format!(
                "mel filter edges collapse onto shared FFT bins ({} filters over bins {}..{}); \
                 use a larger fft_size or fewer filters",
                num_filters,
                bin_edges.first().unwrap(),
                bin_edges.last().unwrap()
            )));
        }
    }

    let mut weights = vec![0.0; num_filters * n_bins];
    for m in 0..num_filters {
        let (lo, mid, hi) = (bin_edges[m], bin_edges[m + 1], bin_edges[m + 2]);
        let row = &mut weights[m * n_bins..(m + 1) * n_bins];
        for k in lo..=mid {
            row[k] = (k - lo) as f64 / (mid - lo) as f64;
        }
        for k in mid + 1..=hi {
            row[k] = (hi - k) as f64 / (hi - mid) as f64;
        }
    }

    Ok(MelFilterbank {
        weights,
        center_freqs: hz_edges[1..=num_filters].to_vec(),
        num_filters,
        n_bins,
    })
}

/// Log-energy of each filter applied to one power-spectrum row:
/// S[m] = ln(max(sum_k power[k] * weight[m][k], floor)).
pub fn filterbank_log_energies(spectrum_row: &[f64], bank: &MelFilterbank) -> Result<Vec<f64>> {
    if spectrum_row.len() != bank.n_bins {
        return Err(Error::Dsp(format!(
            "spectrum row has {} bins but filterbank expects {}",
            spectrum_row.len(),
            bank.n_bins
        )));
    }
    let mut out = Vec::with_capacity(bank.num_filters);
    for m in 0..bank.num_filters {
        let row = bank.row(m);
        let mut acc = 0.0;
        for (w, p) in row.iter().zip(spectrum_row) {
            acc += w * p;
        }
        out.push(acc.max(LOG_ENERGY_FLOOR).ln());
    }
    Ok(out)
}
