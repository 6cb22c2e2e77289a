//! DCT-II of the filterbank log-energies, yielding the cepstral coefficients.
//!
//! c[j] = sum_{m=0}^{M-1} S[m] * cos(pi * j * (m + 1/2) / M)
//!
//! With `include_c0` the returned coefficients are j = 0..q-1, otherwise
//! j = 1..q.

use crate::{Error, Result};

/// Precomputed cosine table for repeated per-frame transforms.
pub(crate) struct CosTable {
    /// rows: coefficient index j (in output order), cols: m = 0..M-1
    table: Vec<f64>,
    m: usize,
    q: usize,
}

impl CosTable {
    pub(crate) fn new(m: usize, q: usize, include_c0: bool) -> Self {
        let j0 = if include_c0 { 0 } else { 1 };
        let mut table = Vec::with_capacity(q * m);
        for j in j0..j0 + q {
            for i in 0..m {
                table.push((std::f64::consts::PI * j as f64 * (i as f64 + 0.5) / m as f64).cos());
            }
        }
        Self { table, m, q }
    }

    pub(crate) fn apply(&self, log_energies: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(log_energies.len(), self.m);
        for j in 0..self.q {
            let row = &self.table[j * self.m..(j + 1) * self.m];
            let mut acc = 0.0;
            for (w, s) in row.iter().zip(log_energies) {
                acc += w * s;
            }
            out.push(acc);
        }
    }
}

/// Returns the first `q` cepstral coefficients of `log_energies`.
pub fn dct_cepstrum(log_energies: &[f64], q: usize, include_c0: bool) -> Result<Vec<f64>> {
    let m = log_energies.len();
    if q == 0 || q > m {
        return Err(Error::Dsp(format!(
            "coefficient count q={q} out of range 1..={m}"
        )));
    }
    let table = CosTable::new(m, q, include_c0);
    let mut out = Vec::with_capacity(q);
    table.apply(log_energies, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// DCT-III inverse of the unnormalized DCT-II above:
    /// s[m] = (2/M) * (c[0]/2 + sum_{j>=1} c[j] cos(pi j (m+1/2) / M))
    fn idct(coeffs: &[f64]) -> Vec<f64> {
        let m_count = coeffs.len();
        (0..m_count)
            .map(|m| {
                let mut acc = coeffs[0] / 2.0;
                for (j, &c) in coeffs.iter().enumerate().skip(1) {
                    acc += c
                        * (std::f64::consts::PI * j as f64 * (m as f64 + 0.5) / m_count as f64)
                            .cos();
                }
                acc * 2.0 / m_count as f64
            })
            .collect()
    }

    #[test]
    fn constant_input_loads_only_c0() {
        let s = vec![1.0; 26];
        let c = dct_cepstrum(&s, 26, true).unwrap();
        assert!((c[0] - 26.0).abs() < 1e-12);
        for &cj in &c[1..] {
            assert!(cj.abs() < 1e-12);
        }
    }

    #[test]
    fn single_mode_input_loads_only_c1() {
        let m = 26usize;
        let s: Vec<f64> = (0..m)
            .map(|i| (std::f64::consts::PI * (i as f64 + 0.5) / m as f64).cos())
            .collect();
        let c = dct_cepstrum(&s, m, true).unwrap();
        assert!((c[1] - m as f64 / 2.0).abs() < 1e-9, "c1 = {}", c[1]);
        for (j, &cj) in c.iter().enumerate() {
            if j != 1 {
                assert!(cj.abs() < 1e-9, "c{j} = {cj}");
            }
        }
    }

    #[test]
    fn dct3_inverts_full_transform() {
        let mut rng = crate::rng::SplitMix64::new(21);
        let s: Vec<f64> = (0..26).map(|_| rng.range_f64(-5.0, 5.0)).collect();
        let c = dct_cepstrum(&s, 26, true).unwrap();
        let back = idct(&c);
        for (a, b) in back.iter().zip(&s) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn skipping_c0_shifts_the_window() {
        let mut rng = crate::rng::SplitMix64::new(22);
        let s: Vec<f64> = (0..20).map(|_| rng.range_f64(-3.0, 3.0)).collect();
        let with = dct_cepstrum(&s, 13, true).unwrap();
        let without = dct_cepstrum(&s, 12, false).unwrap();
        assert_eq!(&with[1..13], &without[..]);
    }

    #[test]
    fn q_out_of_range_rejected() {
        let s = vec![0.0; 10];
        assert!(dct_cepstrum(&s, 0, true).is_err());
        assert!(dct_cepstrum(&s, 11, true).is_err());
        assert!(dct_cepstrum(&s, 10, true).is_ok());
    }
}
