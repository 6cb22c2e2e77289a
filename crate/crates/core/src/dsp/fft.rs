//! Iterative radix-2 complex FFT. Lengths are always powers of two here
//! because frames are zero-padded to the next power of two before the
//! transform.

/// In-place decimation-in-time FFT over separate re/im arrays.
/// Length must be a power of two (>= 1).
pub fn fft_in_place(re: &mut [f64], im: &mut [f64]) {
    let n = re.len();
    assert_eq!(n, im.len());
    assert!(n.is_power_of_two(), "fft length {n} is not a power of two");
    if n <= 1 {
        return;
    }

    // bit-reversal permutation
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = (i.reverse_bits() >> (usize::BITS - bits)) as usize;
        if j > i {
            re.swap(i, j);
            im.swap(i, j);
        }
    }

    let mut len = 2;
    while len <= n {
        let ang = -std::f64::consts::TAU / len as f64;
        let (w_im, w_re) = ang.sin_cos();
        for start in (0..n).step_by(len) {
            let mut cur_re = 1.0f64;
            let mut cur_im = 0.0f64;
            for k in 0..len / 2 {
                let a = start + k;
                let b = a + len / 2;
                let t_re = cur_re * re[b] - cur_im * im[b];
                let t_im = cur_re * im[b] + cur_im * re[b];
                re[b] = re[a] - t_re;
                im[b] = im[a] - t_im;
                re[a] += t_re;
                im[a] += t_im;
                let next_re = cur_re * w_re - cur_im * w_im;
                cur_im = cur_re * w_im + cur_im * w_re;
                cur_re = next_re;
            }
        }
        len <<= 1;
    }
}

/// Smallest power of two >= n.
pub fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct O(n^2) DFT, the independent reference for the fast transform.
    fn naive_dft(input: &[f64]) -> Vec<(f64, f64)> {
        let n = input.len();
        (0..n)
            .map(|k| {
                let mut re = 0.0;
                let mut im = 0.0;
                for (i, &x) in input.iter().enumerate() {
                    let ang = -std::f64::consts::TAU * (k * i) as f64 / n as f64;
                    re += x * ang.cos();
                    im += x * ang.sin();
                }
                (re, im)
            })
            .collect()
    }

    #[test]
    fn impulse_has_flat_spectrum() {
        let mut re = vec![0.0; 16];
        let mut im = vec![0.0; 16];
        re[0] = 1.0;
        fft_in_place(&mut re, &mut im);
        for k in 0..16 {
            assert!((re[k] - 1.0).abs() < 1e-12);
            assert!(im[k].abs() < 1e-12);
        }
    }

    #[test]
    fn matches_naive_dft_on_random_input() {
        let mut rng = crate::rng::SplitMix64::new(77);
        for &n in &[2usize, 8, 64, 256, 1024] {
            let input: Vec<f64> = (0..n).map(|_| rng.range_f64(-1.0, 1.0)).collect();
            let expect = naive_dft(&input);
            let mut re = input.clone();
            let mut im = vec![0.0; n];
            fft_in_place(&mut re, &mut im);
            for k in 0..n {
                assert!(
                    (re[k] - expect[k].0).abs() < 1e-9 && (im[k] - expect[k].1).abs() < 1e-9,
                    "n={n} k={k}: ({}, {}) vs ({}, {})",
                    re[k],
                    im[k],
                    expect[k].0,
                    expect[k].1
                );
            }
        }
    }

    #[test]
    fn bin_aligned_cosine_concentrates_energy() {
        let n = 64;
        let k0 = 5;
        let input: Vec<f64> = (0..n)
            .map(|i| (std::f64::consts::TAU * k0 as f64 * i as f64 / n as f64).cos())
            .collect();
        let mut re = input.clone();
        let mut im = vec![0.0; n];
        fft_in_place(&mut re, &mut im);
        let power: Vec<f64> = (0..n).map(|k| re[k] * re[k] + im[k] * im[k]).collect();
        let half = (n / 2) as f64;
        assert!((power[k0] - half * half).abs() / (half * half) < 1e-9);
        for (k, &p) in power.iter().enumerate() {
            if k != k0 && k != n - k0 {
                assert!(p < 1e-18, "leak at bin {k}: {p}");
            }
        }
    }

    #[test]
    fn parseval_holds() {
        let mut rng = crate::rng::SplitMix64::new(5);
        let n = 512;
        let input: Vec<f64> = (0..n).map(|_| rng.range_f64(-1.0, 1.0)).collect();
        let time_energy: f64 = input.iter().map(|x| x * x).sum();
        let mut re = input;
        let mut im = vec![0.0; n];
        fft_in_place(&mut re, &mut im);
        let freq_energy: f64 =
            (0..n).map(|k| re[k] * re[k] + im[k] * im[k]).sum::<f64>() / n as f64;
        assert!((time_energy - freq_energy).abs() / time_energy < 1e-12);
    }

    #[test]
    fn next_pow2_values() {
        assert_eq!(next_pow2(1), 1);
        assert_eq!(next_pow2(400), 512);
        assert_eq!(next_pow2(512), 512);
        assert_eq!(next_pow2(1102), 2048);
    }
}
