//! Single-segment rectangular periodogram and FFT-shaped noise.

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// One-sided periodogram `|X_k|^2 / N` for bins `0..=N/2`.
pub fn periodogram(samples: &[f64]) -> Vec<f64> {
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&s| Complex::new(s, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf[..=n / 2].iter().map(|c| c.norm_sqr() / n as f64).collect()
}

pub fn bin_frequency(bin: usize, n: usize, sample_rate_hz: f64) -> f64 {
    bin as f64 * sample_rate_hz / n as f64
}

/// Nearest periodogram bin to `freq_hz`, clamped to the one-sided range.
pub fn nearest_bin(freq_hz: f64, n: usize, sample_rate_hz: f64) -> usize {
    let bin = (freq_hz * n as f64 / sample_rate_hz).round().max(0.0) as usize;
    bin.min(n / 2)
}

/// Real noise of length `n` whose amplitude spectrum is `gain(f)` times a
/// complex Gaussian. The DC bin is always zero.
pub fn shaped_noise<R: Rng + ?Sized>(
    n: usize,
    sample_rate_hz: f64,
    rng: &mut R,
    gain: impl Fn(f64) -> f64,
) -> Vec<f64> {
    if n < 2 {
        return vec![0.0; n];
    }
    let mut spec = vec![Complex::new(0.0, 0.0); n];
    for k in 1..=n / 2 {
        let g = gain(bin_frequency(k, n, sample_rate_hz));
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        if 2 * k == n {
            spec[k] = Complex::new(g * re, 0.0);
        } else {
            let c = Complex::new(re, im) * g;
            spec[k] = c;
            spec[n - k] = c.conj();
        }
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    spec.iter().map(|c| c.re).collect()
}

pub fn mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().sum::<f64>() / x.len() as f64
    }
}

/// Mean-square power about the mean.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    if x.is_empty() {
        0.0
    } else {
        x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn periodogram_of_bin_centred_tone() {
        let fs = 256.0;
        let x: Vec<f64> = (0..512).map(|i| (2.0 * PI * 8.0 * i as f64 / fs).sin()).collect();
        let p = periodogram(&x);
        assert_eq!(p.len(), 257);
        let peak = p
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(peak, 16);
        // Parseval: a unit sine has mean power 1/2.
        let total: f64 = p.iter().sum::<f64>() * 2.0 / 512.0;
        assert!((total - 0.5).abs() < 1e-9);
    }

    #[test]
    fn shaped_noise_respects_band_mask() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = shaped_noise(512, 256.0, &mut rng, |f| if (9.0..=11.0).contains(&f) { 1.0 } else { 0.0 });
        let p = periodogram(&x);
        for (k, v) in p.iter().enumerate() {
            let f = bin_frequency(k, 512, 256.0);
            if !(9.0..=11.0).contains(&f) {
                assert!(*v < 1e-18, "leak at {f} Hz");
            }
        }
    }

    #[test]
    fn nearest_bin_rounds() {
        assert_eq!(nearest_bin(8.0, 512, 256.0), 16);
        assert_eq!(nearest_bin(8.2, 512, 256.0), 16);
        assert_eq!(nearest_bin(8.3, 512, 256.0), 17);
        assert_eq!(nearest_bin(1000.0, 512, 256.0), 256);
    }
}
