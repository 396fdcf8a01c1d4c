//! Discrete power spectra of uniformly sampled complex signals.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// `|X_k|^2` for the unnormalized forward DFT of `samples`.
pub fn power_spectrum(samples: &[Complex64]) -> Vec<f64> {
    let mut buf = samples.to_vec();
    let fft = FftPlanner::new().plan_fft_forward(buf.len());
    fft.process(&mut buf);
    buf.iter().map(|z| z.norm_sqr()).collect()
}

/// Signed frequency index of DFT bin `k` out of `n`.
pub fn signed_bin(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Bin holding the largest power, ignoring the zero-frequency bin.
pub fn peak_bin(power: &[f64]) -> usize {
    power
        .iter()
        .enumerate()
        .skip(1)
        .fold((0, f64::NEG_INFINITY), |(bk, bp), (k, &p)| if p > bp { (k, p) } else { (bk, bp) })
        .0
}

/// Combined power at `+m` and `-m` bins.
pub fn two_sided_power(power: &[f64], m: usize) -> f64 {
    let n = power.len();
    if m == 0 {
        return power[0];
    }
    let m = m % n;
    power[m] + power[(n - m) % n]
}
