//! Spectral estimation: DFT, one-sided power spectra and peak picking.
//!
//! Peak picking only ever considers *interior* grid bins: DC (`m = 0`) and,
//! for even `T`, the Nyquist bin (`m = T/2`) are excluded. Those bins cannot
//! carry an independent cosine/sine pair, and a centered series has no DC
//! component worth modelling anyway.

use crate::series::{Spectrum, TimeSeries};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DspError {
    /// The admissible interior grid is smaller than the number of requested
    /// peaks.
    #[error("not enough interior bins: requested {requested}, only {available} admissible")]
    NotEnoughBins { requested: usize, available: usize },
}

/// Forward (unnormalized) DFT of one real channel.
pub fn dft_channel(x: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(x.len()).process(&mut buf);
    buf
}

/// Largest interior bin index: `T/2 - 1` for even `T`, `(T-1)/2` for odd.
pub fn interior_max(t_len: usize) -> usize {
    if t_len % 2 == 0 {
        t_len / 2 - 1
    } else {
        t_len / 2
    }
}

/// One-sided power spectrum summed over channels: `power[m] = sum_l
/// |X_l(m)|^2` for `m = 0 ..= T/2`.
pub fn power_spectrum(ts: &TimeSeries) -> Spectrum {
    let t_len = ts.t_len();
    let mut power = vec![0.0; t_len / 2 + 1];
    for ch in ts.channels() {
        let coeffs = dft_channel(ch);
        for (m, p) in power.iter_mut().enumerate() {
            *p += coeffs[m].norm_sqr();
        }
    }
    Spectrum::new(power, t_len).expect("power spectrum construction is infallible here")
}

/// Indices of the `k` highest-power interior bins, in decreasing power order,
/// skipping any bin listed in `exclude`. Power ties resolve to the lower bin
/// index, which keeps the selection deterministic.
pub fn top_k_bins(spec: &Spectrum, k: usize, exclude: &[usize]) -> Result<Vec<usize>, DspError> {
    let hi = interior_max(spec.t_len());
    let mut candidates: Vec<(usize, f64)> = (1..=hi)
        .filter(|m| !exclude.contains(m))
        .map(|m| (m, spec.power()[m]))
        .collect();
    if candidates.len() < k {
        return Err(DspError::NotEnoughBins {
            requested: k,
            available: candidates.len(),
        });
    }
    candidates.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("spectrum power is finite")
            .then(a.0.cmp(&b.0))
    });
    Ok(candidates[..k].iter().map(|&(m, _)| m).collect())
}

/// Like [`top_k_bins`] but returning grid frequencies.
pub fn top_k_peaks(
    spec: &Spectrum,
    k: usize,
    exclude: &[usize],
) -> Result<Vec<crate::series::Frequency>, DspError> {
    Ok(top_k_bins(spec, k, exclude)?
        .into_iter()
        .map(|m| crate::series::Frequency::grid(m, spec.t_len()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Frequency;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn tone(t_len: usize, bin: usize, amp: f64) -> Vec<f64> {
        (0..t_len)
            .map(|t| amp * (TAU * bin as f64 * t as f64 / t_len as f64).cos())
            .collect()
    }

    /// O(T^2) reference DFT used to cross-check the FFT path.
    fn dft_direct(x: &[f64]) -> Vec<Complex<f64>> {
        let t_len = x.len();
        (0..t_len)
            .map(|m| {
                let mut acc = Complex::new(0.0, 0.0);
                for (t, &v) in x.iter().enumerate() {
                    let ang = -TAU * m as f64 * t as f64 / t_len as f64;
                    acc += Complex::new(v * ang.cos(), v * ang.sin());
                }
                acc
            })
            .collect()
    }

    #[test]
    fn dft_pure_cosine_concentrates_on_its_bin() {
        let x = tone(32, 3, 1.0);
        let coeffs = dft_channel(&x);
        assert!((coeffs[3].norm() - 16.0).abs() < 1e-9); // T/2
        for m in 1..16 {
            if m != 3 {
                assert!(coeffs[m].norm() < 1e-9, "bin {m} = {}", coeffs[m].norm());
            }
        }
    }

    #[test]
    fn dft_constant_is_pure_dc() {
        let coeffs = dft_channel(&[1.0; 8]);
        assert!((coeffs[0].re - 8.0).abs() < 1e-12);
        assert!(coeffs[0].im.abs() < 1e-12);
        for c in &coeffs[1..] {
            assert!(c.norm() < 1e-12);
        }
    }

    #[test]
    fn dft_matches_direct_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fast = dft_channel(&x);
        let slow = dft_direct(&x);
        let scale = slow.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn dft_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &t_len in &[16usize, 37, 128] {
            let x: Vec<f64> = (0..t_len).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let energy_time: f64 = x.iter().map(|v| v * v).sum();
            let energy_freq: f64 =
                dft_channel(&x).iter().map(|c| c.norm_sqr()).sum::<f64>() / t_len as f64;
            assert!((energy_time - energy_freq).abs() <= 1e-10 * energy_time);
        }
    }

    #[test]
    fn interior_max_parities() {
        assert_eq!(interior_max(8), 3); // even: exclude 4 = Nyquist
        assert_eq!(interior_max(9), 4);
        assert_eq!(interior_max(512), 255);
    }

    #[test]
    fn power_spectrum_sums_channels() {
        let x = tone(32, 3, 1.0);
        let one = TimeSeries::univariate(x.clone()).unwrap();
        let two = TimeSeries::from_channels(vec![x.clone(), x]).unwrap();
        let p1 = power_spectrum(&one);
        let p2 = power_spectrum(&two);
        assert_eq!(p1.n_bins(), 17);
        assert!((p1.power()[3] - 256.0).abs() < 1e-6); // (T/2)^2
        for m in 0..17 {
            assert_eq!(p2.power()[m], 2.0 * p1.power()[m]);
        }
    }

    #[test]
    fn power_spectrum_invariant_under_channel_permutation() {
        let a = tone(64, 5, 1.0);
        let b = tone(64, 9, 0.5);
        let ab = power_spectrum(&TimeSeries::from_channels(vec![a.clone(), b.clone()]).unwrap());
        let ba = power_spectrum(&TimeSeries::from_channels(vec![b, a]).unwrap());
        for m in 0..ab.n_bins() {
            assert_eq!(ab.power()[m], ba.power()[m]);
        }
    }

    #[test]
    fn offgrid_low_tone_peaks_at_bin_8() {
        // 0.015 cycles/sample over 512 samples sits between bins 7 and 8;
        // the peak lands on 8 with about a 4x power margin.
        let x: Vec<f64> = (0..512).map(|t| (TAU * 0.015 * t as f64).sin()).collect();
        let spec = power_spectrum(&TimeSeries::univariate(x).unwrap());
        let top = top_k_bins(&spec, 1, &[]).unwrap();
        assert_eq!(top, vec![8]);
        assert!(spec.power()[8] > 4.0 * spec.power()[7]);
    }

    #[test]
    fn top_k_orders_by_power_and_breaks_ties_low() {
        // T = 8: interior bins are {1, 2, 3}; powers 5, 9, 9 => 2 before 3.
        let spec = Spectrum::new(vec![0.0, 5.0, 9.0, 9.0, 1.0], 8).unwrap();
        assert_eq!(top_k_bins(&spec, 2, &[]).unwrap(), vec![2, 3]);
        assert_eq!(top_k_bins(&spec, 3, &[]).unwrap(), vec![2, 3, 1]);
    }

    #[test]
    fn top_k_skips_excluded_and_boundary_bins() {
        let x: Vec<f64> = (0..32)
            .map(|t| {
                let t = t as f64;
                10.0 + (std::f64::consts::PI * t).cos() + 0.5 * (TAU * 3.0 * t / 32.0).cos()
            })
            .collect();
        let spec = power_spectrum(&TimeSeries::univariate(x).unwrap());
        // DC and Nyquist dominate the raw spectrum but are inadmissible.
        assert!(spec.power()[0] > spec.power()[3]);
        assert!(spec.power()[16] > spec.power()[3]);
        assert_eq!(top_k_bins(&spec, 1, &[]).unwrap(), vec![3]);
        // Excluding the winner promotes the runner-up.
        let next = top_k_bins(&spec, 1, &[3]).unwrap();
        assert_ne!(next[0], 3);
    }

    #[test]
    fn top_k_three_tones() {
        let t_len = 512;
        let x: Vec<f64> = (0..t_len)
            .map(|t| {
                let t = t as f64;
                tone_val(t, 8, t_len, 1.0) + tone_val(t, 13, t_len, 0.8) + tone_val(t, 18, t_len, 0.6)
            })
            .collect();
        let spec = power_spectrum(&TimeSeries::univariate(x).unwrap());
        assert_eq!(top_k_bins(&spec, 3, &[]).unwrap(), vec![8, 13, 18]);
        let freqs = top_k_peaks(&spec, 3, &[]).unwrap();
        assert_eq!(freqs[0], Frequency::grid(8, 512));
    }

    fn tone_val(t: f64, bin: usize, t_len: usize, amp: f64) -> f64 {
        amp * (TAU * bin as f64 * t / t_len as f64).cos()
    }

    #[test]
    fn top_k_not_enough_bins() {
        // T = 6: interior bins are {1, 2} only.
        let spec = Spectrum::new(vec![1.0, 2.0, 3.0, 4.0], 6).unwrap();
        assert_eq!(
            top_k_bins(&spec, 3, &[]).unwrap_err(),
            DspError::NotEnoughBins {
                requested: 3,
                available: 2
            }
        );
        assert_eq!(
            top_k_bins(&spec, 2, &[1]).unwrap_err(),
            DspError::NotEnoughBins {
                requested: 2,
                available: 1
            }
        );
    }
}
