//! Dominant-frequency extraction by coordinate descent on the DFT grid.
//!
//! # Math background
//!
//! For a centered series `x` (T samples, n channels) and grid frequencies
//! `f_1..f_K`, the model is `x_t ~ sum_k c_k cos(2 pi f_k t) + s_k sin(2 pi
//! f_k t)` per channel, fit by least squares. The objective for mode `k` is
//! the squared error left after the best two-column fit of `f_k` to the
//! partial residual `R(k) = x - sum_{j != k} (mode j)`:
//!
//! ```text
//! E(f) = ||R(k)||_F^2 - (2/T) * sum_l |Rhat_l(m)|^2,   f = m/T interior
//! ```
//!
//! where `Rhat_l` is the DFT of channel `l` of the partial residual. The
//! identity holds because interior grid sinusoids are exactly orthogonal over
//! a full window, with squared column norm `T/2`; `E(f)` is therefore
//! minimized at the bin with maximal residual power, which an FFT finds in
//! one pass. DC and the even-`T` Nyquist bin carry no independent sine
//! column, so they are excluded.
//!
//! Each sweep visits every mode, moves its frequency to the residual-power
//! argmax (skipping bins owned by other modes), and refits all amplitudes
//! globally after every accepted move. A move must improve the residual
//! power by a strict relative margin; this keeps the descent monotone under
//! floating-point rounding. The sweep loop stops when no frequency moved by
//! at least `epsilon` (default: half a grid bin, `1/(2T)`).

use crate::dsp::{self, DspError};
use crate::series::{Frequency, HarmonicModel, TimeSeries};
use nalgebra::DMatrix;
use serde::Serialize;
use std::f64::consts::TAU;
use thiserror::Error;

pub const DEFAULT_MAX_SWEEPS: usize = 50;
pub const DEFAULT_RTOL: f64 = 1e-12;
pub const DEFAULT_COND_LIMIT: f64 = 1e12;

#[derive(Debug, Error, PartialEq)]
pub enum ExtractError {
    #[error(transparent)]
    Dsp(#[from] DspError),
    /// The least-squares design matrix is numerically rank deficient,
    /// usually because two frequencies (nearly) coincide.
    #[error("ill-conditioned design matrix: cond = {cond:.3e}")]
    IllConditioned { cond: f64 },
    /// The closed-form objective is only defined on interior DFT bins.
    #[error("frequency {value} is not an interior grid bin for T = {t_len}")]
    NotInteriorBin { value: f64, t_len: usize },
    #[error("mode index {index} out of range for K = {k}")]
    IndexOutOfRange { index: usize, k: usize },
    #[error("shape mismatch in {what}: expected {expected}, got {got}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid extraction config: {reason}")]
    InvalidConfig { reason: String },
}

/// Tuning knobs for [`extract_frequencies`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionConfig {
    /// Number of modes to extract.
    pub k: usize,
    pub max_sweeps: usize,
    /// Convergence threshold on the largest per-sweep frequency move, in
    /// cycles per sample. `None` means half a grid bin, `1/(2T)`.
    pub epsilon: Option<f64>,
    /// Relative residual-power margin a move must clear to be accepted.
    pub rtol: f64,
    /// Condition-number ceiling for the least-squares refit.
    pub cond_limit: f64,
}

impl ExtractionConfig {
    pub fn new(k: usize) -> Self {
        ExtractionConfig {
            k,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ExtractError> {
        let bad = |reason: String| Err(ExtractError::InvalidConfig { reason });
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.max_sweeps == 0 {
            return bad("max_sweeps must be at least 1".into());
        }
        if let Some(eps) = self.epsilon {
            if !(eps > 0.0) {
                return bad(format!("epsilon must be positive, got {eps}"));
            }
        }
        if !(self.rtol >= 0.0) {
            return bad(format!("rtol must be non-negative, got {}", self.rtol));
        }
        if !(self.cond_limit > 0.0) {
            return bad(format!("cond_limit must be positive, got {}", self.cond_limit));
        }
        Ok(())
    }

    fn effective_epsilon(&self, t_len: usize) -> f64 {
        self.epsilon.unwrap_or(1.0 / (2.0 * t_len as f64))
    }
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            k: 5,
            max_sweeps: DEFAULT_MAX_SWEEPS,
            epsilon: None,
            rtol: DEFAULT_RTOL,
            cond_limit: DEFAULT_COND_LIMIT,
        }
    }
}

/// Result of a full extraction run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionReport {
    pub model: HarmonicModel,
    /// Grid bin of each mode, parallel to `model.freqs()`.
    pub bins: Vec<usize>,
    /// Squared reconstruction error after the initial fit (`[0]`) and after
    /// each completed sweep. Non-increasing.
    pub e_history: Vec<f64>,
    pub sweeps_used: usize,
    /// Whether the sweep loop stopped because no frequency moved, rather
    /// than by running out of sweeps.
    pub converged: bool,
}

fn check_channels(ts: &TimeSeries, model: &HarmonicModel) -> Result<(), ExtractError> {
    if model.n_channels() != ts.n_channels() {
        return Err(ExtractError::ShapeMismatch {
            what: "model channels",
            expected: ts.n_channels(),
            got: model.n_channels(),
        });
    }
    Ok(())
}

/// Series minus the model's reconstruction. With `skip = Some(k)`, mode `k`
/// is left in place, giving the partial residual used to rescore mode `k`.
pub fn residual(
    ts: &TimeSeries,
    model: &HarmonicModel,
    skip: Option<usize>,
) -> Result<TimeSeries, ExtractError> {
    check_channels(ts, model)?;
    if let Some(idx) = skip {
        if idx >= model.k() {
            return Err(ExtractError::IndexOutOfRange {
                index: idx,
                k: model.k(),
            });
        }
    }
    let t_len = ts.t_len();
    let mut out: Vec<Vec<f64>> = ts.channels().to_vec();
    for k in 0..model.k() {
        if skip == Some(k) {
            continue;
        }
        let f = model.freqs()[k].cycles_per_sample();
        for t in 0..t_len {
            let (sin, cos) = (TAU * f * t as f64).sin_cos();
            for (l, ch) in out.iter_mut().enumerate() {
                let (c, s) = model.coeff_pair(l, k);
                ch[t] -= c * cos + s * sin;
            }
        }
    }
    TimeSeries::from_channels(out).map_err(|_| ExtractError::ShapeMismatch {
        what: "residual construction",
        expected: t_len,
        got: t_len,
    })
}

/// Squared Frobenius reconstruction error of `model` against `ts`.
pub fn reconstruction_loss(ts: &TimeSeries, model: &HarmonicModel) -> Result<f64, ExtractError> {
    Ok(residual(ts, model, None)?.frob_sq())
}

/// Global least-squares fit of all cosine/sine amplitudes at fixed
/// frequencies. Errors with [`ExtractError::IllConditioned`] when the design
/// matrix condition number exceeds `cond_limit`.
pub fn refit_amplitudes(
    ts: &TimeSeries,
    freqs: &[Frequency],
    cond_limit: f64,
) -> Result<HarmonicModel, ExtractError> {
    let t_len = ts.t_len();
    let n = ts.n_channels();
    if freqs.is_empty() {
        return Ok(HarmonicModel::new(vec![], vec![vec![]; n])
            .expect("empty model is always valid"));
    }
    let k = freqs.len();
    let phi = DMatrix::from_fn(t_len, 2 * k, |t, j| {
        let ang = TAU * freqs[j / 2].cycles_per_sample() * t as f64;
        if j % 2 == 0 {
            ang.cos()
        } else {
            ang.sin()
        }
    });
    let rhs = DMatrix::from_fn(t_len, n, |t, l| ts.channel(l)[t]);
    let svd = phi.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let smin = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !cond.is_finite() || cond > cond_limit {
        return Err(ExtractError::IllConditioned { cond });
    }
    let sol = svd
        .solve(&rhs, 0.0)
        .expect("svd solve with eps = 0 cannot fail");
    let coeffs = (0..n)
        .map(|l| (0..2 * k).map(|j| sol[(j, l)]).collect())
        .collect();
    HarmonicModel::new(freqs.to_vec(), coeffs).map_err(|_| ExtractError::ShapeMismatch {
        what: "refit coefficients",
        expected: 2 * k,
        got: 0,
    })
}

/// Squared error after the best two-column (cosine/sine at `f`) fit to `ts`,
/// by explicit least squares. Valid for any finite frequency; serves as the
/// reference implementation for [`partial_objective_closed_form`].
pub fn partial_objective_direct(ts: &TimeSeries, f: Frequency) -> f64 {
    let t_len = ts.t_len();
    let f = f.cycles_per_sample();
    let mut cos_col = Vec::with_capacity(t_len);
    let mut sin_col = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let (sin, cos) = (TAU * f * t as f64).sin_cos();
        cos_col.push(cos);
        sin_col.push(sin);
    }
    let cc: f64 = cos_col.iter().map(|v| v * v).sum();
    let ss: f64 = sin_col.iter().map(|v| v * v).sum();
    let cs: f64 = cos_col.iter().zip(&sin_col).map(|(c, s)| c * s).sum();
    let det = cc * ss - cs * cs;
    let degenerate = det.abs() <= f64::EPSILON * cc.max(ss).max(1.0);
    let mut total = 0.0;
    for ch in ts.channels() {
        let cr: f64 = cos_col.iter().zip(ch.iter()).map(|(c, r)| c * r).sum();
        let sr: f64 = sin_col.iter().zip(ch.iter()).map(|(s, r)| s * r).sum();
        let reduction = if degenerate {
            // Rank-one design (e.g. f = 0 has a zero sine column): project
            // onto whichever single column is usable.
            let from_cos = if cc > 0.0 { cr * cr / cc } else { 0.0 };
            let from_sin = if ss > 0.0 { sr * sr / ss } else { 0.0 };
            from_cos.max(from_sin)
        } else {
            let alpha = (ss * cr - cs * sr) / det;
            let beta = (cc * sr - cs * cr) / det;
            alpha * cr + beta * sr
        };
        total += ch.iter().map(|v| v * v).sum::<f64>() - reduction;
    }
    total.max(0.0)
}

/// The same objective via the FFT identity `E = ||R||_F^2 - (2/T) sum_l
/// |Rhat_l(m)|^2`, defined only for interior grid bins `f = m/T`.
pub fn partial_objective_closed_form(ts: &TimeSeries, f: Frequency) -> Result<f64, ExtractError> {
    let t_len = ts.t_len();
    let not_interior = || ExtractError::NotInteriorBin {
        value: f.cycles_per_sample(),
        t_len,
    };
    let m = f.grid_bin(t_len).ok_or_else(not_interior)?;
    if m < 1 || m > dsp::interior_max(t_len) {
        return Err(not_interior());
    }
    let mut bin_power = 0.0;
    for ch in ts.channels() {
        bin_power += dsp::dft_channel(ch)[m].norm_sqr();
    }
    Ok((ts.frob_sq() - 2.0 / t_len as f64 * bin_power).max(0.0))
}

/// Best relocation target for one mode: the interior bin with maximal
/// residual power, skipping `exclude` (the bins owned by other modes).
pub fn update_frequency(
    residual: &TimeSeries,
    exclude: &[usize],
) -> Result<Frequency, ExtractError> {
    let spec = dsp::power_spectrum(residual);
    let bins = dsp::top_k_bins(&spec, 1, exclude)?;
    Ok(Frequency::grid(bins[0], residual.t_len()))
}

/// Runs the full coordinate-descent extraction.
pub fn extract_frequencies(
    ts: &TimeSeries,
    config: &ExtractionConfig,
) -> Result<ExtractionReport, ExtractError> {
    config.validate()?;
    let t_len = ts.t_len();
    let eps = config.effective_epsilon(t_len);

    let spec = dsp::power_spectrum(ts);
    let mut bins = dsp::top_k_bins(&spec, config.k, &[])?;
    let grid_freqs =
        |bins: &[usize]| -> Vec<Frequency> { bins.iter().map(|&m| Frequency::grid(m, t_len)).collect() };
    let mut model = refit_amplitudes(ts, &grid_freqs(&bins), config.cond_limit)?;

    let mut e_history = vec![residual(ts, &model, None)?.frob_sq()];
    let mut sweeps_used = 0;
    let mut converged = false;
    for _ in 0..config.max_sweeps {
        let mut delta = 0.0f64;
        for ki in 0..config.k {
            let part = residual(ts, &model, Some(ki))?;
            let spec = dsp::power_spectrum(&part);
            let exclude: Vec<usize> = bins
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != ki)
                .map(|(_, &m)| m)
                .collect();
            let cand = dsp::top_k_bins(&spec, 1, &exclude)?[0];
            if cand != bins[ki]
                && spec.power()[cand] > spec.power()[bins[ki]] * (1.0 + config.rtol)
            {
                delta = delta.max((cand as f64 - bins[ki] as f64).abs() / t_len as f64);
                bins[ki] = cand;
                model = refit_amplitudes(ts, &grid_freqs(&bins), config.cond_limit)?;
            }
        }
        e_history.push(residual(ts, &model, None)?.frob_sq());
        sweeps_used += 1;
        if delta < eps {
            converged = true;
            break;
        }
    }

    Ok(ExtractionReport {
        model,
        bins,
        e_history,
        sweeps_used,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid_tone(t_len: usize, bin: usize, amp: f64, phase: f64) -> Vec<f64> {
        (0..t_len)
            .map(|t| amp * (TAU * bin as f64 * t as f64 / t_len as f64 + phase).cos())
            .collect()
    }

    fn noise(t_len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..t_len).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    #[test]
    fn residual_with_single_skipped_mode_is_input() {
        let x = TimeSeries::univariate(noise(64, 1)).unwrap();
        let model =
            HarmonicModel::new(vec![Frequency::grid(3, 64)], vec![vec![1.5, -0.5]]).unwrap();
        let r = residual(&x, &model, Some(0)).unwrap();
        assert_eq!(r.channel(0), x.channel(0));
    }

    #[test]
    fn residual_removes_other_modes() {
        let t_len = 128;
        let tone_a = grid_tone(t_len, 5, 2.0, 0.0);
        let tone_b = grid_tone(t_len, 11, 1.0, 0.7);
        let x = TimeSeries::univariate(add(&tone_a, &tone_b)).unwrap();
        let model = HarmonicModel::from_amp_phase(
            vec![Frequency::grid(5, t_len), Frequency::grid(11, t_len)],
            &[vec![2.0, 1.0]],
            &[vec![0.0, 0.7]],
        )
        .unwrap();
        // Skipping mode 0 must leave exactly tone A.
        let r = residual(&x, &model, Some(0)).unwrap();
        for (got, want) in r.channel(0).iter().zip(&tone_a) {
            assert!((got - want).abs() < 1e-10);
        }
        // Full residual is numerically zero.
        let full = residual(&x, &model, None).unwrap();
        assert!(full.frob_sq() < 1e-20);
    }

    #[test]
    fn residual_index_and_shape_errors() {
        let x = TimeSeries::univariate(noise(32, 2)).unwrap();
        let model =
            HarmonicModel::new(vec![Frequency::grid(3, 32)], vec![vec![1.0, 0.0]]).unwrap();
        assert_eq!(
            residual(&x, &model, Some(1)).unwrap_err(),
            ExtractError::IndexOutOfRange { index: 1, k: 1 }
        );
        let two = TimeSeries::from_channels(vec![noise(32, 3), noise(32, 4)]).unwrap();
        assert!(matches!(
            residual(&two, &model, None).unwrap_err(),
            ExtractError::ShapeMismatch { .. }
        ));
    }

    #[test]
    fn reconstruction_loss_zero_model_is_energy() {
        let x = TimeSeries::univariate(noise(50, 5)).unwrap();
        let model =
            HarmonicModel::new(vec![Frequency::grid(2, 50)], vec![vec![0.0, 0.0]]).unwrap();
        let loss = reconstruction_loss(&x, &model).unwrap();
        assert!((loss - x.frob_sq()).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_loss_matches_elementwise_oracle() {
        let t_len = 96;
        let x = TimeSeries::from_channels(vec![noise(t_len, 6), noise(t_len, 7)]).unwrap();
        let model = HarmonicModel::new(
            vec![Frequency::grid(4, t_len), Frequency::grid(9, t_len)],
            vec![vec![0.3, -0.2, 1.1, 0.4], vec![-0.8, 0.05, 0.0, 2.0]],
        )
        .unwrap();
        let loss = reconstruction_loss(&x, &model).unwrap();
        let mut oracle = 0.0;
        for l in 0..2 {
            for t in 0..t_len {
                let mut yhat = 0.0;
                for k in 0..2 {
                    let (c, s) = model.coeff_pair(l, k);
                    let ang = TAU * model.freqs()[k].cycles_per_sample() * t as f64;
                    yhat += c * ang.cos() + s * ang.sin();
                }
                let e = x.channel(l)[t] - yhat;
                oracle += e * e;
            }
        }
        assert!((loss - oracle).abs() <= 1e-12 * oracle.max(1.0));
    }

    #[test]
    fn refit_recovers_single_tone_pair() {
        let x = TimeSeries::univariate(grid_tone(512, 8, 2.0, 0.0)).unwrap();
        let model =
            refit_amplitudes(&x, &[Frequency::grid(8, 512)], DEFAULT_COND_LIMIT).unwrap();
        let (c, s) = model.coeff_pair(0, 0);
        assert!((c - 2.0).abs() < 1e-9);
        assert!(s.abs() < 1e-9);
    }

    #[test]
    fn refit_two_modes_exact() {
        let t_len = 512;
        let x = TimeSeries::univariate(add(
            &grid_tone(t_len, 8, 1.0, 0.4),
            &grid_tone(t_len, 20, 0.5, -1.1),
        ))
        .unwrap();
        let freqs = vec![Frequency::grid(8, t_len), Frequency::grid(20, t_len)];
        let model = refit_amplitudes(&x, &freqs, DEFAULT_COND_LIMIT).unwrap();
        assert!(reconstruction_loss(&x, &model).unwrap() < 1e-16);
        let (amps, phases) = model.amp_phase();
        assert!((amps[0][0] - 1.0).abs() < 1e-9);
        assert!((amps[0][1] - 0.5).abs() < 1e-9);
        assert!((phases[0][0] - 0.4).abs() < 1e-9);
        assert!((phases[0][1] + 1.1).abs() < 1e-9);
    }

    #[test]
    fn refit_near_duplicate_frequencies_is_ill_conditioned() {
        let x = TimeSeries::univariate(grid_tone(512, 8, 1.0, 0.0)).unwrap();
        let f = 8.0 / 512.0;
        let freqs = vec![
            Frequency::new(f).unwrap(),
            Frequency::new(f + 1e-15).unwrap(),
        ];
        assert!(matches!(
            refit_amplitudes(&x, &freqs, DEFAULT_COND_LIMIT).unwrap_err(),
            ExtractError::IllConditioned { .. }
        ));
        // An exact duplicate is rank deficient outright.
        let dup = vec![Frequency::grid(8, 512), Frequency::grid(8, 512)];
        assert!(matches!(
            refit_amplitudes(&x, &dup, DEFAULT_COND_LIMIT).unwrap_err(),
            ExtractError::IllConditioned { .. }
        ));
    }

    #[test]
    fn refit_empty_frequency_list() {
        let x = TimeSeries::univariate(noise(16, 8)).unwrap();
        let model = refit_amplitudes(&x, &[], DEFAULT_COND_LIMIT).unwrap();
        assert_eq!(model.k(), 0);
        assert_eq!(model.n_channels(), 1);
    }

    #[test]
    fn partial_objective_on_grid_tone() {
        let t_len = 64;
        let x = TimeSeries::univariate(grid_tone(t_len, 5, 1.0, 0.9)).unwrap();
        // Fitting the tone's own bin leaves nothing.
        assert!(partial_objective_direct(&x, Frequency::grid(5, t_len)) < 1e-9);
        // Fitting an orthogonal bin removes nothing.
        let energy = x.frob_sq();
        let off = partial_objective_direct(&x, Frequency::grid(9, t_len));
        assert!((off - energy).abs() < 1e-9);
    }

    #[test]
    fn partial_objective_zero_frequency_fits_mean_only() {
        let x = TimeSeries::univariate(vec![3.0; 32]).unwrap();
        // f = 0: cosine column is all ones, sine column all zeros.
        let e = partial_objective_direct(&x, Frequency::new(0.0).unwrap());
        assert!(e < 1e-18);
    }

    #[test]
    fn closed_form_matches_direct_on_all_interior_bins() {
        let t_len = 128;
        let x = TimeSeries::from_channels(vec![noise(t_len, 10), noise(t_len, 11)]).unwrap();
        for m in 1..=dsp::interior_max(t_len) {
            let f = Frequency::grid(m, t_len);
            let direct = partial_objective_direct(&x, f);
            let closed = partial_objective_closed_form(&x, f).unwrap();
            let rel = (closed - direct).abs() / direct.abs().max(1e-30);
            assert!(rel < 1e-8, "bin {m}: direct {direct} closed {closed}");
        }
    }

    #[test]
    fn closed_form_rejects_non_interior_frequencies() {
        let x = TimeSeries::univariate(noise(64, 12)).unwrap();
        for f in [0.0, 0.5, 0.0151, -0.125] {
            assert!(matches!(
                partial_objective_closed_form(&x, Frequency::new(f).unwrap()),
                Err(ExtractError::NotInteriorBin { .. })
            ));
        }
        // Odd length: 0.5 is off-grid, the last interior bin is (T-1)/2.
        let odd = TimeSeries::univariate(noise(63, 13)).unwrap();
        assert!(partial_objective_closed_form(&odd, Frequency::grid(31, 63)).is_ok());
    }

    #[test]
    fn update_frequency_finds_tone_and_respects_exclusion() {
        let t_len = 256;
        let x = TimeSeries::univariate(grid_tone(t_len, 13, 1.0, 0.2)).unwrap();
        assert_eq!(
            update_frequency(&x, &[]).unwrap(),
            Frequency::grid(13, t_len)
        );
        let second = update_frequency(&x, &[13]).unwrap();
        assert_ne!(second.grid_bin(t_len), Some(13));
    }

    #[test]
    fn update_frequency_breaks_exact_ties_low() {
        // A unit impulse at t = 0 has exactly equal power on every bin.
        let mut imp = vec![0.0; 16];
        imp[0] = 1.0;
        let x = TimeSeries::univariate(imp).unwrap();
        assert_eq!(update_frequency(&x, &[]).unwrap(), Frequency::grid(1, 16));
        assert_eq!(update_frequency(&x, &[1]).unwrap(), Frequency::grid(2, 16));
    }

    #[test]
    fn update_frequency_agrees_with_exhaustive_objective_scan() {
        for seed in 0..5 {
            let t_len = 64;
            let x = TimeSeries::univariate(noise(t_len, 100 + seed)).unwrap();
            let best = update_frequency(&x, &[]).unwrap();
            let scan = (1..=dsp::interior_max(t_len))
                .map(|m| (m, partial_objective_direct(&x, Frequency::grid(m, t_len))))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            assert_eq!(best.grid_bin(t_len), Some(scan.0), "seed {seed}");
        }
    }

    #[test]
    fn extract_recovers_noiseless_two_tone_exactly() {
        let t_len = 512;
        let x = TimeSeries::univariate(add(
            &grid_tone(t_len, 8, 1.0, 0.3),
            &grid_tone(t_len, 20, 0.4, 2.0),
        ))
        .unwrap();
        let report = extract_frequencies(&x, &ExtractionConfig::new(2)).unwrap();
        let mut bins = report.bins.clone();
        bins.sort_unstable();
        assert_eq!(bins, vec![8, 20]);
        assert!(report.converged);
        assert_eq!(report.sweeps_used, 1);
        assert_eq!(report.e_history.len(), 2);
        assert!(*report.e_history.last().unwrap() < 1e-10);
        let (amps, _) = report.model.amp_phase();
        let mut got: Vec<f64> = amps[0].clone();
        got.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((got[0] - 1.0).abs() < 1e-9);
        assert!((got[1] - 0.4).abs() < 1e-9);
    }

    #[test]
    fn extract_single_tone() {
        let x = TimeSeries::univariate(grid_tone(128, 7, 1.0, 1.2)).unwrap();
        let report = extract_frequencies(&x, &ExtractionConfig::new(1)).unwrap();
        assert_eq!(report.bins, vec![7]);
        assert!(report.converged);
    }

    #[test]
    fn extract_descent_is_monotone_on_noisy_signals() {
        for seed in 0..5 {
            let t_len = 256;
            let x = TimeSeries::univariate(add(
                &grid_tone(t_len, 9, 1.0, 0.5),
                &noise(t_len, 200 + seed),
            ))
            .unwrap();
            let report = extract_frequencies(&x, &ExtractionConfig::new(3)).unwrap();
            for w in report.e_history.windows(2) {
                assert!(
                    w[1] <= w[0] * (1.0 + 1e-10),
                    "seed {seed}: {} -> {}",
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn extract_is_invariant_under_channel_permutation() {
        let t_len = 256;
        let a = add(&grid_tone(t_len, 9, 1.0, 0.5), &noise(t_len, 31));
        let b = add(&grid_tone(t_len, 17, 0.8, 1.5), &noise(t_len, 32));
        let ab = TimeSeries::from_channels(vec![a.clone(), b.clone()]).unwrap();
        let ba = TimeSeries::from_channels(vec![b, a]).unwrap();
        let r1 = extract_frequencies(&ab, &ExtractionConfig::new(2)).unwrap();
        let r2 = extract_frequencies(&ba, &ExtractionConfig::new(2)).unwrap();
        assert_eq!(r1.bins, r2.bins);
        assert_eq!(r1.e_history, r2.e_history);
    }

    #[test]
    fn extract_rejects_bad_configs() {
        let x = TimeSeries::univariate(noise(32, 40)).unwrap();
        for cfg in [
            ExtractionConfig::new(0),
            ExtractionConfig {
                max_sweeps: 0,
                ..ExtractionConfig::new(1)
            },
            ExtractionConfig {
                epsilon: Some(0.0),
                ..ExtractionConfig::new(1)
            },
            ExtractionConfig {
                rtol: -1.0,
                ..ExtractionConfig::new(1)
            },
        ] {
            assert!(matches!(
                extract_frequencies(&x, &cfg).unwrap_err(),
                ExtractError::InvalidConfig { .. }
            ));
        }
    }

    #[test]
    fn extract_with_too_many_modes_reports_bin_shortage() {
        // T = 8 has three interior bins.
        let x = TimeSeries::univariate(noise(8, 50)).unwrap();
        assert_eq!(
            extract_frequencies(&x, &ExtractionConfig::new(4)).unwrap_err(),
            ExtractError::Dsp(DspError::NotEnoughBins {
                requested: 4,
                available: 3
            })
        );
    }
}
