//! Core value types: time series, frequencies, harmonic models, spectra and
//! per-channel standardization.

use serde::Serialize;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CoreError {
    /// A channel has zero variance, so it cannot be standardized.
    #[error("channel {channel} is constant (zero variance)")]
    ConstantChannel { channel: usize },
    /// Two containers that must agree in size do not.
    #[error("shape mismatch in {what}: expected {expected}, got {got}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// A sample value is NaN or infinite.
    #[error("non-finite value at row {row}, channel {channel}")]
    NonFinite { row: usize, channel: usize },
    /// Fewer than two rows of data.
    #[error("time series too short: {got} rows, need at least 2")]
    TooShort { got: usize },
    #[error("time series has no channels")]
    NoChannels,
    /// Frequencies must be finite reals (cycles per sample).
    #[error("invalid frequency: {value} is not finite")]
    InvalidFrequency { value: f64 },
}

/// A frequency in cycles per sample.
///
/// The wrapper guarantees finiteness, nothing more. Values produced by the
/// spectral code lie on the DFT grid `m / T` inside `[0, 0.5]`, but models
/// whose frequencies are trained by gradient descent may wander outside that
/// band, so the band is not an invariant of the type.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Frequency(f64);

impl Frequency {
    pub fn new(cycles_per_sample: f64) -> Result<Self, CoreError> {
        if cycles_per_sample.is_finite() {
            Ok(Frequency(cycles_per_sample))
        } else {
            Err(CoreError::InvalidFrequency {
                value: cycles_per_sample,
            })
        }
    }

    /// The DFT grid frequency `bin / t_len`.
    pub fn grid(bin: usize, t_len: usize) -> Self {
        assert!(t_len > 0, "grid frequency needs t_len > 0");
        Frequency(bin as f64 / t_len as f64)
    }

    pub fn cycles_per_sample(self) -> f64 {
        self.0
    }

    /// If this frequency is exactly `m / t_len` for an integer bin `m` in
    /// `[0, t_len/2]`, returns `m`.
    pub fn grid_bin(self, t_len: usize) -> Option<usize> {
        if self.0 < 0.0 {
            return None;
        }
        let m = (self.0 * t_len as f64).round();
        if m >= 0.0 && m <= (t_len / 2) as f64 && m as f64 / t_len as f64 == self.0 {
            Some(m as usize)
        } else {
            None
        }
    }
}

/// A uniformly sampled multichannel series, stored channel-major.
///
/// Invariants: at least one channel, all channels the same length `T >= 2`,
/// every sample finite.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    channels: Vec<Vec<f64>>,
    names: Option<Vec<String>>,
}

impl TimeSeries {
    pub fn from_channels(channels: Vec<Vec<f64>>) -> Result<Self, CoreError> {
        if channels.is_empty() {
            return Err(CoreError::NoChannels);
        }
        let t_len = channels[0].len();
        if t_len < 2 {
            return Err(CoreError::TooShort { got: t_len });
        }
        for (l, ch) in channels.iter().enumerate() {
            if ch.len() != t_len {
                return Err(CoreError::ShapeMismatch {
                    what: "channel length",
                    expected: t_len,
                    got: ch.len(),
                });
            }
            for (t, &v) in ch.iter().enumerate() {
                if !v.is_finite() {
                    return Err(CoreError::NonFinite { row: t, channel: l });
                }
            }
        }
        Ok(TimeSeries {
            channels,
            names: None,
        })
    }

    pub fn univariate(values: Vec<f64>) -> Result<Self, CoreError> {
        Self::from_channels(vec![values])
    }

    /// Attaches column names (one per channel).
    pub fn with_names(mut self, names: Vec<String>) -> Result<Self, CoreError> {
        if names.len() != self.n_channels() {
            return Err(CoreError::ShapeMismatch {
                what: "channel names",
                expected: self.n_channels(),
                got: names.len(),
            });
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn t_len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, l: usize) -> &[f64] {
        &self.channels[l]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Squared Frobenius norm: sum of squares over all channels and samples.
    pub fn frob_sq(&self) -> f64 {
        self.channels
            .iter()
            .map(|ch| ch.iter().map(|v| v * v).sum::<f64>())
            .sum()
    }

    /// One row (all channel values at sample `t`).
    pub fn row(&self, t: usize) -> Vec<f64> {
        self.channels.iter().map(|ch| ch[t]).collect()
    }
}

/// Per-channel mean and population standard deviation, as removed by
/// [`standardize`] and restored by [`destandardize`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Standardization {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Centers and scales every channel to mean 0, variance 1.
///
/// Variance uses the population convention (divisor `T`). A channel with zero
/// variance is an error: there is nothing to scale.
pub fn standardize(ts: &TimeSeries) -> Result<(TimeSeries, Standardization), CoreError> {
    let t_len = ts.t_len() as f64;
    let mut means = Vec::with_capacity(ts.n_channels());
    let mut stds = Vec::with_capacity(ts.n_channels());
    let mut out = Vec::with_capacity(ts.n_channels());
    for (l, ch) in ts.channels().iter().enumerate() {
        let mean = ch.iter().sum::<f64>() / t_len;
        let var = ch.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / t_len;
        let std = var.sqrt();
        if std == 0.0 {
            return Err(CoreError::ConstantChannel { channel: l });
        }
        out.push(ch.iter().map(|v| (v - mean) / std).collect());
        means.push(mean);
        stds.push(std);
    }
    let mut standardized = TimeSeries::from_channels(out)?;
    standardized.names = ts.names.clone();
    Ok((standardized, Standardization { means, stds }))
}

/// Inverse of [`standardize`]: `x * std + mean` per channel.
pub fn destandardize(ts: &TimeSeries, params: &Standardization) -> Result<TimeSeries, CoreError> {
    if params.means.len() != ts.n_channels() || params.stds.len() != ts.n_channels() {
        return Err(CoreError::ShapeMismatch {
            what: "standardization channels",
            expected: ts.n_channels(),
            got: params.means.len().min(params.stds.len()),
        });
    }
    let out = ts
        .channels()
        .iter()
        .zip(params.means.iter().zip(&params.stds))
        .map(|(ch, (&mean, &std))| ch.iter().map(|v| v * std + mean).collect())
        .collect();
    let mut restored = TimeSeries::from_channels(out)?;
    restored.names = ts.names.clone();
    Ok(restored)
}

/// A sum of `K` sinusoids per channel.
///
/// Channel `l` evaluates to `sum_k c[l][k] * cos(2*pi*f_k*t) + s[l][k] *
/// sin(2*pi*f_k*t)`; coefficients are stored interleaved per mode as
/// `[c_0, s_0, c_1, s_1, ...]`. The equivalent amplitude/phase form uses
/// `a * cos(2*pi*f*t + b)` with the canonical choice `a >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicModel {
    freqs: Vec<Frequency>,
    /// `n_channels` rows of `2K` interleaved cosine/sine coefficients.
    coeffs: Vec<Vec<f64>>,
}

impl HarmonicModel {
    pub fn new(freqs: Vec<Frequency>, coeffs: Vec<Vec<f64>>) -> Result<Self, CoreError> {
        if coeffs.is_empty() {
            return Err(CoreError::NoChannels);
        }
        for row in &coeffs {
            if row.len() != 2 * freqs.len() {
                return Err(CoreError::ShapeMismatch {
                    what: "coefficient row",
                    expected: 2 * freqs.len(),
                    got: row.len(),
                });
            }
        }
        Ok(HarmonicModel { freqs, coeffs })
    }

    /// Builds a model from amplitude/phase form: `amps[l][k] * cos(2*pi*f_k*t
    /// + phases[l][k])`.
    pub fn from_amp_phase(
        freqs: Vec<Frequency>,
        amps: &[Vec<f64>],
        phases: &[Vec<f64>],
    ) -> Result<Self, CoreError> {
        if amps.len() != phases.len() {
            return Err(CoreError::ShapeMismatch {
                what: "amp/phase channels",
                expected: amps.len(),
                got: phases.len(),
            });
        }
        let k = freqs.len();
        let mut coeffs = Vec::with_capacity(amps.len());
        for (arow, brow) in amps.iter().zip(phases) {
            if arow.len() != k || brow.len() != k {
                return Err(CoreError::ShapeMismatch {
                    what: "amp/phase modes",
                    expected: k,
                    got: arow.len().min(brow.len()),
                });
            }
            let mut row = Vec::with_capacity(2 * k);
            for (&a, &b) in arow.iter().zip(brow) {
                // a*cos(wt + b) = (a cos b) cos(wt) + (-a sin b) sin(wt)
                row.push(a * b.cos());
                row.push(-a * b.sin());
            }
            coeffs.push(row);
        }
        Self::new(freqs, coeffs)
    }

    pub fn k(&self) -> usize {
        self.freqs.len()
    }

    pub fn n_channels(&self) -> usize {
        self.coeffs.len()
    }

    pub fn freqs(&self) -> &[Frequency] {
        &self.freqs
    }

    pub fn coeffs(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    /// The `(cos, sin)` coefficient pair of mode `k` in channel `l`.
    pub fn coeff_pair(&self, l: usize, k: usize) -> (f64, f64) {
        (self.coeffs[l][2 * k], self.coeffs[l][2 * k + 1])
    }

    /// Canonical amplitude/phase form: `(amps, phases)`, each `n_channels x
    /// K`, with every amplitude non-negative.
    pub fn amp_phase(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut amps = Vec::with_capacity(self.n_channels());
        let mut phases = Vec::with_capacity(self.n_channels());
        for row in &self.coeffs {
            let mut arow = Vec::with_capacity(self.k());
            let mut brow = Vec::with_capacity(self.k());
            for k in 0..self.k() {
                let (c, s) = (row[2 * k], row[2 * k + 1]);
                arow.push(c.hypot(s));
                brow.push((-s).atan2(c));
            }
            amps.push(arow);
            phases.push(brow);
        }
        (amps, phases)
    }

    /// All channel values at integer sample index `t` (which may lie beyond
    /// any observed range — this is how extrapolation works).
    pub fn evaluate_row(&self, t: usize) -> Vec<f64> {
        let t = t as f64;
        let trig: Vec<(f64, f64)> = self
            .freqs
            .iter()
            .map(|f| (TAU * f.cycles_per_sample() * t).sin_cos())
            .collect();
        self.coeffs
            .iter()
            .map(|row| {
                trig.iter()
                    .enumerate()
                    .map(|(k, &(sin, cos))| row[2 * k] * cos + row[2 * k + 1] * sin)
                    .sum()
            })
            .collect()
    }

    /// Samples the model at `t = 0..t_len`.
    pub fn reconstruct(&self, t_len: usize) -> Result<TimeSeries, CoreError> {
        let mut channels = vec![Vec::with_capacity(t_len); self.n_channels()];
        for t in 0..t_len {
            for (l, v) in self.evaluate_row(t).into_iter().enumerate() {
                channels[l].push(v);
            }
        }
        TimeSeries::from_channels(channels)
    }
}

/// One-sided power spectrum on the DFT grid of a length-`t_len` series,
/// summed over channels. `power[m]` is the squared magnitude of the DFT
/// coefficient at grid frequency `m / t_len`, for `m = 0 ..= t_len / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Vec<Frequency>,
    power: Vec<f64>,
    t_len: usize,
}

impl Spectrum {
    pub fn new(power: Vec<f64>, t_len: usize) -> Result<Self, CoreError> {
        let expected = t_len / 2 + 1;
        if power.len() != expected {
            return Err(CoreError::ShapeMismatch {
                what: "spectrum bins",
                expected,
                got: power.len(),
            });
        }
        for (m, &p) in power.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(CoreError::NonFinite { row: m, channel: 0 });
            }
        }
        let grid = (0..expected).map(|m| Frequency::grid(m, t_len)).collect();
        Ok(Spectrum { grid, power, t_len })
    }

    pub fn grid(&self) -> &[Frequency] {
        &self.grid
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn n_bins(&self) -> usize {
        self.power.len()
    }
}
