//! A linear model over a sinusoidal feature embedding, trained with a
//! two-speed Adam schedule.
//!
//! The scalar model is `yhat(t) = sum_k a_k cos(2 pi f_k t + b_k)`, i.e. a
//! linear readout of the embedding `phi(t) = [cos(theta_1), sin(theta_1),
//! ..., cos(theta_K), sin(theta_K)]` with `theta_k = 2 pi f_k t + b_k`.
//! Amplitudes and phases train at `lr_main` while frequencies get their own
//! Adam instance at `lr_freq`; `lr_freq = 0` freezes the frequencies
//! bitwise. Gradients of the summed squared error are analytic:
//!
//! ```text
//! dL/da_k = -2 sum_t e_t cos(theta_tk)
//! dL/db_k =  2 sum_t e_t a_k sin(theta_tk)
//! dL/df_k =  2 sum_t e_t a_k sin(theta_tk) * 2 pi t
//! ```
//!
//! Frequencies are plain trainable reals; nothing clamps them to the
//! spectral band `[0, 0.5]`, and with a large `lr_freq` they can and do
//! wander off-grid.

use crate::extract::{extract_frequencies, ExtractError, ExtractionConfig};
use crate::series::{CoreError, Frequency, TimeSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LfmError {
    #[error("the model is scalar; got {channels} channels")]
    MultiChannelUnsupported { channels: usize },
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error("shape mismatch in {what}: expected {expected}, got {got}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid train config: {reason}")]
    InvalidConfig { reason: String },
    #[error("parameters became non-finite after step {step}")]
    NonFinite { step: usize },
}

/// How the trainable parameters are initialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// Spectral extraction provides frequencies, amplitudes and phases.
    Fft,
    /// Frequencies uniform in `random_freq_range`, amplitudes uniform in
    /// `[0, 1)`, phases uniform in `[0, 2 pi)`.
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainConfig {
    /// Number of sinusoidal modes.
    pub k: usize,
    /// Learning rate for amplitudes and phases.
    pub lr_main: f64,
    /// Learning rate for frequencies (0 freezes them).
    pub lr_freq: f64,
    pub steps: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub init: InitMode,
    /// Sampling band for random frequency init, in cycles per sample.
    pub random_freq_range: (f64, f64),
    /// Seed for random init; unused by FFT init.
    pub seed: u64,
    /// Frequency snapshots land in `freq_trajectory` every this many steps.
    pub log_interval: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            k: 5,
            lr_main: 1e-3,
            lr_freq: 1e-6,
            steps: 2000,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            init: InitMode::Fft,
            random_freq_range: (0.0, 0.15),
            seed: 0,
            log_interval: 100,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), LfmError> {
        let bad = |reason: String| Err(LfmError::InvalidConfig { reason });
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(self.lr_main >= 0.0) || !(self.lr_freq >= 0.0) {
            return bad("learning rates must be non-negative".into());
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad("betas must lie in [0, 1)".into());
        }
        if !(self.eps > 0.0) {
            return bad("eps must be positive".into());
        }
        let (lo, hi) = self.random_freq_range;
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return bad(format!("empty random frequency range [{lo}, {hi})"));
        }
        if self.log_interval == 0 {
            return bad("log_interval must be at least 1".into());
        }
        Ok(())
    }
}

/// The trainable parameter triple `(a, b, f)`, each of length K.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LfmParams {
    pub amps: Vec<f64>,
    pub phases: Vec<f64>,
    pub freqs: Vec<Frequency>,
}

impl LfmParams {
    pub fn new(
        amps: Vec<f64>,
        phases: Vec<f64>,
        freqs: Vec<Frequency>,
    ) -> Result<Self, LfmError> {
        if amps.len() != freqs.len() || phases.len() != freqs.len() {
            return Err(LfmError::ShapeMismatch {
                what: "parameter vectors",
                expected: freqs.len(),
                got: amps.len().min(phases.len()),
            });
        }
        Ok(LfmParams {
            amps,
            phases,
            freqs,
        })
    }

    pub fn k(&self) -> usize {
        self.freqs.len()
    }
}

/// The feature vector `[cos(theta_1), sin(theta_1), ..., cos(theta_K),
/// sin(theta_K)]` at integer sample `t`. Its squared norm is identically K.
pub fn periodic_embedding(
    t: usize,
    freqs: &[Frequency],
    phases: &[f64],
) -> Result<Vec<f64>, LfmError> {
    if freqs.len() != phases.len() {
        return Err(LfmError::ShapeMismatch {
            what: "embedding phases",
            expected: freqs.len(),
            got: phases.len(),
        });
    }
    let mut out = Vec::with_capacity(2 * freqs.len());
    for (f, &b) in freqs.iter().zip(phases) {
        let (sin, cos) = (TAU * f.cycles_per_sample() * t as f64 + b).sin_cos();
        out.push(cos);
        out.push(sin);
    }
    Ok(out)
}

/// Model predictions at the given integer sample indices.
pub fn lfm_predict(params: &LfmParams, t_values: &[usize]) -> Vec<f64> {
    t_values
        .iter()
        .map(|&t| {
            let t = t as f64;
            params
                .freqs
                .iter()
                .zip(params.amps.iter().zip(&params.phases))
                .map(|(f, (&a, &b))| a * (TAU * f.cycles_per_sample() * t + b).cos())
                .sum()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LfmGrads {
    pub amps: Vec<f64>,
    pub phases: Vec<f64>,
    pub freqs: Vec<f64>,
}

/// Summed squared error of the scalar model on a univariate series, plus its
/// analytic gradients.
pub fn lfm_loss_and_grads(
    params: &LfmParams,
    ts: &TimeSeries,
) -> Result<(f64, LfmGrads), LfmError> {
    if ts.n_channels() != 1 {
        return Err(LfmError::MultiChannelUnsupported {
            channels: ts.n_channels(),
        });
    }
    let k = params.k();
    let y = ts.channel(0);
    let mut loss = 0.0;
    let mut ga = vec![0.0; k];
    let mut gb = vec![0.0; k];
    let mut gf = vec![0.0; k];
    let mut cos_t = vec![0.0; k];
    let mut sin_t = vec![0.0; k];
    for (t, &yt) in y.iter().enumerate() {
        let tf = t as f64;
        let mut yhat = 0.0;
        for j in 0..k {
            let theta = TAU * params.freqs[j].cycles_per_sample() * tf + params.phases[j];
            let (sin, cos) = theta.sin_cos();
            cos_t[j] = cos;
            sin_t[j] = sin;
            yhat += params.amps[j] * cos;
        }
        let e = yt - yhat;
        loss += e * e;
        for j in 0..k {
            ga[j] -= 2.0 * e * cos_t[j];
            let common = 2.0 * e * params.amps[j] * sin_t[j];
            gb[j] += common;
            gf[j] += common * TAU * tf;
        }
    }
    Ok((
        loss,
        LfmGrads {
            amps: ga,
            phases: gb,
            freqs: gf,
        },
    ))
}

/// Standard bias-corrected Adam over a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl AdamState {
    pub fn new(len: usize, beta1: f64, beta2: f64, eps: f64) -> Self {
        AdamState {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
            beta1,
            beta2,
            eps,
        }
    }

    /// One in-place update `params -= lr * mhat / (sqrt(vhat) + eps)`.
    pub fn step(
        &mut self,
        params: &mut [f64],
        grads: &[f64],
        lr: f64,
    ) -> Result<(), LfmError> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(LfmError::ShapeMismatch {
                what: "adam vectors",
                expected: self.m.len(),
                got: params.len().min(grads.len()),
            });
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            let mhat = self.m[i] / bc1;
            let vhat = self.v[i] / bc2;
            params[i] -= lr * mhat / (vhat.sqrt() + self.eps);
        }
        Ok(())
    }
}

/// Full training record. `loss_history[i]` is the loss *before* step `i`, so
/// its length equals the number of steps taken; `final_loss` is evaluated at
/// the returned parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub init: LfmParams,
    pub params: LfmParams,
    pub loss_history: Vec<f64>,
    /// Frequency snapshots every `log_interval` steps plus one after the
    /// final step.
    pub freq_trajectory: Vec<Vec<f64>>,
    pub final_loss: f64,
}

fn init_params(ts: &TimeSeries, config: &TrainConfig) -> Result<LfmParams, LfmError> {
    match config.init {
        InitMode::Fft => {
            let report = extract_frequencies(ts, &ExtractionConfig::new(config.k))?;
            let (amps, phases) = report.model.amp_phase();
            LfmParams::new(
                amps.into_iter().next().unwrap(),
                phases.into_iter().next().unwrap(),
                report.model.freqs().to_vec(),
            )
        }
        InitMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let (lo, hi) = config.random_freq_range;
            let freqs: Vec<Frequency> = (0..config.k)
                .map(|_| Frequency::new(rng.gen_range(lo..hi)))
                .collect::<Result<_, CoreError>>()
                .map_err(|_| LfmError::InvalidConfig {
                    reason: "random frequency range produced a non-finite value".into(),
                })?;
            let amps = (0..config.k).map(|_| rng.gen_range(0.0..1.0)).collect();
            let phases = (0..config.k).map(|_| rng.gen_range(0.0..TAU)).collect();
            LfmParams::new(amps, phases, freqs)
        }
    }
}

/// Trains the model on a univariate series under the two-speed schedule.
pub fn train_lfm(ts: &TimeSeries, config: &TrainConfig) -> Result<TrainReport, LfmError> {
    config.validate()?;
    if ts.n_channels() != 1 {
        return Err(LfmError::MultiChannelUnsupported {
            channels: ts.n_channels(),
        });
    }
    let init = init_params(ts, config)?;
    let k = config.k;

    // Flat state: amplitudes and phases share one Adam instance (and one
    // moment history), frequencies get their own.
    let mut ab: Vec<f64> = init.amps.iter().chain(&init.phases).cloned().collect();
    let mut fs: Vec<f64> = init.freqs.iter().map(|f| f.cycles_per_sample()).collect();
    let mut opt_ab = AdamState::new(2 * k, config.beta1, config.beta2, config.eps);
    let mut opt_f = AdamState::new(k, config.beta1, config.beta2, config.eps);

    let mut loss_history = Vec::with_capacity(config.steps);
    let mut freq_trajectory = Vec::new();
    let mut gab = vec![0.0; 2 * k];

    let eval = |ab: &[f64], fs: &[f64]| -> Result<(f64, LfmGrads), LfmError> {
        let freqs: Result<Vec<Frequency>, _> =
            fs.iter().map(|&f| Frequency::new(f)).collect();
        let params = LfmParams::new(
            ab[..k].to_vec(),
            ab[k..].to_vec(),
            freqs.map_err(|_| LfmError::NonFinite { step: 0 })?,
        )?;
        lfm_loss_and_grads(&params, ts)
    };

    for step in 0..config.steps {
        let (loss, grads) =
            eval(&ab, &fs).map_err(|e| relabel_nonfinite(e, step))?;
        loss_history.push(loss);
        if step % config.log_interval == 0 {
            freq_trajectory.push(fs.clone());
        }
        gab[..k].copy_from_slice(&grads.amps);
        gab[k..].copy_from_slice(&grads.phases);
        opt_ab.step(&mut ab, &gab, config.lr_main)?;
        opt_f.step(&mut fs, &grads.freqs, config.lr_freq)?;
    }
    freq_trajectory.push(fs.clone());

    let (final_loss, _) = eval(&ab, &fs).map_err(|e| relabel_nonfinite(e, config.steps))?;
    let freqs: Vec<Frequency> = fs
        .iter()
        .map(|&f| Frequency::new(f))
        .collect::<Result<_, CoreError>>()
        .map_err(|_| LfmError::NonFinite { step: config.steps })?;
    let params = LfmParams::new(ab[..k].to_vec(), ab[k..].to_vec(), freqs)?;

    Ok(TrainReport {
        init,
        params,
        loss_history,
        freq_trajectory,
        final_loss,
    })
}

fn relabel_nonfinite(e: LfmError, step: usize) -> LfmError {
    match e {
        LfmError::NonFinite { .. } => LfmError::NonFinite { step },
        other => other,
    }
}
