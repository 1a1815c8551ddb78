//! Python bindings for the frequency-extraction pipeline.
//!
//! The module mirrors the core crate's surface: build or synthesize a
//! [`TimeSeries`], run `extract` for coordinate-descent frequency recovery,
//! `fit` for two-speed gradient training, `hit_rate` for scoring, and
//! `benchmark_json` for the full initialization-vs-learning-rate grid.
//! Frequencies are in cycles per sample throughout.

use freqfit_core::bench::{
    generate_synthetic, hit_rate as core_hit_rate, run_benchmark, BenchConfig,
    forecast_extrapolate, SyntheticConfig,
};
use freqfit_core::extract::{extract_frequencies, ExtractionConfig, ExtractionReport};
use freqfit_core::lfm::{train_lfm, InitMode, TrainConfig, TrainReport};
use freqfit_core::series::standardize;
use freqfit_core::{Frequency, HarmonicModel, TimeSeries};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn frequencies(values: &[f64]) -> PyResult<Vec<Frequency>> {
    values.iter().map(|&f| Frequency::new(f).map_err(value_err)).collect()
}

/// A finite multichannel series, channel-major.
#[pyclass(name = "TimeSeries", module = "freqfit")]
#[derive(Clone)]
struct PyTimeSeries {
    inner: TimeSeries,
}

#[pymethods]
impl PyTimeSeries {
    #[new]
    #[pyo3(signature = (channels, names=None))]
    fn new(channels: Vec<Vec<f64>>, names: Option<Vec<String>>) -> PyResult<Self> {
        let mut ts = TimeSeries::from_channels(channels).map_err(value_err)?;
        if let Some(names) = names {
            ts = ts.with_names(names).map_err(value_err)?;
        }
        Ok(PyTimeSeries { inner: ts })
    }

    #[getter]
    fn t_len(&self) -> usize {
        self.inner.t_len()
    }

    #[getter]
    fn n_channels(&self) -> usize {
        self.inner.n_channels()
    }

    #[getter]
    fn names(&self) -> Option<Vec<String>> {
        self.inner.names().map(|n| n.to_vec())
    }

    fn channels(&self) -> Vec<Vec<f64>> {
        self.inner.channels().to_vec()
    }

    /// Per-channel z-scoring (population variance). Returns the scaled
    /// series plus the means and standard deviations needed to undo it.
    fn standardize(&self) -> PyResult<(PyTimeSeries, Vec<f64>, Vec<f64>)> {
        let (ts, params) = standardize(&self.inner).map_err(value_err)?;
        Ok((PyTimeSeries { inner: ts }, params.means, params.stds))
    }

    fn __len__(&self) -> usize {
        self.inner.t_len()
    }

    fn __repr__(&self) -> String {
        format!(
            "TimeSeries(n_channels={}, t_len={})",
            self.inner.n_channels(),
            self.inner.t_len()
        )
    }
}

/// A fitted sum of sinusoids shared across channels.
#[pyclass(name = "HarmonicModel", module = "freqfit")]
#[derive(Clone)]
struct PyHarmonicModel {
    inner: HarmonicModel,
}

#[pymethods]
impl PyHarmonicModel {
    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn n_channels(&self) -> usize {
        self.inner.n_channels()
    }

    /// Mode frequencies in cycles per sample.
    #[getter]
    fn freqs(&self) -> Vec<f64> {
        self.inner.freqs().iter().map(|f| f.cycles_per_sample()).collect()
    }

    /// Canonical per-channel `(amps, phases)` with non-negative amplitudes.
    fn amp_phase(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        self.inner.amp_phase()
    }

    /// Interleaved cosine/sine coefficients, one row per channel.
    fn coeffs(&self) -> Vec<Vec<f64>> {
        self.inner.coeffs().to_vec()
    }

    /// Model value of every channel at integer sample `t` (any `t`, also
    /// beyond the fitted window).
    fn evaluate_row(&self, t: usize) -> Vec<f64> {
        self.inner.evaluate_row(t)
    }

    fn reconstruct(&self, t_len: usize) -> PyResult<PyTimeSeries> {
        Ok(PyTimeSeries {
            inner: self.inner.reconstruct(t_len).map_err(value_err)?,
        })
    }

    /// Rows for `t = t_obs .. t_obs + horizon`, one value per channel.
    fn extrapolate(&self, t_obs: usize, horizon: usize) -> Vec<Vec<f64>> {
        forecast_extrapolate(&self.inner, t_obs, horizon)
    }

    fn __repr__(&self) -> String {
        format!(
            "HarmonicModel(k={}, n_channels={})",
            self.inner.k(),
            self.inner.n_channels()
        )
    }
}

/// Outcome of the coordinate-descent extraction.
#[pyclass(name = "ExtractionReport", module = "freqfit")]
struct PyExtractionReport {
    inner: ExtractionReport,
}

#[pymethods]
impl PyExtractionReport {
    #[getter]
    fn model(&self) -> PyHarmonicModel {
        PyHarmonicModel {
            inner: self.inner.model.clone(),
        }
    }

    /// Final grid bin of each mode.
    #[getter]
    fn bins(&self) -> Vec<usize> {
        self.inner.bins.clone()
    }

    /// Loss after initialization, then after each sweep.
    #[getter]
    fn e_history(&self) -> Vec<f64> {
        self.inner.e_history.clone()
    }

    #[getter]
    fn sweeps_used(&self) -> usize {
        self.inner.sweeps_used
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }

    fn __repr__(&self) -> String {
        format!(
            "ExtractionReport(bins={:?}, sweeps_used={}, converged={})",
            self.inner.bins, self.inner.sweeps_used, self.inner.converged
        )
    }
}

/// Outcome of two-speed gradient training.
#[pyclass(name = "FitReport", module = "freqfit")]
struct PyFitReport {
    inner: TrainReport,
}

#[pymethods]
impl PyFitReport {
    #[getter]
    fn init_freqs(&self) -> Vec<f64> {
        self.inner.init.freqs.iter().map(|f| f.cycles_per_sample()).collect()
    }

    #[getter]
    fn freqs(&self) -> Vec<f64> {
        self.inner.params.freqs.iter().map(|f| f.cycles_per_sample()).collect()
    }

    #[getter]
    fn amps(&self) -> Vec<f64> {
        self.inner.params.amps.clone()
    }

    #[getter]
    fn phases(&self) -> Vec<f64> {
        self.inner.params.phases.clone()
    }

    /// Loss before each step; length equals the number of steps.
    #[getter]
    fn loss_history(&self) -> Vec<f64> {
        self.inner.loss_history.clone()
    }

    /// Frequency snapshots every `log_interval` steps plus the final state.
    #[getter]
    fn freq_trajectory(&self) -> Vec<Vec<f64>> {
        self.inner.freq_trajectory.clone()
    }

    #[getter]
    fn final_loss(&self) -> f64 {
        self.inner.final_loss
    }

    fn __repr__(&self) -> String {
        format!(
            "FitReport(k={}, final_loss={:.6e})",
            self.inner.params.k(),
            self.inner.final_loss
        )
    }
}

/// Draws the default noisy benchmark signal: three low-band tones, two
/// high-band distractors, Gaussian noise, then standardization.
#[pyfunction]
#[pyo3(signature = (seed=0, t_len=512, noise_std=0.5))]
fn synth(seed: u64, t_len: usize, noise_std: f64) -> PyResult<PyTimeSeries> {
    let cfg = SyntheticConfig {
        t_len,
        noise_std,
        seed,
        ..SyntheticConfig::default()
    };
    Ok(PyTimeSeries {
        inner: generate_synthetic(&cfg).map_err(value_err)?,
    })
}

/// FFT-guided coordinate descent over `k` sinusoidal modes.
#[pyfunction]
#[pyo3(signature = (ts, k=5, max_sweeps=50, epsilon=None))]
fn extract(
    ts: &PyTimeSeries,
    k: usize,
    max_sweeps: usize,
    epsilon: Option<f64>,
) -> PyResult<PyExtractionReport> {
    let config = ExtractionConfig {
        max_sweeps,
        epsilon,
        ..ExtractionConfig::new(k)
    };
    Ok(PyExtractionReport {
        inner: extract_frequencies(&ts.inner, &config).map_err(value_err)?,
    })
}

/// Two-speed Adam training of the sinusoidal model on a univariate series.
#[pyfunction]
#[pyo3(signature = (ts, k=5, init="fft", lr_main=1e-3, lr_freq=1e-6, steps=2000, seed=0))]
#[allow(clippy::too_many_arguments)]
fn fit(
    ts: &PyTimeSeries,
    k: usize,
    init: &str,
    lr_main: f64,
    lr_freq: f64,
    steps: usize,
    seed: u64,
) -> PyResult<PyFitReport> {
    let init = match init {
        "fft" => InitMode::Fft,
        "random" => InitMode::Random,
        other => {
            return Err(value_err(format!(
                "init must be \"fft\" or \"random\", got \"{other}\""
            )))
        }
    };
    let config = TrainConfig {
        k,
        lr_main,
        lr_freq,
        steps,
        init,
        seed,
        ..TrainConfig::default()
    };
    Ok(PyFitReport {
        inner: train_lfm(&ts.inner, &config).map_err(value_err)?,
    })
}

/// Fraction of `truths` matched by some learned frequency strictly within
/// `delta` cycles per sample.
#[pyfunction]
#[pyo3(signature = (learned, truths, delta=0.005))]
fn hit_rate(learned: Vec<f64>, truths: Vec<f64>, delta: f64) -> PyResult<f64> {
    core_hit_rate(&frequencies(&learned)?, &frequencies(&truths)?, delta).map_err(value_err)
}

/// Runs the initialization-by-learning-rate benchmark grid and returns the
/// full report as a JSON string (same schema as the CLI `bench` subcommand).
#[pyfunction]
#[pyo3(signature = (n_seeds=10, master_seed=None, steps=2000))]
fn benchmark_json(n_seeds: usize, master_seed: Option<u64>, steps: usize) -> PyResult<String> {
    let mut cfg = BenchConfig {
        n_seeds,
        ..BenchConfig::default()
    };
    if let Some(seed) = master_seed {
        cfg.master_seed = seed;
    }
    cfg.train.steps = steps;
    let report = run_benchmark(&cfg).map_err(value_err)?;
    serde_json::to_string_pretty(&report).map_err(value_err)
}

#[pymodule]
fn freqfit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTimeSeries>()?;
    m.add_class::<PyHarmonicModel>()?;
    m.add_class::<PyExtractionReport>()?;
    m.add_class::<PyFitReport>()?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(hit_rate, m)?)?;
    m.add_function(wrap_pyfunction!(benchmark_json, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
