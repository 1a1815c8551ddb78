//! Dominant-frequency extraction and harmonic forecasting for uniformly
//! sampled time series.
//!
//! The crate is organized around a small pipeline:
//!
//! 1. [`dsp`] — power spectra and peak picking on the DFT grid.
//! 2. [`extract`] — coordinate descent over sinusoidal modes: each mode's
//!    frequency is moved to the spectral peak of the partial residual, with a
//!    global least-squares refit of all amplitudes after every move.
//! 3. [`lfm`] — a trainable linear model over a sinusoidal feature embedding,
//!    with a two-speed Adam schedule (fast amplitudes/phases, slow or frozen
//!    frequencies).
//! 4. [`bench`] — synthetic multi-tone generator, frequency-recovery scoring
//!    and the init-strategy benchmark grid, plus harmonic extrapolation.
//!
//! All frequencies are expressed in **cycles per sample** and wrapped in the
//! [`series::Frequency`] newtype; a sinusoid with frequency `f`, amplitude `a`
//! and phase `b` takes the value `a * cos(2*pi*f*t + b)` at integer sample
//! index `t`, counting from `t = 0`.

pub mod bench;
pub mod dsp;
pub mod extract;
pub mod lfm;
pub mod series;

pub use series::{Frequency, HarmonicModel, Spectrum, Standardization, TimeSeries};
