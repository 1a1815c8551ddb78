//! Command-line layer: argument parsing, subcommand drivers, JSON reports.
//!
//! Exit codes: 0 on success, 1 for data or numeric failures, 2 for usage
//! errors. Failures print a single machine-parsable line to stderr of the
//! form `error[Tag] message`. Informational notices (like a generated seed)
//! also go to stderr so stdout stays clean when a JSON report streams there.

pub mod csv_io;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use csv_io::{load_csv, write_csv, CsvError};
use freqfit_core::bench::{
    forecast_extrapolate, forecast_metrics, run_benchmark, BenchConfig, BenchError,
    SyntheticConfig,
};
use freqfit_core::extract::{extract_frequencies, ExtractError, ExtractionConfig};
use freqfit_core::lfm::{train_lfm, InitMode, LfmError, TrainConfig, TrainReport};
use freqfit_core::series::{standardize, CoreError, Standardization};
use freqfit_core::{dsp, TimeSeries};
use serde::Serialize;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "freqfit",
    version,
    about = "Dominant-frequency extraction, sinusoidal model fitting and harmonic forecasting"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum InitArg {
    Fft,
    Random,
}

impl From<InitArg> for InitMode {
    fn from(v: InitArg) -> Self {
        match v {
            InitArg::Fft => InitMode::Fft,
            InitArg::Random => InitMode::Random,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic multi-tone benchmark signal as CSV
    Synth {
        /// Output CSV path
        #[arg(long)]
        out: PathBuf,
        /// RNG seed; omitted = drawn from the OS and reported on stderr
        #[arg(long)]
        seed: Option<u64>,
        /// Number of samples
        #[arg(long, default_value_t = 512)]
        t_len: usize,
        /// Gaussian noise standard deviation
        #[arg(long, default_value_t = 0.5)]
        noise_std: f64,
    },
    /// Extract dominant frequencies from a CSV time series
    Extract {
        /// Input CSV path
        input: PathBuf,
        /// Number of modes
        #[arg(short, long, default_value_t = 5)]
        k: usize,
        /// Maximum coordinate-descent sweeps
        #[arg(long, default_value_t = 50)]
        max_sweeps: usize,
        /// Report path; omitted = print JSON to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the sinusoidal model with the two-speed Adam schedule
    Fit {
        /// Input CSV path (single data column)
        input: PathBuf,
        #[arg(short, long, default_value_t = 5)]
        k: usize,
        /// Parameter initialization strategy
        #[arg(long, value_enum, default_value_t = InitArg::Fft)]
        init: InitArg,
        /// Learning rate for amplitudes and phases
        #[arg(long, default_value_t = 1e-3)]
        lr_main: f64,
        /// Learning rate for frequencies (0 freezes them)
        #[arg(long, default_value_t = 1e-6)]
        lr_freq: f64,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        /// Seed for random init; omitted = drawn from the OS and reported
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the init-strategy x frequency-learning-rate benchmark grid
    Bench {
        /// Independent runs per grid cell
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        /// Master seed; omitted = drawn from the OS and reported
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        #[arg(short, long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 512)]
        t_len: usize,
        /// Hit tolerance in cycles per sample
        #[arg(long, default_value_t = 0.005)]
        delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hold out the last rows of a CSV and score harmonic extrapolation
    Forecast {
        /// Input CSV path
        input: PathBuf,
        #[arg(short, long, default_value_t = 5)]
        k: usize,
        /// Number of held-out rows to forecast
        #[arg(long, default_value_t = 96)]
        horizon: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Csv(#[from] CsvError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Lfm(#[from] LfmError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{message}")]
    Custom { tag: &'static str, message: String },
}

fn core_tag(e: &CoreError) -> &'static str {
    match e {
        CoreError::ConstantChannel { .. } => "ConstantChannel",
        CoreError::ShapeMismatch { .. } => "ShapeMismatch",
        CoreError::NonFinite { .. } => "NonFinite",
        CoreError::TooShort { .. } => "TooShort",
        CoreError::NoChannels => "NoChannels",
        CoreError::InvalidFrequency { .. } => "InvalidFrequency",
    }
}

fn extract_tag(e: &ExtractError) -> &'static str {
    match e {
        ExtractError::Dsp(dsp::DspError::NotEnoughBins { .. }) => "NotEnoughBins",
        ExtractError::IllConditioned { .. } => "IllConditioned",
        ExtractError::NotInteriorBin { .. } => "NotInteriorBin",
        ExtractError::IndexOutOfRange { .. } => "IndexOutOfRange",
        ExtractError::ShapeMismatch { .. } => "ShapeMismatch",
        ExtractError::InvalidConfig { .. } => "InvalidConfig",
    }
}

fn lfm_tag(e: &LfmError) -> &'static str {
    match e {
        LfmError::MultiChannelUnsupported { .. } => "MultiChannelUnsupported",
        LfmError::Extract(inner) => extract_tag(inner),
        LfmError::ShapeMismatch { .. } => "ShapeMismatch",
        LfmError::InvalidConfig { .. } => "InvalidConfig",
        LfmError::NonFinite { .. } => "NonFinite",
    }
}

fn bench_tag(e: &BenchError) -> &'static str {
    match e {
        BenchError::EmptyTruths => "EmptyTruths",
        BenchError::InvalidDelta { .. } => "InvalidDelta",
        BenchError::InvalidConfig { .. } => "InvalidConfig",
        BenchError::ShapeMismatch { .. } => "ShapeMismatch",
        BenchError::Core(inner) => core_tag(inner),
        BenchError::Lfm(inner) => lfm_tag(inner),
    }
}

fn csv_tag(e: &CsvError) -> &'static str {
    match e {
        CsvError::ParseError { .. } => "ParseError",
        CsvError::RaggedRows { .. } => "RaggedRows",
        CsvError::NonNumericCell { .. } => "NonNumericCell",
        CsvError::TooShort { .. } => "TooShort",
        CsvError::NoColumns => "NoColumns",
        CsvError::Core(inner) => core_tag(inner),
        CsvError::Io(_) => "Io",
    }
}

impl CliError {
    fn tag(&self) -> &'static str {
        match self {
            CliError::Csv(e) => csv_tag(e),
            CliError::Core(e) => core_tag(e),
            CliError::Extract(e) => extract_tag(e),
            CliError::Lfm(e) => lfm_tag(e),
            CliError::Bench(e) => bench_tag(e),
            CliError::Io(_) => "Io",
            CliError::Custom { tag, .. } => tag,
        }
    }
}

/// Parses and runs a full command line (including the program name) and
/// returns the process exit code.
pub fn run_command<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error[{}] {}", err.tag(), err);
            1
        }
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    match seed {
        Some(s) => s,
        None => {
            let s: u64 = rand::random();
            eprintln!("seed: {s} (generated; pass --seed {s} to reproduce)");
            s
        }
    }
}

fn emit_report<S: Serialize>(report: &S, out: Option<&Path>) -> Result<(), CliError> {
    let mut json = serde_json::to_string_pretty(report).expect("report serialization");
    json.push('\n');
    match out {
        Some(path) => {
            std::fs::write(path, json)?;
            eprintln!("report written to {}", path.display());
        }
        None => print!("{json}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// report schemas

#[derive(Serialize)]
struct StandardizationJson {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl From<&Standardization> for StandardizationJson {
    fn from(p: &Standardization) -> Self {
        StandardizationJson {
            means: p.means.clone(),
            stds: p.stds.clone(),
        }
    }
}

#[derive(Serialize)]
struct ModelJson {
    k: usize,
    freqs_cycles_per_sample: Vec<f64>,
    /// Canonical non-negative amplitudes, one row per channel.
    amps: Vec<Vec<f64>>,
    phases_rad: Vec<Vec<f64>>,
    recon_loss: f64,
    sweeps: usize,
    converged: bool,
}

impl ModelJson {
    fn new(report: &freqfit_core::extract::ExtractionReport) -> Self {
        let (amps, phases_rad) = report.model.amp_phase();
        ModelJson {
            k: report.model.k(),
            freqs_cycles_per_sample: report
                .model
                .freqs()
                .iter()
                .map(|f| f.cycles_per_sample())
                .collect(),
            amps,
            phases_rad,
            recon_loss: *report.e_history.last().expect("non-empty history"),
            sweeps: report.sweeps_used,
            converged: report.converged,
        }
    }
}

#[derive(Serialize)]
struct ExtractReportJson {
    config: ExtractConfigJson,
    channels: Vec<String>,
    standardization: StandardizationJson,
    #[serde(flatten)]
    model: ModelJson,
    bins: Vec<usize>,
    e_history: Vec<f64>,
}

#[derive(Serialize)]
struct ExtractConfigJson {
    input: String,
    k: usize,
    max_sweeps: usize,
}

#[derive(Serialize)]
struct SynthStdoutJson {
    seed: u64,
    t_len: usize,
    noise_std: f64,
    f_low: Vec<f64>,
    f_high: Vec<f64>,
    amp_low: Vec<f64>,
    amp_high: Vec<f64>,
    out: String,
}

#[derive(Serialize)]
struct ParamsJson {
    freqs_cycles_per_sample: Vec<f64>,
    amps: Vec<f64>,
    phases_rad: Vec<f64>,
}

impl ParamsJson {
    fn new(p: &freqfit_core::lfm::LfmParams) -> Self {
        ParamsJson {
            freqs_cycles_per_sample: p.freqs.iter().map(|f| f.cycles_per_sample()).collect(),
            amps: p.amps.clone(),
            phases_rad: p.phases.clone(),
        }
    }
}

#[derive(Serialize)]
struct FitReportJson {
    config: FitConfigJson,
    standardization: StandardizationJson,
    init: ParamsJson,
    #[serde(rename = "final")]
    final_params: ParamsJson,
    final_loss: f64,
    loss_history: Vec<f64>,
    freq_trajectory: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct FitConfigJson {
    input: String,
    k: usize,
    init: InitMode,
    lr_main: f64,
    lr_freq: f64,
    steps: usize,
    seed: u64,
}

#[derive(Serialize)]
struct ForecastReportJson {
    config: ForecastConfigJson,
    channels: Vec<String>,
    t_obs: usize,
    #[serde(flatten)]
    model: ModelJson,
    mse: f64,
    mae: f64,
    baseline_mse: f64,
    baseline_mae: f64,
    /// Forecast rows in original units, one value per channel.
    predictions: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct ForecastConfigJson {
    input: String,
    k: usize,
    horizon: usize,
}

// ---------------------------------------------------------------------------
// subcommand drivers

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Synth {
            out,
            seed,
            t_len,
            noise_std,
        } => cmd_synth(&out, seed, t_len, noise_std),
        Command::Extract {
            input,
            k,
            max_sweeps,
            out,
        } => cmd_extract(&input, k, max_sweeps, out.as_deref()),
        Command::Fit {
            input,
            k,
            init,
            lr_main,
            lr_freq,
            steps,
            seed,
            out,
        } => cmd_fit(&input, k, init, lr_main, lr_freq, steps, seed, out.as_deref()),
        Command::Bench {
            seeds,
            seed,
            steps,
            k,
            t_len,
            delta,
            out,
        } => cmd_bench(seeds, seed, steps, k, t_len, delta, out.as_deref()),
        Command::Forecast {
            input,
            k,
            horizon,
            out,
        } => cmd_forecast(&input, k, horizon, out.as_deref()),
    }
}

fn cmd_synth(out: &Path, seed: Option<u64>, t_len: usize, noise_std: f64) -> Result<(), CliError> {
    let seed = resolve_seed(seed);
    let cfg = SyntheticConfig {
        t_len,
        noise_std,
        seed,
        ..Default::default()
    };
    let ts = freqfit_core::bench::generate_synthetic(&cfg)?;
    let ts = ts.with_names(vec!["y".to_string()])?;
    write_csv(out, &ts)?;
    let stdout_json = SynthStdoutJson {
        seed,
        t_len,
        noise_std,
        f_low: cfg.f_low.clone(),
        f_high: cfg.f_high.clone(),
        amp_low: cfg.amp_low.clone(),
        amp_high: cfg.amp_high.clone(),
        out: out.display().to_string(),
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&stdout_json).expect("config serialization")
    );
    Ok(())
}

fn load_and_standardize(input: &Path) -> Result<(TimeSeries, Standardization), CliError> {
    let raw = load_csv(input)?;
    let (z, params) = standardize(&raw)?;
    Ok((z, params))
}

fn cmd_extract(
    input: &Path,
    k: usize,
    max_sweeps: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (z, std_params) = load_and_standardize(input)?;
    let cfg = ExtractionConfig {
        k,
        max_sweeps,
        ..Default::default()
    };
    let report = extract_frequencies(&z, &cfg)?;
    let names = channel_names(&z);
    let json = ExtractReportJson {
        config: ExtractConfigJson {
            input: input.display().to_string(),
            k,
            max_sweeps,
        },
        channels: names,
        standardization: (&std_params).into(),
        model: ModelJson::new(&report),
        bins: report.bins.clone(),
        e_history: report.e_history.clone(),
    };
    emit_report(&json, out)
}

fn channel_names(ts: &TimeSeries) -> Vec<String> {
    match ts.names() {
        Some(n) => n.to_vec(),
        None => (0..ts.n_channels()).map(|c| format!("c{c}")).collect(),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    input: &Path,
    k: usize,
    init: InitArg,
    lr_main: f64,
    lr_freq: f64,
    steps: usize,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let (z, std_params) = load_and_standardize(input)?;
    let seed = resolve_seed(seed);
    let cfg = TrainConfig {
        k,
        lr_main,
        lr_freq,
        steps,
        init: init.into(),
        seed,
        ..Default::default()
    };
    let report: TrainReport = train_lfm(&z, &cfg)?;
    let json = FitReportJson {
        config: FitConfigJson {
            input: input.display().to_string(),
            k,
            init: init.into(),
            lr_main,
            lr_freq,
            steps,
            seed,
        },
        standardization: (&std_params).into(),
        init: ParamsJson::new(&report.init),
        final_params: ParamsJson::new(&report.params),
        final_loss: report.final_loss,
        loss_history: report.loss_history.clone(),
        freq_trajectory: report.freq_trajectory.clone(),
    };
    emit_report(&json, out)
}

fn cmd_bench(
    seeds: usize,
    seed: Option<u64>,
    steps: usize,
    k: usize,
    t_len: usize,
    delta: f64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let master_seed = resolve_seed(seed);
    let cfg = BenchConfig {
        n_seeds: seeds,
        master_seed,
        delta,
        synth: SyntheticConfig {
            t_len,
            ..Default::default()
        },
        train: TrainConfig {
            k,
            steps,
            ..Default::default()
        },
        ..Default::default()
    };
    let report = run_benchmark(&cfg)?;
    for agg in &report.aggregates {
        eprintln!(
            "{:?} lr_freq={:.0e}: mean P_hit = {:.3} (std {:.3})",
            agg.init, agg.lr_freq, agg.mean_p_hit, agg.std_p_hit
        );
    }
    emit_report(&report, out)
}

fn cmd_forecast(
    input: &Path,
    k: usize,
    horizon: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    if horizon == 0 {
        return Err(CliError::Custom {
            tag: "InvalidConfig",
            message: "horizon must be at least 1".into(),
        });
    }
    let raw = load_csv(input)?;
    let t_total = raw.t_len();
    if t_total < horizon + 2 {
        return Err(CliError::Custom {
            tag: "TooShort",
            message: format!(
                "need at least {} rows for horizon {horizon}, got {t_total}",
                horizon + 2
            ),
        });
    }
    let t_obs = t_total - horizon;
    let head = TimeSeries::from_channels(
        raw.channels()
            .iter()
            .map(|ch| ch[..t_obs].to_vec())
            .collect(),
    )?;
    let (z, std_params) = standardize(&head)?;
    let report = extract_frequencies(&z, &ExtractionConfig::new(k))?;

    // Extrapolate in standardized units, then map back per channel.
    let pred_std = forecast_extrapolate(&report.model, t_obs, horizon);
    let predictions: Vec<Vec<f64>> = pred_std
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(l, v)| v * std_params.stds[l] + std_params.means[l])
                .collect()
        })
        .collect();
    let actual: Vec<Vec<f64>> = (t_obs..t_total).map(|t| raw.row(t)).collect();
    let metrics = forecast_metrics(&predictions, &actual)?;
    // Baseline: per-channel mean of the observed head.
    let baseline_row: Vec<f64> = std_params.means.clone();
    let baseline_rows: Vec<Vec<f64>> = vec![baseline_row; horizon];
    let baseline = forecast_metrics(&baseline_rows, &actual)?;

    let json = ForecastReportJson {
        config: ForecastConfigJson {
            input: input.display().to_string(),
            k,
            horizon,
        },
        channels: channel_names(&raw),
        t_obs,
        model: ModelJson::new(&report),
        mse: metrics.mse,
        mae: metrics.mae,
        baseline_mse: baseline.mse,
        baseline_mae: baseline.mae,
        predictions,
    };
    emit_report(&json, out)
}
