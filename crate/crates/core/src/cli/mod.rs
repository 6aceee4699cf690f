//! Command-line front end.
//!
//! Exit codes: 0 success, 2 a bound or identity check failed, 3 invalid input
//! or unwritable output, 4 numerical failure. Output files are only written
//! once every computation has finished, so a run that exits with 3 or 4 leaves
//! no partial file behind.

pub mod config;
pub mod report;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::specfun::{g, g_inverse, gamma_factor_with, w_with, DomainError, SpecfunError, ToleranceConfig};
use crate::spectral::{analyze, default_omega_tolerance, SpectralError};
use crate::thermo::{evaluate_bounds, thermal_state, ThermoError};

use config::{Format, RunConfig};
use report::{fmt_f64, Metadata, VerifyRow};

/// Largest row count accepted by `specfun --range` and `fig1`.
pub const MAX_ROWS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Violation(String),
    #[error("{0}")]
    Convergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Violation(_) => 2,
            CliError::Config(_) | CliError::Io(_) => 3,
            CliError::Convergence(_) => 4,
        }
    }
}

impl From<SpecfunError> for CliError {
    fn from(e: SpecfunError) -> Self {
        match e {
            SpecfunError::Domain(_) | SpecfunError::InvalidTolerance(_) => CliError::Config(e.to_string()),
            SpecfunError::NoConvergence { .. } => CliError::Convergence(e.to_string()),
        }
    }
}

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ThermoError> for CliError {
    fn from(e: ThermoError) -> Self {
        match e {
            ThermoError::InvalidTemperature(_)
            | ThermoError::InvalidBeta(_)
            | ThermoError::InvalidMass(_)
            | ThermoError::EmptySpectrum
            | ThermoError::UnsortedTemperatures { .. }
            | ThermoError::ZeroSpread => CliError::Config(e.to_string()),
            ThermoError::RecastMismatch(_) => CliError::Violation(e.to_string()),
            ThermoError::Specfun(inner) => inner.into(),
            _ => CliError::Convergence(e.to_string()),
        }
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::ZeroSpread | SpectralError::InvalidTolerance(_) => CliError::Config(e.to_string()),
            SpectralError::Unpaired { .. } | SpectralError::Normalization { .. } => CliError::Violation(e.to_string()),
            SpectralError::NonFinite(_) => CliError::Convergence(e.to_string()),
            SpectralError::Specfun(inner) => inner.into(),
            SpectralError::Thermo(inner) => inner.into(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "thermobound",
    version,
    about = "Thermal lower bounds on position-momentum uncertainty"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate g, its inverse, Gamma and w.
    Specfun(SpecfunArgs),
    /// Tabulate w(z) for plotting.
    Fig1(Fig1Args),
    /// Check the bounds and spectral identities over a temperature sweep.
    Verify(VerifyArgs),
    /// Dump the spectral measures at one temperature.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Args)]
pub struct SpecfunArgs {
    /// Comma-separated arguments.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required_unless_present = "range",
        conflicts_with = "range"
    )]
    pub x: Vec<f64>,
    /// `a:b:n` for n+1 evenly spaced points from a to b.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Fig1Args {
    #[arg(long, default_value_t = 50.0)]
    pub z_max: f64,
    #[arg(long, default_value_t = 501)]
    pub n_points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the path in the config's `output` section.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Leave the generation time out of the metadata, for reproducible files.
    #[arg(long)]
    pub no_timestamp: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Defaults to the first temperature in the config.
    #[arg(long, allow_negative_numbers = true)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub no_timestamp: bool,
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 3 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Run a parsed command. `Ok` carries 0 or 2; hard failures are `Err`.
pub fn execute(command: &Command) -> Result<i32, CliError> {
    match command {
        Command::Specfun(args) => {
            let xs = match &args.range {
                Some(spec) => parse_range(spec)?,
                None => args.x.clone(),
            };
            let text = specfun_table(&xs, &ToleranceConfig::default())?;
            emit(args.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Fig1(args) => {
            let text = fig1_table(args.z_max, args.n_points, &ToleranceConfig::default())?;
            emit(args.out.as_deref(), &text)?;
            Ok(0)
        }
        Command::Verify(args) => verify(args),
        Command::Spectrum(args) => spectrum(args),
    }
}

fn parse_range(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("range must look like a:b:n, got {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(bad());
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if !(a.is_finite() && b.is_finite()) || n == 0 || n >= MAX_ROWS {
        return Err(bad());
    }
    Ok((0..=n)
        .map(|i| if i == n { b } else { a + (b - a) * (i as f64 / n as f64) })
        .collect())
}

/// Rows `x, g, g_inverse, gamma, w`. `gamma` at zero is printed as `inf`.
pub fn specfun_table(xs: &[f64], tol: &ToleranceConfig) -> Result<String, CliError> {
    let mut out = String::from("x,g,g_inverse,gamma,w\n");
    for &x in xs {
        if !(x >= 0.0 && x.is_finite()) {
            return Err(CliError::Config(format!(
                "arguments must be nonnegative and finite, got {x}"
            )));
        }
        let gamma = if x == 0.0 {
            f64::INFINITY
        } else {
            gamma_factor_with(x, tol)?
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(x),
            fmt_f64(g(x)?),
            fmt_f64(g_inverse(x, tol)?),
            fmt_f64(gamma),
            fmt_f64(w_with(x, tol)?)
        );
    }
    Ok(out)
}

/// Rows `z, w` on `n_points` evenly spaced z in [0, z_max]. The grid point
/// `i` is `z_max * (i / (n_points - 1))`, so grids whose interval counts
/// divide one another share values bit for bit.
pub fn fig1_table(z_max: f64, n_points: usize, tol: &ToleranceConfig) -> Result<String, CliError> {
    if !(z_max > 0.0 && z_max.is_finite()) {
        return Err(CliError::Config(format!(
            "z_max must be positive and finite, got {z_max}"
        )));
    }
    if !(2..=MAX_ROWS).contains(&n_points) {
        return Err(CliError::Config(format!(
            "n_points must be in [2, {MAX_ROWS}], got {n_points}"
        )));
    }
    let mut out = String::from("z,w\n");
    let last = n_points - 1;
    for i in 0..n_points {
        let z = z_max * (i as f64 / last as f64);
        let _ = writeln!(out, "{},{}", fmt_f64(z), fmt_f64(w_with(z, tol)?));
    }
    Ok(out)
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}")))
        }
    }
}

fn resolve_output(config: &RunConfig, out: &Option<PathBuf>, format: Option<Format>) -> (Option<PathBuf>, Format) {
    let section = config.output.as_ref();
    let path = out.clone().or_else(|| section.and_then(|o| o.path.clone()));
    let format = format.or_else(|| section.and_then(|o| o.format)).unwrap_or_else(|| {
        match path.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::Csv,
        }
    });
    (path, format)
}

/// Fail early on an output directory that does not exist, before any
/// expensive work.
fn check_output_dir(path: Option<&Path>) -> Result<(), CliError> {
    if let Some(p) = path {
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty());
        if let Some(dir) = parent {
            if !dir.is_dir() {
                return Err(CliError::Io(format!(
                    "output directory {} does not exist",
                    dir.display()
                )));
            }
        }
    }
    Ok(())
}

fn verify(args: &VerifyArgs) -> Result<i32, CliError> {
    let config = RunConfig::load(&args.config)?;
    let temperatures = config.validate()?;
    let (path, format) = resolve_output(&config, &args.out, args.format);
    check_output_dir(path.as_deref())?;
    let model = config.build_model(&temperatures)?;
    let tol_omega = config
        .omega_tolerance
        .unwrap_or_else(|| default_omega_tolerance(&model));
    let mut rows = Vec::with_capacity(temperatures.len());
    for &t in &temperatures {
        let (weights, stats) = thermal_state(&model, t)?;
        let bounds = evaluate_bounds(&stats, &config.tolerances)?;
        let analysis = analyze(&model, &weights, Some(tol_omega), &config.tolerances)?;
        let row = VerifyRow::new(&model, &stats, &bounds, &analysis);
        log::debug!("T = {t}: {}", row.flags_field());
        rows.push(row);
    }
    let meta = Metadata::new("verify", &config, &model, tol_omega, !args.no_timestamp);
    let text = match format {
        Format::Csv => report::verify_csv(&meta, &rows),
        Format::Json => report::verify_json(&meta, &rows),
    };
    emit(path.as_deref(), &text)?;
    let failing: Vec<String> = rows
        .iter()
        .filter(|r| !r.passes())
        .map(|r| format!("T = {}: {}", r.temperature, r.flags_field()))
        .collect();
    if failing.is_empty() {
        Ok(0)
    } else {
        for line in &failing {
            eprintln!("check failed at {line}");
        }
        Ok(2)
    }
}

fn spectrum(args: &SpectrumArgs) -> Result<i32, CliError> {
    let config = RunConfig::load(&args.config)?;
    let mut temperatures = config.validate()?;
    if let Some(t) = args.temperature {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!(
                "temperature must be positive and finite, got {t}"
            )));
        }
        temperatures = vec![t];
    }
    let t = temperatures[0];
    let (path, format) = resolve_output(&config, &args.out, args.format);
    check_output_dir(path.as_deref())?;
    let model = config.build_model(&temperatures)?;
    let tol_omega = config
        .omega_tolerance
        .unwrap_or_else(|| default_omega_tolerance(&model));
    let (weights, _) = thermal_state(&model, t)?;
    let analysis = analyze(&model, &weights, Some(tol_omega), &config.tolerances)?;
    let rows = report::spectrum_rows(&analysis);
    let summary = report::spectrum_summary(t, &analysis);
    let meta = Metadata::new("spectrum", &config, &model, tol_omega, !args.no_timestamp);
    let text = match format {
        Format::Csv => report::spectrum_csv(&meta, &rows, &summary),
        Format::Json => report::spectrum_json(&meta, &rows, &summary),
    };
    emit(path.as_deref(), &text)?;
    Ok(0)
}
