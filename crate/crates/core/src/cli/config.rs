//! JSON run configuration for `verify` and `spectrum`.
//!
//! ```json
//! {
//!   "units": { "hbar": 1.0, "k_boltzmann": 1.0 },
//!   "model": { "kind": "analytic_harmonic", "mass": 1.0, "omega0": 1.0 },
//!   "temperatures": { "log_range": { "t_min": 0.01, "t_max": 100.0, "count": 50 } },
//!   "tolerances": { "rel_tol": 1e-14, "max_iter": 200, "series_threshold": 1e-8 },
//!   "output": { "path": "out.csv", "format": "csv" }
//! }
//! ```
//!
//! `units`, `tolerances`, `omega_tolerance` and `output` are optional. Unknown
//! keys are rejected everywhere.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::models::{
    analytic_box_model, analytic_harmonic_model, grid_model, read_tabulated, GridSpec, ModelError, PotentialSpec,
    SpectralModel, UnitSystem, DEFAULT_LEVELS,
};
use crate::specfun::ToleranceConfig;
use crate::thermo::NEGLIGIBLE_WEIGHT;

use super::CliError;

/// Upper limit on automatically sized harmonic bases.
pub const MAX_AUTO_LEVELS: usize = 5_000_000;
/// Upper limit on the number of temperatures in one run.
pub const MAX_TEMPERATURES: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub units: UnitSystem,
    pub model: ModelConfig,
    pub temperatures: TemperatureSpec,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    /// Frequency clustering tolerance for the spectral measure; defaults to a
    /// fixed fraction of the spectral range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// Closed-form oscillator. Without `n_levels` the basis is sized so the top
    /// level's weight is negligible at the highest temperature.
    AnalyticHarmonic {
        mass: f64,
        omega0: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_levels: Option<usize>,
    },
    AnalyticBox {
        mass: f64,
        length: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_levels: Option<usize>,
    },
    Grid {
        mass: f64,
        grid: GridSpec,
        potential: PotentialConfig,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Harmonic {
        mass: f64,
        omega0: f64,
        #[serde(default)]
        center: f64,
    },
    Box {
        length: f64,
    },
    Polynomial {
        coefficients: Vec<f64>,
    },
    Tabulated {
        samples: Vec<(f64, f64)>,
    },
    /// Two-column text file; relative paths resolve against the config file.
    TabulatedFile {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TemperatureSpec {
    List(Vec<f64>),
    LogRange(LogRange),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogRange {
    pub t_min: f64,
    pub t_max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl TemperatureSpec {
    /// Expands to an explicit ascending list, validating along the way.
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let temps = match self {
            TemperatureSpec::List(list) => list.clone(),
            TemperatureSpec::LogRange(LogRange { t_min, t_max, count }) => {
                let (t_min, t_max, count) = (*t_min, *t_max, *count);
                if count == 0 {
                    return Err(CliError::Config("log_range count must be at least 1".into()));
                }
                if !(t_min > 0.0 && t_max >= t_min && t_max.is_finite()) {
                    return Err(CliError::Config(format!(
                        "log_range needs 0 < t_min <= t_max, got [{t_min}, {t_max}]"
                    )));
                }
                if count > MAX_TEMPERATURES {
                    return Err(CliError::Config(format!("at most {MAX_TEMPERATURES} temperatures")));
                }
                let (lo, hi) = (t_min.ln(), t_max.ln());
                (0..count)
                    .map(|i| match i {
                        0 => t_min,
                        i if i == count - 1 => t_max,
                        i => (lo + (hi - lo) * (i as f64 / (count - 1) as f64)).exp(),
                    })
                    .collect()
            }
        };
        if temps.is_empty() {
            return Err(CliError::Config("no temperatures given".into()));
        }
        if let Some(t) = temps.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(CliError::Config(format!("temperatures must be positive, got {t}")));
        }
        if temps.windows(2).any(|w| w[1] < w[0]) {
            return Err(CliError::Config("temperatures must be ascending".into()));
        }
        Ok(temps)
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    /// Reads a config file; tabulated potential paths are resolved relative to
    /// its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = Self::from_json(&text)?;
        if let ModelConfig::Grid {
            potential: PotentialConfig::TabulatedFile { path: table },
            ..
        } = &mut config.model
        {
            if table.is_relative() {
                if let Some(dir) = path.parent() {
                    *table = dir.join(&*table);
                }
            }
        }
        Ok(config)
    }

    /// Checks everything that can be checked without building the model.
    pub fn validate(&self) -> Result<Vec<f64>, CliError> {
        self.units.validate().map_err(config_error)?;
        self.tolerances
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(tol) = self.omega_tolerance {
            if !(tol.is_finite() && tol >= 0.0) {
                return Err(CliError::Config(format!(
                    "omega_tolerance must be nonnegative, got {tol}"
                )));
            }
        }
        self.temperatures.values()
    }

    /// Builds the spectral model for the given (validated) temperatures.
    pub fn build_model(&self, temperatures: &[f64]) -> Result<SpectralModel, CliError> {
        let units = &self.units;
        let model = match &self.model {
            ModelConfig::AnalyticHarmonic { mass, omega0, n_levels } => {
                let n = match n_levels {
                    Some(n) => *n,
                    None => {
                        let t_max = temperatures.iter().copied().fold(0.0, f64::max);
                        auto_harmonic_levels(*omega0, t_max, units)?
                    }
                };
                analytic_harmonic_model(*mass, *omega0, n, units)
            }
            ModelConfig::AnalyticBox { mass, length, n_levels } => {
                analytic_box_model(*mass, *length, n_levels.unwrap_or(DEFAULT_LEVELS), units)
            }
            ModelConfig::Grid { mass, grid, potential } => {
                let spec = potential.resolve()?;
                grid_model(grid, &spec, *mass, units)
            }
        };
        model.map_err(model_error)
    }
}

/// Smallest basis (at least the default) whose top level carries less than
/// `NEGLIGIBLE_WEIGHT` relative weight at `t_max`.
pub fn auto_harmonic_levels(omega0: f64, t_max: f64, units: &UnitSystem) -> Result<usize, CliError> {
    let x = units.hbar * omega0 / (units.k_boltzmann * t_max);
    if !(x.is_finite() && x > 0.0) {
        return Err(CliError::Config(format!(
            "cannot size the oscillator basis for omega0 = {omega0}, T = {t_max}"
        )));
    }
    let needed = (-NEGLIGIBLE_WEIGHT.ln() / x).ceil() + 2.0;
    if needed > MAX_AUTO_LEVELS as f64 {
        return Err(CliError::Config(format!(
            "T = {t_max} would need {needed:e} oscillator levels; give n_levels explicitly"
        )));
    }
    Ok((needed as usize).max(DEFAULT_LEVELS))
}

impl PotentialConfig {
    pub fn resolve(&self) -> Result<PotentialSpec, CliError> {
        Ok(match self {
            PotentialConfig::Harmonic { mass, omega0, center } => PotentialSpec::Harmonic {
                mass: *mass,
                omega0: *omega0,
                center: *center,
            },
            PotentialConfig::Box { length } => PotentialSpec::Box { length: *length },
            PotentialConfig::Polynomial { coefficients } => PotentialSpec::Polynomial {
                coefficients: coefficients.clone(),
            },
            PotentialConfig::Tabulated { samples } => PotentialSpec::Tabulated {
                samples: samples.clone(),
            },
            PotentialConfig::TabulatedFile { path } => PotentialSpec::Tabulated {
                samples: read_tabulated(path).map_err(config_error)?,
            },
        })
    }
}

fn config_error(e: ModelError) -> CliError {
    CliError::Config(e.to_string())
}

/// Eigensolver non-convergence is a numerical failure; everything else a
/// model constructor rejects is a configuration problem.
fn model_error(e: ModelError) -> CliError {
    match e {
        ModelError::Eigen(crate::models::EigenError::NoConvergence { .. }) => CliError::Convergence(e.to_string()),
        other => config_error(other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_example() {
        let text = r#"{
          "units": { "hbar": 1.0, "k_boltzmann": 1.0 },
          "model": { "kind": "analytic_harmonic", "mass": 1.0, "omega0": 1.0 },
          "temperatures": { "log_range": { "t_min": 0.01, "t_max": 100.0, "count": 50 } },
          "tolerances": { "rel_tol": 1e-14, "max_iter": 200, "series_threshold": 1e-8 },
          "output": { "path": "out.csv", "format": "csv" }
        }"#;
        let config = RunConfig::from_json(text).unwrap();
        let temps = config.validate().unwrap();
        assert_eq!(temps.len(), 50);
        assert_eq!(temps[0], 0.01);
        assert_eq!(temps[49], 100.0);
        assert!(temps.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = r#"{"model": {"kind": "analytic_box", "mass": 1, "length": 1, "colour": 3},
                       "temperatures": {"list": [1.0]}}"#;
        assert!(matches!(RunConfig::from_json(text), Err(CliError::Config(_))));
        let text = r#"{"model": {"kind": "analytic_box", "mass": 1, "length": 1},
                       "temperatures": {"list": [1.0]}, "extra": true}"#;
        assert!(matches!(RunConfig::from_json(text), Err(CliError::Config(_))));
    }

    #[test]
    fn temperature_validation() {
        let bad = [
            TemperatureSpec::List(vec![]),
            TemperatureSpec::List(vec![-1.0]),
            TemperatureSpec::List(vec![2.0, 1.0]),
            TemperatureSpec::LogRange(LogRange {
                t_min: 1.0,
                t_max: 2.0,
                count: 0,
            }),
            TemperatureSpec::LogRange(LogRange {
                t_min: 3.0,
                t_max: 2.0,
                count: 4,
            }),
        ];
        for spec in bad {
            assert!(spec.values().is_err(), "{spec:?}");
        }
        let single = TemperatureSpec::LogRange(LogRange {
            t_min: 2.0,
            t_max: 2.0,
            count: 1,
        });
        assert_eq!(single.values().unwrap(), vec![2.0]);
    }

    #[test]
    fn harmonic_levels_grow_with_temperature() {
        let u = UnitSystem::default();
        assert_eq!(auto_harmonic_levels(1.0, 1.0, &u).unwrap(), DEFAULT_LEVELS);
        let n = auto_harmonic_levels(1.0, 1000.0, &u).unwrap();
        assert!(n > 32_000 && n < 33_000);
        assert!(auto_harmonic_levels(1.0, 1e12, &u).is_err());
    }
}
