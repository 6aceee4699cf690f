//! Thermal (Boltzmann-state) statistics and the three uncertainty bounds.
//!
//! For a state `rho ~ exp(-beta H)` this module computes `Delta x`, two
//! flavours of `Delta p`, the thermal de Broglie wavelength `lambda_th`, the
//! ratio `r = Delta x / lambda_th`, `z = 1 / (4 pi r^2)`, and then checks
//!
//! * Heisenberg: `Delta x Delta p >= hbar/2`,
//! * Boltzmann: `Delta x Delta p >= (hbar/2) Gamma(z)`,
//! * momentum: `Delta p >= sqrt(2 pi) hbar / lambda_th = sqrt(m k_B T)`.
//!
//! `Delta p` is computed twice. The kinetic value uses
//! `<p^2> = 2m (<H> - <V>)`; the current value uses the matrix elements of
//! `p = (m / i hbar) [x, H]`. They agree for exact models and differ at
//! `O(d^2)` on a finite-difference grid, where the current form is the one
//! consistent with the spectral identities.

use serde::Serialize;
use thiserror::Error;

use crate::models::{ModelError, SpectralModel, UnitSystem};
use crate::numerics::CompensatedSum;
use crate::specfun::{gamma_factor_with, w_with, SpecfunError, ToleranceConfig};

/// A top-level weight above this means the retained spectrum is too short for
/// the temperature.
pub const TRUNCATION_WARNING: f64 = 1e-10;
/// Boltzmann weights below this are negligible; used to size truncated bases.
pub const NEGLIGIBLE_WEIGHT: f64 = 1e-14;
/// A bound holds when `lhs / rhs >= 1 - BOUND_REL_TOL`.
pub const BOUND_REL_TOL: f64 = 1e-9;
/// Allowed relative mismatch between the two algebraic forms of the bound.
pub const RECAST_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThermoError {
    #[error("temperature must be positive and finite, got {0}")]
    InvalidTemperature(f64),
    #[error("beta must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error("mass must be positive and finite, got {0}")]
    InvalidMass(f64),
    #[error("empty spectrum")]
    EmptySpectrum,
    #[error("energies must be ascending")]
    UnsortedEnergies,
    #[error("{weights} weights for a model with {levels} levels")]
    WeightMismatch { weights: usize, levels: usize },
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("temperatures must be ascending, got {previous} before {next}")]
    UnsortedTemperatures { previous: f64, next: f64 },
    #[error("zero position spread: the state has no position fluctuations")]
    ZeroSpread,
    #[error("recast bound inconsistent: relative residual {0:e}")]
    RecastMismatch(f64),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Normalized Boltzmann probabilities of a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct BoltzmannWeights {
    pub beta: f64,
    pub probabilities: Vec<f64>,
    /// `sum_n exp(-beta (E_n - E_0))`, the partition function with the ground
    /// energy shifted to zero.
    pub partition_z: f64,
    /// Probability of the highest retained level.
    pub top_weight: f64,
}

impl BoltzmannWeights {
    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// True when the spectrum is too short for this temperature.
    pub fn truncated(&self) -> bool {
        self.top_weight > TRUNCATION_WARNING
    }
}

pub fn boltzmann_weights(energies: &[f64], beta: f64) -> Result<BoltzmannWeights, ThermoError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(ThermoError::InvalidBeta(beta));
    }
    let e0 = *energies.first().ok_or(ThermoError::EmptySpectrum)?;
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(ThermoError::NonFinite("energy"));
    }
    if energies.windows(2).any(|w| w[1] < w[0]) {
        return Err(ThermoError::UnsortedEnergies);
    }
    let unnormalized: Vec<f64> = energies.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let partition_z = unnormalized.iter().copied().collect::<CompensatedSum>().value();
    if !partition_z.is_finite() {
        return Err(ThermoError::NonFinite("partition function"));
    }
    let probabilities: Vec<f64> = unnormalized.iter().map(|u| u / partition_z).collect();
    let top_weight = *probabilities.last().expect("nonempty");
    Ok(BoltzmannWeights {
        beta,
        probabilities,
        partition_z,
        top_weight,
    })
}

/// Position and momentum spreads of a thermal state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalMoments {
    pub mean_x: f64,
    pub delta_x: f64,
    pub delta_p_kinetic: f64,
    pub delta_p_current: f64,
    /// Weighted relative gap between `<n|x^2|n>` and the truncated completeness
    /// sum `sum_m |x_nm|^2`, when the model supplies `<n|x^2|n>`.
    pub completeness_deficit: Option<f64>,
}

pub fn thermal_moments(model: &SpectralModel, weights: &BoltzmannWeights) -> Result<ThermalMoments, ThermoError> {
    let n_levels = model.n_levels();
    if weights.len() != n_levels {
        return Err(ThermoError::WeightMismatch {
            weights: weights.len(),
            levels: n_levels,
        });
    }
    let p = &weights.probabilities;
    let x = &model.x_elements;
    let populated = || (0..n_levels).filter(|&n| p[n] > 0.0);

    let mean_x = populated()
        .map(|n| p[n] * x.get(n, n))
        .collect::<CompensatedSum>()
        .value();

    let mut var_x = CompensatedSum::new();
    let mut var_p_current = CompensatedSum::new();
    let mut kinetic = CompensatedSum::new();
    let mut x2_model = CompensatedSum::new();
    let mut x2_basis = CompensatedSum::new();
    let mass = model.mass;
    for n in populated() {
        let mut spread = CompensatedSum::new();
        let mut current = CompensatedSum::new();
        let mut row_norm = CompensatedSum::new();
        for (m, xnm) in x.row(n) {
            row_norm.add(xnm * xnm);
            if m == n {
                let d = xnm - mean_x;
                spread.add(d * d);
            } else {
                spread.add(xnm * xnm);
                let a = mass * model.transition_frequency(n, m) * xnm;
                current.add(a * a);
            }
        }
        var_x.add(p[n] * spread.value());
        var_p_current.add(p[n] * current.value());
        kinetic.add(p[n] * (model.energies[n] - model.v_diagonal[n]));
        if let Some(x2) = &model.x2_diagonal {
            x2_model.add(p[n] * x2[n]);
            x2_basis.add(p[n] * row_norm.value());
        }
    }
    let var_p_kinetic = 2.0 * mass * kinetic.value();
    let (var_x, var_p_current) = (var_x.value(), var_p_current.value());
    if !(var_x.is_finite() && var_p_current.is_finite() && var_p_kinetic.is_finite()) {
        return Err(ThermoError::NonFinite("thermal moment"));
    }
    if var_x <= 0.0 {
        return Err(ThermoError::ZeroSpread);
    }
    let completeness_deficit = model
        .x2_diagonal
        .as_ref()
        .map(|_| (x2_model.value() - x2_basis.value()) / x2_model.value());
    Ok(ThermalMoments {
        mean_x,
        delta_x: var_x.sqrt(),
        delta_p_kinetic: var_p_kinetic.max(0.0).sqrt(),
        delta_p_current: var_p_current.sqrt(),
        completeness_deficit,
    })
}

fn check_temperature(temperature: f64) -> Result<(), ThermoError> {
    if temperature.is_finite() && temperature > 0.0 {
        Ok(())
    } else {
        Err(ThermoError::InvalidTemperature(temperature))
    }
}

/// `lambda_th = sqrt(2 pi hbar^2 / (m k_B T))`.
pub fn thermal_wavelength(mass: f64, temperature: f64, units: &UnitSystem) -> Result<f64, ThermoError> {
    units.validate()?;
    check_temperature(temperature)?;
    if !(mass.is_finite() && mass > 0.0) {
        return Err(ThermoError::InvalidMass(mass));
    }
    let hbar = units.hbar;
    Ok((2.0 * std::f64::consts::PI * hbar * hbar / (mass * units.k_boltzmann * temperature)).sqrt())
}

/// Everything the bounds need about one thermal state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermalStatistics {
    pub units: UnitSystem,
    pub mass: f64,
    pub temperature: f64,
    pub beta: f64,
    pub partition_z: f64,
    pub mean_x: f64,
    pub delta_x: f64,
    pub delta_p_kinetic: f64,
    pub delta_p_current: f64,
    pub lambda_th: f64,
    /// `r = Delta x / lambda_th`.
    pub ratio_r: f64,
    /// `z = 1 / (4 pi r^2)`.
    pub z_arg: f64,
    /// `p_th = 2 pi hbar / lambda_th`.
    pub p_th: f64,
    pub top_weight: f64,
    pub truncated: bool,
    pub completeness_deficit: Option<f64>,
}

/// Statistics of `model` at `temperature`, from weights already computed for
/// that temperature.
pub fn thermal_statistics(
    model: &SpectralModel,
    weights: &BoltzmannWeights,
    temperature: f64,
) -> Result<ThermalStatistics, ThermoError> {
    check_temperature(temperature)?;
    let moments = thermal_moments(model, weights)?;
    let units = model.units;
    let lambda_th = thermal_wavelength(model.mass, temperature, &units)?;
    let ratio_r = moments.delta_x / lambda_th;
    let stats = ThermalStatistics {
        units,
        mass: model.mass,
        temperature,
        beta: weights.beta,
        partition_z: weights.partition_z,
        mean_x: moments.mean_x,
        delta_x: moments.delta_x,
        delta_p_kinetic: moments.delta_p_kinetic,
        delta_p_current: moments.delta_p_current,
        lambda_th,
        ratio_r,
        z_arg: 1.0 / (4.0 * std::f64::consts::PI * ratio_r * ratio_r),
        p_th: 2.0 * std::f64::consts::PI * units.hbar / lambda_th,
        top_weight: weights.top_weight,
        truncated: weights.truncated(),
        completeness_deficit: moments.completeness_deficit,
    };
    if stats.truncated {
        log::warn!(
            "T = {temperature}: top level still carries weight {:e}; the spectrum is too short",
            stats.top_weight
        );
    }
    Ok(stats)
}

/// Weights and statistics of `model` at `temperature`.
pub fn thermal_state(
    model: &SpectralModel,
    temperature: f64,
) -> Result<(BoltzmannWeights, ThermalStatistics), ThermoError> {
    check_temperature(temperature)?;
    let beta = 1.0 / (model.units.k_boltzmann * temperature);
    let weights = boltzmann_weights(&model.energies, beta)?;
    let stats = thermal_statistics(model, &weights, temperature)?;
    Ok((weights, stats))
}

/// Left and right sides of the three bounds. Unsuffixed momentum fields use
/// `Delta p` from the current; `_kinetic` fields use the kinetic-energy value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub gamma: f64,
    pub w: f64,
    pub product_lhs: f64,
    pub product_lhs_kinetic: f64,
    pub heisenberg_rhs: f64,
    pub boltzmann_rhs: f64,
    pub momentum_lhs: f64,
    pub momentum_lhs_kinetic: f64,
    pub momentum_rhs: f64,
    pub saturation_product: f64,
    pub saturation_product_kinetic: f64,
    pub saturation_momentum: f64,
    pub saturation_momentum_kinetic: f64,
    pub holds_heisenberg: bool,
    pub holds_boltzmann: bool,
    pub holds_momentum: bool,
    pub holds_boltzmann_kinetic: bool,
    pub holds_momentum_kinetic: bool,
    /// Relative gap between `(hbar/2) Gamma(z) / Delta x` and
    /// `(sqrt(2 pi) hbar / lambda_th) w(z)`, two algebraic forms of one bound.
    pub recast_residual: f64,
}

impl BoundReport {
    pub fn all_hold(&self) -> bool {
        self.holds_heisenberg && self.holds_boltzmann && self.holds_momentum
    }
}

fn holds(ratio: f64) -> bool {
    ratio >= 1.0 - BOUND_REL_TOL
}

pub fn evaluate_bounds(stats: &ThermalStatistics, tol: &ToleranceConfig) -> Result<BoundReport, ThermoError> {
    let finite = [
        stats.delta_x,
        stats.delta_p_current,
        stats.delta_p_kinetic,
        stats.lambda_th,
        stats.z_arg,
    ];
    if finite.iter().any(|v| !v.is_finite()) {
        return Err(ThermoError::NonFinite("thermal statistic"));
    }
    let hbar = stats.units.hbar;
    let gamma = gamma_factor_with(stats.z_arg, tol)?;
    let w = w_with(stats.z_arg, tol)?;
    let heisenberg_rhs = 0.5 * hbar;
    let boltzmann_rhs = heisenberg_rhs * gamma;
    let momentum_rhs = (2.0 * std::f64::consts::PI).sqrt() * hbar / stats.lambda_th;

    let recast_lhs = boltzmann_rhs / stats.delta_x;
    let recast_rhs = momentum_rhs * w;
    let recast_residual = (recast_lhs - recast_rhs).abs() / recast_lhs.abs();
    if !(recast_residual <= RECAST_TOL) {
        return Err(ThermoError::RecastMismatch(recast_residual));
    }

    let product_lhs = stats.delta_x * stats.delta_p_current;
    let product_lhs_kinetic = stats.delta_x * stats.delta_p_kinetic;
    let saturation_product = product_lhs / boltzmann_rhs;
    let saturation_product_kinetic = product_lhs_kinetic / boltzmann_rhs;
    let saturation_momentum = stats.delta_p_current / momentum_rhs;
    let saturation_momentum_kinetic = stats.delta_p_kinetic / momentum_rhs;
    Ok(BoundReport {
        gamma,
        w,
        product_lhs,
        product_lhs_kinetic,
        heisenberg_rhs,
        boltzmann_rhs,
        momentum_lhs: stats.delta_p_current,
        momentum_lhs_kinetic: stats.delta_p_kinetic,
        momentum_rhs,
        saturation_product,
        saturation_product_kinetic,
        saturation_momentum,
        saturation_momentum_kinetic,
        holds_heisenberg: holds(product_lhs / heisenberg_rhs),
        holds_boltzmann: holds(saturation_product),
        holds_momentum: holds(saturation_momentum),
        holds_boltzmann_kinetic: holds(saturation_product_kinetic),
        holds_momentum_kinetic: holds(saturation_momentum_kinetic),
        recast_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub stats: ThermalStatistics,
    pub bounds: BoundReport,
}

/// Statistics and bounds at each temperature, in input order.
pub fn temperature_sweep(
    model: &SpectralModel,
    temperatures: &[f64],
    tol: &ToleranceConfig,
) -> Result<Vec<SweepRow>, ThermoError> {
    for &t in temperatures {
        check_temperature(t)?;
    }
    if let Some(w) = temperatures.windows(2).find(|w| w[1] < w[0]) {
        return Err(ThermoError::UnsortedTemperatures {
            previous: w[0],
            next: w[1],
        });
    }
    temperatures
        .iter()
        .map(|&t| {
            let (_, stats) = thermal_state(model, t)?;
            let bounds = evaluate_bounds(&stats, tol)?;
            Ok(SweepRow { stats, bounds })
        })
        .collect()
}
