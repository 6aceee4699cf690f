//! Exactly solvable reference models: the harmonic oscillator and the
//! particle in a box, truncated to a finite number of levels.

use std::f64::consts::PI;

use super::matrix::LevelMatrix;
use super::{ModelError, Provenance, SpectralModel, UnitSystem};

/// Level count used when a caller does not ask for one.
pub const DEFAULT_LEVELS: usize = 200;

fn check_positive(name: &str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter(format!(
            "{name} must be positive, got {value}"
        )))
    }
}

/// Harmonic oscillator `E_n = hbar omega0 (n + 1/2)` with ladder-operator
/// position elements `x_{n,n+1} = sqrt(hbar (n+1) / (2 m omega0))`.
pub fn analytic_harmonic_model(
    mass: f64,
    omega0: f64,
    n_levels: usize,
    units: &UnitSystem,
) -> Result<SpectralModel, ModelError> {
    units.validate()?;
    check_positive("mass", mass)?;
    check_positive("omega0", omega0)?;
    if n_levels < 2 {
        return Err(ModelError::InvalidParameter(format!(
            "harmonic model needs at least 2 levels, got {n_levels}"
        )));
    }
    let hbar = units.hbar;
    let energies: Vec<f64> = (0..n_levels).map(|n| hbar * omega0 * (n as f64 + 0.5)).collect();
    let length_sq = hbar / (2.0 * mass * omega0);
    let triples = (0..n_levels - 1).flat_map(|n| {
        let x = (length_sq * (n as f64 + 1.0)).sqrt();
        [(n, n + 1, x), (n + 1, n, x)]
    });
    let x_elements = LevelMatrix::sparse_from_triples(n_levels, triples);
    // virial theorem: <V> = E/2 in every eigenstate
    let v_diagonal = energies.iter().map(|e| 0.5 * e).collect();
    let x2_diagonal = (0..n_levels).map(|n| length_sq * (2.0 * n as f64 + 1.0)).collect();
    let model = SpectralModel {
        mass,
        units: *units,
        energies,
        x_elements,
        v_diagonal,
        x2_diagonal: Some(x2_diagonal),
        provenance: Provenance::AnalyticHarmonic { omega0 },
    };
    model.validate()?;
    Ok(model)
}

/// Infinite square well on `[0, L]`, levels `n = 1..=n_levels` stored at
/// index `n - 1`.
///
/// `E_n = n^2 pi^2 hbar^2 / (2 m L^2)`, `x_nn = L/2`, and for `n + m` odd
/// `x_nm = -8 L n m / (pi^2 (n^2 - m^2)^2)`; other elements vanish.
pub fn analytic_box_model(
    mass: f64,
    length: f64,
    n_levels: usize,
    units: &UnitSystem,
) -> Result<SpectralModel, ModelError> {
    units.validate()?;
    check_positive("mass", mass)?;
    check_positive("length", length)?;
    if n_levels < 2 {
        return Err(ModelError::InvalidParameter(format!(
            "box model needs at least 2 levels, got {n_levels}"
        )));
    }
    let scale = PI * PI * units.hbar * units.hbar / (2.0 * mass * length * length);
    let energies: Vec<f64> = (1..=n_levels).map(|n| scale * (n * n) as f64).collect();
    let mut data = vec![0.0; n_levels * n_levels];
    for a in 0..n_levels {
        let n = (a + 1) as f64;
        data[a * n_levels + a] = 0.5 * length;
        // only n + m odd couples
        for b in (a + 1..n_levels).step_by(2) {
            let m = (b + 1) as f64;
            let diff = n * n - m * m;
            let x = -8.0 * length * n * m / (PI * PI * diff * diff);
            data[a * n_levels + b] = x;
            data[b * n_levels + a] = x;
        }
    }
    // <x^2>_n = L^2 (1/3 - 1/(2 n^2 pi^2))
    let x2_diagonal = (1..=n_levels)
        .map(|n| length * length * (1.0 / 3.0 - 1.0 / (2.0 * (n * n) as f64 * PI * PI)))
        .collect();
    let model = SpectralModel {
        mass,
        units: *units,
        energies,
        x_elements: LevelMatrix::dense(n_levels, data),
        v_diagonal: vec![0.0; n_levels],
        x2_diagonal: Some(x2_diagonal),
        provenance: Provenance::AnalyticBox { length },
    };
    model.validate()?;
    Ok(model)
}
