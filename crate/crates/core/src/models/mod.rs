//! One-dimensional quantum models in their energy eigenbasis.
//!
//! A [`SpectralModel`] is everything downstream code needs: ascending
//! energies, position matrix elements `<n|x|m>`, diagonal potential energies
//! and the particle mass. Models come either from closed forms
//! ([`analytic_harmonic_model`], [`analytic_box_model`]) or from diagonalizing
//! a finite-difference Hamiltonian ([`grid_model`]).

mod analytic;
pub mod eigen;
mod grid;
mod matrix;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use analytic::{analytic_box_model, analytic_harmonic_model, DEFAULT_LEVELS};
pub use eigen::{
    diagonalize, diagonalize_dense, diagonalize_tridiagonal, DenseMatrix, EigenError, Eigensystem, SymmetricMatrix,
    TridiagonalMatrix,
};
pub use grid::{
    build_grid_hamiltonian, grid_model, parse_tabulated, position_elements, read_tabulated, GridSpec, PotentialSpec,
    MIN_GRID_POINTS,
};
pub use matrix::{LevelMatrix, MomentumMatrix, RowIter};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("potential is not finite at x = {x} (value {value})")]
    NonFinitePotential { x: f64, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid units: {0}")]
    InvalidUnits(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid spectral model: {0}")]
    InvalidModel(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// Values of `hbar` and `k_B`. Natural units by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitSystem {
    pub hbar: f64,
    pub k_boltzmann: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            hbar: 1.0,
            k_boltzmann: 1.0,
        }
    }
}

impl UnitSystem {
    pub fn new(hbar: f64, k_boltzmann: f64) -> Result<Self, ModelError> {
        let units = Self { hbar, k_boltzmann };
        units.validate()?;
        Ok(units)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(self.hbar) && ok(self.k_boltzmann) {
            Ok(())
        } else {
            Err(ModelError::InvalidUnits(format!(
                "hbar and k_boltzmann must be positive, got {} and {}",
                self.hbar, self.k_boltzmann
            )))
        }
    }
}

/// Where a model's spectrum came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    AnalyticHarmonic { omega0: f64 },
    AnalyticBox { length: f64 },
    Grid(GridSpec),
}

/// A diagonalized one-dimensional system. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    pub mass: f64,
    pub units: UnitSystem,
    /// Ascending energies `E_n`.
    pub energies: Vec<f64>,
    /// `<n|x|m>`, real symmetric.
    pub x_elements: LevelMatrix,
    /// `<n|V|n>`.
    pub v_diagonal: Vec<f64>,
    /// `<n|x^2|n>` from the underlying representation when available; used to
    /// monitor basis truncation.
    pub x2_diagonal: Option<Vec<f64>>,
    pub provenance: Provenance,
}

impl SpectralModel {
    pub fn n_levels(&self) -> usize {
        self.energies.len()
    }

    /// `omega_mn = (E_m - E_n) / hbar`.
    pub fn transition_frequency(&self, n: usize, m: usize) -> f64 {
        (self.energies[m] - self.energies[n]) / self.units.hbar
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.n_levels();
        if n == 0 {
            return Err(ModelError::InvalidModel("empty spectrum".into()));
        }
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return Err(ModelError::InvalidModel(format!(
                "mass must be positive, got {}",
                self.mass
            )));
        }
        if self.x_elements.dim() != n || self.v_diagonal.len() != n {
            return Err(ModelError::DimensionMismatch(format!(
                "{n} energies, {}x{0} position matrix, {} potential entries",
                self.x_elements.dim(),
                self.v_diagonal.len()
            )));
        }
        if let Some(x2) = &self.x2_diagonal {
            if x2.len() != n {
                return Err(ModelError::DimensionMismatch("x^2 diagonal length".into()));
            }
        }
        if self.energies.iter().chain(&self.v_diagonal).any(|v| !v.is_finite()) || !self.x_elements.all_finite() {
            return Err(ModelError::InvalidModel("non-finite entries".into()));
        }
        if self.energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(ModelError::InvalidModel("energies must be nondecreasing".into()));
        }
        let asym = self.x_elements.max_asymmetry();
        if asym > 1e-12 {
            return Err(ModelError::InvalidModel(format!(
                "position matrix asymmetric by {asym:e}"
            )));
        }
        Ok(())
    }

    /// Continuum value of the per-state sum `sum_m omega_mn |x_nm|^2`, which is
    /// `hbar / 2m` for any Hamiltonian of the form `p^2/2m + V(x)`.
    pub fn trk_continuum(&self) -> f64 {
        self.units.hbar / (2.0 * self.mass)
    }

    /// `sum_m omega_mn |x_nm|^2` as the representation itself dictates.
    ///
    /// On the finite-difference grid `[x, [H, x]] = (hbar^2/2m) S` with `S` the
    /// nearest-neighbour adjacency matrix, so the sum equals
    /// `(hbar/2m) (1 - m d^2 <T>_n / hbar^2)` where `<T>_n = E_n - <V>_n`. Analytic
    /// models use the continuum value.
    pub fn trk_for_level(&self, n: usize) -> f64 {
        match self.provenance {
            Provenance::Grid(grid) => {
                let d = grid.spacing();
                let kinetic = self.energies[n] - self.v_diagonal[n];
                let hbar = self.units.hbar;
                self.trk_continuum() * (1.0 - self.mass * d * d * kinetic / (hbar * hbar))
            }
            _ => self.trk_continuum(),
        }
    }
}

/// Momentum in the energy eigenbasis through the current
/// `p = (m / i hbar) [x, H]`, i.e. `p_nm = -i m omega_mn x_nm`.
pub fn current_momentum_elements(model: &SpectralModel) -> MomentumMatrix {
    let mass = model.mass;
    MomentumMatrix {
        imag_part: model
            .x_elements
            .map_entries(|n, m, x| mass * model.transition_frequency(n, m) * x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn units() -> UnitSystem {
        UnitSystem::default()
    }

    #[test]
    fn unit_validation() {
        assert!(UnitSystem::new(1.0, 1.0).is_ok());
        assert!(UnitSystem::new(0.0, 1.0).is_err());
        assert!(UnitSystem::new(1.0, -1.0).is_err());
    }

    #[test]
    fn harmonic_current_momentum() {
        let model = analytic_harmonic_model(1.3, 0.7, 10, &units()).unwrap();
        let p = current_momentum_elements(&model);
        let expected = 1.3 * 0.7 / 2.0;
        assert!((p.abs_sq(0, 1) - expected).abs() < 1e-15);
        for n in 0..10 {
            assert_eq!(p.abs_sq(n, n), 0.0);
        }
        // Hermitian: p_mn = conj(p_nm)
        let (re, im) = p.element(3, 4);
        let (re_t, im_t) = p.element(4, 3);
        assert_eq!((re, im), (re_t, -im_t));
    }

    #[test]
    fn validate_catches_bad_models() {
        let mut model = analytic_harmonic_model(1.0, 1.0, 4, &units()).unwrap();
        model.energies.swap(0, 3);
        assert!(model.validate().is_err());
        let mut model = analytic_harmonic_model(1.0, 1.0, 4, &units()).unwrap();
        model.v_diagonal.pop();
        assert!(matches!(model.validate(), Err(ModelError::DimensionMismatch(_))));
    }

    #[test]
    fn harmonic_trk_is_exact_below_the_cutoff() {
        let model = analytic_harmonic_model(2.0, 3.0, 20, &units()).unwrap();
        for n in 0..19 {
            let sum: f64 = model
                .x_elements
                .row(n)
                .map(|(m, x)| model.transition_frequency(n, m) * x * x)
                .sum();
            assert!((sum - model.trk_continuum()).abs() < 1e-14);
        }
    }
}
