//! Finite-difference discretization of `H = p^2/2m + V(x)` on a uniform grid
//! of interior points with Dirichlet walls.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::eigen::{diagonalize_tridiagonal, Eigensystem, TridiagonalMatrix};
use super::matrix::LevelMatrix;
use super::{ModelError, Provenance, SpectralModel, UnitSystem};

/// Smallest grid accepted. The three-point case is the smallest one for which
/// the Hamiltonian has both diagonal and off-diagonal structure.
pub const MIN_GRID_POINTS: usize = 3;

/// `n_points` interior nodes `x_i = x_min + (i + 1) * spacing`, where
/// `spacing = (x_max - x_min) / (n_points + 1)`; the wavefunction vanishes at
/// `x_min` and `x_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self, ModelError> {
        let grid = Self { x_min, x_max, n_points };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return Err(ModelError::InvalidGrid(format!(
                "need finite x_min < x_max, got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        if self.n_points < MIN_GRID_POINTS {
            return Err(ModelError::InvalidGrid(format!(
                "need at least {MIN_GRID_POINTS} points, got {}",
                self.n_points
            )));
        }
        if !(self.spacing() > 0.0) {
            return Err(ModelError::InvalidGrid("grid spacing underflows".into()));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points as f64 + 1.0)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 1.0) * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.x_min + self.x_max)
    }
}

/// Confining potential on the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    /// `V = m omega0^2 (x - center)^2 / 2`.
    Harmonic { mass: f64, omega0: f64, center: f64 },
    /// `V = 0` between hard walls `length` apart; the grid must span exactly
    /// that length.
    Box { length: f64 },
    /// `V = sum_k c_k x^k`.
    Polynomial { coefficients: Vec<f64> },
    /// Linear interpolation of `(x, V)` samples sorted by `x`.
    Tabulated { samples: Vec<(f64, f64)> },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            PotentialSpec::Harmonic { mass, omega0, center } => {
                if !(omega0.is_finite() && *omega0 > 0.0) {
                    return Err(ModelError::InvalidPotential(format!(
                        "omega0 must be positive, got {omega0}"
                    )));
                }
                if !(mass.is_finite() && *mass > 0.0) {
                    return Err(ModelError::InvalidPotential(format!(
                        "mass must be positive, got {mass}"
                    )));
                }
                if !center.is_finite() {
                    return Err(ModelError::InvalidPotential("center must be finite".into()));
                }
            }
            PotentialSpec::Box { length } => {
                if !(length.is_finite() && *length > 0.0) {
                    return Err(ModelError::InvalidPotential(format!(
                        "box length must be positive, got {length}"
                    )));
                }
            }
            PotentialSpec::Polynomial { coefficients } => {
                if coefficients.iter().any(|c| !c.is_finite()) {
                    return Err(ModelError::InvalidPotential(
                        "polynomial coefficients must be finite".into(),
                    ));
                }
            }
            PotentialSpec::Tabulated { samples } => {
                if samples.len() < 2 {
                    return Err(ModelError::InvalidPotential("need at least two samples".into()));
                }
                if let Some(&(x, v)) = samples.iter().find(|(x, v)| !(x.is_finite() && v.is_finite())) {
                    return Err(ModelError::NonFinitePotential { x, value: v });
                }
                if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(ModelError::InvalidPotential(
                        "tabulated samples must be strictly increasing in x".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn value_at(&self, x: f64) -> Result<f64, ModelError> {
        let v = match self {
            PotentialSpec::Harmonic { mass, omega0, center } => 0.5 * mass * omega0 * omega0 * (x - center).powi(2),
            PotentialSpec::Box { .. } => 0.0,
            PotentialSpec::Polynomial { coefficients } => coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c),
            PotentialSpec::Tabulated { samples } => {
                let first = samples[0].0;
                let last = samples[samples.len() - 1].0;
                if x < first || x > last {
                    return Err(ModelError::InvalidPotential(format!(
                        "tabulated samples cover [{first}, {last}] but the grid needs x = {x}"
                    )));
                }
                let hi = samples.partition_point(|&(sx, _)| sx < x).max(1);
                let (x0, v0) = samples[hi - 1];
                let (x1, v1) = samples[hi];
                v0 + (v1 - v0) * (x - x0) / (x1 - x0)
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ModelError::NonFinitePotential { x, value: v })
        }
    }

    /// `V(x_i)` at every interior node.
    pub fn sample(&self, grid: &GridSpec) -> Result<Vec<f64>, ModelError> {
        self.validate()?;
        if let PotentialSpec::Box { length } = self {
            let span = grid.x_max - grid.x_min;
            if (span - length).abs() > 1e-12 * length {
                return Err(ModelError::InvalidPotential(format!(
                    "box of length {length} needs a grid spanning it exactly, got {span}"
                )));
            }
        }
        (0..grid.n_points).map(|i| self.value_at(grid.point(i))).collect()
    }
}

/// Parses the two-column `x V(x)` text format. Blank lines and everything
/// after `#` are ignored.
pub fn parse_tabulated(text: &str) -> Result<Vec<(f64, f64)>, ModelError> {
    let mut samples = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(ModelError::Parse {
                line: idx + 1,
                message: format!("expected 2 columns, found {}", fields.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|e| ModelError::Parse {
                line: idx + 1,
                message: format!("{s:?}: {e}"),
            })
        };
        samples.push((parse(fields[0])?, parse(fields[1])?));
    }
    Ok(samples)
}

pub fn read_tabulated(path: &Path) -> Result<Vec<(f64, f64)>, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
    parse_tabulated(&text)
}

/// Tridiagonal finite-difference Hamiltonian: diagonal `hbar^2/(m d^2) + V(x_i)`,
/// off-diagonal `-hbar^2/(2 m d^2)`.
pub fn build_grid_hamiltonian(
    grid: &GridSpec,
    potential: &PotentialSpec,
    mass: f64,
    units: &UnitSystem,
) -> Result<TridiagonalMatrix, ModelError> {
    grid.validate()?;
    if !(mass.is_finite() && mass > 0.0) {
        return Err(ModelError::InvalidParameter(format!(
            "mass must be positive, got {mass}"
        )));
    }
    let v = potential.sample(grid)?;
    let d = grid.spacing();
    let kinetic = units.hbar * units.hbar / (mass * d * d);
    let diagonal = v.iter().map(|vi| kinetic + vi).collect();
    let off = vec![-0.5 * kinetic; grid.n_points - 1];
    Ok(TridiagonalMatrix::new(diagonal, off)?)
}

/// `x_nm = sum_i v_n(i) x_i v_m(i)` over all eigenvector pairs.
///
/// Coordinates are measured from the grid center while summing, and the
/// center is added back on the diagonal, which keeps off-diagonal elements
/// accurate relative to the grid extent rather than to `|x|`.
pub fn position_elements(eigen: &Eigensystem, grid: &GridSpec) -> Result<LevelMatrix, ModelError> {
    weighted_elements(eigen, grid, |x| x, grid.center())
}

fn weighted_elements(
    eigen: &Eigensystem,
    grid: &GridSpec,
    weight: impl Fn(f64) -> f64,
    center: f64,
) -> Result<LevelMatrix, ModelError> {
    let n = eigen.dim();
    if n != grid.n_points {
        return Err(ModelError::DimensionMismatch(format!(
            "{n} eigenvector components for a {}-point grid",
            grid.n_points
        )));
    }
    let w: Vec<f64> = grid.points().into_iter().map(|x| weight(x) - weight(center)).collect();
    let mut data = eigen.weighted_gram(&w);
    for a in 0..n {
        data[a * n + a] += weight(center);
    }
    Ok(LevelMatrix::dense(n, data))
}

/// Diagonalizes the grid Hamiltonian and collects everything the thermal and
/// spectral layers need.
pub fn grid_model(
    grid: &GridSpec,
    potential: &PotentialSpec,
    mass: f64,
    units: &UnitSystem,
) -> Result<SpectralModel, ModelError> {
    units.validate()?;
    let h = build_grid_hamiltonian(grid, potential, mass, units)?;
    let eigen = diagonalize_tridiagonal(&h)?;
    let v = potential.sample(grid)?;
    let x_elements = position_elements(&eigen, grid)?;
    let points = grid.points();
    let c = grid.center();
    let mut v_diagonal = Vec::with_capacity(grid.n_points);
    let mut x2_diagonal = Vec::with_capacity(grid.n_points);
    for vec in eigen.vectors() {
        let mut vv = 0.0;
        let mut xx = 0.0;
        for ((a, vi), x) in vec.iter().zip(&v).zip(&points) {
            let p = a * a;
            vv += p * vi;
            xx += p * (x - c) * (x - c);
        }
        v_diagonal.push(vv);
        // <x^2> = <(x-c)^2> + 2c<x> - c^2
        x2_diagonal.push(xx);
    }
    for (k, x2) in x2_diagonal.iter_mut().enumerate() {
        let mean = x_elements.get(k, k);
        *x2 += 2.0 * c * mean - c * c;
    }
    let model = SpectralModel {
        mass,
        units: *units,
        energies: eigen.values,
        x_elements,
        v_diagonal,
        x2_diagonal: Some(x2_diagonal),
        provenance: Provenance::Grid(*grid),
    };
    model.validate()?;
    Ok(model)
}
