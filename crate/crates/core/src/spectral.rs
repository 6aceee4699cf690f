//! Spectral form of the position autocorrelation and the identities that
//! lead from it to the Boltzmann bound.
//!
//! In the energy eigenbasis the thermal autocorrelation
//! `c(t) = <dx(t) dx(0)>` with `dx = x - <x>` is a finite sum of phases,
//!
//! `c(t) = (Delta x)^2 sum_atoms P(omega) exp(-i omega t)`,
//!
//! where an atom at `omega_mn = (E_m - E_n)/hbar` carries
//! `p_n |dx_nm|^2 / (Delta x)^2`. Because the level pair `(n, m)` produces both
//! the `+omega` and the `-omega` atom, their mass ratio is `p_m / p_n =
//! exp(-beta hbar omega)` (detailed balance). Folding onto `omega >= 0` gives
//! `Q(omega) = (1 + exp(-beta hbar omega)) P(omega)`, and
//!
//! * `beta hbar <omega>_P = <g(beta hbar omega)>_Q`,
//! * `<omega^2>_P = <omega^2>_Q`,
//! * `<omega^2>_Q >= k(<g>_Q)^2 / (beta hbar)^2` by convexity of `k^2`,
//!   `k = g^-1`,
//!
//! which together with `<omega>_P = hbar / (2 m (Delta x)^2)` and
//! `<omega^2>_P = (Delta p / (m Delta x))^2` is the bound.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::models::SpectralModel;
use crate::numerics::{compensated_sum, CompensatedSum};
use crate::specfun::{g, g_inverse, DomainError, SpecfunError, ToleranceConfig};
use crate::thermo::{boltzmann_weights, thermal_moments, BoltzmannWeights, ThermoError};

/// Allowed deviation of total P and Q mass from one.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Relative tolerance for the exact identities.
pub const IDENTITY_TOL: f64 = 1e-10;
/// An atom without a mirror partner is an error when the partner it should
/// have would carry more than this mass.
pub const UNPAIRED_MASS: f64 = 1e-13;
/// Masses below this are deep in the subnormal-adjacent range where ratios
/// lose their relative precision; such pairs are not compared.
const UNDERFLOW_MASS: f64 = 1e-280;
/// Default frequency clustering tolerance relative to the spectral range.
///
/// Mirror pairing never depends on clustering (both signs come from the same
/// level pair), so clustering only has to absorb rounding-level collisions
/// such as the equal spacings of the harmonic ladder. Merging genuinely
/// distinct transitions mixes Boltzmann factors and costs detailed balance at
/// second order in `beta hbar delta_omega`; grid spectra with a nearly
/// harmonic low end hit that at `1e-9` of the range.
pub const DEFAULT_OMEGA_TOL_FACTOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("zero position spread: the state has no position fluctuations")]
    ZeroSpread,
    #[error("frequency tolerance must be nonnegative and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("atom at omega = {omega} (mass {mass:e}) has no detailed-balance partner")]
    Unpaired { omega: f64, mass: f64 },
    #[error("{measure} measure has total mass {total}, expected 1")]
    Normalization { measure: &'static str, total: f64 },
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error(transparent)]
    Thermo(#[from] ThermoError),
}

impl From<DomainError> for SpectralError {
    fn from(e: DomainError) -> Self {
        SpectralError::Specfun(e.into())
    }
}

/// A point mass of a frequency distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub omega: f64,
    pub mass: f64,
}

/// The distribution `P(omega)` of the thermal position autocorrelation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    /// Atoms at nonzero frequency, ascending in `omega`.
    pub atoms: Vec<Atom>,
    /// Mass at `omega = 0`: diagonal `dx_nn` and near-degenerate pairs.
    pub zero_atom_mass: f64,
    pub beta: f64,
    pub hbar: f64,
    pub mass: f64,
    pub delta_x_sq: f64,
    pub mean_x: f64,
    /// Transitions closer than this in frequency share an atom.
    pub tol_omega: f64,
}

impl SpectralMeasure {
    pub fn total_mass(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        acc.add(self.zero_atom_mass);
        for a in &self.atoms {
            acc.add(a.mass);
        }
        acc.value()
    }

    /// `beta hbar omega`.
    pub fn reduced(&self, omega: f64) -> f64 {
        self.beta * self.hbar * omega
    }

    fn atoms_by_mass(&self) -> Vec<Atom> {
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| a.mass.total_cmp(&b.mass));
        atoms
    }
}

/// `DEFAULT_OMEGA_TOL_FACTOR * (E_max - E_min) / hbar`.
pub fn default_omega_tolerance(model: &SpectralModel) -> f64 {
    let range = model.energies.last().unwrap_or(&0.0) - model.energies.first().unwrap_or(&0.0);
    DEFAULT_OMEGA_TOL_FACTOR * range / model.units.hbar
}

/// One level pair `n < m` with a resolvable frequency.
struct Transition {
    omega: f64,
    up: f64,
    down: f64,
}

/// Builds `P(omega)` for `model` in the Boltzmann state `weights`.
///
/// Each unordered level pair `(n, m)` contributes `p_n |x_nm|^2` at `+omega_mn`
/// and `p_m |x_nm|^2` at `-omega_mn`. Pairs closer than `tol_omega` in
/// frequency merge into one atom whose frequency is the P-mass-weighted mean,
/// mirrored exactly between the two signs. Diagonal terms `(x_nn - <x>)^2` and
/// pairs with `|omega| <= tol_omega` go to the zero atom.
pub fn build_spectral_measure(
    model: &SpectralModel,
    weights: &BoltzmannWeights,
    tol_omega: Option<f64>,
) -> Result<SpectralMeasure, SpectralError> {
    let tol_omega = tol_omega.unwrap_or_else(|| default_omega_tolerance(model));
    if !(tol_omega.is_finite() && tol_omega >= 0.0) {
        return Err(SpectralError::InvalidTolerance(tol_omega));
    }
    let moments = thermal_moments(model, weights).map_err(|e| match e {
        ThermoError::ZeroSpread => SpectralError::ZeroSpread,
        other => other.into(),
    })?;
    let delta_x_sq = moments.delta_x * moments.delta_x;
    let p = &weights.probabilities;

    let mut zero = CompensatedSum::new();
    let mut transitions = Vec::new();
    for n in (0..model.n_levels()).filter(|&n| p[n] > 0.0) {
        for (m, x) in model.x_elements.row(n) {
            if m < n {
                // covered from the lower level, which is at least as populated
                continue;
            }
            if m == n {
                let d = x - moments.mean_x;
                zero.add(p[n] * d * d);
                continue;
            }
            let x2 = x * x;
            let omega = model.transition_frequency(n, m);
            if omega <= tol_omega {
                zero.add((p[n] + p[m]) * x2);
            } else {
                transitions.push(Transition {
                    omega,
                    up: p[n] * x2,
                    down: p[m] * x2,
                });
            }
        }
    }
    transitions.sort_by(|a, b| a.omega.total_cmp(&b.omega));

    let mut positive = Vec::new();
    let mut negative = Vec::new();
    let mut start = 0;
    while start < transitions.len() {
        let anchor = transitions[start].omega;
        let end = start
            + transitions[start..]
                .iter()
                .position(|t| t.omega - anchor > tol_omega)
                .unwrap_or(transitions.len() - start);
        let cluster = &transitions[start..end];
        let up = compensated_sum(cluster.iter().map(|t| t.up));
        let down = compensated_sum(cluster.iter().map(|t| t.down));
        let omega = if cluster.len() == 1 || up == 0.0 {
            anchor
        } else {
            let weighted = compensated_sum(cluster.iter().map(|t| t.up * t.omega)) / up;
            weighted.clamp(anchor, cluster[cluster.len() - 1].omega)
        };
        if up > 0.0 {
            positive.push(Atom {
                omega,
                mass: up / delta_x_sq,
            });
        }
        if down > 0.0 {
            negative.push(Atom {
                omega: -omega,
                mass: down / delta_x_sq,
            });
        }
        start = end;
    }
    negative.reverse();
    negative.extend(positive);
    let atoms = negative;
    if atoms.iter().any(|a| !(a.mass.is_finite() && a.omega.is_finite())) {
        return Err(SpectralError::NonFinite("atom"));
    }
    Ok(SpectralMeasure {
        atoms,
        zero_atom_mass: zero.value() / delta_x_sq,
        beta: weights.beta,
        hbar: model.units.hbar,
        mass: model.mass,
        delta_x_sq,
        mean_x: moments.mean_x,
        tol_omega,
    })
}

/// `c(t) = (Delta x)^2 sum P(omega) exp(-i omega t)`.
pub fn autocorrelation(measure: &SpectralMeasure, t: f64) -> Complex64 {
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    re.add(measure.zero_atom_mass);
    for a in measure.atoms_by_mass() {
        let (s, c) = (a.omega * t).sin_cos();
        re.add(a.mass * c);
        im.add(-a.mass * s);
    }
    Complex64::new(re.value(), im.value()) * measure.delta_x_sq
}

/// `(c'(0), c''(0)) = (-i (Delta x)^2 <omega>_P, -(Delta x)^2 <omega^2>_P)`.
pub fn derivatives_at_zero(measure: &SpectralMeasure) -> (Complex64, f64) {
    let atoms = measure.atoms_by_mass();
    let first = compensated_sum(atoms.iter().map(|a| a.mass * a.omega));
    let second = compensated_sum(atoms.iter().map(|a| a.mass * a.omega * a.omega));
    (
        Complex64::new(0.0, -measure.delta_x_sq * first),
        -measure.delta_x_sq * second,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetailedBalance {
    /// Largest `|P(-w)/P(w) - exp(-beta hbar w)| / exp(-beta hbar w)`.
    pub max_residual: f64,
    pub pairs_checked: usize,
    /// Pairs skipped because the lighter partner is too small to compare or
    /// underflowed entirely.
    pub pairs_skipped: usize,
    /// Residual for each entry of `measure.atoms`, when it was compared.
    pub atom_residuals: Vec<Option<f64>>,
}

/// Matches `+omega` and `-omega` atoms and measures the detailed-balance
/// residual of each pair.
pub fn verify_detailed_balance(measure: &SpectralMeasure) -> Result<DetailedBalance, SpectralError> {
    let atoms = &measure.atoms;
    let split = atoms.partition_point(|a| a.omega < 0.0);
    // negative atoms by increasing |omega|
    let neg: Vec<usize> = (0..split).rev().collect();
    let pos: Vec<usize> = (split..atoms.len()).collect();
    let mut residuals = vec![None; atoms.len()];
    let mut report = DetailedBalance {
        max_residual: 0.0,
        pairs_checked: 0,
        pairs_skipped: 0,
        atom_residuals: Vec::new(),
    };
    let match_tol = |w: f64| measure.tol_omega.max(8.0 * f64::EPSILON * w);
    let unpaired = |idx: usize, expected_partner: f64| -> Result<(), SpectralError> {
        if expected_partner > UNPAIRED_MASS {
            Err(SpectralError::Unpaired {
                omega: atoms[idx].omega,
                mass: atoms[idx].mass,
            })
        } else {
            Ok(())
        }
    };
    let (mut i, mut j) = (0, 0);
    while i < pos.len() || j < neg.len() {
        let plus = pos.get(i).map(|&k| atoms[k]);
        let minus = neg.get(j).map(|&k| atoms[k]);
        let take_plus = match (plus, minus) {
            (Some(a), Some(b)) if (a.omega + b.omega).abs() <= match_tol(a.omega) => {
                let boltzmann = (-measure.reduced(a.omega)).exp();
                if b.mass < UNDERFLOW_MASS || a.mass < UNDERFLOW_MASS {
                    report.pairs_skipped += 1;
                } else {
                    let r = (b.mass / a.mass - boltzmann).abs() / boltzmann;
                    report.max_residual = report.max_residual.max(r);
                    report.pairs_checked += 1;
                    residuals[pos[i]] = Some(r);
                    residuals[neg[j]] = Some(r);
                }
                i += 1;
                j += 1;
                continue;
            }
            (Some(a), Some(b)) => a.omega < -b.omega,
            (Some(_), None) => true,
            (None, _) => false,
        };
        report.pairs_skipped += 1;
        if take_plus {
            let a = atoms[pos[i]];
            unpaired(pos[i], a.mass * (-measure.reduced(a.omega)).exp())?;
            i += 1;
        } else {
            let b = atoms[neg[j]];
            unpaired(neg[j], b.mass * (-measure.reduced(b.omega)).exp())?;
            j += 1;
        }
    }
    report.atom_residuals = residuals;
    Ok(report)
}

/// `Q(omega) = (1 + exp(-beta hbar omega)) P(omega)` on `omega >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QMeasure {
    /// Ascending in `omega`; a zero-frequency atom comes first when present.
    pub atoms: Vec<Atom>,
    pub beta: f64,
    pub hbar: f64,
}

impl QMeasure {
    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.atoms.iter().map(|a| a.mass))
    }

    fn atoms_by_mass(&self) -> Vec<Atom> {
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| a.mass.total_cmp(&b.mass));
        atoms
    }

    /// `<g(beta hbar omega)>_Q`.
    pub fn mean_g(&self) -> Result<f64, SpectralError> {
        let scale = self.beta * self.hbar;
        let terms = self
            .atoms_by_mass()
            .iter()
            .map(|a| Ok(a.mass * g(scale * a.omega)?))
            .collect::<Result<Vec<f64>, DomainError>>()?;
        Ok(compensated_sum(terms))
    }

    /// `<omega^2>_Q`.
    pub fn second_moment(&self) -> f64 {
        compensated_sum(self.atoms_by_mass().iter().map(|a| a.mass * a.omega * a.omega))
    }
}

/// Folds `P` onto `omega >= 0`. The zero atom enters once with its own mass.
///
/// Assumes detailed balance, which is what makes the folded mass equal to the
/// sum of the two mirrored P masses.
pub fn build_q_measure(measure: &SpectralMeasure) -> Result<QMeasure, SpectralError> {
    let mut atoms = Vec::new();
    if measure.zero_atom_mass > 0.0 {
        atoms.push(Atom {
            omega: 0.0,
            mass: measure.zero_atom_mass,
        });
    }
    atoms.extend(measure.atoms.iter().filter(|a| a.omega > 0.0).map(|a| Atom {
        omega: a.omega,
        mass: (1.0 + (-measure.reduced(a.omega)).exp()) * a.mass,
    }));
    let q = QMeasure {
        atoms,
        beta: measure.beta,
        hbar: measure.hbar,
    };
    let total = q.total_mass();
    if !((total - 1.0).abs() <= NORMALIZATION_TOL) {
        return Err(SpectralError::Normalization { measure: "Q", total });
    }
    Ok(q)
}

/// Moments of `P` and `Q` and the residuals of every identity between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub total_p: f64,
    pub total_q: f64,
    pub mean_omega_p: f64,
    pub second_omega_p: f64,
    pub mean_g_q: f64,
    pub second_omega_q: f64,
    /// `|beta hbar <omega>_P - <g>_Q| / <g>_Q`.
    pub first_moment_residual: f64,
    /// `|<omega^2>_P - <omega^2>_Q| / <omega^2>_Q`.
    pub second_moment_residual: f64,
    /// Against the continuum sum rule `hbar / (2 m (Delta x)^2)`.
    pub trk_residual: f64,
    /// Against the sum rule the model's own representation satisfies; equal to
    /// the continuum one except on a finite-difference grid.
    pub trk_basis_residual: f64,
    /// Against `(Delta p_J / (m Delta x))^2`.
    pub second_sum_rule_residual: f64,
    /// `Im c'(0)`; the real part vanishes by construction.
    pub c_dot0_im: f64,
    pub c_ddot0: f64,
    /// `|c'(0) + i hbar/2m| / (hbar/2m)`.
    pub c_dot0_residual: f64,
    /// `|c''(0) + (Delta p_J/m)^2| / (Delta p_J/m)^2`.
    pub c_ddot0_residual: f64,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn moment_identities(
    measure: &SpectralMeasure,
    q: &QMeasure,
    model: &SpectralModel,
) -> Result<MomentReport, SpectralError> {
    let weights = boltzmann_weights(&model.energies, measure.beta)?;
    let moments = thermal_moments(model, &weights)?;
    let (c_dot0, c_ddot0) = derivatives_at_zero(measure);
    let atoms = measure.atoms_by_mass();
    let mean_omega_p = compensated_sum(atoms.iter().map(|a| a.mass * a.omega));
    let second_omega_p = compensated_sum(atoms.iter().map(|a| a.mass * a.omega * a.omega));
    let mean_g_q = q.mean_g()?;
    let second_omega_q = q.second_moment();

    let mass = model.mass;
    let hbar = model.units.hbar;
    let dx2 = measure.delta_x_sq;
    let trk = hbar / (2.0 * mass * dx2);
    let trk_basis = compensated_sum(
        weights
            .probabilities
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(n, p)| p * model.trk_for_level(n)),
    ) / dx2;
    let velocity_sq = (moments.delta_p_current / mass).powi(2);
    let half_velocity = hbar / (2.0 * mass);
    let report = MomentReport {
        total_p: measure.total_mass(),
        total_q: q.total_mass(),
        mean_omega_p,
        second_omega_p,
        mean_g_q,
        second_omega_q,
        first_moment_residual: rel(measure.reduced(mean_omega_p), mean_g_q),
        second_moment_residual: rel(second_omega_p, second_omega_q),
        trk_residual: rel(mean_omega_p, trk),
        trk_basis_residual: rel(mean_omega_p, trk_basis),
        second_sum_rule_residual: rel(second_omega_p, velocity_sq / dx2),
        c_dot0_im: c_dot0.im,
        c_ddot0,
        c_dot0_residual: (c_dot0 - Complex64::new(0.0, -half_velocity)).norm() / half_velocity,
        c_ddot0_residual: rel(c_ddot0, -velocity_sq),
    };
    let values = [
        report.mean_omega_p,
        report.second_omega_p,
        report.mean_g_q,
        report.second_omega_q,
        report.c_ddot0,
    ];
    if values.iter().any(|v| !v.is_finite()) {
        return Err(SpectralError::NonFinite("moment"));
    }
    Ok(report)
}

/// Both sides of the convexity step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JensenReport {
    /// `<omega^2>_Q`.
    pub lhs: f64,
    /// `k(<g(beta hbar omega)>_Q)^2 / (beta hbar)^2`.
    pub rhs: f64,
    pub slack: f64,
    /// `slack / lhs`.
    pub relative_slack: f64,
}

impl JensenReport {
    /// Jensen holds up to `IDENTITY_TOL * lhs`.
    pub fn holds(&self) -> bool {
        self.slack >= -IDENTITY_TOL * self.lhs
    }
}

pub fn jensen_chain(q: &QMeasure, tol: &ToleranceConfig) -> Result<JensenReport, SpectralError> {
    let lhs = q.second_moment();
    let k = g_inverse(q.mean_g()?, tol)?;
    let scale = q.beta * q.hbar;
    let rhs = (k / scale).powi(2);
    let slack = lhs - rhs;
    Ok(JensenReport {
        lhs,
        rhs,
        slack,
        relative_slack: slack / lhs,
    })
}

/// `m (Delta x)^2 sqrt(rhs)`, the Boltzmann bound `(hbar/2) Gamma(z)` reached
/// through the spectral route.
///
/// With `<g>_Q = beta hbar <omega>_P` and `<omega>_P = hbar / (2 m (Delta x)^2)`
/// the argument of `k` is `z` and `sqrt(rhs) = k(z) / (beta hbar)`; the two
/// routes agree exactly when the continuum sum rule holds.
pub fn spectral_boltzmann_rhs(jensen: &JensenReport, mass: f64, delta_x: f64) -> f64 {
    mass * delta_x * delta_x * jensen.rhs.sqrt()
}

/// The whole spectral pipeline for one model and temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAnalysis {
    pub measure: SpectralMeasure,
    pub balance: DetailedBalance,
    pub q: QMeasure,
    pub moments: MomentReport,
    pub jensen: JensenReport,
}

pub fn analyze(
    model: &SpectralModel,
    weights: &BoltzmannWeights,
    tol_omega: Option<f64>,
    tol: &ToleranceConfig,
) -> Result<SpectralAnalysis, SpectralError> {
    let measure = build_spectral_measure(model, weights, tol_omega)?;
    let total = measure.total_mass();
    if !((total - 1.0).abs() <= NORMALIZATION_TOL) {
        return Err(SpectralError::Normalization { measure: "P", total });
    }
    let balance = verify_detailed_balance(&measure)?;
    let q = build_q_measure(&measure)?;
    let moments = moment_identities(&measure, &q, model)?;
    let jensen = jensen_chain(&q, tol)?;
    Ok(SpectralAnalysis {
        measure,
        balance,
        q,
        moments,
        jensen,
    })
}
