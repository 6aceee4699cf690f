//! C ABI for `thermobound`.
//!
//! Every fallible function returns a [`TbStatus`] and writes its result
//! through an out-pointer that is left untouched on failure. The message of
//! the last failure on the calling thread is available from
//! [`tb_last_error_message`]. Models are opaque handles created by the
//! `tb_model_*` constructors and released with [`tb_model_free`].
//!
//! The header `include/thermobound.h` is regenerated by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use thermobound::models::{
    analytic_box_model, analytic_harmonic_model, grid_model, EigenError, GridSpec, ModelError, PotentialSpec,
    SpectralModel, UnitSystem,
};
use thermobound::specfun::{self, DomainError, SpecfunError, ToleranceConfig};
use thermobound::spectral::{analyze, SpectralError};
use thermobound::thermo::{evaluate_bounds, thermal_state, ThermoError};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TbStatus {
    Ok = 0,
    NullPointer = 1,
    /// Argument outside a function's domain, e.g. a negative `g` argument.
    Domain = 2,
    /// Invalid parameter, grid or temperature.
    InvalidArgument = 3,
    /// An iteration or the eigensolver did not converge.
    NoConvergence = 4,
    /// Overflow or another non-finite intermediate.
    Numerical = 5,
    /// A bound or an exact identity failed beyond tolerance.
    Violation = 6,
    /// Internal error; the library caught a panic.
    Panic = 7,
}

/// Values of `hbar` and `k_B`; pass `NULL` for natural units.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TbUnits {
    pub hbar: f64,
    pub k_boltzmann: f64,
}

/// Opaque model handle.
pub struct TbModel {
    inner: SpectralModel,
}

/// Thermal statistics and bounds at one temperature. Unsuffixed momentum
/// fields use the spread of the commutator momentum, `_kinetic` ones the
/// spread from the kinetic energy.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TbThermalReport {
    pub temperature: f64,
    pub beta: f64,
    pub delta_x: f64,
    pub delta_p: f64,
    pub delta_p_kinetic: f64,
    pub lambda_th: f64,
    pub ratio_r: f64,
    pub z: f64,
    pub gamma: f64,
    pub w: f64,
    pub product_lhs: f64,
    pub heisenberg_rhs: f64,
    pub boltzmann_rhs: f64,
    pub momentum_lhs: f64,
    pub momentum_rhs: f64,
    pub saturation_product: f64,
    pub saturation_momentum: f64,
    /// Boltzmann weight of the highest level in the basis.
    pub top_weight: f64,
    pub holds_heisenberg: bool,
    pub holds_boltzmann: bool,
    pub holds_momentum: bool,
    pub truncated: bool,
}

/// Residuals of the spectral identities at one temperature.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TbSpectralReport {
    pub n_atoms: usize,
    pub zero_atom_mass: f64,
    pub total_p: f64,
    pub total_q: f64,
    pub detailed_balance_residual: f64,
    pub first_moment_residual: f64,
    pub second_moment_residual: f64,
    pub sum_rule_residual: f64,
    /// Against the sum rule of the model's own representation.
    pub sum_rule_basis_residual: f64,
    pub jensen_lhs: f64,
    pub jensen_rhs: f64,
    pub jensen_slack: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

struct Failure(TbStatus, String);

impl From<DomainError> for Failure {
    fn from(e: DomainError) -> Self {
        Failure(TbStatus::Domain, e.to_string())
    }
}

impl From<SpecfunError> for Failure {
    fn from(e: SpecfunError) -> Self {
        let status = match e {
            SpecfunError::Domain(_) => TbStatus::Domain,
            SpecfunError::NoConvergence { .. } => TbStatus::NoConvergence,
            SpecfunError::InvalidTolerance(_) => TbStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        let status = match e {
            ModelError::Eigen(EigenError::NoConvergence { .. }) => TbStatus::NoConvergence,
            ModelError::Eigen(EigenError::NonFinite) => TbStatus::Numerical,
            _ => TbStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<ThermoError> for Failure {
    fn from(e: ThermoError) -> Self {
        match e {
            ThermoError::Specfun(inner) => inner.into(),
            ThermoError::Model(inner) => inner.into(),
            ThermoError::RecastMismatch(_) => Failure(TbStatus::Violation, e.to_string()),
            ThermoError::NonFinite(_) => Failure(TbStatus::Numerical, e.to_string()),
            _ => Failure(TbStatus::InvalidArgument, e.to_string()),
        }
    }
}

impl From<SpectralError> for Failure {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Specfun(inner) => inner.into(),
            SpectralError::Thermo(inner) => inner.into(),
            SpectralError::Unpaired { .. } | SpectralError::Normalization { .. } => {
                Failure(TbStatus::Violation, e.to_string())
            }
            SpectralError::NonFinite(_) => Failure(TbStatus::Numerical, e.to_string()),
            SpectralError::ZeroSpread | SpectralError::InvalidTolerance(_) => {
                Failure(TbStatus::InvalidArgument, e.to_string())
            }
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(TbStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `body`, converting failures and panics into a status.
fn guard<T>(out: *mut T, body: impl FnOnce() -> Result<T, Failure>) -> TbStatus {
    if out.is_null() {
        set_error("output pointer is NULL".into());
        return TbStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(value)) => {
            // SAFETY: checked non-null above; the caller guarantees validity.
            unsafe { out.write(value) };
            TbStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal error".into());
            TbStatus::Panic
        }
    }
}

fn units_from(units: *const TbUnits) -> Result<UnitSystem, Failure> {
    // SAFETY: the caller passes NULL or a valid pointer.
    match unsafe { units.as_ref() } {
        None => Ok(UnitSystem::default()),
        Some(u) => Ok(UnitSystem::new(u.hbar, u.k_boltzmann)?),
    }
}

fn model_ref<'a>(model: *const TbModel) -> Result<&'a SpectralModel, Failure> {
    // SAFETY: the caller passes NULL or a live handle from a constructor.
    unsafe { model.as_ref() }.map(|m| &m.inner).ok_or_else(|| null("model"))
}

fn boxed(model: SpectralModel) -> *mut TbModel {
    Box::into_raw(Box::new(TbModel { inner: model }))
}

/// `g(x) = x tanh(x/2)` for `x >= 0`.
///
/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tb_g(x: f64, out: *mut f64) -> TbStatus {
    guard(out, || Ok(specfun::g(x)?))
}

/// Inverse of `g` on `[0, inf)`.
///
/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tb_g_inverse(y: f64, out: *mut f64) -> TbStatus {
    guard(out, || Ok(specfun::g_inverse(y, &ToleranceConfig::default())?))
}

/// `Gamma(x) = g^{-1}(x) / x` for `x > 0`.
///
/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tb_gamma(x: f64, out: *mut f64) -> TbStatus {
    guard(out, || Ok(specfun::gamma_factor(x)?))
}

/// `w(z) = g^{-1}(z) / sqrt(2z)` with `w(0) = 1`.
///
/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tb_w(z: f64, out: *mut f64) -> TbStatus {
    guard(out, || Ok(specfun::w(z)?))
}

/// Closed-form harmonic oscillator with `n_levels` levels.
///
/// # Safety
/// `units` must be NULL or valid; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tb_model_harmonic(
    mass: f64,
    omega0: f64,
    n_levels: usize,
    units: *const TbUnits,
    out: *mut *mut TbModel,
) -> TbStatus {
    guard(out, || {
        let units = units_from(units)?;
        Ok(boxed(analytic_harmonic_model(mass, omega0, n_levels, &units)?))
    })
}

/// Closed-form infinite square well of width `length`.
///
/// # Safety
/// `units` must be NULL or valid; `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tb_model_box(
    mass: f64,
    length: f64,
    n_levels: usize,
    units: *const TbUnits,
    out: *mut *mut TbModel,
) -> TbStatus {
    guard(out, || {
        let units = units_from(units)?;
        Ok(boxed(analytic_box_model(mass, length, n_levels, &units)?))
    })
}

/// Finite-difference model with `V(x) = sum_k coefficients[k] x^k` on
/// `n_points` interior points of `(x_min, x_max)` with hard walls.
///
/// # Safety
/// `coefficients` must point to `n_coefficients` doubles; `units` must be NULL
/// or valid; `out` must be NULL or valid for writes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn tb_model_grid_polynomial(
    mass: f64,
    x_min: f64,
    x_max: f64,
    n_points: usize,
    coefficients: *const f64,
    n_coefficients: usize,
    units: *const TbUnits,
    out: *mut *mut TbModel,
) -> TbStatus {
    guard(out, || {
        if coefficients.is_null() {
            return Err(null("coefficients"));
        }
        // SAFETY: non-null and, per the contract, `n_coefficients` long.
        let coefficients = unsafe { std::slice::from_raw_parts(coefficients, n_coefficients) }.to_vec();
        let units = units_from(units)?;
        let grid = GridSpec::new(x_min, x_max, n_points)?;
        let potential = PotentialSpec::Polynomial { coefficients };
        Ok(boxed(grid_model(&grid, &potential, mass, &units)?))
    })
}

/// Number of levels in the model's basis; 0 for NULL.
///
/// # Safety
/// `model` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tb_model_n_levels(model: *const TbModel) -> usize {
    model_ref(model).map(|m| m.n_levels()).unwrap_or(0)
}

/// Releases a model. NULL is ignored.
///
/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tb_model_free(model: *mut TbModel) {
    if !model.is_null() {
        // SAFETY: produced by `Box::into_raw` in a constructor.
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Thermal statistics and the three bounds at `temperature`.
///
/// # Safety
/// `model` must be NULL or a live handle; `out` must be NULL or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn tb_evaluate(model: *const TbModel, temperature: f64, out: *mut TbThermalReport) -> TbStatus {
    guard(out, || {
        let model = model_ref(model)?;
        let (_, s) = thermal_state(model, temperature)?;
        let b = evaluate_bounds(&s, &ToleranceConfig::default())?;
        Ok(TbThermalReport {
            temperature: s.temperature,
            beta: s.beta,
            delta_x: s.delta_x,
            delta_p: s.delta_p_current,
            delta_p_kinetic: s.delta_p_kinetic,
            lambda_th: s.lambda_th,
            ratio_r: s.ratio_r,
            z: s.z_arg,
            gamma: b.gamma,
            w: b.w,
            product_lhs: b.product_lhs,
            heisenberg_rhs: b.heisenberg_rhs,
            boltzmann_rhs: b.boltzmann_rhs,
            momentum_lhs: b.momentum_lhs,
            momentum_rhs: b.momentum_rhs,
            saturation_product: b.saturation_product,
            saturation_momentum: b.saturation_momentum,
            top_weight: s.top_weight,
            holds_heisenberg: b.holds_heisenberg,
            holds_boltzmann: b.holds_boltzmann,
            holds_momentum: b.holds_momentum,
            truncated: s.truncated,
        })
    })
}

/// Spectral measures and identity residuals at `temperature`.
///
/// # Safety
/// `model` must be NULL or a live handle; `out` must be NULL or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn tb_spectral(model: *const TbModel, temperature: f64, out: *mut TbSpectralReport) -> TbStatus {
    guard(out, || {
        let model = model_ref(model)?;
        let tol = ToleranceConfig::default();
        let (weights, _) = thermal_state(model, temperature)?;
        let a = analyze(model, &weights, None, &tol)?;
        Ok(TbSpectralReport {
            n_atoms: a.measure.atoms.len(),
            zero_atom_mass: a.measure.zero_atom_mass,
            total_p: a.moments.total_p,
            total_q: a.moments.total_q,
            detailed_balance_residual: a.balance.max_residual,
            first_moment_residual: a.moments.first_moment_residual,
            second_moment_residual: a.moments.second_moment_residual,
            sum_rule_residual: a.moments.trk_residual,
            sum_rule_basis_residual: a.moments.trk_basis_residual,
            jensen_lhs: a.jensen.lhs,
            jensen_rhs: a.jensen.rhs,
            jensen_slack: a.jensen.slack,
        })
    })
}

/// Message of the last failure on this thread, or NULL if none. The string
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tb_version() -> *const c_char {
    const VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}
