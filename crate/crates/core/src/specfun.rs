//! The special functions behind the Boltzmann bound.
//!
//! * `g(x) = x tanh(x/2)` on `[0, inf)`,
//! * its inverse `g_inverse`,
//! * `gamma_factor(x) = g_inverse(x) / x`, the factor by which the Boltzmann
//!   bound exceeds `hbar/2`,
//! * `w(z) = g_inverse(z) / sqrt(2z)`, which must stay `>= 1` for the
//!   momentum / thermal-wavelength inequality to follow.
//!
//! All functions are pure; none of them hold state.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Above this argument `tanh(x/2)` is 1 to machine precision and the inverse
/// is taken from its asymptotic expansion.
const LARGE_ARGUMENT: f64 = 700.0;

/// Floor used in the relative residual test so that `y` near zero still has a
/// meaningful absolute tolerance.
const TINY: f64 = 1e-300;

/// Knobs for the inverse solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    /// Relative residual accepted for `|g(x) - y| / y`.
    pub rel_tol: f64,
    /// Cap on bracket-expansion plus Newton/bisection steps.
    pub max_iter: usize,
    /// Below this argument the near-zero series is used.
    pub series_threshold: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-14,
            max_iter: 200,
            series_threshold: 1e-8,
        }
    }
}

impl ToleranceConfig {
    pub fn new(rel_tol: f64, max_iter: usize, series_threshold: f64) -> Result<Self, SpecfunError> {
        let tol = Self {
            rel_tol,
            max_iter,
            series_threshold,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<(), SpecfunError> {
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(SpecfunError::InvalidTolerance(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if self.max_iter < 8 {
            return Err(SpecfunError::InvalidTolerance(format!(
                "max_iter must be at least 8, got {}",
                self.max_iter
            )));
        }
        if !(self.series_threshold > 0.0 && self.series_threshold <= 1e-4) {
            return Err(SpecfunError::InvalidTolerance(format!(
                "series_threshold must lie in (0, 1e-4], got {}",
                self.series_threshold
            )));
        }
        Ok(())
    }
}

/// Argument outside `[0, inf)` or not finite.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("{function_name}: argument {argument} is outside the domain")]
pub struct DomainError {
    pub function_name: &'static str,
    pub argument: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecfunError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("g_inverse({argument}) did not converge within {max_iter} iterations")]
    NoConvergence { argument: f64, max_iter: usize },
    #[error("invalid tolerance configuration: {0}")]
    InvalidTolerance(String),
}

fn check_nonnegative(function_name: &'static str, x: f64) -> Result<(), DomainError> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(DomainError {
            function_name,
            argument: x,
        })
    }
}

#[inline]
fn g_unchecked(x: f64) -> f64 {
    x * (0.5 * x).tanh()
}

/// `g'(x) = tanh(x/2) + (x/2) sech^2(x/2)`, written with `exp(-x)` so large
/// arguments cannot overflow.
#[inline]
fn g_prime(x: f64) -> f64 {
    let e = (-x).exp();
    let sech2 = 4.0 * e / ((1.0 + e) * (1.0 + e));
    (0.5 * x).tanh() + 0.5 * x * sech2
}

/// `g(x) = x tanh(x/2)`.
pub fn g(x: f64) -> Result<f64, DomainError> {
    check_nonnegative("g", x)?;
    Ok(g_unchecked(x))
}

/// Inverse of [`g`] on `[0, inf)`.
///
/// Safeguarded Newton iteration inside a bisection bracket. The lower end of
/// the bracket is `max(y, sqrt(2y))`, which follows from `g(x) <= min(x, x^2/2)`;
/// the upper end starts four units above and doubles its width until it
/// brackets the root.
pub fn g_inverse(y: f64, tol: &ToleranceConfig) -> Result<f64, SpecfunError> {
    check_nonnegative("g_inverse", y)?;
    if y == 0.0 {
        return Ok(0.0);
    }
    if y < tol.series_threshold {
        // g(x) = x^2/2 - x^4/24 + O(x^6)
        return Ok((2.0 * y).sqrt() * (1.0 + y / 12.0));
    }
    if y > LARGE_ARGUMENT {
        // g(x) = x - 2x e^{-x} + O(x e^{-2x})
        return Ok(y + 2.0 * y * (-y).exp());
    }

    let target = tol.rel_tol * y.max(TINY);
    let mut lo = y.max((2.0 * y).sqrt());
    let mut width = 4.0;
    let mut hi = lo + width;
    let mut iter = 0;
    while g_unchecked(hi) < y {
        lo = hi;
        width *= 2.0;
        hi = lo + width;
        iter += 1;
        if iter >= tol.max_iter {
            return Err(SpecfunError::NoConvergence {
                argument: y,
                max_iter: tol.max_iter,
            });
        }
    }

    let mut x = lo;
    while iter < tol.max_iter {
        iter += 1;
        let f = g_unchecked(x) - y;
        if f.abs() <= target {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - f / g_prime(x);
        x = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(SpecfunError::NoConvergence {
        argument: y,
        max_iter: tol.max_iter,
    })
}

/// `Gamma(x) = g_inverse(x) / x` with default tolerances.
pub fn gamma_factor(x: f64) -> Result<f64, SpecfunError> {
    gamma_factor_with(x, &ToleranceConfig::default())
}

/// `Gamma(x) = g_inverse(x) / x`. Rejects `x = 0`, where the factor diverges
/// like `sqrt(2/x)`.
pub fn gamma_factor_with(x: f64, tol: &ToleranceConfig) -> Result<f64, SpecfunError> {
    if !(x.is_finite() && x > 0.0) {
        return Err(DomainError {
            function_name: "gamma_factor",
            argument: x,
        }
        .into());
    }
    Ok(g_inverse(x, tol)? / x)
}

/// `w(z) = g_inverse(z) / sqrt(2z)` with default tolerances.
pub fn w(z: f64) -> Result<f64, SpecfunError> {
    w_with(z, &ToleranceConfig::default())
}

/// `w(z) = g_inverse(z) / sqrt(2z)`, continued by `w(0) = 1`.
pub fn w_with(z: f64, tol: &ToleranceConfig) -> Result<f64, SpecfunError> {
    check_nonnegative("w", z)?;
    if z == 0.0 {
        return Ok(1.0);
    }
    Ok(g_inverse(z, tol)? / (2.0 * z).sqrt())
}

/// `ln(Gamma(x) - 1)`.
///
/// Since `Gamma(x) = coth(k/2)` with `k = g_inverse(x)`, the excess over one is
/// `2 / (e^k - 1)`. Past `x ~ 37` that excess is below half an ulp of 1 and
/// `gamma_factor` rounds to exactly 1; the logarithm stays finite for every
/// admissible `x`, which is what makes `Gamma > 1` checkable there.
pub fn gamma_excess_ln(x: f64, tol: &ToleranceConfig) -> Result<f64, SpecfunError> {
    if !(x.is_finite() && x > 0.0) {
        return Err(DomainError {
            function_name: "gamma_excess_ln",
            argument: x,
        }
        .into());
    }
    let k = g_inverse(x, tol)?;
    Ok(std::f64::consts::LN_2 - k - (-(-k).exp_m1()).ln())
}

/// `(g_inverse(y))^2`, the convex function in the Jensen step.
pub fn g_inverse_squared(y: f64, tol: &ToleranceConfig) -> Result<f64, SpecfunError> {
    let k = g_inverse(y, tol)?;
    Ok(k * k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn g_examples() {
        assert_eq!(g(0.0).unwrap(), 0.0);
        assert!(rel(g(2.0).unwrap(), 1.5231883119115297) < 1e-15);
        assert!(rel(g(1.0).unwrap(), 0.46211715726000974) < 1e-15);
    }

    #[test]
    fn g_rejects_bad_arguments() {
        for bad in [-1.0, -1e-300, f64::NAN, f64::INFINITY] {
            let err = g(bad).unwrap_err();
            assert_eq!(err.function_name, "g");
        }
    }

    #[test]
    fn g_inverse_examples() {
        let tol = ToleranceConfig::default();
        assert_eq!(g_inverse(0.0, &tol).unwrap(), 0.0);
        let x = g_inverse(1.5231883119115297, &tol).unwrap();
        assert!((x - 2.0).abs() <= 2.0 * tol.rel_tol * 2.0, "x = {x}");
        let small = g_inverse(1e-12, &tol).unwrap();
        assert!(rel(small, 1.414213562373095e-06) < 1e-12);
    }

    #[test]
    fn g_inverse_domain_and_convergence_errors() {
        let tol = ToleranceConfig::default();
        assert!(matches!(g_inverse(-0.5, &tol), Err(SpecfunError::Domain(_))));
        assert!(matches!(g_inverse(f64::NAN, &tol), Err(SpecfunError::Domain(_))));
        // A tolerance below the rounding floor of g can only be met when g
        // happens to hit y exactly.
        let impossible = ToleranceConfig {
            rel_tol: 1e-30,
            max_iter: 16,
            series_threshold: 1e-8,
        };
        let mut failures = 0;
        for i in 1..100 {
            let y = 0.37 * i as f64;
            match g_inverse(y, &impossible) {
                Ok(x) => assert_eq!(g(x).unwrap(), y),
                Err(SpecfunError::NoConvergence { argument, max_iter }) => {
                    assert_eq!((argument, max_iter), (y, 16));
                    failures += 1;
                }
                Err(e) => panic!("unexpected {e}"),
            }
        }
        assert!(failures > 0);
    }

    #[test]
    fn tolerance_validation() {
        assert!(ToleranceConfig::new(1e-14, 200, 1e-8).is_ok());
        assert!(ToleranceConfig::new(0.0, 200, 1e-8).is_err());
        assert!(ToleranceConfig::new(1e-14, 7, 1e-8).is_err());
        assert!(ToleranceConfig::new(1e-14, 8, 1e-3).is_err());
        assert!(ToleranceConfig::new(1e-14, 8, 0.0).is_err());
    }

    #[test]
    fn series_branch_matches_solver_at_threshold() {
        let tol = ToleranceConfig::default();
        let y = tol.series_threshold;
        let series = g_inverse(y * (1.0 - 1e-12), &tol).unwrap();
        let solved = g_inverse(y * (1.0 + 1e-12), &tol).unwrap();
        assert!(rel(series, solved) < 1e-11);
    }

    #[test]
    fn large_branch_is_continuous() {
        let tol = ToleranceConfig::default();
        let below = g_inverse(LARGE_ARGUMENT * (1.0 - 1e-15), &tol).unwrap();
        let above = g_inverse(LARGE_ARGUMENT * (1.0 + 1e-15), &tol).unwrap();
        assert!(rel(below, above) < 1e-14);
    }

    #[test]
    fn gamma_examples() {
        // g_inverse(g(1)) = 1, so Gamma(g(1)) = 1/tanh(0.5).
        assert!(rel(gamma_factor(0.46211715726000974).unwrap(), 2.163953413738653) < 1e-13);
        let near_zero = gamma_factor(1e-8).unwrap();
        assert!(rel(near_zero, 14142.13562373095) < 1e-3);
        assert!((gamma_factor(100.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(gamma_factor(0.0).is_err());
        assert!(gamma_factor(-2.0).is_err());
    }

    #[test]
    fn w_examples() {
        assert_eq!(w(0.0).unwrap(), 1.0);
        assert!(rel(w(50.0).unwrap(), 5.0) < 1e-10);
        assert!(rel(w(0.46211715726000974).unwrap(), 1.040181093305068) < 1e-13);
        assert!(w(-1.0).is_err());
    }

    #[test]
    fn bound_chain_holds() {
        let tol = ToleranceConfig::default();
        let mut worst_upper_slack = f64::INFINITY;
        for i in 1..=2000 {
            let x = 100.0 * i as f64 / 2000.0;
            let k = g_inverse(x, &tol).unwrap();
            assert!(k >= x.max((2.0 * x).sqrt()) * (1.0 - 1e-15), "x = {x}");
            worst_upper_slack = worst_upper_slack.min(x + 2.0 - k);
        }
        assert!(worst_upper_slack > 0.0, "slack {worst_upper_slack}");
    }

    #[test]
    fn w_is_at_least_one_and_nondecreasing_on_fine_grid() {
        let mut prev = w(0.0).unwrap();
        for i in 1..=10_000 {
            let z = 50.0 * i as f64 / 10_000.0;
            let cur = w(z).unwrap();
            assert!(cur >= 1.0);
            assert!(cur >= prev, "w decreased at z = {z}");
            prev = cur;
        }
    }

    proptest! {
        #[test]
        fn round_trip(log_y in -6.0f64..3.0) {
            let y = 10f64.powf(log_y);
            let x = g_inverse(y, &ToleranceConfig::default()).unwrap();
            prop_assert!(rel(g(x).unwrap(), y) <= 1e-12);
        }

        #[test]
        fn monotone(a in 0.0f64..100.0, b in 0.0f64..100.0) {
            prop_assume!(b - a > 1e-9);
            let tol = ToleranceConfig::default();
            let (ga, gb) = (g(a).unwrap(), g(b).unwrap());
            prop_assert!(ga < gb);
            prop_assert!(g_inverse(ga, &tol).unwrap() < g_inverse(gb, &tol).unwrap());
        }

        #[test]
        fn gamma_exceeds_one(log_x in -8.0f64..3.0) {
            let x = 10f64.powf(log_x);
            let gamma = gamma_factor(x).unwrap();
            prop_assert!(gamma >= 1.0);
            let excess = gamma_excess_ln(x, &ToleranceConfig::default()).unwrap();
            prop_assert!(excess.is_finite());
            if x < 10.0 {
                prop_assert!(gamma > 1.0);
                prop_assert!(rel(excess.exp(), gamma - 1.0) < 1e-6);
            }
        }
    }
}
