//! The Curie-Weiss equation `tanh(beta * x) = x`: largest solution `m(beta)`,
//! its derivative, and its inverse.
//!
//! `m(beta)` is the spontaneous magnetization: zero for `beta <= 1`, strictly
//! increasing on `(1, oo)` with limit 1. The solver brackets the positive
//! root and bisects, then polishes with two Newton steps; Newton alone can
//! escape the basin just above the critical point.

use crate::math;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EquationError {
    /// `solve_m` requires `beta >= 1`; `m_prime` requires `beta > 1`.
    BetaOutOfRange { beta: f64, minimum: f64 },
    /// The derivative's denominator `1 - beta (1 - m^2)` lost all precision;
    /// `m'` diverges as `beta` approaches 1 from above.
    DerivativeAtCriticality { beta: f64 },
    /// `m_inverse` requires `y` strictly inside `(0, 1)`.
    InverseDomain { y: f64 },
}

impl fmt::Display for EquationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EquationError::BetaOutOfRange { beta, minimum } => {
                write!(f, "beta = {beta} is below the admissible minimum {minimum}")
            }
            EquationError::DerivativeAtCriticality { beta } => {
                write!(f, "derivative of m diverges at criticality (beta = {beta})")
            }
            EquationError::InverseDomain { y } => {
                write!(f, "m_inverse needs y in (0, 1), got {y}")
            }
        }
    }
}

impl core::error::Error for EquationError {}

/// Largest solution of `tanh(beta * x) = x`, to absolute accuracy ~1e-15.
///
/// Returns 0 at `beta = 1` (the only root) and an error for `beta < 1`,
/// where the largest root is 0 but callers on the low-temperature branch
/// have no business asking.
pub fn solve_m(beta: f64) -> Result<f64, EquationError> {
    // Negated comparison so that NaN is rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(beta >= 1.0) {
        return Err(EquationError::BetaOutOfRange { beta, minimum: 1.0 });
    }
    if beta == 1.0 {
        return Ok(0.0);
    }
    if beta.is_infinite() {
        return Ok(1.0);
    }

    let g = |x: f64| math::tanh(beta * x) - x;

    // For beta > 1 the positive root lies in (0, 1): g > 0 just right of 0,
    // g(1) = tanh(beta) - 1 < 0.
    let mut lo = 1e-12;
    let mut hi = 1.0 - 1e-12;
    if g(lo) <= 0.0 {
        // beta is so close to 1 that the root is below 1e-12.
        return Ok(0.0);
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Two Newton polish steps; keep the bisection value if a step leaves
    // (0, 1]. For beta beyond ~19 the root saturates to 1.0 in f64.
    let mut x = 0.5 * (lo + hi);
    for _ in 0..2 {
        let t = math::tanh(beta * x);
        let deriv = beta * (1.0 - t * t) - 1.0;
        if deriv == 0.0 {
            break;
        }
        let next = x - (t - x) / deriv;
        if next.is_finite() && next > 0.0 && next <= 1.0 {
            x = next;
        }
    }
    Ok(x)
}

/// Derivative `m'(beta) = m (1 - m^2) / (1 - beta (1 - m^2))` for `beta > 1`,
/// obtained by implicit differentiation of the Curie-Weiss equation.
///
/// The derivative diverges as `beta` drops to 1; once the denominator is no
/// longer resolvable (non-positive in floating point) an error is returned.
/// Within roughly `beta - 1 < 1e-6` the returned value is a large number of
/// limited relative accuracy.
pub fn m_prime(beta: f64) -> Result<f64, EquationError> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(beta > 1.0) {
        return Err(EquationError::BetaOutOfRange { beta, minimum: 1.0 });
    }
    let m = solve_m(beta)?;
    let sech2 = 1.0 - m * m;
    let denom = 1.0 - beta * sech2;
    if denom <= 0.0 {
        return Err(EquationError::DerivativeAtCriticality { beta });
    }
    Ok(m * sech2 / denom)
}

/// Inverse of `m`: the `beta > 1` with `m(beta) = y`, in closed form
/// `artanh(y) / y`.
pub fn m_inverse(y: f64) -> Result<f64, EquationError> {
    if !(y > 0.0 && y < 1.0) {
        return Err(EquationError::InverseDomain { y });
    }
    Ok(math::atanh(y) / y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math;

    /// Independent root oracle: plain bisection of tanh(beta x) = x on
    /// [1e-9, 1], no Newton involvement.
    fn bisect_m(beta: f64) -> f64 {
        let g = |x: f64| math::tanh(beta * x) - x;
        let (mut lo, mut hi) = (1e-9, 1.0);
        assert!(g(lo) > 0.0 && g(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn m_at_one_is_zero() {
        assert_eq!(solve_m(1.0).unwrap(), 0.0);
    }

    #[test]
    fn m_below_one_is_error() {
        assert!(solve_m(0.999).is_err());
        assert!(m_prime(1.0).is_err());
        assert!(m_prime(0.5).is_err());
    }

    #[test]
    fn m_approaches_one_for_large_beta() {
        let m = solve_m(50.0).unwrap();
        assert!((1.0 - m).abs() < 1e-10, "m(50) = {m}");
    }

    #[test]
    fn m_at_two_matches_bisection_oracle() {
        let m = solve_m(2.0).unwrap();
        assert!((m - bisect_m(2.0)).abs() < 1e-12);
        assert!((m - 0.957504).abs() < 1e-6, "m(2) = {m}");
    }

    #[test]
    fn m_is_strictly_increasing() {
        // Strict below the f64 saturation region (m rounds to 1.0 for
        // beta beyond ~19).
        let betas = [1.0001, 1.01, 1.1, 1.5, 2.0, 3.0, 5.0, 8.0, 12.0];
        let mut prev = 0.0;
        for &b in &betas {
            let m = solve_m(b).unwrap();
            assert!(m > prev, "m({b}) = {m} not above {prev}");
            prev = m;
        }
    }

    #[test]
    fn residual_is_tiny_across_range() {
        let mut beta = 1.000001;
        while beta < 40.0 {
            let m = solve_m(beta).unwrap();
            assert!(
                (math::tanh(beta * m) - m).abs() < 1e-12,
                "residual at beta={beta}"
            );
            beta *= 1.37;
        }
    }

    #[test]
    fn m_prime_matches_central_differences() {
        // Finite-difference oracle over [1.1, 10]. The tolerance carries an
        // absolute rounding floor: the difference quotient cannot resolve
        // below ~ulp(m)/h, which dominates once m' is exponentially small.
        let mut beta = 1.1;
        while beta <= 10.0 {
            let h = 1e-6 * beta;
            let fd = (solve_m(beta + h).unwrap() - solve_m(beta - h).unwrap()) / (2.0 * h);
            let closed = m_prime(beta).unwrap();
            let noise_floor = 4.0 * 2.2e-16 / (2.0 * h);
            assert!(
                (closed - fd).abs() <= 1e-6 * fd.abs() + noise_floor,
                "beta={beta}: closed={closed} fd={fd}"
            );
            beta += 0.37;
        }
    }

    #[test]
    fn m_prime_at_two_matches_finite_differences() {
        // The finite-difference oracle pins the value; h = 1e-6.
        let h = 1e-6;
        let fd = (solve_m(2.0 + h).unwrap() - solve_m(2.0 - h).unwrap()) / (2.0 * h);
        let closed = m_prime(2.0).unwrap();
        assert!((closed - fd).abs() < 1e-6 * fd);
        // Frozen from the oracle above.
        assert!((closed - 0.0955).abs() < 1e-4, "m'(2) = {closed}");
    }

    #[test]
    fn m_prime_just_above_criticality_errors_or_blows_up() {
        match m_prime(1.0 + 1e-9) {
            Err(EquationError::DerivativeAtCriticality { .. }) => {}
            Ok(v) => assert!(v > 1e3, "derivative should be enormous, got {v}"),
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn m_inverse_closed_form_values() {
        let y = math::tanh(1.0);
        let b = m_inverse(y).unwrap();
        assert!((b - 1.0 / math::tanh(1.0)).abs() < 1e-12);
        assert!((b - 1.313035).abs() < 1e-6);

        // y -> 0+ tends to 1
        assert!((m_inverse(1e-8).unwrap() - 1.0).abs() < 1e-12);

        // round-trip with the solver
        let b2 = m_inverse(solve_m(2.0).unwrap()).unwrap();
        assert!((b2 - 2.0).abs() < 1e-10);
    }

    #[test]
    fn m_inverse_rejects_out_of_domain() {
        for y in [-0.5, 0.0, 1.0, 1.5] {
            assert!(m_inverse(y).is_err(), "y={y}");
        }
    }

    #[test]
    fn inverse_round_trip_in_m_space() {
        // solve_m(m_inverse(y)) = y to 1e-10, across the whole range of y
        // reachable from beta in [1.05, 10]. This direction is well
        // conditioned everywhere.
        let mut beta = 1.05;
        while beta <= 10.0 {
            let y = solve_m(beta).unwrap();
            let back = solve_m(m_inverse(y).unwrap()).unwrap();
            assert!((back - y).abs() < 1e-10, "y={y} back={back}");
            beta += 0.05;
        }
    }

    #[test]
    fn inverse_round_trip_in_beta_space() {
        // m_inverse(solve_m(beta)) = beta to 1e-10 relative. Restricted to
        // beta <= 7.5: beyond that the map m -> beta amplifies a half-ulp
        // error in m by 1/(1 - m^2) ~ e^{2 beta}/4, pushing the best
        // attainable f64 round-trip past 1e-10.
        let mut beta = 1.05;
        while beta <= 7.5 {
            let back = m_inverse(solve_m(beta).unwrap()).unwrap();
            assert!(
                (back - beta).abs() < 1e-10 * beta,
                "beta={beta} back={back}"
            );
            beta += 0.05;
        }
    }
}
