//! Regime intervals, the coupling estimators `gamma` (pair correlation) and
//! `zeta` (maximum-likelihood condition), their finite-`N` targets, and the
//! asymptotic variance formulas.
//!
//! Interval boundary conventions, applied verbatim to both scales:
//!
//! | band      | pair scale (statistic `P`)        | sum scale (statistic `T`)            |
//! |-----------|-----------------------------------|--------------------------------------|
//! | high      | `[-1, j_h_upper]` (right-closed)  | `[min Range(Sigma^2), j_h_upper]`    |
//! | critical  | `(j_h_upper, j_l_lower)` (open)   | `(j_h_upper, j_l_lower)` (open)      |
//! | low       | `[j_l_lower, 1]` (left-closed)    | `[j_l_lower, oo)` (left-closed)      |
//!
//! with `j_h_upper = b1/((1-b1) N) + C_high (ln N / N)^2` and
//! `j_l_lower = m(b2)^2 - C_low (ln N)^{3/2} / sqrt(N)` on the pair scale,
//! and `j_h_upper = (1-(1-alpha) b1)/(1-b1) K + D_high sqrt(K)`,
//! `j_l_lower = m(b2)^2 K^2 - D_low (ln N)^{3/2}/sqrt(N) K^2` on the sum
//! scale. Construction fails when the separation condition
//! `j_h_upper < j_l_lower` does not hold at the given `N`, `K`; it holds for
//! all large enough `N` but not for every `N`.

use crate::equation::{m_inverse, m_prime, solve_m, EquationError};
use crate::math;
use crate::model::{GroupSpec, ModelSpec};
use crate::moments::{exact_moments, MomentsError};
use crate::stats::{StatisticKind, StatisticVector};
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalKind {
    /// Intervals on the pair-correlation statistic `P`.
    PairScale,
    /// Intervals on the squared-sum statistic `T`.
    SumScale,
}

/// Width constants of the interval boundaries.
///
/// The defaults were produced by [`calibrate_constants`] on its default
/// grid (exact moments, `N <= 400`): the maximum observed ratio of
/// approximation error to bound shape, rounded up to two significant digits.
/// Regenerate with the `calibrate-constants` CLI subcommand.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntervalConstants {
    pub c_high: f64,
    pub c_low: f64,
    pub d_high: f64,
    pub d_low: f64,
}

impl Default for IntervalConstants {
    fn default() -> Self {
        Self {
            c_high: 78.0,
            c_low: 0.089,
            d_high: 140.0,
            d_low: 0.19,
        }
    }
}

/// Boundaries for one group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupIntervals {
    pub j_h_upper: f64,
    pub j_l_lower: f64,
    /// Left end of the high band: -1 on the pair scale, `min Range(Sigma^2)`
    /// (0 for even `K`, 1 for odd) on the sum scale.
    pub low_end: f64,
    /// Observed fraction used by the sum-scale formulas; defaults to `K/N`.
    pub alpha: f64,
}

/// Interval system of one kind for every group of a model.
#[derive(Clone, Debug, PartialEq)]
pub struct RegimeIntervals {
    pub kind: IntervalKind,
    pub b1: f64,
    pub b2: f64,
    pub m_b2_sq: f64,
    pub constants: IntervalConstants,
    pub groups: Vec<GroupIntervals>,
}

/// Classification of a statistic value against one group's bands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Band {
    High,
    Critical,
    Low,
}

impl RegimeIntervals {
    #[inline]
    pub fn band(&self, group: usize, value: f64) -> Band {
        let g = &self.groups[group];
        if value <= g.j_h_upper {
            Band::High
        } else if value >= g.j_l_lower {
            Band::Low
        } else {
            Band::Critical
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IntervalError {
    /// Requires `0 <= b1 < 1 < b2`.
    BadBands { b1: f64, b2: f64 },
    BadAlpha { group: usize, alpha: f64 },
    /// The separation condition failed: high-band upper bound `lhs` did not
    /// stay below low-band lower bound `rhs` at this `N`, `K`.
    SeparationViolated { group: usize, lhs: f64, rhs: f64 },
    Equation(EquationError),
}

impl fmt::Display for IntervalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntervalError::BadBands { b1, b2 } => {
                write!(f, "need 0 <= b1 < 1 < b2, got b1={b1}, b2={b2}")
            }
            IntervalError::BadAlpha { group, alpha } => {
                write!(f, "alpha for group {group} must lie in [0,1], got {alpha}")
            }
            IntervalError::SeparationViolated { group, lhs, rhs } => write!(
                f,
                "separation violated for group {group}: high bound {lhs} not below low bound {rhs}"
            ),
            IntervalError::Equation(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for IntervalError {}

impl From<EquationError> for IntervalError {
    fn from(e: EquationError) -> Self {
        IntervalError::Equation(e)
    }
}

/// Construct the interval system for every group, failing with a diagnostic
/// when the separation condition is violated.
///
/// `alpha_override` substitutes the observed fraction used on the sum scale;
/// by default it is `K/N` per group.
pub fn build_intervals(
    spec: &ModelSpec,
    b1: f64,
    b2: f64,
    constants: &IntervalConstants,
    kind: IntervalKind,
    alpha_override: Option<&[f64]>,
) -> Result<RegimeIntervals, IntervalError> {
    // Negated comparison so a NaN b2 is rejected too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(0.0..1.0).contains(&b1) || !(b2 > 1.0) {
        return Err(IntervalError::BadBands { b1, b2 });
    }
    let m_b2 = solve_m(b2)?;
    let m_b2_sq = m_b2 * m_b2;

    let mut groups = Vec::with_capacity(spec.group_count());
    for (g, group) in spec.groups().iter().enumerate() {
        let n = f64::from(group.n_pop);
        let k = f64::from(group.k_obs);
        let alpha = match alpha_override {
            Some(a) => a[g],
            None => group.alpha_finite(),
        };
        if !(0.0..=1.0).contains(&alpha) {
            return Err(IntervalError::BadAlpha { group: g, alpha });
        }
        let ln_n = math::ln(n);
        let low_defect = math::powf(ln_n, 1.5) / math::sqrt(n);

        let (j_h_upper, j_l_lower, low_end) = match kind {
            IntervalKind::PairScale => (
                b1 / ((1.0 - b1) * n) + constants.c_high * (ln_n / n) * (ln_n / n),
                m_b2_sq - constants.c_low * low_defect,
                -1.0,
            ),
            IntervalKind::SumScale => (
                (1.0 - (1.0 - alpha) * b1) / (1.0 - b1) * k + constants.d_high * math::sqrt(k),
                m_b2_sq * k * k - constants.d_low * low_defect * k * k,
                if group.k_obs % 2 == 0 { 0.0 } else { 1.0 },
            ),
        };
        // Negated so non-finite boundaries also fail the check.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(j_h_upper < j_l_lower) {
            return Err(IntervalError::SeparationViolated {
                group: g,
                lhs: j_h_upper,
                rhs: j_l_lower,
            });
        }
        groups.push(GroupIntervals {
            j_h_upper,
            j_l_lower,
            low_end,
            alpha,
        });
    }

    Ok(RegimeIntervals {
        kind,
        b1,
        b2,
        m_b2_sq,
        constants: *constants,
        groups,
    })
}

/// Estimator outcome for one group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EstimateValue {
    Finite(f64),
    /// The statistic fell at or below the minus-infinity threshold.
    MinusInfinity,
    /// Unanimous sample in the low band; `m(beta) = 1` only at `beta = oo`.
    PlusInfinity,
    /// Statistic in the critical band: insufficient evidence that the
    /// coupling differs from 1.
    Undecided,
    /// `alpha = 0` in the high band: the statistic carries no information
    /// about the coupling and the formula degenerates to the constant 1.
    NoInformation,
}

impl EstimateValue {
    #[inline]
    pub fn finite(&self) -> Option<f64> {
        match self {
            EstimateValue::Finite(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegimeLabel {
    High,
    Undecided,
    Low,
    MinusInfinity,
}

/// Per-group estimate with optional inference annotations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateResult {
    pub value: EstimateValue,
    pub regime: RegimeLabel,
    pub target: Option<f64>,
    pub variance: Option<f64>,
    pub ci95: Option<(f64, f64)>,
}

impl EstimateResult {
    fn bare(value: EstimateValue, regime: RegimeLabel) -> Self {
        Self {
            value,
            regime,
            target: None,
            variance: None,
            ci95: None,
        }
    }
}

/// True-parameter regime, decided against the `I` bands `[0, b1]` and
/// `[b2, oo)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    High,
    Low,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EstimateError {
    /// Statistic kind does not match the interval scale.
    WrongStatistic { expected: IntervalKind },
    GroupCountMismatch,
    ShapeMismatch { group: usize },
    /// True beta lies in the critical band `(b1, b2)` (or is negative), so
    /// no target is defined.
    BetaOutsideBands { group: usize, beta: f64 },
    /// An exact moment fell outside the invertible range of the defining
    /// identity.
    RangeError { group: usize, moment: f64 },
    /// Pair-based quantities need at least two voters/observed votes.
    PairUndefined { group: usize },
    /// High-regime zeta variance is undefined at alpha = 0.
    AlphaZeroHigh { group: usize },
    Moments(MomentsError),
    Equation(EquationError),
}

impl fmt::Display for EstimateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimateError::WrongStatistic { expected } => {
                write!(f, "statistic does not match interval scale {expected:?}")
            }
            EstimateError::GroupCountMismatch => write!(f, "group counts do not match"),
            EstimateError::ShapeMismatch { group } => {
                write!(f, "statistic shape does not match model for group {group}")
            }
            EstimateError::BetaOutsideBands { group, beta } => write!(
                f,
                "true beta {beta} of group {group} lies outside the high/low bands"
            ),
            EstimateError::RangeError { group, moment } => write!(
                f,
                "moment {moment} for group {group} outside the invertible range"
            ),
            EstimateError::PairUndefined { group } => {
                write!(f, "pair correlation undefined for group {group}")
            }
            EstimateError::AlphaZeroHigh { group } => write!(
                f,
                "high-regime zeta variance undefined at alpha = 0 (group {group})"
            ),
            EstimateError::Moments(e) => write!(f, "{e}"),
            EstimateError::Equation(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for EstimateError {}

impl From<MomentsError> for EstimateError {
    fn from(e: MomentsError) -> Self {
        EstimateError::Moments(e)
    }
}

impl From<EquationError> for EstimateError {
    fn from(e: EquationError) -> Self {
        EstimateError::Equation(e)
    }
}

fn check_match(
    stats: &StatisticVector,
    intervals: &RegimeIntervals,
    spec: &ModelSpec,
    expected_kind: StatisticKind,
    expected_scale: IntervalKind,
) -> Result<(), EstimateError> {
    if intervals.kind != expected_scale {
        return Err(EstimateError::WrongStatistic {
            expected: expected_scale,
        });
    }
    if stats.len() != spec.group_count() || intervals.groups.len() != spec.group_count() {
        return Err(EstimateError::GroupCountMismatch);
    }
    for (g, (stat, group)) in stats.groups.iter().zip(spec.groups()).enumerate() {
        if stat.kind != expected_kind || stat.k_obs != group.k_obs as usize {
            return Err(EstimateError::ShapeMismatch { group: g });
        }
    }
    Ok(())
}

/// Pair-correlation estimator: invert the finite-`N` pair-correlation
/// approximation on the band the statistic falls in.
pub fn estimate_gamma(
    p: &StatisticVector,
    intervals: &RegimeIntervals,
    spec: &ModelSpec,
) -> Result<Vec<EstimateResult>, EstimateError> {
    check_match(
        p,
        intervals,
        spec,
        StatisticKind::PairCorrelation,
        IntervalKind::PairScale,
    )?;

    let mut out = Vec::with_capacity(spec.group_count());
    for (g, group) in spec.groups().iter().enumerate() {
        let n = f64::from(group.n_pop);
        let value = p.value(g);
        let result = match intervals.band(g, value) {
            Band::High => {
                if value > -1.0 / n {
                    EstimateResult::bare(
                        EstimateValue::Finite(n * value / (n * value + 1.0)),
                        RegimeLabel::High,
                    )
                } else {
                    EstimateResult::bare(EstimateValue::MinusInfinity, RegimeLabel::MinusInfinity)
                }
            }
            Band::Low => {
                if value >= 1.0 {
                    EstimateResult::bare(EstimateValue::PlusInfinity, RegimeLabel::Low)
                } else {
                    // Separation guarantees value > j_h_upper >= 0 here.
                    EstimateResult::bare(
                        EstimateValue::Finite(m_inverse(math::sqrt(value))?),
                        RegimeLabel::Low,
                    )
                }
            }
            Band::Critical => {
                EstimateResult::bare(EstimateValue::Undecided, RegimeLabel::Undecided)
            }
        };
        out.push(result);
    }
    Ok(out)
}

/// Maximum-likelihood-condition estimator: invert the asymptotic formula for
/// `E Sigma^2` on the band the statistic falls in.
///
/// In the high band the value branch requires `T > K (1 - alpha)`, which
/// keeps the denominator `K (1 - alpha) - T` strictly negative; at or below
/// the threshold the estimate is minus infinity.
pub fn estimate_zeta(
    t: &StatisticVector,
    intervals: &RegimeIntervals,
    spec: &ModelSpec,
) -> Result<Vec<EstimateResult>, EstimateError> {
    check_match(
        t,
        intervals,
        spec,
        StatisticKind::SquaredSum,
        IntervalKind::SumScale,
    )?;

    let mut out = Vec::with_capacity(spec.group_count());
    for (g, group) in spec.groups().iter().enumerate() {
        let k = f64::from(group.k_obs);
        let alpha = intervals.groups[g].alpha;
        let value = t.value(g);
        let result = match intervals.band(g, value) {
            Band::High => {
                if value <= k * (1.0 - alpha) {
                    EstimateResult::bare(EstimateValue::MinusInfinity, RegimeLabel::MinusInfinity)
                } else if alpha == 0.0 {
                    // The formula collapses to the constant 1; no estimator.
                    EstimateResult::bare(EstimateValue::NoInformation, RegimeLabel::High)
                } else {
                    EstimateResult::bare(
                        EstimateValue::Finite((k - value) / (k * (1.0 - alpha) - value)),
                        RegimeLabel::High,
                    )
                }
            }
            Band::Low => {
                if value >= k * k {
                    EstimateResult::bare(EstimateValue::PlusInfinity, RegimeLabel::Low)
                } else {
                    EstimateResult::bare(
                        EstimateValue::Finite(m_inverse(math::sqrt(value) / k)?),
                        RegimeLabel::Low,
                    )
                }
            }
            Band::Critical => {
                EstimateResult::bare(EstimateValue::Undecided, RegimeLabel::Undecided)
            }
        };
        out.push(result);
    }
    Ok(out)
}

/// Finite-`N` target parameters: the values that make the asymptotic
/// formulas exact at this `N`, computed from exact moments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TargetParams {
    pub regime: Regime,
    pub gamma_tilde: f64,
    pub zeta_tilde: f64,
}

/// Solve the defining identities of the targets for every group. The true
/// coupling of each group must lie in `[0, b1]` or `[b2, oo)`.
pub fn compute_targets(
    spec: &ModelSpec,
    pair_intervals: &RegimeIntervals,
    sum_intervals: &RegimeIntervals,
) -> Result<Vec<TargetParams>, EstimateError> {
    debug_assert_eq!(pair_intervals.kind, IntervalKind::PairScale);
    debug_assert_eq!(sum_intervals.kind, IntervalKind::SumScale);
    let alphas: Vec<f64> = sum_intervals.groups.iter().map(|g| g.alpha).collect();
    compute_targets_with_bands(spec, pair_intervals.b1, pair_intervals.b2, &alphas)
}

/// Targets from the band edges directly. The targets are defined by their
/// identities alone, so they exist even at population sizes where the
/// separation condition (and hence interval construction) fails.
pub fn compute_targets_with_bands(
    spec: &ModelSpec,
    b1: f64,
    b2: f64,
    alphas: &[f64],
) -> Result<Vec<TargetParams>, EstimateError> {
    let mut out = Vec::with_capacity(spec.group_count());
    for (g, group) in spec.groups().iter().enumerate() {
        let regime = if (0.0..=b1).contains(&group.beta) {
            Regime::High
        } else if group.beta >= b2 {
            Regime::Low
        } else {
            return Err(EstimateError::BetaOutsideBands {
                group: g,
                beta: group.beta,
            });
        };

        let n = f64::from(group.n_pop);
        let k = f64::from(group.k_obs);
        let alpha = alphas[g];
        let moments = exact_moments(group.n_pop, group.k_obs, group.beta, 1)?;
        let e_pair = moments
            .pair_correlation()
            .ok_or(EstimateError::PairUndefined { group: g })?;
        let e_sigma2 = moments.sigma_moment(1);

        let (gamma_tilde, zeta_tilde) = match regime {
            Regime::High => {
                if e_pair <= -1.0 / n || e_pair >= 1.0 {
                    return Err(EstimateError::RangeError {
                        group: g,
                        moment: e_pair,
                    });
                }
                let gamma = n * e_pair / (n * e_pair + 1.0);
                let denom = e_sigma2 - (1.0 - alpha) * k;
                if denom <= 0.0 {
                    return Err(EstimateError::RangeError {
                        group: g,
                        moment: e_sigma2,
                    });
                }
                (gamma, (e_sigma2 - k) / denom)
            }
            Regime::Low => {
                if e_pair <= 0.0 || e_pair >= 1.0 {
                    return Err(EstimateError::RangeError {
                        group: g,
                        moment: e_pair,
                    });
                }
                let ratio = math::sqrt(e_sigma2) / k;
                if ratio <= 0.0 || ratio >= 1.0 {
                    return Err(EstimateError::RangeError {
                        group: g,
                        moment: e_sigma2,
                    });
                }
                (m_inverse(math::sqrt(e_pair))?, m_inverse(ratio)?)
            }
        };
        out.push(TargetParams {
            regime,
            gamma_tilde,
            zeta_tilde,
        });
    }
    Ok(out)
}

/// Diagonal entry of the gamma estimator's asymptotic covariance.
///
/// High regime: `(1 - gamma~)^4 (N/(K-1))^2 Var(Sigma^2/K)`.
/// Low regime: `(K/(K-1))^2 Var((Sigma/K)^2) / (2 m(gamma~) m'(gamma~))^2`.
/// The delta-method factor is evaluated at the finite-`N` target, which is
/// where the inverse map is actually linearized; it tends to the true
/// coupling as `N` grows.
pub fn asymptotic_variance_gamma(
    group: &GroupSpec,
    regime: Regime,
    target_gamma: f64,
) -> Result<f64, EstimateError> {
    if group.k_obs < 2 {
        return Err(EstimateError::PairUndefined { group: 0 });
    }
    let n = f64::from(group.n_pop);
    let k = f64::from(group.k_obs);
    let moments = exact_moments(group.n_pop, group.k_obs, group.beta, 2)?;
    match regime {
        Regime::High => {
            let shrink_sq = (1.0 - target_gamma) * (1.0 - target_gamma);
            let scale = n / (k - 1.0);
            Ok(shrink_sq * shrink_sq * scale * scale * moments.var_sigma2_over_k())
        }
        Regime::Low => {
            let m = solve_m(target_gamma)?;
            let mp = m_prime(target_gamma)?;
            let scale = k / (k - 1.0);
            Ok(scale * scale * moments.var_sigma_over_k_sq() / (2.0 * m * mp) / (2.0 * m * mp))
        }
    }
}

/// Diagonal entry of the zeta estimator's asymptotic covariance.
///
/// High regime: `(1 - zeta~)^4 (N/(K-1))^2 Var(Sigma^2/K)`; requires
/// `alpha > 0`. Low regime: `Var((Sigma/K)^2) / (2 m(zeta~) m'(zeta~))^2`,
/// with the delta-method factor at the finite-`N` target as in
/// [`asymptotic_variance_gamma`].
pub fn asymptotic_variance_zeta(
    group: &GroupSpec,
    regime: Regime,
    target_zeta: f64,
    alpha: f64,
) -> Result<f64, EstimateError> {
    if group.k_obs < 2 {
        return Err(EstimateError::PairUndefined { group: 0 });
    }
    let n = f64::from(group.n_pop);
    let k = f64::from(group.k_obs);
    let moments = exact_moments(group.n_pop, group.k_obs, group.beta, 2)?;
    match regime {
        Regime::High => {
            if alpha == 0.0 {
                return Err(EstimateError::AlphaZeroHigh { group: 0 });
            }
            let shrink_sq = (1.0 - target_zeta) * (1.0 - target_zeta);
            let scale = n / (k - 1.0);
            Ok(shrink_sq * shrink_sq * scale * scale * moments.var_sigma2_over_k())
        }
        Regime::Low => {
            let m = solve_m(target_zeta)?;
            let mp = m_prime(target_zeta)?;
            Ok(moments.var_sigma_over_k_sq() / (2.0 * m * mp) / (2.0 * m * mp))
        }
    }
}

/// Large-`N` limit of the high-regime variance (both estimator families):
/// `2 (1-beta)^2 (1-(1-alpha) beta)^2 / alpha^2`.
pub fn variance_limit_high(beta: f64, alpha: f64) -> f64 {
    let a = 1.0 - beta;
    let b = 1.0 - (1.0 - alpha) * beta;
    2.0 * a * a * b * b / (alpha * alpha)
}

/// Two-sided normal confidence interval around a finite estimate.
pub fn confidence_interval(value: f64, variance: f64, n_obs: usize, level: f64) -> (f64, f64) {
    let z = math::normal_quantile(0.5 + level / 2.0);
    let half = z * math::sqrt(variance / n_obs as f64);
    (value - half, value + half)
}

/// Sweep specification for [`calibrate_constants`].
#[derive(Clone, Debug)]
pub struct CalibrationGrid {
    pub n_values: Vec<u32>,
    pub betas_high: Vec<f64>,
    pub betas_low: Vec<f64>,
    pub alphas: Vec<f64>,
}

impl Default for CalibrationGrid {
    fn default() -> Self {
        Self {
            n_values: alloc::vec![25, 50, 100, 200, 400],
            betas_high: alloc::vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95],
            betas_low: alloc::vec![1.05, 1.1, 1.2, 1.35, 1.5, 1.75, 2.0, 2.5, 3.0],
            alphas: alloc::vec![0.25, 0.5, 0.75, 1.0],
        }
    }
}

/// Calibrate the interval constants as the maximum observed ratio of exact
/// approximation error to bound shape over the grid.
///
/// The theory guarantees such constants exist but supplies no numbers;
/// honest interval widths have to be measured.
pub fn calibrate_constants(grid: &CalibrationGrid) -> Result<IntervalConstants, EstimateError> {
    let mut c_high = 0.0f64;
    let mut c_low = 0.0f64;
    let mut d_high = 0.0f64;
    let mut d_low = 0.0f64;

    for &n in &grid.n_values {
        let nf = f64::from(n);
        let ln_n = math::ln(nf);
        let shape_pair_high = (ln_n / nf) * (ln_n / nf);
        let shape_low = math::powf(ln_n, 1.5) / math::sqrt(nf);

        for &beta in &grid.betas_high {
            let e_pair = exact_moments(n, 1, beta, 1)?
                .pair_correlation()
                .ok_or(EstimateError::PairUndefined { group: 0 })?;
            let asym = beta / (1.0 - beta) / nf;
            c_high = c_high.max(math::abs(e_pair - asym) / shape_pair_high);
        }
        for &beta in &grid.betas_low {
            let e_pair = exact_moments(n, 1, beta, 1)?
                .pair_correlation()
                .ok_or(EstimateError::PairUndefined { group: 0 })?;
            let m = solve_m(beta)?;
            c_low = c_low.max(math::abs(e_pair - m * m) / shape_low);
        }

        for &alpha in &grid.alphas {
            let k = ((alpha * nf) as u32).clamp(1, n);
            let kf = f64::from(k);
            let alpha_f = kf / nf;
            for &beta in &grid.betas_high {
                let e_sig2 = exact_moments(n, k, beta, 1)?.sigma_moment(1);
                let asym = (1.0 - (1.0 - alpha_f) * beta) / (1.0 - beta);
                d_high = d_high.max(math::abs(e_sig2 / kf - asym) * math::sqrt(kf));
            }
            for &beta in &grid.betas_low {
                let e_sig2 = exact_moments(n, k, beta, 1)?.sigma_moment(1);
                let m = solve_m(beta)?;
                d_low = d_low.max(math::abs(e_sig2 / (kf * kf) - m * m) / shape_low);
            }
        }
    }

    Ok(IntervalConstants {
        c_high,
        c_low,
        d_high,
        d_low,
    })
}
