//! Sample-set membership tests, the minus-infinity thresholds, and the
//! uniform bounds on the gap between the two estimator families, together
//! with the audit that checks sampled data against those bounds.
//!
//! On the restricted sets the two estimators are tied together exactly:
//! in the high case through the identity
//! `(K-1)/N * gamma/(1-gamma) = alpha * zeta/(1-zeta)`, in the low case
//! through `|P - T/K^2| <= 2/(K-1)` pushed through the inverse of `m^2`.

use crate::equation::{m_prime, solve_m, EquationError};
use crate::estimators::{
    estimate_gamma, estimate_zeta, Band, EstimateError, EstimateValue, IntervalKind, Regime,
    RegimeIntervals,
};
use crate::math;
use crate::model::{GroupSpec, ModelSpec};
use crate::sampler::SampleMatrix;
use crate::stats::{compute_p, compute_t, StatsError};
use alloc::vec::Vec;
use core::fmt;

/// Parameters of the restricted sample sets: the range constant `b` and the
/// band edges the intervals were built with.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquivalenceConfig {
    pub b: f64,
    pub b1: f64,
    pub b2: f64,
}

/// Membership flags of one sample for one group.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SetMembership {
    /// `P <= -1/N`: the pair estimator is minus infinity.
    pub in_a: bool,
    /// `T <= K (1 - alpha)`: the sum estimator is minus infinity.
    pub in_a_prime: bool,
    /// `P` above `-b/((1+b) N)` and in the high band.
    pub in_b: bool,
    /// `T` above `K (1 + (1-alpha) b)/(1+b)` and in the high band.
    pub in_b_prime: bool,
    /// `B` and `B'` jointly: the high-case audit set.
    pub in_h: bool,
    /// `P` within `[m(b2)^2, m(b)^2]`.
    pub in_d: bool,
    /// `T` within `K^2 [m(b2)^2, m(b)^2]`.
    pub in_d_prime: bool,
    /// `D` and `D'` jointly: the low-case audit set.
    pub in_l: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AuditError {
    /// `alpha` must lie strictly inside `(0, 1)` for the set definitions.
    AlphaOutOfRange { group: usize, alpha: f64 },
    /// High case needs `b > 0`; low case needs `b > b2`.
    BadRangeConstant { b: f64 },
    Stats(StatsError),
    Estimate(EstimateError),
    Equation(EquationError),
}

impl fmt::Display for AuditError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuditError::AlphaOutOfRange { group, alpha } => {
                write!(f, "alpha for group {group} must be in (0,1), got {alpha}")
            }
            AuditError::BadRangeConstant { b } => write!(f, "range constant b = {b} inadmissible"),
            AuditError::Stats(e) => write!(f, "{e}"),
            AuditError::Estimate(e) => write!(f, "{e}"),
            AuditError::Equation(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for AuditError {}

impl From<StatsError> for AuditError {
    fn from(e: StatsError) -> Self {
        AuditError::Stats(e)
    }
}

impl From<EstimateError> for AuditError {
    fn from(e: EstimateError) -> Self {
        AuditError::Estimate(e)
    }
}

impl From<EquationError> for AuditError {
    fn from(e: EquationError) -> Self {
        AuditError::Equation(e)
    }
}

fn m_squared(beta: f64) -> Result<f64, EquationError> {
    if beta <= 1.0 {
        Ok(0.0)
    } else {
        let m = solve_m(beta)?;
        Ok(m * m)
    }
}

/// Classify one sample into the restricted sets, per group.
pub fn classify_sample(
    sample: &SampleMatrix,
    pair_intervals: &RegimeIntervals,
    sum_intervals: &RegimeIntervals,
    cfg: &EquivalenceConfig,
    spec: &ModelSpec,
) -> Result<Vec<SetMembership>, AuditError> {
    debug_assert_eq!(pair_intervals.kind, IntervalKind::PairScale);
    debug_assert_eq!(sum_intervals.kind, IntervalKind::SumScale);
    let p = compute_p(sample)?;
    let t = compute_t(sample)?;
    let m_b2_sq = m_squared(cfg.b2)?;
    let m_b_sq = m_squared(cfg.b)?;

    let mut out = Vec::with_capacity(spec.group_count());
    for (g, group) in spec.groups().iter().enumerate() {
        let alpha = sum_intervals.groups[g].alpha;
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(AuditError::AlphaOutOfRange { group: g, alpha });
        }
        let n = f64::from(group.n_pop);
        let k = f64::from(group.k_obs);
        let pv = p.value(g);
        let tv = t.value(g);

        let in_a = pv <= -1.0 / n;
        let in_a_prime = tv <= k * (1.0 - alpha);
        let in_b =
            pv > -cfg.b / ((1.0 + cfg.b) * n) && pair_intervals.band(g, pv) == Band::High;
        let in_b_prime = tv > k * (1.0 + (1.0 - alpha) * cfg.b) / (1.0 + cfg.b)
            && sum_intervals.band(g, tv) == Band::High;
        let in_d = pv >= m_b2_sq && pv <= m_b_sq;
        let in_d_prime = tv >= k * k * m_b2_sq && tv <= k * k * m_b_sq;

        out.push(SetMembership {
            in_a,
            in_a_prime,
            in_b,
            in_b_prime,
            in_h: in_b && in_b_prime,
            in_d,
            in_d_prime,
            in_l: in_d && in_d_prime,
        });
    }
    Ok(out)
}

/// The `T` thresholds at or below which each estimator returns minus
/// infinity: `(K (1 - alpha), K (1 - (K-1)/N))` for `(zeta, gamma)`.
///
/// The gap between them is the marginal band where exactly one of the two
/// estimators degenerates; it closes as `K/N` approaches `alpha`.
pub fn minus_infinity_thresholds(group: &GroupSpec, alpha: f64) -> (f64, f64) {
    let n = f64::from(group.n_pop);
    let k = f64::from(group.k_obs);
    (k * (1.0 - alpha), k * (1.0 - (k - 1.0) / n))
}

/// Minimum of `m'` over `[lo, hi]` on a 1024-point grid with local
/// refinement around the coarse minimum.
fn min_m_prime(lo: f64, hi: f64) -> Result<f64, EquationError> {
    const GRID: usize = 1024;
    let mut best = f64::INFINITY;
    let mut best_x = lo;
    for i in 0..=GRID {
        let x = lo + (hi - lo) * i as f64 / GRID as f64;
        let v = m_prime(x)?;
        if v < best {
            best = v;
            best_x = x;
        }
    }
    // Refine around the coarse argmin.
    let step = (hi - lo) / GRID as f64;
    let a = (best_x - step).max(lo);
    let c = (best_x + step).min(hi);
    for i in 0..=32 {
        let x = a + (c - a) * i as f64 / 32.0;
        let v = m_prime(x)?;
        if v < best {
            best = v;
        }
    }
    Ok(best)
}

/// Uniform upper bound for `|gamma - zeta|` over the restricted set of the
/// given regime.
///
/// High: `(1/alpha) (1+b)^2 b1/(1-b1) |alpha - K/N + 1/N|`.
/// Low: `(1 / min m') * 1/(2 m(b2)) * 2/(K-1)`, with the minimum of `m'`
/// taken over `[b2, b]`.
pub fn equivalence_bound(
    group: &GroupSpec,
    cfg: &EquivalenceConfig,
    regime: Regime,
    alpha: f64,
) -> Result<f64, AuditError> {
    match regime {
        Regime::High => {
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(cfg.b > 0.0) {
                return Err(AuditError::BadRangeConstant { b: cfg.b });
            }
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(AuditError::AlphaOutOfRange { group: 0, alpha });
            }
            let n = f64::from(group.n_pop);
            let k = f64::from(group.k_obs);
            let mismatch = math::abs(alpha - k / n + 1.0 / n);
            Ok((1.0 / alpha) * (1.0 + cfg.b) * (1.0 + cfg.b) * cfg.b1 / (1.0 - cfg.b1) * mismatch)
        }
        Regime::Low => {
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(cfg.b > cfg.b2) {
                return Err(AuditError::BadRangeConstant { b: cfg.b });
            }
            let k = f64::from(group.k_obs);
            let c = 1.0 / min_m_prime(cfg.b2, cfg.b)?;
            let m_b2 = solve_m(cfg.b2)?;
            Ok(c / (2.0 * m_b2) * 2.0 / (k - 1.0))
        }
    }
}

/// One audited defect: the gap between the estimators exceeded the bound (or
/// an exact relation failed) for this sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditViolation {
    pub sample_index: usize,
    pub group: usize,
    pub gap: f64,
    pub bound: f64,
}

/// Audit summary for one group.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupAudit {
    pub n_samples: usize,
    /// Samples in `A` and `A'` where both estimators must be minus infinity.
    pub n_minus_inf: usize,
    /// Samples in the regime's audit set (`H` or `L`).
    pub n_in_set: usize,
    pub bound: f64,
    pub max_gap: f64,
    pub violations: Vec<AuditViolation>,
    /// `T` band where exactly one estimator degenerates to minus infinity.
    pub marginal_band: (f64, f64),
    /// Largest observed `|P - T/K^2|` over samples with `T` in the low band,
    /// against its bound `2/(K-1)`.
    pub max_msq_gap: f64,
    pub msq_bound: f64,
    pub n_low_band: usize,
    /// Largest relative deviation of the high-case exact identity
    /// `(K-1)/N * gamma/(1-gamma) = alpha * zeta/(1-zeta)` over `H`.
    pub max_identity_dev: f64,
}

/// Full audit output.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport {
    pub regime: Regime,
    pub b: f64,
    pub groups: Vec<GroupAudit>,
}

impl AuditReport {
    pub fn total_violations(&self) -> usize {
        self.groups.iter().map(|g| g.violations.len()).sum()
    }
}

/// Check every sample against the equivalence claims of its regime.
///
/// For samples in `A` and `A'` both estimators must be minus infinity; for
/// samples in `H` (high) or `L` (low) the gap `|gamma - zeta|` must not
/// exceed [`equivalence_bound`]; on `L` additionally `gamma < zeta` strictly
/// (unanimous samples cannot lie in `L` for finite `b`); and for every
/// sample whose `T` lands in the low band, `|P - T/K^2| <= 2/(K-1)`.
pub fn audit_equivalence(
    samples: &[SampleMatrix],
    pair_intervals: &RegimeIntervals,
    sum_intervals: &RegimeIntervals,
    cfg: &EquivalenceConfig,
    spec: &ModelSpec,
    regime: Regime,
) -> Result<AuditReport, AuditError> {
    let mut groups: Vec<GroupAudit> = spec
        .groups()
        .iter()
        .enumerate()
        .map(|(g, group)| {
            let alpha = sum_intervals.groups[g].alpha;
            let (zeta_thr, gamma_thr) = minus_infinity_thresholds(group, alpha);
            Ok(GroupAudit {
                n_samples: samples.len(),
                n_minus_inf: 0,
                n_in_set: 0,
                bound: equivalence_bound(group, cfg, regime, alpha)?,
                max_gap: 0.0,
                violations: Vec::new(),
                marginal_band: if zeta_thr <= gamma_thr {
                    (zeta_thr, gamma_thr)
                } else {
                    (gamma_thr, zeta_thr)
                },
                max_msq_gap: 0.0,
                msq_bound: 2.0 / (f64::from(group.k_obs) - 1.0),
                n_low_band: 0,
                max_identity_dev: 0.0,
            })
        })
        .collect::<Result<_, AuditError>>()?;

    for (idx, sample) in samples.iter().enumerate() {
        let membership = classify_sample(sample, pair_intervals, sum_intervals, cfg, spec)?;
        let p = compute_p(sample)?;
        let t = compute_t(sample)?;
        let gammas = estimate_gamma(&p, pair_intervals, spec)?;
        let zetas = estimate_zeta(&t, sum_intervals, spec)?;

        for (g, group) in spec.groups().iter().enumerate() {
            let audit = &mut groups[g];
            let mem = membership[g];
            let k = f64::from(group.k_obs);
            let n = f64::from(group.n_pop);
            let alpha = sum_intervals.groups[g].alpha;

            if mem.in_a && mem.in_a_prime {
                audit.n_minus_inf += 1;
                let both_minus = gammas[g].value == EstimateValue::MinusInfinity
                    && zetas[g].value == EstimateValue::MinusInfinity;
                if !both_minus {
                    audit.violations.push(AuditViolation {
                        sample_index: idx,
                        group: g,
                        gap: f64::INFINITY,
                        bound: 0.0,
                    });
                }
            }

            let in_set = match regime {
                Regime::High => mem.in_h,
                Regime::Low => mem.in_l,
            };
            if in_set {
                audit.n_in_set += 1;
                match (gammas[g].value.finite(), zetas[g].value.finite()) {
                    (Some(gv), Some(zv)) => {
                        let gap = math::abs(gv - zv);
                        if gap > audit.max_gap {
                            audit.max_gap = gap;
                        }
                        let mut violated = gap > audit.bound;
                        match regime {
                            Regime::High => {
                                // Exact identity linking the two formulas.
                                let lhs = (k - 1.0) / n * gv / (1.0 - gv);
                                let rhs = alpha * zv / (1.0 - zv);
                                let dev = math::abs(lhs - rhs)
                                    / math::abs(lhs).max(math::abs(rhs)).max(1e-300);
                                if dev > audit.max_identity_dev {
                                    audit.max_identity_dev = dev;
                                }
                                if dev > 1e-10 {
                                    violated = true;
                                }
                            }
                            Regime::Low => {
                                // Strict order unless unanimous; unanimity
                                // is outside L for finite b. Negated so NaN
                                // counts as a violation.
                                #[allow(clippy::neg_cmp_op_on_partial_ord)]
                                if !(gv < zv) {
                                    violated = true;
                                }
                            }
                        }
                        if violated {
                            audit.violations.push(AuditViolation {
                                sample_index: idx,
                                group: g,
                                gap,
                                bound: audit.bound,
                            });
                        }
                    }
                    _ => {
                        // Membership in H or L guarantees finite values.
                        audit.violations.push(AuditViolation {
                            sample_index: idx,
                            group: g,
                            gap: f64::INFINITY,
                            bound: audit.bound,
                        });
                    }
                }
            }

            if sum_intervals.band(g, t.value(g)) == Band::Low {
                audit.n_low_band += 1;
                let msq_gap = math::abs(p.value(g) - t.value(g) / (k * k));
                if msq_gap > audit.max_msq_gap {
                    audit.max_msq_gap = msq_gap;
                }
                if msq_gap > audit.msq_bound {
                    audit.violations.push(AuditViolation {
                        sample_index: idx,
                        group: g,
                        gap: msq_gap,
                        bound: audit.msq_bound,
                    });
                }
            }
        }
    }

    Ok(AuditReport {
        regime,
        b: cfg.b,
        groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::{build_intervals, IntervalConstants};
    use crate::model::{GroupSpec, ModelSpec};
    use crate::sampler::{sample_subset, SampleMatrix, SamplerConfig};

    const TEST_CONSTANTS: IntervalConstants = IntervalConstants {
        c_high: 1.0,
        c_low: 0.05,
        d_high: 1.0,
        d_low: 0.05,
    };

    fn unanimous(k: usize, n_obs: usize) -> SampleMatrix {
        SampleMatrix::from_blocks(n_obs, alloc::vec![(k, alloc::vec![1i8; k * n_obs])]).unwrap()
    }

    fn balanced(k: usize, n_obs: usize) -> SampleMatrix {
        let mut row = alloc::vec![1i8; k];
        for e in row.iter_mut().skip(k / 2) {
            *e = -1;
        }
        let data: Vec<i8> = core::iter::repeat_n(row, n_obs).flatten().collect();
        SampleMatrix::from_blocks(n_obs, alloc::vec![(k, data)]).unwrap()
    }

    fn setup(beta: f64, n: u32, k: u32) -> (ModelSpec, RegimeIntervals, RegimeIntervals) {
        let spec = ModelSpec::single(GroupSpec::new(beta, n, k).unwrap());
        let pair = build_intervals(&spec, 0.8, 1.35, &TEST_CONSTANTS, IntervalKind::PairScale, None)
            .unwrap();
        let sum = build_intervals(&spec, 0.8, 1.35, &TEST_CONSTANTS, IntervalKind::SumScale, None)
            .unwrap();
        (spec, pair, sum)
    }

    #[test]
    fn unanimous_sample_is_outside_d_for_finite_b() {
        // P = 1 > m(b)^2 for any finite b.
        let (spec, pair, sum) = setup(1.5, 40, 20);
        let cfg = EquivalenceConfig {
            b: 2.0,
            b1: 0.8,
            b2: 1.35,
        };
        let m = classify_sample(&unanimous(20, 10), &pair, &sum, &cfg, &spec).unwrap();
        assert!(!m[0].in_d);
        assert!(!m[0].in_l);
    }

    #[test]
    fn balanced_sample_hits_both_minus_infinity_sets() {
        // T = 0 (K even): in A' always; P = -1/(K-1) <= -1/N whenever
        // K - 1 <= N: in A.
        let (spec, pair, sum) = setup(0.5, 40, 20);
        let cfg = EquivalenceConfig {
            b: 1.0,
            b1: 0.8,
            b2: 1.35,
        };
        let m = classify_sample(&balanced(20, 10), &pair, &sum, &cfg, &spec).unwrap();
        assert!(m[0].in_a);
        assert!(m[0].in_a_prime);
        assert!(!m[0].in_h);
    }

    #[test]
    fn h_membership_implies_b_membership() {
        let (spec, pair, sum) = setup(0.5, 40, 20);
        let cfg = EquivalenceConfig {
            b: 1.0,
            b1: 0.8,
            b2: 1.35,
        };
        for seed in 0..50 {
            let s = sample_subset(&spec.groups()[0], 64, &SamplerConfig::new(seed, 0));
            let m = classify_sample(&s, &pair, &sum, &cfg, &spec).unwrap();
            if m[0].in_h {
                assert!(m[0].in_b && m[0].in_b_prime);
            }
            if m[0].in_l {
                assert!(m[0].in_d && m[0].in_d_prime);
            }
        }
    }

    #[test]
    fn thresholds_match_hand_values() {
        let g = GroupSpec::new(0.5, 100, 50).unwrap();
        let (z, ga) = minus_infinity_thresholds(&g, 0.5);
        assert!((z - 25.0).abs() < 1e-12);
        assert!((ga - 25.5).abs() < 1e-12);

        // K = N (alpha = 1): zeta threshold 0, gamma threshold K/N * K = ...
        let g = GroupSpec::new(0.5, 50, 50).unwrap();
        let (z, ga) = minus_infinity_thresholds(&g, 1.0);
        assert_eq!(z, 0.0);
        assert!((ga - 50.0 * (1.0 - 49.0 / 50.0)).abs() < 1e-12);

        // alpha = (K-1)/N: the two thresholds coincide.
        let g = GroupSpec::new(0.5, 100, 50).unwrap();
        let (z, ga) = minus_infinity_thresholds(&g, 49.0 / 100.0);
        assert!((z - ga).abs() < 1e-12);
    }

    #[test]
    fn high_bound_vanishes_when_alpha_matches() {
        let g = GroupSpec::new(0.5, 100, 50).unwrap();
        let cfg = EquivalenceConfig {
            b: 1.0,
            b1: 0.8,
            b2: 1.35,
        };
        // alpha = K/N - 1/N kills the mismatch factor.
        let bound = equivalence_bound(&g, &cfg, Regime::High, 49.0 / 100.0).unwrap();
        assert!(bound.abs() < 1e-14);

        // b1 = 0 kills the bound for any alpha.
        let cfg0 = EquivalenceConfig {
            b: 1.0,
            b1: 0.0,
            b2: 1.35,
        };
        let bound = equivalence_bound(&g, &cfg0, Regime::High, 0.37).unwrap();
        assert_eq!(bound, 0.0);
    }

    #[test]
    fn low_bound_assembles_from_m_and_m_prime() {
        let g = GroupSpec::new(1.5, 200, 100).unwrap();
        let cfg = EquivalenceConfig {
            b: 2.0,
            b1: 0.8,
            b2: 1.2,
        };
        let bound = equivalence_bound(&g, &cfg, Regime::Low, 0.5).unwrap();
        // m' decreases over [1.2, 2]; the minimum sits at the right endpoint.
        let c = 1.0 / m_prime(2.0).unwrap();
        let expected = c / (2.0 * solve_m(1.2).unwrap()) * 2.0 / 99.0;
        assert!(
            (bound - expected).abs() < 1e-9 * expected,
            "bound={bound} expected={expected}"
        );
    }

    #[test]
    fn low_bound_requires_b_above_b2() {
        let g = GroupSpec::new(1.5, 200, 100).unwrap();
        let cfg = EquivalenceConfig {
            b: 1.1,
            b1: 0.8,
            b2: 1.2,
        };
        assert!(matches!(
            equivalence_bound(&g, &cfg, Regime::Low, 0.5).unwrap_err(),
            AuditError::BadRangeConstant { .. }
        ));
    }

    #[test]
    fn audit_high_case_has_no_violations() {
        let (spec, pair, sum) = setup(0.5, 100, 50);
        let cfg = EquivalenceConfig {
            b: 1.0,
            b1: 0.8,
            b2: 1.35,
        };
        let samples: Vec<SampleMatrix> = (0..200)
            .map(|i| sample_subset(&spec.groups()[0], 64, &SamplerConfig::new(1000 + i, 0)))
            .collect();
        let report =
            audit_equivalence(&samples, &pair, &sum, &cfg, &spec, Regime::High).unwrap();
        assert_eq!(report.total_violations(), 0);
        assert!(report.groups[0].n_in_set > 150, "H captured {} of 200", report.groups[0].n_in_set);
        assert!(report.groups[0].max_gap <= report.groups[0].bound);
    }

    #[test]
    fn audit_low_case_has_no_violations_and_orders_estimators() {
        let (spec, pair, sum) = setup(1.5, 100, 50);
        let cfg = EquivalenceConfig {
            b: 2.0,
            b1: 0.8,
            b2: 1.35,
        };
        let samples: Vec<SampleMatrix> = (0..200)
            .map(|i| sample_subset(&spec.groups()[0], 64, &SamplerConfig::new(2000 + i, 0)))
            .collect();
        let report = audit_equivalence(&samples, &pair, &sum, &cfg, &spec, Regime::Low).unwrap();
        assert_eq!(report.total_violations(), 0);
        assert!(report.groups[0].n_in_set > 150);
        assert!(report.groups[0].max_msq_gap <= report.groups[0].msq_bound);
    }

    #[test]
    fn audit_flags_forced_minus_infinity_disagreement() {
        // A balanced sample lies in A and A' and both estimators must be
        // minus infinity; the audit must accept it with gap zero.
        let (spec, pair, sum) = setup(0.5, 100, 50);
        let cfg = EquivalenceConfig {
            b: 1.0,
            b1: 0.8,
            b2: 1.35,
        };
        let samples = alloc::vec![balanced(50, 10)];
        let report =
            audit_equivalence(&samples, &pair, &sum, &cfg, &spec, Regime::High).unwrap();
        assert_eq!(report.groups[0].n_minus_inf, 1);
        assert_eq!(report.total_violations(), 0);
        assert_eq!(report.groups[0].max_gap, 0.0);
    }
}
