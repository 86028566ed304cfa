//! Exact kernel and estimators for the multi-group Curie-Weiss voting model.
//!
//! A population of `N` binary voters with coupling `beta` votes according to
//! the Gibbs measure with density proportional to `exp(beta * S^2 / (2N))`,
//! where `S` is the voting margin (yes-votes minus no-votes). This crate
//! provides, per group:
//!
//! * the magnetization-sector decomposition of the partition function and
//!   exact finite-`N` moments of `S` and of the subset sum `Sigma` over the
//!   first `K` observed votes ([`partition`], [`moments`]),
//! * the Curie-Weiss equation solver `m(beta)`, its derivative, and its
//!   inverse ([`equation`]),
//! * exact seeded sampling of full and subset vote configurations
//!   ([`sampler`]),
//! * the sample statistics `P` (pair correlation) and `T` (mean squared
//!   subset sum) ([`stats`]),
//! * the interval-classified estimator families `gamma` and `zeta` for the
//!   coupling, their finite-`N` targets, and asymptotic variances
//!   ([`estimators`]),
//! * membership tests and uniform gap bounds for the estimator-equivalence
//!   audit ([`equivalence`]).
//!
//! The crate is `no_std` (requires `alloc`); all floating-point transcendental
//! calls go through [`libm`] so results are identical across platforms.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod equation;
pub mod equivalence;
pub mod estimators;
pub mod math;
pub mod model;
pub mod moments;
pub mod partition;
pub mod sampler;
pub mod stats;

pub use equation::{m_inverse, m_prime, solve_m, EquationError};
pub use equivalence::{
    audit_equivalence, classify_sample, equivalence_bound, minus_infinity_thresholds, AuditError,
    AuditReport, AuditViolation, EquivalenceConfig, GroupAudit, SetMembership,
};
pub use estimators::{
    asymptotic_variance_gamma, asymptotic_variance_zeta, build_intervals, calibrate_constants,
    compute_targets, compute_targets_with_bands, confidence_interval, estimate_gamma,
    estimate_zeta, variance_limit_high,
    Band, CalibrationGrid, EstimateError, EstimateResult, EstimateValue, GroupIntervals,
    IntervalConstants, IntervalError, IntervalKind, Regime, RegimeIntervals, RegimeLabel,
    TargetParams,
};
pub use model::{GroupSpec, ModelError, ModelSpec};
pub use moments::{
    exact_moments, exact_moments_with_budget, ml_condition_solve, ExactMoments, MlSolveError,
    MomentsError, DEFAULT_MOMENT_BUDGET,
};
pub use partition::MagnetizationDistribution;
pub use sampler::{
    sample_full, sample_multigroup, sample_subset, GroupSampler, SampleError, SampleMatrix,
    SamplerConfig,
};
pub use stats::{compute_p, compute_t, GroupStatistic, StatisticKind, StatisticVector, StatsError};
