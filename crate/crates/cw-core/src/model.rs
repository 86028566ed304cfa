//! Model parameters: per-group population size, coupling, and observation
//! scheme.

use alloc::vec::Vec;
use core::fmt;

/// One voting group: `n_pop` voters with coupling `beta`, of which the first
/// `k_obs` are observed.
///
/// `beta` may be any real; negative couplings are admitted so that the
/// estimator range (which extends below zero) can be exercised. The three
/// physical regimes are `beta < 1` (high temperature), `beta = 1` (critical),
/// `beta > 1` (low temperature).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupSpec {
    pub beta: f64,
    pub n_pop: u32,
    pub k_obs: u32,
}

impl GroupSpec {
    pub fn new(beta: f64, n_pop: u32, k_obs: u32) -> Result<Self, ModelError> {
        if n_pop == 0 {
            return Err(ModelError::EmptyPopulation);
        }
        if k_obs == 0 || k_obs > n_pop {
            return Err(ModelError::BadObservationCount { n_pop, k_obs });
        }
        if !beta.is_finite() {
            return Err(ModelError::NonFiniteBeta);
        }
        Ok(Self { beta, n_pop, k_obs })
    }

    /// Observed fraction `K/N`, the finite-`N` stand-in for the limit alpha.
    #[inline]
    pub fn alpha_finite(&self) -> f64 {
        f64::from(self.k_obs) / f64::from(self.n_pop)
    }
}

/// The full multi-group model. Groups do not interact; the measure is the
/// product of the per-group measures.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    groups: Vec<GroupSpec>,
}

impl ModelSpec {
    pub fn new(groups: Vec<GroupSpec>) -> Result<Self, ModelError> {
        if groups.is_empty() {
            return Err(ModelError::NoGroups);
        }
        Ok(Self { groups })
    }

    pub fn single(group: GroupSpec) -> Self {
        Self {
            groups: alloc::vec![group],
        }
    }

    #[inline]
    pub fn groups(&self) -> &[GroupSpec] {
        &self.groups
    }

    #[inline]
    pub fn group_count(&self) -> usize {
        self.groups.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelError {
    EmptyPopulation,
    BadObservationCount { n_pop: u32, k_obs: u32 },
    NonFiniteBeta,
    NoGroups,
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::EmptyPopulation => write!(f, "group population must be at least 1"),
            ModelError::BadObservationCount { n_pop, k_obs } => write!(
                f,
                "observed count must satisfy 1 <= k_obs <= n_pop, got k_obs={k_obs}, n_pop={n_pop}"
            ),
            ModelError::NonFiniteBeta => write!(f, "coupling beta must be finite"),
            ModelError::NoGroups => write!(f, "model needs at least one group"),
        }
    }
}

impl core::error::Error for ModelError {}
