//! Experiment drivers. Each takes the parsed config plus a [`RunContext`],
//! writes its report files, and returns whether its assertions held.
//!
//! Substream layout: every replication owns the stream id
//! `grid_index * replications + replication_index` (single-grid experiments
//! use `grid_index = 0`), and the per-group substream separation happens
//! inside the sampler keying. Parallel and serial runs therefore produce
//! identical numbers.

pub mod approx_error;
pub mod calibrate;
pub mod clt;
pub mod consistency;
pub mod coverage;
pub mod equivalence;
pub mod ml_compare;

use crate::config::{ConfigFile, ConfigError, IntervalSettings};
use cw_core::{
    asymptotic_variance_gamma, asymptotic_variance_zeta, build_intervals, compute_targets,
    estimate_gamma, estimate_zeta, EstimateResult, IntervalKind, ModelSpec, RegimeIntervals,
    SamplerConfig, TargetParams,
};

/// Estimator selector used in report rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Gamma,
    Zeta,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Family::Gamma => "gamma",
            Family::Zeta => "zeta",
        }
    }
}

/// Model, intervals, targets, and variance formulas shared by the
/// Monte-Carlo experiments.
pub struct EstimationSetup {
    pub spec: ModelSpec,
    pub pair: RegimeIntervals,
    pub sum: RegimeIntervals,
    pub targets: Vec<TargetParams>,
    pub var_gamma: Vec<f64>,
    pub var_zeta: Vec<f64>,
}

impl EstimationSetup {
    pub fn build(spec: ModelSpec, settings: &IntervalSettings) -> anyhow::Result<Self> {
        let pair = build_intervals(
            &spec,
            settings.b1,
            settings.b2,
            &settings.constants,
            IntervalKind::PairScale,
            settings.alpha.as_deref(),
        )?;
        let sum = build_intervals(
            &spec,
            settings.b1,
            settings.b2,
            &settings.constants,
            IntervalKind::SumScale,
            settings.alpha.as_deref(),
        )?;
        let targets = compute_targets(&spec, &pair, &sum)?;
        let mut var_gamma = Vec::new();
        let mut var_zeta = Vec::new();
        for (g, group) in spec.groups().iter().enumerate() {
            let t = &targets[g];
            var_gamma.push(asymptotic_variance_gamma(group, t.regime, t.gamma_tilde)?);
            var_zeta.push(asymptotic_variance_zeta(
                group,
                t.regime,
                t.zeta_tilde,
                sum.groups[g].alpha,
            )?);
        }
        Ok(Self {
            spec,
            pair,
            sum,
            targets,
            var_gamma,
            var_zeta,
        })
    }

    /// Sample one replication and estimate both families.
    pub fn replicate(
        &self,
        seed: u64,
        stream: u64,
        n_obs: usize,
    ) -> anyhow::Result<(Vec<EstimateResult>, Vec<EstimateResult>)> {
        let sample = cw_core::sample_multigroup(&self.spec, n_obs, &SamplerConfig::new(seed, stream));
        let p = cw_core::compute_p(&sample)?;
        let t = cw_core::compute_t(&sample)?;
        let gam = estimate_gamma(&p, &self.pair, &self.spec)?;
        let zet = estimate_zeta(&t, &self.sum, &self.spec)?;
        Ok((gam, zet))
    }

    pub fn target_of(&self, family: Family, group: usize) -> f64 {
        match family {
            Family::Gamma => self.targets[group].gamma_tilde,
            Family::Zeta => self.targets[group].zeta_tilde,
        }
    }

    pub fn variance_of(&self, family: Family, group: usize) -> f64 {
        match family {
            Family::Gamma => self.var_gamma[group],
            Family::Zeta => self.var_zeta[group],
        }
    }
}

/// Require the config's `[experiment] kind`, when present, to match the
/// subcommand actually invoked.
pub fn check_kind(cfg: &ConfigFile, expected: &str) -> Result<(), ConfigError> {
    if let Some(kind) = cfg.opt_str("experiment", "kind") {
        if kind != expected {
            return Err(ConfigError::Invalid(format!(
                "config kind `{kind}` does not match subcommand `{expected}`"
            )));
        }
    }
    Ok(())
}

/// Outcome counts over replications of one (group, family) cell.
#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct OutcomeCounts {
    pub finite: usize,
    pub minus_inf: usize,
    pub plus_inf: usize,
    pub undecided: usize,
    pub no_information: usize,
}

impl OutcomeCounts {
    pub fn record(&mut self, value: &cw_core::EstimateValue) {
        match value {
            cw_core::EstimateValue::Finite(_) => self.finite += 1,
            cw_core::EstimateValue::MinusInfinity => self.minus_inf += 1,
            cw_core::EstimateValue::PlusInfinity => self.plus_inf += 1,
            cw_core::EstimateValue::Undecided => self.undecided += 1,
            cw_core::EstimateValue::NoInformation => self.no_information += 1,
        }
    }
}
