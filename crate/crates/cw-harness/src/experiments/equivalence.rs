//! Equivalence audit over a population-size grid: every sampled data set in
//! the restricted sets must respect the uniform gap bound, and the maximum
//! observed gap must shrink with the population.

use super::check_kind;
use crate::io::ReportCsv;
use crate::{with_pool, ConfigFile, RunContext, RunOutcome};
use cw_core::{
    audit_equivalence, build_intervals, sample_multigroup, EquivalenceConfig, GroupSpec,
    IntervalKind, ModelSpec, Regime, SampleMatrix, SamplerConfig,
};
use rayon::prelude::*;

#[derive(serde::Serialize)]
struct GridPoint {
    n_pop: u32,
    k_obs: u32,
    n_samples: usize,
    n_in_set: usize,
    n_minus_inf: usize,
    n_low_band: usize,
    bound: f64,
    max_gap: f64,
    msq_bound: f64,
    max_msq_gap: f64,
    max_identity_dev: f64,
    marginal_band_lo: f64,
    marginal_band_hi: f64,
    violations: usize,
}

#[derive(serde::Serialize)]
struct Summary {
    experiment: &'static str,
    seed: u64,
    regime: String,
    beta: f64,
    b: f64,
    samples_per_n: usize,
    n_obs: usize,
    grid: Vec<GridPoint>,
    total_violations: usize,
    max_gap_decreasing: bool,
    passed: bool,
}

pub fn run(cfg: &ConfigFile, ctx: &RunContext) -> anyhow::Result<RunOutcome> {
    check_kind(cfg, "equivalence")?;
    let seed: u64 = cfg.get("experiment", "seed")?;
    let samples_per_n: usize = cfg.get("experiment", "samples")?;
    let n_obs: usize = cfg.get("experiment", "n_obs")?;
    let beta: f64 = cfg.get("equivalence", "beta")?;
    let b: f64 = cfg.get("equivalence", "b")?;
    let n_grid: Vec<u32> = cfg.get_list("equivalence", "n_grid")?;
    let k_fraction: f64 = cfg.opt("equivalence", "k_fraction")?.unwrap_or(0.5);
    let regime = match cfg.get_str("equivalence", "regime")? {
        "high" => Regime::High,
        "low" => Regime::Low,
        other => anyhow::bail!("regime must be `high` or `low`, got `{other}`"),
    };
    let settings = cfg.intervals()?;

    let mut grid = Vec::new();
    let mut total_violations = 0usize;
    for (gi, &n_pop) in n_grid.iter().enumerate() {
        let k_obs = ((f64::from(n_pop) * k_fraction) as u32).clamp(2, n_pop);
        let spec = ModelSpec::single(GroupSpec::new(beta, n_pop, k_obs)?);
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
        let eq_cfg = EquivalenceConfig {
            b,
            b1: settings.b1,
            b2: settings.b2,
        };

        let samples: Vec<SampleMatrix> = with_pool(ctx.threads, || {
            (0..samples_per_n)
                .into_par_iter()
                .map(|s| {
                    let stream = gi as u64 * samples_per_n as u64 + s as u64;
                    sample_multigroup(&spec, n_obs, &SamplerConfig::new(seed, stream))
                })
                .collect()
        })?;

        let report = audit_equivalence(&samples, &pair, &sum, &eq_cfg, &spec, regime)?;
        let ga = &report.groups[0];
        total_violations += ga.violations.len();
        grid.push(GridPoint {
            n_pop,
            k_obs,
            n_samples: ga.n_samples,
            n_in_set: ga.n_in_set,
            n_minus_inf: ga.n_minus_inf,
            n_low_band: ga.n_low_band,
            bound: ga.bound,
            max_gap: ga.max_gap,
            msq_bound: ga.msq_bound,
            max_msq_gap: ga.max_msq_gap,
            max_identity_dev: ga.max_identity_dev,
            marginal_band_lo: ga.marginal_band.0,
            marginal_band_hi: ga.marginal_band.1,
            violations: ga.violations.len(),
        });
    }

    let max_gap_decreasing = grid.windows(2).all(|w| w[1].max_gap < w[0].max_gap);
    let passed = total_violations == 0 && (grid.len() < 2 || max_gap_decreasing);

    if ctx.write_csv {
        let mut csv = ReportCsv::new(
            &ctx.meta,
            &[
                "n_pop",
                "k_obs",
                "n_in_set",
                "n_minus_inf",
                "bound",
                "max_gap",
                "msq_bound",
                "max_msq_gap",
                "violations",
            ],
        );
        for p in &grid {
            csv.row(&[
                p.n_pop.to_string(),
                p.k_obs.to_string(),
                p.n_in_set.to_string(),
                p.n_minus_inf.to_string(),
                p.bound.to_string(),
                p.max_gap.to_string(),
                p.msq_bound.to_string(),
                p.max_msq_gap.to_string(),
                p.violations.to_string(),
            ]);
        }
        csv.write(&ctx.path("equivalence_curve.csv"))?;
    }

    let summary = Summary {
        experiment: "equivalence",
        seed,
        regime: match regime {
            Regime::High => "high".into(),
            Regime::Low => "low".into(),
        },
        beta,
        b,
        samples_per_n,
        n_obs,
        grid,
        total_violations,
        max_gap_decreasing,
        passed,
    };
    if ctx.write_json {
        crate::io::write_json_report(&ctx.path("equivalence_summary.json"), &ctx.meta, &summary)?;
    }
    Ok(RunOutcome::of(passed))
}
