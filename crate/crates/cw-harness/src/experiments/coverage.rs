//! Coverage study: confidence intervals built from the asymptotic variance
//! formulas must cover the finite-`N` targets at the nominal rate.

use super::{check_kind, EstimationSetup, Family, OutcomeCounts};
use crate::io::ReportCsv;
use crate::{with_pool, ConfigFile, RunContext, RunOutcome};
use cw_core::confidence_interval;
use rayon::prelude::*;

#[derive(serde::Serialize)]
struct FamilyCoverage {
    group: usize,
    family: Family,
    target: f64,
    formula_variance: f64,
    covered: usize,
    n_finite: usize,
    coverage: f64,
    within_band: bool,
    counts: OutcomeCounts,
}

#[derive(serde::Serialize)]
struct Summary {
    experiment: &'static str,
    seed: u64,
    replications: u64,
    n_obs: usize,
    level: f64,
    band: f64,
    families: Vec<FamilyCoverage>,
    passed: bool,
}

pub fn run(cfg: &ConfigFile, ctx: &RunContext) -> anyhow::Result<RunOutcome> {
    check_kind(cfg, "coverage")?;
    let seed: u64 = cfg.get("experiment", "seed")?;
    let replications: u64 = cfg.get("experiment", "replications")?;
    let n_obs: usize = cfg.get("experiment", "n_obs")?;
    let level: f64 = cfg.opt("experiment", "level")?.unwrap_or(0.95);
    let band: f64 = cfg.opt("experiment", "band")?.unwrap_or(0.03);
    let setup = EstimationSetup::build(cfg.model()?, &cfg.intervals()?)?;
    let groups = setup.spec.group_count();

    let reps: Vec<(Vec<_>, Vec<_>)> = with_pool(ctx.threads, || {
        (0..replications)
            .into_par_iter()
            .map(|r| setup.replicate(seed, r, n_obs))
            .collect::<anyhow::Result<Vec<_>>>()
    })??;

    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut families = Vec::new();
    let mut passed = true;
    for g in 0..groups {
        for family in [Family::Gamma, Family::Zeta] {
            let target = setup.target_of(family, g);
            let variance = setup.variance_of(family, g);
            let mut covered = 0usize;
            let mut finite = 0usize;
            let mut counts = OutcomeCounts::default();
            for (r, (gam, zet)) in reps.iter().enumerate() {
                let value = match family {
                    Family::Gamma => &gam[g].value,
                    Family::Zeta => &zet[g].value,
                };
                counts.record(value);
                if let Some(v) = value.finite() {
                    finite += 1;
                    let (lo, hi) = confidence_interval(v, variance, n_obs, level);
                    let inside = lo <= target && target <= hi;
                    covered += usize::from(inside);
                    if ctx.write_csv {
                        rows.push(vec![
                            r.to_string(),
                            g.to_string(),
                            family.label().to_string(),
                            v.to_string(),
                            lo.to_string(),
                            hi.to_string(),
                            u8::from(inside).to_string(),
                        ]);
                    }
                }
            }
            anyhow::ensure!(finite > 0, "no finite estimates for coverage");
            let coverage = covered as f64 / finite as f64;
            let within = (coverage - level).abs() <= band;
            passed &= within;
            families.push(FamilyCoverage {
                group: g,
                family,
                target,
                formula_variance: variance,
                covered,
                n_finite: finite,
                coverage,
                within_band: within,
                counts,
            });
        }
    }

    if ctx.write_csv {
        let mut csv = ReportCsv::new(
            &ctx.meta,
            &["replication", "group", "estimator", "value", "ci_lo", "ci_hi", "covered"],
        );
        for row in &rows {
            csv.row(row);
        }
        csv.write(&ctx.path("coverage_replications.csv"))?;
    }

    let summary = Summary {
        experiment: "coverage",
        seed,
        replications,
        n_obs,
        level,
        band,
        families,
        passed,
    };
    if ctx.write_json {
        crate::io::write_json_report(&ctx.path("coverage_summary.json"), &ctx.meta, &summary)?;
    }
    Ok(RunOutcome::of(passed))
}
