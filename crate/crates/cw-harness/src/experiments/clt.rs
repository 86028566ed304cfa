//! CLT verification: the empirical variance of `sqrt(n) (estimate - target)`
//! against the asymptotic covariance formulas, a normality statistic, and
//! the cross-group diagonality claim.

use super::{check_kind, EstimationSetup, Family};
use crate::io::ReportCsv;
use crate::{with_pool, ConfigFile, RunContext, RunOutcome};
use rayon::prelude::*;

/// Anderson-Darling statistic `A*^2` with estimated mean and variance
/// (case 3), including the small-sample correction factor.
pub fn anderson_darling(values: &[f64]) -> f64 {
    let n = values.len();
    assert!(n >= 8, "need a reasonable sample for AD");
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    let sd = var.sqrt();
    let mut z: Vec<f64> = values.iter().map(|v| (v - mean) / sd).collect();
    z.sort_by(f64::total_cmp);

    let mut a2 = -nf;
    for i in 0..n {
        let u_i = cw_core::math::normal_cdf(z[i]).clamp(1e-300, 1.0 - 1e-16);
        let u_tail = cw_core::math::normal_cdf(z[n - 1 - i]).clamp(1e-300, 1.0 - 1e-16);
        a2 -= (2.0 * i as f64 + 1.0) / nf * (u_i.ln() + (1.0 - u_tail).ln());
    }
    a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf))
}

/// 1% critical value for `A*^2` with both parameters estimated
/// (D'Agostino & Stephens, Table 4.7).
pub const AD_CRITICAL_1PCT: f64 = 1.035;

#[derive(serde::Serialize)]
struct FamilyReport {
    group: usize,
    family: Family,
    target: f64,
    formula_variance: f64,
    empirical_variance: f64,
    ratio: f64,
    within_tolerance: bool,
    ad_statistic: f64,
    ad_pass_1pct: bool,
    n_finite: usize,
}

#[derive(serde::Serialize)]
struct CrossGroup {
    family: Family,
    group_a: usize,
    group_b: usize,
    empirical_covariance: f64,
    three_sigma: f64,
    within_three_sigma: bool,
}

#[derive(serde::Serialize)]
struct Summary {
    experiment: &'static str,
    seed: u64,
    replications: u64,
    n_obs: usize,
    variance_tolerance: f64,
    families: Vec<FamilyReport>,
    cross_group: Vec<CrossGroup>,
    passed: bool,
}

pub fn run(cfg: &ConfigFile, ctx: &RunContext) -> anyhow::Result<RunOutcome> {
    check_kind(cfg, "clt")?;
    let seed: u64 = cfg.get("experiment", "seed")?;
    let replications: u64 = cfg.get("experiment", "replications")?;
    let n_obs: usize = cfg.get("experiment", "n_obs")?;
    let tolerance: f64 = cfg.opt("experiment", "variance_tolerance")?.unwrap_or(0.15);
    let setup = EstimationSetup::build(cfg.model()?, &cfg.intervals()?)?;
    let groups = setup.spec.group_count();

    let reps: Vec<(Vec<_>, Vec<_>)> = with_pool(ctx.threads, || {
        (0..replications)
            .into_par_iter()
            .map(|r| setup.replicate(seed, r, n_obs))
            .collect::<anyhow::Result<Vec<_>>>()
    })??;

    // Scaled deviations sqrt(n)(estimate - target), per group and family.
    let sqrt_n = (n_obs as f64).sqrt();
    let scaled = |family: Family, g: usize| -> Vec<f64> {
        reps.iter()
            .filter_map(|(gam, zet)| {
                let v = match family {
                    Family::Gamma => gam[g].value.finite(),
                    Family::Zeta => zet[g].value.finite(),
                }?;
                Some(sqrt_n * (v - setup.target_of(family, g)))
            })
            .collect()
    };

    let mut families = Vec::new();
    let mut passed = true;
    for g in 0..groups {
        for family in [Family::Gamma, Family::Zeta] {
            let devs = scaled(family, g);
            anyhow::ensure!(devs.len() >= 8, "too few finite estimates");
            let nf = devs.len() as f64;
            let mean = devs.iter().sum::<f64>() / nf;
            let emp_var =
                devs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
            let formula = setup.variance_of(family, g);
            let ratio = emp_var / formula;
            let within = (ratio - 1.0).abs() <= tolerance;
            let ad = anderson_darling(&devs);
            let ad_pass = ad <= AD_CRITICAL_1PCT;
            passed &= within && ad_pass;
            families.push(FamilyReport {
                group: g,
                family,
                target: setup.target_of(family, g),
                formula_variance: formula,
                empirical_variance: emp_var,
                ratio,
                within_tolerance: within,
                ad_statistic: ad,
                ad_pass_1pct: ad_pass,
                n_finite: devs.len(),
            });
        }
    }

    // Cross-group covariance must vanish (diagonal covariance claim).
    let mut cross_group = Vec::new();
    for family in [Family::Gamma, Family::Zeta] {
        for a in 0..groups {
            for b in (a + 1)..groups {
                let da = scaled(family, a);
                let db = scaled(family, b);
                let n = da.len().min(db.len()) as f64;
                let ma = da.iter().sum::<f64>() / da.len() as f64;
                let mb = db.iter().sum::<f64>() / db.len() as f64;
                let cov = da
                    .iter()
                    .zip(&db)
                    .map(|(x, y)| (x - ma) * (y - mb))
                    .sum::<f64>()
                    / (n - 1.0);
                let three_sigma = 3.0
                    * (setup.variance_of(family, a) * setup.variance_of(family, b) / n).sqrt();
                let ok = cov.abs() <= three_sigma;
                passed &= ok;
                cross_group.push(CrossGroup {
                    family,
                    group_a: a,
                    group_b: b,
                    empirical_covariance: cov,
                    three_sigma,
                    within_three_sigma: ok,
                });
            }
        }
    }

    if ctx.write_csv {
        let mut csv = ReportCsv::new(
            &ctx.meta,
            &["replication", "group", "estimator", "scaled_deviation"],
        );
        for (r, (gam, zet)) in reps.iter().enumerate() {
            for g in 0..groups {
                for (family, res) in [(Family::Gamma, &gam[g]), (Family::Zeta, &zet[g])] {
                    if let Some(v) = res.value.finite() {
                        csv.row(&[
                            r.to_string(),
                            g.to_string(),
                            family.label().to_string(),
                            (sqrt_n * (v - setup.target_of(family, g))).to_string(),
                        ]);
                    }
                }
            }
        }
        csv.write(&ctx.path("clt_replications.csv"))?;
    }

    let summary = Summary {
        experiment: "clt",
        seed,
        replications,
        n_obs,
        variance_tolerance: tolerance,
        families,
        cross_group,
        passed,
    };
    if ctx.write_json {
        crate::io::write_json_report(&ctx.path("clt_summary.json"), &ctx.meta, &summary)?;
    }
    Ok(RunOutcome::of(passed))
}
