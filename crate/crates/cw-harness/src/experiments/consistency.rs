//! Consistency sweep: median absolute estimation error per sample size must
//! not increase as the sample grows.

use super::{check_kind, EstimationSetup, Family, OutcomeCounts};
use crate::io::ReportCsv;
use crate::{median, quantile, with_pool, ConfigFile, RunContext, RunOutcome};
use rayon::prelude::*;

#[derive(serde::Serialize)]
struct Cell {
    n_obs: usize,
    group: usize,
    family: Family,
    median_abs_error: f64,
    q25: f64,
    q75: f64,
    counts: OutcomeCounts,
}

#[derive(serde::Serialize)]
struct Summary {
    experiment: &'static str,
    seed: u64,
    replications: u64,
    n_grid: Vec<usize>,
    targets_gamma: Vec<f64>,
    targets_zeta: Vec<f64>,
    cells: Vec<Cell>,
    medians_non_increasing: bool,
    passed: bool,
}

pub fn run(cfg: &ConfigFile, ctx: &RunContext) -> anyhow::Result<RunOutcome> {
    check_kind(cfg, "consistency")?;
    let seed: u64 = cfg.get("experiment", "seed")?;
    let replications: u64 = cfg.get("experiment", "replications")?;
    let n_grid: Vec<usize> = cfg.get_list("experiment", "n_grid")?;
    anyhow::ensure!(!n_grid.is_empty() && replications >= 1, "empty grid");
    let setup = EstimationSetup::build(cfg.model()?, &cfg.intervals()?)?;

    let group_count = setup.spec.group_count();
    let cells: Vec<Cell> = with_pool(ctx.threads, || -> anyhow::Result<Vec<Cell>> {
        let mut cells = Vec::new();
        for (ni, &n_obs) in n_grid.iter().enumerate() {
            // One replication = one sampled data set at this n.
            let reps: Vec<(Vec<_>, Vec<_>)> = (0..replications)
                .into_par_iter()
                .map(|r| setup.replicate(seed, ni as u64 * replications + r, n_obs))
                .collect::<anyhow::Result<Vec<_>>>()?;

            for g in 0..group_count {
                for family in [Family::Gamma, Family::Zeta] {
                    let target = setup.target_of(family, g);
                    let mut errors = Vec::new();
                    let mut counts = OutcomeCounts::default();
                    for (gam, zet) in &reps {
                        let value = match family {
                            Family::Gamma => &gam[g].value,
                            Family::Zeta => &zet[g].value,
                        };
                        counts.record(value);
                        if let Some(v) = value.finite() {
                            errors.push((v - target).abs());
                        }
                    }
                    anyhow::ensure!(
                        !errors.is_empty(),
                        "no finite estimates at n={n_obs} group={g}"
                    );
                    errors.sort_by(f64::total_cmp);
                    cells.push(Cell {
                        n_obs,
                        group: g,
                        family,
                        median_abs_error: median(&errors),
                        q25: quantile(&errors, 0.25),
                        q75: quantile(&errors, 0.75),
                        counts,
                    });
                }
            }
        }
        Ok(cells)
    })??;

    // Assertion: per (group, family), medians non-increasing along the grid.
    let mut monotone = true;
    for g in 0..group_count {
        for family in [Family::Gamma, Family::Zeta] {
            let series: Vec<f64> = cells
                .iter()
                .filter(|c| c.group == g && c.family == family)
                .map(|c| c.median_abs_error)
                .collect();
            if series.windows(2).any(|w| w[1] > w[0]) {
                monotone = false;
            }
        }
    }

    if ctx.write_csv {
        let mut csv = ReportCsv::new(
            &ctx.meta,
            &[
                "n_obs",
                "group",
                "estimator",
                "median_abs_error",
                "q25",
                "q75",
                "n_finite",
                "n_minus_inf",
                "n_plus_inf",
                "n_undecided",
                "n_no_information",
            ],
        );
        for c in &cells {
            csv.row(&[
                c.n_obs.to_string(),
                c.group.to_string(),
                c.family.label().to_string(),
                c.median_abs_error.to_string(),
                c.q25.to_string(),
                c.q75.to_string(),
                c.counts.finite.to_string(),
                c.counts.minus_inf.to_string(),
                c.counts.plus_inf.to_string(),
                c.counts.undecided.to_string(),
                c.counts.no_information.to_string(),
            ]);
        }
        csv.write(&ctx.path("consistency_curve.csv"))?;
    }

    let summary = Summary {
        experiment: "consistency",
        seed,
        replications,
        n_grid,
        targets_gamma: setup.targets.iter().map(|t| t.gamma_tilde).collect(),
        targets_zeta: setup.targets.iter().map(|t| t.zeta_tilde).collect(),
        cells,
        medians_non_increasing: monotone,
        passed: monotone,
    };
    if ctx.write_json {
        crate::io::write_json_report(&ctx.path("consistency_summary.json"), &ctx.meta, &summary)?;
    }
    Ok(RunOutcome::of(summary.passed))
}
