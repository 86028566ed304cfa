//! Distance between the closed-form `zeta` estimate and the exact
//! finite-`N` maximum-likelihood-condition root, per sampled data set.

use super::{check_kind, EstimationSetup};
use crate::io::ReportCsv;
use crate::{median, with_pool, ConfigFile, RunContext, RunOutcome};
use cw_core::{compute_t, estimate_zeta, ml_condition_solve, sample_multigroup, SamplerConfig};
use rayon::prelude::*;

#[derive(serde::Serialize)]
struct Row {
    replication: u64,
    group: usize,
    t_statistic: f64,
    zeta_hat: Option<f64>,
    beta_ml: Option<f64>,
    abs_gap: Option<f64>,
    outcome: String,
}

#[derive(serde::Serialize)]
struct GroupSummary {
    group: usize,
    n_compared: usize,
    median_abs_gap: f64,
    max_abs_gap: f64,
}

#[derive(serde::Serialize)]
struct Summary {
    experiment: &'static str,
    seed: u64,
    replications: u64,
    n_obs: usize,
    bracket: (f64, f64),
    groups: Vec<GroupSummary>,
    passed: bool,
}

pub fn run(cfg: &ConfigFile, ctx: &RunContext) -> anyhow::Result<RunOutcome> {
    check_kind(cfg, "ml-compare")?;
    let seed: u64 = cfg.get("experiment", "seed")?;
    let replications: u64 = cfg.get("experiment", "replications")?;
    let n_obs: usize = cfg.get("experiment", "n_obs")?;
    let bracket_list: Vec<f64> = cfg.get_list("ml", "bracket")?;
    anyhow::ensure!(bracket_list.len() == 2, "bracket needs two values");
    let bracket = (bracket_list[0], bracket_list[1]);
    let setup = EstimationSetup::build(cfg.model()?, &cfg.intervals()?)?;
    let groups = setup.spec.group_count();

    let rows: Vec<Vec<Row>> = with_pool(ctx.threads, || {
        (0..replications)
            .into_par_iter()
            .map(|r| -> anyhow::Result<Vec<Row>> {
                let sample =
                    sample_multigroup(&setup.spec, n_obs, &SamplerConfig::new(seed, r));
                let t = compute_t(&sample)?;
                let zetas = estimate_zeta(&t, &setup.sum, &setup.spec)?;
                let mut out = Vec::with_capacity(groups);
                for (g, zeta) in zetas.iter().enumerate() {
                    let group = &setup.spec.groups()[g];
                    let t_value = t.value(g);
                    let zeta_hat = zeta.value.finite();
                    let (beta_ml, outcome) = match ml_condition_solve(
                        t_value,
                        group.n_pop,
                        group.k_obs,
                        bracket,
                    ) {
                        Ok(b) => (Some(b), "ok".to_string()),
                        Err(e) => (None, format!("ml_unsolved: {e}")),
                    };
                    let abs_gap = match (zeta_hat, beta_ml) {
                        (Some(z), Some(b)) => Some((z - b).abs()),
                        _ => None,
                    };
                    out.push(Row {
                        replication: r,
                        group: g,
                        t_statistic: t_value,
                        zeta_hat,
                        beta_ml,
                        abs_gap,
                        outcome: if zeta_hat.is_none() {
                            "zeta_degenerate".into()
                        } else {
                            outcome
                        },
                    });
                }
                Ok(out)
            })
            .collect::<anyhow::Result<Vec<_>>>()
    })??;

    let mut group_summaries = Vec::new();
    for g in 0..groups {
        let mut gaps: Vec<f64> = rows
            .iter()
            .flat_map(|reps| reps.iter())
            .filter(|row| row.group == g)
            .filter_map(|row| row.abs_gap)
            .collect();
        anyhow::ensure!(!gaps.is_empty(), "no comparable replications in group {g}");
        gaps.sort_by(f64::total_cmp);
        group_summaries.push(GroupSummary {
            group: g,
            n_compared: gaps.len(),
            median_abs_gap: median(&gaps),
            max_abs_gap: *gaps.last().unwrap(),
        });
    }

    if ctx.write_csv {
        let mut csv = ReportCsv::new(
            &ctx.meta,
            &[
                "replication",
                "group",
                "t_statistic",
                "zeta_hat",
                "beta_ml",
                "abs_gap",
                "outcome",
            ],
        );
        let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for reps in &rows {
            for row in reps {
                csv.row(&[
                    row.replication.to_string(),
                    row.group.to_string(),
                    row.t_statistic.to_string(),
                    fmt_opt(row.zeta_hat),
                    fmt_opt(row.beta_ml),
                    fmt_opt(row.abs_gap),
                    row.outcome.clone(),
                ]);
            }
        }
        csv.write(&ctx.path("ml_compare.csv"))?;
    }

    let summary = Summary {
        experiment: "ml-compare",
        seed,
        replications,
        n_obs,
        bracket,
        groups: group_summaries,
        passed: true,
    };
    if ctx.write_json {
        crate::io::write_json_report(&ctx.path("ml_compare_summary.json"), &ctx.meta, &summary)?;
    }
    Ok(RunOutcome::Passed)
}
