//! One-shot estimation from an ingested sample, with plug-in inference.
//!
//! The targets and exact variance formulas need the true coupling, which is
//! unknown for external data, so the reported variance and confidence
//! interval substitute the estimate itself (plug-in). Degenerate outcomes
//! carry no inference annotations.

use crate::config::IntervalSettings;
use crate::io::write_json_report;
use crate::{ConfigFile, RunContext, RunOutcome};
use cw_core::{
    asymptotic_variance_gamma, asymptotic_variance_zeta, build_intervals, compute_p, compute_t,
    confidence_interval, estimate_gamma, estimate_zeta, EstimateValue, GroupSpec, IntervalKind,
    ModelSpec, Regime, RegimeLabel, SampleMatrix,
};
use serde_json::{json, Value};

fn value_json(v: &EstimateValue) -> Value {
    match v {
        EstimateValue::Finite(x) => json!(x),
        EstimateValue::MinusInfinity => json!("-inf"),
        EstimateValue::PlusInfinity => json!("+inf"),
        EstimateValue::Undecided => json!("undecided"),
        EstimateValue::NoInformation => json!("no-information"),
    }
}

fn regime_json(r: RegimeLabel) -> Value {
    json!(match r {
        RegimeLabel::High => "high",
        RegimeLabel::Undecided => "undecided",
        RegimeLabel::Low => "low",
        RegimeLabel::MinusInfinity => "minus-infinity",
    })
}

/// Plug-in variance for a finite estimate: evaluate the asymptotic variance
/// formula at the estimated coupling.
fn plugin_variance(
    group: &GroupSpec,
    regime: RegimeLabel,
    estimate: f64,
    alpha: f64,
    zeta: bool,
) -> Option<f64> {
    let regime = match regime {
        RegimeLabel::High => Regime::High,
        RegimeLabel::Low => Regime::Low,
        _ => return None,
    };
    let plugged = GroupSpec::new(estimate, group.n_pop, group.k_obs).ok()?;
    if zeta {
        asymptotic_variance_zeta(&plugged, regime, estimate, alpha).ok()
    } else {
        asymptotic_variance_gamma(&plugged, regime, estimate).ok()
    }
}

pub fn run(
    cfg: &ConfigFile,
    ctx: &RunContext,
    sample: &SampleMatrix,
    level: f64,
) -> anyhow::Result<RunOutcome> {
    let spec: ModelSpec = cfg.model()?;
    let settings: IntervalSettings = cfg.intervals()?;
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

    let p = compute_p(sample)?;
    let t = compute_t(sample)?;
    let gammas = estimate_gamma(&p, &pair, &spec)?;
    let zetas = estimate_zeta(&t, &sum, &spec)?;

    let mut results = Vec::new();
    for (g, group) in spec.groups().iter().enumerate() {
        let alpha = sum.groups[g].alpha;
        for (family, res, stat) in [
            ("gamma", &gammas[g], p.value(g)),
            ("zeta", &zetas[g], t.value(g)),
        ] {
            let mut variance = None;
            let mut ci = None;
            if let Some(v) = res.value.finite() {
                variance =
                    plugin_variance(group, res.regime, v, alpha, family == "zeta");
                if let Some(var) = variance {
                    ci = Some(confidence_interval(v, var, sample.n_obs(), level));
                }
            }
            results.push(json!({
                "group": g,
                "estimator": family,
                "statistic": stat,
                "value": value_json(&res.value),
                "regime": regime_json(res.regime),
                "target": Value::Null,
                "variance": variance,
                "ci": ci.map(|(lo, hi)| json!([lo, hi])),
            }));
        }
    }

    let body = json!({
        "experiment": "estimate",
        "n_obs": sample.n_obs(),
        "level": level,
        "results": results,
    });
    write_json_report(&ctx.path("estimates.json"), &ctx.meta, &body)?;
    println!("{}", serde_json::to_string_pretty(&body)?);
    Ok(RunOutcome::Passed)
}
