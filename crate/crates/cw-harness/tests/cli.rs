//! End-to-end tests of the command-line surface: subcommands, file formats,
//! and exit codes (0 success, 1 usage/config error, 2 assertion failure).

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cw-harness"))
}

fn work_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cw_cli_{name}_{}", std::process::id()));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).unwrap();
    }
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const MODEL_AND_INTERVALS: &str = "\
[model]
group = 0.5 60 20
group = 1.5 40 12

[intervals]
b1 = 0.8
b2 = 1.2
c_high = 1.0
c_low = 0.05
d_high = 2.0
d_low = 0.05
";

#[test]
fn sample_then_estimate_round_trip() {
    let dir = work_dir("roundtrip");
    let conf = dir.join("exp.conf");
    write(
        &conf,
        &format!("[experiment]\nseed = 9\nn_obs = 400\n{MODEL_AND_INTERVALS}"),
    );

    let out = bin()
        .args(["sample", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.join("sample.csv");
    assert!(csv.exists());

    // Header carries group/voter labels; body is comma-separated votes.
    let text = std::fs::read_to_string(&csv).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("g0_v0,"));
    assert!(header.ends_with("g1_v11"));
    assert_eq!(text.lines().count(), 401);

    let out = bin()
        .args(["estimate", "--config"])
        .arg(&conf)
        .arg("--input")
        .arg(&csv)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let estimates: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("estimates.json")).unwrap())
            .unwrap();
    let results = estimates["results"].as_array().unwrap();
    assert_eq!(results.len(), 4); // 2 groups x 2 estimator families
    for r in results {
        assert!(r["value"].is_number() || r["value"].is_string());
        // group 1 sits deep in the low-temperature band: finite and > 1
        if r["group"] == 1 {
            let v = r["value"].as_f64().expect("low-band estimate is finite");
            assert!(v > 1.0, "low-band estimate {v}");
            assert!(r["ci"].is_array());
        }
    }

    // Same seed reruns bit-identically.
    let before = std::fs::read(&csv).unwrap();
    bin()
        .args(["sample", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(before, std::fs::read(&csv).unwrap());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn zero_one_coded_files_estimate_identically() {
    let dir = work_dir("zeroone");
    let conf = dir.join("exp.conf");
    write(
        &conf,
        &format!("[experiment]\nseed = 9\nn_obs = 200\n{MODEL_AND_INTERVALS}"),
    );
    bin()
        .args(["sample", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    let pm = std::fs::read_to_string(dir.join("sample.csv")).unwrap();
    let zo = pm.replace("-1", "0");
    write(&dir.join("sample01.csv"), &zo);

    for (input, extra) in [("sample.csv", None), ("sample01.csv", Some("--zero-one"))] {
        let mut cmd = bin();
        cmd.args(["estimate", "--config"])
            .arg(&conf)
            .arg("--input")
            .arg(dir.join(input))
            .arg("--out")
            .arg(dir.join(input).with_extension("out"));
        std::fs::create_dir_all(dir.join(input).with_extension("out")).unwrap();
        if let Some(flag) = extra {
            cmd.arg(flag);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir.join("sample.out").join("estimates.json")).unwrap();
    let b = std::fs::read(dir.join("sample01.out").join("estimates.json")).unwrap();
    assert_eq!(a, b);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn bad_entry_is_a_usage_error_with_location() {
    let dir = work_dir("baddata");
    let conf = dir.join("exp.conf");
    write(
        &conf,
        &format!("[experiment]\nseed = 9\nn_obs = 10\n{MODEL_AND_INTERVALS}"),
    );
    write(&dir.join("bad.csv"), "g0_v0,g0_v1\n1,-1\n1,2\n");
    let out = bin()
        .args(["estimate", "--config"])
        .arg(&conf)
        .arg("--input")
        .arg(dir.join("bad.csv"))
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(":3:2"), "missing location in: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_errors_carry_line_numbers_and_exit_1() {
    let dir = work_dir("badconf");
    let conf = dir.join("exp.conf");
    write(&conf, "[experiment]\nseed = not_a_number\n");
    let out = bin()
        .args(["consistency", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "{stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = bin().args(["clt", "--definitely-not-a-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn failed_assertions_exit_2() {
    // A reversed sample-size grid makes the medians increase, so the
    // consistency assertion must fail.
    let dir = work_dir("assertfail");
    let conf = dir.join("exp.conf");
    write(
        &conf,
        &format!(
            "[experiment]\nkind = consistency\nseed = 3\nreplications = 8\nn_grid = 20000 200\n{MODEL_AND_INTERVALS}"
        ),
    );
    let out = bin()
        .args(["consistency", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    // Reports are still written for inspection.
    assert!(dir.join("consistency_summary.json").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn kind_mismatch_is_rejected() {
    let dir = work_dir("kindmismatch");
    let conf = dir.join("exp.conf");
    write(
        &conf,
        &format!("[experiment]\nkind = clt\nseed = 3\nreplications = 8\nn_grid = 100\n{MODEL_AND_INTERVALS}"),
    );
    let out = bin()
        .args(["consistency", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn ml_compare_subcommand_runs() {
    let dir = work_dir("mlcompare");
    let conf = dir.join("exp.conf");
    write(
        &conf,
        "[experiment]\nkind = ml-compare\nseed = 23\nreplications = 10\nn_obs = 200\n\
         [model]\ngroup = 0.5 20 10\n\
         [intervals]\nb1 = 0.8\nb2 = 1.2\nc_high = 1.0\nc_low = 0.05\nd_high = 2.0\nd_low = 0.05\n\
         [ml]\nbracket = -3 3\n",
    );
    let out = bin()
        .args(["ml-compare", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("ml_compare.csv").exists());
    assert!(dir.join("ml_compare_summary.json").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn calibrate_constants_writes_report() {
    let dir = work_dir("calibrate");
    let conf = dir.join("cal.conf");
    write(&conf, "[calibrate]\nn_grid = 25 50\n");
    let out = bin()
        .args(["calibrate-constants", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("constants.json")).unwrap())
            .unwrap();
    assert!(report["c_high"].as_f64().unwrap() > 0.0);
    assert!(report["config"]["calibrate.n_grid"].is_string());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn format_flag_restricts_outputs() {
    let dir = work_dir("format");
    let conf = dir.join("exp.conf");
    write(
        &conf,
        &format!(
            "[experiment]\nkind = clt\nseed = 3\nreplications = 8\nn_obs = 500\nvariance_tolerance = 10\n{MODEL_AND_INTERVALS}"
        ),
    );
    let out = bin()
        .args(["clt", "--format", "json", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("clt_summary.json").exists());
    assert!(!dir.join("clt_replications.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
}

/// Byte-level golden snapshot of the sample CSV schema: the format is a
/// contract, and the seeded sampler is platform-independent.
#[test]
fn sample_csv_golden_snapshot() {
    let dir = work_dir("golden");
    let conf = dir.join("exp.conf");
    write(
        &conf,
        "[experiment]\nseed = 1\nn_obs = 6\n[model]\ngroup = 1.5 5 3\n[intervals]\nb1 = 0.8\nb2 = 1.2\n",
    );
    let out = bin()
        .args(["sample", "--config"])
        .arg(&conf)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.join("sample.csv")).unwrap();
    let expected = "\
g0_v0,g0_v1,g0_v2
-1,-1,-1
-1,1,-1
-1,-1,-1
1,1,1
-1,-1,-1
1,1,1
";
    assert_eq!(text, expected);
    std::fs::remove_dir_all(&dir).ok();
}
