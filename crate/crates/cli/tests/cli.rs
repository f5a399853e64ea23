//! Black-box tests of the `uqimp` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use uncertainty_importance::rng::Stream;

fn uqimp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uqimp"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = uqimp(dir, args);
    assert!(
        out.status.success(),
        "uqimp {} failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Asserts failure with a single-line `error[kind]: ...` message and returns it.
fn fails(dir: &Path, args: &[&str], kind: &str) -> String {
    let out = uqimp(dir, args);
    assert!(!out.status.success(), "uqimp {} unexpectedly succeeded", args.join(" "));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "multi-line error: {err}");
    assert!(err.starts_with(&format!("error[{kind}]: ")), "got: {err}");
    err
}

/// Data lines of a CSV, skipping the `#` comment and the header.
fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(str::to_string)
        .collect()
}

#[test]
fn generate_mease_shape_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--seed", "7", "--out", "a/b", "generate", "mease", "--variant", "copy-informative"]);
    let path = d.join("a/b/data.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# generator: mease; seed: "));
    let header = text.lines().nth(1).unwrap();
    assert_eq!(header.split(',').count(), 11);
    let rows = data_lines(&path);
    assert_eq!(rows.len(), 5000);
    for r in rows.iter().take(50) {
        let cells: Vec<&str> = r.split(',').collect();
        assert_eq!(cells[0], cells[9], "copy-informative column 10 must equal column 1");
    }

    fails(d, &["--seed", "7", "--out", "a/b", "generate", "mease", "--variant", "copy-informative"], "exists");
    ok(d, &["--seed", "7", "--out", "a/b", "--force", "generate", "mease", "--variant", "copy-informative"]);
    assert_eq!(fs::read_to_string(&path).unwrap(), text);

    ok(d, &["--seed", "8", "--out", "c", "generate", "mease", "--variant", "copy-informative"]);
    assert_ne!(fs::read_to_string(d.join("c/data.csv")).unwrap(), text);
    assert!(!d.join("a/b/.uqimp.lock").exists());
}

#[test]
fn generate_split_and_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["--seed", "3", "--out", "o", "generate", "corr-regression", "--train-fraction", "0.5", "--noise-variance", "0.5"]);
    assert_eq!(data_lines(&d.join("o/train.csv")).len(), 500);
    assert_eq!(data_lines(&d.join("o/test.csv")).len(), 500);
    let echo: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("o/generate.config.json")).unwrap()).unwrap();
    assert_eq!(echo["master_seed"], 3);
    assert_eq!(echo["settings"]["generator"], "corr_regression");
    assert!((echo["settings"]["config"]["noise_sd"].as_f64().unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
    assert!(echo["derived_seeds"]["split"].is_u64());
}

#[test]
fn regression_pipeline_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let g = ["--seed", "1", "--out", "run"];
    let with = |rest: &[&'static str]| -> Vec<&str> { g.iter().copied().chain(rest.iter().copied()).collect() };
    ok(d, &with(&["generate", "corr-regression", "--n", "160", "--train-fraction", "0.5"]));
    ok(d, &with(&["train", "gp", "--data", "run/train.csv", "--epochs", "40"]));
    let model = fs::read(d.join("run/model.json")).unwrap();
    let log = fs::read_to_string(d.join("run/train.log")).unwrap();
    assert!(log.contains("final log marginal likelihood: "), "{log}");

    // same seed, same model
    ok(d, &with(&["--force", "train", "gp", "--data", "run/train.csv", "--epochs", "40"]));
    assert_eq!(fs::read(d.join("run/model.json")).unwrap(), model);

    fails(d, &with(&["train", "rf", "--data", "run/train.csv", "--model-file", "rf.json"]), "task-mismatch");

    ok(d, &with(&["pfi", "--model", "run/model.json", "--data", "run/test.csv", "--measures", "likelihood,entropy", "--repeats", "3"]));
    // 2 measures x 5 features x 3 repeats
    assert_eq!(data_lines(&d.join("run/importance.csv")).len(), 30);
    let csv = fs::read_to_string(d.join("run/importance.csv")).unwrap();
    assert!(csv.starts_with("# units: nats"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(d.join("run/importance.json")).unwrap()).unwrap();
    assert_eq!(report["units"], "nats");
    assert!(report["seed"].is_u64());
    assert!(fs::read_to_string(d.join("run/importance.svg")).unwrap().starts_with("<svg"));

    let err = fails(d, &with(&["--force", "pfi", "--model", "run/model.json", "--data", "run/test.csv", "--measures", "entropy,bogus"]), "usage");
    assert!(err.contains("conditional_entropy") && err.contains("likelihood"), "{err}");

    ok(d, &with(&["curves", "--model", "run/model.json", "--data", "run/test.csv", "--feature", "x3", "--grid-points", "9", "--max-curves", "7"]));
    // 9 grid points x (7 ICE curves + PDP)
    assert_eq!(data_lines(&d.join("run/curves_x3_entropy.csv")).len(), 9 * 8);
    assert_eq!(data_lines(&d.join("run/curves_x3_entropy_pdp.csv")).len(), 9);
    assert!(d.join("run/curves_x3_entropy.config.json").exists());

    let err = fails(d, &with(&["curves", "--model", "run/model.json", "--data", "run/test.csv", "--feature", "x9"]), "unknown-feature");
    assert!(err.contains("x1, x2, x3, x4, x5"), "{err}");

    let out = ok(d, &with(&["report"]));
    let md = String::from_utf8(out.stdout).unwrap();
    assert!(md.contains("## Model model.json") && md.contains("## Importance importance.json"), "{md}");
    assert_eq!(fs::read_to_string(d.join("run/report.md")).unwrap(), md);
}

#[test]
fn mean_pdp_is_checkable_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let g = ["--seed", "2", "--out", "m"];
    let with = |rest: &[&'static str]| -> Vec<&str> { g.iter().copied().chain(rest.iter().copied()).collect() };
    ok(d, &with(&["generate", "corr-regression", "--n", "200", "--train-fraction", "0.5", "--noise-sd", "0.3"]));
    ok(d, &with(&["train", "gp", "--data", "m/train.csv", "--epochs", "80"]));
    ok(d, &with(&["curves", "--model", "m/model.json", "--data", "m/test.csv", "--feature", "x5", "--metric", "mean", "--no-plot"]));
    let pdp: Vec<f64> = data_lines(&d.join("m/curves_x5_mean_pdp.csv"))
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    // the mean rises with x5 (unit slope)
    assert!(pdp.last().unwrap() - pdp[0] > 1.0, "{pdp:?}");
    assert!(!d.join("m/curves_x5_mean.svg").exists());
}

#[test]
fn classification_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let g = ["--seed", "4", "--out", "c"];
    let with = |rest: &[&'static str]| -> Vec<&str> { g.iter().copied().chain(rest.iter().copied()).collect() };
    ok(d, &with(&["generate", "mease", "--n", "400", "--train-fraction", "0.75"]));
    ok(d, &with(&["train", "rf", "--data", "c/train.csv", "--trees", "30", "--max-depth", "4"]));
    let log = fs::read_to_string(d.join("c/train.log")).unwrap();
    assert!(log.contains("classes: 0, 1") && log.contains("calibration class 1"), "{log}");
    ok(d, &with(&["pfi", "--model", "c/model.json", "--data", "c/test.csv", "--measures", "classic,conditional-entropy", "--grouping", "quantile:2", "--repeats", "2"]));
    assert_eq!(data_lines(&d.join("c/importance.csv")).len(), 2 * 10 * 2);
    ok(d, &with(&["curves", "--model", "c/model.json", "--data", "c/test.csv", "--feature", "0", "--metric", "mean", "--class", "0"]));
    let head = fs::read_to_string(d.join("c/curves_x1_mean.csv")).unwrap();
    assert!(head.starts_with("# feature: x1; metric: mean; units: probability; class: 0; seed: "), "{head}");
    fails(d, &with(&["--force", "curves", "--model", "c/model.json", "--data", "c/test.csv", "--feature", "0", "--class", "5", "--metric", "mean"]), "invalid-input");
}

#[test]
fn feature_predictability_constructions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let mut s = Stream::new(99);
    let mut csv = String::from("a,a_copy,noise,hidden,y\n");
    for _ in 0..400 {
        let a = s.normal();
        let noise = s.normal();
        let hidden = s.normal();
        let y = hidden + 0.05 * s.normal();
        csv.push_str(&format!("{a},{a},{noise},{hidden},{y}\n"));
    }
    fs::write(d.join("p.csv"), csv).unwrap();
    ok(d, &["--out", "p", "feature-predictability", "--data", "p.csv"]);
    ok(d, &["--out", "p", "feature-predictability", "--data", "p.csv", "--include-target"]);
    let read = |name: &str| -> Vec<(String, f64)> {
        data_lines(&d.join("p").join(name))
            .iter()
            .map(|l| {
                let (f, v) = l.split_once(',').unwrap();
                (f.to_string(), v.parse().unwrap())
            })
            .collect()
    };
    let without = read("predictability.csv");
    let with = read("predictability_with_target.csv");
    assert!(without[0].1 >= 0.95 && without[1].1 >= 0.95, "{without:?}");
    assert!(without[2].1 <= 0.1, "{without:?}");
    assert!(with[3].1 > without[3].1 + 0.5, "with {with:?} without {without:?}");
}

#[test]
fn lock_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::create_dir(d.join("busy")).unwrap();
    fs::write(d.join("busy/.uqimp.lock"), "1\n").unwrap();
    fails(d, &["--out", "busy", "generate", "border"], "locked");
    assert!(d.join("busy/.uqimp.lock").exists(), "a foreign lock must not be removed");
    fails(d, &["generate", "nonsense"], "usage");
    fails(d, &["--out", "x", "train", "gp", "--data", "missing.csv"], "io");
    fails(d, &["--out", "x", "report"], "usage");
    let help = uqimp(d, &["--help"]);
    assert!(help.status.success());
}
