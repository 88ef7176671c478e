use std::path::Path;
use std::process::{Command, Output};

fn raman(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_raman"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn raman")
}

fn ok(args: &[&str], cwd: &Path) -> Output {
    let out = raman(args, cwd);
    assert!(
        out.status.success(),
        "raman {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn benchmark(dir: &Path) {
    ok(&["benchmark", "gen", "--output", "bm", "--seed", "5", "--small"], dir);
}

const CONFIG: &str = r#"{
  "data": {"kind": "benchmark", "params": {"features": 100}, "seed": 2},
  "models": [
    {"kind": "baseline", "params": {"kind": "svm", "c": 10}},
    {"kind": "lcnn", "synthesis": {"source": "real_plus_blended", "count": 60}},
    {"kind": "ae_occ", "denoising": true}
  ],
  "seeds": [0, 1],
  "folds": [1],
  "scenarios": [0, 24],
  "epochs": {"custom": {"classifier": 30, "gate": 30, "vae": 10}}
}"#;

#[test]
fn experiment_reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), CONFIG).unwrap();
    ok(&["experiment", "run", "--config", "cfg.json", "--output", "a"], dir.path());
    ok(&["experiment", "run", "--config", "cfg.json", "--output", "b"], dir.path());
    for f in ["report.json", "runs.csv", "summary.csv", "errors.csv"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{f} differs");
    }
    let runs = std::fs::read_to_string(dir.path().join("a/runs.csv")).unwrap();
    // 3 models x 2 seeds x 2 scenarios
    assert_eq!(runs.lines().count(), 1 + 12);

    ok(&["experiment", "run", "--config", "cfg.json", "--output", "c", "--seed", "9"], dir.path());
    assert_ne!(
        std::fs::read(dir.path().join("a/runs.csv")).unwrap(),
        std::fs::read(dir.path().join("c/runs.csv")).unwrap()
    );

    let plot = ok(
        &["plotdata", "--report", "a/report.json", "--kind", "error_histogram"],
        dir.path(),
    );
    let text = String::from_utf8(plot.stdout).unwrap();
    assert!(text.starts_with('#'));
    for group in ["pos", "neg", "outlier"] {
        assert!(text.lines().any(|l| l.contains(&format!(",{group},"))), "{group} missing");
    }
}

#[test]
fn train_then_predict_every_model_kind() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    benchmark(d);
    ok(&["split", "--input", "bm/spectra.csv", "--seed", "3", "--output", "plan.json"], d);
    let fold = ["--data", "bm/spectra.csv", "--plan", "plan.json", "--fold", "2"];
    for model in ["knn", "svm", "tree", "gnb", "lcnn", "fcnn"] {
        let out = format!("{model}.json");
        let mut args = vec!["train", "--model", model, "--epochs", "40", "--output", &out];
        args.extend(fold);
        ok(&args, d);
        let pred = ok(&["predict", "--model", &out, "--input", "bm/spectra.csv"], d);
        let csv = String::from_utf8(pred.stdout).unwrap();
        assert_eq!(csv.lines().count(), 231, "{model}");
        assert_eq!(csv.lines().next().unwrap(), "index,truth,label,score,error,route");
    }
    let mut args = vec!["twostep", "fit", "--blended", "300", "--epochs", "40", "--gate-epochs", "40"];
    args.extend(fold);
    args.extend(["--output", "ts.json"]);
    ok(&args, d);
    let pred = ok(&["predict", "--model", "ts.json", "--input", "bm/outliers.csv"], d);
    let csv = String::from_utf8(pred.stdout).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with("gate_negative") || l.contains("classifier_")));
}

#[test]
fn gate_flags_nothing_in_its_training_data() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    benchmark(d);
    ok(
        &[
            "gate", "fit", "--data", "bm/spectra.csv", "--mode", "one-class", "--gate-epochs", "40",
            "--output", "gate.json",
        ],
        d,
    );
    let pred = ok(&["predict", "--model", "gate.json", "--input", "bm/spectra.csv"], d);
    let csv = String::from_utf8(pred.stdout).unwrap();
    // Training rows are the positives; none may exceed the threshold.
    assert!(csv
        .lines()
        .skip(1)
        .filter(|l| l.split(',').nth(1) == Some("pos"))
        .all(|l| l.split(',').nth(2) == Some("pos")));
}

#[test]
fn synthesis_commands_write_tagged_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    benchmark(d);
    ok(
        &["synth", "blend", "--input", "bm/spectra.csv", "--class", "neg", "--count", "50", "--output", "b.csv"],
        d,
    );
    let b = std::fs::read_to_string(d.join("b.csv")).unwrap();
    assert_eq!(b.lines().count(), 51);
    assert!(b.lines().skip(1).all(|l| l.starts_with("neg,blended,")));
    ok(
        &[
            "synth", "vae", "--input", "bm/spectra.csv", "--class", "pos", "--count", "7", "--epochs", "5",
            "--output", "v.csv", "--save-model", "vae.json",
        ],
        d,
    );
    let v = std::fs::read_to_string(d.join("v.csv")).unwrap();
    assert_eq!(v.lines().count(), 8);
    assert!(d.join("vae.json").exists());
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    benchmark(d);
    let code = |args: &[&str]| raman(args, d).status.code();
    assert_eq!(code(&["train"]), Some(2));
    assert_eq!(code(&["experiment", "run", "--config", "missing.json", "--output", "x"]), Some(2));
    std::fs::write(d.join("bad.json"), r#"{"models": []}"#).unwrap();
    assert_eq!(code(&["experiment", "run", "--config", "bad.json", "--output", "x"]), Some(2));
    assert_eq!(code(&["plotdata", "--report", "r.json", "--kind", "pie"]), Some(2));
    std::fs::write(d.join("broken.csv"), "label,1,2\npos,0.1\n").unwrap();
    assert_eq!(code(&["ingest", "--input", "broken.csv", "--output", "o.csv"]), Some(3));
    assert_eq!(code(&["predict", "--model", "none.json", "--input", "bm/spectra.csv"]), Some(3));
    assert_eq!(
        code(&[
            "train", "--data", "bm/spectra.csv", "--model", "lcnn", "--epochs", "3", "--learning-rate", "1e300",
            "--output", "m.json"
        ]),
        Some(4)
    );
}
