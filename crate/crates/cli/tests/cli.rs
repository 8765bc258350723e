use std::path::Path;
use std::process::{Command, Output};

fn mimicface(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mimicface")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = mimicface(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn error_json(out: &Output) -> serde_json::Value {
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().last().expect("an error line");
    serde_json::from_str(line).unwrap_or_else(|_| panic!("not JSON: {stderr}"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_are_one_line_json() {
    let out = mimicface(&["train-gen"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["error"], "usage");
    let out = mimicface(&["no-such-command"]);
    assert_eq!(error_json(&out)["error"], "usage");
    assert!(mimicface(&["--help"]).status.success());
}

#[test]
fn missing_dataset_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = mimicface(&["train-inv", "--data", s(&dir.path().join("nope")), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let v = error_json(&out);
    assert_eq!(v["error"], "io");
    assert!(v["message"].as_str().unwrap().contains("nope"));
}

#[test]
fn babble_default_split_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let stdout = ok(&["babble", "--steps", "32", "--seed", "2", "--out", s(&data)]);
    assert!(stdout.contains("dataset_hash:"));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(data.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["split"]["train"], 28);
    assert_eq!(manifest["split"]["val"], 2);
    assert_eq!(manifest["split"]["test"], 2);
    assert!(data.join("config.json").exists());

    // the config file supplies flags; explicit ones take precedence
    let cfg = dir.path().join("cfg.json");
    let other = dir.path().join("other");
    std::fs::write(&cfg, format!(r#"{{"steps": 20, "seed": 2, "out": {:?}, "split": [10, 5, 5]}}"#, s(&other))).unwrap();
    ok(&["babble", "--config", s(&cfg), "--steps", "24", "--split", "12,6,6"]);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(other.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["records"], 24);
    assert_eq!(manifest["split"]["train"], 12);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "[1, 2]").unwrap();
    assert_eq!(error_json(&mimicface(&["babble", "--config", s(&bad), "--out", s(&other)]))["error"], "argument");
}

#[test]
fn full_workflow_from_babble_to_report_and_infer() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    let (data, gen, inv, base, eval) = (p("data"), p("gen"), p("inv"), p("base"), p("eval"));
    ok(&["babble", "--steps", "64", "--seed", "5", "--split", "48,8,8", "--out", s(&data)]);
    let train = ["--epochs", "3", "--lr", "1e-3", "--batch", "8", "--seed", "1"];
    let stdout = ok(&[&["train-gen", "--data", s(&data), "--out", s(&gen)][..], &train].concat());
    assert!(stdout.contains("checkpoint_hash:"));
    assert!(gen.join("robot_ranges.csv").exists());
    assert!(gen.join("train_log.csv").exists());
    ok(&[&["train-inv", "--data", s(&data), "--out", s(&inv)][..], &train].concat());
    assert!(inv.join("reference.png").exists());
    let l2m_train = ["--epochs", "6", "--lr", "5e-4", "--batch", "8", "--seed", "1"];
    ok(&[&["train-baselines", "--data", s(&data), "--out", s(&base)][..], &l2m_train].concat());
    for sub in ["ri", "ri100", "l2m"] {
        assert!(base.join(sub).is_dir(), "{sub}");
    }

    let stdout = ok(&["eval-gen", "--data", s(&data), "--gen", s(&gen), "--out", s(&eval)]);
    assert!(stdout.contains("GM,image_distance"));
    let stdout = ok(&["eval-inv", "--data", s(&data), "--inv", s(&inv), "--baselines", s(&base), "--out", s(&eval)]);
    assert!(stdout.contains("RI100,command_accuracy"));
    let stdout = ok(&[
        "eval-pipeline", "--data", s(&data), "--gen", s(&gen), "--inv", s(&inv), "--baselines", s(&base), "--out",
        s(&eval),
    ]);
    assert!(stdout.contains("LandmarkToMotor,command_distance"));
    let stdout = ok(&[
        "eval-exec", "--data", s(&data), "--gen", s(&gen), "--inv", s(&inv), "--subjects", "2", "--frames", "3",
        "--subject-babble", "40", "--out", s(&eval),
    ]);
    assert!(stdout.contains("RandomCommand,landmark_distance_s1"));

    let figs = p("figs");
    let stdout = ok(&["report", "--in", s(&eval), "--out", s(&figs)]);
    for name in ["generative.csv", "inverse.csv", "pipeline.csv", "execution.csv", "execution.png"] {
        assert!(figs.join(name).exists(), "{name}");
        assert!(stdout.contains(name), "{name}");
    }

    // a dataset the models were not trained on
    let other = p("other");
    ok(&["babble", "--steps", "32", "--seed", "6", "--out", s(&other)]);
    let out = mimicface(&["eval-gen", "--data", s(&other), "--gen", s(&gen), "--out", s(&eval)]);
    assert_eq!(error_json(&out)["error"], "hash_mismatch");

    let lm = std::fs::read_dir(data.join("landmarks")).unwrap().next().unwrap().unwrap().path();
    let ranges = gen.join("robot_ranges.csv");
    let out = mimicface(&[
        "infer", "--landmarks", s(&lm), "--human-ranges", s(&ranges), "--gen", s(&gen), "--inv", s(&inv),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let line = String::from_utf8(out.stdout).unwrap();
    let values: Vec<f64> = line.trim().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(values.len(), 10);
    assert!(values.iter().all(|v| [0.0, 0.25, 0.5, 0.75, 1.0].contains(v)));
    assert!(String::from_utf8_lossy(&out.stderr).contains("latency_ms:"));

    // tampering with the stored self-image breaks the checksum
    std::fs::write(inv.join("reference.png"), b"not a png").unwrap();
    let out = mimicface(&[
        "infer", "--landmarks", s(&lm), "--human-ranges", s(&ranges), "--gen", s(&gen), "--inv", s(&inv),
    ]);
    assert_eq!(error_json(&out)["error"], "checksum");
}
