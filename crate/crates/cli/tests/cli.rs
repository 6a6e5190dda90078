use std::path::Path;
use std::process::{Command, Output};

use aqgan::experiment::{sha256_hex, EvaluationFile, Manifest};

const SMALL: &str = r#"
seed = 3

[data]
n_train = 20
n_test = 20
classical_multiplier = 2

[qgan]
epochs = 4

[gan]
epochs = 4

[effdim]
features = [3]
seeds = 1
n_theta = 3
"#;

fn aqgan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aqgan"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("run aqgan")
}

fn ok(args: &[&str]) -> Output {
    let out = aqgan(args);
    assert!(
        out.status.success(),
        "aqgan {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn s(p: &Path) -> String {
    p.display().to_string()
}

#[test]
fn replayed_run_reproduces_model_digests() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "small.toml", SMALL);
    let (run, copy) = (tmp.path().join("run"), tmp.path().join("copy"));
    ok(&["run", "--config", &config, "--out", &s(&run)]);
    ok(&["replay", "--manifest", &s(&run.join("manifest.json")), "--out", &s(&copy)]);

    let original = Manifest::load(&run).unwrap();
    let replayed = Manifest::load(&copy).unwrap();
    assert_eq!(original.digest, replayed.digest);
    assert_eq!(original.artifacts, replayed.artifacts);
    for name in ["model_qgan.json", "model_gan.json"] {
        let bytes = std::fs::read(run.join(name)).unwrap();
        assert_eq!(original.artifacts[name], sha256_hex(&bytes));
        assert_eq!(bytes, std::fs::read(copy.join(name)).unwrap());
    }
}

#[test]
fn separable_scores_give_unit_auc() {
    let tmp = tempfile::tempdir().unwrap();
    let run = tmp.path().join("run");
    let mut csv = String::from("event_id,label,alpha,score\n");
    for alpha in ["0.0", "0.25", "0.5", "0.75", "1.0"] {
        for i in 0..30 {
            let (label, score) = match i % 3 {
                0 => ("SM", 0.1 + 0.01 * i as f64),
                1 => ("Higgs", 0.6 + 0.01 * i as f64),
                _ => ("Graviton", 0.7 + 0.01 * i as f64),
            };
            csv.push_str(&format!("{i},{label},{alpha},{score}\n"));
        }
    }
    std::fs::create_dir_all(&run).unwrap();
    std::fs::write(run.join("scores_qgan.csv"), csv).unwrap();
    let out = ok(&["evaluate", "--out", &s(&run)]);

    let file: EvaluationFile =
        serde_json::from_str(&std::fs::read_to_string(run.join("report.json")).unwrap()).unwrap();
    assert_eq!(file.entries.len(), 2);
    for e in &file.entries {
        assert_eq!(e.report.auc_max, 1.0);
        assert_eq!(e.report.accuracy, 1.0);
    }
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 2);
}

#[test]
fn report_has_one_row_per_feature_count_model_and_anomaly_kind() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "small.toml", SMALL);
    let mut runs = Vec::new();
    for (features, seed) in [("3", "1"), ("3", "2"), ("4", "1")] {
        let dir = tmp.path().join(format!("d{features}-s{seed}"));
        ok(&["run", "--config", &config, "--features", features, "--seed", seed, "--out", &s(&dir)]);
        runs.push(s(&dir));
    }
    let out_dir = tmp.path().join("summary");
    let mut args = vec!["report", "--out"];
    let out_str = s(&out_dir);
    args.push(&out_str);
    args.extend(runs.iter().map(String::as_str));
    ok(&args);

    let mut reader = csv::Reader::from_path(out_dir.join("summary.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (d, n) = (col("n_features"), col("n_seeds"));
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2 * 2 * 2);
    for r in &rows {
        let expected = if &r[d] == "3" { "2" } else { "1" };
        assert_eq!(&r[n], expected);
    }
}

#[test]
fn malformed_config_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let config = write_config(tmp.path(), "bad.toml", "seed = \"three\"\n");
    let out = aqgan(&["synth", "--config", &config, "--out", &s(&tmp.path().join("run"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn changing_the_configuration_of_a_run_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let run = tmp.path().join("run");
    ok(&["synth", "--seed", "1", "--out", &s(&run)]);
    let out = aqgan(&["prep", "--seed", "2", "--out", &s(&run)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_artifact_exits_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = aqgan(&["evaluate", "--out", &s(&tmp.path().join("run"))]);
    assert_eq!(out.status.code(), Some(3));
    let out = aqgan(&["train-qgan", "--out", &s(&tmp.path().join("run"))]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn divergent_training_exits_with_4() {
    let tmp = tempfile::tempdir().unwrap();
    let body = SMALL.replace("[gan]\nepochs = 4", "[gan]\nepochs = 4\nlearning_rate = 1e300");
    let config = write_config(tmp.path(), "divergent.toml", &body);
    let run = s(&tmp.path().join("run"));
    ok(&["synth", "--config", &config, "--out", &run]);
    ok(&["prep", "--config", &config, "--out", &run]);
    let out = aqgan(&["train-gan", "--config", &config, "--out", &run]);
    assert_eq!(out.status.code(), Some(4));
}
