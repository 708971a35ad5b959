mod common;

use std::fs;

use common::*;

#[test]
fn generate_writes_four_files_and_repeats_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let a = generate(dir.path(), SMALL_DATA);
    let mut names: Vec<String> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["forecasters.json", "forecasts.jsonl", "manifest.json", "questions.json"]
    );

    let again = dir.path().join("again");
    let cfg = dir.path().join("synth.json");
    let out = run(&["generate", "--config", path_str(&cfg), "--out", path_str(&again)]);
    assert_eq!(code(&out), 0);
    assert_eq!(snapshot(&a), snapshot(&again));

    let other = dir.path().join("other");
    let out = run(&[
        "generate",
        "--config",
        path_str(&cfg),
        "--seed",
        "6",
        "--out",
        path_str(&other),
    ]);
    assert_eq!(code(&out), 0);
    assert_ne!(
        fs::read(a.join("forecasts.jsonl")).unwrap(),
        fs::read(other.join("forecasts.jsonl")).unwrap()
    );
}

#[test]
fn malformed_config_exits_two_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_file(dir.path(), "bad.json", "{\n  \"n_questions\": 5,\n  \"seed\": }\n");
    let out = run(&[
        "generate",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&dir.path().join("d")),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("bad.json:3:"), "{}", stderr(&out));

    let cfg = write_file(dir.path(), "typo.json", r#"{"n_question": 5}"#);
    let out = run(&[
        "generate",
        "--config",
        path_str(&cfg),
        "--out",
        path_str(&dir.path().join("d")),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("n_question"), "{}", stderr(&out));
}

#[test]
fn unwritable_output_fails() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = write_file(dir.path(), "file", "x");
    let out = run(&["generate", "--out", path_str(&blocker.join("sub"))]);
    assert_ne!(code(&out), 0);
    assert!(!stderr(&out).is_empty());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&[])), 2);
    assert_eq!(code(&run(&["evaluate", "--report", "x"])), 2);
    assert_eq!(code(&run(&["bogus"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn evaluate_baseline_and_attention() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), SMALL_DATA);
    let train = write_file(dir.path(), "train.json", QUICK_TRAIN);

    let m0 = dir.path().join("m0");
    let out = run(&[
        "evaluate",
        "--data",
        path_str(&data),
        "--aggregator",
        "m0",
        "--folds",
        "3",
        "--report",
        path_str(&m0),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(m0.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["summary"]["n"], 12);
    assert!(report["mmdb"].as_f64().unwrap() > 0.0);
    for f in [
        "brier_summary.csv",
        "calibration.csv",
        "roc.csv",
        "rank_percentiles.csv",
        "time_profile.csv",
        "training_history.csv",
    ] {
        assert!(m0.join(f).exists(), "{f}");
    }
    assert!(!m0.join("attention_vs_brier.csv").exists());
    let summary = fs::read_to_string(m0.join("brier_summary.csv")).unwrap();
    assert_eq!(
        summary.lines().next().unwrap(),
        "aggregator,fold,n,mean,variance,q25,q50,q75"
    );
    assert_eq!(summary.lines().count(), 1 + 1 + 3);

    let att = dir.path().join("att");
    let out = run(&[
        "evaluate",
        "--data",
        path_str(&data),
        "--folds",
        "3",
        "--train-config",
        path_str(&train),
        "--report",
        path_str(&att),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let pairs = fs::read_to_string(att.join("attention_vs_brier.csv")).unwrap();
    assert_eq!(pairs.lines().next().unwrap(), "attention,brier");
    assert!(pairs.lines().count() > 1);
    let history = fs::read_to_string(att.join("training_history.csv")).unwrap();
    assert_eq!(history.lines().count(), 1 + 3 * 3);
}

#[test]
fn unknown_aggregator_lists_valid_names() {
    let out = run(&["evaluate", "--data", "d", "--aggregator", "m3", "--report", "r"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("m0, m1, m2, attention"), "{}", stderr(&out));
}

#[test]
fn invalid_data_exits_three_listing_violations() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), SMALL_DATA);
    let path = data.join("forecasts.jsonl");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut first: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
    first["probs"][0] = serde_json::json!(5.0);
    lines[0] = first.to_string();
    fs::write(&path, lines.join("\n") + "\n").unwrap();
    let out = run(&[
        "evaluate",
        "--data",
        path_str(&data),
        "--aggregator",
        "m0",
        "--report",
        path_str(&dir.path().join("r")),
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("forecast #"), "{}", stderr(&out));

    let out = run(&["compare", "--data", path_str(&dir.path().join("missing"))]);
    assert_eq!(code(&out), 3);
}

#[test]
fn train_config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), SMALL_DATA);
    let bad = write_file(dir.path(), "t.json", r#"{"dropout_rate": 1.5}"#);
    let out = run(&[
        "train",
        "--data",
        path_str(&data),
        "--train-config",
        path_str(&bad),
        "--out",
        path_str(&dir.path().join("m")),
    ]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let out = run(&[
        "evaluate",
        "--data",
        path_str(&data),
        "--folds",
        "40",
        "--report",
        path_str(&dir.path().join("r")),
    ]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    let out = run(&[
        "evaluate",
        "--data",
        path_str(&data),
        "--aggregator",
        "m0",
        "--report",
        path_str(&data),
    ]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn train_writes_model_and_history() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), SMALL_DATA);
    let train = write_file(dir.path(), "train.json", QUICK_TRAIN);
    let m = dir.path().join("model");
    let out = run(&[
        "train",
        "--data",
        path_str(&data),
        "--train-config",
        path_str(&train),
        "--out",
        path_str(&m),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(m.join("model.json").exists());
    assert_eq!(
        fs::read_to_string(m.join("training_history.csv"))
            .unwrap()
            .lines()
            .count(),
        4
    );
}

fn populated(csv_text: &str) -> usize {
    csv_text.lines().skip(1).filter(|l| !l.ends_with(',')).count()
}

#[test]
fn ablation_rows_with_and_without_machines() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), SMALL_DATA);
    let train = write_file(dir.path(), "train.json", QUICK_TRAIN);
    let csv = dir.path().join("abl.csv");
    let args = |out: &str, data: &str| {
        vec![
            "ablate".to_string(),
            "--data".into(),
            data.into(),
            "--folds".into(),
            "2".into(),
            "--train-config".into(),
            path_str(&train).into(),
            "--out".into(),
            out.into(),
        ]
    };
    let out = bin().args(args(path_str(&csv), path_str(&data))).output().unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "feature,forecaster_type,brier");
    assert_eq!(text.lines().count(), 7);
    assert_eq!(populated(&text), 6);

    let csv2 = dir.path().join("abl2.csv");
    bin().args(args(path_str(&csv2), path_str(&data))).output().unwrap();
    assert_eq!(text, fs::read_to_string(&csv2).unwrap());

    let humans = tempfile::tempdir().unwrap();
    let human_data = generate(
        humans.path(),
        &SMALL_DATA.replace("\"seed\": 5", "\"seed\": 5, \"machines\": []"),
    );
    let csv3 = dir.path().join("abl3.csv");
    let out = bin()
        .args(args(path_str(&csv3), path_str(&human_data)))
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("warning"));
    assert_eq!(populated(&fs::read_to_string(&csv3).unwrap()), 4);
}

#[test]
fn compare_prints_every_method_and_a_finite_test() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), SMALL_DATA);
    let train = write_file(dir.path(), "train.json", QUICK_TRAIN);
    let out = run(&[
        "compare",
        "--data",
        path_str(&data),
        "--folds",
        "3",
        "--train-config",
        path_str(&train),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    for name in ["m0", "m1", "m2", "attention"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{text}");
    }
    let last = text.lines().last().unwrap();
    let z: f64 = last
        .split("z = ")
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    let p: f64 = last.split("p = ").nth(1).unwrap().trim().parse().unwrap();
    assert!(z.is_finite() && (0.0..=1.0).contains(&p), "{last}");
}

#[test]
fn compare_from_published_summary() {
    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/reference_summary.json");
    let out = run(&["compare", "--from-summary", fixture]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = stdout(&out);
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("attention vs m2:"), "{last}");
    let z: f64 = last
        .split("z = ")
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    let p: f64 = last.split("p = ").nth(1).unwrap().trim().parse().unwrap();
    assert!((z - 2.46).abs() < 0.05, "{z}");
    assert!((p - 0.007).abs() < 0.001, "{p}");
}
