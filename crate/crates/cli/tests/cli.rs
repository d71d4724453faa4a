use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use airgan_core::data::{ClassLabel, ClassReps, LabeledDataset};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/sample.csv")
}

fn airgan(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_airgan"))
        .arg("--output-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = airgan(out, args);
    assert!(
        o.status.success(),
        "airgan {args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Ingested fixture plus one trained run of `epochs`.
fn trained(epochs: usize) -> tempfile::TempDir {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["ingest", s(&fixture())]);
    ok(
        tmp.path(),
        &["train", "--runs", "1", "--epochs", &epochs.to_string(), "--eval-samples", "100"],
    );
    tmp
}

#[test]
fn missing_input_exits_2_and_names_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let o = airgan(tmp.path(), &["ingest", "/no/such/file.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/file.csv"));

    let o = airgan(tmp.path(), &["ingest"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ingest_writes_datasets_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let stdout = ok(tmp.path(), &["ingest", s(&fixture())]);
    assert!(stdout.contains("16 days kept, 1 dropped"));
    let balanced = LabeledDataset::load_json(tmp.path().join("balanced.json")).unwrap();
    assert_eq!(balanced.per_class_counts(), [2; 8]);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("ingest_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["balanced_per_class"], 2);
    assert_eq!(report["rejected_rows"].as_array().unwrap().len(), 1);
}

#[test]
fn bad_config_and_bad_checkpoint_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"epochs": 3}"#).unwrap();
    let o = airgan(tmp.path(), &["--config", s(&cfg), "ingest", s(&fixture())]);
    assert_eq!(o.status.code(), Some(2));

    let ckpt = tmp.path().join("checkpoint.json");
    fs::write(&ckpt, "{not json").unwrap();
    let o = airgan(tmp.path(), &["generate", s(&ckpt)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_sets_training_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"runs": 2, "train": {"epochs": 2, "eval_samples_per_epoch": 50}}"#).unwrap();
    ok(tmp.path(), &["ingest", s(&fixture())]);
    ok(tmp.path(), &["--config", s(&cfg), "train", "--progress", "0"]);
    for run in ["run-01", "run-02"] {
        let h = fs::read_to_string(tmp.path().join("runs").join(run).join("history.csv")).unwrap();
        assert_eq!(h.lines().count(), 3);
    }
}

#[test]
fn one_epoch_run_has_one_history_row_and_timing_summary() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["ingest", s(&fixture())]);
    let stdout = ok(tmp.path(), &["train", "--runs", "1", "--epochs", "1"]);
    let history = fs::read_to_string(tmp.path().join("runs/run-01/history.csv")).unwrap();
    let lines: Vec<&str> = history.lines().collect();
    assert_eq!(lines[0], "epoch,d_loss,g_loss,mean_rmse");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("1,"));

    let summary = stdout.lines().last().unwrap();
    let nums = summary.rsplit(": ").next().unwrap();
    assert!(summary.starts_with("training time over 1 runs (min/mean/max minutes)"));
    assert_eq!(nums.split('/').filter(|v| v.parse::<f64>().is_ok()).count(), 3);

    let timings = fs::read_to_string(tmp.path().join("timings.csv")).unwrap();
    assert_eq!(timings.lines().count(), 2);
    assert!(timings.starts_with("run,seed,minutes\n1,0,"));
}

#[test]
fn invalid_training_settings_exit_2_and_divergence_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["ingest", s(&fixture())]);
    let o = airgan(tmp.path(), &["train", "--runs", "1", "--batch-size", "64"]);
    assert_eq!(o.status.code(), Some(2));
    let o = airgan(tmp.path(), &["train", "--runs", "2", "--epochs", "3", "--learning-rate", "1e300"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("all 2 training runs failed"));
}

#[test]
fn generate_is_deterministic_and_balanced() {
    let tmp = trained(1);
    let ckpt = tmp.path().join("runs/run-01/checkpoint.json");
    ok(tmp.path(), &["generate", s(&ckpt), "--reps-per-class", "1", "--name", "tiny"]);
    let text = fs::read_to_string(tmp.path().join("fakes/tiny.csv")).unwrap();
    assert_eq!(text.lines().count(), 9);

    ok(tmp.path(), &["generate", s(&ckpt), "--reps-per-class", "20"]);
    let first = fs::read(tmp.path().join("fakes/run-01.csv")).unwrap();
    ok(tmp.path(), &["generate", s(&ckpt), "--reps-per-class", "20"]);
    assert_eq!(first, fs::read(tmp.path().join("fakes/run-01.csv")).unwrap());

    let o = airgan(tmp.path(), &["generate", s(&ckpt), s(&ckpt), "--name", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn band_plots_overlay_only_with_real_stats() {
    let tmp = trained(1);
    let balanced = tmp.path().join("balanced.json");
    ok(tmp.path(), &["plot", "bands", "--dataset", s(&balanced)]);
    let plots = tmp.path().join("plots");
    for c in 0..8 {
        let svg = fs::read_to_string(plots.join(format!("balanced-class{c}.svg"))).unwrap();
        assert!(svg.starts_with("<svg") && !svg.contains("stroke-dasharray"));
    }
    let stats = tmp.path().join("class_stats.json");
    ok(
        tmp.path(),
        &["plot", "bands", "--dataset", s(&balanced), "--real-stats", s(&stats), "--classes", "2,5", "--prefix", "ov"],
    );
    let svgs: Vec<_> = fs::read_dir(&plots)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("ov-"))
        .collect();
    assert_eq!(svgs.len(), 2);
    assert!(fs::read_to_string(plots.join("ov-class5.svg")).unwrap().contains("stroke-dasharray"));

    let o = airgan(tmp.path(), &["plot", "bands", "--dataset", s(&balanced), "--classes", "9"]);
    assert_eq!(o.status.code(), Some(2));
    let empty = tmp.path().join("empty.csv");
    fs::write(&empty, "label,h0\n").unwrap();
    let o = airgan(tmp.path(), &["plot", "bands", "--fake", s(&empty)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn history_plot_draws_each_run() {
    let tmp = trained(3);
    ok(tmp.path(), &["plot", "history", s(&tmp.path().join("runs/run-01/history.csv"))]);
    let svg = fs::read_to_string(tmp.path().join("plots/history-run-01.svg")).unwrap();
    assert!(svg.contains("</svg>"));
}

#[test]
fn evaluation_ranks_a_perfect_fake_first() {
    let tmp = trained(1);
    ok(tmp.path(), &["generate", s(&tmp.path().join("runs/run-01/checkpoint.json")), "--reps-per-class", "10"]);

    // Every sample equal to its class representative.
    let real = LabeledDataset::load_json(tmp.path().join("balanced.json")).unwrap();
    let reps = ClassReps::from_dataset(&real).unwrap();
    let mut csv = String::from("label");
    for h in 0..24 {
        csv += &format!(",h{h}");
    }
    csv.push('\n');
    for c in ClassLabel::all() {
        for _ in 0..3 {
            csv += &c.index().to_string();
            for v in reps.rep(c) {
                csv += &format!(",{v:?}");
            }
            csv.push('\n');
        }
    }
    let perfect = tmp.path().join("perfect.csv");
    fs::write(&perfect, csv).unwrap();

    let stdout = ok(tmp.path(), &["evaluate", s(&tmp.path().join("fakes/run-01.csv")), s(&perfect)]);
    assert!(stdout.contains("fake-1"));
    let dir = tmp.path().join("evaluation");
    let table2 = fs::read_to_string(dir.join("table2.csv")).unwrap();
    let rows: Vec<&str> = table2.lines().collect();
    assert_eq!(rows.len(), 1 + 3);
    assert!(rows[1].starts_with("real,"));
    let best: Vec<&str> = rows[2].split(',').collect();
    assert_eq!(best[0], "fake-1");
    assert!(best[2].parse::<f64>().unwrap().abs() < 1e-9);

    let ranking: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("ranking.json")).unwrap()).unwrap();
    assert_eq!(ranking[0]["source"], "perfect");
    assert_eq!(ranking[1]["source"], "run-01");
    assert_eq!(fs::read_to_string(dir.join("table3.csv")).unwrap().lines().count(), 4);
}
