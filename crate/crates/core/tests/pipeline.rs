mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use common::*;
use higemine::config::Config;
use higemine::pipeline::{run_pipeline, METRICS_FILE};
use higemine::synthetic::CorpusKind;
use higemine::training::LambdaSetting;

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/small")
}

#[test]
fn identical_runs_are_bitwise_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = synthetic_config(a.path(), 60, 3, CorpusKind::Noisy);
    let mut cfg_b = cfg.clone();
    cfg_b.output_dir = b.path().join("out");
    let ra = run_pipeline(cfg).unwrap();
    let rb = run_pipeline(cfg_b).unwrap();
    assert_eq!(ra.report, rb.report);
    assert_eq!(ra.artifacts.len(), rb.artifacts.len());
    for (x, y) in ra.artifacts.iter().zip(&rb.artifacts) {
        assert_eq!(x.file_name(), y.file_name());
        if x.extension().is_some_and(|e| e == "ckpt" || e == "jsonl") || x.ends_with(METRICS_FILE) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
        }
    }
}

#[test]
fn flat_mode_reports_no_level1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = Config {
        hierarchy: false,
        ..synthetic_config(dir.path(), 40, 4, CorpusKind::Separable)
    };
    let out = run_pipeline(cfg).unwrap();
    let r = &out.report;
    assert_eq!(r.mode, "flat");
    assert!(r.level1.is_none());
    let keys: Vec<&str> = r.level2.keys().map(String::as_str).collect();
    assert_eq!(keys, ["fiction", "flat", "nonfiction"]);
    assert_eq!(r.level2["flat"].labels, 6);
    assert_eq!(r.level2["fiction"].labels, 3);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out").join(METRICS_FILE)).unwrap()).unwrap();
    assert!(json["level1"].is_null());
    assert!(dir.path().join("out/level2-flat.ckpt").exists());
    assert!(!dir.path().join("out/level1.ckpt").exists());
}

#[test]
fn every_ablation_produces_a_valid_report() {
    let dir = tempfile::tempdir().unwrap();
    let base = synthetic_config(dir.path(), 40, 5, CorpusKind::Noisy);
    let variants = [
        Config {
            label_network: false,
            ..base.clone()
        },
        Config {
            word_features: false,
            ..base.clone()
        },
        Config {
            learn_label_offsets: false,
            ..base.clone()
        },
        Config {
            filter_reviews: false,
            ..base.clone()
        },
        Config {
            lambda1: LambdaSetting::Fixed(1.0),
            lambda2: LambdaSetting::Fixed(1.0),
            ..base.clone()
        },
        Config {
            lambda1: LambdaSetting::Fixed(0.0),
            lambda2: LambdaSetting::Fixed(0.0),
            ..base
        },
    ];
    for cfg in variants {
        let r = run_pipeline(cfg).unwrap().report;
        let l1 = r.level1.unwrap();
        assert!((0.0..=1.0).contains(&l1.f1) && (0.0..=1.0).contains(&l1.accuracy));
        for m in r.level2.values() {
            for v in [
                m.f1_micro,
                m.f1_macro,
                m.balanced_accuracy_micro,
                m.balanced_accuracy_macro,
                m.hamming_loss,
            ] {
                assert!((0.0..=1.0).contains(&v));
            }
        }
        assert_eq!(r.counts.evaluated, r.counts.routed_fiction + r.counts.routed_nonfiction);
    }
}

#[test]
fn sidecar_lists_every_book() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = synthetic_config(dir.path(), 30, 6, CorpusKind::Noisy);
    let out = run_pipeline(cfg).unwrap();
    let sidecar = out.artifacts.iter().find(|p| p.ends_with("filter.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = fs::read_to_string(sidecar)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 30);
    for l in &lines {
        for key in ["id", "kept", "similarities", "threshold", "bypass"] {
            assert!(l.get(key).is_some(), "{key} missing in {l}");
        }
    }
}

// Command-line surface.

fn cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_higemine"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// Copies the small fixture into a scratch directory and applies `edit` to its config.
fn scratch(edit: impl Fn(String) -> String) -> (tempfile::TempDir, String) {
    let dir = tempfile::tempdir().unwrap();
    for f in ["books.jsonl", "taxonomy.json"] {
        fs::copy(fixture_dir().join(f), dir.path().join(f)).unwrap();
    }
    let text = edit(
        fs::read_to_string(fixture_dir().join("config.toml"))
            .unwrap()
            .replace("epochs = 80", "epochs = 20"),
    );
    let path = dir.path().join("config.toml");
    fs::write(&path, text).unwrap();
    (dir, path.display().to_string())
}

#[test]
fn cli_round_trip() {
    let (dir, cfg) = scratch(|s| s);
    let (code, _, err) = cli(&["eval", "--config", &cfg]);
    assert_eq!(code, 3, "eval before train: {err}");

    let (code, stdout, err) = cli(&["train", "--config", &cfg]);
    assert_eq!(code, 0, "{err}");
    let reports: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(reports.as_array().unwrap().len(), 3);

    let (code, stdout, err) = cli(&["eval", "--config", &cfg]);
    assert_eq!(code, 0, "{err}");
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert!(dir.path().join("run").join(METRICS_FILE).exists());

    let input = dir.path().join("one.json");
    fs::write(&input, r#"{"id": "book0001"}"#).unwrap();
    let (code, stdout, err) = cli(&["predict", "--config", &cfg, "--input", input.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let p: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(p["id"], "book0001");

    let batch = dir.path().join("batch.jsonl");
    fs::write(&batch, "{\"id\": \"book0002\"}\n{\"id\": \"book0003\"}\n").unwrap();
    let (code, stdout, _) = cli(&["predict", "--config", &cfg, "--input", batch.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(
        serde_json::from_str::<serde_json::Value>(&stdout)
            .unwrap()
            .as_array()
            .unwrap()
            .len(),
        2
    );

    fs::write(&input, r#"{"id": "missing"}"#).unwrap();
    let (code, _, _) = cli(&["predict", "--config", &cfg, "--input", input.to_str().unwrap()]);
    assert_eq!(code, 3);
}

#[test]
fn cli_partial_levels_and_stats() {
    let (dir, cfg) = scratch(|s| s);
    let (code, _, err) = cli(&["train", "--config", &cfg, "--level", "2nf"]);
    assert_eq!(code, 0, "{err}");
    assert!(dir.path().join("run/level2-nonfiction.ckpt").exists());
    assert!(!dir.path().join("run/level1.ckpt").exists());

    let (code, stdout, _) = cli(&["graph-stats", "--config", &cfg]);
    assert_eq!(code, 0);
    let stats: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(stats[0]["kind"], "blurb");
    assert_eq!(stats[1]["doc_nodes"], 40);
    assert!(dir.path().join("run/review_graph.mtx").exists());

    let (code, stdout, _) = cli(&["filter", "--config", &cfg]);
    assert_eq!(code, 0);
    assert!(stdout.trim().ends_with("filter.jsonl"));
}

#[test]
fn cli_exit_codes() {
    let (_d, cfg) = scratch(|s| s + "window = 1\n");
    assert_eq!(cli(&["train", "--config", &cfg]).0, 2);
    let (_d, cfg) = scratch(|s| s + "no_such_key = 3\n");
    assert_eq!(cli(&["filter", "--config", &cfg]).0, 2);
    assert_eq!(cli(&["filter", "--config", "/does/not/exist.toml"]).0, 2);
    assert_eq!(cli(&["bogus"]).0, 2);
    let (_d, cfg) = scratch(|s| s.replace("books.jsonl", "absent.jsonl"));
    assert_eq!(cli(&["filter", "--config", &cfg]).0, 3);
    let (d, cfg) = scratch(|s| s);
    fs::write(d.path().join("books.jsonl"), "{\"id\": \"x\"\n").unwrap();
    assert_eq!(cli(&["filter", "--config", &cfg]).0, 3);
    let (_d, cfg) = scratch(|s| s.replace("learning_rate = 0.01", "learning_rate = 1e300\noptimizer = \"sgd\""));
    let (code, _, err) = cli(&["train", "--config", &cfg]);
    assert_eq!(code, 4, "{err}");
    assert!(err.contains("train-level1"));
}

#[test]
fn config_paths_resolve_against_the_file() {
    let cfg = Config::load(fixture_dir().join("config.toml")).unwrap();
    assert_eq!(cfg.dataset, fixture_dir().join("books.jsonl"));
    assert_eq!(cfg.output_dir, fixture_dir().join("run"));
}
