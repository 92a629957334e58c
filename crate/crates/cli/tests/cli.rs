use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use flutter_core::fixtures;
use flutter_core::imaging::{io as image_io, RasterImage};
use flutter_core::optimizer::{random_search, MeritKind, SearchConfig};
use serde_json::Value;

fn flutter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flutter"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = flutter(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = s(dir.path());
    let cases: [&[&str]; 6] = [
        &[
            "--out-dir",
            d,
            "optimize",
            "--merit",
            "avg-pairs",
            "--arity",
            "4",
        ],
        &["--out-dir", d, "sample", "--count", "0"],
        &[
            "--out-dir",
            d,
            "simulate",
            "--size",
            "64",
            "--conditions",
            "flat,nosuch",
        ],
        &["--out-dir", d, "optimize", "--selection-offset", "100"],
        &["--out-dir", d, "spectrum", "--sequence", "10201"],
        &["optimize", "--no-such-flag"],
    ];
    for args in cases {
        let out = flutter(args);
        assert_eq!(
            code(&out),
            2,
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let out = flutter(&[
        "--out-dir",
        d,
        "optimize",
        "--merit",
        "avg-pairs",
        "--arity",
        "4",
    ]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not support arity 4"));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let d = s(dir.path());
    let out = flutter(&[
        "--out-dir",
        d,
        "simulate",
        "--truth",
        "/nonexistent/target.png",
    ]);
    assert_eq!(code(&out), 1);
    let out = flutter(&[
        "--config",
        "/nonexistent/config.ini",
        "--out-dir",
        d,
        "sample",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn seed_is_reported_when_generated() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&["--out-dir", s(dir.path()), "sample", "--count", "1"]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    let line = stderr.lines().find(|l| l.starts_with("seed: ")).unwrap();
    let seed: u64 = line["seed: ".len()..].parse().unwrap();
    let result = read_json(&dir.path().join("result.json"));
    assert_eq!(result["seed"], seed);
    assert_eq!(result["config"]["seed"], seed);
}

#[test]
fn lone_individual_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&[
        "--seed",
        "3",
        "--out-dir",
        s(dir.path()),
        "optimize",
        "--generations",
        "1",
        "--population",
        "1",
    ]);
    let result: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(result["config"]["elite"], 0);
    let progress = fs::read_to_string(dir.path().join("progress.csv")).unwrap();
    let lines: Vec<&str> = progress.lines().collect();
    assert_eq!(lines[0], "generation,score,word");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].ends_with(result["word"].as_str().unwrap()));
}

#[test]
fn seeded_optimization_reaches_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&[
        "--seed",
        "7",
        "--out-dir",
        s(dir.path()),
        "optimize",
        "--arity",
        "3",
        "--length",
        "52",
        "--merit",
        "avg-pairs",
        "--generations",
        "2000",
    ]);
    let result: Value = serde_json::from_slice(&out.stdout).unwrap();
    let score = result["score_db"].as_f64().unwrap();
    assert!(score >= -23.0, "score {score}");
    assert_eq!(result["merit_kind"], "avg-pairs");
    assert_eq!(result["word"].as_str().unwrap().len(), 52);
    assert_eq!(result["per_sequence_min_db"].as_array().unwrap().len(), 3);
}

#[test]
fn json_progress_lines() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "--seed",
        "5",
        "--format",
        "json",
        "--out-dir",
        s(dir.path()),
        "optimize",
        "--generations",
        "4",
        "--population",
        "20",
    ]);
    let progress = fs::read_to_string(dir.path().join("progress.jsonl")).unwrap();
    let records: Vec<Value> = progress
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 5);
    let scores: Vec<f64> = records
        .iter()
        .map(|r| r["score"].as_f64().unwrap())
        .collect();
    assert!(scores.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(records[4]["generation"], 4);
}

fn assert_same_files(a: &Path, b: &Path, names: &[&str]) {
    for name in names {
        let x = fs::read(a.join(name)).unwrap();
        let y = fs::read(b.join(name)).unwrap();
        assert!(x == y, "{name} differs between runs");
    }
}

#[test]
fn optimize_replays_from_config() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    run_ok(&[
        "--out-dir",
        s(first.path()),
        "optimize",
        "--generations",
        "30",
        "--population",
        "60",
        "--merit",
        "max-min",
    ]);
    let cfg = first.path().join("config.ini");
    run_ok(&[
        "--config",
        s(&cfg),
        "--out-dir",
        s(second.path()),
        "optimize",
    ]);
    assert_same_files(
        first.path(),
        second.path(),
        &["config.ini", "result.json", "progress.csv", "code.txt"],
    );
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    fs::write(
        &cfg,
        "# sample settings\ncount = 4\nmerit = max-min\nseed = 9\n",
    )
    .unwrap();
    let out = run_ok(&[
        "--config",
        s(&cfg),
        "--out-dir",
        s(dir.path()),
        "sample",
        "--count",
        "2",
    ]);
    let result: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(result["config"]["count"], 2);
    assert_eq!(result["merit_kind"], "max-min");
    assert_eq!(result["seed"], 9);

    fs::write(&cfg, "count = 4\ncolour = blue\n").unwrap();
    assert_eq!(
        code(&flutter(&[
            "--config",
            s(&cfg),
            "--out-dir",
            s(dir.path()),
            "sample"
        ])),
        2
    );
    fs::write(&cfg, "command = optimize\n").unwrap();
    assert_eq!(
        code(&flutter(&[
            "--config",
            s(&cfg),
            "--out-dir",
            s(dir.path()),
            "sample"
        ])),
        2
    );
}

#[test]
fn sample_matches_library_search() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&["--seed", "11", "--out-dir", s(dir.path()), "sample"]);
    let result: Value = serde_json::from_slice(&out.stdout).unwrap();
    let best = random_search(&SearchConfig {
        seed: 11,
        ..SearchConfig::default()
    })
    .unwrap();
    assert_eq!(result["word"], best.code.to_word());
    assert_eq!(result["score_db"].as_f64().unwrap(), best.score);
    assert_eq!(result["merit_kind"], MeritKind::AvgMin.name());
    assert_eq!(result["config"]["count"], 100);

    let one = run_ok(&[
        "--seed",
        "11",
        "--out-dir",
        s(dir.path()),
        "sample",
        "--count",
        "1",
    ]);
    let one: Value = serde_json::from_slice(&one.stdout).unwrap();
    assert!(one["score_db"].as_f64().unwrap() <= best.score);
}

fn csv_db(path: &Path) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("bin,db"));
    lines
        .enumerate()
        .map(|(i, l)| {
            let (bin, db) = l.split_once(',').unwrap();
            assert_eq!(bin.parse::<usize>().unwrap(), i);
            db.parse().unwrap()
        })
        .collect()
}

#[test]
fn impulse_spectrum_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("impulse.txt");
    fs::write(&seq, format!("1{}\n", "0".repeat(51))).unwrap();
    run_ok(&[
        "--out-dir",
        s(dir.path()),
        "spectrum",
        "--sequence",
        s(&seq),
    ]);
    let db = csv_db(&dir.path().join("spectrum.csv"));
    assert_eq!(db.len(), 33);
    let flat = 20.0 * (1.0f64 / 32.0).log10();
    assert!(db.iter().all(|v| (v - flat).abs() < 1e-6), "{db:?}");
    assert!((flat + 30.103).abs() < 1e-3);
}

#[test]
fn rect_spectrum_hits_floor_at_nulls() {
    let dir = tempfile::tempdir().unwrap();
    let rect = "1".repeat(52);
    run_ok(&["--out-dir", s(dir.path()), "spectrum", "--sequence", &rect]);
    let db = csv_db(&dir.path().join("spectrum.csv"));
    assert_eq!(db[16], -300.0);
    assert_eq!(db[32], -300.0);
    assert!(db[1] > -300.0);
}

#[test]
fn max_min_word_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&[
        "--out-dir",
        s(dir.path()),
        "spectrum",
        "--word",
        fixtures::MAX_MIN.word,
    ]);
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    let minima: Vec<f64> = summary["sequences"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["min_db"].as_f64().unwrap())
        .collect();
    let best = minima.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!((best - fixtures::MAX_MIN.score_db).abs() <= 0.05, "{best}");
    assert!((summary["merits"]["max-min"].as_f64().unwrap() - best).abs() < 1e-12);
    for e in summary["sequences"].as_array().unwrap() {
        assert_eq!(e["complement_check"]["holds"], true);
        let name = e["name"].as_str().unwrap();
        let db = csv_db(&dir.path().join(format!("spectrum-{name}.csv")));
        let min = db.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((min - e["min_db"].as_f64().unwrap()).abs() < 1e-5);
    }
    let combined = csv_db(&dir.path().join("spectrum-combined.csv"));
    assert!(
        (combined.iter().copied().fold(f64::INFINITY, f64::min)
            - summary["combined_min_db"].as_f64().unwrap())
        .abs()
            < 1e-5
    );
}

#[test]
fn delta_psf_without_noise_returns_input() {
    let dir = tempfile::tempdir().unwrap();
    let truth = RasterImage::from_fn(40, 24, 3, |x, y, c| {
        ((x * 5 + y * 3 + c * 70) % 256) as f64 / 255.0
    })
    .unwrap();
    let truth_path = dir.path().join("target.png");
    image_io::save_png(&truth, &truth_path).unwrap();
    let out_dir = dir.path().join("out");
    run_ok(&[
        "--seed",
        "1",
        "--out-dir",
        s(&out_dir),
        "simulate",
        "--truth",
        s(&truth_path),
        "--nf",
        "0",
        "--psf",
        "delta",
    ]);
    let res = image_io::load_image(&out_dir.join("res-custom.png")).unwrap();
    assert_eq!(res, truth);
    let report = read_json(&out_dir.join("report.json"));
    assert!(
        report["conditions"][0]["deblurred"]["full"]["rmse"]
            .as_f64()
            .unwrap()
            < 1e-9
    );
}

#[test]
fn simulate_writes_roster_and_replays() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let out = run_ok(&[
        "--seed",
        "1",
        "--out-dir",
        s(first.path()),
        "simulate",
        "--size",
        "80",
        "--iterations",
        "5",
    ]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = report["conditions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        [
            "flat",
            "raskar",
            "raskarInv",
            "s1",
            "s2",
            "s3",
            "a1",
            "a2",
            "a3"
        ]
    );
    let combined: Vec<&str> = report["combined"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(combined, ["raskarBoth", "s", "a"]);
    let files: Vec<String> = report["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap().to_string())
        .collect();
    for f in &files {
        assert!(first.path().join(f).is_file(), "{f} missing");
    }
    assert!(files.contains(&"blur-flat.png".to_string()));
    assert!(!files.contains(&"blur-flat-scaled.png".to_string()));
    assert!(files.contains(&"res-raskarBoth.png".to_string()));

    let cfg = first.path().join("config.ini");
    run_ok(&[
        "--config",
        s(&cfg),
        "--out-dir",
        s(second.path()),
        "simulate",
    ]);
    let mut all: Vec<&str> = files.iter().map(String::as_str).collect();
    all.extend(["report.json", "config.ini"]);
    assert_same_files(first.path(), second.path(), &all);
}

#[test]
fn condition_selection_keeps_noise_streams() {
    let full = tempfile::tempdir().unwrap();
    let part = tempfile::tempdir().unwrap();
    run_ok(&[
        "--seed",
        "2",
        "--out-dir",
        s(full.path()),
        "simulate",
        "--size",
        "64",
        "--iterations",
        "3",
    ]);
    run_ok(&[
        "--seed",
        "2",
        "--out-dir",
        s(part.path()),
        "simulate",
        "--size",
        "64",
        "--iterations",
        "3",
        "--conditions",
        "s",
    ]);
    assert_same_files(
        full.path(),
        part.path(),
        &["res-s1.png", "res-s2.png", "res-s3.png", "res-s.png"],
    );
    assert!(!part.path().join("res-flat.png").exists());
}
