use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

fn tactile(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tactile"))
        .current_dir(dir)
        .env_remove("TACTILE_CONFIG")
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = tactile(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

/// One single-contact dataset and model shared by the tests that only read them.
fn trained() -> &'static (tempfile::TempDir, PathBuf, PathBuf) {
    static CELL: OnceLock<(tempfile::TempDir, PathBuf, PathBuf)> = OnceLock::new();
    CELL.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path();
        ok(
            p,
            &[
                "generate", "--mode", "single", "--reps", "1", "--out", "d.csv",
            ],
        );
        ok(
            p,
            &["train", "--mode", "single", "d.csv", "--out", "m.json"],
        );
        let (d, m) = (p.join("d.csv"), p.join("m.json"));
        (dir, d, m)
    })
}

#[test]
fn generate_prints_sample_counts() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(
        ok(p, &["generate", "--mode", "single", "--reps", "5"]).trim(),
        "6060"
    );
    assert!(p.join("data/single.csv").exists());
    assert!(p.join("data/single.meta.toml").exists());
    assert_eq!(
        ok(p, &["generate", "--mode", "two", "--reps", "2"]).trim(),
        "648"
    );
    assert_eq!(
        ok(
            p,
            &["generate", "--mode", "single", "--reps", "20", "--out", "full.csv"]
        )
        .trim(),
        "24240"
    );
    let rows = std::fs::read_to_string(p.join("full.csv"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(rows, 24241);
}

#[test]
fn training_is_byte_reproducible() {
    let (dir, data, first) = trained();
    let again = dir.path().join("m2.json");
    ok(
        dir.path(),
        &[
            "train",
            "--mode",
            "single",
            data.to_str().unwrap(),
            "--out",
            again.to_str().unwrap(),
        ],
    );
    assert_eq!(
        std::fs::read(first).unwrap(),
        std::fs::read(&again).unwrap()
    );
}

#[test]
fn missing_node_fails_training_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(
        p,
        &[
            "generate", "--mode", "single", "--reps", "1", "--out", "full.csv",
        ],
    );
    let text = std::fs::read_to_string(p.join("full.csv")).unwrap();
    let kept: Vec<&str> = text.lines().filter(|l| !l.contains(",4,7,")).collect();
    assert!(kept.len() < text.lines().count());
    std::fs::write(p.join("gap.csv"), kept.join("\n") + "\n").unwrap();
    let out = tactile(
        p,
        &["train", "--mode", "single", "gap.csv", "--out", "m.json"],
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("(4,7)"));
    assert!(!p.join("m.json").exists());
}

#[test]
fn eval_writes_report_and_heatmaps() {
    let (_, data, _) = trained();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let line = ok(
        p,
        &[
            "eval",
            "--mode",
            "single",
            data.to_str().unwrap(),
            "--k",
            "3",
            "--out",
            "rep",
            "--emit-heatmaps",
        ],
    );
    for part in ["stretch R²", "force R²", "detection"] {
        assert!(line.contains(part), "{line}");
    }
    for f in [
        "metrics.json",
        "cm_row.csv",
        "cm_col.csv",
        "cm_row.pgm",
        "cm_col.pgm",
        "cm_detection.pgm",
    ] {
        assert!(p.join("rep").join(f).exists(), "{f}");
    }
    let table = ok(
        p,
        &[
            "report",
            "rep/metrics.json",
            "--out",
            "again",
            "--emit-heatmaps",
        ],
    );
    assert!(table.contains("detection accuracy"));
    assert_eq!(
        std::fs::read(p.join("rep/cm_col.pgm")).unwrap(),
        std::fs::read(p.join("again/cm_col.pgm")).unwrap()
    );
}

#[test]
fn k_below_two_is_a_usage_error() {
    let (_, data, _) = trained();
    let dir = tempfile::tempdir().unwrap();
    let out = tactile(
        dir.path(),
        &["eval", data.to_str().unwrap(), "--k", "1", "--out", "rep"],
    );
    assert_eq!(code(&out), 1);
    assert!(!dir.path().join("rep").exists());
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&tactile(dir.path(), &["frobnicate"])), 1);
    assert_eq!(
        code(&tactile(dir.path(), &["generate", "--mode", "three"])),
        1
    );
    assert_eq!(code(&tactile(dir.path(), &["--help"])), 0);
}

#[test]
fn infer_rest_frame_and_empty_input() {
    let (_, _, model) = trained();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let header = (1..=10)
        .map(|i| format!("cx{i}"))
        .chain((1..=10).map(|i| format!("cy{i}")))
        .collect::<Vec<_>>()
        .join(",");
    std::fs::write(
        p.join("rest.csv"),
        format!("{header}\n{}\n", vec!["1"; 20].join(",")),
    )
    .unwrap();
    std::fs::write(p.join("none.csv"), format!("{header}\n")).unwrap();
    let m = model.to_str().unwrap();
    let rows = ok(p, &["infer", "--mode", "single", m, "rest.csv"]);
    let lines: Vec<&str> = rows.lines().collect();
    assert_eq!(lines[0], "stretch,contact_detected,node_x,node_y,force_n");
    let cells: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(&cells[1..], &["0", "0", "0", "0"]);
    assert!((cells[0].parse::<f64>().unwrap() - 1.0).abs() < 0.01);

    ok(p, &["infer", m, "none.csv", "--out", "est.csv"]);
    assert_eq!(
        std::fs::read_to_string(p.join("est.csv")).unwrap(),
        "stretch,contact_detected,node_x,node_y,force_n\n"
    );
}

#[test]
fn infer_rejects_wrong_mode() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(p, &["generate", "--mode", "two"]);
    ok(p, &["train", "--mode", "two"]);
    ok(
        p,
        &[
            "infer",
            "--mode",
            "two",
            "models/two.json",
            "data/two.csv",
            "--out",
            "two_est.csv",
        ],
    );
    let est = std::fs::read_to_string(p.join("two_est.csv")).unwrap();
    assert_eq!(
        est.lines().next().unwrap(),
        "n_contacts,x1,y1,f1_n,x2,y2,f2_n"
    );
    assert_eq!(est.lines().count(), 649);
    let out = tactile(
        p,
        &[
            "infer",
            "--mode",
            "single",
            "models/two.json",
            "data/two.csv",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("two model"));
}

#[test]
fn config_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(
        p.join("alt.toml"),
        "[single]\nreps_per_cell = 2\n[paths]\ndata_dir = \"alt\"\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_tactile"))
        .current_dir(p)
        .env("TACTILE_CONFIG", "alt.toml")
        .args(["generate"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "2424");
    assert!(p.join("alt/single.csv").exists());

    let missing = Command::new(env!("CARGO_BIN_EXE_tactile"))
        .current_dir(p)
        .env("TACTILE_CONFIG", "nope.toml")
        .args(["generate"])
        .output()
        .unwrap();
    assert_eq!(code(&missing), 1);
    std::fs::write(p.join("bad.toml"), "[skin]\nneighbor_decay = 1.5\n").unwrap();
    assert_eq!(code(&tactile(p, &["--config", "bad.toml", "generate"])), 1);
}

#[test]
fn chain_reproduces_reports_byte_for_byte() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path();
        ok(
            p,
            &[
                "generate", "--mode", "single", "--reps", "1", "--seed", "11",
            ],
        );
        ok(p, &["train", "--mode", "single", "--seed", "5"]);
        ok(p, &["eval", "--mode", "single", "--k", "3", "--seed", "9"]);
        ok(p, &["generate", "--mode", "two", "--seed", "12"]);
        ok(p, &["train", "--mode", "two"]);
        ok(p, &["eval", "--mode", "two"]);
        let read = |f: &str| std::fs::read(p.join(f)).unwrap();
        (
            read("models/single.json"),
            read("reports/single/metrics.json"),
            read("reports/two/metrics.json"),
        )
    };
    assert_eq!(run(), run());
}
