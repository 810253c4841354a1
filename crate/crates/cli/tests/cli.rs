use std::path::Path;
use std::process::{Command, Output};

fn accplace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_accplace")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &Path, cells: &str) -> std::path::PathBuf {
    let out = accplace(&["gen", "--cells", cells, "--nets", cells, "--seed", "3", "--out", s(&dir.join("d"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("d/synth.aux")
}

fn hpwl_of(out: &Output) -> f64 {
    let text = String::from_utf8_lossy(&out.stdout);
    let line = text.lines().find(|l| l.starts_with("HPWL ")).expect("HPWL line");
    line[5..].trim().parse().unwrap()
}

#[test]
fn gen_place_eval_plot() {
    let dir = tempfile::tempdir().unwrap();
    let aux = gen(dir.path(), "300");
    let pl = dir.path().join("out.pl");
    let rep = dir.path().join("r.json");
    let out = accplace(&[
        "place",
        "--aux",
        s(&aux),
        "--grid",
        "32",
        "--alpha",
        "4",
        "--target-density",
        "1.0",
        "--tau-min",
        "0.10",
        "--solver",
        "accfft",
        "--short-range",
        "fft",
        "--out",
        s(&pl),
        "--report",
        s(&rep),
        "--threads",
        "2",
        "--seed",
        "5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&rep).unwrap()).unwrap();
    assert_eq!(report["converged"], true);
    assert!(report["final_tau"].as_f64().unwrap() <= 0.10);

    let before = hpwl_of(&accplace(&["eval", "--aux", s(&aux), "--pl", s(&dir.path().join("d/synth.pl"))]));
    let ev = accplace(&["eval", "--aux", s(&aux), "--pl", s(&pl)]);
    assert!(ev.status.success());
    let after = hpwl_of(&ev);
    assert!((after - report["final_hpwl"].as_f64().unwrap()).abs() <= 1e-6 * after);
    assert!(before > 0.0 && after > 0.0);

    let svg = dir.path().join("p.svg");
    let out = accplace(&["plot", "--aux", s(&aux), "--pl", s(&pl), "--out", s(&svg)]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<circle").count(), 300);
}

#[test]
fn snapshots_every_n_iterations() {
    let dir = tempfile::tempdir().unwrap();
    let aux = gen(dir.path(), "100");
    let pl = dir.path().join("run.pl");
    let out = accplace(&[
        "place",
        "--aux",
        s(&aux),
        "--grid",
        "16",
        "--solver",
        "fine-fft",
        "--max-iters",
        "9",
        "--every",
        "3",
        "--out",
        s(&pl),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut snaps: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".svg"))
        .collect();
    snaps.sort();
    assert_eq!(snaps, ["run.iter3.svg", "run.iter6.svg", "run.iter9.svg"]);
}

#[test]
fn usage_and_parse_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(accplace(&[]).status.code(), Some(1));
    assert_eq!(accplace(&["place", "--grid", "32"]).status.code(), Some(1));
    assert_eq!(accplace(&["field-bench", "--modes", "magic"]).status.code(), Some(1));
    let missing = dir.path().join("none.aux");
    assert_eq!(accplace(&["eval", "--aux", s(&missing), "--pl", "x.pl"]).status.code(), Some(1));

    let aux = gen(dir.path(), "50");
    let pl = dir.path().join("o.pl");
    let bad_grid = accplace(&["place", "--aux", s(&aux), "--grid", "30", "--out", s(&pl)]);
    assert_eq!(bad_grid.status.code(), Some(1));
    let zero = accplace(&["place", "--aux", s(&aux), "--grid", "16", "--every", "0", "--out", s(&pl)]);
    assert_eq!(zero.status.code(), Some(1));
    assert!(accplace(&["--help"]).status.success());
}

#[test]
fn numerical_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let aux = gen(dir.path(), "50");
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "k_e = NaN\n").unwrap();
    let out = accplace(&[
        "place",
        "--aux",
        s(&aux),
        "--grid",
        "16",
        "--config",
        s(&cfg),
        "--out",
        s(&dir.path().join("o.pl")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerical"));
}

#[test]
fn field_bench_prints_a_row_per_mode() {
    let out = accplace(&["field-bench", "--grid", "64", "--alpha", "4", "--charges", "200", "--seed", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for m in ["direct", "fine-fft", "accfft"] {
        assert!(text.lines().any(|l| l.starts_with(m)), "{text}");
    }
    let json = accplace(&["field-bench", "--grid", "32", "--modes", "fine-fft,accfft", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
}
