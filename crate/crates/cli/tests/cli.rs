//! Runs the binary and compares its output with files under `tests/golden`.
//! Set `UPDATE_GOLDEN=1` to rewrite them.

use std::path::PathBuf;
use std::process::{Command, Output};

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn fixture(name: &str) -> String {
    crate_dir()
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conecert"))
        .args(args)
        .env_remove("CONECERT_RTOL")
        .current_dir(crate_dir())
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn golden(name: &str, actual: &str) {
    let path = crate_dir().join("tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}; run with UPDATE_GOLDEN=1", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn catalog_csv() {
    let o = run(&["catalog", "--max-dim", "8"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("# schema: catalog/v1\nid,k,alpha_sq,normal_radius,slope,class\n"));
    for line in out.lines().skip(2) {
        let k: usize = line.rsplit(',').nth(4).unwrap().parse().unwrap();
        assert!((1..=8).contains(&k), "{line}");
    }
    golden("catalog_8.csv", &out);
}

#[test]
fn catalog_json() {
    let o = run(&["catalog", "--max-dim", "2", "--format", "json"]);
    assert_eq!(code(&o), 0);
    golden("catalog_2.json", &stdout(&o));
}

#[test]
fn table_csv() {
    let o = run(&[
        "table",
        "--m",
        "12",
        "--alphas",
        "0,2,3,4,4.359",
        "--bound",
        "c",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.lines().nth(2).unwrap().starts_with("12,0,c,7.9629,"));
    golden("table_12_c.csv", &out);
}

#[test]
fn table_marks_nonexistence() {
    let o = run(&[
        "table",
        "--m",
        "3,7,12",
        "--alphas",
        "1.4142135623730951,2.449489742783178,5",
        "--bound",
        "c",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("3,1.4142135623730951,c,,,local_obstruction"));
    assert!(out.contains("7,2.449489742783178,c,,,envelope_hit"));
    golden("table_nonexistence.csv", &out);
}

#[test]
fn table_json_carries_reasons() {
    let o = run(&[
        "table", "--m", "3,12", "--alphas", "0,1.5", "--bound", "F", "--format", "json",
    ]);
    assert_eq!(code(&o), 0);
    golden("table_f.json", &stdout(&o));
}

#[test]
fn certify_simons_with_det() {
    let o = run(&[
        "certify",
        "--link",
        &fixture("simons.json"),
        "--bound",
        "det",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("\"verdict\": \"area_minimizing\""));
    golden(
        "certify_simons.json",
        &out.replace(&fixture("simons.json"), "simons.json"),
    );
}

#[test]
fn certify_clifford_torus_is_undetermined() {
    let o = run(&["certify", "S^1", "S^1"]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("\"reason\": \"local_obstruction\""));
    golden("certify_clifford.json", &out);
}

#[test]
fn product_is_a_link_file() {
    let o = run(&["product", "--id", "S^3", "--id", "S^3"]);
    assert_eq!(code(&o), 0);
    let expected = std::fs::read_to_string(fixture("simons.json")).unwrap();
    assert_eq!(stdout(&o), expected);
}

#[test]
fn link_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("conecert-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let first = dir.join("once.json");
    let o = run(&["product", "focal(6,1,1,+)", "S^10", "--no-spectra"]);
    assert_eq!(code(&o), 0);
    std::fs::write(&first, stdout(&o)).unwrap();
    let again = run(&["product", first.to_str().unwrap()]);
    assert_eq!(code(&again), 0);
    assert_eq!(stdout(&again), stdout(&o));
    golden("product_focal_sphere.json", &stdout(&o));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn malformed_link_points_at_field() {
    let o = run(&["certify", "--link", &fixture("missing_k.json")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("missing field `k`"), "{}", stderr(&o));

    let o = run(&["certify", "--link", &fixture("bad_spectrum.json")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("field `spectra[0]`"), "{}", stderr(&o));

    let o = run(&["certify", "no-such-file.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn invalid_arguments_exit_2() {
    assert_eq!(code(&run(&["table", "--m", "1", "--alphas", "0"])), 2);
    assert_eq!(code(&run(&["table", "--m", "12", "--alphas", "-1"])), 2);
    assert_eq!(code(&run(&["certify", "iso(3,1,2)"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(
        code(&run(&["threshold", "--max-slope", "0.5", "--min-gap", "1"])),
        2
    );
}

#[test]
fn trace_is_plot_ready() {
    let o = run(&["trace", "--m", "12", "--alpha", "4.358898943540674"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("# schema: trace/v1"));
    assert_eq!(lines.next(), Some("# bound: c, m: 12, outcome: found"));
    assert_eq!(lines.next(), Some("theta,w,envelope"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() > 20);
    assert_eq!(rows[0], vec![0.0, 1.0, 1.0]);
    assert!(rows
        .windows(2)
        .skip(1)
        .all(|p| p[1][0] > p[0][0] && p[1][1] < p[0][1]));
    assert_eq!(rows.last().unwrap()[1], 0.0);

    let g = run(&[
        "trace",
        "--m",
        "12",
        "--alpha",
        "4.358898943540674",
        "--form",
        "g",
    ]);
    assert!(stdout(&g).contains("t,g,envelope"));

    let det = run(&["trace", "--bound", "det", "--link", &fixture("simons.json")]);
    assert_eq!(code(&det), 0);
    assert!(stdout(&det).starts_with("# schema: trace/v1\n# bound: det, m: 7"));
}

#[test]
fn search_copies_of_circles() {
    let o = run(&["search-copies", "S^1", "--n-max", "64", "--window", "5"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.contains("\"n_min\": 7"));
    golden("search_s1.json", &out);

    let o = run(&["search-copies", "S^1:2", "--n-max", "3"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn threshold_report() {
    let o = run(&["threshold", "--max-slope", "5", "--min-gap", "0.8"]);
    assert_eq!(code(&o), 0);
    golden("threshold_5_08.json", &stdout(&o));
}

#[test]
fn sweep_is_reproducible() {
    let args = [
        "sweep",
        "--min-dim",
        "37",
        "--max-dim",
        "60",
        "--samples",
        "6",
        "--seed",
        "11",
    ];
    let a = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&run(&args)));
    assert!(stdout(&a).contains("\"failed\": 0"));
    golden("sweep_6.json", &stdout(&a));
}

#[test]
fn theorem_gates_and_confirms() {
    let o = run(&["theorem", "--theorem", "t3", "iso(2,1,6)", "S^3"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("dimension"), "{}", stderr(&o));

    let o = run(&["theorem", "--theorem", "t2", "iso(2,1,6)", "iso(2,1,6)"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("\"confirmed\": true"));
    golden("theorem_t2.json", &stdout(&o));
}

#[test]
fn rtol_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_conecert"))
        .args(["certify", "S^12", "--bound", "c"])
        .env("CONECERT_RTOL", "1e-10")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("\"rtol\": 1e-10"));
    let bad = Command::new(env!("CARGO_BIN_EXE_conecert"))
        .args(["certify", "S^12"])
        .env("CONECERT_RTOL", "0.5")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn timing_is_opt_in() {
    let plain = stdout(&run(&["threshold", "--max-slope", "1", "--min-gap", "2"]));
    assert!(!plain.contains("wall_time_s"));
    let timed = stdout(&run(&[
        "threshold",
        "--max-slope",
        "1",
        "--min-gap",
        "2",
        "--timing",
    ]));
    assert!(timed.contains("wall_time_s"));
}
