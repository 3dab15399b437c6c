use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wienerlab"))
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--output").arg(out).output().expect("binary runs")
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn assert_same_files(dir: &Path, expected: &Path) {
    for f in ["clark.json", "energy.json", "refinement.csv"] {
        let got = std::fs::read_to_string(dir.join(f)).unwrap();
        let want = std::fs::read_to_string(expected.join(f)).unwrap();
        assert_eq!(got, want, "{f} differs from {}", expected.display());
    }
}

#[test]
fn represent_matches_golden_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["represent", "--functional", "x1*x2", "--n", "2"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_same_files(dir.path(), &golden("represent_x1x2"));

    let dir = tempfile::tempdir().unwrap();
    let o = run(&["represent", "--functional", "h2(x1)", "--n", "1", "--refine", "1,2,4,8"], dir.path());
    assert!(o.status.success());
    assert_same_files(dir.path(), &golden("represent_h2"));
}

#[test]
fn represent_reads_functional_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("f.txt");
    std::fs::write(&src, "x1 *\n  x2\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&["represent", "--functional", src.to_str().unwrap(), "--n", "2"], &out);
    assert!(o.status.success());
    assert_same_files(&out, &golden("represent_x1x2"));
}

#[test]
fn errors_leave_no_output_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["represent", "--functional", "x1*(", "--n", "2"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:4"));
    assert!(!out.exists());

    let o = run(&["represent", "--functional", "h9(x1)", "--n", "2"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["verify", "--bogus"],
        vec!["frobnicate"],
        vec!["verify", "--n", "0"],
        vec!["verify", "--tolerance", "-1"],
        vec!["rotate", "--construction", "spiral"],
        vec!["rotate", "--plant", "scale:9:2", "--n", "2"],
        vec!["bench", "--suite", "nope"],
    ] {
        let o = run(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"n": 5, "refine": [1, 2]}"#).unwrap();
    let out = dir.path().join("out");
    let o = bin()
        .args(["represent", "--functional", "x1*x2", "--n", "2", "--config"])
        .arg(&cfg)
        .arg("--output")
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success());
    let clark: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("clark.json")).unwrap()).unwrap();
    assert_eq!(clark["n"], 2);
    assert_eq!(std::fs::read_to_string(out.join("refinement.csv")).unwrap().lines().count(), 3);

    std::fs::write(&cfg, r#"{"n": 5, "colour": "red"}"#).unwrap();
    let o = bin().args(["verify", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

fn test_passed(report: &serde_json::Value, name: &str) -> bool {
    report["tests"].as_array().unwrap().iter().find(|t| t["name"] == name).unwrap_or_else(|| panic!("no test {name}"))
        ["pass"]
        .as_bool()
        .unwrap()
}

fn rotation_report(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("rotation-report.json")).unwrap()).unwrap()
}

// the statistical batteries fail at rate alpha by design, so only the exact checks are asserted
#[test]
fn rotate_detects_planted_defects() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["rotate", "--n", "3", "--construction", "arctan:2", "--N", "20000"];
    let o = run(&base, dir.path());
    assert!(matches!(o.status.code(), Some(0 | 1)));
    let report = rotation_report(dir.path());
    assert_eq!(report["N"], 20000);
    assert!(test_passed(&report, "isometry"));
    assert!(test_passed(&report, "structural-predictability"));
    for plant in ["scale:2:2.0", "copy:1:2"] {
        let o = run(&[&base[..], &["--plant", plant]].concat(), dir.path());
        assert_eq!(o.status.code(), Some(1), "{plant} not detected");
        assert!(!test_passed(&rotation_report(dir.path()), "isometry"), "{plant}");
    }
}

#[test]
fn bench_prints_timings() {
    let o = bin().args(["bench", "--suite", "refine"]).output().unwrap();
    assert!(o.status.success());
    let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 3);
}
