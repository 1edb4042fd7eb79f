use std::path::Path;
use std::process::{Command, Output};

fn hodge_rsm(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hodge-rsm"))
        .args(args)
        .arg("--output")
        .arg(dir)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn generate_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.off");
    let b = dir.path().join("b.off");
    for p in [&a, &b] {
        let out = hodge_rsm(dir.path(), &["generate", "--kind", "flat_torus", "--resolution", "16", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    let counts: Vec<usize> = text.lines().nth(2).unwrap().split_whitespace().map(|x| x.parse().unwrap()).collect();
    assert_eq!(counts[0], 256);
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&hodge_rsm(dir.path(), &["generate", "--kind", "klein_bottle"])), 2);
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"mesh": {"source": "path", "path": "/nonexistent/mesh.off"}}"#).unwrap();
    assert_eq!(code(&hodge_rsm(dir.path(), &["--config", cfg.to_str().unwrap(), "cover"])), 2);
    assert_eq!(code(&hodge_rsm(dir.path(), &["--epsilon", "1.5", "cover"])), 2);
    assert_eq!(code(&hodge_rsm(dir.path(), &["--degree", "3", "decompose"])), 2);
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = hodge_rsm(dir.path(), &["--harmonic-tol", "1e-30", "--degree", "0", "decompose"]);
    assert_eq!(code(&out), 1, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("decompose_report.json").exists());
    assert_eq!(code(&hodge_rsm(dir.path(), &["report"])), 1);
}

#[test]
fn cover_and_decompose_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = hodge_rsm(dir.path(), &["cover"]);
    assert_eq!(code(&out), 0);
    let first = std::fs::read(dir.path().join("covering.json")).unwrap();
    assert_eq!(code(&hodge_rsm(dir.path(), &["cover"])), 0);
    assert_eq!(first, std::fs::read(dir.path().join("covering.json")).unwrap());

    let out = hodge_rsm(dir.path(), &["--degree", "1", "--mode", "d-dstar", "decompose"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.path().join("orthogonality_p1.csv").exists());
    assert!(dir.path().join("decompose_timings.json").exists());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("decompose_report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["mode"], "d_dstar");
    assert_eq!(report["passed"], true);
}

#[test]
fn solve_passes_on_default_torus() {
    let dir = tempfile::tempdir().unwrap();
    let out = hodge_rsm(dir.path(), &["solve"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert!(dir.path().join("ladder_p0.csv").exists());
}

#[test]
fn report_without_reports_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&hodge_rsm(dir.path(), &["report"])), 2);
}
