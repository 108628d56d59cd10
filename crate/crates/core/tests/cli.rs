use std::path::Path;
use std::process::{Command, Output};

fn parawave(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parawave"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn report(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn verify_basis_passes_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("basis");
    let o = parawave(&["verify-basis", "--resolution", "32"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["command"], "verify-basis");
    assert_eq!(r["passed"], true);
    assert_eq!(r["config"]["resolution"], 32);
    let csv = std::fs::read_to_string(out.join("basis.csv")).unwrap();
    assert!(csv.lines().count() > 1);
}

#[test]
fn too_small_resolution_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = parawave(&["verify-basis", "--resolution", "8"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("resolution"));
}

#[test]
fn quadratic_ramp_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "resolution = 32\nramp = \"quadratic\"\n");
    let o = parawave(&["verify-basis", "--config", &cfg], &dir.path().join("out"));
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn unknown_estimate_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = parawave(&["verify-estimates", "--estimate", "not-an-estimate"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 3\nresolutoin = 32\n");
    let o = parawave(&["verify-basis", "--config", &cfg], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("resolutoin"), "{err}");
}

#[test]
fn small_solve_converges_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve");
    let args = ["solve", "--resolution", "32", "--preset", "single-atom", "--scale", "1e-3"];
    let o = parawave(&args, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["result"]["state"]["status"], "converged");
    for name in ["increments.csv", "blocks.csv", "detail_levels.csv"] {
        assert!(std::fs::read_to_string(out.join(name)).unwrap().lines().count() > 1, "{name}");
    }
    let first = std::fs::read(out.join("report.json")).unwrap();
    assert_eq!(parawave(&args, &out).status.code(), Some(0));
    assert_eq!(first, std::fs::read(out.join("report.json")).unwrap());
}

#[test]
fn large_data_reports_non_contraction() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("big");
    let o = parawave(&["solve", "--resolution", "32", "--preset", "single-atom", "--scale", "100"], &out);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["passed"], false);
    assert_ne!(r["result"]["state"]["status"], "converged");
}

#[test]
fn seeds_change_random_data() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str| {
        let out = dir.path().join(format!("seed{seed}"));
        let o = parawave(&["solve", "--resolution", "32", "--preset", "random", "--scale", "1e-3", "--seed", seed], &out);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(out.join("increments.csv")).unwrap()
    };
    assert_ne!(run("1"), run("2"));
}
