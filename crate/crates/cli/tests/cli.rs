use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const TWO_BALLS: &str = r#"{"dim": 2, "sets": [
  {"type": "ball", "center": [1, 1], "radius": 1},
  {"type": "ball", "center": [-1, 1], "radius": 1}
]}"#;

const PLANES: &str = r#"{"dim": 3, "sets": [
  {"type": "subspace", "basis": [[1, 0], [0, 1], [0, 0]]},
  {"type": "subspace", "basis": [[0, 0], [1, 0], [0, 1]]}
]}"#;

fn aamr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aamr"))
        .args(args)
        .env_remove("AAMR_SEED")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap()
}

#[test]
fn two_ball_solve_converges_to_the_tangent_point() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "balls.json", TWO_BALLS);
    let o = aamr(&["solve", p.to_str().unwrap(), "--q", "2,1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(field(&out, "status"), "converged");
    let shadow: Vec<f64> = field(&out, "shadow")
        .split(", ")
        .map(|s| s.parse().unwrap())
        .collect();
    assert!(
        shadow[0].abs() < 1e-4 && (shadow[1] - 1.0).abs() < 1e-4,
        "{shadow:?}"
    );
}

#[test]
fn exit_codes_follow_the_status() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "balls.json", TWO_BALLS);
    let p = p.to_str().unwrap();
    let o = aamr(&["solve", p, "--q", "0,2", "--max-iter", "2000"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(field(&stdout(&o), "status"), "budget_exhausted");
    let o = aamr(&["solve", p, "--q", "0,2", "--divergence-threshold", "20"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(field(&stdout(&o), "status"), "diverged");
}

#[test]
fn beta_one_is_rejected_with_a_pointer_to_drm() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "balls.json", TWO_BALLS);
    let o = aamr(&["solve", p.to_str().unwrap(), "--q", "2,1", "--beta", "1.0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("use --method drm for beta=1"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(aamr(&["solve"]).status.code(), Some(1));
    assert_eq!(aamr(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(aamr(&["--help"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "balls.json", TWO_BALLS);
    let o = aamr(&["solve", p.to_str().unwrap(), "--q", "1,2,3"]);
    assert_eq!(o.status.code(), Some(1));
    let o = aamr(&[
        "solve",
        p.to_str().unwrap(),
        "--q",
        "2,1",
        "--method",
        "map",
        "--alpha",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_problem_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "bad.json",
        r#"{"dim": 2, "sets": [{"type": "ball", "center": [0, 0], "radius": -1}]}"#,
    );
    let o = aamr(&["solve", p.to_str().unwrap(), "--q", "1,1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sets[0].radius"), "{}", stderr(&o));

    let p = write(
        dir.path(),
        "short.json",
        r#"{"dim": 3, "sets": [{"type": "box", "lower": [0, 0], "upper": [1, 1, 1]}]}"#,
    );
    let o = aamr(&["solve", p.to_str().unwrap(), "--q", "1,1,1"]);
    assert!(stderr(&o).contains("sets[0].lower"), "{}", stderr(&o));
}

#[test]
fn trace_is_written_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "planes.json", PLANES);
    let out = dir.path().join("run");
    fs::create_dir(&out).unwrap();
    let o = aamr(&[
        "solve",
        p.to_str().unwrap(),
        "--q",
        "1,2,3",
        "--method",
        "map",
        "--trace",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("iteration,error,step_norm"));
    let iterations: usize = field(&stdout(&o), "iterations").parse().unwrap();
    assert_eq!(lines.count(), iterations + 1);
}

#[test]
fn every_method_solves_the_planes() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "planes.json", PLANES);
    for m in ["aamr", "drm", "map", "haugazeau", "hlwb", "cm"] {
        let o = aamr(&[
            "solve",
            p.to_str().unwrap(),
            "--q",
            "1,2,3",
            "--method",
            m,
            "--eps",
            "1e-4",
        ]);
        assert_eq!(o.status.code(), Some(0), "{m}: {}", stderr(&o));
        let shadow: Vec<f64> = field(&stdout(&o), "shadow")
            .split(", ")
            .map(|s| s.parse().unwrap())
            .collect();
        assert!(
            (shadow[0]).abs() < 1e-3 && (shadow[1] - 2.0).abs() < 1e-3 && shadow[2].abs() < 1e-3,
            "{m}: {shadow:?}"
        );
    }
    let o = aamr(&[
        "solve",
        p.to_str().unwrap(),
        "--q",
        "1,2,3",
        "--method",
        "rap",
        "--mu",
        "1.5",
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn angle_reports_friedrichs_angle_and_intersection() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "planes.json", PLANES);
    let o = aamr(&["angle", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(field(&out, "theta_F"), "1.570796");
    assert_eq!(field(&out, "intersection_dim"), "1");

    let same = write(
        dir.path(),
        "same.json",
        &PLANES.replace("[[0, 0], [1, 0], [0, 1]]", "[[1, 0], [0, 1], [0, 0]]"),
    );
    assert_eq!(
        aamr(&["angle", same.to_str().unwrap()]).status.code(),
        Some(1)
    );
}

#[test]
fn rates_sweep_prints_the_map_rate() {
    let dir = tempfile::tempdir().unwrap();
    let o = aamr(&[
        "bench",
        "rates",
        "--theta",
        "0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let expected = 0.5_f64.cos().powi(2);
    let rates = fs::read_to_string(dir.path().join("rates.csv")).unwrap();
    let map = rates.lines().find(|l| l.contains(",map,")).unwrap();
    let estimated: f64 = map.split(',').nth(2).unwrap().parse().unwrap();
    assert!((estimated - expected).abs() / expected < 0.05, "{map}");
    assert!(stdout(&o).contains("map"));
}

#[test]
fn bench_output_is_deterministic_for_a_seed() {
    let args = |out: &str| {
        vec![
            "bench".to_string(),
            "angle-profile".into(),
            "--seed".into(),
            "7".into(),
            "--n".into(),
            "10".into(),
            "--instances".into(),
            "4".into(),
            "--starts".into(),
            "2".into(),
            "--methods".into(),
            "map,aamr:0.9:0.9,rap-opt".into(),
            "--out".into(),
            out.into(),
        ]
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let a = args(d.path().to_str().unwrap());
        let o = aamr(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for name in ["runs.csv", "summary.csv"] {
        let a = fs::read(dirs[0].path().join(name)).unwrap();
        let b = fs::read(dirs[1].path().join(name)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name}");
    }
    assert!(dirs[0].path().join("median_vs_angle.svg").exists());
}
