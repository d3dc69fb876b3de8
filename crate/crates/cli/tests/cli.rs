use std::path::Path;
use std::process::{Command, Output};

fn sphere_eq(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sphere-eq"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("SPHERE_EQ_THREADS", t),
        None => cmd.env_remove("SPHERE_EQ_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn ok(args: &[&str], threads: Option<&str>) -> Vec<u8> {
    let out = sphere_eq(args, threads);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn code(args: &[&str]) -> i32 {
    sphere_eq(args, None).status.code().expect("exit code")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn tables_are_byte_identical_across_runs_and_threads() {
    let t1 = ["table1", "--n", "10,25", "--grid", "512", "--seed", "3,4"];
    let t2 = ["table2", "--n", "20,30", "--seed", "1,2,3", "--iters", "15", "--knn", "6"];
    for args in [&t1[..], &t2[..]] {
        let one = ok(args, Some("1"));
        assert_eq!(one, ok(args, Some("1")));
        assert_eq!(one, ok(args, Some("3")));
        assert_eq!(one, ok(args, None));
        assert!(one.starts_with(b"N,kernel,D\n"));
    }
}

#[test]
fn generate_refine_score_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    let refined = dir.path().join("refined.csv");
    let history = dir.path().join("history.csv");
    ok(&["generate", "--n", "30", "--seed", "5", "--grid", "256", "--out", path_str(&pts)], None);
    let first = std::fs::read(&pts).unwrap();
    ok(&["generate", "--n", "30", "--seed", "5", "--grid", "256", "--out", path_str(&pts)], Some("2"));
    assert_eq!(first, std::fs::read(&pts).unwrap());

    ok(
        &[
            "refine", "--input", path_str(&pts), "--knn", "5", "--iters", "12", "--history",
            path_str(&history), "--out", path_str(&refined),
        ],
        None,
    );
    let h = std::fs::read_to_string(&history).unwrap();
    assert!(h.starts_with("iteration,discrepancy\n1,"));
    assert_eq!(h.lines().count(), 13);

    let json = ok(&["score", "--input", path_str(&refined)], None);
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(v["N"], 30);
    assert_eq!(v["method"], "pairwise_rms");
    let energy = ok(&["score", "--input", path_str(&refined), "--method", "energy", "--kernel", "riesz:s=1"], None);
    let v: serde_json::Value = serde_json::from_slice(&energy).unwrap();
    assert_eq!(v["diagonal"], "exclude");
}

#[test]
fn interpolation_and_sweep_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    ok(&["generate", "--n", "40", "--method", "random", "--seed", "2", "--out", path_str(&pts)], None);
    let model = ok(&["interpolate", "--input", path_str(&pts), "--epsilon", "2"], None);
    let v: serde_json::Value = serde_json::from_slice(&model).unwrap();
    assert_eq!(v["w"].as_array().unwrap().len(), 40);
    assert_eq!(v["b"].as_array().unwrap().len(), 4);

    let sweep = ok(&["sweep", "--input", path_str(&pts), "--epsilon", "1:2:0.5", "--degree", "-1"], None);
    let text = String::from_utf8(sweep).unwrap();
    assert!(text.starts_with("epsilon,mse,status\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn convert_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    let sph = dir.path().join("pts_sph.csv");
    let back = dir.path().join("back.csv");
    ok(&["generate", "--n", "10", "--method", "random", "--out", path_str(&pts)], None);
    ok(&["convert", "--input", path_str(&pts), "--to", "spherical", "--out", path_str(&sph)], None);
    ok(&["convert", "--input", path_str(&sph), "--to", "cartesian", "--out", path_str(&back)], None);
    let a = std::fs::read_to_string(&pts).unwrap();
    let b = std::fs::read_to_string(&back).unwrap();
    for (la, lb) in a.lines().zip(b.lines()).skip(1) {
        for (x, y) in la.split(',').zip(lb.split(',')) {
            let (x, y): (f64, f64) = (x.parse().unwrap(), y.parse().unwrap());
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let dup = dir.path().join("dup.csv");
    std::fs::write(&dup, "x,y,z\n1,0,0\n0,1,0\n1,0,0\n").unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,y,z\n0.1,0.2\n").unwrap();
    let missing = dir.path().join("missing.csv");

    assert_eq!(code(&["generate", "--n", "3", "--method", "random"]), 0);
    assert_eq!(code(&["generate"]), 2);
    assert_eq!(code(&["generate", "--n", "3", "--kernel", "nope"]), 2);
    assert_eq!(code(&["generate", "--n", "3", "--grid", "4"]), 2);
    assert_eq!(code(&["score", "--input", path_str(&dup), "--kernel", "pycke"]), 3);
    assert_eq!(code(&["score", "--input", path_str(&dup), "--kernel", "pycke", "--diagonal", "include"]), 2);
    assert_eq!(code(&["interpolate", "--input", path_str(&dup)]), 2);
    assert_eq!(code(&["score", "--input", path_str(&bad)]), 4);
    assert_eq!(code(&["score", "--input", path_str(&missing)]), 4);
    let out = sphere_eq(&["score", "--input", path_str(&bad)], None);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    let threads = sphere_eq(&["generate", "--n", "3", "--method", "random"], Some("zero"));
    assert_eq!(threads.status.code(), Some(2));
}
