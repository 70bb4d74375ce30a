use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bench")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", r#"{"scenario": {"type": "random-sphere", "n": 60}, "repetitions": 2}"#);
    let out = dir.path().join("out");
    let o = bench(&["run", "--config", &config, "--out", out.to_str().unwrap(), "--seed", "3", "--verify-bounds"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["convergence.csv", "mean_curves.csv", "summary.json", "random-sphere-n60.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 3);
    assert_eq!(summary["config"]["verify_bounds"], true);
    assert_eq!(summary["scenarios"][0]["runs"].as_array().unwrap().len(), 10);
}

#[test]
fn strategies_override_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", r#"{"type": "hex-lattice", "shells": 2, "sigma": 0.05, "seed": 1}"#);
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = bench(&["run", "--config", &config, "--out", out.to_str().unwrap(), "--strategies", "mst,aug-mst:2", "--tol", "1e-10"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out.join("convergence.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.lines().skip(1).all(|l| l.contains(",mst,") || l.contains(",aug-mst:2,")));
}

#[test]
fn tree_replay_converges_in_one_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write(
        dir.path(),
        "tree.txt",
        "3 1\nL 0 1.0\nL 1 1.0\nL 2 1.0\nE 0 1 2.0\nE 1 2 3.0\n",
    );
    let config = write(dir.path(), "c.json", &format!(r#"{{"graph": "{graph}", "strategies": ["mst"]}}"#));
    let out = dir.path().join("out");
    let o = bench(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["scenarios"][0]["runs"][0]["iterations"], 1);
}

#[test]
fn gen_dumps_graph() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "c.json", r#"{"type": "hex-lattice", "shells": 4, "sigma": 0.0}"#);
    let out = dir.path().join("g.txt");
    let o = bench(&["gen", "--config", &config, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), "309 3");
    assert_eq!(text.lines().filter(|l| l.starts_with("L ")).count(), 309);
}

#[test]
fn verify_suite_runs() {
    let o = bench(&["verify", "--n", "20", "--trials", "3"]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 6);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"type": "random-sphere"}"#);
    assert_eq!(bench(&["run", "--config", &bad]).status.code(), Some(2));
    let junk = write(dir.path(), "junk.json", "not json");
    assert_eq!(bench(&["run", "--config", &junk]).status.code(), Some(2));
    let ok = write(dir.path(), "ok.json", r#"{"type": "random-sphere", "n": 20}"#);
    assert_eq!(bench(&["run", "--config", &ok, "--strategies", "bogus"]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(bench(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(3));
    // The output path is a regular file, so the directory cannot be created.
    let blocker = write(dir.path(), "blocker", "");
    assert_eq!(bench(&["run", "--config", &ok, "--out", &blocker]).status.code(), Some(3));
    let indefinite = write(dir.path(), "neg.txt", "2 1\nL 0 -1.0\nL 1 -1.0\n");
    let cfg = write(dir.path(), "neg.json", &format!(r#"{{"graph": "{indefinite}"}}"#));
    let o = bench(&["run", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
}
