use std::fs;
use std::path::Path;
use std::process::Command;

fn run(root: &Path, args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_teachkit"))
        .args(args)
        .env("TEACHKIT_ROOT", root)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

const SMALL: &str = r#"{"experiment": {"n_demos": 60, "pool_size": 20, "student_epochs": 30,
  "practice_pairs": 256, "fine_tune_epochs": 5, "eval_sets": 3}}"#;

#[test]
fn run_experiment_twice_gives_identical_report() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = a.path().join("small.json");
    fs::write(&cfg, SMALL).unwrap();
    let c = cfg.to_str().unwrap();
    for root in [a.path(), b.path()] {
        run(root, &["--config", c, "run-experiment", "--env", "parking", "--student", "reversing", "--seed", "7", "--runs", "2"]);
    }
    let ra = fs::read(a.path().join("experiment/report.json")).unwrap();
    let rb = fs::read(b.path().join("experiment/report.json")).unwrap();
    assert!(!ra.is_empty());
    assert_eq!(ra, rb);
    assert_eq!(tree(&a.path().join("experiment")), tree(&b.path().join("experiment")));

    // Re-emitting the stored report reproduces the same files.
    let again = a.path().join("again");
    let report = a.path().join("experiment/report.json");
    run(a.path(), &["report", "--experiment", report.to_str().unwrap(), "--out-dir", again.to_str().unwrap()]);
    assert_eq!(tree(&again), tree(&a.path().join("experiment")));
}

#[test]
fn drill_files_are_reproducible() {
    let roots = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for r in &roots {
        let root = r.path();
        run(root, &["gen-demos", "--env", "writing", "--count", "30", "--seed", "11"]);
        run(root, &["fit-extractor", "--seed", "11"]);
        run(root, &["extract"]);
        run(root, &["select-scenarios", "--pool-size", "10"]);
        let sc = root.join("scenarios.json");
        run(root, &["gen-demos", "--policy", "noisy", "--scenarios", sc.to_str().unwrap(), "--seed", "11"]);
        run(root, &["assess"]);
        run(root, &["make-drills", "--seed", "11", "--n-target", "4"]);
    }
    let a = tree(&roots[0].path().join("drills"));
    assert!(a.len() > 1);
    assert_eq!(a, tree(&roots[1].path().join("drills")));
}
