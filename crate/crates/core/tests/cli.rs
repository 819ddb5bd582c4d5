use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finite-ibm"))
        .args(args)
        .arg("--output")
        .arg(out)
        .env("FINITE_IBM_THREADS", "2")
        .output()
        .unwrap()
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn sample_is_deterministic_in_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    let args = ["sample", "--model", "airy", "--n", "8", "--n-samples", "5", "--seed", "11"];
    assert!(run(&args, &a).status.success());
    assert!(run(&args, &b).status.success());
    let other = ["sample", "--model", "airy", "--n", "8", "--n-samples", "5", "--seed", "12"];
    assert!(run(&other, &c).status.success());
    let csv = read(&a.join("samples.csv"));
    assert_eq!(csv, read(&b.join("samples.csv")));
    assert_ne!(csv, read(&c.join("samples.csv")));
    assert_eq!(csv.lines().filter(|l| *l == "x").count(), 5);
}

#[test]
fn kernel_grid_has_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["kernel", "--kernel", "airy2", "--grid=-4:2:0.05"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = read(&dir.path().join("kernel.csv"));
    assert_eq!(csv.lines().count(), 1 + 121);
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(summary.is_object());
}

#[test]
fn quick_verify_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--suite", "quick"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("verify.csv").exists());
}

#[test]
fn config_errors_exit_2_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sample", "--model", "airy", "--beta=-1"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model.beta"));

    let o = run(&["sample", "--set", "sampler.no_such_key=3"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no_such_key"));
}

#[test]
fn coincident_start_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("start.csv");
    std::fs::write(&input, "x\n0.5\n0.5\n-1\n").unwrap();
    let o = run(
        &["simulate", "--model", "airy", "--n", "3", "--n-paths", "1", "--input", input.to_str().unwrap()],
        &dir.path().join("out"),
    );
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let args = [
        "simulate", "--model", "bessel", "--n", "3", "--alpha", "1.5", "--n-paths", "4", "--t-final", "0.05",
        "--seed", "3",
    ];
    assert!(run(&args, &first).status.success());
    let echoed = first.join("config.toml");
    let second = dir.path().join("second");
    let o = run(&["simulate", "--config", echoed.to_str().unwrap()], &second);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&first.join("trajectories.csv")), read(&second.join("trajectories.csv")));
}
