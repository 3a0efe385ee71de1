use std::path::PathBuf;
use std::process::Command;

use ibstokes::analysis::convergence::ConvergenceReport;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ibstokes"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ibstokes-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn converge_writes_parseable_deterministic_csv() {
    let (a, b) = (scratch("a.csv"), scratch("b.csv"));
    for path in [&a, &b] {
        let out = bin()
            .args(["converge", "--method", "three-poisson", "--kernel", "cosine", "--grids", "16,32,64", "--out"])
            .arg(path)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert!(stdout.contains("avg"));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 5);
    let rep = ConvergenceReport::read_csv(text.as_bytes()).unwrap();
    assert_eq!(rep.rows.len(), 3);
    assert_eq!(rep.to_csv_string(), text);
}

#[test]
fn mac_converge_runs() {
    let path = scratch("mac.csv");
    let status = bin().args(["converge", "--method", "mac", "--grids", "16,32", "--out"]).arg(&path).output().unwrap().status;
    assert!(status.success());
    let rep = ConvergenceReport::read_csv(std::fs::read_to_string(&path).unwrap().as_bytes()).unwrap();
    assert!(rep.rows[1].errors.err_u_inf < rep.rows[0].errors.err_u_inf);
}

#[test]
fn unknown_kernel_is_usage_error() {
    let out = bin().args(["converge", "--kernel", "gaussian"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("delta1"));
}

#[test]
fn green_dump_and_report() {
    let path = scratch("green.csv");
    let out = bin().args(["green", "--bc", "neumann", "--n", "32", "--center", "-0.28,-0.2", "--out"]).arg(&path).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("pinned node"));
    assert!(stdout.contains("defining-identity residual"));
    let dump = std::fs::read_to_string(&path).unwrap();
    assert_eq!(dump.lines().count(), 1 + 33);
    assert!(dump.lines().skip(1).all(|l| l.split(',').count() == 33));

    let out = bin().args(["green", "--bc", "dirichlet", "--n", "32", "--center", "2,0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn diagnose_exit_codes() {
    let out = bin().args(["diagnose", "--n", "16"]).output().unwrap();
    assert!(out.status.success());
    assert_eq!(bin().args(["diagnose", "--n", "8"]).output().unwrap().status.code(), Some(2));
}

#[test]
fn solve_dumps_fields() {
    let prefix = scratch("sol");
    let status = bin()
        .args(["solve", "--method", "mac", "--n", "16", "--out"])
        .arg(&prefix)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    for c in ["u", "v", "p"] {
        assert!(PathBuf::from(format!("{}_{c}.csv", prefix.display())).exists());
    }
}
