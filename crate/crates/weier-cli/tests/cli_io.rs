//! End-to-end CLI behavior: determinism of serialized outputs, kernel
//! config round-trips, and the exit-code contract.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_weierdim"))
}

fn write(dir: &Path, name: &str, content: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    fs::write(&path, content).unwrap();
    path
}

fn degenerate_cfg(dir: &Path) -> std::path::PathBuf {
    write(
        dir,
        "degen.cfg",
        "d=1\nb=2\ncoeff 1 1 -1/2 0\ncoeff 1 2 7/20 0\n",
    )
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn identical_config_and_seed_give_byte_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "complex.cfg", "d=2\nb=2\ncoeff 1 1 0.5 0\ncoeff 2 1 0 -0.5\n");
    let run_once = |out_name: &str| {
        let out_path = dir.path().join(out_name);
        let output = run(bin()
            .args(["report", "--kernel"])
            .arg(&cfg)
            .args(["--lambda", "0.8", "--levels", "1..5", "--no-stability"])
            .args(["--entropy-samples", "20000", "--seed", "7", "--json", "--out"])
            .arg(&out_path));
        assert!(output.status.success(), "{output:?}");
        (output.stdout, fs::read(out_path).unwrap())
    };
    let (stdout_a, file_a) = run_once("a.json");
    let (stdout_b, file_b) = run_once("b.json");
    assert_eq!(stdout_a, stdout_b);
    assert_eq!(file_a, file_b);
}

#[test]
fn scan_csv_is_deterministic_and_carries_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = degenerate_cfg(dir.path());
    let csv = |name: &str| {
        let out_path = dir.path().join(name);
        let output = run(bin()
            .args(["scan", "--kernel"])
            .arg(&cfg)
            .args(["--grid-n", "200", "--out"])
            .arg(&out_path));
        assert!(output.status.success());
        fs::read_to_string(out_path).unwrap()
    };
    let a = csv("scan_a.csv");
    let b = csv("scan_b.csv");
    assert_eq!(a, b);
    assert!(a.starts_with("lambda,q,sigma_min\n"));
    assert!(a.contains("# p_prime=0"));
    assert!(a.contains("# degenerate lambda="));
    // 200 grid rows plus header plus summary block.
    assert_eq!(a.lines().filter(|l| !l.starts_with('#')).count(), 201);
}

#[test]
fn kernel_config_round_trips_through_kernel_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "mixed.cfg",
        "# comment\nd=2\nb=3\ncoeff 1 1 1/2 0\ncoeff 2 2 0.25 -0.125\ncoeff 2 0 3/4 0\n",
    );
    let first = run(bin().args(["kernel-check", "--kernel"]).arg(&cfg));
    assert!(first.status.success());
    let text = String::from_utf8(first.stdout).unwrap();
    let normalized: String = text.lines().skip(1).map(|l| format!("{l}\n")).collect();
    let cfg2 = write(dir.path(), "normalized.cfg", &normalized);
    let second = run(bin().args(["kernel-check", "--kernel"]).arg(&cfg2));
    assert!(second.status.success());
    let text2 = String::from_utf8(second.stdout).unwrap();
    let renormalized: String = text2.lines().skip(1).map(|l| format!("{l}\n")).collect();
    assert_eq!(normalized, renormalized);
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();

    // Malformed coeff line: exit 2 with the line number.
    let bad = write(dir.path(), "bad.cfg", "d=1\nb=2\ncoeff 1 1 0.5\n");
    let out = run(bin().args(["q", "--kernel"]).arg(&bad).args(["--lambda", "0.7"]));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    // Imaginary mean: invalid kernel, exit 3.
    let imag = write(dir.path(), "imag.cfg", "d=1\nb=2\ncoeff 1 0 0 1\n");
    let out = run(bin().args(["kernel-check", "--kernel"]).arg(&imag));
    assert_eq!(out.status.code(), Some(3));

    // Constant kernel rejected by the scan: exit 3.
    let constant = write(dir.path(), "const.cfg", "d=1\nb=2\ncoeff 1 0 0.25 0\n");
    let out = run(bin().args(["scan", "--kernel"]).arg(&constant).args(["--grid-n", "150"]));
    assert_eq!(out.status.code(), Some(3));

    // Undersized grid: precondition violation, exit 2.
    let degen = degenerate_cfg(dir.path());
    let out = run(bin().args(["scan", "--kernel"]).arg(&degen).args(["--grid-n", "50"]));
    assert_eq!(out.status.code(), Some(2));

    // Lambda outside (1/b, 1): exit 2.
    let out = run(bin().args(["q", "--kernel"]).arg(&degen).args(["--lambda", "0.3"]));
    assert_eq!(out.status.code(), Some(2));

    // Resource guard at an absurd level: exit 4.
    let out = run(bin()
        .args(["boxdim", "--kernel"])
        .arg(&degen)
        .args(["--lambda", "0.7", "--levels", "28..32"]));
    assert_eq!(out.status.code(), Some(4));

    // Psi failure is a structured outcome, not an error: exit 0.
    let out = run(bin()
        .args(["psi", "--kernel"])
        .arg(&degen)
        .args(["--lambda", "0.75"]));
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("failed"));
}

#[test]
fn psi_output_is_a_loadable_kernel_config() {
    let dir = tempfile::tempdir().unwrap();
    let degen = degenerate_cfg(dir.path());
    let psi_path = dir.path().join("psi.cfg");
    let out = run(bin()
        .args(["psi", "--kernel"])
        .arg(&degen)
        .args(["--lambda", "0.7", "--out"])
        .arg(&psi_path));
    assert!(out.status.success());
    let check = run(bin().args(["kernel-check", "--kernel"]).arg(&psi_path));
    assert!(check.status.success());
    let text = String::from_utf8(check.stdout).unwrap();
    assert!(text.contains("coeff 1 1 0.5 0"), "{text}");
}
