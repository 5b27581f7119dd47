//! Black-box tests of the installed binary: exit codes, file outputs,
//! determinism, and the config round trip.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_biharm"))
}

fn domain(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../domains")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary ran")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn missing_domain_file_is_an_input_error() {
    let out = run(&[
        "inequality",
        "--domain",
        "/no/such/file.dom",
        "--theorem",
        "thm2",
    ]);
    assert_eq!(code(&out), 4, "{out:?}");
    assert!(!out.stderr.is_empty());
}

#[test]
fn usage_errors_exit_4_and_help_exits_0() {
    let out = run(&["inequality", "--no-such-flag"]);
    assert_eq!(code(&out), 4);
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("BIHARM_THREADS"));
    let out = run(&["inequality", "--help"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn malformed_thread_env_is_an_input_error_for_every_command() {
    let sq = domain("square.dom");
    // kernel spawns no workers, so this pins validation at dispatch
    let out = bin()
        .args(["kernel", "--domain", sq.to_str().unwrap(), "--refine", "2"])
        .env("BIHARM_THREADS", "zebra")
        .output()
        .expect("binary ran");
    assert_eq!(code(&out), 4, "{out:?}");
}

#[test]
fn unknown_theorem_is_an_input_error() {
    let sq = domain("square.dom");
    let out = run(&[
        "inequality",
        "--domain",
        sq.to_str().unwrap(),
        "--theorem",
        "thm7",
    ]);
    assert_eq!(code(&out), 4);
}

#[test]
fn symmetry_gated_theorem_rejects_the_ell_as_input_error() {
    let ell = domain("ell.dom");
    let out = run(&[
        "inequality",
        "--domain",
        ell.to_str().unwrap(),
        "--theorem",
        "thm2",
        "--refine",
        "3",
    ]);
    assert_eq!(code(&out), 4, "{out:?}");
}

#[test]
fn kernel_audit_passes_on_the_square() {
    let sq = domain("square.dom");
    let out = run(&["kernel", "--domain", sq.to_str().unwrap(), "--refine", "6"]);
    assert_eq!(code(&out), 0, "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("kernel: ok"), "{text}");
}

#[test]
fn inequality_csv_is_deterministic_and_the_domain_file_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let dom_path = dir.path().join("square.dom");
    fs::copy(domain("square.dom"), &dom_path).unwrap();
    let before = fs::read(&dom_path).unwrap();

    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    let report = dir.path().join("report.json");
    let base = [
        "inequality",
        "--domain",
        dom_path.to_str().unwrap(),
        "--theorem",
        "thm2",
        "--kmax",
        "2",
        "--refine",
        "5",
    ];
    let mut args_a: Vec<&str> = base.to_vec();
    args_a.extend(["--csv", csv_a.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    let out = run(&args_a);
    assert_eq!(code(&out), 0, "{out:?}");
    let mut args_b: Vec<&str> = base.to_vec();
    args_b.extend(["--csv", csv_b.to_str().unwrap()]);
    assert_eq!(code(&run(&args_b)), 0);

    let a = fs::read(&csv_a).unwrap();
    let b = fs::read(&csv_b).unwrap();
    assert_eq!(a, b, "repeated runs must emit identical CSV");
    let text = String::from_utf8(a).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "k,lambda_k,mu_k_plus_shift,margin,verdict"
    );
    assert_eq!(text.lines().count(), 3);

    // report is valid JSON describing the same run
    let rep: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["theorem"], "thm2");
    assert_eq!(rep["all_pass"], true);
    assert_eq!(rep["rows"].as_array().unwrap().len(), 2);

    assert_eq!(fs::read(&dom_path).unwrap(), before, "domain file mutated");
}

#[test]
fn emit_config_then_run_config_matches_the_direct_run() {
    let dir = tempfile::tempdir().unwrap();
    let sq = domain("square.dom");
    let cfg = dir.path().join("run.json");
    let csv_direct = dir.path().join("direct.csv");
    let csv_replayed = dir.path().join("replayed.csv");

    // dry-run: emit the config that would drive the replayed run
    let out = run(&[
        "inequality",
        "--domain",
        sq.to_str().unwrap(),
        "--theorem",
        "provenzano",
        "--kmax",
        "2",
        "--refine",
        "4",
        "--csv",
        csv_replayed.to_str().unwrap(),
        "--emit-config",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    assert!(!csv_replayed.exists(), "--emit-config must not run the job");

    // the emitted file re-parses to the same config (emit is deterministic)
    let text = fs::read_to_string(&cfg).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["command"], "inequality");
    assert_eq!(parsed["k_max"], 2);

    let out = run(&["run-config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{out:?}");

    let out = run(&[
        "inequality",
        "--domain",
        sq.to_str().unwrap(),
        "--theorem",
        "provenzano",
        "--kmax",
        "2",
        "--refine",
        "4",
        "--csv",
        csv_direct.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        fs::read(&csv_direct).unwrap(),
        fs::read(&csv_replayed).unwrap(),
        "config-driven run must match the flag-driven run byte for byte"
    );
}

#[test]
fn construct_on_the_centered_square_returns_the_axes() {
    let dir = tempfile::tempdir().unwrap();
    let fam_path = dir.path().join("family.json");
    let sq = domain("square_centered.dom");
    let out = run(&[
        "construct",
        "--domain",
        sq.to_str().unwrap(),
        "--refine",
        "4",
        "--family",
        "borsuk",
        "--report",
        fam_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("BorsukSine"), "{text}");

    let rep: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&fam_path).unwrap()).unwrap();
    let members = rep["family"]["members"].as_array().unwrap();
    assert_eq!(members.len(), 2);
    // second member is the other coordinate axis, snapped exactly
    assert_eq!(members[1]["omega"][0], 0.0);
    assert_eq!(members[1]["omega"][2], 0.0);
    assert!(members[1]["omega"][1].as_f64().unwrap() > 0.0);
}

#[test]
fn converge_writes_the_ladder_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ladder.csv");
    let sq = domain("square.dom");
    let out = run(&[
        "converge",
        "--domain",
        sq.to_str().unwrap(),
        "--ladder",
        "2,3,4",
        "--index",
        "1",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "refinement,value");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("2,"));
}

#[test]
fn free_spectrum_csv_shows_the_deflated_zeros_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("spec.csv");
    let ell = domain("ell.dom");
    let out = run(&[
        "spectrum",
        "--domain",
        ell.to_str().unwrap(),
        "--refine",
        "3",
        "--bc",
        "neumann",
        "--count",
        "4",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,eigenvalue,residual");
    assert_eq!(lines.len(), 5);
    for (i, line) in lines[1..4].iter().enumerate() {
        assert!(
            line.starts_with(&format!("{},0e0,", i + 1)),
            "rigid mode row not exactly zero: {line}"
        );
    }
    assert!(!lines[4].starts_with("4,0e0,"));
}
