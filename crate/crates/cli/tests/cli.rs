//! End-to-end tests of the `projsum` binary: exit codes, file round-trips,
//! and the report wording scripts rely on.

use std::path::Path;
use std::process::{Command, Output};

fn projsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projsum"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn decompose_then_verify_scalar() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.json");
    let dec = dir.path().join("dec.json");
    write(&input, "[1.0]\n");
    let out = projsum(&[
        "decompose",
        input.to_str().unwrap(),
        "--n",
        "4",
        "--out",
        dec.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("n = 4"));

    let out = projsum(&["verify", dec.to_str().unwrap(), "--window", "16"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("verdict: pass"));

    // Parallel verification agrees.
    let out = projsum(&[
        "verify",
        dec.to_str().unwrap(),
        "--window",
        "16",
        "--parallel",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn decompose_matrix_input_auto() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("matrix.json");
    let dec = dir.path().join("dec.json");
    write(
        &input,
        r#"{"dim": 2, "complex": false, "data": [[0.03, 0.02], [0.02, -0.01]]}"#,
    );
    let out = projsum(&[
        "decompose",
        input.to_str().unwrap(),
        "--out",
        dec.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    // Norm is about 0.04 < 1/20, so the auto choice stays at most 6.
    assert!(stdout(&out).contains("auto-selected n = 4") || stdout(&out).contains("auto-selected n = 6"));
    let out = projsum(&["verify", dec.to_str().unwrap(), "--window", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}

#[test]
fn infeasible_input_exits_2_citing_theorem_2() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("matrix.json");
    let dec = dir.path().join("dec.json");
    write(
        &input,
        r#"{"dim": 2, "complex": false, "data": [[-1.0, 0.0], [0.0, -0.6]]}"#,
    );
    let out = projsum(&[
        "decompose",
        input.to_str().unwrap(),
        "--n",
        "4",
        "--out",
        dec.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    let all = format!("{}{}", stdout(&out), stderr(&out));
    assert!(all.contains("Theorem 2"), "{all}");
    assert!(all.contains("fail"));
    assert!(!dec.exists());
}

#[test]
fn verify_small_window_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.json");
    let dec = dir.path().join("dec.json");
    write(&input, "[1.0]\n");
    let out = projsum(&[
        "decompose",
        input.to_str().unwrap(),
        "--n",
        "4",
        "--out",
        dec.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = projsum(&["verify", dec.to_str().unwrap(), "--window", "3"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn corrupted_rule_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input.json");
    let dec = dir.path().join("dec.json");
    write(&input, "[0.0, 2.0]\n");
    let out = projsum(&[
        "decompose",
        input.to_str().unwrap(),
        "--n",
        "4",
        "--out",
        dec.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    // Perturb one block matrix entry in the serialized file.
    let text = std::fs::read_to_string(&dec).unwrap();
    let mut parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    let mat = &mut parsed["pairs"][0]["p"][0]["mat"][1][1];
    *mat = serde_json::json!(mat.as_f64().unwrap() + 1e-3);
    write(&dec, &serde_json::to_string_pretty(&parsed).unwrap());

    let out = projsum(&["verify", dec.to_str().unwrap(), "--window", "8"]);
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
    assert!(stdout(&out).contains("verdict: fail"));

    // A malformed file is a usage error, not a verification failure.
    write(&dec, "{\"header\": {}}");
    let out = projsum(&["verify", dec.to_str().unwrap(), "--window", "8"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn feasibility_reports() {
    let out = projsum(&["feasibility", "--lambda-min", "0", "--lambda-max", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("first sufficient n = 4"));

    let out = projsum(&["feasibility", "--lambda-min", "-5", "--lambda-max", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("necessary n >= 40"));

    let out = projsum(&["feasibility", "--norm-bound", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("11.65"), "{text}");
    assert!(text.contains("<= 16"), "{text}");

    let out = projsum(&["feasibility", "--norm-bound", "0.05"]);
    assert!(stdout(&out).contains("<= 6"));

    let out = projsum(&["feasibility"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn region_commands() {
    let out = projsum(&["region", "membership", "--", "-0.125", "0.375"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("inside (boundary)"));

    let out = projsum(&["region", "membership", "0.9", "0.9"]);
    assert!(stdout(&out).contains("outside"));

    let out = projsum(&["region", "extremal", "4"]);
    let text = stdout(&out);
    assert!(text.contains("closed form: -0.125"), "{text}");

    let out = projsum(&["region", "boundary"]);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2002);
    assert!(text.starts_with("s,"));
}

#[test]
fn sharpness_command() {
    let out = projsum(&["sharpness", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(
        (text.contains("-0.25") || text.contains("-0.2499")) && text.contains("0.75"),
        "{text}"
    );

    let out = projsum(&["sharpness", "8"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("-1"));

    let out = projsum(&["sharpness", "3"]);
    assert_eq!(out.status.code(), Some(1));
}
