//! End-to-end CLI checks: report determinism (the payload side of the
//! determinism acceptance criterion), exit codes, and the report schema.

use serde_json::Value;
use std::process::Command;

fn fraclab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fraclab"))
}

fn parse_stripped(stdout: &[u8]) -> Value {
    let mut value: Value = serde_json::from_slice(stdout).expect("valid JSON report");
    value
        .as_object_mut()
        .expect("object report")
        .remove("timing");
    value
}

#[test]
fn identical_configs_produce_identical_payloads() {
    let run = || {
        let output = fraclab()
            .args([
                "--samples",
                "20000",
                "--samples-gagliardo",
                "20000",
                "--seed",
                "99",
                "report",
                "--all",
            ])
            .output()
            .expect("binary runs");
        assert!(output.status.success(), "{output:?}");
        parse_stripped(&output.stdout)
    };
    let first = run();
    let second = run();
    assert_eq!(
        serde_json::to_string(&first).unwrap(),
        serde_json::to_string(&second).unwrap(),
        "payloads must be byte-identical modulo the timing section"
    );
    // and no check may be violated on the standard configuration
    assert!(!serde_json::to_string(&first).unwrap().contains("\"violated\""));
}

#[test]
fn invalid_parameters_exit_with_configuration_error() {
    let output = fraclab()
        .args(["--n", "2", "--s", "1.5", "--p", "1.5", "params"])
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(2), "{output:?}");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("p-window"), "{stderr}");
}

#[test]
fn unknown_suite_exits_with_configuration_error() {
    let output = fraclab()
        .args(["verify", "everything"])
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn estimate_payloads_carry_the_stable_schema() {
    let output = fraclab()
        .args([
            "--samples",
            "5000",
            "--samples-gagliardo",
            "5000",
            "norm",
            "gaussian",
            "weighted_lp:q=2,beta=0",
        ])
        .output()
        .expect("binary runs");
    assert!(output.status.success(), "{output:?}");
    let report: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert!(report.get("config").is_some());
    assert!(report.get("warnings").is_some());
    assert!(report.get("timing").is_some());
    let results = report["results"].as_array().unwrap();
    assert_eq!(results.len(), 1);
    let payload = &results[0]["payload"];
    for field in ["value", "uncertainty", "samples", "method"] {
        assert!(
            payload.get(field).is_some(),
            "estimate payload missing `{field}`: {payload}"
        );
    }
    // gaussian L2 norm in N=3: (pi/2)^{3/4}... just check it is positive
    assert!(payload["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn csv_format_emits_one_row_per_result() {
    let output = fraclab()
        .args(["--format", "csv", "params"])
        .output()
        .expect("binary runs");
    assert!(output.status.success());
    let text = String::from_utf8_lossy(&output.stdout);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("key,kind,status,value,uncertainty"));
    assert_eq!(lines.filter(|l| !l.trim().is_empty()).count(), 2);
}

#[test]
fn config_file_env_and_flags_layer_in_order() {
    let dir = std::env::temp_dir().join(format!("fraclab-cfg-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.cfg");
    std::fs::write(&path, "seed = 11\nsamples = 5000\n# comment\n").unwrap();

    // env overrides the file for the seed
    let output = fraclab()
        .args(["--config", path.to_str().unwrap(), "params"])
        .env("FRACLAB_SEED", "22")
        .output()
        .unwrap();
    assert!(output.status.success());
    let report: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report["config"]["seed"], 22);
    assert_eq!(report["config"]["samples"], 5000);

    // flags override the environment
    let output = fraclab()
        .args(["--config", path.to_str().unwrap(), "--seed", "33", "params"])
        .env("FRACLAB_SEED", "22")
        .output()
        .unwrap();
    let report: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report["config"]["seed"], 33);

    // unknown keys are configuration errors
    std::fs::write(&path, "samples_per_moon = 7\n").unwrap();
    let output = fraclab()
        .args(["--config", path.to_str().unwrap(), "params"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn zero_function_inequalities_all_hold() {
    let output = fraclab()
        .args([
            "--samples",
            "5000",
            "--samples-gagliardo",
            "5000",
            "--function",
            "zero",
            "verify",
            "inequalities",
        ])
        .output()
        .expect("binary runs");
    assert!(output.status.success(), "{output:?}");
    let text = String::from_utf8_lossy(&output.stdout);
    assert!(!text.contains("\"violated\""), "zero function must hold everywhere");
}
