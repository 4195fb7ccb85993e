//! End-to-end checks of the compiled binary: exit codes, artifact
//! determinism, and the compare pipeline.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_qdm-sim");

const CONFIG: &str = r#"
units = "hz"
excitation_cap = 2

[[dots]]
levels = [0.0, 4.0e13]

[[dots]]
levels = [0.0, 4.0e13]

[[modes]]
frequency = 3.9e13

[couplings]
"gamma[1][1][2]" = [1.0, 0.0]
"gamma[2][1][2]" = [1.0, 0.0]
"g[1][1][2][1]" = [2.0e12, 0.0]
"g[2][1][2][1]" = [2.0e12, 0.0]

[simulation]
solver = "rk4"
dt = 1e-16
t_end = 1e-14
output_stride = 10

[initial]
"A22_F0" = [1.0, 0.0]
"#;

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("binary launches")
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("run.toml");
    fs::write(&path, CONFIG).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn simulate_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    for round in ["a", "b"] {
        let out = dir.path().join(round);
        let output = run(&[
            "simulate",
            "--config",
            &config,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(
            output.status.success(),
            "stderr: {}",
            String::from_utf8_lossy(&output.stderr)
        );
    }
    for name in ["trajectory.csv", "run.json"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
    }
}

#[test]
fn compare_accepts_a_run_against_itself() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("run");
    assert!(run(&[
        "simulate",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
    ])
    .status
    .success());

    let csv = out.join("trajectory.csv");
    let csv = csv.to_str().unwrap();
    let output = run(&["compare", csv, csv, "--tol", "0.0"]);
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("max_abs_error"), "stdout: {stdout}");
}

#[test]
fn analytic_refusal_and_bad_configs_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let two_modes = CONFIG
        .replace(
            "[[modes]]\nfrequency = 3.9e13\n",
            "[[modes]]\nfrequency = 3.9e13\n\n[[modes]]\nfrequency = 2.0e13\n",
        )
        .replace("\"A22_F0\"", "\"A22_F00\"");
    let config = dir.path().join("two.toml");
    fs::write(&config, two_modes).unwrap();
    let output = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--solver",
        "analytic",
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("single-mode"), "stderr: {stderr}");

    let broken = dir.path().join("broken.toml");
    fs::write(&broken, "excitation_cap = 2\n").unwrap();
    let output = run(&[
        "simulate",
        "--config",
        broken.to_str().unwrap(),
        "--out",
        dir.path().join("out2").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));

    let output = run(&[
        "simulate",
        "--config",
        dir.path().join("missing.toml").to_str().unwrap(),
        "--out",
        dir.path().join("out3").to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn compare_exit_codes_distinguish_tolerance_from_grid_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let rk4 = dir.path().join("rk4");
    let euler = dir.path().join("euler");
    let short = dir.path().join("short");
    for (out, extra) in [
        (&rk4, vec![]),
        (&euler, vec!["--solver", "euler"]),
        (&short, vec!["--t-end", "5e-15"]),
    ] {
        let mut args = vec![
            "simulate",
            "--config",
            config.as_str(),
            "--out",
            out.to_str().unwrap(),
        ];
        args.extend(extra);
        assert!(run(&args).status.success());
    }

    let rk4_csv = rk4.join("trajectory.csv");
    let euler_csv = euler.join("trajectory.csv");
    let short_csv = short.join("trajectory.csv");
    let output = run(&[
        "compare",
        rk4_csv.to_str().unwrap(),
        euler_csv.to_str().unwrap(),
        "--tol",
        "1e-12",
    ]);
    assert_eq!(output.status.code(), Some(4));

    let output = run(&[
        "compare",
        rk4_csv.to_str().unwrap(),
        short_csv.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn emit_equations_writes_the_term_dump() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path());
    let out = dir.path().join("eq");
    assert!(run(&[
        "emit-equations",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
    ])
    .status
    .success());
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("equations.json")).unwrap()).unwrap();
    assert!(!doc["terms"].as_array().unwrap().is_empty());
    assert_eq!(doc["rwa"], true);
}

#[test]
fn concurrence_series_starts_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("pair.toml");
    fs::write(
        &config,
        r#"
units = "hz"
excitation_cap = 5

[[dots]]
levels = [0.0, 0.2e14]

[[dots]]
levels = [0.0, 0.3e14]

[[modes]]
frequency = 0.2e14

[[modes]]
frequency = 0.3e14

[couplings]
"gamma[1][1][2]" = [1.0, 0.0]
"gamma[2][1][2]" = [1.0, 0.0]
"g[1][1][2][1]" = [0.2e14, 0.0]
"g[1][1][2][2]" = [0.3e14, 0.0]
"g[2][1][2][1]" = [0.2e14, 0.0]
"g[2][1][2][2]" = [0.3e14, 0.0]
"eta[1][1][2]" = [0.2e14, 0.0]
"eta[2][1][2]" = [1.0, 0.0]

[simulation]
solver = "rk4"
dt = 1e-16
t_end = 1e-14
output_stride = 10
"#,
    )
    .unwrap();
    let out = dir.path().join("lam");
    let output = run(&[
        "concurrence",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--n-max",
        "2",
        "--jobs",
        "2",
    ]);
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let text = fs::read_to_string(out.join("lambda.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,lambda"));
    let first = lines.next().unwrap();
    assert!(first.starts_with("0,"));
    let lambda0: f64 = first.split(',').nth(1).unwrap().parse().unwrap();
    assert!(lambda0.abs() < 1e-12);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(meta["mode"], "concurrence");
    assert_eq!(meta["n_max"], 2);
}
