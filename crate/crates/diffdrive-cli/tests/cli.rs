//! Integration tests for scenario loading, trace serialization and the
//! binary's exit codes.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::Command;

use diffdrive::sim::{run_scenario, ScenarioMode};
use diffdrive_cli::output::{trace_csv_bytes, summary_json, CSV_HEADER};
use diffdrive_cli::scenario::parse_scenario;
use diffdrive_cli::{commands, exit_code, CliError};

const MINIMAL_REGULATION: &str = r#"
[regulation]
goal = { x = 1.0, y = 1.0, theta = 1.5707963267948966 }
"#;

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("diffdrive-test-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn minimal_regulation_file_gets_all_defaults() {
    let config = parse_scenario(MINIMAL_REGULATION, &[]).unwrap();
    assert_eq!(config.control_period, 0.03);
    assert_eq!(config.plant_substep, 0.001);
    assert_eq!(config.max_time, 60.0);
    assert!(config.use_odometry);
    assert!(config.clamp_power);
    assert_eq!(config.geometry.wheel_radius(), 0.0275);
    assert_eq!(config.geometry.axle_length(), 0.135);
    assert_eq!(config.calibration.rad_to_deg, 57.2957);
    match &config.mode {
        ScenarioMode::Regulation(setup) => {
            assert_eq!(setup.gains.distance, 0.4);
            assert_eq!(setup.gains.bearing, 2.0);
            assert_eq!(setup.gains.goal_heading, -1.0);
            assert_eq!(setup.ramp.alpha_distance, 0.1);
            assert_eq!(setup.ramp.alpha_goal_heading, 0.3);
            assert!(setup.ramp_enabled);
            assert_eq!(setup.stop_radius, 0.01);
            assert_eq!(setup.stop_heading, 0.05);
        }
        ScenarioMode::Tracking(_) => panic!("expected regulation mode"),
    }
}

#[test]
fn zero_control_period_error_names_the_key() {
    let text = format!("control_period = 0.0\n{MINIMAL_REGULATION}");
    let err = parse_scenario(&text, &[]).unwrap_err();
    assert!(err.to_string().contains("control_period"), "{err}");
}

#[test]
fn unknown_key_is_rejected_by_name() {
    let text = r#"
[geometry]
wheel_diameter = 0.055

[regulation]
goal = { x = 1.0, y = 0.0, theta = 0.0 }
"#;
    let err = parse_scenario(text, &[]).unwrap_err();
    assert!(err.to_string().contains("wheel_diameter"), "{err}");
}

#[test]
fn both_mode_sections_are_rejected() {
    let text = r#"
[regulation]
goal = { x = 1.0, y = 0.0, theta = 0.0 }

[tracking]
profile = { builtin = "line" }
"#;
    let err = parse_scenario(text, &[]).unwrap_err();
    assert!(matches!(err, CliError::Invalid { .. }), "{err}");
}

#[test]
fn overrides_are_type_checked_through_the_schema() {
    let config = parse_scenario(
        MINIMAL_REGULATION,
        &[
            "max_time=12.5".to_string(),
            "regulation.ramp_enabled=false".to_string(),
            "regulation.gains.distance=0.5".to_string(),
        ],
    )
    .unwrap();
    assert_eq!(config.max_time, 12.5);
    match &config.mode {
        ScenarioMode::Regulation(setup) => {
            assert!(!setup.ramp_enabled);
            assert_eq!(setup.gains.distance, 0.5);
        }
        ScenarioMode::Tracking(_) => panic!("expected regulation mode"),
    }

    let err = parse_scenario(MINIMAL_REGULATION, &["max_time=fast".to_string()]).unwrap_err();
    assert!(matches!(err, CliError::Parse { .. }), "{err}");

    let err = parse_scenario(MINIMAL_REGULATION, &["regulation.typo=1".to_string()]).unwrap_err();
    assert!(err.to_string().contains("typo"), "{err}");
}

#[test]
fn tracking_requires_exactly_one_gain_source() {
    let text = r#"
[tracking]
profile = { builtin = "circle" }
damping = 1.0
natural_frequency = 1.0
gains = { along = 2.0, lateral = 2.0, heading = 2.0 }
"#;
    let err = parse_scenario(text, &[]).unwrap_err();
    assert!(err.to_string().contains("tracking.gains"), "{err}");
}

#[test]
fn one_step_trace_makes_a_two_line_csv() {
    // Goal at the start pose converges after a single period.
    let text = r#"
[initial_pose]
x = 0.2
y = -0.1
theta = 0.3

[regulation]
goal = { x = 0.2, y = -0.1, theta = 0.3 }
"#;
    let config = parse_scenario(text, &[]).unwrap();
    let trace = run_scenario(&config).unwrap();
    let csv = String::from_utf8(trace_csv_bytes(&trace)).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], CSV_HEADER);
    assert!(csv.ends_with('\n'));
    assert!(!csv.contains('\r'));
}

#[test]
fn identical_runs_serialize_byte_identically() {
    let config = parse_scenario(MINIMAL_REGULATION, &[]).unwrap();
    let a = trace_csv_bytes(&run_scenario(&config).unwrap());
    let b = trace_csv_bytes(&run_scenario(&config).unwrap());
    assert_eq!(a, b);
    let sa = summary_json(&run_scenario(&config).unwrap());
    let sb = summary_json(&run_scenario(&config).unwrap());
    assert_eq!(sa, sb);
    assert!(!sa.contains("wall"), "summary must not embed wall time");
}

#[test]
fn regulation_error_columns_carry_the_polar_state() {
    let config = parse_scenario(MINIMAL_REGULATION, &[]).unwrap();
    let trace = run_scenario(&config).unwrap();
    let csv = String::from_utf8(trace_csv_bytes(&trace)).unwrap();
    let first_row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let err1: f64 = first_row[7].parse().unwrap();
    let err2: f64 = first_row[8].parse().unwrap();
    // At t = 0 the goal is sqrt(2) away at a bearing of -pi/4.
    assert!((err1 - 2.0f64.sqrt()).abs() < 1e-7);
    assert!((err2 - (-PI / 4.0)).abs() < 1e-7);
}

#[test]
fn design_gains_report_matches_hand_computation() {
    let report = commands::design_gains_report(1.0, 1.0, 0.5, 0.0, 1e-3).unwrap();
    assert!(report.contains("k1 (along)   = 2"), "{report}");
    assert!(report.contains("k2 (lateral) = 2"), "{report}");
    assert!(report.contains("k3 (heading) = 2"), "{report}");
    assert!(report.contains("-2.000000000"), "{report}");
    assert!(report.contains("-1.000000000"), "{report}");

    let err = commands::design_gains_report(1.0, 1.0, 0.0, 0.0, 1e-3).unwrap_err();
    assert_eq!(exit_code(&err), 4);
}

#[test]
fn check_stability_report_names_violations() {
    let (report, stable) = commands::check_stability_report(0.4, 2.0, -1.0);
    assert!(stable);
    assert!(report.starts_with("stable"), "{report}");

    let (report, stable) = commands::check_stability_report(0.4, 2.0, 1.0);
    assert!(!stable);
    assert!(report.contains("k_goal_heading < 0"), "{report}");

    // Boundary case: equality fails the strict margin test.
    let (report, stable) = commands::check_stability_report(1.0, 1.0, -1.0);
    assert!(!stable);
    assert!(report.contains("k_bearing - k_distance"), "{report}");
}

#[test]
fn cubic_roots_report_lists_sorted_roots() {
    let report = commands::cubic_roots_report(6.0, 11.0, 6.0);
    assert!(report.contains("-3.000000000"), "{report}");
    assert!(report.contains("-2.000000000"), "{report}");
    assert!(report.contains("-1.000000000"), "{report}");
}

#[test]
fn binary_exit_codes_follow_the_error_classes() {
    let bin = env!("CARGO_BIN_EXE_diffdrive");

    // Success.
    let ok = Command::new(bin)
        .args(["design-gains", "--xi", "1", "--omega-n", "1", "--v-ref", "0.5"])
        .output()
        .unwrap();
    assert!(ok.status.success());
    assert!(String::from_utf8_lossy(&ok.stdout).contains("k1"));

    // Gain design singularity: exit 4 and a message on stderr.
    let slow = Command::new(bin)
        .args(["design-gains", "--xi", "1", "--omega-n", "1", "--v-ref", "0"])
        .output()
        .unwrap();
    assert_eq!(slow.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&slow.stderr).contains("reference too slow"));

    // Unknown scenario key: exit 3.
    let bad = temp_file("bad.toml", "nonsense = 1\n[regulation]\ngoal = { x = 1.0 }\n");
    let parse = Command::new(bin)
        .args(["simulate-regulate", "--scenario"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(parse.status.code(), Some(3));
    std::fs::remove_file(&bad).ok();

    // Missing file: exit 3.
    let missing = Command::new(bin)
        .args(["simulate-regulate", "--scenario", "/nonexistent/path.toml"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(3));

    // Usage error from clap: exit 2.
    let usage = Command::new(bin).arg("no-such-subcommand").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));

    // Wrong mode for the subcommand: exit 3.
    let reg = temp_file("reg.toml", MINIMAL_REGULATION);
    let mode = Command::new(bin)
        .args(["simulate-track", "--scenario"])
        .arg(&reg)
        .output()
        .unwrap();
    assert_eq!(mode.status.code(), Some(3));
    std::fs::remove_file(&reg).ok();
}

#[test]
fn diverged_run_exits_5_but_still_writes_the_trace() {
    let bin = env!("CARGO_BIN_EXE_diffdrive");
    // A negative along-heading gain turns the speed loop into positive
    // feedback; starting behind the reference excites it immediately.
    let scenario = temp_file(
        "diverge.toml",
        r#"
max_time = 5.0
use_odometry = false
clamp_power = false

[initial_pose]
y = -0.5

[tracking]
profile = { segments = [{ v = 0.2, omega = 0.0, duration = 30.0 }] }
gains = { along = -40.0, lateral = 1.0, heading = 1.0 }
"#,
    );
    let out = std::env::temp_dir().join(format!("diffdrive-test-{}-diverged.csv", std::process::id()));
    let result = Command::new(bin)
        .args(["simulate-track", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(5), "{result:?}");
    let written = std::fs::read_to_string(&out).unwrap();
    assert!(written.lines().count() >= 2);
    std::fs::remove_file(&scenario).ok();
    std::fs::remove_file(&out).ok();
}

#[test]
fn sweep_writes_one_deterministic_file_per_value() {
    let bin = env!("CARGO_BIN_EXE_diffdrive");
    let scenario = temp_file("sweep.toml", MINIMAL_REGULATION);
    let dir = std::env::temp_dir().join(format!("diffdrive-sweep-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("run.csv");
    let result = Command::new(bin)
        .args(["simulate-regulate", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .args(["--sweep", "regulation.gains.distance=0.3:0.1:0.5"])
        .output()
        .unwrap();
    assert!(result.status.success(), "{result:?}");
    let mut names: Vec<String> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        vec![
            "run_regulation-gains-distance_0.3.csv",
            "run_regulation-gains-distance_0.4.csv",
            "run_regulation-gains-distance_0.5.csv",
        ]
    );
    std::fs::remove_dir_all(&dir).ok();
    std::fs::remove_file(&scenario).ok();
}

#[test]
fn summary_format_reports_the_run() {
    let bin = env!("CARGO_BIN_EXE_diffdrive");
    let scenario = temp_file("summary.toml", MINIMAL_REGULATION);
    let result = Command::new(bin)
        .args(["simulate-regulate", "--format", "summary", "--scenario"])
        .arg(&scenario)
        .output()
        .unwrap();
    assert!(result.status.success(), "{result:?}");
    let text = String::from_utf8(result.stdout).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["outcome"], "converged");
    assert!(json["scenario"]["regulation"]["gains"]["distance"].is_number());
    assert!(json.get("wall").is_none());
    std::fs::remove_file(&scenario).ok();
}
