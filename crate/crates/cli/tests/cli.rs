//! End-to-end CLI checks driven through the compiled binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn platoon_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_platoon-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scenario_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn run_baseline_clean_exit_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = platoon_sim(&[
        "run",
        &scenario_path("baseline.json"),
        "-o",
        out_dir.to_str().unwrap(),
        "--plot",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["collisions"].as_array().unwrap().len(), 0);
    assert_eq!(summary["arrivals"].as_object().unwrap().len(), 9);

    let csv = fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,id,x,v,a,gap\n"));
    let svg = fs::read_to_string(out_dir.join("figure.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn run_spacing_attack_exits_2_with_collision_in_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = platoon_sim(&[
        "run",
        &scenario_path("spacing_attack.json"),
        "-o",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);

    let summary: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("out/summary.json")).unwrap(),
    )
    .unwrap();
    let collisions = summary["collisions"].as_array().unwrap();
    assert_eq!(collisions.len(), 1);
    assert_eq!(collisions[0]["follower"], 5);
    assert_eq!(collisions[0]["leader"], 4);
}

#[test]
fn missing_or_invalid_scenarios_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = platoon_sim(&["run", "no_such_file.json", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    assert!(!out.stderr.is_empty());

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"dt": 0.0}"#).unwrap();
    let out = platoon_sim(&["run", bad.to_str().unwrap(), "-o", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt"));
}

#[test]
fn existing_outputs_require_force() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let args = [
        "run",
        &scenario_path("baseline.json"),
        "-o",
        out_dir.to_str().unwrap(),
    ];
    assert_eq!(exit_code(&platoon_sim(&args)), 0);
    let out = platoon_sim(&args);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--force"));
    let mut forced = args.to_vec();
    forced.push("--force");
    assert_eq!(exit_code(&platoon_sim(&forced)), 0);
}

#[test]
fn compare_baseline_against_itself_is_all_zero_delay() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let base = scenario_path("baseline.json");
    let out = platoon_sim(&["compare", &base, &base, "-o", out_dir.to_str().unwrap()]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    let delays = summary["delays"].as_object().unwrap();
    assert_eq!(delays.len(), 9);
    assert!(delays.values().all(|d| d.as_f64().unwrap().abs() < 1e-12));
    assert!(out_dir.join("baseline_trajectory.csv").exists());
    assert!(out_dir.join("attacked_trajectory.csv").exists());
}

#[test]
fn compare_velocity_attack_reports_positive_delay() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = platoon_sim(&[
        "compare",
        &scenario_path("baseline.json"),
        &scenario_path("velocity_attack.json"),
        "-o",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert!(summary["collisions"].as_array().unwrap().is_empty());
    let delay6 = summary["delays"]["6"].as_f64().unwrap();
    assert!(delay6 > 0.0, "vehicle 6 delay {delay6}");
}

#[test]
fn compare_mismatched_platoons_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let other = dir.path().join("other.json");
    fs::write(&other, r#"{"n_vehicles": 4}"#).unwrap();
    let out = platoon_sim(&[
        "compare",
        &scenario_path("baseline.json"),
        other.to_str().unwrap(),
        "-o",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn identical_invocations_give_byte_identical_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out_dir in [&a, &b] {
        let out = platoon_sim(&[
            "run",
            &scenario_path("acceleration_attack.json"),
            "-o",
            out_dir.to_str().unwrap(),
            "--plot",
        ]);
        assert_eq!(exit_code(&out), 0);
    }
    for name in ["trajectory.csv", "summary.json", "figure.svg"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name} differs between identical runs"
        );
    }
}

#[test]
fn multi_vehicle_attack_exits_2_with_multiple_collisions() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = platoon_sim(&[
        "run",
        &scenario_path("multi_vehicle_attack.json"),
        "-o",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert!(summary["collisions"].as_array().unwrap().len() >= 2);
}
