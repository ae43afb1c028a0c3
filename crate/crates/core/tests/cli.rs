use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn sarforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sarforge"))
        .args(args)
        .env_remove("SARFORGE_OUT")
        .output()
        .expect("spawn sarforge")
}

fn cfg(name: &str) -> String {
    configs().join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("project.json");
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn prism_rcs_lists_three_peaks() {
    let out = tempfile::tempdir().unwrap();
    let o = sarforge(&["--config", &cfg("prism.json"), "--out", out.path().to_str().unwrap(), "rcs"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("3 peaks"), "{}", stdout(&o));
    let csv = std::fs::read_to_string(out.path().join("rcs.csv")).unwrap();
    assert_eq!(csv.lines().count(), 501);
    let peaks = std::fs::read_to_string(out.path().join("rcs_peaks.csv")).unwrap();
    assert_eq!(peaks.lines().count(), 4);
}

#[test]
fn plate_rcs_matches_closed_form() {
    let out = tempfile::tempdir().unwrap();
    let o = sarforge(&["--config", &cfg("plate.json"), "--out", out.path().to_str().unwrap(), "rcs"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.path().join("rcs.csv")).unwrap();
    let row: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    let analytic = sarforge::oracle::plate_rcs_analytic(1.0, 1.0, 1e9);
    assert!((row[1] - analytic).abs() <= 0.5, "{} vs {analytic}", row[1]);
}

fn shadowed_count(o: &Output) -> usize {
    let s = stdout(o);
    let i = s.find(" shadowed").expect("summary");
    s[..i].rsplit(' ').next().unwrap().parse().unwrap()
}

#[test]
fn shadowmap_shadow_shrinks_with_elevation() {
    let dir = tempfile::tempdir().unwrap();
    let low = sarforge(&["--config", &cfg("wall.json"), "--out", dir.path().to_str().unwrap(), "shadowmap"]);
    assert!(low.status.success(), "{}", stderr(&low));
    let text = std::fs::read_to_string(configs().join("wall.json"))
        .unwrap()
        .replace("\"tx_elevation_deg\": 10", "\"tx_elevation_deg\": 45");
    let high_cfg = write_config(dir.path(), &text);
    let high = sarforge(&["--config", &high_cfg, "--out", dir.path().to_str().unwrap(), "shadowmap"]);
    assert!(high.status.success(), "{}", stderr(&high));
    assert!(shadowed_count(&high) < shadowed_count(&low));

    let csv = std::fs::read_to_string(dir.path().join("currents.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let lit = header.iter().position(|h| *h == "lit").unwrap();
    let mag = header.iter().position(|h| *h == "j_abs").unwrap();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[lit] == "0" || f[lit] == "false" {
            assert_eq!(f[mag].parse::<f64>().unwrap(), 0.0);
        }
    }
}

#[test]
fn empty_ground_part_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("wall.json"))
        .unwrap()
        .replace("\"ground_part\": \"ground\"", "\"ground_part\": \"lawn\"");
    let c = write_config(dir.path(), &text);
    let o = sarforge(&["--config", &c, "--out", dir.path().to_str().unwrap(), "shadowmap"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("shadowmap.ground_part"), "{}", stderr(&o));
}

#[test]
fn missing_mesh_file_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(
        dir.path(),
        r#"{"scene": {"name": "s", "objects": [{"mesh_file": "absent.stl"}]}}"#,
    );
    let o = sarforge(&["--config", &c, "--out", dir.path().to_str().unwrap(), "rcs"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("scene.objects[0].mesh_file"), "{}", stderr(&o));
}

#[test]
fn schema_violations_exit_2_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let c = write_config(
        dir.path(),
        r#"{"scene": {"name": "s", "objects": [{"primitive": {"type": "plate", "width": 1, "length": 1}}]}, "imaging": {"stride": "ten"}}"#,
    );
    let o = sarforge(&["--config", &c, "rcs"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("imaging.stride"), "{}", stderr(&o));

    let o = sarforge(&["rcs"]);
    assert_eq!(o.status.code(), Some(2));
    let o = sarforge(&["--config", "/nonexistent/project.json", "rcs"]);
    assert_eq!(o.status.code(), Some(2));
    let o = sarforge(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bogus = dir.path().join("run.bsar");
    std::fs::write(&bogus, b"not a container").unwrap();
    let o = sarforge(&[
        "--config",
        &cfg("msl_demo.json"),
        "--out",
        dir.path().to_str().unwrap(),
        "image",
        "--run",
        bogus.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_sarforge"))
        .args(["--config", &cfg("prism.json"), "rcs"])
        .env("SARFORGE_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("rcs.csv").exists());
}

#[test]
fn full_plan_dry_run_declares_384_runs() {
    let dir = tempfile::tempdir().unwrap();
    let o = sarforge(&["--config", &cfg("full_plan.json"), "--out", dir.path().to_str().unwrap(), "dataset", "--dry-run"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = sarforge::cli::read_manifest(&dir.path().join("dataset")).unwrap();
    assert_eq!(m.planned_runs, 384);
    assert_eq!(m.runs.len(), 384);
    let entries: Vec<_> = std::fs::read_dir(dir.path().join("dataset")).unwrap().collect();
    assert_eq!(entries.len(), 1, "dry run writes only the manifest");
    for t in ["APC", "MBT", "STR", "MSL"] {
        assert_eq!(m.runs.iter().filter(|r| r.target == t).count(), 96);
    }
}

#[test]
fn sweep_then_image_single_clip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = sarforge(&["--config", &cfg("msl_demo.json"), "--out", d, "sweep"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let run = dir.path().join("run.bsar");
    assert!(run.exists());
    let o = sarforge(&[
        "--config",
        &cfg("msl_demo.json"),
        "--out",
        d,
        "image",
        "--run",
        run.to_str().unwrap(),
        "--start",
        "0",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn validate_reports_perturbed_interpolation() {
    let o = sarforge(&["validate", "--quick", "--perturbation", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    let table = stdout(&o);
    let line = table.lines().find(|l| l.contains("shift theorem")).expect("shift theorem row");
    assert!(line.trim_start().starts_with('x'), "{line}");
    assert!(table.contains("[FAIL] 8 "), "{table}");
}

#[test]
fn validate_quick_passes() {
    let o = sarforge(&["validate", "--quick"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("-3 dB range width"));
}

#[test]
fn schema_is_valid_json() {
    let o = sarforge(&["schema"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["type"], "object");
}
