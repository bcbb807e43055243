use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn phystime(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phystime")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn write_config(dir: &TempDir, text: &str) -> String {
    let path = dir.path().join("scenario.toml");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn list_names_every_bundled_scenario() {
    let out = Command::new(env!("CARGO_BIN_EXE_phystime")).arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in phystime::scenario::bundled_names() {
        assert!(text.contains(name), "{name} not listed");
    }
}

#[test]
fn suite_on_a_bundled_scenario_writes_report_and_plot_data() {
    let dir = TempDir::new().unwrap();
    let out = phystime(&["povm-audit", "--scenario", "qubit_commensurate"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["scenario"], "qubit_commensurate");
    assert_eq!(report["passed"], true);
    assert_eq!(report["d"], 2);
    assert!(report["checks"].as_array().unwrap().iter().any(|c| c["id"] == "povm.orthogonality_defect"));

    assert!(dir.path().join("qubit_commensurate.json").is_file());
    let sweep = fs::read_to_string(dir.path().join("qubit_commensurate_defects_vs_M.csv")).unwrap();
    assert!(sweep.lines().count() > 2);
    assert!(stderr(&out).contains("PASS qubit_commensurate"));
}

#[test]
fn csv_format_prints_a_check_table() {
    let dir = TempDir::new().unwrap();
    let out = phystime(&["constraint-solve", "--scenario", "oscillator_snapped", "--format", "csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("scenario,check,"), "{header}");
    assert!(text.contains("constraint.max_principal_angle"));
}

#[test]
fn seed_flag_overrides_the_scenario_seed() {
    let dir = TempDir::new().unwrap();
    let out = phystime(&["constraint-solve", "--scenario", "qubit_commensurate", "--seed", "99"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["seed"], 99);
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = TempDir::new().unwrap();
    // Every level matches, so the declared deficit is wrong.
    let config = write_config(
        &dir,
        "name = \"wrong_deficit\"\nsuites = [\"constraint-solve\"]\nsystem.kind = \"qubit\"\nsystem.gap = 3.141592653589793\n\
         clock.M = 16\nclock.deltaT = 0.25\nexpect.kernel_deficit = 1\n",
    );
    let out = phystime(&["all", "--config", &config], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    assert!(stderr(&out).contains("FAIL wrong_deficit"));
}

#[test]
fn empty_physical_subspace_exits_with_three() {
    let dir = TempDir::new().unwrap();
    // Both levels sit half-way between clock frequencies (spacing π/2).
    let config = write_config(
        &dir,
        "name = \"unmatched\"\nsystem.kind = \"explicit-matrix\"\n\
         system.matrix_re = [[0.7853981633974483, 0.0], [0.0, 2.356194490192345]]\n\
         clock.M = 16\nclock.deltaT = 0.25\ntolerances.eps_match = 0.1\n",
    );
    let out = phystime(&["povm-audit", "--config", &config], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("no physical states"));
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let cases: Vec<(Vec<String>, &str)> = vec![
        (vec!["povm-audit".into(), "--scenario".into(), "no_such_scenario".into()], "no_such_scenario"),
        (vec!["povm-audit".into(), "--config".into(), "/nonexistent/x.toml".into()], "/nonexistent/x.toml"),
        (vec!["classical-equivalence".into(), "--scenario".into(), "qubit_commensurate".into()], "no section"),
        (vec!["frobnicate".into()], "frobnicate"),
    ];
    for (args, needle) in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = phystime(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
        assert!(stderr(&out).contains(needle), "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn invalid_config_lists_every_violation() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        &dir,
        "name = \"bad\"\nsystem.kind = \"qubit\"\nsystem.levels = 3\nclock.M = 7\nclock.deltaT = -1.0\n",
    );
    let out = phystime(&["all", "--config", &config], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    for needle in ["system.gap", "system.levels", "clock.M", "clock.deltaT"] {
        assert!(err.contains(needle), "{needle} missing from:\n{err}");
    }

    let config = write_config(&dir, "name = \"typo\"\nsystem.kind = \"qubit\"\nsystem.gapp = 1.0\n");
    let out = phystime(&["all", "--config", &config], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gapp"));
}

#[test]
fn reruns_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let args = ["time-distribution", "--scenario", "oscillator_snapped"];
    let first = phystime(&args, a.path());
    let second = phystime(&args, b.path());
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    for entry in fs::read_dir(a.path()).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{name:?}");
    }
}
