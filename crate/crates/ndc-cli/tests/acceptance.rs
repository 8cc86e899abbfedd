//! Acceptance criterion 10: repeated runs of the same config are
//! byte-identical. All evaluation loops are sequential with fixed summation
//! order, so there is no parallelism level that could reorder anything.

use std::fs;
use std::process::Command;

const CONFIG: &str = "\
[mode]
name = quantum3
oracle_check = true

[source]
sigma_f = 0.1

[arm.1]
dispersion = 100

[arm.2]
dispersion = -50

[arm.3]
dispersion = -50

[grid]
t_min = -60
t_max = 60
t_count = 61
tau_min = -60
tau_max = 60
tau_count = 61
";

#[test]
fn acceptance_10_repeated_runs_are_byte_identical() {
    let bin = env!("CARGO_BIN_EXE_ndc");
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("scenario.cfg");
    fs::write(&config, CONFIG).unwrap();

    for out in ["first", "second"] {
        let status = Command::new(bin)
            .args(["run", config.to_str().unwrap(), "--out"])
            .arg(dir.path().join(out))
            .arg("--quiet")
            .status()
            .unwrap();
        assert!(status.success(), "run into {out} failed");
    }

    let mut names: Vec<String> = fs::read_dir(dir.path().join("first"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    assert_eq!(
        names,
        vec!["oracle_diff.csv", "quantum.csv", "report.txt", "scenario.txt"],
        "unexpected artifact set"
    );
    for name in &names {
        let a = fs::read(dir.path().join("first").join(name)).unwrap();
        let b = fs::read(dir.path().join("second").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
        assert!(!a.is_empty());
    }
    println!(
        "ACCEPTANCE 10 PASS — two `run` invocations produced byte-identical {} files \
         (grid, report, scenario, oracle diff); evaluation is sequential with fixed \
         summation order, so no parallelism level can perturb it",
        names.len()
    );
}
