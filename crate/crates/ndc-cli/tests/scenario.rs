use ndc_cli::{canonical_text, emit_grid_csv, parse_scenario, run_figures, run_scenario, Mode};
use ndc_core::{Grid2D, Normalization};

const FIG3C_CONFIG: &str = "\
[mode]
name = quantum3

[source]
sigma_f = 0.1

[arm.1]
dispersion = 100

[arm.2]
dispersion = -50

[arm.3]
dispersion = -50
";

#[test]
fn minimal_config_parses_to_narrowband_demo_scenario() {
    let scenario = parse_scenario(FIG3C_CONFIG).unwrap();
    assert_eq!(scenario.mode, Mode::Quantum3);
    assert_eq!(scenario.source.omega0(), 1.0);
    assert_eq!(scenario.source.n_photons(), 3);
    assert_eq!(scenario.source.sigma_f(), 0.1);
    assert_eq!(scenario.normalization, Normalization::Peak);
    assert!(!scenario.oracle_check);
    let b: Vec<f64> = scenario.arms.iter().map(|a| a.dispersion()).collect();
    assert_eq!(b, vec![100.0, -50.0, -50.0]);
    // default grid: +-6 analytic sigma (variance 200) and 201 points
    assert_eq!(scenario.grid_t.count, 201);
    let expected = 6.0 * 200.0_f64.sqrt();
    assert!((scenario.grid_t.max - expected).abs() < 1e-9);
    assert!((scenario.grid_tau.max - expected).abs() < 1e-9);
}

#[test]
fn missing_sigma_f_names_the_key() {
    let config = "[mode]\nname = quantum3\n\n[source]\nomega0 = 1\n\n[arm.1]\n[arm.2]\n[arm.3]\n";
    let err = parse_scenario(config).unwrap_err();
    assert!(err.message.contains("sigma_f"), "{err}");
    assert_eq!(err.section.as_deref(), Some("source"));
}

#[test]
fn arm_count_mismatch_is_rejected() {
    let config = "\
[mode]
name = nphoton

[source]
sigma_f = 0.1
n_photons = 4

[arm.1]
[arm.2]
[arm.3]
";
    let err = parse_scenario(config).unwrap_err();
    assert!(
        err.message.contains("expected 4 arm sections") && err.message.contains("found 3"),
        "{err}"
    );
}

#[test]
fn unknown_key_is_rejected_with_its_line() {
    let config = "[mode]\nname = quantum3\nbandwidth = 3\n\n[source]\nsigma_f = 0.1\n\n[arm.1]\n[arm.2]\n[arm.3]\n";
    let err = parse_scenario(config).unwrap_err();
    assert_eq!(err.line, Some(3));
    assert!(err.message.contains("bandwidth"), "{err}");
}

#[test]
fn malformed_number_is_rejected_with_its_line() {
    let config = "[mode]\nname = quantum3\n\n[source]\nsigma_f = zero.one\n\n[arm.1]\n[arm.2]\n[arm.3]\n";
    let err = parse_scenario(config).unwrap_err();
    assert_eq!(err.line, Some(5));
    assert!(err.message.contains("zero.one"), "{err}");
}

#[test]
fn postselect_validation() {
    let missing = "[mode]\nname = postselect\n\n[source]\nsigma_f = 0.1\n\n[arm.1]\n[arm.2]\n[arm.3]\n";
    let err = parse_scenario(missing).unwrap_err();
    assert!(err.message.contains("[postselect]"), "{err}");

    let out_of_range = "\
[mode]
name = postselect

[source]
sigma_f = 0.1

[arm.1]
[arm.2]
[arm.3]

[postselect]
omega3_tilde = 1.5
";
    let err = parse_scenario(out_of_range).unwrap_err();
    assert_eq!(err.section.as_deref(), Some("postselect"));

    // a postselect section on a non-postselect mode is carried, not rejected
    let carried = "\
[mode]
name = quantum3

[source]
sigma_f = 0.1

[arm.1]
[arm.2]
[arm.3]

[postselect]
omega3_tilde = 0.3
";
    let scenario = parse_scenario(carried).unwrap();
    assert!(scenario.post_selection.is_some());
}

#[test]
fn canonical_text_round_trips() {
    let postselect = "\
[mode]
name = postselect
normalization = integral
oracle_check = true

[source]
omega0 = 1
sigma_f = 0.2

[arm.1]
group_delay = 0.5
dispersion = 30

[arm.2]
group_delay = -0.25
dispersion = -10

[arm.3]

[postselect]
omega3_tilde = 0.2833333333333333
";
    let nphoton = "\
[mode]
name = nphoton

[source]
sigma_f = 0.1
n_photons = 4

[arm.1]
dispersion = 10

[arm.2]
dispersion = -20

[arm.3]
dispersion = 5

[arm.4]
dispersion = 5
";
    for config in [FIG3C_CONFIG, postselect, nphoton] {
        let scenario = parse_scenario(config).unwrap();
        let rendered = canonical_text(&scenario);
        let reparsed = parse_scenario(&rendered).unwrap();
        assert_eq!(scenario, reparsed, "round trip failed for:\n{rendered}");
    }
}

#[test]
fn grid_csv_bytes_are_pinned() {
    let grid = Grid2D::from_values(vec![0.0], vec![0.0], vec![1.0], Normalization::None).unwrap();
    let mut bytes = Vec::new();
    emit_grid_csv(&grid, &mut bytes).unwrap();
    assert_eq!(bytes, b"t,tau,P\n0,0,1\n");

    let grid = Grid2D::from_values(
        vec![0.0, 1.0],
        vec![0.0, 2.0],
        vec![1.0, 0.5, 0.25, 0.125],
        Normalization::None,
    )
    .unwrap();
    let mut bytes = Vec::new();
    emit_grid_csv(&grid, &mut bytes).unwrap();
    assert_eq!(
        std::str::from_utf8(&bytes).unwrap(),
        "t,tau,P\n0,0,1\n0,2,0.5\n1,0,0.25\n1,2,0.125\n"
    );
}

#[test]
fn zero_dispersion_quantum_and_classical_grids_are_byte_identical() {
    let base = "\
[source]
sigma_f = 0.1

[arm.1]
[arm.2]
[arm.3]
";
    let dir = tempfile::tempdir().unwrap();
    let quantum = parse_scenario(&format!("[mode]\nname = quantum3\n\n{base}")).unwrap();
    let classical = parse_scenario(&format!("[mode]\nname = classical3\n\n{base}")).unwrap();
    run_scenario(&quantum, &dir.path().join("q"), true).unwrap();
    run_scenario(&classical, &dir.path().join("c"), true).unwrap();
    let q = std::fs::read(dir.path().join("q/quantum.csv")).unwrap();
    let c = std::fs::read(dir.path().join("c/classical.csv")).unwrap();
    assert_eq!(q, c, "zero-dispersion grid files must be byte-identical");
}

#[test]
fn postselect_report_states_cancelled_variance() {
    let config = "\
[mode]
name = postselect

[source]
sigma_f = 0.1

[arm.1]
dispersion = 50

[arm.2]
dispersion = -50

[arm.3]

[postselect]
omega3_tilde = 0.3
";
    let scenario = parse_scenario(config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_scenario(&scenario, dir.path(), true).unwrap();
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    let expected = format!("postselect_variance = {}", 1.0 / (0.1 * 0.1));
    assert!(
        report.lines().any(|l| l == expected),
        "report should state the dispersion-free variance:\n{report}"
    );
}

#[test]
fn nphoton_two_photon_series_and_report() {
    let config = "\
[mode]
name = nphoton

[source]
sigma_f = 0.1
n_photons = 2

[arm.1]
dispersion = 140

[arm.2]
dispersion = -140
";
    let scenario = parse_scenario(config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_scenario(&scenario, dir.path(), true).unwrap();
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    let expected = format!("delay_var_1 = {}", 1.0 / (0.1 * 0.1));
    assert!(
        report.lines().any(|l| l == expected),
        "opposite dispersion must cancel exactly:\n{report}"
    );
    let series = std::fs::read_to_string(dir.path().join("nphoton.csv")).unwrap();
    assert!(series.lines().any(|l| l == "t,P"));
}

#[test]
fn figure_sets_emit_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let files = run_figures(3, dir.path(), true).unwrap();
    let names: Vec<String> = files
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    for expected in [
        "fig3_ab_quantum.csv",
        "fig3_ab_classical.csv",
        "fig3_cd_quantum.csv",
        "fig3_cd_classical.csv",
        "fig3_ef_quantum.csv",
        "fig3_ef_classical.csv",
        "fig3_report.txt",
    ] {
        assert!(names.iter().any(|n| n == expected), "missing {expected}");
    }
    // the dispersion-free pair is the zero-dispersion equivalence in file form
    let q = std::fs::read(dir.path().join("fig3_ab_quantum.csv")).unwrap();
    let c = std::fs::read(dir.path().join("fig3_ab_classical.csv")).unwrap();
    assert_eq!(q, c);

    assert!(run_figures(7, dir.path(), true).is_err());
}

#[test]
fn exit_codes_follow_error_kind() {
    use std::process::Command;
    let bin = env!("CARGO_BIN_EXE_ndc");
    let dir = tempfile::tempdir().unwrap();

    let bad_config = dir.path().join("bad.cfg");
    std::fs::write(&bad_config, "[mode]\nname = quantum3\n").unwrap();
    let status = Command::new(bin)
        .args(["run", bad_config.to_str().unwrap(), "--out"])
        .arg(dir.path().join("out"))
        .arg("--quiet")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1), "validation errors exit with 1");

    let missing = Command::new(bin)
        .args(["run", "/nonexistent.cfg", "--out"])
        .arg(dir.path().join("out"))
        .status()
        .unwrap();
    assert_eq!(missing.code(), Some(1));

    let good_config = dir.path().join("good.cfg");
    std::fs::write(&good_config, FIG3C_CONFIG).unwrap();
    let status = Command::new(bin)
        .args(["run", good_config.to_str().unwrap(), "--out"])
        .arg(dir.path().join("ok"))
        .arg("--quiet")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn compare_subcommand_overrides_mode() {
    use std::process::Command;
    let bin = env!("CARGO_BIN_EXE_ndc");
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg");
    std::fs::write(&config, FIG3C_CONFIG).unwrap();
    let out = dir.path().join("out");
    let status = Command::new(bin)
        .args(["compare", config.to_str().unwrap(), "--out"])
        .arg(&out)
        .arg("--quiet")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for file in ["quantum.csv", "classical.csv", "report.txt", "scenario.txt"] {
        assert!(out.join(file).exists(), "missing {file}");
    }
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("ratio_t = "));
    assert!(report.contains("cancellation_flag = "));
}
