//! Executes validated scenarios and writes their artifacts: grid/series CSV
//! files, a key = value report, the canonical scenario text, and optional
//! oracle diffs. All output is a pure function of the scenario, so repeated
//! runs are byte-identical.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use ndc_core::{
    classical_coefficients, classical_density_numeric, covariance_from_coefficients,
    exact_density_grid, nphoton_delay_covariance, nphoton_density, postselected_density_numeric,
    postselected_timing, quantum_coefficients, quantum_density_full, ArmConfig, BoundsMode,
    Grid2D, Normalization, QuadraticCoefficients, SourceConfig,
};

use crate::{canonical_text, Mode, Scenario};

/// Failures while running a scenario, split by the exit code they map to.
#[derive(Debug)]
pub enum RunError {
    /// Scenario-level validation problem (exit code 1).
    Validation(String),
    /// Numerical failure while computing (exit code 2).
    Computation(String),
    /// Output could not be written (exit code 2).
    Io(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Validation(msg) => write!(f, "validation error: {msg}"),
            RunError::Computation(msg) => write!(f, "computation error: {msg}"),
            RunError::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ndc_core::Error> for RunError {
    fn from(e: ndc_core::Error) -> Self {
        RunError::Computation(e.to_string())
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

/// Writes the grid as CSV: header `t,tau,P`, rows in t-major order, shortest
/// round-trip decimals, LF endings, trailing newline.
pub fn emit_grid_csv<W: Write>(grid: &Grid2D, mut out: W) -> io::Result<()> {
    out.write_all(b"t,tau,P\n")?;
    for (i, &t) in grid.t_axis().iter().enumerate() {
        for (j, &tau) in grid.tau_axis().iter().enumerate() {
            writeln!(out, "{t},{tau},{}", grid.value(i, j))?;
        }
    }
    Ok(())
}

/// One-dimensional companion of [`emit_grid_csv`] with the same rendering
/// contract.
pub fn emit_series_csv<W: Write>(
    header: (&str, &str),
    xs: &[f64],
    ys: &[f64],
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "{},{}", header.0, header.1)?;
    for (x, y) in xs.iter().zip(ys) {
        writeln!(out, "{x},{y}")?;
    }
    Ok(())
}

/// Parameter comment block shared by every CSV a scenario emits. The mode is
/// deliberately absent so that runs differing only in mode produce identical
/// blocks.
fn parameter_comment(scenario: &Scenario) -> String {
    let mut block = String::new();
    block.push_str(&format!("# omega0 = {}\n", scenario.source.omega0()));
    block.push_str(&format!("# n_photons = {}\n", scenario.source.n_photons()));
    block.push_str(&format!("# sigma_f = {}\n", scenario.source.sigma_f()));
    for (k, arm) in scenario.arms.iter().enumerate() {
        block.push_str(&format!(
            "# arm.{} = group_delay {}, dispersion {}\n",
            k + 1,
            arm.group_delay(),
            arm.dispersion()
        ));
    }
    if let Some(ps) = &scenario.post_selection {
        block.push_str(&format!("# omega3_tilde = {}\n", ps.omega3_tilde()));
    }
    block.push_str(&format!(
        "# grid_t = [{}, {}] x {}\n",
        scenario.grid_t.min, scenario.grid_t.max, scenario.grid_t.count
    ));
    block.push_str(&format!(
        "# grid_tau = [{}, {}] x {}\n",
        scenario.grid_tau.min, scenario.grid_tau.max, scenario.grid_tau.count
    ));
    block.push_str(&format!("# normalization = {}\n", scenario.normalization));
    block
}

struct OutputSink {
    dir: PathBuf,
    quiet: bool,
    written: Vec<PathBuf>,
}

impl OutputSink {
    fn new(dir: &Path, quiet: bool) -> Result<Self, RunError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            quiet,
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        if !self.quiet {
            eprintln!("wrote {}", path.display());
        }
        self.written.push(path);
        Ok(())
    }

    fn write_grid(
        &mut self,
        name: &str,
        comment: &str,
        grid: &Grid2D,
    ) -> Result<(), RunError> {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(comment.as_bytes());
        emit_grid_csv(grid, &mut bytes)?;
        self.write(name, &bytes)
    }

    fn write_series(
        &mut self,
        name: &str,
        comment: &str,
        header: (&str, &str),
        xs: &[f64],
        ys: &[f64],
    ) -> Result<(), RunError> {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(comment.as_bytes());
        emit_series_csv(header, xs, ys, &mut bytes)?;
        self.write(name, &bytes)
    }
}

struct Report {
    lines: Vec<String>,
}

impl Report {
    fn new(mode: Mode) -> Self {
        Self {
            lines: vec![format!("mode = {}", mode.as_str())],
        }
    }

    fn push(&mut self, key: &str, value: impl fmt::Display) {
        self.lines.push(format!("{key} = {value}"));
    }

    fn render(&self) -> Vec<u8> {
        let mut text = self.lines.join("\n");
        text.push('\n');
        text.into_bytes()
    }
}

fn grid_from_coefficients(
    coeffs: &QuadraticCoefficients,
    scenario: &Scenario,
) -> Result<Grid2D, RunError> {
    let t_axis = scenario.grid_t.points();
    let tau_axis = scenario.grid_tau.points();
    let mut values = Vec::with_capacity(t_axis.len() * tau_axis.len());
    for &t in &t_axis {
        for &tau in &tau_axis {
            values.push(coeffs.exponent(t, tau).exp());
        }
    }
    Ok(Grid2D::from_values(
        t_axis,
        tau_axis,
        values,
        scenario.normalization,
    )?)
}

/// In-window trapezoid moments of a raw grid (t-major values).
fn window_moments(t_axis: &[f64], tau_axis: &[f64], values: &[f64]) -> (f64, f64, f64, f64) {
    let wt = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    let nt = t_axis.len();
    let ntau = tau_axis.len();
    let mut mass = 0.0;
    let mut mean_t = 0.0;
    let mut mean_tau = 0.0;
    for i in 0..nt {
        for j in 0..ntau {
            let w = wt(i, nt) * wt(j, ntau) * values[i * ntau + j];
            mass += w;
            mean_t += w * t_axis[i];
            mean_tau += w * tau_axis[j];
        }
    }
    mean_t /= mass;
    mean_tau /= mass;
    let mut var_t = 0.0;
    let mut var_tau = 0.0;
    for i in 0..nt {
        for j in 0..ntau {
            let w = wt(i, nt) * wt(j, ntau) * values[i * ntau + j];
            var_t += w * (t_axis[i] - mean_t) * (t_axis[i] - mean_t);
            var_tau += w * (tau_axis[j] - mean_tau) * (tau_axis[j] - mean_tau);
        }
    }
    (mean_t, mean_tau, var_t / mass, var_tau / mass)
}

/// Peak-normalized pointwise comparison of two equally shaped value sets.
/// Returns (max, mean) of |a - b| after dividing each set by its maximum.
fn diff_stats(a: &[f64], b: &[f64]) -> (f64, f64) {
    let peak_a = a.iter().cloned().fold(0.0_f64, f64::max);
    let peak_b = b.iter().cloned().fold(0.0_f64, f64::max);
    let mut max = 0.0_f64;
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = (x / peak_a - y / peak_b).abs();
        max = max.max(d);
        sum += d;
    }
    (max, sum / a.len() as f64)
}

fn oracle_diff_csv(
    sink: &mut OutputSink,
    name: &str,
    comment: &str,
    t_axis: &[f64],
    tau_axis: &[f64],
    primary: &[f64],
    oracle: &[f64],
) -> Result<(), RunError> {
    let peak_p = primary.iter().cloned().fold(0.0_f64, f64::max);
    let peak_o = oracle.iter().cloned().fold(0.0_f64, f64::max);
    let mut bytes = Vec::new();
    bytes.extend_from_slice(comment.as_bytes());
    bytes.extend_from_slice(b"t,tau,P,P_oracle,abs_diff\n");
    for (i, &t) in t_axis.iter().enumerate() {
        for (j, &tau) in tau_axis.iter().enumerate() {
            let p = primary[i * tau_axis.len() + j] / peak_p;
            let o = oracle[i * tau_axis.len() + j] / peak_o;
            writeln!(bytes, "{t},{tau},{p},{o},{}", (p - o).abs()).map_err(RunError::from)?;
        }
    }
    sink.write(name, &bytes)
}

const ORACLE_GRID_RTOL: f64 = 1e-8;

/// Runs one scenario, writing its artifacts into `out_dir`. Returns the list
/// of files written.
pub fn run_scenario(
    scenario: &Scenario,
    out_dir: &Path,
    quiet: bool,
) -> Result<Vec<PathBuf>, RunError> {
    let mut sink = OutputSink::new(out_dir, quiet)?;
    sink.write("scenario.txt", canonical_text(scenario).as_bytes())?;
    let comment = parameter_comment(scenario);
    let mut report = Report::new(scenario.mode);
    report.push("narrowband", scenario.source.is_narrowband());

    match scenario.mode {
        Mode::Quantum3 => run_quantum3(scenario, &mut sink, &comment, &mut report)?,
        Mode::Classical3 => run_classical3(scenario, &mut sink, &comment, &mut report)?,
        Mode::Compare => run_compare(scenario, &mut sink, &comment, &mut report)?,
        Mode::Quantum3Full => run_quantum3_full(scenario, &mut sink, &comment, &mut report)?,
        Mode::Postselect => run_postselect(scenario, &mut sink, &comment, &mut report)?,
        Mode::Nphoton => run_nphoton(scenario, &mut sink, &comment, &mut report)?,
        Mode::ExactNumeric => run_exact_numeric(scenario, &mut sink, &comment, &mut report)?,
    }

    sink.write("report.txt", &report.render())?;
    Ok(sink.written)
}

fn run_quantum3(
    scenario: &Scenario,
    sink: &mut OutputSink,
    comment: &str,
    report: &mut Report,
) -> Result<(), RunError> {
    let arms = scenario.arms3();
    let coeffs = quantum_coefficients(&scenario.source, &arms)?;
    let grid = grid_from_coefficients(&coeffs, scenario)?;
    sink.write_grid("quantum.csv", comment, &grid)?;
    let dist = covariance_from_coefficients(&coeffs)?;
    report.push("var_t_quantum", dist.variance_t());
    report.push("var_tau_quantum", dist.variance_tau());
    report.push("cov_ttau_quantum", dist.covariance()[0][1]);
    if scenario.oracle_check {
        // finite-range quadrature over the physical wedge; at large
        // bandwidth this exposes the width the infinite-range closed form
        // underestimates
        let t_axis = scenario.grid_t.points();
        let tau_axis = scenario.grid_tau.points();
        let numeric = exact_density_grid(
            &scenario.source,
            &arms,
            &t_axis,
            &tau_axis,
            BoundsMode::Wedge,
            ORACLE_GRID_RTOL,
        )?;
        let closed: Vec<f64> = t_axis
            .iter()
            .flat_map(|&t| {
                tau_axis
                    .iter()
                    .map(|&tau| coeffs.exponent(t, tau).exp())
                    .collect::<Vec<_>>()
            })
            .collect();
        let (max, mean) = diff_stats(&closed, &numeric);
        oracle_diff_csv(
            sink,
            "oracle_diff.csv",
            comment,
            &t_axis,
            &tau_axis,
            &closed,
            &numeric,
        )?;
        let (_, _, var_t, var_tau) = window_moments(&t_axis, &tau_axis, &numeric);
        report.push("oracle_max_rel_err", max);
        report.push("oracle_mean_rel_err", mean);
        report.push("var_t_numeric", var_t);
        report.push("var_tau_numeric", var_tau);
    }
    Ok(())
}

fn run_classical3(
    scenario: &Scenario,
    sink: &mut OutputSink,
    comment: &str,
    report: &mut Report,
) -> Result<(), RunError> {
    let arms = scenario.arms3();
    let coeffs = classical_coefficients(&scenario.source, &arms)?;
    let grid = grid_from_coefficients(&coeffs, scenario)?;
    sink.write_grid("classical.csv", comment, &grid)?;
    let dist = covariance_from_coefficients(&coeffs)?;
    report.push("var_t_classical", dist.variance_t());
    report.push("var_tau_classical", dist.variance_tau());
    report.push("cov_ttau_classical", dist.covariance()[0][1]);
    if scenario.oracle_check {
        let t_axis = scenario.grid_t.points();
        let tau_axis = scenario.grid_tau.points();
        let mut numeric = Vec::with_capacity(t_axis.len() * tau_axis.len());
        for &t in &t_axis {
            for &tau in &tau_axis {
                numeric.push(classical_density_numeric(&scenario.source, &arms, t, tau)?);
            }
        }
        let closed: Vec<f64> = t_axis
            .iter()
            .flat_map(|&t| {
                tau_axis
                    .iter()
                    .map(|&tau| coeffs.exponent(t, tau).exp())
                    .collect::<Vec<_>>()
            })
            .collect();
        let (max, mean) = diff_stats(&closed, &numeric);
        oracle_diff_csv(
            sink,
            "oracle_diff.csv",
            comment,
            &t_axis,
            &tau_axis,
            &closed,
            &numeric,
        )?;
        report.push("oracle_max_rel_err", max);
        report.push("oracle_mean_rel_err", mean);
    }
    Ok(())
}

fn run_compare(
    scenario: &Scenario,
    sink: &mut OutputSink,
    comment: &str,
    report: &mut Report,
) -> Result<(), RunError> {
    let arms = scenario.arms3();
    let q_coeffs = quantum_coefficients(&scenario.source, &arms)?;
    let c_coeffs = classical_coefficients(&scenario.source, &arms)?;
    sink.write_grid("quantum.csv", comment, &grid_from_coefficients(&q_coeffs, scenario)?)?;
    sink.write_grid(
        "classical.csv",
        comment,
        &grid_from_coefficients(&c_coeffs, scenario)?,
    )?;
    let comparison = ndc_core::compare(&scenario.source, &arms)?;
    report.push("var_t_quantum", comparison.quantum.variance_t());
    report.push("var_tau_quantum", comparison.quantum.variance_tau());
    report.push("var_t_classical", comparison.classical.variance_t());
    report.push("var_tau_classical", comparison.classical.variance_tau());
    report.push("ratio_t", comparison.variance_ratios.0);
    report.push("ratio_tau", comparison.variance_ratios.1);
    report.push("cancellation_flag", comparison.cancellation_flag);
    if scenario.oracle_check {
        let t_axis = scenario.grid_t.points();
        let tau_axis = scenario.grid_tau.points();
        let q_numeric = exact_density_grid(
            &scenario.source,
            &arms,
            &t_axis,
            &tau_axis,
            BoundsMode::Wedge,
            ORACLE_GRID_RTOL,
        )?;
        let q_closed: Vec<f64> = t_axis
            .iter()
            .flat_map(|&t| {
                tau_axis
                    .iter()
                    .map(|&tau| q_coeffs.exponent(t, tau).exp())
                    .collect::<Vec<_>>()
            })
            .collect();
        let (q_max, q_mean) = diff_stats(&q_closed, &q_numeric);
        oracle_diff_csv(
            sink,
            "oracle_diff_quantum.csv",
            comment,
            &t_axis,
            &tau_axis,
            &q_closed,
            &q_numeric,
        )?;
        let mut c_numeric = Vec::with_capacity(t_axis.len() * tau_axis.len());
        for &t in &t_axis {
            for &tau in &tau_axis {
                c_numeric.push(classical_density_numeric(&scenario.source, &arms, t, tau)?);
            }
        }
        let c_closed: Vec<f64> = t_axis
            .iter()
            .flat_map(|&t| {
                tau_axis
                    .iter()
                    .map(|&tau| c_coeffs.exponent(t, tau).exp())
                    .collect::<Vec<_>>()
            })
            .collect();
        let (c_max, c_mean) = diff_stats(&c_closed, &c_numeric);
        oracle_diff_csv(
            sink,
            "oracle_diff_classical.csv",
            comment,
            &t_axis,
            &tau_axis,
            &c_closed,
            &c_numeric,
        )?;
        report.push("quantum_oracle_max_rel_err", q_max);
        report.push("quantum_oracle_mean_rel_err", q_mean);
        report.push("classical_oracle_max_rel_err", c_max);
        report.push("classical_oracle_mean_rel_err", c_mean);
    }
    Ok(())
}

fn run_quantum3_full(
    scenario: &Scenario,
    sink: &mut OutputSink,
    comment: &str,
    report: &mut Report,
) -> Result<(), RunError> {
    let arms = scenario.arms3();
    let t_axis = scenario.grid_t.points();
    let tau_axis = scenario.grid_tau.points();
    // detection times (0, t, t + tau): the first detector defines the origin
    let mut values = Vec::with_capacity(t_axis.len() * tau_axis.len());
    for &t in &t_axis {
        for &tau in &tau_axis {
            values.push(quantum_density_full(&scenario.source, &arms, 0.0, t, t + tau)?);
        }
    }
    let grid = Grid2D::from_values(
        t_axis.clone(),
        tau_axis.clone(),
        values.clone(),
        scenario.normalization,
    )?;
    sink.write_grid("full.csv", comment, &grid)?;

    let coeffs = quantum_coefficients(&scenario.source, &arms)?;
    let dist = covariance_from_coefficients(&coeffs)?;
    let mean_t = arms[1].group_delay() - arms[0].group_delay();
    let mean_tau = arms[2].group_delay() - arms[1].group_delay();
    report.push("mean_t", mean_t);
    report.push("mean_tau", mean_tau);
    report.push("var_t_quantum", dist.variance_t());
    report.push("var_tau_quantum", dist.variance_tau());
    if scenario.oracle_check {
        // oracle: the group-delay-removed closed form at shifted delays
        let shifted: Vec<f64> = t_axis
            .iter()
            .flat_map(|&t| {
                let coeffs = &coeffs;
                tau_axis
                    .iter()
                    .map(move |&tau| coeffs.exponent(t - mean_t, tau - mean_tau).exp())
                    .collect::<Vec<_>>()
            })
            .collect();
        let (max, mean) = diff_stats(&values, &shifted);
        oracle_diff_csv(
            sink,
            "oracle_diff.csv",
            comment,
            &t_axis,
            &tau_axis,
            &values,
            &shifted,
        )?;
        report.push("oracle_max_rel_err", max);
        report.push("oracle_mean_rel_err", mean);
    }
    Ok(())
}

fn run_postselect(
    scenario: &Scenario,
    sink: &mut OutputSink,
    comment: &str,
    report: &mut Report,
) -> Result<(), RunError> {
    let ps = scenario
        .post_selection
        .as_ref()
        .ok_or_else(|| RunError::Validation("postselect mode lost its [postselect] data".into()))?;
    let timing = postselected_timing(&scenario.source, &scenario.arms[0], &scenario.arms[1], ps)?;
    let xs = scenario.grid_t.points();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&t| {
            let dt = t - timing.mean();
            let shape = (-dt * dt / (2.0 * timing.variance())).exp();
            match scenario.normalization {
                Normalization::Integral => {
                    shape / (2.0 * std::f64::consts::PI * timing.variance()).sqrt()
                }
                Normalization::Peak | Normalization::None => shape,
            }
        })
        .collect();
    sink.write_series("postselect.csv", comment, ("t", "P"), &xs, &ys)?;
    report.push("postselect_mean", timing.mean());
    report.push("postselect_variance", timing.variance());
    if scenario.oracle_check {
        let mut numeric = Vec::with_capacity(xs.len());
        for &t in &xs {
            numeric.push(postselected_density_numeric(
                &scenario.source,
                &scenario.arms[0],
                &scenario.arms[1],
                ps,
                t,
            )?);
        }
        let (max, mean) = diff_stats(&ys, &numeric);
        let peak_y = ys.iter().cloned().fold(0.0_f64, f64::max);
        let peak_n = numeric.iter().cloned().fold(0.0_f64, f64::max);
        let mut bytes = Vec::new();
        bytes.extend_from_slice(comment.as_bytes());
        bytes.extend_from_slice(b"t,P,P_oracle,abs_diff\n");
        for (i, &t) in xs.iter().enumerate() {
            let p = ys[i] / peak_y;
            let o = numeric[i] / peak_n;
            writeln!(bytes, "{t},{p},{o},{}", (p - o).abs()).map_err(RunError::from)?;
        }
        sink.write("oracle_diff.csv", &bytes)?;
        report.push("oracle_max_rel_err", max);
        report.push("oracle_mean_rel_err", mean);
    }
    Ok(())
}

fn run_nphoton(
    scenario: &Scenario,
    sink: &mut OutputSink,
    comment: &str,
    report: &mut Report,
) -> Result<(), RunError> {
    let n = scenario.source.n_photons();
    let cov = nphoton_delay_covariance(&scenario.source, &scenario.arms)?;
    let dim = n - 1;
    for k in 0..dim {
        report.push(&format!("delay_var_{}", k + 1), cov[k * dim + k]);
    }

    if n == 2 {
        let xs = scenario.grid_t.points();
        let mut ys = Vec::with_capacity(xs.len());
        for &t in &xs {
            ys.push(nphoton_density(
                &scenario.source,
                &scenario.arms,
                &[t],
                Normalization::None,
            )?);
        }
        normalize_series(&xs, &mut ys, scenario.normalization);
        sink.write_series("nphoton.csv", comment, ("t", "P"), &xs, &ys)?;
        return Ok(());
    }

    let t_axis = scenario.grid_t.points();
    let tau_axis = scenario.grid_tau.points();
    let mut values = Vec::with_capacity(t_axis.len() * tau_axis.len());
    let mut delays = vec![0.0; dim];
    for &t in &t_axis {
        for &tau in &tau_axis {
            delays[0] = t;
            delays[1] = tau;
            values.push(nphoton_density(
                &scenario.source,
                &scenario.arms,
                &delays,
                Normalization::None,
            )?);
        }
    }
    let grid = Grid2D::from_values(t_axis, tau_axis, values, scenario.normalization)?;
    let mut block = comment.to_string();
    if n > 3 {
        block.push_str("# delays beyond (t, tau) fixed at 0\n");
    }
    sink.write_grid("nphoton.csv", &block, &grid)?;

    if scenario.oracle_check && n == 3 {
        let arms = scenario.arms3();
        let coeffs = quantum_coefficients(&scenario.source, &arms)?;
        let closed: Vec<f64> = grid
            .t_axis()
            .iter()
            .flat_map(|&t| {
                let coeffs = &coeffs;
                grid.tau_axis()
                    .iter()
                    .map(move |&tau| coeffs.exponent(t, tau).exp())
                    .collect::<Vec<_>>()
            })
            .collect();
        let (max, mean) = diff_stats(grid.values(), &closed);
        report.push("oracle_max_rel_err", max);
        report.push("oracle_mean_rel_err", mean);
    }
    Ok(())
}

fn normalize_series(xs: &[f64], ys: &mut [f64], normalization: Normalization) {
    match normalization {
        Normalization::None => {}
        Normalization::Peak => {
            let peak = ys.iter().cloned().fold(0.0_f64, f64::max);
            if peak > 0.0 {
                for y in ys.iter_mut() {
                    *y /= peak;
                }
            }
        }
        Normalization::Integral => {
            let mut mass = 0.0;
            for i in 0..xs.len() {
                let w = if i == 0 || i == xs.len() - 1 { 0.5 } else { 1.0 };
                mass += w * ys[i];
            }
            mass *= (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
            if mass > 0.0 {
                for y in ys.iter_mut() {
                    *y /= mass;
                }
            }
        }
    }
}

fn run_exact_numeric(
    scenario: &Scenario,
    sink: &mut OutputSink,
    comment: &str,
    report: &mut Report,
) -> Result<(), RunError> {
    let arms = scenario.arms3();
    let t_axis = scenario.grid_t.points();
    let tau_axis = scenario.grid_tau.points();
    let raw = exact_density_grid(
        &scenario.source,
        &arms,
        &t_axis,
        &tau_axis,
        BoundsMode::Wedge,
        ORACLE_GRID_RTOL,
    )?;
    let grid = Grid2D::from_values(
        t_axis.clone(),
        tau_axis.clone(),
        raw.clone(),
        scenario.normalization,
    )?;
    sink.write_grid("numeric.csv", comment, &grid)?;
    let (mean_t, mean_tau, var_t, var_tau) = window_moments(&t_axis, &tau_axis, &raw);
    report.push("mean_t_numeric", mean_t);
    report.push("mean_tau_numeric", mean_tau);
    report.push("var_t_numeric", var_t);
    report.push("var_tau_numeric", var_tau);
    if scenario.oracle_check {
        let coeffs = quantum_coefficients(&scenario.source, &arms)?;
        let dist = covariance_from_coefficients(&coeffs)?;
        let closed: Vec<f64> = t_axis
            .iter()
            .flat_map(|&t| {
                let coeffs = &coeffs;
                tau_axis
                    .iter()
                    .map(move |&tau| coeffs.exponent(t, tau).exp())
                    .collect::<Vec<_>>()
            })
            .collect();
        let (max, mean) = diff_stats(&raw, &closed);
        oracle_diff_csv(
            sink,
            "oracle_diff.csv",
            comment,
            &t_axis,
            &tau_axis,
            &raw,
            &closed,
        )?;
        report.push("var_t_analytic", dist.variance_t());
        report.push("var_tau_analytic", dist.variance_tau());
        report.push("oracle_max_rel_err", max);
        report.push("oracle_mean_rel_err", mean);
    }
    Ok(())
}

/// Emits the pre-baked figure parameter sets: 3 and 4 are the
/// quantum/classical grid pairs at the narrow and wide filter bandwidths, 5
/// is the analytic-versus-finite-range pair at the wide bandwidth.
pub fn run_figures(set: u8, out_dir: &Path, quiet: bool) -> Result<Vec<PathBuf>, RunError> {
    let (sigma_f, panels): (f64, Vec<(&str, [f64; 3])>) = match set {
        3 => (
            0.1,
            vec![
                ("ab", [0.0, 0.0, 0.0]),
                ("cd", [100.0, -50.0, -50.0]),
                ("ef", [200.0, -100.0, -100.0]),
            ],
        ),
        4 => (
            0.5,
            vec![
                ("ab", [0.0, 0.0, 0.0]),
                ("cd", [12.5, -25.0, -37.5]),
                ("ef", [50.0, -100.0, -150.0]),
            ],
        ),
        5 => (0.5, vec![("b", [12.5, -25.0, -37.5])]),
        other => {
            return Err(RunError::Validation(format!(
                "unknown figure set {other} (expected 3, 4 or 5)"
            )))
        }
    };

    let mut sink = OutputSink::new(out_dir, quiet)?;
    let source = SourceConfig::three_photon(1.0, sigma_f).map_err(RunError::from)?;
    let mut report_lines: Vec<String> = vec![format!("figure_set = {set}")];

    for (panel, b) in panels {
        let arms = [
            ArmConfig::dispersion_only(b[0]).map_err(RunError::from)?,
            ArmConfig::dispersion_only(b[1]).map_err(RunError::from)?,
            ArmConfig::dispersion_only(b[2]).map_err(RunError::from)?,
        ];
        let q_coeffs = quantum_coefficients(&source, &arms)?;
        let c_coeffs = classical_coefficients(&source, &arms)?;
        let q_dist = covariance_from_coefficients(&q_coeffs)?;
        let c_dist = covariance_from_coefficients(&c_coeffs)?;
        let sigma_t = q_dist.variance_t().max(c_dist.variance_t()).sqrt();
        let sigma_tau = q_dist.variance_tau().max(c_dist.variance_tau()).sqrt();
        let scenario = Scenario {
            mode: if set == 5 { Mode::ExactNumeric } else { Mode::Compare },
            normalization: Normalization::Peak,
            oracle_check: false,
            source,
            arms: arms.to_vec(),
            grid_t: crate::AxisSpec {
                min: -6.0 * sigma_t,
                max: 6.0 * sigma_t,
                count: 201,
            },
            grid_tau: crate::AxisSpec {
                min: -6.0 * sigma_tau,
                max: 6.0 * sigma_tau,
                count: 201,
            },
            post_selection: None,
        };
        let comment = parameter_comment(&scenario);

        if set == 5 {
            let t_axis = scenario.grid_t.points();
            let tau_axis = scenario.grid_tau.points();
            let analytic = grid_from_coefficients(&q_coeffs, &scenario)?;
            sink.write_grid(&format!("fig{set}_{panel}_analytic.csv"), &comment, &analytic)?;
            let raw = exact_density_grid(
                &source,
                &arms,
                &t_axis,
                &tau_axis,
                BoundsMode::Wedge,
                ORACLE_GRID_RTOL,
            )?;
            let numeric = Grid2D::from_values(
                t_axis.clone(),
                tau_axis.clone(),
                raw.clone(),
                Normalization::Peak,
            )?;
            sink.write_grid(&format!("fig{set}_{panel}_numeric.csv"), &comment, &numeric)?;
            let (_, _, var_t, var_tau) = window_moments(&t_axis, &tau_axis, &raw);
            let closed: Vec<f64> = t_axis
                .iter()
                .flat_map(|&t| {
                    let q = &q_coeffs;
                    tau_axis
                        .iter()
                        .map(move |&tau| q.exponent(t, tau).exp())
                        .collect::<Vec<_>>()
                })
                .collect();
            let (max, mean) = diff_stats(&raw, &closed);
            report_lines.push(format!("panel_{panel}_var_t_analytic = {}", q_dist.variance_t()));
            report_lines.push(format!(
                "panel_{panel}_var_tau_analytic = {}",
                q_dist.variance_tau()
            ));
            report_lines.push(format!("panel_{panel}_var_t_numeric = {var_t}"));
            report_lines.push(format!("panel_{panel}_var_tau_numeric = {var_tau}"));
            report_lines.push(format!("panel_{panel}_max_rel_diff = {max}"));
            report_lines.push(format!("panel_{panel}_mean_rel_diff = {mean}"));
        } else {
            let quantum = grid_from_coefficients(&q_coeffs, &scenario)?;
            let classical = grid_from_coefficients(&c_coeffs, &scenario)?;
            sink.write_grid(&format!("fig{set}_{panel}_quantum.csv"), &comment, &quantum)?;
            sink.write_grid(&format!("fig{set}_{panel}_classical.csv"), &comment, &classical)?;
            report_lines.push(format!("panel_{panel}_var_t_quantum = {}", q_dist.variance_t()));
            report_lines.push(format!(
                "panel_{panel}_var_tau_quantum = {}",
                q_dist.variance_tau()
            ));
            report_lines.push(format!(
                "panel_{panel}_var_t_classical = {}",
                c_dist.variance_t()
            ));
            report_lines.push(format!(
                "panel_{panel}_var_tau_classical = {}",
                c_dist.variance_tau()
            ));
        }
    }
    let mut text = report_lines.join("\n");
    text.push('\n');
    sink.write(&format!("fig{set}_report.txt"), text.as_bytes())?;
    Ok(sink.written)
}
