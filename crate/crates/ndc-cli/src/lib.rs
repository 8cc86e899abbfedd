//! Scenario ingestion and deterministic experiment orchestration around the
//! timing-density library.
//!
//! A scenario is a plain-text config with INI-style sections (`[mode]`,
//! `[source]`, `[arm.1]` ... `[arm.N]`, `[grid]`, `[postselect]`). Parsing
//! is strict: unknown sections or keys are rejected with line numbers, and
//! every default is resolved at parse time so the canonical rendering of a
//! scenario round-trips through the parser unchanged.

mod runner;

use std::fmt;

use ndc_core::{
    classical_coefficients, covariance_from_coefficients, nphoton_delay_covariance,
    postselected_timing, quantum_coefficients, ArmConfig, Normalization, PostSelection,
    SourceConfig,
};

pub use runner::{emit_grid_csv, emit_series_csv, run_figures, run_scenario, RunError};

/// What a scenario computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Quantum3,
    Quantum3Full,
    Classical3,
    Postselect,
    Nphoton,
    ExactNumeric,
    Compare,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Quantum3 => "quantum3",
            Mode::Quantum3Full => "quantum3-full",
            Mode::Classical3 => "classical3",
            Mode::Postselect => "postselect",
            Mode::Nphoton => "nphoton",
            Mode::ExactNumeric => "exact-numeric",
            Mode::Compare => "compare",
        }
    }

    fn from_str(s: &str) -> Option<Self> {
        match s {
            "quantum3" => Some(Mode::Quantum3),
            "quantum3-full" => Some(Mode::Quantum3Full),
            "classical3" => Some(Mode::Classical3),
            "postselect" => Some(Mode::Postselect),
            "nphoton" => Some(Mode::Nphoton),
            "exact-numeric" => Some(Mode::ExactNumeric),
            "compare" => Some(Mode::Compare),
            _ => None,
        }
    }
}

/// One uniform grid axis: `count` points from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisSpec {
    pub fn points(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + i as f64 * step).collect()
    }
}

/// A fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub mode: Mode,
    pub normalization: Normalization,
    pub oracle_check: bool,
    pub source: SourceConfig,
    pub arms: Vec<ArmConfig>,
    pub grid_t: AxisSpec,
    pub grid_tau: AxisSpec,
    pub post_selection: Option<PostSelection>,
}

impl Scenario {
    pub(crate) fn arms3(&self) -> [ArmConfig; 3] {
        [self.arms[0], self.arms[1], self.arms[2]]
    }
}

/// Parse or validation failure with the offending location when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub line: Option<usize>,
    pub section: Option<String>,
    pub message: String,
}

impl ScenarioError {
    fn new(message: impl Into<String>) -> Self {
        Self {
            line: None,
            section: None,
            message: message.into(),
        }
    }

    fn at_line(line: usize, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            section: None,
            message: message.into(),
        }
    }

    fn in_section(section: &str, message: impl Into<String>) -> Self {
        Self {
            line: None,
            section: Some(section.to_string()),
            message: message.into(),
        }
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, &self.section) {
            (Some(line), _) => write!(f, "line {line}: {}", self.message),
            (None, Some(section)) => write!(f, "section [{section}]: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ScenarioError {}

struct Entry {
    key: String,
    value: String,
    line: usize,
    consumed: bool,
}

struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

fn tokenize(text: &str) -> Result<Vec<Section>, ScenarioError> {
    let mut sections: Vec<Section> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| ScenarioError::at_line(line_no, "unterminated section header"))?
                .trim();
            if sections.iter().any(|s| s.name == name) {
                return Err(ScenarioError::at_line(
                    line_no,
                    format!("duplicate section [{name}]"),
                ));
            }
            sections.push(Section {
                name: name.to_string(),
                line: line_no,
                entries: Vec::new(),
            });
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ScenarioError::at_line(line_no, format!("expected 'key = value', got '{line}'"))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let section = sections.last_mut().ok_or_else(|| {
            ScenarioError::at_line(line_no, format!("key '{key}' appears before any section"))
        })?;
        if section.entries.iter().any(|e| e.key == key) {
            return Err(ScenarioError::at_line(
                line_no,
                format!("duplicate key '{key}' in section [{}]", section.name),
            ));
        }
        section.entries.push(Entry {
            key,
            value,
            line: line_no,
            consumed: false,
        });
    }
    Ok(sections)
}

struct Config {
    sections: Vec<Section>,
}

impl Config {
    fn take(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        let sec = self.sections.iter_mut().find(|s| s.name == section)?;
        let entry = sec.entries.iter_mut().find(|e| e.key == key)?;
        entry.consumed = true;
        Some((entry.value.clone(), entry.line))
    }

    fn take_f64(&mut self, section: &str, key: &str) -> Result<Option<f64>, ScenarioError> {
        match self.take(section, key) {
            None => Ok(None),
            Some((value, line)) => {
                let parsed: f64 = value.parse().map_err(|_| {
                    ScenarioError::at_line(line, format!("malformed number '{value}' for '{key}'"))
                })?;
                if !parsed.is_finite() {
                    return Err(ScenarioError::at_line(
                        line,
                        format!("'{key}' must be finite, got '{value}'"),
                    ));
                }
                Ok(Some(parsed))
            }
        }
    }

    fn take_usize(&mut self, section: &str, key: &str) -> Result<Option<usize>, ScenarioError> {
        match self.take(section, key) {
            None => Ok(None),
            Some((value, line)) => value.parse().map(Some).map_err(|_| {
                ScenarioError::at_line(line, format!("malformed integer '{value}' for '{key}'"))
            }),
        }
    }

    fn take_bool(&mut self, section: &str, key: &str) -> Result<Option<bool>, ScenarioError> {
        match self.take(section, key) {
            None => Ok(None),
            Some((value, line)) => match value.as_str() {
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                other => Err(ScenarioError::at_line(
                    line,
                    format!("expected true or false for '{key}', got '{other}'"),
                )),
            },
        }
    }

    fn has_section(&self, name: &str) -> bool {
        self.sections.iter().any(|s| s.name == name)
    }

    fn reject_leftovers(&self) -> Result<(), ScenarioError> {
        for sec in &self.sections {
            let known = sec.name == "mode"
                || sec.name == "source"
                || sec.name == "grid"
                || sec.name == "postselect"
                || sec
                    .name
                    .strip_prefix("arm.")
                    .is_some_and(|idx| idx.parse::<usize>().is_ok());
            if !known {
                return Err(ScenarioError::at_line(
                    sec.line,
                    format!("unknown section [{}]", sec.name),
                ));
            }
            if let Some(entry) = sec.entries.iter().find(|e| !e.consumed) {
                return Err(ScenarioError::at_line(
                    entry.line,
                    format!("unknown key '{}' in section [{}]", entry.key, sec.name),
                ));
            }
        }
        Ok(())
    }
}

/// Parses and fully validates a scenario, resolving every default.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut config = Config {
        sections: tokenize(text)?,
    };

    let (mode_name, mode_line) = config
        .take("mode", "name")
        .ok_or_else(|| ScenarioError::in_section("mode", "missing required key 'name'"))?;
    let mode = Mode::from_str(&mode_name).ok_or_else(|| {
        ScenarioError::at_line(
            mode_line,
            format!(
                "unknown mode '{mode_name}' (expected quantum3, quantum3-full, classical3, \
                 postselect, nphoton, exact-numeric or compare)"
            ),
        )
    })?;
    let normalization = match config.take("mode", "normalization") {
        None => Normalization::Peak,
        Some((value, line)) => value
            .parse()
            .map_err(|e| ScenarioError::at_line(line, format!("{e}")))?,
    };
    let oracle_check = config.take_bool("mode", "oracle_check")?.unwrap_or(false);

    let omega0 = config.take_f64("source", "omega0")?.unwrap_or(1.0);
    let n_photons = config.take_usize("source", "n_photons")?.unwrap_or(3);
    let sigma_f = config
        .take_f64("source", "sigma_f")?
        .ok_or_else(|| ScenarioError::in_section("source", "missing required key 'sigma_f'"))?;
    let source = SourceConfig::new(omega0, n_photons, sigma_f)
        .map_err(|e| ScenarioError::in_section("source", e.to_string()))?;

    let arm_count = config
        .sections
        .iter()
        .filter(|s| s.name.starts_with("arm."))
        .count();
    if arm_count != n_photons {
        return Err(ScenarioError::new(format!(
            "expected {n_photons} arm sections for n_photons = {n_photons}, found {arm_count}"
        )));
    }
    let mut arms = Vec::with_capacity(n_photons);
    for k in 1..=n_photons {
        let section = format!("arm.{k}");
        if !config.has_section(&section) {
            return Err(ScenarioError::new(format!(
                "missing section [{section}] (arm sections must be numbered 1..{n_photons})"
            )));
        }
        let group_delay = config.take_f64(&section, "group_delay")?.unwrap_or(0.0);
        let dispersion = config.take_f64(&section, "dispersion")?.unwrap_or(0.0);
        arms.push(
            ArmConfig::new(group_delay, dispersion)
                .map_err(|e| ScenarioError::in_section(&section, e.to_string()))?,
        );
    }

    if mode != Mode::Nphoton && n_photons != 3 {
        return Err(ScenarioError::new(format!(
            "mode {} requires n_photons = 3, got {n_photons}",
            mode.as_str()
        )));
    }

    let post_selection = if config.has_section("postselect") {
        if n_photons != 3 {
            return Err(ScenarioError::in_section(
                "postselect",
                "post-selection is defined for three-photon sources",
            ));
        }
        let omega3 = config
            .take_f64("postselect", "omega3_tilde")?
            .ok_or_else(|| {
                ScenarioError::in_section("postselect", "missing required key 'omega3_tilde'")
            })?;
        Some(
            PostSelection::new(omega3, &source)
                .map_err(|e| ScenarioError::in_section("postselect", e.to_string()))?,
        )
    } else {
        None
    };
    if mode == Mode::Postselect && post_selection.is_none() {
        return Err(ScenarioError::new(
            "mode postselect requires a [postselect] section",
        ));
    }
    if oracle_check && mode == Mode::Nphoton && n_photons != 3 {
        return Err(ScenarioError::new(
            "oracle_check is only available for nphoton with n_photons = 3",
        ));
    }

    let (default_t, default_tau) = default_grid(mode, &source, &arms, post_selection.as_ref())?;
    let grid_t = resolve_axis(&mut config, "t", default_t)?;
    let grid_tau = resolve_axis(&mut config, "tau", default_tau)?;

    config.reject_leftovers()?;

    Ok(Scenario {
        mode,
        normalization,
        oracle_check,
        source,
        arms,
        grid_t,
        grid_tau,
        post_selection,
    })
}

fn resolve_axis(
    config: &mut Config,
    axis: &str,
    default: AxisSpec,
) -> Result<AxisSpec, ScenarioError> {
    let min = config
        .take_f64("grid", &format!("{axis}_min"))?
        .unwrap_or(default.min);
    let max = config
        .take_f64("grid", &format!("{axis}_max"))?
        .unwrap_or(default.max);
    let count = config
        .take_usize("grid", &format!("{axis}_count"))?
        .unwrap_or(default.count);
    if !(min < max) {
        return Err(ScenarioError::in_section(
            "grid",
            format!("{axis}_min must be below {axis}_max, got [{min}, {max}]"),
        ));
    }
    if count < 2 {
        return Err(ScenarioError::in_section(
            "grid",
            format!("{axis}_count must be at least 2, got {count}"),
        ));
    }
    Ok(AxisSpec { min, max, count })
}

const DEFAULT_GRID_POINTS: usize = 201;
const DEFAULT_GRID_SIGMAS: f64 = 6.0;

/// Default grid: ±6 analytic standard deviations per axis, 201 points,
/// centered on the analytic peak of the selected mode's density.
fn default_grid(
    mode: Mode,
    source: &SourceConfig,
    arms: &[ArmConfig],
    ps: Option<&PostSelection>,
) -> Result<(AxisSpec, AxisSpec), ScenarioError> {
    let to_err = |e: ndc_core::Error| ScenarioError::new(e.to_string());
    let axis = |center: f64, sigma: f64| AxisSpec {
        min: center - DEFAULT_GRID_SIGMAS * sigma,
        max: center + DEFAULT_GRID_SIGMAS * sigma,
        count: DEFAULT_GRID_POINTS,
    };
    match mode {
        Mode::Quantum3 | Mode::ExactNumeric => {
            let arms3 = [arms[0], arms[1], arms[2]];
            let dist =
                covariance_from_coefficients(&quantum_coefficients(source, &arms3).map_err(to_err)?)
                    .map_err(to_err)?;
            Ok((
                axis(0.0, dist.variance_t().sqrt()),
                axis(0.0, dist.variance_tau().sqrt()),
            ))
        }
        Mode::Quantum3Full => {
            let arms3 = [arms[0], arms[1], arms[2]];
            let dist =
                covariance_from_coefficients(&quantum_coefficients(source, &arms3).map_err(to_err)?)
                    .map_err(to_err)?;
            let t_center = arms[1].group_delay() - arms[0].group_delay();
            let tau_center = arms[2].group_delay() - arms[1].group_delay();
            Ok((
                axis(t_center, dist.variance_t().sqrt()),
                axis(tau_center, dist.variance_tau().sqrt()),
            ))
        }
        Mode::Classical3 => {
            let arms3 = [arms[0], arms[1], arms[2]];
            let dist = covariance_from_coefficients(
                &classical_coefficients(source, &arms3).map_err(to_err)?,
            )
            .map_err(to_err)?;
            Ok((
                axis(0.0, dist.variance_t().sqrt()),
                axis(0.0, dist.variance_tau().sqrt()),
            ))
        }
        Mode::Compare => {
            let arms3 = [arms[0], arms[1], arms[2]];
            let q =
                covariance_from_coefficients(&quantum_coefficients(source, &arms3).map_err(to_err)?)
                    .map_err(to_err)?;
            let c = covariance_from_coefficients(
                &classical_coefficients(source, &arms3).map_err(to_err)?,
            )
            .map_err(to_err)?;
            Ok((
                axis(0.0, q.variance_t().max(c.variance_t()).sqrt()),
                axis(0.0, q.variance_tau().max(c.variance_tau()).sqrt()),
            ))
        }
        Mode::Postselect => {
            let ps = ps.ok_or_else(|| {
                ScenarioError::new("mode postselect requires a [postselect] section")
            })?;
            let timing =
                postselected_timing(source, &arms[0], &arms[1], ps).map_err(to_err)?;
            let sigma = timing.variance().sqrt();
            Ok((axis(timing.mean(), sigma), axis(timing.mean(), sigma)))
        }
        Mode::Nphoton => {
            let cov = nphoton_delay_covariance(source, arms).map_err(to_err)?;
            let dim = source.n_photons() - 1;
            let sigma_t = cov[0].sqrt();
            let sigma_tau = if dim >= 2 {
                cov[dim + 1].sqrt()
            } else {
                sigma_t
            };
            Ok((axis(0.0, sigma_t), axis(0.0, sigma_tau)))
        }
    }
}

/// Canonical plain-text rendering; parsing it back yields an equal scenario.
pub fn canonical_text(scenario: &Scenario) -> String {
    let mut out = String::new();
    out.push_str("[mode]\n");
    out.push_str(&format!("name = {}\n", scenario.mode.as_str()));
    out.push_str(&format!("normalization = {}\n", scenario.normalization));
    out.push_str(&format!("oracle_check = {}\n", scenario.oracle_check));
    out.push_str("\n[source]\n");
    out.push_str(&format!("omega0 = {}\n", scenario.source.omega0()));
    out.push_str(&format!("n_photons = {}\n", scenario.source.n_photons()));
    out.push_str(&format!("sigma_f = {}\n", scenario.source.sigma_f()));
    for (k, arm) in scenario.arms.iter().enumerate() {
        out.push_str(&format!("\n[arm.{}]\n", k + 1));
        out.push_str(&format!("group_delay = {}\n", arm.group_delay()));
        out.push_str(&format!("dispersion = {}\n", arm.dispersion()));
    }
    out.push_str("\n[grid]\n");
    out.push_str(&format!("t_min = {}\n", scenario.grid_t.min));
    out.push_str(&format!("t_max = {}\n", scenario.grid_t.max));
    out.push_str(&format!("t_count = {}\n", scenario.grid_t.count));
    out.push_str(&format!("tau_min = {}\n", scenario.grid_tau.min));
    out.push_str(&format!("tau_max = {}\n", scenario.grid_tau.max));
    out.push_str(&format!("tau_count = {}\n", scenario.grid_tau.count));
    if let Some(ps) = &scenario.post_selection {
        out.push_str("\n[postselect]\n");
        out.push_str(&format!("omega3_tilde = {}\n", ps.omega3_tilde()));
    }
    out
}
