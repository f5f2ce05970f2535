//! Run configuration: a TOML document with `[scenario]`, `[time]`,
//! `[solver]` and `[output]` sections.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::scenarios::{ModelName, ScenarioName};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    pub name: ScenarioName,
    /// Degrees of freedom.
    pub n: usize,
    /// Rayleigh damping.
    pub a: f64,
    /// Friction coefficient.
    pub mu: f64,
    pub stiffness: f64,
    pub mass: f64,
    pub quartic: f64,
    /// Model integrated by the `generic` and `pure_dissipative_check` scenarios.
    pub model: ModelName,
    /// Initial positions; defaults to all ones.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q0: Option<Vec<f64>>,
    /// Initial momenta; defaults to zeros.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<Vec<f64>>,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        ScenarioSection {
            name: ScenarioName::Rayleigh,
            n: 1,
            a: 0.5,
            mu: 0.3,
            stiffness: 1.0,
            mass: 1.0,
            quartic: 0.0,
            model: ModelName::Rayleigh,
            q0: None,
            p0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection {
            t0: 0.0,
            t_end: 10.0,
            dt: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Bound on the energy-balance residual.
    pub balance_tol: f64,
    /// Bound on the discrete `dH/dt − ∂H/∂t`.
    pub inequality_tol: f64,
    /// Bound on per-step gap residuals.
    pub residual_tol: f64,
    /// Samples of the temperedness check for models of unknown status.
    pub temperedness_samples: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            tol: 1e-13,
            max_iter: 200,
            seed: 0,
            balance_tol: 1e-4,
            inequality_tol: 1e-8,
            residual_tol: 1e-9,
            temperedness_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// File stem; defaults to the scenario name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
    pub check_balance: bool,
    pub check_inequality: bool,
    pub check_residual: bool,
    pub check_pure_dissipative: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
            stem: None,
            check_balance: true,
            check_inequality: true,
            check_residual: true,
            check_pure_dissipative: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub scenario: ScenarioSection,
    pub time: TimeSection,
    pub solver: SolverSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    /// Malformed document or unknown key, with a 1-based position.
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    /// A well-formed value outside its valid range.
    Semantic { key: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax {
                line,
                column,
                message,
            } => write!(f, "line {line}, column {column}: {message}"),
            ConfigError::Semantic { key, message } => write!(f, "{key}: {message}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn position(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn syntax(text: &str, err: toml::de::Error) -> ConfigError {
    let (line, column) = err.span().map_or((1, 1), |span| position(text, span.start));
    ConfigError::Syntax {
        line,
        column,
        message: err.message().trim().to_string(),
    }
}

fn semantic(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Semantic {
        key: key.to_string(),
        message: message.into(),
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let config: RunConfig = toml::from_str(text).map_err(|e| syntax(text, e))?;
    config.validate()?;
    Ok(config)
}

/// Parses a document, applies `section.key=value` overrides, then validates.
pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    toml::from_str::<RunConfig>(text).map_err(|e| syntax(text, e))?;
    let mut table: toml::Table = toml::from_str(text).map_err(|e| syntax(text, e))?;
    for item in overrides {
        apply_override(&mut table, item)?;
    }
    let config: RunConfig =
        table
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Semantic {
                key: "--set".into(),
                message: e.message().trim().to_string(),
            })?;
    config.validate()?;
    Ok(config)
}

fn override_value(raw: &str) -> toml::Value {
    let probe = format!("v = {raw}");
    toml::from_str::<toml::Table>(&probe)
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Applies one `section.key=value` override to a parsed document.
pub fn apply_override(table: &mut toml::Table, item: &str) -> Result<(), ConfigError> {
    let (path, raw) = item
        .split_once('=')
        .ok_or_else(|| semantic(item, "override must look like section.key=value"))?;
    let (section, key) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| semantic(path, "override key must look like section.key"))?;
    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    let toml::Value::Table(inner) = entry else {
        return Err(semantic(section, "not a section"));
    };
    inner.insert(key.to_string(), override_value(raw.trim()));
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let s = &self.scenario;
        let t = &self.time;
        let v = &self.solver;
        let finite = |key: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(semantic(key, "must be finite"))
            }
        };
        if s.n == 0 {
            return Err(semantic("scenario.n", "n must be at least 1"));
        }
        finite("scenario.a", s.a)?;
        finite("scenario.mu", s.mu)?;
        finite("scenario.stiffness", s.stiffness)?;
        finite("scenario.mass", s.mass)?;
        finite("scenario.quartic", s.quartic)?;
        if s.a < 0.0 {
            return Err(semantic("scenario.a", "a must be non-negative"));
        }
        if s.mu < 0.0 {
            return Err(semantic("scenario.mu", "mu must be non-negative"));
        }
        if s.mass <= 0.0 {
            return Err(semantic("scenario.mass", "mass must be positive"));
        }
        if s.stiffness < 0.0 || s.quartic < 0.0 {
            return Err(semantic(
                "scenario.stiffness",
                "stiffness and quartic must be non-negative",
            ));
        }
        for (key, values) in [("scenario.q0", &s.q0), ("scenario.p0", &s.p0)] {
            if let Some(values) = values {
                if values.len() != s.n {
                    return Err(semantic(
                        key,
                        format!("expected {} entries, found {}", s.n, values.len()),
                    ));
                }
                if values.iter().any(|x| !x.is_finite()) {
                    return Err(semantic(key, "must be finite"));
                }
            }
        }
        finite("time.t0", t.t0)?;
        finite("time.t_end", t.t_end)?;
        if !(t.dt > 0.0 && t.dt.is_finite()) {
            return Err(semantic("time.dt", "dt must be positive"));
        }
        if t.t_end <= t.t0 {
            return Err(semantic("time.t_end", "t_end must exceed t0"));
        }
        for (key, x) in [
            ("solver.tol", v.tol),
            ("solver.balance_tol", v.balance_tol),
            ("solver.inequality_tol", v.inequality_tol),
            ("solver.residual_tol", v.residual_tol),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(semantic(key, "must be positive"));
            }
        }
        if v.max_iter == 0 {
            return Err(semantic("solver.max_iter", "must be at least 1"));
        }
        if let Some(stem) = &self.output.stem {
            if stem.is_empty() || stem.contains(['/', '\\']) {
                return Err(semantic("output.stem", "must be a plain file name"));
            }
        }
        Ok(())
    }

    pub fn q0(&self) -> Vec<f64> {
        self.scenario
            .q0
            .clone()
            .unwrap_or_else(|| vec![1.0; self.scenario.n])
    }

    pub fn p0(&self) -> Vec<f64> {
        self.scenario
            .p0
            .clone()
            .unwrap_or_else(|| vec![0.0; self.scenario.n])
    }

    pub fn stem(&self) -> String {
        self.output
            .stem
            .clone()
            .unwrap_or_else(|| self.scenario.name.as_str().to_string())
    }

    /// Canonical TOML with every default spelled out. Parsing it back
    /// yields an equal configuration.
    pub fn to_canonical(&self) -> String {
        let mut full = self.clone();
        full.scenario.q0 = Some(self.q0());
        full.scenario.p0 = Some(self.p0());
        full.output.stem = Some(self.stem());
        toml::to_string(&full).expect("configuration serializes")
    }
}
