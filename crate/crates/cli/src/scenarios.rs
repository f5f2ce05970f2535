//! Scenario registry: names, descriptions and how each maps onto a core
//! [`Scenario`].

use std::fmt;
use std::sync::Arc;

use hamgap_core::dynamics::{Scenario, SolverOptions, Stepper};
use hamgap_core::phase_space::Oscillator;
use hamgap_core::{DissipationModel, PhasePoint};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    PureHamiltonian,
    Rayleigh,
    Friction,
    PureDissipativeCheck,
    Generic,
}

/// Models selectable through `scenario.model`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    MaxLikelihood,
    PureHamiltonian,
    Rayleigh,
    Friction,
    /// `I ≡ 0`. Not tempered; runs using it are refused.
    AlwaysLikely,
}

pub const SCENARIOS: [(ScenarioName, &str); 5] = [
    (
        ScenarioName::PureHamiltonian,
        "conservative oscillator, implicit midpoint",
    ),
    (
        ScenarioName::Rayleigh,
        "linear damping -a H_p on the momenta",
    ),
    (
        ScenarioName::Friction,
        "Coulomb friction with stick-slip event handling",
    ),
    (
        ScenarioName::PureDissipativeCheck,
        "runs scenario.model and checks omega(v, v - XH) >= 0 along the run",
    ),
    (
        ScenarioName::Generic,
        "scenario.model through the generic gap-vector solver",
    ),
];

impl ScenarioName {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::PureHamiltonian => "pure_hamiltonian",
            ScenarioName::Rayleigh => "rayleigh",
            ScenarioName::Friction => "friction",
            ScenarioName::PureDissipativeCheck => "pure_dissipative_check",
            ScenarioName::Generic => "generic",
        }
    }

    pub fn description(self) -> &'static str {
        SCENARIOS
            .iter()
            .find(|(name, _)| *name == self)
            .map(|(_, d)| *d)
            .unwrap_or_default()
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The registry as an aligned two-column table.
pub fn list_scenarios() -> String {
    let width = SCENARIOS
        .iter()
        .map(|(n, _)| n.as_str().len())
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for (name, description) in SCENARIOS {
        out.push_str(&format!("{:<width$}  {}\n", name.as_str(), description));
    }
    out
}

impl ModelName {
    pub fn build(self, config: &RunConfig) -> DissipationModel {
        let s = &config.scenario;
        match self {
            ModelName::MaxLikelihood => DissipationModel::max_likelihood(),
            ModelName::PureHamiltonian => DissipationModel::pure_hamiltonian(),
            ModelName::Rayleigh => DissipationModel::rayleigh(s.a),
            ModelName::Friction => DissipationModel::friction(s.mu),
            ModelName::AlwaysLikely => DissipationModel::always_likely(),
        }
    }
}

pub fn hamiltonian(config: &RunConfig) -> Oscillator {
    let s = &config.scenario;
    Oscillator {
        mass: s.mass,
        stiffness: s.stiffness,
        quartic: s.quartic,
    }
}

/// The core scenario a configuration describes.
pub fn build(config: &RunConfig) -> hamgap_core::Result<Scenario> {
    let s = &config.scenario;
    let (model, stepper) = match s.name {
        ScenarioName::PureHamiltonian => (ModelName::PureHamiltonian.build(config), Stepper::Auto),
        ScenarioName::Rayleigh => (ModelName::Rayleigh.build(config), Stepper::Auto),
        ScenarioName::Friction => (ModelName::Friction.build(config), Stepper::Auto),
        ScenarioName::PureDissipativeCheck => (s.model.build(config), Stepper::Auto),
        ScenarioName::Generic => (s.model.build(config), Stepper::Generic),
    };
    let z0 = PhasePoint::new(config.q0(), config.p0())?;
    let mut scenario = Scenario::new(Arc::new(hamiltonian(config)), model, z0)
        .with_window(config.time.t0, config.time.t_end)
        .with_dt(config.time.dt)
        .with_stepper(stepper)
        .with_seed(config.solver.seed);
    scenario.solver = SolverOptions {
        tol: config.solver.tol,
        max_iter: config.solver.max_iter,
        hints: Vec::new(),
        temperedness_samples: config.solver.temperedness_samples,
    };
    Ok(scenario)
}
