use alloc::boxed::Box;
use alloc::string::String;

use crate::phase_space::PhasePoint;

pub type Result<T> = core::result::Result<T, Error>;

/// A sampled triple `(z, z′, z″)` at which a property failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub z: PhasePoint,
    pub z1: PhasePoint,
    pub z2: PhasePoint,
    /// Value that should have been the larger one.
    pub lhs: f64,
    /// Value it was compared against.
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("phase space dimension must be at least 1")]
    EmptyDimension,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("grid of {points} points exceeds the budget of {budget}")]
    GridBudget { points: u64, budget: u64 },

    #[error("potential has no finite value on the grid")]
    EmptyDomainOnGrid,

    #[error("no closed-form polar available for `{0}`")]
    NoClosedForm(String),

    #[error("potential `{0}` is not flagged one-homogeneous")]
    NotHomogeneous(String),

    #[error("bipotential falls below the duality ({lhs} < {rhs})", lhs = .0.lhs, rhs = .0.rhs)]
    BelowDuality(Box<Witness>),

    #[error("model failed temperedness check")]
    Untempered(Option<Box<Witness>>),

    #[error("invalid scenario: {0}")]
    InvalidScenario(&'static str),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("no feasible velocity found")]
    Infeasible,

    #[error("infinite dissipation at step {0}")]
    InfiniteDissipation(usize),

    #[error("at t = {time}: {cause}")]
    Step { time: f64, cause: Box<Error> },
}

impl Error {
    pub(crate) fn at(self, time: f64) -> Self {
        Error::Step {
            time,
            cause: Box::new(self),
        }
    }
}
