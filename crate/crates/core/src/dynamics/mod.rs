//! The evolution problem: a curve whose gap `η = ċ − XH` has likelihood 1.
//!
//! All steppers are implicit midpoint rules. A step from `z_k` to `z_{k+1}`
//! over `dt_k` is evaluated at `ẑ_k = (z_k + z_{k+1})/2`, `t̂_k = t_k + dt_k/2`,
//! and records `v_k = (z_{k+1} − z_k)/dt_k` and `η_k = v_k − XH(ẑ_k, t̂_k)`.
//! Friction steps are split at velocity reversals, so a trajectory's time
//! stamps need not be uniform.

mod friction;
mod generic;
mod midpoint;

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use friction::{step_friction, FRICTION_TOL};
pub use generic::{solve_generic, step_generic, GenericOptions, GenericStep};
pub use midpoint::{step_pure_hamiltonian, step_rayleigh};

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::likelihood::{temperedness_check, Builtin, DissipationModel, SampleConfig};
use crate::math;
use crate::phase_space::{omega, symplectic_gradient, Hamiltonian, PhasePoint};

/// `I(z, η + XH(z, t), η)`: zero exactly when `η ∈ Gap(z, t)`.
pub fn gap_residual(
    m: &DissipationModel,
    h: &dyn Hamiltonian,
    z: &PhasePoint,
    t: f64,
    eta: &PhasePoint,
) -> Result<ExtReal> {
    z.check_same_dim(eta)?;
    let xh = symplectic_gradient(h, z, t)?;
    Ok(m.information(z, &(eta + &xh), eta))
}

/// Per-step data of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub dt: f64,
    /// Evaluation point `ẑ_k`.
    pub eval_point: PhasePoint,
    /// Evaluation time `t̂_k`.
    pub eval_time: f64,
    /// `v_k = (z_{k+1} − z_k)/dt_k`.
    pub velocity: PhasePoint,
    /// `η_k = v_k − XH(ẑ_k, t̂_k)`.
    pub gap: PhasePoint,
    /// `I(ẑ_k, v_k, η_k)` for the model the trajectory was built with.
    pub residual: ExtReal,
    /// `b_ω(ẑ_k, v_k, η_k)` for that model.
    pub bipotential: ExtReal,
}

impl StepRecord {
    fn between(
        m: &DissipationModel,
        h: &dyn Hamiltonian,
        (t0, z0): (f64, &PhasePoint),
        (t1, z1): (f64, &PhasePoint),
    ) -> Result<Self> {
        let dt = t1 - t0;
        let eval_point = z0.lerp(z1, 0.5);
        let eval_time = t0 + 0.5 * dt;
        let q = z1
            .q()
            .iter()
            .zip(z0.q())
            .map(|(b, a)| (b - a) / dt)
            .collect();
        let p = z1
            .p()
            .iter()
            .zip(z0.p())
            .map(|(b, a)| (b - a) / dt)
            .collect();
        let velocity = PhasePoint::from_parts(q, p);
        let gap = &velocity - &symplectic_gradient(h, &eval_point, eval_time)?;
        let residual = m.information(&eval_point, &velocity, &gap);
        let bipotential = residual + omega(&velocity, &gap);
        Ok(StepRecord {
            dt,
            eval_point,
            eval_time,
            velocity,
            gap,
            residual,
            bipotential,
        })
    }
}

/// A discrete curve `t_k ↦ z_k` with per-step records.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<PhasePoint>,
    steps: Vec<StepRecord>,
}

impl Trajectory {
    fn start(t0: f64, z0: PhasePoint) -> Self {
        Trajectory {
            times: alloc::vec![t0],
            states: alloc::vec![z0],
            steps: Vec::new(),
        }
    }

    fn push(
        &mut self,
        m: &DissipationModel,
        h: &dyn Hamiltonian,
        t: f64,
        z: PhasePoint,
    ) -> Result<()> {
        let (t0, z0) = (self.final_time(), self.final_state());
        if !(t > t0) {
            return Err(Error::InvalidScenario("time stamps must increase strictly"));
        }
        if !z.is_finite() {
            return Err(Error::NonFinite("state"));
        }
        let record = StepRecord::between(m, h, (t0, z0), (t, &z))?;
        self.steps.push(record);
        self.times.push(t);
        self.states.push(z);
        Ok(())
    }

    /// Builds the records of an arbitrary discrete curve, for instance a
    /// rival to a computed solution.
    pub fn from_states(
        m: &DissipationModel,
        h: &dyn Hamiltonian,
        times: Vec<f64>,
        states: Vec<PhasePoint>,
    ) -> Result<Self> {
        if times.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: states.len(),
            });
        }
        let mut pairs = times.into_iter().zip(states);
        let (t0, z0) = pairs.next().ok_or(Error::InvalidScenario(
            "trajectory needs at least one state",
        ))?;
        let mut traj = Trajectory::start(t0, z0);
        for (t, z) in pairs {
            traj.final_state().check_same_dim(&z)?;
            traj.push(m, h, t, z)?;
        }
        Ok(traj)
    }

    /// The curve run backwards over the same time window.
    pub fn reversed(&self, m: &DissipationModel, h: &dyn Hamiltonian) -> Result<Self> {
        let (first, last) = (self.times[0], self.final_time());
        let times = self
            .times
            .iter()
            .rev()
            .map(|t| (last - t) + first)
            .collect();
        let states = self.states.iter().rev().cloned().collect();
        Trajectory::from_states(m, h, times, states)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[PhasePoint] {
        &self.states
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    /// Number of states, one more than the number of steps.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn initial_state(&self) -> &PhasePoint {
        &self.states[0]
    }

    pub fn final_state(&self) -> &PhasePoint {
        self.states
            .last()
            .expect("trajectory holds its initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory holds its initial time")
    }
}

/// Which stepper [`integrate`] runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stepper {
    /// The closed-form stepper of a built-in model, [`Stepper::Generic`]
    /// otherwise.
    Auto,
    PureHamiltonian,
    Rayleigh {
        a: f64,
    },
    Friction {
        mu: f64,
    },
    Generic,
}

/// Solver settings of a [`Scenario`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Fixed-point tolerance of the midpoint solves, and the residual bound
    /// at which generic steps are accepted.
    pub tol: f64,
    pub max_iter: usize,
    /// Gap vectors probed by the generic stepper.
    pub hints: Vec<PhasePoint>,
    /// Samples of the temperedness check run on models of unknown status.
    pub temperedness_samples: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-13,
            max_iter: 200,
            hints: Vec::new(),
            temperedness_samples: 10_000,
        }
    }
}

/// A Hamiltonian, a dissipation model, an initial state and a time grid.
#[derive(Clone)]
pub struct Scenario {
    pub hamiltonian: Arc<dyn Hamiltonian>,
    pub model: DissipationModel,
    pub z0: PhasePoint,
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    pub stepper: Stepper,
    pub solver: SolverOptions,
    pub seed: u64,
}

impl core::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Scenario")
            .field("hamiltonian", &self.hamiltonian.name())
            .field("model", &self.model)
            .field("z0", &self.z0)
            .field("t0", &self.t0)
            .field("t_end", &self.t_end)
            .field("dt", &self.dt)
            .field("stepper", &self.stepper)
            .field("solver", &self.solver)
            .field("seed", &self.seed)
            .finish()
    }
}

impl Scenario {
    /// Defaults: `[0, 10]`, `dt = 1e-3`, automatic stepper, seed 0.
    pub fn new(hamiltonian: Arc<dyn Hamiltonian>, model: DissipationModel, z0: PhasePoint) -> Self {
        Scenario {
            hamiltonian,
            model,
            z0,
            t0: 0.0,
            t_end: 10.0,
            dt: 1e-3,
            stepper: Stepper::Auto,
            solver: SolverOptions::default(),
            seed: 0,
        }
    }

    pub fn with_window(mut self, t0: f64, t_end: f64) -> Self {
        self.t0 = t0;
        self.t_end = t_end;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_stepper(mut self, stepper: Stepper) -> Self {
        self.stepper = stepper;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.solver.tol = tol;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// The stepper [`Stepper::Auto`] resolves to.
    pub fn resolved_stepper(&self) -> Stepper {
        match self.stepper {
            Stepper::Auto => match self.model.builtin() {
                Some(Builtin::PureHamiltonian) => Stepper::PureHamiltonian,
                Some(Builtin::Rayleigh { a }) => Stepper::Rayleigh { a },
                Some(Builtin::Friction { mu }) => Stepper::Friction { mu },
                Some(Builtin::MaxLikelihood) | None => Stepper::Generic,
            },
            other => other,
        }
    }

    /// Checks the time grid, the parameters and temperedness of the model.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidScenario("dt must be positive"));
        }
        if !(self.t0.is_finite() && self.t_end.is_finite()) {
            return Err(Error::NonFinite("time window"));
        }
        if !(self.t_end > self.t0) {
            return Err(Error::InvalidScenario("t_end must exceed t0"));
        }
        if !self.z0.is_finite() {
            return Err(Error::NonFinite("initial state"));
        }
        if !(self.solver.tol > 0.0) {
            return Err(Error::InvalidScenario("tol must be positive"));
        }
        match self.resolved_stepper() {
            Stepper::Rayleigh { a } if !(a >= 0.0) => {
                return Err(Error::InvalidScenario("damping a must be non-negative"))
            }
            Stepper::Friction { mu } if !(mu >= 0.0) => {
                return Err(Error::InvalidScenario(
                    "friction coefficient must be non-negative",
                ))
            }
            _ => {}
        }
        match self.model.flags().tempered {
            Some(true) => Ok(()),
            Some(false) => Err(Error::Untempered(None)),
            None => {
                let radius = 3.0f64.max(2.0 * self.z0.norm_inf());
                let cfg =
                    SampleConfig::new(self.z0.dim(), self.solver.temperedness_samples, radius);
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                temperedness_check(&self.model, &cfg, &mut rng).into_result()
            }
        }
    }

    fn step_count(&self) -> usize {
        let ratio = (self.t_end - self.t0) / self.dt;
        (math::ceil(ratio - 1e-9) as usize).max(1)
    }
}

/// Integrates a scenario over `[t0, t_end]`.
///
/// The last step is shortened to land on `t_end`. Untempered models are
/// refused before any step is taken.
pub fn integrate(s: &Scenario) -> Result<Trajectory> {
    s.validate()?;
    let h = s.hamiltonian.as_ref();
    let stepper = s.resolved_stepper();
    let generic = GenericOptions {
        tol: s.solver.tol,
        fixed_point_tol: s.solver.tol.min(1e-15),
        max_iter: s.solver.max_iter,
        hints: s.solver.hints.clone(),
    };
    let n = s.step_count();
    let mut traj = Trajectory::start(s.t0, s.z0.clone());
    for k in 0..n {
        let t = traj.final_time();
        let t_next = if k + 1 == n {
            s.t_end
        } else {
            s.t0 + (k + 1) as f64 * s.dt
        };
        let dt = t_next - t;
        let z = traj.final_state().clone();
        let substeps = match stepper {
            Stepper::PureHamiltonian => {
                step_pure_hamiltonian(h, &z, t, dt, s.solver.tol).map(|w| alloc::vec![(t_next, w)])
            }
            Stepper::Rayleigh { a } => {
                step_rayleigh(h, a, &z, t, dt, s.solver.tol).map(|w| alloc::vec![(t_next, w)])
            }
            Stepper::Friction { mu } => {
                friction::friction_substeps(h, mu, &z, t, dt, s.solver.tol.min(FRICTION_TOL))
            }
            Stepper::Generic | Stepper::Auto => solve_generic(&s.model, h, &z, t, dt, &generic)
                .map(|g| alloc::vec![(t_next, g.state)]),
        }
        .map_err(|e| e.at(t))?;
        for (time, state) in substeps {
            traj.push(&s.model, h, time, state)
                .map_err(|e| e.at(time))?;
        }
    }
    Ok(traj)
}

/// Outcome of [`pure_dissipative_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureDissipativeReport {
    pub passed: bool,
    /// Smallest `ω(v_k, η_k)` over the steps.
    pub worst: f64,
    pub worst_step: Option<usize>,
}

/// Checks `ω(v_k, v_k − XH(ẑ_k, t̂_k)) ≥ −tol` at every step, the discrete
/// form of being a solution for the maximal likelihood.
pub fn pure_dissipative_check(
    h: &dyn Hamiltonian,
    traj: &Trajectory,
    tol: f64,
) -> Result<PureDissipativeReport> {
    let mut worst = f64::INFINITY;
    let mut worst_step = None;
    for (k, step) in traj.steps().iter().enumerate() {
        let xh = symplectic_gradient(h, &step.eval_point, step.eval_time)?;
        let value = omega(&step.velocity, &(&step.velocity - &xh));
        if value < worst {
            worst = value;
            worst_step = Some(k);
        }
    }
    Ok(PureDissipativeReport {
        passed: worst >= -tol,
        worst,
        worst_step,
    })
}
