use alloc::vec::Vec;

use super::midpoint::solve_midpoint;
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::likelihood::DissipationModel;
use crate::phase_space::{symplectic_gradient, Hamiltonian, PhasePoint};

/// Options for [`step_generic`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenericOptions {
    /// A step is accepted once its residual `R` is at most this.
    pub tol: f64,
    /// Tolerance of the inner implicit-midpoint solve.
    pub fixed_point_tol: f64,
    pub max_iter: usize,
    /// Extra gap vectors probed for feasibility.
    pub hints: Vec<PhasePoint>,
}

impl Default for GenericOptions {
    fn default() -> Self {
        GenericOptions {
            tol: 1e-12,
            fixed_point_tol: 1e-15,
            max_iter: 200,
            hints: Vec::new(),
        }
    }
}

/// The accepted solution of one generic step.
#[derive(Debug, Clone, PartialEq)]
pub struct GenericStep {
    pub state: PhasePoint,
    pub velocity: PhasePoint,
    pub gap: PhasePoint,
    pub residual: f64,
    pub iterations: usize,
}

struct Trial {
    gap: PhasePoint,
    state: PhasePoint,
    velocity: PhasePoint,
    residual: ExtReal,
}

struct Problem<'a> {
    model: &'a DissipationModel,
    h: &'a dyn Hamiltonian,
    z: &'a PhasePoint,
    t: f64,
    dt: f64,
    opts: &'a GenericOptions,
}

impl Problem<'_> {
    fn xh(&self, w: &PhasePoint, s: f64) -> PhasePoint {
        symplectic_gradient(self.h, w, s).unwrap_or_else(|_| w.scale(f64::NAN))
    }

    /// Velocity `v = XH(ẑ, t̂) + η` of the midpoint step driven by `η`.
    fn trial(&self, gap: PhasePoint) -> Result<Trial> {
        let state = solve_midpoint(
            self.z,
            self.t,
            self.dt,
            self.opts.fixed_point_tol,
            self.opts.max_iter,
            |w, s| &self.xh(w, s) + &gap,
        )?;
        let mid = self.z.lerp(&state, 0.5);
        let velocity = &self.xh(&mid, self.t + 0.5 * self.dt) + &gap;
        let residual = self.model.information(&mid, &velocity, &gap);
        Ok(Trial {
            gap,
            state,
            velocity,
            residual,
        })
    }

    fn trial_or_infeasible(&self, gap: PhasePoint) -> Trial {
        self.trial(gap.clone()).unwrap_or_else(|_| Trial {
            state: self.z.clone(),
            velocity: gap.clone(),
            gap,
            residual: ExtReal::PosInf,
        })
    }

    fn project(&self, gap: PhasePoint) -> PhasePoint {
        self.model.project_gap(&gap).unwrap_or(gap)
    }
}

fn rotate(v: &PhasePoint) -> PhasePoint {
    PhasePoint::from_parts(v.p().to_vec(), v.q().iter().map(|x| -x).collect())
}

fn accepted(trial: Trial, iterations: usize) -> GenericStep {
    GenericStep {
        state: trial.state,
        velocity: trial.velocity,
        gap: trial.gap,
        residual: trial.residual.to_f64(),
        iterations,
    }
}

/// One implicit step for an arbitrary tempered model.
///
/// The unknown is the gap vector `η`; the velocity is `v = XH(ẑ, t̂) + η` at
/// the midpoint `ẑ`, and the step is accepted when
/// `R = I(ẑ, v, η) ≤ tol`. Separable models with a known subgradient are
/// solved by iterating `η ← ∂ᴿf(v)`. Models whose polar domain can be
/// projected onto then try `η ← P(η + λ·Jv)`, which finds interior gap
/// vectors (sticking) the selector cannot. Otherwise, and as a fallback, `η` is
/// driven down `R` by projected finite-difference descent started from the
/// most Hamiltonian feasible candidate.
pub fn solve_generic(
    model: &DissipationModel,
    h: &dyn Hamiltonian,
    z: &PhasePoint,
    t: f64,
    dt: f64,
    opts: &GenericOptions,
) -> Result<GenericStep> {
    if !(dt >= 0.0) {
        return Err(Error::InvalidScenario("dt must be positive"));
    }
    let n = z.dim();
    let problem = Problem {
        model,
        h,
        z,
        t,
        dt,
        opts,
    };
    let mut iterations = 0;

    // subgradient fixed point
    if model.gap_selector(&PhasePoint::zeros(n)).is_some() {
        let mut trial = problem.trial(PhasePoint::zeros(n))?;
        for _ in 0..opts.max_iter.min(100) {
            iterations += 1;
            let Some(next_gap) = model.gap_selector(&trial.velocity) else {
                break;
            };
            let change = next_gap.dist_inf(&trial.gap);
            trial = problem.trial(next_gap)?;
            if change <= 1e-14 * (1.0 + trial.gap.norm_inf()) && trial.residual <= opts.tol {
                return Ok(accepted(trial, iterations));
            }
        }
    }

    // candidates, most Hamiltonian first
    let hat_t = t + 0.5 * dt;
    let mut candidates = alloc::vec![PhasePoint::zeros(n)];
    if let Ok(xh) = symplectic_gradient(h, z, hat_t) {
        candidates.push(problem.project(-&xh));
    }
    for hint in &opts.hints {
        candidates.push(hint.clone());
        candidates.push(problem.project(hint.clone()));
    }
    let mut best: Option<Trial> = None;
    for gap in candidates {
        if gap.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: gap.dim(),
            });
        }
        let trial = problem.trial_or_infeasible(gap);
        if trial.residual <= opts.tol {
            return Ok(accepted(trial, iterations));
        }
        if best.as_ref().is_none_or(|b| trial.residual < b.residual) {
            best = Some(trial);
        }
    }
    // projected dual iteration η ← P(η + λ·Jv(η)), J(v_q, v_p) = (v_p, −v_q)
    if dt > 0.0 && model.project_gap(&PhasePoint::zeros(n)).is_some() {
        let mut lambda = 2.0 / dt;
        'scales: for _ in 0..4 {
            let mut trial = problem.trial_or_infeasible(PhasePoint::zeros(n));
            let mut last_change = f64::INFINITY;
            for _ in 0..opts.max_iter.min(100) {
                iterations += 1;
                let next = problem.project(trial.gap.axpy(lambda, &rotate(&trial.velocity)));
                let change = next.dist_inf(&trial.gap);
                trial = problem.trial_or_infeasible(next);
                if trial.residual <= opts.tol {
                    return Ok(accepted(trial, iterations));
                }
                if !(change < 0.9 * last_change) && change > 1e-14 * (1.0 + trial.gap.norm_inf()) {
                    lambda *= 0.25;
                    continue 'scales;
                }
                last_change = change;
            }
            break;
        }
    }

    let mut current = match best {
        Some(trial) if trial.residual.is_finite() => trial,
        _ => return Err(Error::Infeasible),
    };

    // projected finite-difference descent on R(η)
    let mut step = 1.0;
    while iterations < opts.max_iter {
        iterations += 1;
        let r0 = current.residual.to_f64();
        let mut grad = PhasePoint::zeros(n);
        for i in 0..2 * n {
            let x = current.gap.coords().nth(i).unwrap_or(0.0);
            let fd = 1e-7 * (1.0 + x.abs());
            let shifted = |delta: f64| {
                let mut g = current.gap.clone();
                *g.coord_mut(i) += delta;
                problem.trial_or_infeasible(g).residual
            };
            let (up, down) = (shifted(fd), shifted(-fd));
            *grad.coord_mut(i) = match (up, down) {
                (ExtReal::Finite(u), ExtReal::Finite(d)) => (u - d) / (2.0 * fd),
                (ExtReal::Finite(u), ExtReal::PosInf) => (u - r0) / fd,
                (ExtReal::PosInf, ExtReal::Finite(d)) => (r0 - d) / fd,
                _ => 0.0,
            };
        }
        let slope = grad.norm();
        if slope == 0.0 {
            break;
        }
        let mut improved = false;
        while step > 1e-16 {
            let candidate = problem.project(current.gap.axpy(-step, &grad));
            let trial = problem.trial_or_infeasible(candidate);
            if let ExtReal::Finite(r) = trial.residual {
                if r <= r0 - 1e-4 * step * slope * slope {
                    current = trial;
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if current.residual <= opts.tol {
            return Ok(accepted(current, iterations));
        }
        if !improved {
            break;
        }
        step = (step * 4.0).min(1.0);
    }
    Err(Error::NonConvergence {
        iterations,
        residual: current.residual.to_f64(),
    })
}

/// [`solve_generic`], returning only the new state.
pub fn step_generic(
    model: &DissipationModel,
    h: &dyn Hamiltonian,
    z: &PhasePoint,
    t: f64,
    dt: f64,
    opts: &GenericOptions,
) -> Result<PhasePoint> {
    solve_generic(model, h, z, t, dt, opts).map(|s| s.state)
}
