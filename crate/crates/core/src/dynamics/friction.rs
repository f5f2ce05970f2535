use alloc::vec::Vec;

use super::midpoint::{solve_midpoint, step_pure_hamiltonian, DEFAULT_MAX_ITER};
use crate::error::{Error, Result};
use crate::math;
use crate::phase_space::{Hamiltonian, PhasePoint};

/// Default fixed-point tolerance of [`step_friction`].
pub const FRICTION_TOL: f64 = 1e-14;

/// Sub-steps allowed inside one step before giving up.
const MAX_EVENTS: usize = 64;

/// Event times are located to this fraction of the step.
const EVENT_TIME_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Slide(f64),
    Stick,
}

fn modes(h: &dyn Hamiltonian, mu: f64, z: &PhasePoint, t: f64) -> Vec<Mode> {
    let hq = h.dq(z, t);
    let hp = h.dp(z, t);
    (0..z.dim())
        .map(|i| {
            let p = z.p()[i];
            if p != 0.0 {
                let v = if hp[i] != 0.0 { hp[i] } else { p };
                Mode::Slide(math::sign0(v))
            } else if hq[i].abs() <= mu {
                Mode::Stick
            } else {
                Mode::Slide(-math::sign0(hq[i]))
            }
        })
        .collect()
}

fn rate(h: &dyn Hamiltonian, mu: f64, modes: &[Mode], z: &PhasePoint, t: f64) -> PhasePoint {
    let hq = h.dq(z, t);
    let hp = h.dp(z, t);
    let mut qdot = Vec::with_capacity(modes.len());
    let mut pdot = Vec::with_capacity(modes.len());
    for (i, mode) in modes.iter().enumerate() {
        match mode {
            Mode::Slide(s) => {
                qdot.push(hp[i]);
                pdot.push(-hq[i] - mu * s);
            }
            Mode::Stick => {
                qdot.push(0.0);
                pdot.push(0.0);
            }
        }
    }
    PhasePoint::from_parts(qdot, pdot)
}

fn event(h: &dyn Hamiltonian, mu: f64, modes: &[Mode], z: &PhasePoint, t: f64) -> bool {
    let mut hq = None;
    modes.iter().enumerate().any(|(i, mode)| match mode {
        Mode::Slide(s) => s * z.p()[i] <= 0.0,
        Mode::Stick => hq.get_or_insert_with(|| h.dq(z, t))[i].abs() > mu,
    })
}

/// Steps `[t, t + dt]` with event splitting; returns `(end time, state)` for
/// each sub-step.
pub(crate) fn friction_substeps(
    h: &dyn Hamiltonian,
    mu: f64,
    z: &PhasePoint,
    t: f64,
    dt: f64,
    tol: f64,
) -> Result<Vec<(f64, PhasePoint)>> {
    if !(mu >= 0.0) {
        return Err(Error::InvalidScenario(
            "friction coefficient must be non-negative",
        ));
    }
    let t_end = t + dt;
    if mu == 0.0 {
        return Ok(alloc::vec![(
            t_end,
            step_pure_hamiltonian(h, z, t, dt, tol)?
        )]);
    }
    let solve = |modes: &[Mode], from: &PhasePoint, start: f64, span: f64| {
        solve_midpoint(from, start, span, tol, DEFAULT_MAX_ITER, |w, s| {
            rate(h, mu, modes, w, s)
        })
    };

    let mut out = Vec::new();
    let mut current = z.clone();
    let mut now = t;
    for _ in 0..MAX_EVENTS {
        let remaining = t_end - now;
        let modes = modes(h, mu, &current, now);
        let full = solve(&modes, &current, now, remaining)?;
        if !event(h, mu, &modes, &full, t_end) {
            out.push((t_end, full));
            return Ok(out);
        }

        let (mut lo, mut hi, mut state) = (0.0, remaining, full);
        while hi - lo > EVENT_TIME_TOL * dt {
            let mid = 0.5 * (lo + hi);
            let trial = solve(&modes, &current, now, mid)?;
            if event(h, mu, &modes, &trial, now + mid) {
                hi = mid;
                state = trial;
            } else {
                lo = mid;
            }
        }
        for (i, mode) in modes.iter().enumerate() {
            if let Mode::Slide(s) = mode {
                if s * state.p()[i] <= 0.0 {
                    state.p_mut()[i] = 0.0;
                }
            }
        }

        let reached = now + hi;
        if t_end - reached <= 1e-9 * dt {
            out.push((t_end, state));
            return Ok(out);
        }
        if reached > now {
            out.push((reached, state.clone()));
            now = reached;
        }
        current = state;
    }
    Err(Error::NonConvergence {
        iterations: MAX_EVENTS,
        residual: t_end - now,
    })
}

/// One stick-slip step for `H = kinetic(p) + V(q)` under dry friction
/// `f(z) = μ‖q‖₁`, with componentwise sticking.
///
/// Steps crossing `q̇ = 0` are split at the crossing, where `p` is reset to
/// zero and each component sticks if `|∂V/∂q| ≤ μ` or restarts sliding in the
/// force direction.
pub fn step_friction(
    h: &dyn Hamiltonian,
    mu: f64,
    z: &PhasePoint,
    t: f64,
    dt: f64,
) -> Result<PhasePoint> {
    let mut steps = friction_substeps(h, mu, z, t, dt, FRICTION_TOL)?;
    Ok(steps.pop().map_or_else(|| z.clone(), |(_, state)| state))
}
