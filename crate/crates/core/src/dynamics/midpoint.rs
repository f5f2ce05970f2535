use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::phase_space::{Hamiltonian, PhasePoint};

pub(crate) const DEFAULT_MAX_ITER: usize = 200;

/// Solves `z⁺ = z + dt · rhs((z + z⁺)/2, t + dt/2)` by fixed-point iteration.
pub(crate) fn solve_midpoint(
    z: &PhasePoint,
    t: f64,
    dt: f64,
    tol: f64,
    max_iter: usize,
    rhs: impl Fn(&PhasePoint, f64) -> PhasePoint,
) -> Result<PhasePoint> {
    if dt == 0.0 {
        return Ok(z.clone());
    }
    let t_mid = t + 0.5 * dt;
    let mut next = z.axpy(dt, &rhs(z, t));
    let mut delta = f64::INFINITY;
    for _ in 0..max_iter {
        let mid = z.lerp(&next, 0.5);
        let candidate = z.axpy(dt, &rhs(&mid, t_mid));
        delta = candidate.dist_inf(&next);
        next = candidate;
        let scale = 1.0f64.max(next.norm_inf());
        if !next.is_finite() {
            break;
        }
        if delta <= tol.max(4.0 * f64::EPSILON) * scale {
            return Ok(next);
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual: delta,
    })
}

fn rate(h: &dyn Hamiltonian, z: &PhasePoint, t: f64, damping: f64) -> PhasePoint {
    let hq = h.dq(z, t);
    let hp = h.dp(z, t);
    let pdot: Vec<f64> = hq
        .iter()
        .zip(&hp)
        .map(|(gq, gp)| -gq - damping * gp)
        .collect();
    PhasePoint::from_parts(hp, pdot)
}

/// One implicit-midpoint step of `ż = XH(z, t)`.
pub fn step_pure_hamiltonian(
    h: &dyn Hamiltonian,
    z: &PhasePoint,
    t: f64,
    dt: f64,
    tol: f64,
) -> Result<PhasePoint> {
    solve_midpoint(z, t, dt, tol, DEFAULT_MAX_ITER, |w, s| rate(h, w, s, 0.0))
}

/// One implicit-midpoint step of `q̇ = ∂H/∂p`, `ṗ = −∂H/∂q − a q̇`.
pub fn step_rayleigh(
    h: &dyn Hamiltonian,
    a: f64,
    z: &PhasePoint,
    t: f64,
    dt: f64,
    tol: f64,
) -> Result<PhasePoint> {
    if !(a >= 0.0) {
        return Err(Error::InvalidScenario("damping a must be non-negative"));
    }
    solve_midpoint(z, t, dt, tol, DEFAULT_MAX_ITER, |w, s| rate(h, w, s, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math;
    use crate::phase_space::{FreeDrift, Oscillator};

    #[test]
    fn oscillator_step_is_a_rotation() {
        let h = Oscillator::unit();
        let z = PhasePoint::scalar(1.0, 0.0).unwrap();
        let dt = 1e-3;
        let next = step_pure_hamiltonian(&h, &z, 0.0, dt, 1e-14).unwrap();
        assert!((h.value(&next, dt) - h.value(&z, 0.0)).abs() <= 1e-12);
        // midpoint rotates by 2·atan(dt/2)
        let angle = 2.0 * libm::atan(0.5 * dt);
        assert!((next.q()[0] - math::cos(angle)).abs() < 1e-14);
        assert!((next.p()[0] + math::sin(angle)).abs() < 1e-14);
        assert!((next.q()[0] - math::cos(dt)).abs() < 1e-9);
    }

    #[test]
    fn free_drift_is_exact() {
        let z = PhasePoint::scalar(0.25, -3.0).unwrap();
        for dt in [1e-3, 0.5, 7.0] {
            let next = step_pure_hamiltonian(&FreeDrift, &z, 0.0, dt, 1e-14).unwrap();
            assert_eq!(next.q()[0], 0.25 + dt);
            assert_eq!(next.p()[0], -3.0);
        }
    }

    #[test]
    fn zero_step_is_identity() {
        let z = PhasePoint::scalar(0.3, 0.7).unwrap();
        assert_eq!(
            step_pure_hamiltonian(&Oscillator::unit(), &z, 1.0, 0.0, 1e-14).unwrap(),
            z
        );
    }

    #[test]
    fn rayleigh_first_step_force() {
        let z = PhasePoint::scalar(0.0, 1.0).unwrap();
        let dt = 1e-6;
        let next = step_rayleigh(&Oscillator::unit(), 0.5, &z, 0.0, dt, 1e-15).unwrap();
        let pdot = (next.p()[0] - 1.0) / dt;
        assert!((pdot + 0.5).abs() < 1e-5);
    }

    #[test]
    fn rayleigh_without_damping_is_pure() {
        let h = Oscillator::unit();
        let z = PhasePoint::scalar(0.6, -0.8).unwrap();
        let a = step_rayleigh(&h, 0.0, &z, 0.0, 0.01, 1e-14).unwrap();
        let b = step_pure_hamiltonian(&h, &z, 0.0, 0.01, 1e-14).unwrap();
        assert!(a.dist_inf(&b) <= 1e-14);
    }

    #[test]
    fn negative_damping_is_rejected() {
        let z = PhasePoint::scalar(0.0, 1.0).unwrap();
        assert!(step_rayleigh(&Oscillator::unit(), -1.0, &z, 0.0, 0.1, 1e-12).is_err());
    }

    #[test]
    fn divergent_iteration_reports_residual() {
        let h = Oscillator::harmonic(1.0, 1e6);
        let z = PhasePoint::scalar(1.0, 0.0).unwrap();
        let err = step_pure_hamiltonian(&h, &z, 0.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }
}
