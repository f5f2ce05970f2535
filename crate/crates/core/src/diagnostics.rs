//! Functionals along discrete curves and checks of the energy balance, the
//! dissipation inequality and the minimal-dissipation principle.
//!
//! Every integral is a left Riemann sum over the stepper's own evaluation
//! points `(ẑ_k, t̂_k)`, so the checks measure the internal consistency of a
//! scheme rather than a quadrature mismatch.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{StepRecord, Trajectory};
use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::likelihood::DissipationModel;
use crate::math;
use crate::phase_space::{omega, symplectic_gradient, Hamiltonian, PhasePoint};

fn gap_for(h: &dyn Hamiltonian, step: &StepRecord) -> Result<PhasePoint> {
    Ok(&step.velocity - &symplectic_gradient(h, &step.eval_point, step.eval_time)?)
}

fn dissipation_term(
    m: &DissipationModel,
    h: &dyn Hamiltonian,
    step: &StepRecord,
) -> Result<ExtReal> {
    let gap = gap_for(h, step)?;
    Ok(m.symplectic_bipotential(&step.eval_point, &step.velocity, &gap))
}

fn information_term(
    m: &DissipationModel,
    h: &dyn Hamiltonian,
    step: &StepRecord,
) -> Result<ExtReal> {
    let gap = gap_for(h, step)?;
    Ok(m.information(&step.eval_point, &step.velocity, &gap))
}

/// Cumulative dissipation `Σ_{j<k} b_ω(ẑ_j, v_j, η_j) dt_j`, one entry per
/// state, starting at 0.
pub fn dissipation(
    m: &DissipationModel,
    h: &dyn Hamiltonian,
    traj: &Trajectory,
) -> Result<Vec<f64>> {
    let mut total = 0.0;
    let mut out = Vec::with_capacity(traj.len());
    out.push(0.0);
    for (k, step) in traj.steps().iter().enumerate() {
        match dissipation_term(m, h, step)? {
            ExtReal::Finite(b) => total += b * step.dt,
            ExtReal::PosInf => return Err(Error::InfiniteDissipation(k)),
        }
        out.push(total);
    }
    Ok(out)
}

/// `G = Σ I(ẑ_k, v_k, η_k) dt_k`, the information-content gap.
pub fn info_gap(m: &DissipationModel, h: &dyn Hamiltonian, traj: &Trajectory) -> Result<ExtReal> {
    let mut total = ExtReal::ZERO;
    for step in traj.steps() {
        total = total
            + information_term(m, h, step)?
                .finite()
                .map_or(ExtReal::PosInf, |i| ExtReal::Finite(i * step.dt));
    }
    Ok(total)
}

/// Worst discrete `dH/dt − ∂H/∂t` along a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    pub worst: f64,
    pub worst_step: Option<usize>,
}

fn inequality_lhs(h: &dyn Hamiltonian, traj: &Trajectory, k: usize) -> f64 {
    let step = &traj.steps()[k];
    let (t0, t1) = (traj.times()[k], traj.times()[k + 1]);
    let (z0, z1) = (&traj.states()[k], &traj.states()[k + 1]);
    (h.value(z1, t1) - h.value(z0, t0)) / step.dt - h.dt(&step.eval_point, step.eval_time)
}

/// `max_k (H(z_{k+1}, t_{k+1}) − H(z_k, t_k))/dt_k − ∂H/∂t(ẑ_k, t̂_k)`.
///
/// Solutions for tempered models keep this at or below zero.
pub fn dissipation_inequality(h: &dyn Hamiltonian, traj: &Trajectory) -> InequalityReport {
    let mut report = InequalityReport {
        worst: f64::NEG_INFINITY,
        worst_step: None,
    };
    for k in 0..traj.steps().len() {
        let lhs = inequality_lhs(h, traj, k);
        if lhs > report.worst {
            report.worst = lhs;
            report.worst_step = Some(k);
        }
    }
    report
}

/// Thresholds behind the pass flags of a [`BalanceReport`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceTolerances {
    pub balance: f64,
    pub inequality: f64,
    /// Allowed negativity of a single dissipation term.
    pub nonnegativity: f64,
}

impl Default for BalanceTolerances {
    fn default() -> Self {
        BalanceTolerances {
            balance: 1e-4,
            inequality: 1e-8,
            nonnegativity: 1e-12,
        }
    }
}

/// Per-step energy bookkeeping along a trajectory.
///
/// Row `k` describes the state after step `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceReport {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub diss_cum: Vec<f64>,
    /// `H(z_k) − H(z_0) − Σ ∂H/∂t dt + Diss_k`.
    pub balance_residual: Vec<f64>,
    /// Discrete `dH/dt − ∂H/∂t` of the step ending at this row.
    pub ineq_lhs: Vec<f64>,
    pub info_gap_cum: Vec<f64>,
    pub max_balance_residual: f64,
    pub worst_inequality: f64,
    pub min_dissipation_term: f64,
    pub tolerances: BalanceTolerances,
    pub balance_ok: bool,
    pub inequality_ok: bool,
    pub nonnegative_ok: bool,
    pub monotone_ok: bool,
}

impl BalanceReport {
    pub fn passed(&self) -> bool {
        self.balance_ok && self.inequality_ok && self.nonnegative_ok && self.monotone_ok
    }

    pub fn rows(&self) -> usize {
        self.times.len()
    }

    pub fn total_dissipation(&self) -> f64 {
        self.diss_cum.last().copied().unwrap_or(0.0)
    }

    pub fn total_info_gap(&self) -> f64 {
        self.info_gap_cum.last().copied().unwrap_or(0.0)
    }
}

/// [`energy_balance_with`] at the default tolerances.
pub fn energy_balance(
    m: &DissipationModel,
    h: &dyn Hamiltonian,
    traj: &Trajectory,
) -> Result<BalanceReport> {
    energy_balance_with(m, h, traj, BalanceTolerances::default())
}

pub fn energy_balance_with(
    m: &DissipationModel,
    h: &dyn Hamiltonian,
    traj: &Trajectory,
    tolerances: BalanceTolerances,
) -> Result<BalanceReport> {
    let steps = traj.steps().len();
    let h0 = h.value(traj.initial_state(), traj.times()[0]);
    let mut report = BalanceReport {
        times: Vec::with_capacity(steps),
        energy: Vec::with_capacity(steps),
        diss_cum: Vec::with_capacity(steps),
        balance_residual: Vec::with_capacity(steps),
        ineq_lhs: Vec::with_capacity(steps),
        info_gap_cum: Vec::with_capacity(steps),
        max_balance_residual: 0.0,
        worst_inequality: f64::NEG_INFINITY,
        min_dissipation_term: f64::INFINITY,
        tolerances,
        balance_ok: true,
        inequality_ok: true,
        nonnegative_ok: true,
        monotone_ok: true,
    };
    let (mut diss, mut work, mut gap) = (0.0, 0.0, 0.0);
    for (k, step) in traj.steps().iter().enumerate() {
        let b = dissipation_term(m, h, step)?
            .finite()
            .ok_or(Error::InfiniteDissipation(k))?;
        let i = information_term(m, h, step)?.to_f64();
        let previous = diss;
        diss += b * step.dt;
        work += h.dt(&step.eval_point, step.eval_time) * step.dt;
        gap += i * step.dt;
        let (t, z) = (traj.times()[k + 1], &traj.states()[k + 1]);
        let energy = h.value(z, t);
        let residual = energy - h0 - work + diss;
        let lhs = inequality_lhs(h, traj, k);

        report.min_dissipation_term = report.min_dissipation_term.min(b);
        report.max_balance_residual = report.max_balance_residual.max(residual.abs());
        report.worst_inequality = report.worst_inequality.max(lhs);
        report.monotone_ok &= diss >= previous;
        report.times.push(t);
        report.energy.push(energy);
        report.diss_cum.push(diss);
        report.balance_residual.push(residual);
        report.ineq_lhs.push(lhs);
        report.info_gap_cum.push(gap);
    }
    report.balance_ok = report.max_balance_residual <= tolerances.balance;
    report.inequality_ok = report.worst_inequality <= tolerances.inequality;
    report.nonnegative_ok = report.min_dissipation_term >= -tolerances.nonnegativity;
    Ok(report)
}

/// How a residual scales between two step sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceBudget {
    /// `coarse / fine`.
    pub ratio: f64,
    /// Observed order `log(ratio) / log(dt_coarse / dt_fine)`.
    pub order: f64,
    /// Smallest `C` with `residual ≤ C·dt` at both step sizes.
    pub constant: f64,
}

pub fn convergence_budget(coarse: (f64, f64), fine: (f64, f64)) -> ConvergenceBudget {
    let (dt_c, r_c) = coarse;
    let (dt_f, r_f) = fine;
    let ratio = r_c / r_f;
    ConvergenceBudget {
        ratio,
        order: libm::log(ratio) / libm::log(dt_c / dt_f),
        constant: (r_c / dt_c).max(r_f / dt_f),
    }
}

/// Rival curves compared against one solution.
#[derive(Debug, Clone, PartialEq)]
pub struct MinDissipationReport {
    /// `Diss + H` of the solution at the final time.
    pub solution_value: f64,
    /// `(Diss′ + H′) − (Diss + H)` per rival; `+∞` for infeasible rivals.
    pub margins: Vec<ExtReal>,
    pub worst_margin: ExtReal,
    pub tolerance: f64,
    pub passed: bool,
}

fn dissipation_plus_energy(
    m: &DissipationModel,
    h: &dyn Hamiltonian,
    traj: &Trajectory,
) -> Result<ExtReal> {
    let end = h.value(traj.final_state(), traj.final_time());
    match dissipation(m, h, traj) {
        Ok(d) => Ok(ExtReal::Finite(d.last().copied().unwrap_or(0.0) + end)),
        Err(Error::InfiniteDissipation(_)) => Ok(ExtReal::PosInf),
        Err(e) => Err(e),
    }
}

/// Checks `Diss(c′) + H(c′(T)) ≥ Diss(c) + H(c(T))` for rivals `c′` sharing
/// the start of `c`. A finite family of rivals is only a spot check of the
/// variational principle.
pub fn minimal_dissipation_compare(
    m: &DissipationModel,
    h: &dyn Hamiltonian,
    solution: &Trajectory,
    rivals: &[Trajectory],
    tolerance: f64,
) -> Result<MinDissipationReport> {
    let reference = dissipation_plus_energy(m, h, solution)?
        .finite()
        .ok_or(Error::InfiniteDissipation(0))?;
    let mut margins = Vec::with_capacity(rivals.len());
    for rival in rivals {
        if rival.initial_state() != solution.initial_state()
            || rival.times()[0] != solution.times()[0]
        {
            return Err(Error::InvalidScenario(
                "rivals must share the initial state",
            ));
        }
        if rival.final_time() != solution.final_time() {
            return Err(Error::InvalidScenario("rivals must share the final time"));
        }
        margins.push(dissipation_plus_energy(m, h, rival)? - reference);
    }
    let worst_margin = margins
        .iter()
        .copied()
        .fold(ExtReal::PosInf, |a, b| if b < a { b } else { a });
    Ok(MinDissipationReport {
        solution_value: reference,
        passed: worst_margin >= -tolerance,
        margins,
        worst_margin,
        tolerance,
    })
}

/// Adds `δ(t)` to every position of `solution`, then rebuilds momenta so
/// that each step satisfies `∂H/∂p(ẑ) = Δq/dt`. Requires `δ(t_0) = 0`.
pub fn perturbed_rival(
    m: &DissipationModel,
    h: &dyn Hamiltonian,
    solution: &Trajectory,
    delta: impl Fn(f64) -> f64,
) -> Result<Trajectory> {
    let times = solution.times().to_vec();
    if delta(times[0]) != 0.0 {
        return Err(Error::InvalidScenario(
            "perturbation must vanish at the start",
        ));
    }
    let mut states = Vec::with_capacity(times.len());
    states.push(solution.initial_state().clone());
    for k in 1..times.len() {
        let q: Vec<f64> = solution.states()[k]
            .q()
            .iter()
            .map(|x| x + delta(times[k]))
            .collect();
        let prev = &states[k - 1];
        let p = matching_momentum(h, prev, &q, times[k - 1], times[k])?;
        states.push(PhasePoint::new(q, p)?);
    }
    Trajectory::from_states(m, h, times, states)
}

/// Solves `∂H/∂p((q_k + q)/2, (p_k + p)/2, t̂) = (q − q_k)/dt` for `p`,
/// componentwise by Newton steps with difference-quotient slopes.
fn matching_momentum(
    h: &dyn Hamiltonian,
    prev: &PhasePoint,
    q: &[f64],
    t0: f64,
    t1: f64,
) -> Result<Vec<f64>> {
    let dt = t1 - t0;
    let t_mid = t0 + 0.5 * dt;
    let q_mid: Vec<f64> = prev.q().iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    let target: Vec<f64> = prev.q().iter().zip(q).map(|(a, b)| (b - a) / dt).collect();
    let residual = |p: &[f64]| {
        let p_mid = prev.p().iter().zip(p).map(|(a, b)| 0.5 * (a + b)).collect();
        let mid = PhasePoint::from_parts(q_mid.clone(), p_mid);
        h.dp(&mid, t_mid)
            .iter()
            .zip(&target)
            .map(|(g, v)| g - v)
            .collect::<Vec<f64>>()
    };
    let mut p = prev.p().to_vec();
    for _ in 0..50 {
        let r = residual(&p);
        if r.iter()
            .all(|x| x.abs() <= 1e-14 * (1.0 + target.iter().fold(0.0f64, |m, v| m.max(v.abs()))))
        {
            return Ok(p);
        }
        for i in 0..p.len() {
            let step = 1e-6 * (1.0 + p[i].abs());
            let mut shifted = p.clone();
            shifted[i] += step;
            let slope = (residual(&shifted)[i] - r[i]) / step;
            if slope == 0.0 || !slope.is_finite() {
                return Err(Error::NonConvergence {
                    iterations: 0,
                    residual: r[i],
                });
            }
            p[i] -= r[i] / slope;
        }
    }
    let r = residual(&p);
    Err(Error::NonConvergence {
        iterations: 50,
        residual: r.iter().fold(0.0, |m, x| m.max(x.abs())),
    })
}

/// Seeded perturbation family: even members are `ε(1 − cos ωt)` bumps, odd
/// members piecewise-linear hats through random nodes. All vanish at `t_0`.
pub fn seeded_rivals(
    m: &DissipationModel,
    h: &dyn Hamiltonian,
    solution: &Trajectory,
    count: usize,
    amplitude: f64,
    seed: u64,
) -> Result<Vec<Trajectory>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (t0, t1) = (solution.times()[0], solution.final_time());
    let span = t1 - t0;
    (0..count)
        .map(|i| {
            let eps =
                amplitude * rng.gen_range(0.5..=1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            if i % 2 == 0 {
                let w = rng.gen_range(0.5..=5.0);
                perturbed_rival(m, h, solution, |t| eps * (1.0 - math::cos(w * (t - t0))))
            } else {
                let mut nodes: Vec<(f64, f64)> = (0..4)
                    .map(|_| {
                        (
                            t0 + span * rng.gen_range(0.05..0.95),
                            eps * rng.gen_range(-1.0..=1.0),
                        )
                    })
                    .collect();
                nodes.push((t0, 0.0));
                nodes.push((t1, eps * rng.gen_range(-1.0..=1.0)));
                nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
                perturbed_rival(m, h, solution, |t| piecewise_linear(&nodes, t))
            }
        })
        .collect()
}

fn piecewise_linear(nodes: &[(f64, f64)], t: f64) -> f64 {
    if t <= nodes[0].0 {
        return nodes[0].1;
    }
    for pair in nodes.windows(2) {
        let ((ta, ya), (tb, yb)) = (pair[0], pair[1]);
        if t <= tb {
            return if tb > ta {
                ya + (yb - ya) * (t - ta) / (tb - ta)
            } else {
                yb
            };
        }
    }
    nodes[nodes.len() - 1].1
}

#[doc(hidden)]
pub fn omega_along(traj: &Trajectory) -> Vec<f64> {
    traj.steps()
        .iter()
        .map(|s| omega(&s.velocity, &s.gap))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, Scenario};
    use crate::phase_space::Oscillator;
    use alloc::sync::Arc;

    fn run(model: DissipationModel, t_end: f64) -> Trajectory {
        let s = Scenario::new(
            Arc::new(Oscillator::unit()),
            model,
            PhasePoint::scalar(1.0, 0.0).unwrap(),
        )
        .with_window(0.0, t_end);
        integrate(&s).unwrap()
    }

    #[test]
    fn pure_hamiltonian_dissipates_nothing() {
        let m = DissipationModel::pure_hamiltonian();
        let traj = run(m.clone(), 1.0);
        let h = Oscillator::unit();
        assert!(dissipation(&m, &h, &traj)
            .unwrap()
            .iter()
            .all(|d| *d == 0.0));
        assert!(info_gap(&m, &h, &traj).unwrap().finite().unwrap().abs() <= 1e-12);
        let report = energy_balance(&m, &h, &traj).unwrap();
        assert!(report.max_balance_residual <= 1e-10);
        assert!(report.worst_inequality.abs() <= 1e-10);
    }

    #[test]
    fn rayleigh_dissipation_is_a_qdot_squared() {
        let a = 0.5;
        let m = DissipationModel::rayleigh(a);
        let traj = run(m.clone(), 2.0);
        let h = Oscillator::unit();
        let diss = dissipation(&m, &h, &traj).unwrap();
        let direct: f64 = traj
            .steps()
            .iter()
            .map(|s| a * s.velocity.q()[0].powi(2) * s.dt)
            .sum();
        assert!((diss.last().unwrap() - direct).abs() < 1e-12);
        let drop = h.value(traj.initial_state(), 0.0) - h.value(traj.final_state(), 2.0);
        assert!((diss.last().unwrap() - drop).abs() < 1e-12);
        assert!(diss.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn info_gap_identity() {
        let h = Oscillator::unit();
        for m in [
            DissipationModel::rayleigh(0.5),
            DissipationModel::friction(0.3),
        ] {
            let traj = run(m.clone(), 3.0);
            let report = energy_balance(&m, &h, &traj).unwrap();
            for k in 0..report.rows() {
                let lhs = report.info_gap_cum[k];
                let rhs =
                    report.diss_cum[k] + report.energy[k] - h.value(traj.initial_state(), 0.0);
                assert!(
                    (lhs - rhs).abs() <= 1e-10,
                    "{} row {k}: {lhs} vs {rhs}",
                    m.name()
                );
            }
        }
    }

    #[test]
    fn inflating_curve_violates_the_inequality() {
        let h = Oscillator::unit();
        let m = DissipationModel::max_likelihood();
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
        let states = times
            .iter()
            .map(|t| PhasePoint::scalar(1.0 + t, 0.0).unwrap())
            .collect();
        let traj = Trajectory::from_states(&m, &h, times, states).unwrap();
        let report = dissipation_inequality(&h, &traj);
        assert!(report.worst > 0.0);
        assert!(omega_along(&traj).iter().all(|w| *w < 0.0));
    }

    #[test]
    fn rival_equal_to_solution_has_zero_margin() {
        let h = Oscillator::unit();
        let m = DissipationModel::rayleigh(0.5);
        let traj = run(m.clone(), 1.0);
        let same = perturbed_rival(&m, &h, &traj, |_| 0.0).unwrap();
        let report = minimal_dissipation_compare(&m, &h, &traj, &[same], 1e-8).unwrap();
        assert!(report.margins[0].finite().unwrap().abs() <= 1e-12);
    }

    #[test]
    fn sinusoidal_rival_has_positive_gap() {
        let h = Oscillator::unit();
        let m = DissipationModel::rayleigh(0.5);
        let traj = run(m.clone(), 2.0);
        let rival = perturbed_rival(&m, &h, &traj, |t| 0.01 * math::sin(5.0 * t)).unwrap();
        let g = info_gap(&m, &h, &rival).unwrap().finite().unwrap();
        let g0 = info_gap(&m, &h, &traj).unwrap().finite().unwrap();
        assert!(g > g0 && g > 1e-6);
    }

    #[test]
    fn rivals_are_infeasible_for_pure_hamiltonian() {
        let h = Oscillator::unit();
        let m = DissipationModel::pure_hamiltonian();
        let traj = run(m.clone(), 1.0);
        let rivals = seeded_rivals(&m, &h, &traj, 4, 0.01, 1).unwrap();
        let report = minimal_dissipation_compare(&m, &h, &traj, &rivals, 1e-8).unwrap();
        assert!(report.margins.iter().all(|m| *m == ExtReal::PosInf));
        assert!(report.passed);
    }

    #[test]
    fn rivals_must_share_the_start() {
        let h = Oscillator::unit();
        let m = DissipationModel::rayleigh(0.5);
        let traj = run(m.clone(), 1.0);
        let shifted = perturbed_rival(&m, &h, &traj, |t| t + 1.0);
        assert!(shifted.is_err());
    }

    #[test]
    fn convergence_budget_of_second_order_data() {
        let b = convergence_budget((2e-3, 4e-6), (1e-3, 1e-6));
        assert!((b.ratio - 4.0).abs() < 1e-12);
        assert!((b.order - 2.0).abs() < 1e-12);
        assert!((b.constant - 2e-3).abs() < 1e-15);
    }
}
