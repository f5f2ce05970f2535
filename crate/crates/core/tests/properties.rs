use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hamgap_core::convex_kernel::{
    fenchel_gap, in_right_subgradient, left_polar, right_polar, support_set, AbsLift,
    ConvexPotential, FnPotential, GridSpec, PolarStrategy, PotentialFlags, QuadraticLift,
    ZeroIndicator, ZeroPotential,
};
use hamgap_core::diagnostics::{energy_balance, info_gap, seeded_rivals};
use hamgap_core::dynamics::{gap_residual, integrate, pure_dissipative_check, Scenario};
use hamgap_core::likelihood::{temperedness_check, SampleConfig};
use hamgap_core::phase_space::{symplectic_form, symplectic_gradient, Oscillator};
use hamgap_core::{DissipationModel, Duality, ExtReal, Hamiltonian, PhasePoint};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn point(n: usize) -> impl Strategy<Value = PhasePoint> {
    (
        prop::collection::vec(-3.0..3.0f64, n),
        prop::collection::vec(-3.0..3.0f64, n),
    )
        .prop_map(|(q, p)| PhasePoint::new(q, p).unwrap())
}

fn pair() -> impl Strategy<Value = (PhasePoint, PhasePoint)> {
    (1usize..=3).prop_flat_map(|n| (point(n), point(n)))
}

fn potentials() -> Vec<Arc<dyn ConvexPotential>> {
    vec![
        Arc::new(ZeroIndicator),
        Arc::new(ZeroPotential),
        Arc::new(QuadraticLift::new(0.7)),
        Arc::new(AbsLift::new(0.3)),
    ]
}

fn models() -> Vec<DissipationModel> {
    vec![
        DissipationModel::max_likelihood(),
        DissipationModel::pure_hamiltonian(),
        DissipationModel::rayleigh(0.5),
        DissipationModel::friction(0.3),
    ]
}

proptest! {
    #![proptest_config(config(512))]

    #[test]
    fn fenchel_gap_is_nonnegative((z1, z2) in pair()) {
        for f in potentials() {
            for d in [Duality::symplectic(), Duality::euclidean()] {
                let gap = fenchel_gap(f.as_ref(), &d, &z1, &z2, &PolarStrategy::ClosedForm).unwrap();
                prop_assert!(gap.value >= -1e-10, "{}: {:?}", f.name(), gap);
            }
        }
    }

    #[test]
    fn subgradient_selector_saturates_fenchel((z1, _z2) in pair()) {
        for f in potentials() {
            let d = Duality::symplectic();
            if let Some(z2) = f.right_subgradient(&d, &z1) {
                if f.value(&z1).is_finite() {
                    prop_assert!(in_right_subgradient(f.as_ref(), &d, &z1, &z2, &PolarStrategy::ClosedForm, 1e-10).unwrap());
                }
            }
        }
    }

    #[test]
    fn information_round_trips((z, (z1, z2)) in pair().prop_flat_map(|(a, b)| (point(a.dim()), Just((a, b))))) {
        for m in models() {
            let i = m.information(&z, &z1, &z2);
            let w = symplectic_form(&z1, &z2).unwrap();
            let b = m.symplectic_bipotential(&z, &z1, &z2);
            match (i, b) {
                (ExtReal::Finite(i), ExtReal::Finite(b)) => {
                    prop_assert!((b - w - i).abs() <= 1e-12 * (1.0 + w.abs()));
                    let pi = m.likelihood(&z, &z1, &z2);
                    prop_assert!((pi - (-i).exp()).abs() <= 4.0 * f64::EPSILON * pi);
                    prop_assert!((0.0..=1.0).contains(&pi) || i < 0.0);
                }
                (ExtReal::PosInf, ExtReal::PosInf) => prop_assert_eq!(m.likelihood(&z, &z1, &z2), 0.0),
                _ => prop_assert!(false, "finiteness differs"),
            }
        }
    }

    #[test]
    fn duality_transport_keeps_information((z1, z2) in pair()) {
        let z = PhasePoint::zeros(z1.dim());
        let e = Duality::euclidean();
        for m in models() {
            let via_e = m.bipotential(&e, &z, &z1, &z2) - e.eval(&z1, &z2);
            let via_w = m.symplectic_bipotential(&z, &z1, &z2) - symplectic_form(&z1, &z2).unwrap();
            match (via_e, via_w) {
                (ExtReal::Finite(a), ExtReal::Finite(b)) => prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs())),
                (a, b) => prop_assert_eq!(a, b),
            }
        }
    }

    #[test]
    fn nonnegative_separable_models_are_tempered(a in 0.05..5.0f64, mu in 0.0..2.0f64, seed in any::<u64>()) {
        let cfg = SampleConfig::new(2, 400, 3.0);
        for f in [Arc::new(QuadraticLift::new(a)) as Arc<dyn ConvexPotential>, Arc::new(AbsLift::new(mu))] {
            let m = DissipationModel::separable(f, Duality::symplectic(), PolarStrategy::ClosedForm);
            let report = temperedness_check(&m, &cfg, &mut ChaCha8Rng::seed_from_u64(seed));
            prop_assert!(report.tempered, "{:?}", report.witness);
        }
    }
}

fn trajectory_case() -> impl Strategy<Value = (usize, f64, f64, f64)> {
    (0usize..3, -2.0..2.0f64, -2.0..2.0f64, 0.05..1.0f64)
}

fn case_model(kind: usize, param: f64) -> DissipationModel {
    match kind {
        0 => DissipationModel::pure_hamiltonian(),
        1 => DissipationModel::rayleigh(param),
        _ => DissipationModel::friction(param),
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn solution_steps_are_in_the_gap_set((kind, q, p, param) in trajectory_case()) {
        let h = Oscillator::unit();
        let m = case_model(kind, param);
        let s = Scenario::new(Arc::new(h), m.clone(), PhasePoint::scalar(q, p).unwrap())
            .with_window(0.0, 2.0)
            .with_dt(1e-2);
        let traj = integrate(&s).unwrap();
        for step in traj.steps() {
            let xh = symplectic_gradient(&h, &step.eval_point, step.eval_time).unwrap();
            prop_assert_eq!(&step.gap, &(&step.velocity - &xh));
            let r = gap_residual(&m, &h, &step.eval_point, step.eval_time, &step.gap).unwrap();
            prop_assert!(r.finite().is_some_and(|r| r.abs() <= 1e-9 * step.dt.max(1e-3)), "residual {:?}", r);
        }
    }

    #[test]
    fn smooth_steps_satisfy_the_inclusion((q, p, a) in (-2.0..2.0f64, -2.0..2.0f64, 0.05..2.0f64)) {
        let h = Oscillator::unit();
        let f = QuadraticLift::new(a);
        let s = Scenario::new(Arc::new(h), DissipationModel::rayleigh(a), PhasePoint::scalar(q, p).unwrap())
            .with_window(0.0, 1.0)
            .with_dt(1e-2);
        let traj = integrate(&s).unwrap();
        for step in traj.steps() {
            prop_assert!(in_right_subgradient(&f, &Duality::symplectic(), &step.velocity, &step.gap, &PolarStrategy::ClosedForm, 10.0 * s.solver.tol).unwrap());
        }
    }

    #[test]
    fn solutions_are_pure_dissipative((kind, q, p, param) in trajectory_case()) {
        let h = Oscillator::unit();
        let s = Scenario::new(Arc::new(h), case_model(kind, param), PhasePoint::scalar(q, p).unwrap())
            .with_window(0.0, 3.0)
            .with_dt(1e-2);
        let traj = integrate(&s).unwrap();
        let report = pure_dissipative_check(&h, &traj, 1e-10).unwrap();
        prop_assert!(report.passed, "{:?}", report);
    }

    #[test]
    fn balance_bookkeeping((kind, q, p, param) in trajectory_case()) {
        let h = Oscillator::unit();
        let m = case_model(kind, param);
        let s = Scenario::new(Arc::new(h), m.clone(), PhasePoint::scalar(q, p).unwrap())
            .with_window(0.0, 3.0)
            .with_dt(1e-2);
        let traj = integrate(&s).unwrap();
        let report = energy_balance(&m, &h, &traj).unwrap();
        prop_assert!(report.passed(), "{:?}", (report.max_balance_residual, report.worst_inequality, report.min_dissipation_term));
        let h0 = h.value(traj.initial_state(), 0.0);
        for k in 0..report.rows() {
            let identity = report.diss_cum[k] + report.energy[k] - h0;
            prop_assert!((report.info_gap_cum[k] - identity).abs() <= 1e-10);
        }
    }

    #[test]
    fn dominance_orders_information_gaps((q, p, a, seed) in (-2.0..2.0f64, -2.0..2.0f64, 0.05..2.0f64, any::<u64>())) {
        let h = Oscillator::unit();
        let m1 = DissipationModel::rayleigh(a);
        let m2 = DissipationModel::max_likelihood();
        let s = Scenario::new(Arc::new(h), m1.clone(), PhasePoint::scalar(q, p).unwrap())
            .with_window(0.0, 1.0)
            .with_dt(1e-2);
        let traj = integrate(&s).unwrap();
        for rival in seeded_rivals(&m1, &h, &traj, 3, 0.05, seed).unwrap() {
            let g1 = info_gap(&m1, &h, &rival).unwrap();
            let g2 = info_gap(&m2, &h, &rival).unwrap();
            prop_assert!(g2 <= g1 + 1e-12, "{:?} vs {:?}", g2, g1);
        }
    }

    #[test]
    fn integration_is_deterministic((kind, q, p, param) in trajectory_case()) {
        let s = Scenario::new(Arc::new(Oscillator::unit()), case_model(kind, param), PhasePoint::scalar(q, p).unwrap())
            .with_window(0.0, 1.0)
            .with_dt(1e-2);
        prop_assert_eq!(integrate(&s).unwrap(), integrate(&s).unwrap());
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn one_homogeneous_polars_are_zero_or_unbounded(q2 in -1.0..1.0f64, p2 in -1.0..1.0f64) {
        let grid = GridSpec::cube(1, 2.0, 41).unwrap();
        let z2 = PhasePoint::scalar(q2, p2).unwrap();
        for f in [AbsLift::new(0.3), AbsLift::new(1.2)] {
            let est = right_polar(&f, &Duality::symplectic(), &z2, &grid).unwrap();
            if !est.unbounded {
                prop_assert!(est.grid_sup.abs() <= est.resolution_bound, "{est:?}");
            }
            let closed = f.closed_right_polar(&Duality::symplectic(), &z2).unwrap();
            if closed == ExtReal::ZERO {
                prop_assert!(!est.unbounded);
            }
        }
    }

    #[test]
    fn support_sets_are_convex_and_hold_the_origin(
        (a, b) in pair(),
        lambda in 0.0..=1.0f64,
        mu in 0.0..2.0f64,
    ) {
        let f: Arc<dyn ConvexPotential> = Arc::new(AbsLift::new(mu));
        let grid = GridSpec::cube(a.dim(), 2.0, 5).unwrap();
        let set = support_set(f, grid).unwrap();
        prop_assert!(set.contains(&PhasePoint::zeros(a.dim())).unwrap());
        prop_assert!(set.contains_by_scan(&PhasePoint::zeros(a.dim())).unwrap());
        // members built by projection, then mixed
        let (a, b) = (set.project(&a).unwrap(), set.project(&b).unwrap());
        prop_assert!(set.contains(&a).unwrap() && set.contains(&b).unwrap());
        prop_assert!(set.contains(&a.lerp(&b, lambda)).unwrap());
        prop_assert!(set.contains_by_scan(&a.lerp(&b, lambda)).unwrap());
    }
}

#[test]
fn quadratic_lift_is_its_own_biconjugate() {
    let f = QuadraticLift::new(1.5);
    let d = Duality::symplectic();
    let inner = GridSpec::cube(1, 3.0, 61).unwrap();
    let outer = GridSpec::cube(1, 3.0, 41).unwrap();
    let g = FnPotential::new("grid polar", PotentialFlags::default(), move |z2| {
        right_polar(&f, &Duality::symplectic(), z2, &inner)
            .map(|est| est.value)
            .unwrap_or(ExtReal::PosInf)
    });
    for q1 in [-1.0, -0.4, 0.0, 0.3, 1.2] {
        let z1 = PhasePoint::scalar(q1, 0.7).unwrap();
        let est = left_polar(&g, &d, &z1, &outer).unwrap();
        let exact = 0.75 * q1 * q1;
        // two nested grid sups: the inner spacing enters through g
        let bound = est.resolution_bound + 0.1 * (1.0 + q1.abs());
        assert!(!est.unbounded, "{q1}: {est:?}");
        assert!(
            (est.grid_sup - exact).abs() <= bound,
            "{q1}: {} vs {exact}",
            est.grid_sup
        );
    }
}
