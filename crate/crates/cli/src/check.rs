//! The invariant suite behind the `check` subcommand.

use std::fmt::Write as _;
use std::sync::Arc;

use hamgap_core::convex_kernel::{
    fenchel_gap, right_polar, AbsLift, ConvexPotential, GridSpec, PolarStrategy, QuadraticLift,
    ZeroIndicator, ZeroPotential,
};
use hamgap_core::dynamics::{integrate, step_generic, step_rayleigh, GenericOptions, Scenario};
use hamgap_core::likelihood::{likelihood_axioms_check, temperedness_check, SampleConfig};
use hamgap_core::phase_space::Oscillator;
use hamgap_core::{DissipationModel, Duality, ExtReal, Hamiltonian, PhasePoint, Witness};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check: &'static str,
    pub subject: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub rows: Vec<CheckRow>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn verdict(&self, check: &str, subject: &str) -> Option<bool> {
        self.rows
            .iter()
            .find(|r| r.check == check && r.subject == subject)
            .map(|r| r.passed)
    }

    /// Aligned pass/fail matrix.
    pub fn render(&self) -> String {
        let cw = self
            .rows
            .iter()
            .map(|r| r.check.len())
            .max()
            .unwrap_or(0)
            .max(5);
        let sw = self
            .rows
            .iter()
            .map(|r| r.subject.len())
            .max()
            .unwrap_or(0)
            .max(7);
        let mut out = format!(
            "{:<cw$}  {:<sw$}  {:<7}  detail\n",
            "check", "subject", "verdict"
        );
        for r in &self.rows {
            let verdict = if r.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(
                out,
                "{:<cw$}  {:<sw$}  {:<7}  {}",
                r.check, r.subject, verdict, r.detail
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub samples: usize,
    pub seed: u64,
    pub inject_faulty: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            samples: 10_000,
            seed: 0,
            inject_faulty: false,
        }
    }
}

pub fn builtin_models() -> Vec<DissipationModel> {
    vec![
        DissipationModel::max_likelihood(),
        DissipationModel::pure_hamiltonian(),
        DissipationModel::rayleigh(0.5),
        DissipationModel::friction(0.3),
    ]
}

pub fn builtin_potentials() -> Vec<Arc<dyn ConvexPotential>> {
    vec![
        Arc::new(ZeroIndicator),
        Arc::new(ZeroPotential),
        Arc::new(QuadraticLift::new(0.5)),
        Arc::new(AbsLift::new(0.3)),
    ]
}

fn describe(w: &Witness) -> String {
    format!(
        "witness z={} z'={} z''={} ({:e} < {:e})",
        w.z, w.z1, w.z2, w.lhs, w.rhs
    )
}

fn coords<R: Rng>(rng: &mut R, n: usize, radius: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-radius..=radius)).collect()
}

/// Points biased towards the coordinate subspaces where indicator-type
/// polars are finite.
pub fn sample_point<R: Rng>(rng: &mut R, n: usize, radius: f64) -> PhasePoint {
    let zeros = vec![0.0; n];
    let (q, p) = match rng.gen_range(0..4u8) {
        0 => (zeros.clone(), zeros),
        1 => (zeros, coords(rng, n, radius)),
        _ => (coords(rng, n, radius), coords(rng, n, radius)),
    };
    PhasePoint::new(q, p).expect("matching lengths")
}

/// Smallest closed-form Fenchel gap over `pairs` sampled pairs.
pub fn fenchel_sweep(f: &dyn ConvexPotential, pairs: usize, seed: u64) -> hamgap_core::Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = Duality::symplectic();
    let mut worst = f64::INFINITY;
    for _ in 0..pairs {
        let n = rng.gen_range(1..=2);
        let z1 = sample_point(&mut rng, n, 3.0);
        let z2 = sample_point(&mut rng, n, 3.0);
        let gap = fenchel_gap(f, &d, &z1, &z2, &PolarStrategy::ClosedForm)?;
        if let ExtReal::Finite(g) = gap.value {
            worst = worst.min(g);
        }
    }
    Ok(worst)
}

/// Quadratic lift: grid oracle against the closed-form polar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAgreement {
    /// Largest `|grid − closed form| − bound` where the closed form is finite.
    pub worst_excess: f64,
    pub finite_points: usize,
    /// Points of infinite closed form the growth heuristic left unflagged.
    pub missed_unbounded: usize,
    pub infinite_points: usize,
}

impl GridAgreement {
    pub fn within_bound(&self) -> bool {
        self.finite_points > 0 && self.worst_excess <= 0.0
    }
}

pub fn quadratic_grid_agreement(points: usize, seed: u64) -> hamgap_core::Result<GridAgreement> {
    let f = QuadraticLift::new(0.5);
    let d = Duality::symplectic();
    let grid = GridSpec::cube(1, 4.0, 401)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = GridAgreement {
        worst_excess: f64::NEG_INFINITY,
        finite_points: 0,
        missed_unbounded: 0,
        infinite_points: 0,
    };
    for k in 0..points {
        let q2 = if k % 4 == 3 {
            rng.gen_range(0.2..1.0)
        } else {
            0.0
        };
        let z2 = PhasePoint::scalar(q2, rng.gen_range(-1.5..=1.5))?;
        let est = right_polar(&f, &d, &z2, &grid)?;
        let closed = f.closed_right_polar(&d, &z2).expect("closed form");
        match closed {
            ExtReal::Finite(c) => {
                out.finite_points += 1;
                let excess = if est.unbounded {
                    f64::INFINITY
                } else {
                    (est.grid_sup - c).abs() - est.resolution_bound
                };
                out.worst_excess = out.worst_excess.max(excess);
            }
            ExtReal::PosInf => {
                out.infinite_points += 1;
                out.missed_unbounded += usize::from(!est.unbounded);
            }
        }
    }
    Ok(out)
}

fn damped_unit(a: f64, t: f64) -> (f64, f64) {
    let wd = (1.0 - a * a / 4.0).sqrt();
    let decay = (-a * t / 2.0).exp();
    let q = decay * ((wd * t).cos() + a / (2.0 * wd) * (wd * t).sin());
    let p = -decay * (wd * t).sin() / wd;
    (q, p)
}

fn unit_scenario(model: DissipationModel, t_end: f64) -> hamgap_core::Result<Scenario> {
    Ok(Scenario::new(
        Arc::new(Oscillator::unit()),
        model,
        PhasePoint::scalar(1.0, 0.0)?,
    )
    .with_window(0.0, t_end)
    .with_dt(1e-3))
}

fn oracle_rows(rows: &mut Vec<CheckRow>) -> hamgap_core::Result<()> {
    let traj = integrate(&unit_scenario(DissipationModel::rayleigh(0.5), 2.0)?)?;
    let err = traj
        .times()
        .iter()
        .zip(traj.states())
        .map(|(t, z)| {
            let (q, p) = damped_unit(0.5, *t);
            (z.q()[0] - q).abs().max((z.p()[0] - p).abs())
        })
        .fold(0.0, f64::max);
    rows.push(CheckRow {
        check: "oracle",
        subject: "rayleigh closed form".into(),
        passed: err <= 1e-6,
        detail: format!("max state error {err:e} (bound 1e-6)"),
    });

    let traj = integrate(&unit_scenario(DissipationModel::friction(0.3), 4.0)?)?;
    let turn = traj
        .states()
        .windows(2)
        .find(|w| w[1].p()[0] == 0.0 && w[0].p()[0] != 0.0)
        .map(|w| w[1].q()[0]);
    let ok = turn.is_some_and(|q| (q + 0.4).abs() <= 1e-10);
    rows.push(CheckRow {
        check: "oracle",
        subject: "coulomb turning point".into(),
        passed: ok,
        detail: format!("first turning point {turn:?} (expected -0.4)"),
    });

    let h = Oscillator::unit();
    let traj = integrate(&unit_scenario(DissipationModel::pure_hamiltonian(), 10.0)?)?;
    let drift = traj
        .states()
        .iter()
        .map(|z| (h.value(z, 0.0) - 0.5).abs())
        .fold(0.0, f64::max);
    rows.push(CheckRow {
        check: "oracle",
        subject: "energy conservation".into(),
        passed: drift <= 1e-9,
        detail: format!("max |H - H0| {drift:e} (bound 1e-9)"),
    });

    let tol = 1e-13;
    let model = DissipationModel::rayleigh(0.5);
    let opts = GenericOptions {
        tol,
        ..GenericOptions::default()
    };
    let (mut zg, mut zr) = (PhasePoint::scalar(1.0, 0.0)?, PhasePoint::scalar(1.0, 0.0)?);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let t = k as f64 * 1e-3;
        zg = step_generic(&model, &h, &zg, t, 1e-3, &opts)?;
        zr = step_rayleigh(&h, 0.5, &zr, t, 1e-3, tol)?;
        worst = worst.max(zg.dist_inf(&zr));
    }
    rows.push(CheckRow {
        check: "oracle",
        subject: "generic vs rayleigh".into(),
        passed: worst <= 10.0 * tol,
        detail: format!("max state difference {worst:e} over 100 steps"),
    });
    Ok(())
}

/// Runs the suite. `samples` scales the sampled checks; the verdicts on
/// the built-in models do not depend on it.
pub fn run_checks(opts: &CheckOptions) -> hamgap_core::Result<CheckReport> {
    let mut rows = Vec::new();
    let samples = opts.samples.max(1);
    let mut models = builtin_models();
    if opts.inject_faulty {
        models.push(DissipationModel::always_likely().with_name("faulty (I = 0)"));
    }
    for (i, m) in models.iter().enumerate() {
        for n in [1, 2] {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (i as u64) << 8 ^ n as u64);
            let report = temperedness_check(m, &SampleConfig::new(n, samples, 3.0), &mut rng);
            rows.push(CheckRow {
                check: "temperedness",
                subject: format!("{} (n={n})", m.name()),
                passed: report.tempered,
                detail: report
                    .witness
                    .as_ref()
                    .map_or(format!("{} samples", report.samples), describe),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1000 + i as u64));
        let axioms =
            likelihood_axioms_check(m, &SampleConfig::new(1, samples.min(2000), 3.0), &mut rng);
        rows.push(CheckRow {
            check: "axioms",
            subject: m.name().to_string(),
            passed: axioms.passed(),
            detail: format!(
                "slot-max violations {}, convexity violations {}, negative I {}",
                axioms.slot_max_violations,
                axioms.convexity_violations,
                axioms.negative_information
            ),
        });
    }
    for (i, f) in builtin_potentials().iter().enumerate() {
        let worst = fenchel_sweep(f.as_ref(), samples, opts.seed.wrapping_add(2000 + i as u64))?;
        rows.push(CheckRow {
            check: "fenchel",
            subject: f.name().to_string(),
            passed: worst >= -1e-10,
            detail: format!("min finite gap {worst:e} over {samples} pairs"),
        });
    }
    let g = quadratic_grid_agreement(samples.clamp(4, 24), opts.seed.wrapping_add(3000))?;
    rows.push(CheckRow {
        check: "grid oracle",
        subject: "quadratic".into(),
        passed: g.within_bound(),
        detail: format!(
            "worst |grid - closed| - bound {:e} at {} finite points; growth heuristic flagged {}/{} infinite points",
            g.worst_excess,
            g.finite_points,
            g.infinite_points - g.missed_unbounded,
            g.infinite_points
        ),
    });
    oracle_rows(&mut rows)?;
    Ok(CheckReport { rows })
}
