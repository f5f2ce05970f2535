use alloc::boxed::Box;

use rand::Rng;

use super::sampling::{random_point, sample_triple, structured_gap};
use super::{DissipationModel, SampleConfig};
use crate::error::{Error, Witness};
use crate::ext_real::ExtReal;
use crate::math;
use crate::phase_space::{omega, PhasePoint};

const COMPARE_TOL: f64 = 1e-12;
const SLOT_MAX_TOL: f64 = 1e-6;
const CONVEXITY_TOL: f64 = 1e-9;

fn slack(scale: f64) -> f64 {
    COMPARE_TOL * (1.0 + scale.abs())
}

/// Outcome of [`temperedness_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct TemperednessReport {
    pub tempered: bool,
    pub samples: usize,
    /// First violating triple; `lhs` is `b_ω`, `rhs` is `max{0, ω}`.
    pub witness: Option<Witness>,
}

impl TemperednessReport {
    pub fn into_result(self) -> crate::Result<()> {
        if self.tempered {
            Ok(())
        } else {
            Err(Error::Untempered(self.witness.map(Box::new)))
        }
    }
}

/// Samples `b_ω ≥ max{0, ω}`, i.e. `π ≤ π_max`.
///
/// A `true` verdict only covers the sampled box.
pub fn temperedness_check<R: Rng + ?Sized>(
    m: &DissipationModel,
    cfg: &SampleConfig,
    rng: &mut R,
) -> TemperednessReport {
    for _ in 0..cfg.samples {
        let (z, z1, z2) = sample_triple(rng, &[m], cfg);
        let w = omega(&z1, &z2);
        let b = m.symplectic_bipotential(&z, &z1, &z2);
        let floor = w.max(0.0);
        if b < floor - slack(w) {
            return TemperednessReport {
                tempered: false,
                samples: cfg.samples,
                witness: Some(Witness {
                    z,
                    z1,
                    z2,
                    lhs: b.to_f64(),
                    rhs: floor,
                }),
            };
        }
    }
    TemperednessReport {
        tempered: true,
        samples: cfg.samples,
        witness: None,
    }
}

/// Outcome of [`dominates`].
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    pub dominates: bool,
    pub samples: usize,
    /// `lhs` is `I` of the dominated model, `rhs` that of the dominating one.
    pub witness: Option<Witness>,
}

/// Whether `m2` dominates `m1` on samples: `π¹ ≤ π²`, i.e. `I¹ ≥ I²`.
pub fn dominates<R: Rng + ?Sized>(
    m2: &DissipationModel,
    m1: &DissipationModel,
    cfg: &SampleConfig,
    rng: &mut R,
) -> DominanceReport {
    for _ in 0..cfg.samples {
        let (z, z1, z2) = sample_triple(rng, &[m1, m2], cfg);
        let i1 = m1.information(&z, &z1, &z2);
        let i2 = m2.information(&z, &z1, &z2);
        let scale = i2.finite().unwrap_or(0.0);
        if i1 < i2 - slack(scale) {
            return DominanceReport {
                dominates: false,
                samples: cfg.samples,
                witness: Some(Witness {
                    z,
                    z1,
                    z2,
                    lhs: i1.to_f64(),
                    rhs: i2.to_f64(),
                }),
            };
        }
    }
    DominanceReport {
        dominates: true,
        samples: cfg.samples,
        witness: None,
    }
}

/// Outcome of [`likelihood_axioms_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct AxiomReport {
    pub samples: usize,
    /// Sampled slot maxima of `π` that are neither near 0 nor near 1.
    pub slot_max_violations: usize,
    /// The slot maximum farthest from `{0, 1}`.
    pub worst_slot_max: f64,
    pub convexity_violations: usize,
    /// Largest `I(λa + (1−λ)b) − λI(a) − (1−λ)I(b)` seen.
    pub worst_convexity_gap: f64,
    /// Samples with `I < 0`.
    pub negative_information: usize,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.slot_max_violations == 0
            && self.convexity_violations == 0
            && self.negative_information == 0
    }
}

#[derive(Clone, Copy)]
enum Slot {
    First,
    Second,
}

fn eval_slot(
    m: &DissipationModel,
    slot: Slot,
    z: &PhasePoint,
    fixed: &PhasePoint,
    x: &PhasePoint,
) -> ExtReal {
    match slot {
        Slot::First => m.information(z, x, fixed),
        Slot::Second => m.information(z, fixed, x),
    }
}

/// Compass search minimizing `I` over one slot from `start`.
fn slot_min(
    m: &DissipationModel,
    slot: Slot,
    z: &PhasePoint,
    fixed: &PhasePoint,
    start: PhasePoint,
    radius: f64,
) -> ExtReal {
    let mut x = start;
    let mut best = eval_slot(m, slot, z, fixed, &x);
    let mut step = radius / 4.0;
    let mut evals = 0usize;
    while step > 1e-10 * radius && evals < 20_000 {
        let mut improved = false;
        for i in 0..2 * x.dim() {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                *y.coord_mut(i) += dir * step;
                let v = eval_slot(m, slot, z, fixed, &y);
                evals += 1;
                if v < best {
                    best = v;
                    x = y;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

fn to_likelihood(i: ExtReal) -> f64 {
    i.finite().map_or(0.0, |v| math::exp(-v))
}

/// Sampled checks of the likelihood axioms on a bounded box: slot maxima of
/// `π` are 0 or 1, `I` is convex in each slot, and `I ≥ 0`.
///
/// The axioms quantify over all of phase space; a pass is necessary, not
/// sufficient.
pub fn likelihood_axioms_check<R: Rng + ?Sized>(
    m: &DissipationModel,
    cfg: &SampleConfig,
    rng: &mut R,
) -> AxiomReport {
    let mut report = AxiomReport {
        samples: cfg.samples,
        slot_max_violations: 0,
        worst_slot_max: 0.0,
        convexity_violations: 0,
        worst_convexity_gap: 0.0,
        negative_information: 0,
    };
    let mut worst_distance = 0.0;
    for k in 0..cfg.samples {
        let (z, z1, z2) = sample_triple(rng, &[m], cfg);
        let base = m.information(&z, &z1, &z2);
        if base < -slack(0.0) {
            report.negative_information += 1;
        }

        // slot maxima on a subset of samples; each costs a local search
        if k % 4 == 0 {
            let starts_first = [z1.clone(), PhasePoint::zeros(cfg.dim)];
            let mut starts_second = alloc::vec![z2.clone(), PhasePoint::zeros(cfg.dim)];
            starts_second.extend(m.gap_selector(&z1));
            let best_first = starts_first
                .into_iter()
                .map(|s| slot_min(m, Slot::First, &z, &z2, s, cfg.radius))
                .fold(ExtReal::PosInf, |a, b| if b < a { b } else { a });
            let best_second = starts_second
                .into_iter()
                .map(|s| slot_min(m, Slot::Second, &z, &z1, s, cfg.radius))
                .fold(ExtReal::PosInf, |a, b| if b < a { b } else { a });
            for best in [best_first, best_second] {
                let pi = to_likelihood(best);
                let distance = pi.min(1.0 - pi);
                if distance > SLOT_MAX_TOL {
                    report.slot_max_violations += 1;
                }
                if distance > worst_distance {
                    worst_distance = distance;
                    report.worst_slot_max = pi;
                }
            }
        }

        // convexity along a segment in each slot
        let other1 = structured_first(rng, cfg);
        let other2 = structured_gap(rng, &[m], &z1, cfg.radius);
        let lambda: f64 = rng.gen_range(0.0..=1.0);
        for (slot, fixed, a, b) in [
            (Slot::First, &z2, &z1, &other1),
            (Slot::Second, &z1, &z2, &other2),
        ] {
            let (ia, ib) = (
                eval_slot(m, slot, &z, fixed, a),
                eval_slot(m, slot, &z, fixed, b),
            );
            let (ExtReal::Finite(ia), ExtReal::Finite(ib)) = (ia, ib) else {
                continue;
            };
            let mid = a.lerp(b, lambda);
            let rhs = lambda * ia + (1.0 - lambda) * ib;
            let gap = match eval_slot(m, slot, &z, fixed, &mid) {
                ExtReal::Finite(v) => v - rhs,
                ExtReal::PosInf => f64::INFINITY,
            };
            if gap > CONVEXITY_TOL * (1.0 + rhs.abs()) {
                report.convexity_violations += 1;
            }
            if gap > report.worst_convexity_gap {
                report.worst_convexity_gap = gap;
            }
        }
    }
    report
}

fn structured_first<R: Rng + ?Sized>(rng: &mut R, cfg: &SampleConfig) -> PhasePoint {
    if rng.gen_bool(0.25) {
        PhasePoint::zeros(cfg.dim)
    } else {
        random_point(rng, cfg.dim, cfg.radius)
    }
}
