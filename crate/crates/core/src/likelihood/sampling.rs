use alloc::vec::Vec;

use rand::Rng;

use super::DissipationModel;
use crate::phase_space::PhasePoint;

/// Sampling box for the randomized checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConfig {
    /// Degrees of freedom `n`; points live in `ℝ²ⁿ`.
    pub dim: usize,
    pub samples: usize,
    /// Coordinates are drawn from `[−radius, radius]`.
    pub radius: f64,
}

impl SampleConfig {
    pub fn new(dim: usize, samples: usize, radius: f64) -> Self {
        assert!(dim >= 1, "phase space dimension must be at least 1");
        assert!(
            radius > 0.0 && radius.is_finite(),
            "sampling radius must be positive"
        );
        SampleConfig {
            dim,
            samples,
            radius,
        }
    }
}

fn coords<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-radius..=radius)).collect()
}

pub(crate) fn random_point<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> PhasePoint {
    PhasePoint::from_parts(coords(rng, n, radius), coords(rng, n, radius))
}

/// Uniform draws mixed with points on the coordinate subspaces, where
/// indicator-type models are finite.
fn structured_point<R: Rng + ?Sized>(rng: &mut R, n: usize, radius: f64) -> PhasePoint {
    match rng.gen_range(0..8u8) {
        0 => PhasePoint::zeros(n),
        1 => PhasePoint::from_parts(alloc::vec![0.0; n], coords(rng, n, radius)),
        2 => PhasePoint::from_parts(coords(rng, n, radius), alloc::vec![0.0; n]),
        _ => random_point(rng, n, radius),
    }
}

/// A gap vector biased towards where the given models are finite or zero.
pub(crate) fn structured_gap<R: Rng + ?Sized>(
    rng: &mut R,
    models: &[&DissipationModel],
    z1: &PhasePoint,
    radius: f64,
) -> PhasePoint {
    let n = z1.dim();
    let guide = models[rng.gen_range(0..models.len())];
    match rng.gen_range(0..6u8) {
        0 => guide
            .gap_selector(z1)
            .unwrap_or_else(|| structured_point(rng, n, radius)),
        1 => {
            let raw = random_point(rng, n, radius);
            guide.project_gap(&raw).unwrap_or(raw)
        }
        _ => structured_point(rng, n, radius),
    }
}

/// `(z, z′, z″)` for checks over the given models.
pub(crate) fn sample_triple<R: Rng + ?Sized>(
    rng: &mut R,
    models: &[&DissipationModel],
    cfg: &SampleConfig,
) -> (PhasePoint, PhasePoint, PhasePoint) {
    let z = random_point(rng, cfg.dim, cfg.radius);
    let z1 = structured_point(rng, cfg.dim, cfg.radius);
    let z2 = structured_gap(rng, models, &z1, cfg.radius);
    (z, z1, z2)
}
