use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::ext_real::ExtReal;
use crate::math;
use crate::phase_space::{Duality, DualityKind, PhasePoint};

/// Rounding slack used by every membership predicate.
///
/// Discrete velocities are differences of stored states, so a gap component
/// that is zero in exact arithmetic comes out at ~1e-13. Membership tests
/// accept such values; anything larger is outside.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

/// Structure flags a potential advertises. They are trusted, not proven.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PotentialFlags {
    pub smooth: bool,
    pub one_homogeneous: bool,
    pub indicator: bool,
}

/// A convex lsc function `f : Q × P → ℝ ∪ {+∞}`.
///
/// Closed forms are optional. When absent, the grid oracles in
/// [`crate::convex_kernel`] are used instead.
pub trait ConvexPotential: Send + Sync {
    fn name(&self) -> &str;

    fn value(&self, z: &PhasePoint) -> ExtReal;

    fn flags(&self) -> PotentialFlags {
        PotentialFlags::default()
    }

    /// `f*ᴿ_d(z″)` in closed form, when known for this duality.
    fn closed_right_polar(&self, _d: &Duality, _z2: &PhasePoint) -> Option<ExtReal> {
        None
    }

    /// One element of the right subgradient `∂ᴿ_d f(z′)`, when it is non-empty
    /// and a selection is known.
    fn right_subgradient(&self, _d: &Duality, _z1: &PhasePoint) -> Option<PhasePoint> {
        None
    }

    /// Nearest point (Euclidean) of the effective domain of `f*ᴿ_d`.
    fn project_polar_domain(&self, _d: &Duality, _z2: &PhasePoint) -> Option<PhasePoint> {
        None
    }

    /// Analytic membership in `C = {z″ : ω(z, z″) ≤ f(z) ∀z}` for
    /// one-homogeneous potentials.
    fn support_membership(&self, _z2: &PhasePoint) -> Option<bool> {
        None
    }
}

fn near_zero(xs: &[f64]) -> bool {
    math::norm_inf(xs) <= FEASIBILITY_SLACK
}

/// `χ₀`: zero at the origin, `+∞` elsewhere.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroIndicator;

impl ConvexPotential for ZeroIndicator {
    fn name(&self) -> &str {
        "zero_indicator"
    }

    fn value(&self, z: &PhasePoint) -> ExtReal {
        ExtReal::indicator(near_zero(z.q()) && near_zero(z.p()))
    }

    fn flags(&self) -> PotentialFlags {
        PotentialFlags {
            smooth: false,
            one_homogeneous: true,
            indicator: true,
        }
    }

    fn closed_right_polar(&self, _d: &Duality, _z2: &PhasePoint) -> Option<ExtReal> {
        Some(ExtReal::ZERO)
    }

    fn right_subgradient(&self, _d: &Duality, z1: &PhasePoint) -> Option<PhasePoint> {
        self.value(z1)
            .is_finite()
            .then(|| PhasePoint::zeros(z1.dim()))
    }

    fn project_polar_domain(&self, _d: &Duality, z2: &PhasePoint) -> Option<PhasePoint> {
        Some(z2.clone())
    }

    fn support_membership(&self, _z2: &PhasePoint) -> Option<bool> {
        Some(true)
    }
}

/// `f ≡ 0`. Its polar is `χ₀`, so its separable bipotential forces `η = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPotential;

impl ConvexPotential for ZeroPotential {
    fn name(&self) -> &str {
        "zero"
    }

    fn value(&self, _z: &PhasePoint) -> ExtReal {
        ExtReal::ZERO
    }

    fn flags(&self) -> PotentialFlags {
        PotentialFlags {
            smooth: true,
            one_homogeneous: true,
            indicator: true,
        }
    }

    fn closed_right_polar(&self, d: &Duality, z2: &PhasePoint) -> Option<ExtReal> {
        // sup of a linear functional: finite only where it vanishes
        d.is_builtin()
            .then(|| ExtReal::indicator(near_zero(z2.q()) && near_zero(z2.p())))
    }

    fn right_subgradient(&self, _d: &Duality, z1: &PhasePoint) -> Option<PhasePoint> {
        Some(PhasePoint::zeros(z1.dim()))
    }

    fn project_polar_domain(&self, _d: &Duality, z2: &PhasePoint) -> Option<PhasePoint> {
        Some(PhasePoint::zeros(z2.dim()))
    }

    fn support_membership(&self, z2: &PhasePoint) -> Option<bool> {
        Some(near_zero(z2.q()) && near_zero(z2.p()))
    }
}

/// `f(z) = (a/2)|q|²`, the lift of a quadratic dissipation potential on
/// positions. Its symplectic separable bipotential is Rayleigh damping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticLift {
    pub a: f64,
}

impl QuadraticLift {
    pub fn new(a: f64) -> Self {
        assert!(a > 0.0, "quadratic lift needs a > 0");
        QuadraticLift { a }
    }
}

impl ConvexPotential for QuadraticLift {
    fn name(&self) -> &str {
        "quadratic"
    }

    fn value(&self, z: &PhasePoint) -> ExtReal {
        ExtReal::Finite(0.5 * self.a * math::norm2_sq(z.q()))
    }

    fn flags(&self) -> PotentialFlags {
        PotentialFlags {
            smooth: true,
            one_homogeneous: false,
            indicator: false,
        }
    }

    fn closed_right_polar(&self, d: &Duality, z2: &PhasePoint) -> Option<ExtReal> {
        // ω and ωᵀ both give χ₀(q″) + |p″|²/2a; the inner product swaps roles
        let (constrained, free) = match d.kind() {
            DualityKind::Symplectic => (z2.q(), z2.p()),
            DualityKind::Euclidean => (z2.p(), z2.q()),
            DualityKind::Custom if d.transposed().is_symplectic() => (z2.q(), z2.p()),
            DualityKind::Custom => return None,
        };
        Some(ExtReal::indicator(near_zero(constrained)) + math::norm2_sq(free) / (2.0 * self.a))
    }

    fn right_subgradient(&self, d: &Duality, z1: &PhasePoint) -> Option<PhasePoint> {
        let n = z1.dim();
        let scaled: Vec<f64> = z1.q().iter().map(|x| self.a * x).collect();
        match d.kind() {
            DualityKind::Symplectic => Some(PhasePoint::from_parts(
                alloc::vec![0.0; n],
                scaled.into_iter().map(|x| -x).collect(),
            )),
            DualityKind::Euclidean => Some(PhasePoint::from_parts(scaled, alloc::vec![0.0; n])),
            DualityKind::Custom => None,
        }
    }

    fn project_polar_domain(&self, d: &Duality, z2: &PhasePoint) -> Option<PhasePoint> {
        let n = z2.dim();
        match d.kind() {
            DualityKind::Symplectic => {
                Some(PhasePoint::from_parts(alloc::vec![0.0; n], z2.p().to_vec()))
            }
            DualityKind::Euclidean => {
                Some(PhasePoint::from_parts(z2.q().to_vec(), alloc::vec![0.0; n]))
            }
            DualityKind::Custom => None,
        }
    }
}

/// `f(z) = μ‖q‖₁`, the lift of dry (Coulomb) friction on positions.
///
/// One-homogeneous, so its symplectic polar is the indicator of
/// `C = {(0, p″) : ‖p″‖_∞ ≤ μ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsLift {
    pub mu: f64,
}

impl AbsLift {
    pub fn new(mu: f64) -> Self {
        assert!(mu >= 0.0, "friction coefficient must be non-negative");
        AbsLift { mu }
    }

    fn in_box(&self, zero_part: &[f64], bounded_part: &[f64]) -> bool {
        near_zero(zero_part) && math::norm_inf(bounded_part) <= self.mu + FEASIBILITY_SLACK
    }
}

impl ConvexPotential for AbsLift {
    fn name(&self) -> &str {
        "abs"
    }

    fn value(&self, z: &PhasePoint) -> ExtReal {
        ExtReal::Finite(self.mu * math::norm1(z.q()))
    }

    fn flags(&self) -> PotentialFlags {
        PotentialFlags {
            smooth: false,
            one_homogeneous: true,
            indicator: false,
        }
    }

    fn closed_right_polar(&self, d: &Duality, z2: &PhasePoint) -> Option<ExtReal> {
        match d.kind() {
            DualityKind::Symplectic => Some(ExtReal::indicator(self.in_box(z2.q(), z2.p()))),
            DualityKind::Euclidean => Some(ExtReal::indicator(self.in_box(z2.p(), z2.q()))),
            DualityKind::Custom if d.transposed().is_symplectic() => {
                Some(ExtReal::indicator(self.in_box(z2.q(), z2.p())))
            }
            DualityKind::Custom => None,
        }
    }

    fn right_subgradient(&self, d: &Duality, z1: &PhasePoint) -> Option<PhasePoint> {
        let n = z1.dim();
        let signs: Vec<f64> = z1.q().iter().map(|x| self.mu * math::sign0(*x)).collect();
        match d.kind() {
            DualityKind::Symplectic => Some(PhasePoint::from_parts(
                alloc::vec![0.0; n],
                signs.into_iter().map(|x| -x).collect(),
            )),
            DualityKind::Euclidean => Some(PhasePoint::from_parts(signs, alloc::vec![0.0; n])),
            DualityKind::Custom => None,
        }
    }

    fn project_polar_domain(&self, d: &Duality, z2: &PhasePoint) -> Option<PhasePoint> {
        let n = z2.dim();
        let clip = |xs: &[f64]| xs.iter().map(|x| x.clamp(-self.mu, self.mu)).collect();
        match d.kind() {
            DualityKind::Symplectic => {
                Some(PhasePoint::from_parts(alloc::vec![0.0; n], clip(z2.p())))
            }
            DualityKind::Euclidean => {
                Some(PhasePoint::from_parts(clip(z2.q()), alloc::vec![0.0; n]))
            }
            DualityKind::Custom => None,
        }
    }

    fn support_membership(&self, z2: &PhasePoint) -> Option<bool> {
        Some(self.in_box(z2.q(), z2.p()))
    }
}

type ValueFn = dyn Fn(&PhasePoint) -> ExtReal + Send + Sync;

/// A potential given only by its values. Polars go through the grid oracle.
#[derive(Clone)]
pub struct FnPotential {
    name: String,
    value: Arc<ValueFn>,
    flags: PotentialFlags,
}

impl FnPotential {
    pub fn new(
        name: impl Into<String>,
        flags: PotentialFlags,
        value: impl Fn(&PhasePoint) -> ExtReal + Send + Sync + 'static,
    ) -> Self {
        FnPotential {
            name: name.into(),
            value: Arc::new(value),
            flags,
        }
    }
}

impl ConvexPotential for FnPotential {
    fn name(&self) -> &str {
        &self.name
    }

    fn value(&self, z: &PhasePoint) -> ExtReal {
        (self.value)(z)
    }

    fn flags(&self) -> PotentialFlags {
        self.flags
    }
}
