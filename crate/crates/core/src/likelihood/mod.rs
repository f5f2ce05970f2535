//! Likelihoods `π = exp(−I)` on triples `(z, z′, z″)` and their bipotentials.
//!
//! A [`DissipationModel`] stores the information content `I` (log domain);
//! the likelihood and the bipotential relative to any duality `d`,
//! `b_d = I + d`, are derived views. Sampled checks for the likelihood axioms,
//! temperedness and dominance live in this module too. They quantify over a
//! bounded sampling box only, so a pass is necessary, not sufficient.

mod checks;
mod sampling;

use alloc::string::String;
use alloc::sync::Arc;
use core::fmt;

use rand::Rng;

pub use checks::{
    dominates, likelihood_axioms_check, temperedness_check, AxiomReport, DominanceReport,
    TemperednessReport,
};
pub use sampling::SampleConfig;

use crate::convex_kernel::{
    polar_value, AbsLift, ConvexPotential, PolarStrategy, QuadraticLift, ZeroPotential,
};
use crate::error::{Error, Result, Witness};
use crate::ext_real::ExtReal;
use crate::math;
use crate::phase_space::{omega, Duality, PhasePoint};

/// `π_max(z′, z″) = exp(min{0, ω(z′, z″)})`.
pub fn max_likelihood(z1: &PhasePoint, z2: &PhasePoint) -> Result<f64> {
    z1.check_same_dim(z2)?;
    Ok(math::exp(omega(z1, z2).min(0.0)))
}

/// `b_ω^min(z′, z″) = max{0, ω(z′, z″)}`.
pub fn minimal_symplectic_bipotential(z1: &PhasePoint, z2: &PhasePoint) -> Result<f64> {
    z1.check_same_dim(z2)?;
    Ok(omega(z1, z2).max(0.0))
}

/// Structure flags of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModelFlags {
    /// `Some(true)` when known tempered, `Some(false)` when a check failed,
    /// `None` when not yet established.
    pub tempered: Option<bool>,
    pub separable: bool,
    pub state_dependent: bool,
}

type TripleFn = dyn Fn(&PhasePoint, &PhasePoint, &PhasePoint) -> ExtReal + Send + Sync;

#[derive(Clone)]
enum Kind {
    MaxLikelihood,
    Separable {
        potential: Arc<dyn ConvexPotential>,
        duality: Duality,
        polar: PolarStrategy,
    },
    Bipotential {
        bipotential: Arc<TripleFn>,
        duality: Duality,
    },
    Information(Arc<TripleFn>),
}

/// Tags the built-in models, which have dedicated steppers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    MaxLikelihood,
    PureHamiltonian,
    Rayleigh { a: f64 },
    Friction { mu: f64 },
}

/// A likelihood, stored through its information content `I = −ln π`.
#[derive(Clone)]
pub struct DissipationModel {
    name: String,
    kind: Kind,
    flags: ModelFlags,
    builtin: Option<Builtin>,
}

impl fmt::Debug for DissipationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DissipationModel")
            .field("name", &self.name)
            .field("flags", &self.flags)
            .field("builtin", &self.builtin)
            .finish()
    }
}

impl DissipationModel {
    /// The maximal likelihood: `I = max{0, −ω(z′, z″)}`.
    pub fn max_likelihood() -> Self {
        DissipationModel {
            name: "max_likelihood".into(),
            kind: Kind::MaxLikelihood,
            flags: ModelFlags {
                tempered: Some(true),
                separable: false,
                state_dependent: false,
            },
            builtin: Some(Builtin::MaxLikelihood),
        }
    }

    /// `I = χ₀(z″)`: only `η = 0` is admissible.
    pub fn pure_hamiltonian() -> Self {
        let mut m = Self::separable(
            Arc::new(ZeroPotential),
            Duality::symplectic(),
            PolarStrategy::ClosedForm,
        );
        m.name = "pure_hamiltonian".into();
        m.flags.tempered = Some(true);
        m.builtin = Some(Builtin::PureHamiltonian);
        m
    }

    /// Rayleigh damping `φ(q) = (a/2)|q|²` lifted to phase space.
    pub fn rayleigh(a: f64) -> Self {
        let mut m = Self::separable(
            Arc::new(QuadraticLift::new(a)),
            Duality::symplectic(),
            PolarStrategy::ClosedForm,
        );
        m.name = "rayleigh".into();
        m.flags.tempered = Some(true);
        m.builtin = Some(Builtin::Rayleigh { a });
        m
    }

    /// Dry friction `f(z) = μ‖q‖₁`, a rate-independent model.
    pub fn friction(mu: f64) -> Self {
        let mut m = Self::separable(
            Arc::new(AbsLift::new(mu)),
            Duality::symplectic(),
            PolarStrategy::ClosedForm,
        );
        m.name = "friction".into();
        m.flags.tempered = Some(true);
        m.builtin = Some(Builtin::Friction { mu });
        m
    }

    /// The separable model `I = f(z′) + f*ᴿ_d(z″) − d(z′, z″)`.
    ///
    /// With a grid strategy, polar evaluation failures read as `+∞`.
    pub fn separable(
        potential: Arc<dyn ConvexPotential>,
        duality: Duality,
        polar: PolarStrategy,
    ) -> Self {
        DissipationModel {
            name: alloc::format!("separable({})", potential.name()),
            kind: Kind::Separable {
                potential,
                duality,
                polar,
            },
            flags: ModelFlags {
                tempered: None,
                separable: true,
                state_dependent: false,
            },
            builtin: None,
        }
    }

    /// A model given directly by its information content.
    pub fn from_information(
        name: impl Into<String>,
        information: impl Fn(&PhasePoint, &PhasePoint, &PhasePoint) -> ExtReal + Send + Sync + 'static,
    ) -> Self {
        DissipationModel {
            name: name.into(),
            kind: Kind::Information(Arc::new(information)),
            flags: ModelFlags::default(),
            builtin: None,
        }
    }

    /// `I ≡ 0`: every gap is fully likely. A likelihood, but not tempered.
    pub fn always_likely() -> Self {
        Self::from_information("always_likely", |_, _, _| ExtReal::ZERO)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Marks the model as reading its first argument `z`.
    pub fn with_state_dependence(mut self, state_dependent: bool) -> Self {
        self.flags.state_dependent = state_dependent;
        self
    }

    pub(crate) fn set_tempered(&mut self, tempered: Option<bool>) {
        self.flags.tempered = tempered;
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn flags(&self) -> ModelFlags {
        self.flags
    }

    pub fn builtin(&self) -> Option<Builtin> {
        self.builtin
    }

    /// Underlying potential and duality of a separable model.
    pub fn potential(&self) -> Option<(&Arc<dyn ConvexPotential>, &Duality)> {
        match &self.kind {
            Kind::Separable {
                potential, duality, ..
            } => Some((potential, duality)),
            _ => None,
        }
    }

    /// Information content `I(z, z′, z″)`.
    pub fn information(&self, z: &PhasePoint, z1: &PhasePoint, z2: &PhasePoint) -> ExtReal {
        debug_assert_eq!(z1.dim(), z2.dim());
        match &self.kind {
            Kind::MaxLikelihood => ExtReal::Finite((-omega(z1, z2)).max(0.0)),
            Kind::Separable {
                potential,
                duality,
                polar,
            } => {
                let fz = potential.value(z1);
                if !fz.is_finite() {
                    return ExtReal::PosInf;
                }
                let polar = polar_value(potential.as_ref(), duality, z2, polar)
                    .map_or(ExtReal::PosInf, |p| p.value);
                fz + polar - duality.eval(z1, z2)
            }
            Kind::Bipotential {
                bipotential,
                duality,
            } => bipotential(z, z1, z2) - duality.eval(z1, z2),
            Kind::Information(info) => info(z, z1, z2),
        }
    }

    /// `π = exp(−I)`, with `exp(−∞) = 0`.
    pub fn likelihood(&self, z: &PhasePoint, z1: &PhasePoint, z2: &PhasePoint) -> f64 {
        match self.information(z, z1, z2) {
            ExtReal::Finite(i) => math::exp(-i),
            ExtReal::PosInf => 0.0,
        }
    }

    /// `b_d = I + d(z′, z″)`. Changing `d` transports the bipotential while
    /// keeping `b_d − d` fixed.
    pub fn bipotential(
        &self,
        d: &Duality,
        z: &PhasePoint,
        z1: &PhasePoint,
        z2: &PhasePoint,
    ) -> ExtReal {
        self.information(z, z1, z2) + d.eval(z1, z2)
    }

    /// `b_ω^π = I + ω(z′, z″)`.
    pub fn symplectic_bipotential(
        &self,
        z: &PhasePoint,
        z1: &PhasePoint,
        z2: &PhasePoint,
    ) -> ExtReal {
        self.information(z, z1, z2) + omega(z1, z2)
    }

    /// Nearest point of `{z″ : I(·, ·, z″) can be finite}`, when known.
    pub fn project_gap(&self, z2: &PhasePoint) -> Option<PhasePoint> {
        match &self.kind {
            Kind::Separable {
                potential, duality, ..
            } => potential.project_polar_domain(duality, z2),
            Kind::MaxLikelihood => Some(z2.clone()),
            _ => None,
        }
    }

    /// An element `z″` of `∂ᴿ_d f(z′)`, which makes `I(·, z′, z″) = 0`.
    pub fn gap_selector(&self, z1: &PhasePoint) -> Option<PhasePoint> {
        match &self.kind {
            Kind::Separable {
                potential, duality, ..
            } => potential.right_subgradient(duality, z1),
            _ => None,
        }
    }
}

/// Builds a model from a bipotential `b` relative to `d`, with `I = b − d`.
///
/// `b ≥ d` is verified on `cfg.samples` sampled triples; a violation is an
/// error. The tempered flag is set from a sampled temperedness check.
pub fn model_from_bipotential<R: Rng + ?Sized>(
    name: impl Into<String>,
    bipotential: impl Fn(&PhasePoint, &PhasePoint, &PhasePoint) -> ExtReal + Send + Sync + 'static,
    d: Duality,
    cfg: &SampleConfig,
    rng: &mut R,
) -> Result<DissipationModel> {
    let mut model = DissipationModel {
        name: name.into(),
        kind: Kind::Bipotential {
            bipotential: Arc::new(bipotential),
            duality: d.clone(),
        },
        flags: ModelFlags::default(),
        builtin: None,
    };
    let Kind::Bipotential { bipotential, .. } = &model.kind else {
        unreachable!()
    };
    for _ in 0..cfg.samples {
        let (z, z1, z2) = sampling::sample_triple(rng, &[&model], cfg);
        let b = bipotential(&z, &z1, &z2);
        let dv = d.eval(&z1, &z2);
        if b < dv - 1e-12 * (1.0 + dv.abs()) {
            return Err(Error::BelowDuality(alloc::boxed::Box::new(Witness {
                z,
                z1,
                z2,
                lhs: b.to_f64(),
                rhs: dv,
            })));
        }
    }
    let report = temperedness_check(&model, cfg, rng);
    model.set_tempered(Some(report.tempered));
    Ok(model)
}
