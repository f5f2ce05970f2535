//! Finite-dimensional phase space `Q × P = ℝⁿ × ℝⁿ`.
//!
//! The same [`PhasePoint`] type carries states `z = (q, p)`, tangent vectors
//! `ż = (q̇, ṗ)` and gap vectors `η = (η_q, η_p)`, always in `(q, p)` order.

mod hamiltonian;

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

pub use hamiltonian::{
    conservation_defect, directional_derivative, symplectic_gradient, AnalyticHamiltonian,
    FiniteDifference, FreeDrift, Hamiltonian, Oscillator,
};

use crate::error::{Error, Result};
use crate::math;

/// A point of `ℝⁿ × ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    q: Vec<f64>,
    p: Vec<f64>,
}

impl PhasePoint {
    /// Builds a point, checking `len(q) == len(p) ≥ 1` and finiteness.
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::EmptyDimension);
        }
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                found: p.len(),
            });
        }
        if q.iter().chain(&p).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("phase point"));
        }
        Ok(PhasePoint { q, p })
    }

    /// One-degree-of-freedom shorthand.
    pub fn scalar(q: f64, p: f64) -> Result<Self> {
        Self::new(vec![q], vec![p])
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "phase space dimension must be at least 1");
        PhasePoint {
            q: vec![0.0; n],
            p: vec![0.0; n],
        }
    }

    /// Skips validation; callers guarantee equal lengths.
    pub(crate) fn from_parts(q: Vec<f64>, p: Vec<f64>) -> Self {
        debug_assert_eq!(q.len(), p.len());
        PhasePoint { q, p }
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub(crate) fn p_mut(&mut self) -> &mut [f64] {
        &mut self.p
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>) {
        (self.q, self.p)
    }

    /// Number of degrees of freedom `n`.
    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Coordinates as one `2n` iterator, `q` first.
    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        self.q.iter().chain(&self.p).copied()
    }

    pub(crate) fn coord_mut(&mut self, i: usize) -> &mut f64 {
        let n = self.dim();
        if i < n {
            &mut self.q[i]
        } else {
            &mut self.p[i - n]
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coords().all(f64::is_finite)
    }

    pub fn is_zero(&self) -> bool {
        self.coords().all(|x| x == 0.0)
    }

    pub fn check_same_dim(&self, other: &PhasePoint) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            })
        }
    }

    /// `self + s · other`.
    pub fn axpy(&self, s: f64, other: &PhasePoint) -> PhasePoint {
        debug_assert_eq!(self.dim(), other.dim());
        let q = self
            .q
            .iter()
            .zip(&other.q)
            .map(|(a, b)| a + s * b)
            .collect();
        let p = self
            .p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| a + s * b)
            .collect();
        PhasePoint { q, p }
    }

    pub fn scale(&self, s: f64) -> PhasePoint {
        PhasePoint {
            q: self.q.iter().map(|x| s * x).collect(),
            p: self.p.iter().map(|x| s * x).collect(),
        }
    }

    /// Convex combination `λ·self + (1 − λ)·other`.
    pub fn lerp(&self, other: &PhasePoint, lambda: f64) -> PhasePoint {
        debug_assert_eq!(self.dim(), other.dim());
        let mix = |a: &f64, b: &f64| lambda * a + (1.0 - lambda) * b;
        PhasePoint {
            q: self
                .q
                .iter()
                .zip(&other.q)
                .map(|(a, b)| mix(a, b))
                .collect(),
            p: self
                .p
                .iter()
                .zip(&other.p)
                .map(|(a, b)| mix(a, b))
                .collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        math::sqrt(math::norm2_sq(&self.q) + math::norm2_sq(&self.p))
    }

    pub fn norm_inf(&self) -> f64 {
        math::norm_inf(&self.q).max(math::norm_inf(&self.p))
    }

    /// Max-norm distance.
    pub fn dist_inf(&self, other: &PhasePoint) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords()
            .zip(other.coords())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl fmt::Display for PhasePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(q={:?}, p={:?})", self.q, self.p)
    }
}

impl Add for &PhasePoint {
    type Output = PhasePoint;
    fn add(self, rhs: &PhasePoint) -> PhasePoint {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &PhasePoint {
    type Output = PhasePoint;
    fn sub(self, rhs: &PhasePoint) -> PhasePoint {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<f64> for &PhasePoint {
    type Output = PhasePoint;
    fn mul(self, s: f64) -> PhasePoint {
        self.scale(s)
    }
}

impl Neg for &PhasePoint {
    type Output = PhasePoint;
    fn neg(self) -> PhasePoint {
        self.scale(-1.0)
    }
}

/// The pairing `⟨q, p⟩ = Σ qᵢ pᵢ` between positions and momenta.
pub fn pairing(q: &[f64], p: &[f64]) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: q.len(),
            found: p.len(),
        });
    }
    Ok(math::dot(q, p))
}

/// `ω(z′, z″) = ⟨q″, p′⟩ − ⟨q′, p″⟩`.
pub fn symplectic_form(z1: &PhasePoint, z2: &PhasePoint) -> Result<f64> {
    z1.check_same_dim(z2)?;
    Ok(omega(z1, z2))
}

#[inline]
pub(crate) fn omega(z1: &PhasePoint, z2: &PhasePoint) -> f64 {
    math::dot(&z2.q, &z1.p) - math::dot(&z1.q, &z2.p)
}

/// Symbolic tag of a [`Duality`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualityKind {
    Symplectic,
    Euclidean,
    Custom,
}

type PairingFn = dyn Fn(&PhasePoint, &PhasePoint) -> f64 + Send + Sync;

#[derive(Clone)]
enum Form {
    Symplectic,
    /// `(a, b) ↦ ω(b, a)`.
    SymplecticTransposed,
    Euclidean,
    Custom(Arc<PairingFn>),
}

/// A bilinear pairing of phase space with itself.
#[derive(Clone)]
pub struct Duality {
    form: Form,
}

impl fmt::Debug for Duality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.form {
            Form::Symplectic => "Symplectic",
            Form::SymplecticTransposed => "SymplecticTransposed",
            Form::Euclidean => "Euclidean",
            Form::Custom(_) => "Custom",
        };
        f.debug_tuple("Duality").field(&name).finish()
    }
}

impl Duality {
    /// The symplectic form `ω`.
    pub fn symplectic() -> Self {
        Duality {
            form: Form::Symplectic,
        }
    }

    /// The inner product of `ℝ²ⁿ`: `q′·q″ + p′·p″`.
    pub fn euclidean() -> Self {
        Duality {
            form: Form::Euclidean,
        }
    }

    /// A user-supplied pairing. Bilinearity is the caller's responsibility;
    /// see [`Duality::bilinearity_defect`].
    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(&PhasePoint, &PhasePoint) -> f64 + Send + Sync + 'static,
    {
        Duality {
            form: Form::Custom(Arc::new(f)),
        }
    }

    pub fn kind(&self) -> DualityKind {
        match self.form {
            Form::Symplectic => DualityKind::Symplectic,
            Form::Euclidean => DualityKind::Euclidean,
            Form::SymplecticTransposed | Form::Custom(_) => DualityKind::Custom,
        }
    }

    pub fn is_symplectic(&self) -> bool {
        matches!(self.form, Form::Symplectic)
    }

    /// True for the non-degenerate pairings shipped here (`ω`, `ωᵀ` and the
    /// inner product).
    pub fn is_builtin(&self) -> bool {
        !matches!(self.form, Form::Custom(_))
    }

    /// The slot-swapped pairing `dᵀ(a, b) = d(b, a)`.
    pub fn transposed(&self) -> Duality {
        let form = match &self.form {
            Form::Symplectic => Form::SymplecticTransposed,
            Form::SymplecticTransposed => Form::Symplectic,
            Form::Euclidean => Form::Euclidean,
            Form::Custom(f) => {
                let f = Arc::clone(f);
                Form::Custom(Arc::new(move |a: &PhasePoint, b: &PhasePoint| f(b, a)))
            }
        };
        Duality { form }
    }

    /// Evaluates `d(z1, z2)`, checking dimensions.
    pub fn try_eval(&self, z1: &PhasePoint, z2: &PhasePoint) -> Result<f64> {
        z1.check_same_dim(z2)?;
        Ok(self.eval(z1, z2))
    }

    /// Evaluates `d(z1, z2)`. Dimensions must agree.
    #[inline]
    pub fn eval(&self, z1: &PhasePoint, z2: &PhasePoint) -> f64 {
        debug_assert_eq!(z1.dim(), z2.dim());
        match &self.form {
            Form::Symplectic => omega(z1, z2),
            Form::SymplecticTransposed => omega(z2, z1),
            Form::Euclidean => math::dot(&z1.q, &z2.q) + math::dot(&z1.p, &z2.p),
            Form::Custom(f) => f(z1, z2),
        }
    }

    /// Largest bilinearity defect over the given combination, relative to
    /// the magnitude of the terms involved.
    pub fn bilinearity_defect(
        &self,
        z1: &PhasePoint,
        z2: &PhasePoint,
        z3: &PhasePoint,
        a: f64,
        b: f64,
    ) -> f64 {
        let mix12 = z1.scale(a).axpy(b, z2);
        let left = self.eval(&mix12, z3);
        let left_expected = a * self.eval(z1, z3) + b * self.eval(z2, z3);
        let right = self.eval(z3, &mix12);
        let right_expected = a * self.eval(z3, z1) + b * self.eval(z3, z2);
        let scale =
            1.0 + (a.abs() + b.abs()) * (z1.norm() + z2.norm()).max(1.0) * z3.norm().max(1.0);
        ((left - left_expected).abs()).max((right - right_expected).abs()) / scale
    }
}

impl Default for Duality {
    fn default() -> Self {
        Duality::symplectic()
    }
}
