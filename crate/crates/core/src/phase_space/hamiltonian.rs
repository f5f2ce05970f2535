use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::PhasePoint;
use crate::error::{Error, Result};
use crate::math;

/// An energy function `H(q, p, t)` with its partial derivatives.
///
/// `dq` is `∂H/∂q` (a momentum-like vector), `dp` is `∂H/∂p` (a
/// position-like vector).
pub trait Hamiltonian: Send + Sync {
    fn name(&self) -> &str;
    fn value(&self, z: &PhasePoint, t: f64) -> f64;
    fn dq(&self, z: &PhasePoint, t: f64) -> Vec<f64>;
    fn dp(&self, z: &PhasePoint, t: f64) -> Vec<f64>;
    fn dt(&self, z: &PhasePoint, t: f64) -> f64;
}

/// `H = |p|²/2m + k|q|²/2 + β Σ qᵢ⁴/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    pub mass: f64,
    pub stiffness: f64,
    pub quartic: f64,
}

impl Oscillator {
    /// `H = (|q|² + |p|²)/2`.
    pub fn unit() -> Self {
        Oscillator::harmonic(1.0, 1.0)
    }

    pub fn harmonic(mass: f64, stiffness: f64) -> Self {
        Oscillator {
            mass,
            stiffness,
            quartic: 0.0,
        }
    }

    /// Gradient of the potential part, `∂V/∂q`.
    pub fn force_gradient(&self, q: &[f64]) -> Vec<f64> {
        q.iter()
            .map(|x| self.stiffness * x + self.quartic * x * x * x)
            .collect()
    }
}

impl Hamiltonian for Oscillator {
    fn name(&self) -> &str {
        if self.quartic == 0.0 {
            "harmonic oscillator"
        } else {
            "anharmonic oscillator"
        }
    }

    fn value(&self, z: &PhasePoint, _t: f64) -> f64 {
        let kinetic = math::norm2_sq(z.p()) / (2.0 * self.mass);
        let potential: f64 = z
            .q()
            .iter()
            .map(|x| 0.5 * self.stiffness * x * x + 0.25 * self.quartic * x * x * x * x)
            .sum();
        kinetic + potential
    }

    fn dq(&self, z: &PhasePoint, _t: f64) -> Vec<f64> {
        self.force_gradient(z.q())
    }

    fn dp(&self, z: &PhasePoint, _t: f64) -> Vec<f64> {
        z.p().iter().map(|x| x / self.mass).collect()
    }

    fn dt(&self, _z: &PhasePoint, _t: f64) -> f64 {
        0.0
    }
}

/// `H = Σ pᵢ`: uniform drift of every position.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreeDrift;

impl Hamiltonian for FreeDrift {
    fn name(&self) -> &str {
        "free drift"
    }

    fn value(&self, z: &PhasePoint, _t: f64) -> f64 {
        z.p().iter().sum()
    }

    fn dq(&self, z: &PhasePoint, _t: f64) -> Vec<f64> {
        vec![0.0; z.dim()]
    }

    fn dp(&self, z: &PhasePoint, _t: f64) -> Vec<f64> {
        vec![1.0; z.dim()]
    }

    fn dt(&self, _z: &PhasePoint, _t: f64) -> f64 {
        0.0
    }
}

type ScalarFn = dyn Fn(&PhasePoint, f64) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&PhasePoint, f64) -> Vec<f64> + Send + Sync;

/// A Hamiltonian assembled from closures for the value and each derivative.
pub struct AnalyticHamiltonian {
    name: String,
    value: Box<ScalarFn>,
    dq: Box<VectorFn>,
    dp: Box<VectorFn>,
    dt: Box<ScalarFn>,
}

impl AnalyticHamiltonian {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(&PhasePoint, f64) -> f64 + Send + Sync + 'static,
        dq: impl Fn(&PhasePoint, f64) -> Vec<f64> + Send + Sync + 'static,
        dp: impl Fn(&PhasePoint, f64) -> Vec<f64> + Send + Sync + 'static,
        dt: impl Fn(&PhasePoint, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        AnalyticHamiltonian {
            name: name.into(),
            value: Box::new(value),
            dq: Box::new(dq),
            dp: Box::new(dp),
            dt: Box::new(dt),
        }
    }
}

impl Hamiltonian for AnalyticHamiltonian {
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, z: &PhasePoint, t: f64) -> f64 {
        (self.value)(z, t)
    }
    fn dq(&self, z: &PhasePoint, t: f64) -> Vec<f64> {
        (self.dq)(z, t)
    }
    fn dp(&self, z: &PhasePoint, t: f64) -> Vec<f64> {
        (self.dp)(z, t)
    }
    fn dt(&self, z: &PhasePoint, t: f64) -> f64 {
        (self.dt)(z, t)
    }
}

/// Wraps a value-only energy and differentiates it by central differences.
pub struct FiniteDifference<F> {
    name: String,
    value: F,
}

impl<F> FiniteDifference<F>
where
    F: Fn(&PhasePoint, f64) -> f64 + Send + Sync,
{
    pub fn new(name: impl Into<String>, value: F) -> Self {
        FiniteDifference {
            name: name.into(),
            value,
        }
    }

    fn step(x: f64) -> f64 {
        // cube root of machine epsilon, the usual central-difference choice
        6.055_454_452_393_343e-6 * x.abs().max(1.0)
    }

    fn partial(&self, z: &PhasePoint, t: f64, coord: usize) -> f64 {
        let mut zz = z.clone();
        let x = *zz.coord_mut(coord);
        let h = Self::step(x);
        *zz.coord_mut(coord) = x + h;
        let up = (self.value)(&zz, t);
        *zz.coord_mut(coord) = x - h;
        let down = (self.value)(&zz, t);
        (up - down) / (2.0 * h)
    }
}

impl<F> Hamiltonian for FiniteDifference<F>
where
    F: Fn(&PhasePoint, f64) -> f64 + Send + Sync,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn value(&self, z: &PhasePoint, t: f64) -> f64 {
        (self.value)(z, t)
    }

    fn dq(&self, z: &PhasePoint, t: f64) -> Vec<f64> {
        (0..z.dim()).map(|i| self.partial(z, t, i)).collect()
    }

    fn dp(&self, z: &PhasePoint, t: f64) -> Vec<f64> {
        let n = z.dim();
        (0..n).map(|i| self.partial(z, t, n + i)).collect()
    }

    fn dt(&self, z: &PhasePoint, t: f64) -> f64 {
        let h = Self::step(t);
        ((self.value)(z, t + h) - (self.value)(z, t - h)) / (2.0 * h)
    }
}

/// `XH(z, t) = (∂H/∂p, −∂H/∂q)`.
pub fn symplectic_gradient<H: Hamiltonian + ?Sized>(
    h: &H,
    z: &PhasePoint,
    t: f64,
) -> Result<PhasePoint> {
    let xh = xh_unchecked(h, z, t);
    if xh.dim() != z.dim() {
        return Err(Error::DimensionMismatch {
            expected: z.dim(),
            found: xh.dim(),
        });
    }
    if !xh.is_finite() {
        return Err(Error::NonFinite("symplectic gradient"));
    }
    Ok(xh)
}

pub(crate) fn xh_unchecked<H: Hamiltonian + ?Sized>(h: &H, z: &PhasePoint, t: f64) -> PhasePoint {
    let dp = h.dp(z, t);
    let dq = h.dq(z, t);
    PhasePoint::from_parts(dp, dq.into_iter().map(|x| -x).collect())
}

/// Derivative of `H(·, t)` at `z` along `v`: `⟨v_q, ∂H/∂q⟩ + ⟨∂H/∂p, v_p⟩`.
///
/// With `ω` the symplectic form this equals `ω(v, XH(z, t))`.
pub fn directional_derivative<H: Hamiltonian + ?Sized>(
    h: &H,
    z: &PhasePoint,
    v: &PhasePoint,
    t: f64,
) -> f64 {
    math::dot(v.q(), &h.dq(z, t)) + math::dot(&h.dp(z, t), v.p())
}

/// `d/dt H − ∂H/∂t` along a velocity `ż` at `z`:
/// `⟨∂H/∂p, ṗ⟩ + ⟨q̇, ∂H/∂q⟩`. Vanishes when `ż = XH(z, t)`.
pub fn conservation_defect<H: Hamiltonian + ?Sized>(
    h: &H,
    z: &PhasePoint,
    zdot: &PhasePoint,
    t: f64,
) -> Result<f64> {
    z.check_same_dim(zdot)?;
    let value = directional_derivative(h, z, zdot, t);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite("conservation defect"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::omega;
    use core::f64::consts::FRAC_PI_2;
    use proptest::prelude::*;

    fn pt(q: f64, p: f64) -> PhasePoint {
        PhasePoint::scalar(q, p).unwrap()
    }

    fn driven() -> AnalyticHamiltonian {
        AnalyticHamiltonian::new(
            "q sin t",
            |z, t| z.q()[0] * math::sin(t),
            |_, t| vec![math::sin(t)],
            |_, _| vec![0.0],
            |z, t| z.q()[0] * math::cos(t),
        )
    }

    #[test]
    fn gradient_examples() {
        let xh = symplectic_gradient(&Oscillator::unit(), &pt(1.0, 0.0), 0.0).unwrap();
        assert_eq!(xh, pt(0.0, -1.0));

        let xh = symplectic_gradient(&FreeDrift, &pt(-4.0, 9.0), 3.0).unwrap();
        assert_eq!(xh, pt(1.0, 0.0));

        let xh = symplectic_gradient(&driven(), &pt(2.0, 3.0), FRAC_PI_2).unwrap();
        assert_eq!(xh, pt(0.0, -1.0));
    }

    #[test]
    fn gradient_rejects_non_finite_derivatives() {
        let bad = AnalyticHamiltonian::new(
            "bad",
            |_, _| 0.0,
            |_, _| vec![f64::NAN],
            |_, _| vec![0.0],
            |_, _| 0.0,
        );
        assert_eq!(
            symplectic_gradient(&bad, &pt(0.0, 0.0), 0.0),
            Err(Error::NonFinite("symplectic gradient"))
        );
    }

    #[test]
    fn conservation_defect_examples() {
        let h = Oscillator::unit();
        let z = pt(1.0, 2.0);
        let xh = symplectic_gradient(&h, &z, 0.0).unwrap();
        assert_eq!(conservation_defect(&h, &z, &xh, 0.0).unwrap(), 0.0);

        // Rayleigh-type velocity: dH/dt = q q̇ + p ṗ = −a p²
        let a = 0.5;
        let z = pt(0.0, 1.0);
        let zdot = pt(1.0, -a);
        let defect = conservation_defect(&h, &z, &zdot, 0.0).unwrap();
        assert_eq!(defect, -0.5);
        // finite differences of H along the line z + s·ż
        let eps = 1e-6;
        let fd =
            (h.value(&z.axpy(eps, &zdot), 0.0) - h.value(&z.axpy(-eps, &zdot), 0.0)) / (2.0 * eps);
        assert!((fd - defect).abs() < 1e-9);

        assert_eq!(
            conservation_defect(&h, &pt(3.0, 1.0), &pt(0.0, 0.0), 0.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn finite_difference_wrapper_matches_analytic_derivatives() {
        let fd = FiniteDifference::new("fd oscillator", |z: &PhasePoint, t: f64| {
            0.5 * (z.q()[0] * z.q()[0] + z.p()[0] * z.p()[0]) * (1.0 + 0.1 * math::sin(t))
        });
        let z = pt(0.3, -1.2);
        let t = 0.7;
        let s = 1.0 + 0.1 * math::sin(t);
        assert!((fd.dq(&z, t)[0] - 0.3 * s).abs() < 1e-8);
        assert!((fd.dp(&z, t)[0] + 1.2 * s).abs() < 1e-8);
        let dt_exact = 0.5 * (0.09 + 1.44) * 0.1 * math::cos(t);
        assert!((fd.dt(&z, t) - dt_exact).abs() < 1e-8);
    }

    fn relative_gap(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1.0)
    }

    proptest! {
        #[test]
        fn derivatives_agree_with_central_differences(
            q in -2.0..2.0f64, p in -2.0..2.0f64, t in 0.0..6.0f64,
            vq in -1.0..1.0f64, vp in -1.0..1.0f64,
        ) {
            let z = pt(q, p);
            let v = pt(vq, vp);
            let eps = 1e-6;
            let anharmonic = Oscillator { mass: 2.0, stiffness: 0.7, quartic: 0.3 };
            let hams: [&dyn Hamiltonian; 4] = [&Oscillator::unit(), &anharmonic, &FreeDrift, &driven()];
            for h in hams {
                let xh = symplectic_gradient(h, &z, t).unwrap();
                let fd = (h.value(&z.axpy(eps, &v), t) - h.value(&z.axpy(-eps, &v), t)) / (2.0 * eps);
                // ω(v, XH) is the derivative of H along v
                prop_assert!(relative_gap(omega(&v, &xh), fd) <= 1e-5);
                let fdt = (h.value(&z, t + eps) - h.value(&z, t - eps)) / (2.0 * eps);
                prop_assert!(relative_gap(h.dt(&z, t), fdt) <= 1e-5);
            }
        }

        #[test]
        fn quadratic_flow_is_conservative(q in -5.0..5.0f64, p in -5.0..5.0f64) {
            let h = Oscillator::harmonic(1.3, 0.4);
            let z = pt(q, p);
            let xh = symplectic_gradient(&h, &z, 0.0).unwrap();
            prop_assert!(conservation_defect(&h, &z, &xh, 0.0).unwrap().abs() <= 1e-10);
        }
    }
}
