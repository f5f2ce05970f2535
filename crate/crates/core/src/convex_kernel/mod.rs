//! Convex analysis relative to a duality on phase space.
//!
//! For a duality `d` and a convex lsc `f`:
//!
//! * right polar `f*ᴿ_d(z″) = sup_{z′} d(z′, z″) − f(z′)`,
//! * left polar  `f*ᴸ_d(z″) = sup_{z′} d(z″, z′) − f(z′)`,
//! * Fenchel gap `f(z′) + f*ᴿ_d(z″) − d(z′, z″) ≥ 0`, zero exactly when
//!   `z″ ∈ ∂ᴿ_d f(z′)`.
//!
//! Polars are available in closed form for the built-in potentials and as a
//! brute-force supremum over a [`GridSpec`] for anything else. The grid
//! oracle flags a polar as unbounded when doubling the grid radius grows the
//! running supremum by more than the grid's growth factor. That test is a
//! heuristic.

mod grid;
mod potentials;

use alloc::sync::Arc;

pub use grid::{
    grid_max, resolution_bound, Axis, GridMax, GridSpec, DEFAULT_GRID_BUDGET, DEFAULT_GROWTH_FACTOR,
};
pub use potentials::{
    AbsLift, ConvexPotential, FnPotential, PotentialFlags, QuadraticLift, ZeroIndicator,
    ZeroPotential, FEASIBILITY_SLACK,
};

use crate::error::{Error, Result};
use crate::ext_real::ExtReal;
use crate::likelihood::DissipationModel;
use crate::phase_space::{omega, Duality, PhasePoint};

/// Tolerance applied to identities evaluated through closed forms.
pub const CLOSED_FORM_TOL: f64 = 1e-10;

/// A polar value estimated by the grid oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarEstimate {
    /// `+∞` when flagged unbounded, the grid supremum otherwise.
    pub value: ExtReal,
    /// Supremum over the grid points, regardless of the unboundedness flag.
    pub grid_sup: f64,
    /// Supremum over the doubled-radius grid.
    pub doubled_sup: f64,
    pub argmax: PhasePoint,
    pub unbounded: bool,
    /// How far `grid_sup` may sit below the supremum over the grid's box.
    pub resolution_bound: f64,
}

fn check_grid_dim(grid: &GridSpec, z: &PhasePoint) -> Result<()> {
    if grid.dim() == z.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: grid.dim(),
            found: z.dim(),
        })
    }
}

/// Right polar `f*ᴿ_d(z2)` by brute force over `grid`.
pub fn right_polar(
    f: &dyn ConvexPotential,
    d: &Duality,
    z2: &PhasePoint,
    grid: &GridSpec,
) -> Result<PolarEstimate> {
    check_grid_dim(grid, z2)?;
    let objective = |z: &PhasePoint| f.value(z).finite().map(|fz| d.eval(z, z2) - fz);
    let base = grid_max(grid, objective)?;
    let wide = grid_max(&grid.doubled(), objective)?;
    let bound = resolution_bound(grid, base.local_lipschitz);

    let floor = 2.0 * bound + 1e-9;
    let growth = wide.sup - base.sup;
    let unbounded = growth > (grid.growth_factor() - 1.0) * base.sup.abs().max(floor);
    Ok(PolarEstimate {
        value: if unbounded {
            ExtReal::PosInf
        } else {
            ExtReal::Finite(base.sup)
        },
        grid_sup: base.sup,
        doubled_sup: wide.sup,
        argmax: base.argmax,
        unbounded,
        resolution_bound: bound,
    })
}

/// Left polar `f*ᴸ_d(z1)`, the right polar for the transposed duality.
pub fn left_polar(
    f: &dyn ConvexPotential,
    d: &Duality,
    z1: &PhasePoint,
    grid: &GridSpec,
) -> Result<PolarEstimate> {
    right_polar(f, &d.transposed(), z1, grid)
}

/// How polars are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum PolarStrategy {
    /// Closed form only; fails for potentials without one.
    ClosedForm,
    /// Grid oracle only.
    Grid(GridSpec),
    /// Closed form when available, grid oracle otherwise.
    Auto(GridSpec),
}

/// A polar value together with the tolerance identities built on it carry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarValue {
    pub value: ExtReal,
    pub tolerance: f64,
}

pub fn polar_value(
    f: &dyn ConvexPotential,
    d: &Duality,
    z2: &PhasePoint,
    strategy: &PolarStrategy,
) -> Result<PolarValue> {
    let closed = || {
        f.closed_right_polar(d, z2).map(|value| PolarValue {
            value,
            tolerance: CLOSED_FORM_TOL,
        })
    };
    let by_grid = |grid: &GridSpec| {
        right_polar(f, d, z2, grid).map(|est| PolarValue {
            value: est.value,
            tolerance: est.resolution_bound,
        })
    };
    match strategy {
        PolarStrategy::ClosedForm => closed().ok_or_else(|| Error::NoClosedForm(f.name().into())),
        PolarStrategy::Grid(grid) => by_grid(grid),
        PolarStrategy::Auto(grid) => match closed() {
            Some(value) => Ok(value),
            None => by_grid(grid),
        },
    }
}

/// `f(z1) + f*ᴿ_d(z2) − d(z1, z2)` with the tolerance of the polar route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FenchelGap {
    pub value: ExtReal,
    pub tolerance: f64,
}

pub fn fenchel_gap(
    f: &dyn ConvexPotential,
    d: &Duality,
    z1: &PhasePoint,
    z2: &PhasePoint,
    strategy: &PolarStrategy,
) -> Result<FenchelGap> {
    z1.check_same_dim(z2)?;
    let polar = polar_value(f, d, z2, strategy)?;
    Ok(FenchelGap {
        value: f.value(z1) + polar.value - d.eval(z1, z2),
        tolerance: polar.tolerance,
    })
}

/// Whether `z2 ∈ ∂ᴿ_d f(z1)`, read off the Fenchel equality.
pub fn in_right_subgradient(
    f: &dyn ConvexPotential,
    d: &Duality,
    z1: &PhasePoint,
    z2: &PhasePoint,
    strategy: &PolarStrategy,
    tol: f64,
) -> Result<bool> {
    Ok(fenchel_gap(f, d, z1, z2, strategy)?.value <= tol)
}

/// The dissipation model of the separable bipotential `f(z′) + f*ᴿ_d(z″)`,
/// with closed-form polars.
pub fn separable_bipotential(f: Arc<dyn ConvexPotential>, d: Duality) -> DissipationModel {
    DissipationModel::separable(f, d, PolarStrategy::ClosedForm)
}

/// As [`separable_bipotential`] with an explicit polar strategy.
pub fn separable_bipotential_with(
    f: Arc<dyn ConvexPotential>,
    d: Duality,
    strategy: PolarStrategy,
) -> DissipationModel {
    DissipationModel::separable(f, d, strategy)
}

/// The set `C = {z″ : ω(z, z″) ≤ f(z) ∀z}` of a one-homogeneous potential.
#[derive(Clone)]
pub struct SupportSet {
    potential: Arc<dyn ConvexPotential>,
    grid: GridSpec,
}

impl core::fmt::Debug for SupportSet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SupportSet")
            .field("potential", &self.potential.name())
            .field("grid", &self.grid)
            .finish()
    }
}

/// Builds the support set of `f`. The grid is the scan domain used when `f`
/// has no analytic description.
pub fn support_set(f: Arc<dyn ConvexPotential>, grid: GridSpec) -> Result<SupportSet> {
    if !f.flags().one_homogeneous {
        return Err(Error::NotHomogeneous(f.name().into()));
    }
    Ok(SupportSet { potential: f, grid })
}

impl SupportSet {
    pub fn has_analytic_description(&self) -> bool {
        let probe = PhasePoint::zeros(self.grid.dim());
        self.potential.support_membership(&probe).is_some()
    }

    pub fn contains(&self, z2: &PhasePoint) -> Result<bool> {
        if let Some(inside) = self.potential.support_membership(z2) {
            return Ok(inside);
        }
        self.contains_by_scan(z2)
    }

    /// Membership decided by scanning `ω(z, z″) ≤ f(z)` over the grid only.
    pub fn contains_by_scan(&self, z2: &PhasePoint) -> Result<bool> {
        check_grid_dim(&self.grid, z2)?;
        let mut inside = true;
        self.grid.for_each_point(|_, z| {
            if !inside {
                return;
            }
            if let ExtReal::Finite(fz) = self.potential.value(z) {
                if omega(z, z2) > fz + FEASIBILITY_SLACK * (1.0 + fz.abs()) {
                    inside = false;
                }
            }
        });
        Ok(inside)
    }

    /// Nearest member, when the potential knows how to project.
    pub fn project(&self, z2: &PhasePoint) -> Option<PhasePoint> {
        self.potential
            .project_polar_domain(&Duality::symplectic(), z2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::symplectic_form;
    use alloc::vec;

    fn pt(q: f64, p: f64) -> PhasePoint {
        PhasePoint::scalar(q, p).unwrap()
    }

    fn omega_d() -> Duality {
        Duality::symplectic()
    }

    #[test]
    fn polar_of_zero_indicator_is_zero() {
        let grid = GridSpec::cube(1, 2.0, 21).unwrap();
        for z2 in [pt(0.0, 0.0), pt(1.5, -0.3), pt(-4.0, 9.0)] {
            let est = right_polar(&ZeroIndicator, &omega_d(), &z2, &grid).unwrap();
            assert_eq!(est.value, ExtReal::ZERO);
            assert!(!est.unbounded);
            let est = left_polar(&ZeroIndicator, &omega_d(), &z2, &grid).unwrap();
            assert_eq!(est.value, ExtReal::ZERO);
        }
    }

    #[test]
    fn quadratic_polar_by_grid() {
        // φ*(−p″) = |p″|²/2a = 16/4
        let f = QuadraticLift::new(2.0);
        let z2 = pt(0.0, -4.0);
        let grid = GridSpec::cube(1, 4.0, 401).unwrap();
        let est = right_polar(&f, &omega_d(), &z2, &grid).unwrap();
        assert!(!est.unbounded);
        assert!((est.grid_sup - 4.0).abs() <= est.resolution_bound);
        assert_eq!(
            f.closed_right_polar(&omega_d(), &z2),
            Some(ExtReal::Finite(4.0))
        );
    }

    #[test]
    fn abs_polar_grows_with_grid_radius() {
        let f = AbsLift::new(1.0);
        let z2 = pt(0.5, 0.0);
        let small = GridSpec::cube(1, 2.0, 41).unwrap();
        let large = GridSpec::cube(1, 8.0, 41).unwrap();
        let a = right_polar(&f, &omega_d(), &z2, &small).unwrap();
        let b = right_polar(&f, &omega_d(), &z2, &large).unwrap();
        assert!(a.unbounded && b.unbounded);
        assert_eq!(a.value, ExtReal::PosInf);
        assert!(b.grid_sup > a.grid_sup);
        assert!(a.doubled_sup > 1.5 * a.grid_sup);
        assert_eq!(f.closed_right_polar(&omega_d(), &z2), Some(ExtReal::PosInf));
    }

    #[test]
    fn left_polar_is_right_polar_of_transpose() {
        let f = QuadraticLift::new(1.0);
        let grid = GridSpec::cube(1, 5.0, 101).unwrap();
        let d = omega_d();
        for z in [pt(0.0, 4.0), pt(0.0, -1.0), pt(0.3, 0.7)] {
            let left = left_polar(&f, &d, &z, &grid).unwrap();
            let right = right_polar(&f, &d.transposed(), &z, &grid).unwrap();
            assert_eq!(left, right);
        }
    }

    #[test]
    fn left_polar_of_quadratic_lift() {
        let f = QuadraticLift::new(2.0);
        let grid = GridSpec::cube(1, 4.0, 401).unwrap();
        let est = left_polar(&f, &omega_d(), &pt(0.0, 4.0), &grid).unwrap();
        assert!(!est.unbounded);
        assert!((est.grid_sup - 4.0).abs() <= est.resolution_bound);
    }

    #[test]
    fn fenchel_gap_examples() {
        let f = QuadraticLift::new(1.0);
        let grid = GridSpec::cube(1, 3.0, 301).unwrap();
        let z1 = pt(1.0, 0.0);
        let on = pt(0.0, -1.0);
        let off = pt(0.0, 1.0);
        assert_eq!(symplectic_form(&z1, &on).unwrap(), 1.0);

        let closed = fenchel_gap(&f, &omega_d(), &z1, &on, &PolarStrategy::ClosedForm).unwrap();
        assert_eq!(closed.value, ExtReal::ZERO);
        let oracle =
            fenchel_gap(&f, &omega_d(), &z1, &on, &PolarStrategy::Grid(grid.clone())).unwrap();
        assert!(oracle.value.finite().unwrap().abs() <= oracle.tolerance);

        let closed = fenchel_gap(&f, &omega_d(), &z1, &off, &PolarStrategy::ClosedForm).unwrap();
        assert_eq!(closed.value, ExtReal::Finite(2.0));
        let oracle = fenchel_gap(&f, &omega_d(), &z1, &off, &PolarStrategy::Grid(grid)).unwrap();
        assert!((oracle.value.finite().unwrap() - 2.0).abs() <= oracle.tolerance);

        let gap = fenchel_gap(
            &ZeroIndicator,
            &omega_d(),
            &pt(0.0, 0.0),
            &pt(3.0, -2.0),
            &PolarStrategy::ClosedForm,
        )
        .unwrap();
        assert_eq!(gap.value, ExtReal::ZERO);
    }

    #[test]
    fn subgradient_membership_follows_the_gap() {
        let f = QuadraticLift::new(1.0);
        let s = PolarStrategy::ClosedForm;
        let d = omega_d();
        assert!(in_right_subgradient(&f, &d, &pt(1.0, 0.0), &pt(0.0, -1.0), &s, 1e-10).unwrap());
        assert!(!in_right_subgradient(&f, &d, &pt(1.0, 0.0), &pt(0.0, 1.0), &s, 1e-10).unwrap());
        assert!(
            in_right_subgradient(&ZeroIndicator, &d, &pt(0.0, 0.0), &pt(5.0, 1.0), &s, 1e-10)
                .unwrap()
        );
    }

    #[test]
    fn closed_form_strategy_requires_a_closed_form() {
        let f = FnPotential::new("custom", PotentialFlags::default(), |z: &PhasePoint| {
            ExtReal::Finite(z.q()[0] * z.q()[0])
        });
        assert_eq!(
            fenchel_gap(
                &f,
                &omega_d(),
                &pt(0.0, 0.0),
                &pt(0.0, 0.0),
                &PolarStrategy::ClosedForm
            ),
            Err(Error::NoClosedForm("custom".into()))
        );
    }

    #[test]
    fn grid_budget_is_enforced() {
        let tight = GridSpec::with_budget(vec![Axis::new(-1.0, 1.0, 11); 2], 100);
        assert_eq!(
            tight,
            Err(Error::GridBudget {
                points: 121,
                budget: 100
            })
        );
    }

    #[test]
    fn support_set_of_friction() {
        let f: Arc<dyn ConvexPotential> = Arc::new(AbsLift::new(0.3));
        let grid = GridSpec::cube(1, 2.0, 81).unwrap();
        let c = support_set(Arc::clone(&f), grid).unwrap();
        assert!(c.has_analytic_description());
        for (z2, expected) in [
            (pt(0.0, 0.2), true),
            (pt(0.0, 0.4), false),
            (pt(0.0, 0.0), true),
            (pt(0.1, 0.0), false),
        ] {
            assert_eq!(c.contains(&z2).unwrap(), expected);
            assert_eq!(c.contains_by_scan(&z2).unwrap(), expected);
        }
        assert_eq!(c.project(&pt(0.7, -0.9)), Some(pt(0.0, -0.3)));
    }

    #[test]
    fn support_set_needs_homogeneity() {
        let grid = GridSpec::cube(1, 1.0, 5).unwrap();
        assert!(matches!(
            support_set(Arc::new(QuadraticLift::new(1.0)), grid),
            Err(Error::NotHomogeneous(_))
        ));
    }

    #[test]
    fn zero_potential_polar_is_origin_indicator() {
        let d = omega_d();
        assert_eq!(
            ZeroPotential.closed_right_polar(&d, &pt(0.0, 0.0)),
            Some(ExtReal::ZERO)
        );
        assert_eq!(
            ZeroPotential.closed_right_polar(&d, &pt(0.0, 1e-3)),
            Some(ExtReal::PosInf)
        );
        let grid = GridSpec::cube(1, 2.0, 21).unwrap();
        assert!(
            right_polar(&ZeroPotential, &d, &pt(0.0, 0.5), &grid)
                .unwrap()
                .unbounded
        );
        assert!(
            !right_polar(&ZeroPotential, &d, &pt(0.0, 0.0), &grid)
                .unwrap()
                .unbounded
        );
    }
}
