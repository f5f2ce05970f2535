use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::phase_space::PhasePoint;

/// Default cap on the number of points in one grid sweep.
pub const DEFAULT_GRID_BUDGET: u64 = 10_000_000;

/// Default ratio above which a doubled-radius sweep is read as unbounded.
pub const DEFAULT_GROWTH_FACTOR: f64 = 1.5;

/// One axis of a regular grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, count: usize) -> Self {
        Axis { lo, hi, count }
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.lo + (self.hi - self.lo) * (i as f64 / (self.count - 1) as f64)
    }

    fn doubled(&self) -> Axis {
        let center = 0.5 * (self.lo + self.hi);
        let half = self.hi - self.lo;
        Axis::new(center - half, center + half, self.count)
    }
}

/// A regular grid over a box in `ℝ²ⁿ`: the first `n` axes are positions,
/// the last `n` momenta.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    axes: Vec<Axis>,
    budget: u64,
    growth_factor: f64,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        Self::with_budget(axes, DEFAULT_GRID_BUDGET)
    }

    pub fn with_budget(axes: Vec<Axis>, budget: u64) -> Result<Self> {
        if axes.is_empty() || !axes.len().is_multiple_of(2) {
            return Err(Error::InvalidGrid("need 2n axes with n ≥ 1"));
        }
        for axis in &axes {
            if !axis.lo.is_finite() || !axis.hi.is_finite() {
                return Err(Error::InvalidGrid("bounds must be finite"));
            }
            if axis.lo >= axis.hi {
                return Err(Error::InvalidGrid("lower bound must be below upper bound"));
            }
            if axis.count < 2 {
                return Err(Error::InvalidGrid("each axis needs at least 2 points"));
            }
        }
        let grid = GridSpec {
            axes,
            budget,
            growth_factor: DEFAULT_GROWTH_FACTOR,
        };
        let points = grid.point_count();
        if points > budget {
            return Err(Error::GridBudget { points, budget });
        }
        Ok(grid)
    }

    /// The cube `[−radius, radius]^{2n}` with `count` points per axis.
    pub fn cube(n: usize, radius: f64, count: usize) -> Result<Self> {
        Self::new(alloc::vec![Axis::new(-radius, radius, count); 2 * n])
    }

    pub fn with_growth_factor(mut self, factor: f64) -> Self {
        self.growth_factor = factor;
        self
    }

    pub fn growth_factor(&self) -> f64 {
        self.growth_factor
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    /// Degrees of freedom `n` of the points on this grid.
    pub fn dim(&self) -> usize {
        self.axes.len() / 2
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn point_count(&self) -> u64 {
        self.axes
            .iter()
            .fold(1u64, |acc, a| acc.saturating_mul(a.count as u64))
    }

    pub fn max_spacing(&self) -> f64 {
        self.axes.iter().fold(0.0, |m, a| m.max(a.spacing()))
    }

    /// Same point counts, twice the extent about the same center.
    pub fn doubled(&self) -> GridSpec {
        GridSpec {
            axes: self.axes.iter().map(Axis::doubled).collect(),
            budget: self.budget,
            growth_factor: self.growth_factor,
        }
    }

    /// Visits every grid point in lexicographic order.
    pub fn for_each_point(&self, mut visit: impl FnMut(&[usize], &PhasePoint)) {
        let n = self.dim();
        let dims = self.axes.len();
        let mut index = alloc::vec![0usize; dims];
        let mut point = PhasePoint::zeros(n);
        for (k, axis) in self.axes.iter().enumerate() {
            *point.coord_mut(k) = axis.coord(0);
        }
        loop {
            visit(&index, &point);
            // odometer increment
            let mut k = dims;
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                index[k] += 1;
                if index[k] < self.axes[k].count {
                    *point.coord_mut(k) = self.axes[k].coord(index[k]);
                    break;
                }
                index[k] = 0;
                *point.coord_mut(k) = self.axes[k].coord(0);
            }
        }
    }

    pub fn point_at(&self, index: &[usize]) -> PhasePoint {
        let mut point = PhasePoint::zeros(self.dim());
        for (k, (axis, &i)) in self.axes.iter().zip(index).enumerate() {
            *point.coord_mut(k) = axis.coord(i);
        }
        point
    }
}

/// Result of a sweep maximizing an objective over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMax {
    pub sup: f64,
    pub argmax: PhasePoint,
    /// Largest finite-difference slope from the maximizer to its axis neighbours.
    pub local_lipschitz: f64,
}

/// Maximizes `objective` over the grid, skipping points where it is `None`
/// (outside the effective domain).
pub fn grid_max(
    grid: &GridSpec,
    objective: impl Fn(&PhasePoint) -> Option<f64>,
) -> Result<GridMax> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    grid.for_each_point(|index, z| {
        if let Some(value) = objective(z) {
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                best = Some((value, index.to_vec()));
            }
        }
    });
    let (sup, index) = best.ok_or(Error::EmptyDomainOnGrid)?;
    let argmax = grid.point_at(&index);

    let mut local_lipschitz: f64 = 0.0;
    for (k, axis) in grid.axes().iter().enumerate() {
        let h = axis.spacing();
        for step in [-1isize, 1] {
            let j = index[k] as isize + step;
            if j < 0 || j as usize >= axis.count {
                continue;
            }
            let mut neighbour = argmax.clone();
            *neighbour.coord_mut(k) = axis.coord(j as usize);
            if let Some(value) = objective(&neighbour) {
                local_lipschitz = local_lipschitz.max((sup - value).abs() / h);
            }
        }
    }
    Ok(GridMax {
        sup,
        argmax,
        local_lipschitz,
    })
}

/// A-priori bound on how far a grid maximum can sit below the box supremum:
/// max-norm spacing times the local Lipschitz estimate, widened by `√(2n)`.
pub fn resolution_bound(grid: &GridSpec, local_lipschitz: f64) -> f64 {
    let dims = grid.axes().len() as f64;
    local_lipschitz * grid.max_spacing() * math::sqrt(dims) + 1e-12
}
