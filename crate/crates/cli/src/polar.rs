//! Tabulation of right polars by the grid oracle, for the `polar` subcommand.

use std::io::Write;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use hamgap_core::convex_kernel::{
    right_polar, AbsLift, ConvexPotential, GridSpec, QuadraticLift, ZeroIndicator, ZeroPotential,
};
use hamgap_core::{Duality, ExtReal};

use crate::output::fmt_f64;

pub const POTENTIALS: [&str; 4] = ["zero_indicator", "zero", "quadratic[:a]", "abs[:mu]"];

/// `NAME` or `NAME:PARAM`.
pub fn parse_potential(spec: &str) -> Result<Arc<dyn ConvexPotential>> {
    let (name, param) = match spec.split_once(':') {
        Some((n, p)) => {
            let v: f64 = p
                .parse()
                .with_context(|| format!("potential parameter `{p}` is not a number"))?;
            (n, Some(v))
        }
        None => (spec, None),
    };
    Ok(match (name, param) {
        ("zero_indicator", None) => Arc::new(ZeroIndicator),
        ("zero", None) => Arc::new(ZeroPotential),
        ("quadratic", a) => {
            let a = a.unwrap_or(0.5);
            if !(a > 0.0 && a.is_finite()) {
                bail!("quadratic needs a > 0");
            }
            Arc::new(QuadraticLift::new(a))
        }
        ("abs", mu) => {
            let mu = mu.unwrap_or(0.3);
            if !(mu >= 0.0 && mu.is_finite()) {
                bail!("abs needs mu >= 0");
            }
            Arc::new(AbsLift::new(mu))
        }
        _ => bail!(
            "unknown potential `{spec}`; expected one of {}",
            POTENTIALS.join(", ")
        ),
    })
}

/// `RADIUS:COUNT`, the cube `[−R, R]^{2n}` with `COUNT` points per axis.
pub fn parse_cube(spec: &str, n: usize) -> Result<GridSpec> {
    let (r, c) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("grid spec `{spec}` must look like RADIUS:COUNT"))?;
    let radius: f64 = r.parse().with_context(|| format!("grid radius `{r}`"))?;
    let count: usize = c.parse().with_context(|| format!("grid count `{c}`"))?;
    Ok(GridSpec::cube(n, radius, count)?)
}

pub fn header(n: usize) -> Vec<String> {
    let mut cols: Vec<String> = (1..=n).map(|i| format!("q{i}")).collect();
    cols.extend((1..=n).map(|i| format!("p{i}")));
    cols.extend(["polar", "grid_sup", "resolution_bound", "closed_form"].map(String::from));
    cols
}

/// Writes `f*ᴿ_ω` at every point of `at`, each estimated over `grid`.
pub fn tabulate<W: Write>(
    out: W,
    f: &dyn ConvexPotential,
    grid: &GridSpec,
    at: &GridSpec,
) -> Result<usize> {
    let d = Duality::symplectic();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(grid.dim()))?;
    let mut rows = 0;
    let mut failure: Option<anyhow::Error> = None;
    at.for_each_point(|_, z2| {
        if failure.is_some() {
            return;
        }
        let est = match right_polar(f, &d, z2, grid) {
            Ok(est) => est,
            Err(e) => {
                failure = Some(e.into());
                return;
            }
        };
        let mut row: Vec<String> = z2.coords().map(fmt_f64).collect();
        row.push(match est.value {
            ExtReal::Finite(v) => fmt_f64(v),
            ExtReal::PosInf => "UNBOUNDED".into(),
        });
        row.push(fmt_f64(est.grid_sup));
        row.push(fmt_f64(est.resolution_bound));
        row.push(match f.closed_right_polar(&d, z2) {
            Some(ExtReal::Finite(v)) => fmt_f64(v),
            Some(ExtReal::PosInf) => "inf".into(),
            None => String::new(),
        });
        if let Err(e) = w.write_record(&row) {
            failure = Some(e.into());
            return;
        }
        rows += 1;
    });
    if let Some(e) = failure {
        return Err(e);
    }
    w.flush()?;
    Ok(rows)
}
