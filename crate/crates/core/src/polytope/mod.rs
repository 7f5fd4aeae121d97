//! Linear inequality systems over rate variables and the planar regions they
//! project to.

mod region;
mod system;

pub use region::{hull_union, HalfPlane, Region2D, RegionDoc};
pub use system::{Constraint, LinearSystem, FEAS_TOL, SNAP};

use crate::error::{Error, Result};

/// Box used when the caller has no channel-derived rate cap.
pub const DEFAULT_CAP: f64 = 1e6;

/// Reads the polygon of a system that has been reduced to exactly `r1` and
/// `r2` (in either order).
pub fn polygon_extract(sys: &LinearSystem, r1: &str, r2: &str) -> Result<Region2D> {
    polygon_extract_capped(sys, r1, r2, DEFAULT_CAP)
}

/// As [`polygon_extract`], intersected with `r1, r2 <= cap`.
pub fn polygon_extract_capped(sys: &LinearSystem, r1: &str, r2: &str, cap: f64) -> Result<Region2D> {
    let leftover: Vec<String> = sys
        .variables()
        .iter()
        .filter(|v| v.as_str() != r1 && v.as_str() != r2)
        .cloned()
        .collect();
    if !leftover.is_empty() {
        return Err(Error::LeftoverVariables(leftover));
    }
    if sys.is_infeasible() {
        return Ok(Region2D::empty());
    }
    let i1 = sys.index(r1).ok();
    let i2 = sys.index(r2).ok();
    let pick = |coef: &[f64], i: Option<usize>| i.map_or(0.0, |i| coef[i]);
    let mut hps = Vec::new();
    for c in sys.inequalities() {
        hps.push(HalfPlane::new(pick(&c.coef, i1), pick(&c.coef, i2), c.rhs));
    }
    for c in sys.equalities() {
        let (a, b) = (pick(&c.coef, i1), pick(&c.coef, i2));
        hps.push(HalfPlane::new(a, b, c.rhs));
        hps.push(HalfPlane::new(-a, -b, -c.rhs));
    }
    Ok(Region2D::from_halfplanes(&hps, cap))
}

/// Projects a system onto `(r1, r2)` and returns its polygon.
pub fn project_to_region(sys: &LinearSystem, r1: &str, r2: &str, cap: f64) -> Result<Region2D> {
    let reduced = sys.project(&[r1, r2])?;
    polygon_extract_capped(&reduced, r1, r2, cap)
}

/// Whether `outer` contains `inner` up to `tol`.
pub fn region_contains(outer: &Region2D, inner: &Region2D, tol: f64) -> bool {
    outer.contains(inner, tol)
}

/// Maximum of `direction . (R1, R2)` over `region`.
pub fn support(region: &Region2D, direction: [f64; 2]) -> Result<f64> {
    region.support(direction)
}
