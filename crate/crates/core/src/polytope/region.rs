use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feasibility slack for candidate vertices, relative to `max(1, |c|)`.
const VERTEX_TOL: f64 = 1e-9;

/// Vertices closer than this are merged.
const MERGE_TOL: f64 = 1e-9;

/// `a * r1 + b * r2 <= c`, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct HalfPlane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl From<[f64; 3]> for HalfPlane {
    fn from([a, b, c]: [f64; 3]) -> Self {
        HalfPlane { a, b, c }
    }
}

impl From<HalfPlane> for [f64; 3] {
    fn from(h: HalfPlane) -> Self {
        [h.a, h.b, h.c]
    }
}

impl HalfPlane {
    pub const fn new(a: f64, b: f64, c: f64) -> Self {
        HalfPlane { a, b, c }
    }

    /// `r1 <= c`
    pub const fn r1_at_most(c: f64) -> Self {
        HalfPlane::new(1.0, 0.0, c)
    }

    /// `r2 <= c`
    pub const fn r2_at_most(c: f64) -> Self {
        HalfPlane::new(0.0, 1.0, c)
    }

    /// `r1 + r2 <= c`
    pub const fn sum_at_most(c: f64) -> Self {
        HalfPlane::new(1.0, 1.0, c)
    }

    pub const R1_NONNEG: HalfPlane = HalfPlane::new(-1.0, 0.0, 0.0);
    pub const R2_NONNEG: HalfPlane = HalfPlane::new(0.0, -1.0, 0.0);

    fn normalized(self) -> Option<HalfPlane> {
        let s = self.a.abs().max(self.b.abs());
        (s > 1e-12).then(|| HalfPlane::new(self.a / s, self.b / s, self.c / s))
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        self.a * p[0] + self.b * p[1]
    }

    /// Amount by which `p` violates this halfplane (negative when inside).
    pub fn violation(&self, p: [f64; 2]) -> f64 {
        self.eval(p) - self.c
    }

    fn same_as(&self, o: &HalfPlane) -> bool {
        (self.a - o.a).abs() <= 1e-12 && (self.b - o.b).abs() <= 1e-12 && (self.c - o.c).abs() <= 1e-12
    }
}

/// A convex polygon of rate pairs `(R1, R2)` held both as halfplanes and as
/// counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Region2D {
    halfplanes: Vec<HalfPlane>,
    vertices: Vec<[f64; 2]>,
    empty: bool,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull, counter-clockwise from the lexicographically smallest point;
/// collinear and near-duplicate points are dropped.
pub(crate) fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    // Snapping to a 1e-12 lattice makes coordinates that differ only by
    // float noise identical, so near-vertical runs sort by the other axis
    // and the turn test cannot drop a true corner. Adding 0.0 turns -0.0
    // into 0.0 so exports never show a negative zero.
    let snap = |v: f64| (v * 1e12).round() / 1e12 + 0.0;
    let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [snap(p[0]), snap(p[1])]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() <= MERGE_TOL && (a[1] - b[1]).abs() <= MERGE_TOL);
    if pts.len() <= 2 {
        return pts;
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 1e-12 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() == 2 && (hull[0][0] - hull[1][0]).abs() <= MERGE_TOL && (hull[0][1] - hull[1][1]).abs() <= MERGE_TOL {
        hull.pop();
    }
    hull
}

fn push_unique(list: &mut Vec<HalfPlane>, h: HalfPlane) {
    if !list.iter().any(|e| e.same_as(&h)) {
        list.push(h);
    }
}

impl Region2D {
    pub fn empty() -> Self {
        Region2D {
            halfplanes: vec![HalfPlane::R1_NONNEG, HalfPlane::R2_NONNEG],
            vertices: Vec::new(),
            empty: true,
        }
    }

    /// Intersection of `halfplanes`, the nonnegative quadrant and the box
    /// `r1, r2 <= cap`. Redundant halfplanes are pruned.
    pub fn from_halfplanes(halfplanes: &[HalfPlane], cap: f64) -> Region2D {
        let mut hps: Vec<HalfPlane> = vec![
            HalfPlane::R1_NONNEG,
            HalfPlane::R2_NONNEG,
            HalfPlane::r1_at_most(cap),
            HalfPlane::r2_at_most(cap),
        ];
        for h in halfplanes {
            match h.normalized() {
                Some(n) => push_unique(&mut hps, n),
                None if h.c < -VERTEX_TOL => return Region2D::empty(),
                None => {}
            }
        }
        let feasible = |p: [f64; 2]| {
            hps.iter()
                .all(|h| h.violation(p) <= VERTEX_TOL * h.c.abs().max(1.0))
        };
        let mut candidates = Vec::new();
        for i in 0..hps.len() {
            for k in i + 1..hps.len() {
                let (h, g) = (hps[i], hps[k]);
                let det = h.a * g.b - h.b * g.a;
                if det.abs() <= 1e-12 {
                    continue;
                }
                let p = [(h.c * g.b - h.b * g.c) / det, (h.a * g.c - h.c * g.a) / det];
                if feasible(p) {
                    candidates.push(p);
                }
            }
        }
        if candidates.is_empty() {
            return Region2D::empty();
        }
        let vertices = convex_hull(&candidates);
        let need = if vertices.len() >= 3 { 2 } else { 1 };
        let tight = |h: &HalfPlane, p: [f64; 2]| h.violation(p).abs() <= 1e-9 * h.c.abs().max(1.0);
        let mut kept = vec![HalfPlane::R1_NONNEG, HalfPlane::R2_NONNEG];
        for h in &hps {
            if vertices.iter().filter(|&&v| tight(h, v)).count() >= need {
                push_unique(&mut kept, *h);
            }
        }
        Region2D {
            halfplanes: kept,
            vertices,
            empty: false,
        }
    }

    /// Convex hull of a point set, expressed with edge halfplanes.
    pub fn from_points(points: &[[f64; 2]]) -> Region2D {
        let vertices = convex_hull(points);
        let mut hps = vec![HalfPlane::R1_NONNEG, HalfPlane::R2_NONNEG];
        match vertices.len() {
            0 => return Region2D::empty(),
            1 => {
                let [x, y] = vertices[0];
                for h in [
                    HalfPlane::new(1.0, 0.0, x),
                    HalfPlane::new(-1.0, 0.0, -x),
                    HalfPlane::new(0.0, 1.0, y),
                    HalfPlane::new(0.0, -1.0, -y),
                ] {
                    push_unique(&mut hps, h);
                }
            }
            2 => {
                let (p, q) = (vertices[0], vertices[1]);
                let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
                for h in [
                    HalfPlane::new(dy, -dx, dy * p[0] - dx * p[1]),
                    HalfPlane::new(-dy, dx, -dy * p[0] + dx * p[1]),
                    HalfPlane::new(dx, dy, dx * q[0] + dy * q[1]),
                    HalfPlane::new(-dx, -dy, -dx * p[0] - dy * p[1]),
                ] {
                    push_unique(&mut hps, h.normalized().expect("distinct endpoints"));
                }
            }
            n => {
                for i in 0..n {
                    let (p, q) = (vertices[i], vertices[(i + 1) % n]);
                    let (nx, ny) = (q[1] - p[1], p[0] - q[0]);
                    let h = HalfPlane::new(nx, ny, nx * p[0] + ny * p[1]);
                    push_unique(&mut hps, h.normalized().expect("distinct vertices"));
                }
            }
        }
        Region2D {
            halfplanes: hps,
            vertices,
            empty: false,
        }
    }

    /// Axis-aligned box `[0, w] x [0, h]`.
    pub fn rectangle(w: f64, h: f64) -> Region2D {
        Region2D::from_halfplanes(&[HalfPlane::r1_at_most(w), HalfPlane::r2_at_most(h)], w.max(h) + 1.0)
    }

    pub fn halfplanes(&self) -> &[HalfPlane] {
        &self.halfplanes
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn contains_point(&self, p: [f64; 2], tol: f64) -> bool {
        !self.empty && self.halfplanes.iter().all(|h| h.violation(p) <= tol)
    }

    /// Whether every vertex of `inner` satisfies every halfplane of `self`
    /// within `tol`.
    pub fn contains(&self, inner: &Region2D, tol: f64) -> bool {
        if inner.empty {
            return true;
        }
        inner.vertices.iter().all(|&v| self.contains_point(v, tol))
    }

    /// Maximum of `dir . r` over the region.
    pub fn support(&self, dir: [f64; 2]) -> Result<f64> {
        if dir == [0.0, 0.0] {
            return Err(Error::ZeroDirection);
        }
        if self.empty {
            return Err(Error::EmptyRegion);
        }
        Ok(self
            .vertices
            .iter()
            .map(|v| dir[0] * v[0] + dir[1] * v[1])
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Euclidean distance from `p` to the region.
    pub fn distance_to(&self, p: [f64; 2]) -> f64 {
        let n = self.vertices.len();
        if n == 0 {
            return f64::INFINITY;
        }
        if n >= 3 && (0..n).all(|i| cross(self.vertices[i], self.vertices[(i + 1) % n], p) >= 0.0) {
            return 0.0;
        }
        let seg = |a: [f64; 2], b: [f64; 2]| {
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len2 = dx * dx + dy * dy;
            let t = if len2 > 0.0 {
                (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let (qx, qy) = (a[0] + t * dx - p[0], a[1] + t * dy - p[1]);
            (qx * qx + qy * qy).sqrt()
        };
        (0..n)
            .map(|i| seg(self.vertices[i], self.vertices[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Hausdorff distance between two polygons (attained at vertices).
    pub fn hausdorff(&self, other: &Region2D) -> f64 {
        match (self.empty, other.empty) {
            (true, true) => 0.0,
            (true, false) | (false, true) => f64::INFINITY,
            _ => {
                let d1 = self.vertices.iter().map(|&v| other.distance_to(v));
                let d2 = other.vertices.iter().map(|&v| self.distance_to(v));
                d1.chain(d2).fold(0.0, f64::max)
            }
        }
    }

    /// Intersection with additional halfplanes.
    pub fn intersect(&self, extra: &[HalfPlane], cap: f64) -> Region2D {
        if self.empty {
            return Region2D::empty();
        }
        let mut all = self.halfplanes.clone();
        all.extend_from_slice(extra);
        Region2D::from_halfplanes(&all, cap)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RegionDoc::from(self)).expect("region serializes")
    }

    pub fn from_json(text: &str) -> Result<Region2D> {
        let doc: RegionDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Ok(doc.into())
    }

    /// Two-column `r1,r2` vertex listing with 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r1,r2\n");
        for v in &self.vertices {
            let _ = writeln!(out, "{},{}", sig12(v[0]), sig12(v[1]));
        }
        out
    }
}

fn sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_finite() { "0".into() } else { v.to_string() };
    }
    let decimals = (11 - v.abs().log10().floor() as i32).max(0) as usize;
    let s = format!("{v:.decimals$}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Serialized region: `{"halfplanes": [[a,b,c],...], "vertices": [[r1,r2],...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionDoc {
    pub halfplanes: Vec<HalfPlane>,
    pub vertices: Vec<[f64; 2]>,
    #[serde(default)]
    pub empty: bool,
}

impl From<&Region2D> for RegionDoc {
    fn from(r: &Region2D) -> Self {
        RegionDoc {
            halfplanes: r.halfplanes.clone(),
            vertices: r.vertices.clone(),
            empty: r.empty,
        }
    }
}

impl From<RegionDoc> for Region2D {
    fn from(d: RegionDoc) -> Self {
        Region2D {
            halfplanes: d.halfplanes,
            empty: d.empty || d.vertices.is_empty(),
            vertices: d.vertices,
        }
    }
}

/// Convex hull of the union of `regions`; empty inputs are ignored.
pub fn hull_union(regions: &[Region2D]) -> Result<Region2D> {
    if regions.is_empty() {
        return Err(Error::EmptyList);
    }
    let points: Vec<[f64; 2]> = regions
        .iter()
        .filter(|r| !r.empty)
        .flat_map(|r| r.vertices.iter().copied())
        .collect();
    Ok(Region2D::from_points(&points))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Region2D {
        Region2D::rectangle(1.0, 1.0)
    }

    fn triangle() -> Region2D {
        Region2D::from_points(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    }

    #[test]
    fn square_has_four_ccw_vertices() {
        let sq = unit_square();
        assert_eq!(sq.vertices(), &[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(sq.halfplanes().len(), 4);
    }

    #[test]
    fn touching_sum_constraint_is_pruned() {
        let r = Region2D::from_halfplanes(
            &[
                HalfPlane::r1_at_most(1.0),
                HalfPlane::r2_at_most(1.0),
                HalfPlane::sum_at_most(2.0),
            ],
            10.0,
        );
        assert_eq!(r, unit_square());
    }

    #[test]
    fn negative_bound_is_empty() {
        let r = Region2D::from_halfplanes(&[HalfPlane::r1_at_most(-1.0)], 10.0);
        assert!(r.is_empty());
        let zero = Region2D::from_halfplanes(&[HalfPlane::new(0.0, 0.0, -1.0)], 10.0);
        assert!(zero.is_empty());
    }

    #[test]
    fn containment_examples() {
        assert!(unit_square().contains(&triangle(), 1e-12));
        assert!(!triangle().contains(&unit_square(), 1e-12));
        assert!(triangle().contains(&triangle(), 1e-9));
        assert!(triangle().contains(&Region2D::empty(), 0.0));
        assert!(!Region2D::empty().contains(&triangle(), 0.0));
    }

    #[test]
    fn hull_of_segments_is_triangle() {
        let a = Region2D::from_halfplanes(&[HalfPlane::r1_at_most(1.0), HalfPlane::r2_at_most(0.0)], 5.0);
        let b = Region2D::from_halfplanes(&[HalfPlane::r1_at_most(0.0), HalfPlane::r2_at_most(1.0)], 5.0);
        let h = hull_union(&[a, b]).unwrap();
        assert_eq!(h.vertices(), triangle().vertices());
        assert!(matches!(hull_union(&[]), Err(Error::EmptyList)));
        let once = hull_union(&[unit_square()]).unwrap();
        assert_eq!(once.vertices(), unit_square().vertices());
    }

    #[test]
    fn support_examples() {
        assert_eq!(unit_square().support([1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(unit_square().support([1.0, 0.0]).unwrap(), 1.0);
        assert!(matches!(unit_square().support([0.0, 0.0]), Err(Error::ZeroDirection)));
        assert!(matches!(Region2D::empty().support([1.0, 0.0]), Err(Error::EmptyRegion)));
    }

    #[test]
    fn degenerate_regions() {
        let p = Region2D::from_halfplanes(&[HalfPlane::sum_at_most(0.0)], 3.0);
        assert_eq!(p.vertices(), &[[0.0, 0.0]]);
        let seg = Region2D::from_halfplanes(&[HalfPlane::r1_at_most(0.0), HalfPlane::r2_at_most(1.0)], 3.0);
        assert_eq!(seg.vertices(), &[[0.0, 0.0], [0.0, 1.0]]);
        assert!(seg.contains_point([0.0, 0.5], 1e-12));
        assert!(!seg.contains_point([0.1, 0.5], 1e-12));
        let from_pts = Region2D::from_points(&[[0.0, 0.0], [0.0, 1.0]]);
        assert!(from_pts.contains(&seg, 1e-12) && seg.contains(&from_pts, 1e-12));
    }

    #[test]
    fn hausdorff_distance() {
        assert_eq!(unit_square().hausdorff(&unit_square()), 0.0);
        let d = unit_square().hausdorff(&triangle());
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn export_round_trips() {
        let r = Region2D::from_points(&[[0.0, 0.0], [0.3, 0.0], [0.1, 0.7]]);
        assert_eq!(Region2D::from_json(&r.to_json()).unwrap(), r);
        assert_eq!(Region2D::from_json(&Region2D::empty().to_json()).unwrap(), Region2D::empty());
        assert_eq!(unit_square().to_csv(), "r1,r2\n0,0\n1,0\n1,1\n0,1\n");
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(12.5), "12.5");
    }
}
