//! Brute-force reference computations for cross-checking `cifc-udc`.
//!
//! Nothing here calls into the production code paths it checks. The crate
//! borrows only the data types (`JointPmf`, `ChannelSpec`, `LinearSystem`,
//! `Region2D`) so results can be compared directly; information measures,
//! polygons, hulls and linear algebra are all re-implemented below, with
//! deliberately naive algorithms.
//!
//! * [`mi_definition_sum`]: conditional mutual information by an explicit
//!   loop over `(a, b, c)` assignments with separately tabulated marginals.
//! * [`grid_region_oracle`]: the union of a formula's polygon over every pmf
//!   on a lattice.
//! * [`project_by_vertex_enumeration`]: projection of a bounded system by
//!   enumerating every basic solution.

use std::collections::HashMap;

use cifc_udc::{ChannelSpec, JointPmf, LinearSystem, Region2D};

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    Core(#[from] cifc_udc::Error),
    #[error("GridTooLarge: {points} lattice points exceed the limit of {limit}")]
    GridTooLarge { points: u128, limit: u128 },
    #[error("TooLarge: {variables} variables and {rows} rows exceed the enumeration limits")]
    TooLarge { variables: usize, rows: usize },
    #[error("Infeasible: no vertex satisfies the system")]
    Infeasible,
    #[error("UnknownLabel: `{0}`")]
    UnknownLabel(String),
}

pub type Result<T> = std::result::Result<T, OracleError>;

/// Largest lattice the grid oracle will enumerate.
pub const GRID_LIMIT: u128 = 10_000_000;

/// Largest system the vertex enumeration accepts.
pub const MAX_VARIABLES: usize = 10;
pub const MAX_ROWS: usize = 24;

fn positions(p: &JointPmf, labels: &[&str]) -> Result<Vec<usize>> {
    labels
        .iter()
        .map(|l| {
            p.vars()
                .iter()
                .position(|v| v.label == *l)
                .ok_or_else(|| OracleError::UnknownLabel(l.to_string()))
        })
        .collect()
}

/// Every assignment of `p` with its probability, decoding the flat index by
/// repeated division.
fn assignments(p: &JointPmf) -> Vec<(Vec<usize>, f64)> {
    let cards: Vec<usize> = p.vars().iter().map(|v| v.card).collect();
    p.probs()
        .iter()
        .enumerate()
        .map(|(mut flat, &q)| {
            let mut digits = vec![0; cards.len()];
            for k in (0..cards.len()).rev() {
                digits[k] = flat % cards[k];
                flat /= cards[k];
            }
            (digits, q)
        })
        .collect()
}

fn tabulate(rows: &[(Vec<usize>, f64)], pos: &[usize]) -> HashMap<Vec<usize>, f64> {
    let mut m = HashMap::new();
    for (d, q) in rows {
        let key: Vec<usize> = pos.iter().map(|&k| d[k]).collect();
        *m.entry(key).or_insert(0.0) += q;
    }
    m
}

/// `I(A; B | C)` in bits as the sum over `(a, b, c)` of
/// `p(a,b,c) log2 [p(a,b,c) p(c) / (p(a,c) p(b,c))]`.
pub fn mi_definition_sum(p: &JointPmf, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
    let (pa, pb, pc) = (positions(p, a)?, positions(p, b)?, positions(p, c)?);
    let rows = assignments(p);
    let abc: Vec<usize> = pa.iter().chain(&pb).chain(&pc).copied().collect();
    let ac: Vec<usize> = pa.iter().chain(&pc).copied().collect();
    let bc: Vec<usize> = pb.iter().chain(&pc).copied().collect();
    let (t_abc, t_ac, t_bc, t_c) = (
        tabulate(&rows, &abc),
        tabulate(&rows, &ac),
        tabulate(&rows, &bc),
        tabulate(&rows, &pc),
    );
    let (na, nb) = (pa.len(), pb.len());
    let mut total = 0.0;
    for (key, &q) in &t_abc {
        if q <= 0.0 {
            continue;
        }
        let (ka, rest) = key.split_at(na);
        let (kb, kc) = rest.split_at(nb);
        let qc = t_c[kc];
        let qac = t_ac[&[ka, kc].concat()];
        let qbc = t_bc[&[kb, kc].concat()];
        total += q * (q * qc / (qac * qbc)).log2();
    }
    Ok(total.max(0.0))
}

/// `H(A | C)` in bits by the definition sum `-sum p(a,c) log2 p(a|c)`.
pub fn entropy_definition_sum(p: &JointPmf, a: &[&str], c: &[&str]) -> Result<f64> {
    let (pa, pc) = (positions(p, a)?, positions(p, c)?);
    let rows = assignments(p);
    let ac: Vec<usize> = pa.iter().chain(&pc).copied().collect();
    let (t_ac, t_c) = (tabulate(&rows, &ac), tabulate(&rows, &pc));
    let mut total = 0.0;
    for (key, &q) in &t_ac {
        if q > 0.0 {
            total -= q * (q / t_c[&key[pa.len()..]]).log2();
        }
    }
    Ok(total.max(0.0))
}

/// Which polygon the grid oracle evaluates, with the auxiliary alphabets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    /// Converse bound over `p(x1, v12, x2, x3)`.
    T2 { v12: usize },
    /// Degraded Z capacity over `p(x1, x2, x3)`.
    T3,
    /// Semi-deterministic capacity over `p(x1, v12, x2, x3)`.
    T4 { v12: usize },
    /// Specialized inner bound over `p(x1, v12, v2, x2, x3)`.
    Iv5 { v12: usize, v2: usize },
}

/// Dense joint over the formula's input variables followed by `(y1, y2)`,
/// with entropies of arbitrary variable subsets.
struct Dense {
    cards: Vec<usize>,
    probs: Vec<f64>,
}

impl Dense {
    fn entropy(&self, vars: &[usize]) -> f64 {
        let mut sizes = Vec::new();
        let mut n = 1;
        for &v in vars {
            sizes.push(n);
            n *= self.cards[v];
        }
        let mut marginal = vec![0.0; n];
        let mut digits = vec![0; self.cards.len()];
        for &q in &self.probs {
            let idx: usize = vars.iter().zip(&sizes).map(|(&v, &s)| digits[v] * s).sum();
            marginal[idx] += q;
            for k in (0..digits.len()).rev() {
                digits[k] += 1;
                if digits[k] < self.cards[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        -marginal.iter().filter(|&&q| q > 0.0).map(|q| q * q.log2()).sum::<f64>()
    }

    fn h(&self, a: &[usize], c: &[usize]) -> f64 {
        let ac: Vec<usize> = a.iter().chain(c).copied().collect();
        self.entropy(&ac) - self.entropy(c)
    }

    fn i(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        let ac: Vec<usize> = a.iter().chain(c).copied().collect();
        let bc: Vec<usize> = b.iter().chain(c).copied().collect();
        let abc: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
        self.entropy(&ac) + self.entropy(&bc) - self.entropy(&abc) - self.entropy(c)
    }
}

/// Halfplane `a r1 + b r2 <= c`.
type Hp = [f64; 3];

fn polygon_vertices(bounds: &[Hp]) -> Vec<[f64; 2]> {
    let mut all: Vec<Hp> = bounds.to_vec();
    all.push([-1.0, 0.0, 0.0]);
    all.push([0.0, -1.0, 0.0]);
    let mut pts = Vec::new();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            let [a1, b1, c1] = all[i];
            let [a2, b2, c2] = all[j];
            let det = a1 * b2 - a2 * b1;
            if det.abs() < 1e-14 {
                continue;
            }
            let p = [(c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det];
            if all.iter().all(|h| h[0] * p[0] + h[1] * p[1] <= h[2] + 1e-9) {
                pts.push(p);
            }
        }
    }
    pts
}

/// Andrew's monotone chain, counter-clockwise, collinear points dropped.
fn hull(pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    // Snap to a 1e-11 lattice first. Float noise around a shared coordinate
    // otherwise reorders near-vertical points and the turn test drops a
    // genuine corner.
    let snap = |v: f64| (v * 1e11).round() / 1e11 + 0.0;
    let mut pts: Vec<[f64; 2]> = pts.into_iter().map(|p| [snap(p[0]), snap(p[1])]).collect();
    pts.sort_by(|p, q| p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])));
    pts.dedup_by(|p, q| (p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12);
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Wraps hull vertices as a region whose halfplanes are the supporting
/// lines along every edge normal and eight compass directions.
fn region_from_vertices(vertices: Vec<[f64; 2]>) -> Region2D {
    if vertices.is_empty() {
        return Region2D::from(cifc_udc::polytope::RegionDoc {
            halfplanes: vec![],
            vertices: vec![],
            empty: true,
        });
    }
    let mut dirs: Vec<[f64; 2]> = vec![
        [1.0, 0.0],
        [-1.0, 0.0],
        [0.0, 1.0],
        [0.0, -1.0],
        [1.0, 1.0],
        [1.0, -1.0],
        [-1.0, 1.0],
        [-1.0, -1.0],
    ];
    let n = vertices.len();
    for k in 0..n {
        let (p, q) = (vertices[k], vertices[(k + 1) % n]);
        let d = [q[1] - p[1], p[0] - q[0]];
        if d[0].abs() + d[1].abs() > 1e-12 {
            dirs.push(d);
            dirs.push([-d[0], -d[1]]);
        }
    }
    let halfplanes = dirs
        .into_iter()
        .map(|d| {
            let c = vertices
                .iter()
                .map(|v| d[0] * v[0] + d[1] * v[1])
                .fold(f64::NEG_INFINITY, f64::max);
            cifc_udc::HalfPlane::new(d[0], d[1], c)
        })
        .collect();
    Region2D::from(cifc_udc::polytope::RegionDoc {
        halfplanes,
        vertices,
        empty: false,
    })
}

/// `C(n, k)`, or some value above [`GRID_LIMIT`] once the partial products
/// (which only grow for `k <= n / 2`) pass it.
fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc = 1u128;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
        if acc > GRID_LIMIT {
            return acc;
        }
    }
    acc
}

/// Calls `f` with every vector of `n` multiples of `1/r` summing to one.
fn for_each_lattice_pmf(n: usize, r: usize, f: &mut impl FnMut(&[f64])) {
    fn rec(counts: &mut Vec<usize>, left: usize, n: usize, r: usize, f: &mut impl FnMut(&[f64])) {
        if counts.len() == n - 1 {
            counts.push(left);
            let p: Vec<f64> = counts.iter().map(|&c| c as f64 / r as f64).collect();
            f(&p);
            counts.pop();
            return;
        }
        for c in 0..=left {
            counts.push(c);
            rec(counts, left - c, n, r, f);
            counts.pop();
        }
    }
    rec(&mut Vec::with_capacity(n), r, n, r, f);
}

/// Hull of the formula's polygon over every lattice pmf with entries in
/// `{0, 1/r, ..., 1}`.
pub fn grid_region_oracle(ch: &ChannelSpec, formula: Formula, resolution: usize) -> Result<Region2D> {
    let [n1, n2, n3, ny1, ny2] = ch.cards();
    // input variable cardinalities, in the order the formula's pmf uses
    let (input_cards, x_pos): (Vec<usize>, [usize; 3]) = match formula {
        Formula::T3 => (vec![n1, n2, n3], [0, 1, 2]),
        Formula::T2 { v12 } | Formula::T4 { v12 } => (vec![n1, v12, n2, n3], [0, 2, 3]),
        Formula::Iv5 { v12, v2 } => (vec![n1, v12, v2, n2, n3], [0, 3, 4]),
    };
    let n: usize = input_cards.iter().product();
    let r = resolution.max(1);
    let points = binomial((r + n - 1) as u128, (n - 1) as u128);
    if points > GRID_LIMIT {
        return Err(OracleError::GridTooLarge {
            points,
            limit: GRID_LIMIT,
        });
    }
    let k = input_cards.len();
    let (y1, y2) = (k, k + 1);
    let mut cards = input_cards.clone();
    cards.extend([ny1, ny2]);
    let [x1, x2, x3] = x_pos;
    let mut vertices = Vec::new();
    for_each_lattice_pmf(n, r, &mut |p| {
        let mut probs = Vec::with_capacity(n * ny1 * ny2);
        let mut digits = vec![0; k];
        for &q in p {
            for a in 0..ny1 {
                for b in 0..ny2 {
                    probs.push(q * ch.p(digits[x1], digits[x2], digits[x3], a, b));
                }
            }
            for d in (0..k).rev() {
                digits[d] += 1;
                if digits[d] < input_cards[d] {
                    break;
                }
                digits[d] = 0;
            }
        }
        let j = Dense {
            cards: cards.clone(),
            probs,
        };
        let bounds: Vec<Hp> = match formula {
            Formula::T3 => vec![
                [1.0, 0.0, j.i(&[y1], &[x1, x3], &[])],
                [0.0, 1.0, j.i(&[y2], &[x2], &[x1, x3])],
                [1.0, 1.0, j.i(&[y2], &[x1, x2], &[x3])],
            ],
            Formula::T2 { .. } => {
                let v = 1;
                let aux = j.i(&[y1], &[x1, v, x3], &[]);
                vec![
                    [1.0, 0.0, j.i(&[y1], &[x1, x2, x3], &[])],
                    [1.0, 0.0, aux],
                    [0.0, 1.0, j.i(&[y2], &[x2], &[x1, x3])],
                    [1.0, 1.0, j.i(&[y1, y2], &[x1, x2], &[x3])],
                    [1.0, 1.0, j.i(&[x2], &[y2], &[x1, v, x3]) + aux],
                ]
            }
            Formula::T4 { .. } => {
                let v = 1;
                let aux = j.i(&[y1], &[x1, v, x3], &[]);
                vec![
                    [1.0, 0.0, aux],
                    [0.0, 1.0, j.h(&[y2], &[x1, x3])],
                    [1.0, 1.0, aux + j.h(&[y2], &[x1, v, x3])],
                ]
            }
            Formula::Iv5 { .. } => {
                let (v12, v2) = (1, 2);
                let r1 = j.i(&[y1], &[x1, v12, x3], &[]);
                let r2 = j.i(&[y2], &[v2], &[x1, x3]);
                let q = j.i(&[y1], &[v12], &[x1, x3]);
                let bin = j.i(&[v12], &[v2], &[x1, x3]);
                vec![
                    [1.0, 0.0, r1],
                    [0.0, 1.0, r2],
                    [0.0, 1.0, r2 + q - bin],
                    [1.0, 1.0, q + j.i(&[y2], &[x1, v2], &[x3]) - bin],
                    [1.0, 1.0, r1 + r2 - bin],
                ]
            }
        };
        vertices.extend(polygon_vertices(&bounds));
    });
    Ok(region_from_vertices(hull(vertices)))
}

/// Solves the square system `m x = rhs` by Gaussian elimination with
/// partial pivoting; `None` when singular.
fn solve(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in 0..n {
            if row != col {
                let f = m[row][col] / m[col][col];
                if f != 0.0 {
                    let pivot_row = m[col].clone();
                    for (x, p) in m[row][col..].iter_mut().zip(&pivot_row[col..]) {
                        *x -= f * p;
                    }
                    rhs[row] -= f * rhs[col];
                }
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / m[i][i]).collect())
}

fn choose_subsets(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::new(), f);
}

/// Projection of a bounded system onto `keep`, intersected with the box
/// `0 <= keep <= cap` (the same clipping every `Region2D` carries).
///
/// Enumerates every choice of tight rows, solves for the basic point,
/// keeps the feasible ones, projects and hulls them.
pub fn project_by_vertex_enumeration(sys: &LinearSystem, keep: [&str; 2], cap: f64) -> Result<Region2D> {
    let vars = sys.variables();
    let n = vars.len();
    let idx = |l: &str| {
        vars.iter()
            .position(|v| v == l)
            .ok_or_else(|| OracleError::UnknownLabel(l.to_string()))
    };
    let (k1, k2) = (idx(keep[0])?, idx(keep[1])?);
    let mut rows: Vec<(Vec<f64>, f64)> = sys.inequalities().iter().map(|c| (c.coef.clone(), c.rhs)).collect();
    for label in sys.nonnegative() {
        let mut c = vec![0.0; n];
        c[idx(label)?] = -1.0;
        rows.push((c, 0.0));
    }
    if n > MAX_VARIABLES || rows.len() > MAX_ROWS {
        return Err(OracleError::TooLarge {
            variables: n,
            rows: rows.len(),
        });
    }
    for (k, sign, bound) in [(k1, -1.0, 0.0), (k2, -1.0, 0.0), (k1, 1.0, cap), (k2, 1.0, cap)] {
        let mut c = vec![0.0; n];
        c[k] = sign;
        rows.push((c, bound));
    }
    let eqs: Vec<(Vec<f64>, f64)> = sys.equalities().iter().map(|c| (c.coef.clone(), c.rhs)).collect();
    if sys.is_infeasible() {
        return Err(OracleError::Infeasible);
    }
    let feasible = |x: &[f64]| {
        let dot = |c: &[f64]| c.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        rows.iter().all(|(c, b)| dot(c) <= b + 1e-9 * (1.0 + b.abs()))
            && eqs.iter().all(|(c, b)| (dot(c) - b).abs() <= 1e-9 * (1.0 + b.abs()))
    };
    let mut pts = Vec::new();
    if eqs.len() <= n {
        choose_subsets(rows.len(), n - eqs.len(), &mut |subset| {
            let mut m: Vec<Vec<f64>> = eqs.iter().map(|(c, _)| c.clone()).collect();
            let mut rhs: Vec<f64> = eqs.iter().map(|(_, b)| *b).collect();
            for &s in subset {
                m.push(rows[s].0.clone());
                rhs.push(rows[s].1);
            }
            if let Some(x) = solve(m, rhs) {
                if feasible(&x) {
                    pts.push([x[k1], x[k2]]);
                }
            }
        });
    }
    if pts.is_empty() {
        return Err(OracleError::Infeasible);
    }
    Ok(region_from_vertices(hull(pts)))
}
