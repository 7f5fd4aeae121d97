use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients with magnitude below this are treated as zero.
pub const SNAP: f64 = 1e-12;

/// Slack allowed before a constant row `0 <= b` is declared infeasible.
pub const FEAS_TOL: f64 = 1e-9;

/// Rows whose coefficients agree within this are considered parallel.
pub const DUP_TOL: f64 = 1e-9;

/// One linear row `coef . x (<= or =) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coef: Vec<f64>,
    pub rhs: f64,
}

/// Set of original inequality indices a derived row was combined from.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct History(Vec<u64>);

impl History {
    fn single(i: usize) -> Self {
        let mut h = History(vec![0; i / 64 + 1]);
        h.0[i / 64] |= 1 << (i % 64);
        h
    }

    fn union(&self, other: &History) -> History {
        let n = self.0.len().max(other.0.len());
        History(
            (0..n)
                .map(|k| self.0.get(k).copied().unwrap_or(0) | other.0.get(k).copied().unwrap_or(0))
                .collect(),
        )
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Row {
    coef: Vec<f64>,
    rhs: f64,
    history: History,
}

impl Row {
    /// Scales so the largest coefficient magnitude is one and snaps tiny
    /// coefficients to zero. All-zero rows are left as `0 <= rhs`.
    fn normalize(&mut self) {
        let scale = self.coef.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if scale <= SNAP {
            self.coef.iter_mut().for_each(|c| *c = 0.0);
            return;
        }
        for c in &mut self.coef {
            *c /= scale;
            if c.abs() < SNAP {
                *c = 0.0;
            }
        }
        self.rhs /= scale;
    }

    fn is_constant(&self) -> bool {
        self.coef.iter().all(|&c| c == 0.0)
    }
}

/// A system of linear inequalities and equalities over named variables.
///
/// Variables listed as nonnegative carry an implicit `x >= 0` row that is
/// only materialized when that variable is eliminated.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    variables: Vec<String>,
    inequalities: Vec<Row>,
    equalities: Vec<Row>,
    nonnegative: Vec<bool>,
    infeasible: bool,
    /// Number of Fourier-Motzkin combination steps performed so far.
    fm_steps: usize,
    /// Next unused history index.
    next_origin: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct SystemDoc {
    variables: Vec<String>,
    #[serde(default)]
    inequalities: Vec<Constraint>,
    #[serde(default)]
    equalities: Vec<Constraint>,
    #[serde(default)]
    nonnegative: Vec<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    infeasible: bool,
}

impl LinearSystem {
    pub fn new<S: AsRef<str>>(variables: &[S]) -> Result<Self> {
        let variables: Vec<String> = variables.iter().map(|v| v.as_ref().to_string()).collect();
        for (i, v) in variables.iter().enumerate() {
            if variables[..i].contains(v) {
                return Err(Error::DuplicateLabel(v.clone()));
            }
        }
        let n = variables.len();
        Ok(LinearSystem {
            variables,
            inequalities: Vec::new(),
            equalities: Vec::new(),
            nonnegative: vec![false; n],
            infeasible: false,
            fm_steps: 0,
            next_origin: 0,
        })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn is_infeasible(&self) -> bool {
        self.infeasible
    }

    pub fn inequalities(&self) -> Vec<Constraint> {
        self.inequalities
            .iter()
            .map(|r| Constraint {
                coef: r.coef.clone(),
                rhs: r.rhs,
            })
            .collect()
    }

    pub fn equalities(&self) -> Vec<Constraint> {
        self.equalities
            .iter()
            .map(|r| Constraint {
                coef: r.coef.clone(),
                rhs: r.rhs,
            })
            .collect()
    }

    pub fn nonnegative(&self) -> Vec<&str> {
        self.variables
            .iter()
            .zip(&self.nonnegative)
            .filter(|(_, &n)| n)
            .map(|(v, _)| v.as_str())
            .collect()
    }

    pub fn index(&self, var: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| Error::UnknownVariable(var.to_string()))
    }

    fn dense(&self, terms: &[(&str, f64)]) -> Result<Vec<f64>> {
        let mut coef = vec![0.0; self.variables.len()];
        for &(v, a) in terms {
            coef[self.index(v)?] += a;
        }
        Ok(coef)
    }

    fn fresh_history(&mut self) -> History {
        let h = History::single(self.next_origin);
        self.next_origin += 1;
        h
    }

    /// Adds `sum(a_i x_i) <= rhs`.
    pub fn add_le(&mut self, terms: &[(&str, f64)], rhs: f64) -> Result<()> {
        let coef = self.dense(terms)?;
        self.push_le(coef, rhs)
    }

    /// Adds `sum(a_i x_i) >= rhs`.
    pub fn add_ge(&mut self, terms: &[(&str, f64)], rhs: f64) -> Result<()> {
        let neg: Vec<(&str, f64)> = terms.iter().map(|&(v, a)| (v, -a)).collect();
        self.add_le(&neg, -rhs)
    }

    /// Adds `sum(a_i x_i) = rhs`.
    pub fn add_eq(&mut self, terms: &[(&str, f64)], rhs: f64) -> Result<()> {
        let coef = self.dense(terms)?;
        self.push_eq(coef, rhs)
    }

    /// Adds a dense row `coef . x <= rhs`.
    pub fn push_le(&mut self, coef: Vec<f64>, rhs: f64) -> Result<()> {
        if coef.len() != self.variables.len() {
            return Err(Error::ShapeMismatch {
                expected: self.variables.len(),
                found: coef.len(),
            });
        }
        let history = self.fresh_history();
        self.inequalities.push(Row { coef, rhs, history });
        Ok(())
    }

    /// Adds a dense row `coef . x = rhs`.
    pub fn push_eq(&mut self, coef: Vec<f64>, rhs: f64) -> Result<()> {
        if coef.len() != self.variables.len() {
            return Err(Error::ShapeMismatch {
                expected: self.variables.len(),
                found: coef.len(),
            });
        }
        self.equalities.push(Row {
            coef,
            rhs,
            history: History::default(),
        });
        Ok(())
    }

    pub fn set_nonnegative(&mut self, var: &str) -> Result<()> {
        let i = self.index(var)?;
        self.nonnegative[i] = true;
        Ok(())
    }

    /// Whether `point` (in variable order) satisfies every row within `tol`.
    pub fn satisfies(&self, point: &[f64], tol: f64) -> bool {
        if self.infeasible {
            return false;
        }
        let dot = |r: &Row| r.coef.iter().zip(point).map(|(a, x)| a * x).sum::<f64>();
        self.inequalities.iter().all(|r| dot(r) <= r.rhs + tol)
            && self.equalities.iter().all(|r| (dot(r) - r.rhs).abs() <= tol)
            && self
                .nonnegative
                .iter()
                .zip(point)
                .all(|(&n, &x)| !n || x >= -tol)
    }

    fn into_infeasible(mut self) -> LinearSystem {
        self.inequalities.clear();
        self.equalities.clear();
        self.infeasible = true;
        self
    }

    /// Projects out `var`.
    ///
    /// If an equality involves `var` it is used to substitute `var` away;
    /// otherwise every upper bound on `var` is paired with every lower bound.
    /// An inconsistent result is reported through [`Self::is_infeasible`].
    pub fn fm_eliminate(&self, var: &str) -> Result<LinearSystem> {
        let j = self.index(var)?;
        let mut out = self.clone();
        if out.infeasible {
            out.drop_column(j);
            return Ok(out);
        }
        if out.nonnegative[j] {
            let mut coef = vec![0.0; out.variables.len()];
            coef[j] = -1.0;
            let history = out.fresh_history();
            out.inequalities.push(Row {
                coef,
                rhs: 0.0,
                history,
            });
        }

        let pivot = out
            .equalities
            .iter()
            .enumerate()
            .filter(|(_, r)| r.coef[j].abs() > SNAP)
            .max_by(|(_, a), (_, b)| a.coef[j].abs().total_cmp(&b.coef[j].abs()))
            .map(|(k, _)| k);

        if let Some(k) = pivot {
            let p = out.equalities.remove(k);
            let substitute = |r: &mut Row| {
                let f = r.coef[j] / p.coef[j];
                if f != 0.0 {
                    for (c, pc) in r.coef.iter_mut().zip(&p.coef) {
                        *c -= f * pc;
                    }
                    r.rhs -= f * p.rhs;
                }
                r.coef[j] = 0.0;
            };
            out.inequalities.iter_mut().for_each(substitute);
            out.equalities.iter_mut().for_each(substitute);
        } else {
            let mut keep = Vec::new();
            let mut upper = Vec::new();
            let mut lower = Vec::new();
            for r in out.inequalities.drain(..) {
                let a = r.coef[j];
                if a > SNAP {
                    upper.push(r);
                } else if a < -SNAP {
                    lower.push(r);
                } else {
                    keep.push(r);
                }
            }
            out.fm_steps += 1;
            let limit = out.fm_steps + 1;
            for u in &upper {
                for l in &lower {
                    let history = u.history.union(&l.history);
                    // Chernikov: a combination of more than k+1 original rows
                    // after k elimination steps is redundant.
                    if history.count() > limit {
                        continue;
                    }
                    let (su, sl) = (1.0 / u.coef[j], -1.0 / l.coef[j]);
                    let coef: Vec<f64> =
                        u.coef.iter().zip(&l.coef).map(|(a, b)| su * a + sl * b).collect();
                    let mut row = Row {
                        coef,
                        rhs: su * u.rhs + sl * l.rhs,
                        history,
                    };
                    row.coef[j] = 0.0;
                    keep.push(row);
                }
            }
            out.inequalities = keep;
        }
        out.drop_column(j);
        Ok(out.tidy())
    }

    fn drop_column(&mut self, j: usize) {
        self.variables.remove(j);
        self.nonnegative.remove(j);
        for r in self.inequalities.iter_mut().chain(self.equalities.iter_mut()) {
            r.coef.remove(j);
        }
    }

    /// Normalizes rows, drops trivial and duplicate rows, keeps the tightest
    /// of parallel inequalities, and detects constant contradictions.
    fn tidy(mut self) -> LinearSystem {
        let mut eqs: Vec<Row> = Vec::with_capacity(self.equalities.len());
        for mut r in std::mem::take(&mut self.equalities) {
            r.normalize();
            if r.is_constant() {
                if r.rhs.abs() > FEAS_TOL {
                    return self.into_infeasible();
                }
                continue;
            }
            let dup = eqs.iter().any(|e| {
                let same = e.coef.iter().zip(&r.coef).all(|(a, b)| (a - b).abs() <= DUP_TOL)
                    && (e.rhs - r.rhs).abs() <= DUP_TOL;
                let flipped = e.coef.iter().zip(&r.coef).all(|(a, b)| (a + b).abs() <= DUP_TOL)
                    && (e.rhs + r.rhs).abs() <= DUP_TOL;
                same || flipped
            });
            if !dup {
                eqs.push(r);
            }
        }
        self.equalities = eqs;

        let mut rows: Vec<Row> = Vec::with_capacity(self.inequalities.len());
        for mut r in std::mem::take(&mut self.inequalities) {
            r.normalize();
            if r.is_constant() {
                if r.rhs < -FEAS_TOL {
                    return self.into_infeasible();
                }
                continue;
            }
            match rows
                .iter_mut()
                .find(|e| e.coef.iter().zip(&r.coef).all(|(a, b)| (a - b).abs() <= DUP_TOL))
            {
                Some(existing) => {
                    if r.rhs < existing.rhs {
                        *existing = r;
                    }
                }
                None => rows.push(r),
            }
        }
        self.inequalities = rows;
        self
    }

    /// Number of new rows eliminating `j` would create; substitutions cost
    /// nothing.
    fn elimination_cost(&self, j: usize) -> i64 {
        if self.equalities.iter().any(|r| r.coef[j].abs() > SNAP) {
            return i64::MIN;
        }
        let mut up = 0i64;
        let mut lo = i64::from(self.nonnegative[j]);
        for r in &self.inequalities {
            if r.coef[j] > SNAP {
                up += 1;
            } else if r.coef[j] < -SNAP {
                lo += 1;
            }
        }
        up * lo - up - lo
    }

    /// Eliminates every variable not in `keep`, choosing at each step the
    /// variable whose elimination creates the fewest rows.
    pub fn project(&self, keep: &[&str]) -> Result<LinearSystem> {
        for k in keep {
            self.index(k)?;
        }
        let mut sys = self.clone();
        loop {
            let candidate = (0..sys.variables.len())
                .filter(|&j| !keep.contains(&sys.variables[j].as_str()))
                .min_by_key(|&j| (sys.elimination_cost(j), j));
            match candidate {
                Some(j) => {
                    let name = sys.variables[j].clone();
                    sys = sys.fm_eliminate(&name)?;
                }
                None => return Ok(sys),
            }
        }
    }

    /// Eliminates the listed variables in the given order.
    pub fn eliminate_in_order(&self, order: &[&str]) -> Result<LinearSystem> {
        let mut sys = self.clone();
        for v in order {
            sys = sys.fm_eliminate(v)?;
        }
        Ok(sys)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SystemDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut sys = LinearSystem::new(&doc.variables)?;
        for c in doc.inequalities {
            sys.push_le(c.coef, c.rhs)?;
        }
        for c in doc.equalities {
            sys.push_eq(c.coef, c.rhs)?;
        }
        for v in &doc.nonnegative {
            sys.set_nonnegative(v)?;
        }
        sys.infeasible = doc.infeasible;
        Ok(sys)
    }

    pub fn to_json(&self) -> String {
        let doc = SystemDoc {
            variables: self.variables.clone(),
            inequalities: self.inequalities(),
            equalities: self.equalities(),
            nonnegative: self.nonnegative().iter().map(|s| s.to_string()).collect(),
            infeasible: self.infeasible,
        };
        serde_json::to_string_pretty(&doc).expect("system serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(sys: &LinearSystem) -> Vec<(Vec<f64>, f64)> {
        sys.inequalities().into_iter().map(|c| (c.coef, c.rhs)).collect()
    }

    #[test]
    fn lower_upper_pair() {
        let mut s = LinearSystem::new(&["x", "y"]).unwrap();
        s.set_nonnegative("y").unwrap();
        s.add_le(&[("x", 1.0), ("y", 1.0)], 3.0).unwrap();
        let p = s.fm_eliminate("y").unwrap();
        assert_eq!(p.variables(), &["x".to_string()]);
        assert_eq!(rows(&p), vec![(vec![1.0], 3.0)]);
    }

    #[test]
    fn chained_bounds() {
        let mut s = LinearSystem::new(&["x", "y"]).unwrap();
        s.add_le(&[("x", 1.0), ("y", -1.0)], 1.0).unwrap();
        s.add_le(&[("y", 1.0)], 2.0).unwrap();
        s.add_le(&[("y", -1.0)], 0.0).unwrap();
        let p = s.fm_eliminate("y").unwrap();
        assert_eq!(rows(&p), vec![(vec![1.0], 3.0)]);
    }

    #[test]
    fn equality_substitution() {
        let mut s = LinearSystem::new(&["r", "a", "b"]).unwrap();
        s.add_eq(&[("r", 1.0), ("a", -1.0), ("b", -1.0)], 0.0).unwrap();
        s.add_le(&[("a", 1.0)], 1.0).unwrap();
        s.add_le(&[("b", 1.0)], 2.0).unwrap();
        s.set_nonnegative("a").unwrap();
        s.set_nonnegative("b").unwrap();
        let p = s.project(&["r"]).unwrap();
        let mut got = rows(&p);
        got.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]));
        assert_eq!(got, vec![(vec![-1.0], 0.0), (vec![1.0], 3.0)]);
    }

    #[test]
    fn infeasibility_is_flagged() {
        let mut s = LinearSystem::new(&["x", "y"]).unwrap();
        s.add_le(&[("y", 1.0)], -1.0).unwrap();
        s.set_nonnegative("y").unwrap();
        let p = s.fm_eliminate("y").unwrap();
        assert!(p.is_infeasible());
        assert_eq!(p.variables(), &["x".to_string()]);
    }

    #[test]
    fn unknown_variable() {
        let s = LinearSystem::new(&["x"]).unwrap();
        assert!(matches!(s.fm_eliminate("z"), Err(Error::UnknownVariable(_))));
    }

    #[test]
    fn rows_are_normalized_and_deduplicated() {
        let mut s = LinearSystem::new(&["x", "y", "z"]).unwrap();
        s.add_le(&[("x", 2.0), ("z", 1.0)], 4.0).unwrap();
        s.add_le(&[("x", 4.0), ("z", 2.0)], 10.0).unwrap();
        s.add_le(&[("z", -1.0)], 0.0).unwrap();
        let p = s.fm_eliminate("z").unwrap();
        assert_eq!(rows(&p), vec![(vec![1.0, 0.0], 2.0)]);
    }

    #[test]
    fn json_round_trip() {
        let mut s = LinearSystem::new(&["x", "y"]).unwrap();
        s.add_le(&[("x", 1.0), ("y", 2.0)], 3.0).unwrap();
        s.add_eq(&[("x", 1.0)], 0.5).unwrap();
        s.set_nonnegative("y").unwrap();
        let back = LinearSystem::from_json(&s.to_json()).unwrap();
        assert_eq!(back.to_json(), s.to_json());
    }
}
