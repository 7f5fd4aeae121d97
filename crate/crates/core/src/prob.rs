//! Dense joint probability mass functions over named finite variables.
//!
//! A [`JointPmf`] stores one probability per assignment of its variables in
//! row-major order (the last declared variable varies fastest). Information
//! measures are reported in bits, with the `0 log 0 = 0` convention and
//! conditioning assignments below [`SKIP_MASS`] skipped entirely.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass of a pmf and on conditional row sums.
pub const SUM_TOL: f64 = 1e-9;

/// Conditioning assignments lighter than this are skipped.
pub const SKIP_MASS: f64 = 1e-15;

/// Information values below `-NEG_TOL` indicate a bug rather than rounding.
pub const NEG_TOL: f64 = 1e-9;

/// A named finite random variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Var {
    pub label: String,
    pub card: usize,
}

impl Var {
    pub fn new(label: impl Into<String>, card: usize) -> Self {
        Var {
            label: label.into(),
            card,
        }
    }
}

/// Mixed-radix counter over a list of cardinalities, last digit fastest.
#[derive(Debug, Clone)]
pub(crate) struct Odometer {
    cards: Vec<usize>,
    digits: Vec<usize>,
    done: bool,
}

impl Odometer {
    pub(crate) fn new(cards: &[usize]) -> Self {
        Odometer {
            cards: cards.to_vec(),
            digits: vec![0; cards.len()],
            done: cards.contains(&0),
        }
    }

    pub(crate) fn digits(&self) -> &[usize] {
        &self.digits
    }

    /// Advances and returns the position of the digit that was incremented
    /// (every digit after it was reset to zero), or `None` once exhausted.
    pub(crate) fn advance(&mut self) -> Option<usize> {
        for k in (0..self.cards.len()).rev() {
            self.digits[k] += 1;
            if self.digits[k] < self.cards[k] {
                return Some(k);
            }
            self.digits[k] = 0;
        }
        self.done = true;
        None
    }

    pub(crate) fn is_done(&self) -> bool {
        self.done
    }
}

/// Row-major flat index of `digits` under `cards`.
pub(crate) fn flat_index(cards: &[usize], digits: &[usize]) -> usize {
    cards
        .iter()
        .zip(digits)
        .fold(0, |acc, (&c, &d)| acc * c + d)
}

/// Inverse of [`flat_index`].
#[cfg(test)]
pub(crate) fn unflatten(cards: &[usize], mut index: usize) -> Vec<usize> {
    let mut digits = vec![0; cards.len()];
    for k in (0..cards.len()).rev() {
        digits[k] = index % cards[k];
        index /= cards[k];
    }
    digits
}

fn check_vars(vars: &[Var]) -> Result<usize> {
    let mut seen = HashSet::new();
    let mut size = 1usize;
    for v in vars {
        if !seen.insert(v.label.as_str()) {
            return Err(Error::DuplicateLabel(v.label.clone()));
        }
        if v.card == 0 {
            return Err(Error::ZeroCardinality(v.label.clone()));
        }
        size *= v.card;
    }
    Ok(size)
}

/// Checks every [`JointPmf`] invariant, reporting the first violation.
pub fn validate_pmf(vars: &[Var], probs: &[f64]) -> Result<()> {
    let size = check_vars(vars)?;
    if probs.len() != size {
        return Err(Error::ShapeMismatch {
            expected: size,
            found: probs.len(),
        });
    }
    if let Some((index, &value)) = probs
        .iter()
        .enumerate()
        .find(|(_, &p)| !p.is_finite() || p < 0.0)
    {
        return Err(Error::NegativeEntry { index, value });
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::SumNotOne { sum });
    }
    Ok(())
}

/// Joint distribution over an ordered list of named variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    vars: Vec<Var>,
    probs: Vec<f64>,
}

impl JointPmf {
    pub fn new(vars: Vec<Var>, probs: Vec<f64>) -> Result<Self> {
        validate_pmf(&vars, &probs)?;
        Ok(JointPmf { vars, probs })
    }

    /// Uniform distribution over all assignments.
    pub fn uniform(vars: Vec<Var>) -> Result<Self> {
        let size = check_vars(&vars)?;
        Ok(JointPmf {
            vars,
            probs: vec![1.0 / size as f64; size],
        })
    }

    /// All mass on one assignment.
    pub fn point_mass(vars: Vec<Var>, at: &[usize]) -> Result<Self> {
        let size = check_vars(&vars)?;
        let cards: Vec<usize> = vars.iter().map(|v| v.card).collect();
        if at.len() != cards.len() {
            return Err(Error::ShapeMismatch {
                expected: cards.len(),
                found: at.len(),
            });
        }
        for (&d, &c) in at.iter().zip(&cards) {
            if d >= c {
                return Err(Error::IndexOutOfRange { index: d, len: c });
            }
        }
        let mut probs = vec![0.0; size];
        probs[flat_index(&cards, at)] = 1.0;
        Ok(JointPmf { vars, probs })
    }

    /// Builds a pmf by evaluating `f` on every assignment.
    pub fn from_fn(vars: Vec<Var>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        check_vars(&vars)?;
        let cards: Vec<usize> = vars.iter().map(|v| v.card).collect();
        let mut probs = Vec::with_capacity(cards.iter().product());
        let mut odo = Odometer::new(&cards);
        while !odo.is_done() {
            probs.push(f(odo.digits()));
            odo.advance();
        }
        JointPmf::new(vars, probs)
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn cards(&self) -> Vec<usize> {
        self.vars.iter().map(|v| v.card).collect()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn card(&self, label: &str) -> Result<usize> {
        Ok(self.vars[self.position(label)?].card)
    }

    pub fn has(&self, label: &str) -> bool {
        self.vars.iter().any(|v| v.label == label)
    }

    /// Probability of a full assignment given in variable order.
    pub fn prob(&self, assignment: &[usize]) -> f64 {
        self.probs[flat_index(&self.cards(), assignment)]
    }

    pub fn validate(&self) -> Result<()> {
        validate_pmf(&self.vars, &self.probs)
    }

    fn positions(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let mut seen = HashSet::new();
        labels
            .iter()
            .map(|l| {
                if !seen.insert(*l) {
                    return Err(Error::DuplicateLabel(l.to_string()));
                }
                self.position(l)
            })
            .collect()
    }

    /// Sums `probs` onto the variables at `keep`, in that order.
    fn reduce(&self, keep: &[usize]) -> Vec<f64> {
        let cards = self.cards();
        let kept_cards: Vec<usize> = keep.iter().map(|&k| cards[k]).collect();
        let mut dest_stride = vec![0usize; cards.len()];
        let mut stride = 1usize;
        for (&k, &c) in keep.iter().zip(&kept_cards).rev() {
            dest_stride[k] = stride;
            stride *= c;
        }
        let mut out = vec![0.0; stride];
        let mut odo = Odometer::new(&cards);
        let mut dest = 0usize;
        for &p in &self.probs {
            out[dest] += p;
            match odo.advance() {
                Some(k) => {
                    dest += dest_stride[k];
                    for j in k + 1..cards.len() {
                        dest -= dest_stride[j] * (cards[j] - 1);
                    }
                }
                None => break,
            }
        }
        out
    }

    /// Marginal over `keep`, with variables reordered to the order given.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointPmf> {
        let pos = self.positions(keep)?;
        let probs = self.reduce(&pos);
        let vars = pos.iter().map(|&k| self.vars[k].clone()).collect();
        Ok(JointPmf { vars, probs })
    }

    fn disjoint_groups(&self, groups: &[&[&str]]) -> Result<Vec<Vec<usize>>> {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(groups.len());
        for g in groups {
            let mut pos = Vec::with_capacity(g.len());
            for l in g.iter() {
                let p = self.position(l)?;
                if !seen.insert(p) {
                    return Err(Error::OverlappingGroups(l.to_string()));
                }
                pos.push(p);
            }
            out.push(pos);
        }
        Ok(out)
    }

    fn group_size(&self, pos: &[usize]) -> usize {
        pos.iter().map(|&k| self.vars[k].card).product()
    }

    /// I(A;B|C) in bits. `c` may be empty.
    pub fn conditional_mutual_information(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
        let groups = self.disjoint_groups(&[c, a, b])?;
        let (nc, na, nb) = (
            self.group_size(&groups[0]),
            self.group_size(&groups[1]),
            self.group_size(&groups[2]),
        );
        let order: Vec<usize> = groups.concat();
        let cab = self.reduce(&order);
        let mut pa = vec![0.0; na];
        let mut pb = vec![0.0; nb];
        let mut total = 0.0;
        for ci in 0..nc {
            let block = &cab[ci * na * nb..(ci + 1) * na * nb];
            let pc: f64 = block.iter().sum();
            if pc < SKIP_MASS {
                continue;
            }
            pa.iter_mut().for_each(|x| *x = 0.0);
            pb.iter_mut().for_each(|x| *x = 0.0);
            for ai in 0..na {
                for bi in 0..nb {
                    let p = block[ai * nb + bi];
                    pa[ai] += p;
                    pb[bi] += p;
                }
            }
            for ai in 0..na {
                for bi in 0..nb {
                    let p = block[ai * nb + bi];
                    if p > 0.0 {
                        total += p * (p * pc / (pa[ai] * pb[bi])).log2();
                    }
                }
            }
        }
        clamp_information(total)
    }

    /// I(A;B) in bits.
    pub fn mutual_information(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        self.conditional_mutual_information(a, b, &[])
    }

    /// H(A|C) in bits. `c` may be empty.
    pub fn conditional_entropy(&self, a: &[&str], c: &[&str]) -> Result<f64> {
        let groups = self.disjoint_groups(&[c, a])?;
        let (nc, na) = (self.group_size(&groups[0]), self.group_size(&groups[1]));
        let ca = self.reduce(&groups.concat());
        let mut total = 0.0;
        for ci in 0..nc {
            let block = &ca[ci * na..(ci + 1) * na];
            let pc: f64 = block.iter().sum();
            if pc < SKIP_MASS {
                continue;
            }
            for &p in block {
                if p > 0.0 {
                    total += p * (pc / p).log2();
                }
            }
        }
        clamp_information(total)
    }

    /// H(A) in bits.
    pub fn entropy(&self, a: &[&str]) -> Result<f64> {
        self.conditional_entropy(a, &[])
    }

    /// Re-derives p(targets | given). Rows whose conditioning assignment has
    /// no mass are filled with the uniform distribution.
    pub fn conditional(&self, targets: &[&str], given: &[&str]) -> Result<ConditionalFactor> {
        let groups = self.disjoint_groups(&[given, targets])?;
        let (ng, nt) = (self.group_size(&groups[0]), self.group_size(&groups[1]));
        let mut table = self.reduce(&groups.concat());
        for row in table.chunks_mut(nt) {
            let s: f64 = row.iter().sum();
            if s < SKIP_MASS {
                row.iter_mut().for_each(|x| *x = 1.0 / nt as f64);
            } else {
                row.iter_mut().for_each(|x| *x /= s);
            }
        }
        debug_assert_eq!(table.len(), ng * nt);
        let pick = |pos: &[usize]| pos.iter().map(|&k| self.vars[k].clone()).collect();
        Ok(ConditionalFactor {
            targets: pick(&groups[1]),
            given: pick(&groups[0]),
            table,
        })
    }
}

fn clamp_information(value: f64) -> Result<f64> {
    if value < -NEG_TOL || value.is_nan() {
        return Err(Error::NegativeInformation(value));
    }
    Ok(value.max(0.0))
}

/// A conditional distribution p(targets | given).
///
/// The table holds one distribution over joint target assignments per joint
/// conditioning assignment: `table[g * n_targets + t]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalFactor {
    targets: Vec<Var>,
    given: Vec<Var>,
    table: Vec<f64>,
}

impl ConditionalFactor {
    pub fn new(targets: Vec<Var>, given: Vec<Var>, table: Vec<f64>) -> Result<Self> {
        let mut all = targets.clone();
        all.extend(given.iter().cloned());
        check_vars(&all)?;
        let nt: usize = targets.iter().map(|v| v.card).product();
        let ng: usize = given.iter().map(|v| v.card).product();
        if table.len() != nt * ng {
            return Err(Error::ShapeMismatch {
                expected: nt * ng,
                found: table.len(),
            });
        }
        if let Some((index, &value)) = table
            .iter()
            .enumerate()
            .find(|(_, &p)| !p.is_finite() || p < 0.0)
        {
            return Err(Error::NegativeEntry { index, value });
        }
        for row in table.chunks(nt) {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > SUM_TOL {
                return Err(Error::SumNotOne { sum });
            }
        }
        Ok(ConditionalFactor {
            targets,
            given,
            table,
        })
    }

    /// Builds the table row by row; `f` receives the conditioning digits and
    /// returns the distribution over joint target assignments.
    pub fn from_fn(
        targets: Vec<Var>,
        given: Vec<Var>,
        mut f: impl FnMut(&[usize]) -> Vec<f64>,
    ) -> Result<Self> {
        let gcards: Vec<usize> = given.iter().map(|v| v.card).collect();
        let mut table = Vec::new();
        let mut odo = Odometer::new(&gcards);
        while !odo.is_done() {
            table.extend(f(odo.digits()));
            odo.advance();
        }
        ConditionalFactor::new(targets, given, table)
    }

    /// Deterministic factor: `f` maps conditioning digits to target digits.
    pub fn deterministic(
        targets: Vec<Var>,
        given: Vec<Var>,
        mut f: impl FnMut(&[usize]) -> Vec<usize>,
    ) -> Result<Self> {
        let tcards: Vec<usize> = targets.iter().map(|v| v.card).collect();
        let nt: usize = tcards.iter().product();
        ConditionalFactor::from_fn(targets, given, |g| {
            let t = f(g);
            let mut row = vec![0.0; nt];
            if t.len() == tcards.len() && t.iter().zip(&tcards).all(|(d, c)| d < c) {
                row[flat_index(&tcards, &t)] = 1.0;
            }
            row
        })
    }

    pub fn uniform(targets: Vec<Var>, given: Vec<Var>) -> Result<Self> {
        let nt: usize = targets.iter().map(|v| v.card).product();
        ConditionalFactor::from_fn(targets, given, |_| vec![1.0 / nt as f64; nt])
    }

    pub fn targets(&self) -> &[Var] {
        &self.targets
    }

    pub fn given(&self) -> &[Var] {
        &self.given
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn n_targets(&self) -> usize {
        self.targets.iter().map(|v| v.card).product()
    }

    pub fn n_given(&self) -> usize {
        self.given.iter().map(|v| v.card).product()
    }

    /// p(target assignment | conditioning assignment), both as digit lists.
    pub fn prob(&self, given: &[usize], target: &[usize]) -> f64 {
        let gcards: Vec<usize> = self.given.iter().map(|v| v.card).collect();
        let tcards: Vec<usize> = self.targets.iter().map(|v| v.card).collect();
        self.table[flat_index(&gcards, given) * self.n_targets() + flat_index(&tcards, target)]
    }

    /// Largest absolute table difference to `other`, restricted to
    /// conditioning rows where `weight` (indexed by conditioning assignment)
    /// exceeds [`SKIP_MASS`].
    pub fn max_row_difference(&self, other: &ConditionalFactor, weight: &[f64]) -> f64 {
        let nt = self.n_targets();
        self.table
            .chunks(nt)
            .zip(other.table.chunks(nt))
            .zip(weight)
            .filter(|(_, &w)| w > SKIP_MASS)
            .flat_map(|((a, b), _)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// Multiplies a sequential factorization out into the joint distribution.
///
/// Each factor may only condition on targets of earlier factors. The output
/// variables are the factor targets in order.
pub fn joint_from_factors(factors: &[ConditionalFactor]) -> Result<JointPmf> {
    let mut vars: Vec<Var> = Vec::new();
    let mut probs = vec![1.0];
    for factor in factors {
        let mut given_pos = Vec::with_capacity(factor.given.len());
        for g in &factor.given {
            match vars.iter().position(|v| v.label == g.label) {
                Some(p) if vars[p].card == g.card => given_pos.push(p),
                Some(_) => {
                    return Err(Error::CardinalityMismatch(format!(
                        "conditioning variable `{}` has a different cardinality than its definition",
                        g.label
                    )))
                }
                None => return Err(Error::DanglingConditioner(g.label.clone())),
            }
        }
        for t in &factor.targets {
            if vars.iter().any(|v| v.label == t.label) {
                return Err(Error::RepeatedTarget(t.label.clone()));
            }
        }
        let cards: Vec<usize> = vars.iter().map(|v| v.card).collect();
        let mut gstride = vec![0usize; cards.len()];
        let mut stride = 1usize;
        for (&p, g) in given_pos.iter().zip(&factor.given).rev() {
            gstride[p] = stride;
            stride *= g.card;
        }
        let nt = factor.n_targets();
        let mut next = vec![0.0; probs.len() * nt];
        let mut odo = Odometer::new(&cards);
        let mut gi = 0usize;
        for (i, &p) in probs.iter().enumerate() {
            if p > 0.0 {
                let row = &factor.table[gi * nt..(gi + 1) * nt];
                for (slot, &q) in next[i * nt..(i + 1) * nt].iter_mut().zip(row) {
                    *slot = p * q;
                }
            }
            match odo.advance() {
                Some(k) => {
                    gi += gstride[k];
                    for j in k + 1..cards.len() {
                        gi -= gstride[j] * (cards[j] - 1);
                    }
                }
                None => break,
            }
        }
        probs = next;
        vars.extend(factor.targets.iter().cloned());
    }
    JointPmf::new(vars, probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(l: &str) -> Var {
        Var::new(l, 2)
    }

    fn diagonal() -> JointPmf {
        JointPmf::new(vec![bin("a"), bin("b")], vec![0.5, 0.0, 0.0, 0.5]).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(validate_pmf(&[bin("a"), bin("b")], &[0.25; 4]).is_ok());
        assert!(matches!(
            validate_pmf(&[bin("a")], &[0.5, 0.6]),
            Err(Error::SumNotOne { .. })
        ));
        assert!(matches!(
            validate_pmf(&[bin("a")], &[-0.1, 1.1]),
            Err(Error::NegativeEntry { index: 0, .. })
        ));
        assert!(matches!(
            validate_pmf(&[bin("a")], &[1.0]),
            Err(Error::ShapeMismatch { expected: 2, found: 1 })
        ));
        assert!(matches!(
            validate_pmf(&[bin("a"), bin("a")], &[0.25; 4]),
            Err(Error::DuplicateLabel(_))
        ));
    }

    #[test]
    fn factors_multiply_out() {
        let a = ConditionalFactor::uniform(vec![bin("a")], vec![]).unwrap();
        let b = ConditionalFactor::uniform(vec![bin("b")], vec![]).unwrap();
        let j = joint_from_factors(&[a.clone(), b]).unwrap();
        assert_eq!(j.probs(), &[0.25; 4]);

        let copy = ConditionalFactor::deterministic(vec![bin("b")], vec![bin("a")], |g| vec![g[0]])
            .unwrap();
        let j = joint_from_factors(&[a, copy]).unwrap();
        assert_eq!(j.probs(), diagonal().probs());
    }

    #[test]
    fn factor_ordering_errors() {
        let copy = ConditionalFactor::deterministic(vec![bin("b")], vec![bin("a")], |g| vec![g[0]])
            .unwrap();
        assert!(matches!(
            joint_from_factors(&[copy]),
            Err(Error::DanglingConditioner(l)) if l == "a"
        ));
        let a = ConditionalFactor::uniform(vec![bin("a")], vec![]).unwrap();
        assert!(matches!(
            joint_from_factors(&[a.clone(), a]),
            Err(Error::RepeatedTarget(_))
        ));
    }

    #[test]
    fn marginal_examples() {
        let m = diagonal().marginalize(&["a"]).unwrap();
        assert_eq!(m.probs(), &[0.5, 0.5]);
        let same = diagonal().marginalize(&["a", "b"]).unwrap();
        assert_eq!(same, diagonal());
        let swapped = JointPmf::new(vec![bin("a"), bin("b")], vec![0.1, 0.2, 0.3, 0.4])
            .unwrap()
            .marginalize(&["b", "a"])
            .unwrap();
        assert_eq!(swapped.probs(), &[0.1, 0.3, 0.2, 0.4]);
        assert!(matches!(
            diagonal().marginalize(&["z"]),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn information_examples() {
        let indep = JointPmf::uniform(vec![bin("a"), bin("b")]).unwrap();
        assert_eq!(indep.mutual_information(&["a"], &["b"]).unwrap(), 0.0);
        assert!((diagonal().mutual_information(&["a"], &["b"]).unwrap() - 1.0).abs() < 1e-15);
        assert!((indep.entropy(&["a"]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(diagonal().conditional_entropy(&["b"], &["a"]).unwrap(), 0.0);
        assert!(matches!(
            diagonal().conditional_mutual_information(&["a"], &["a"], &[]),
            Err(Error::OverlappingGroups(_))
        ));
        assert!(matches!(
            diagonal().conditional_entropy(&["a"], &["q"]),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn conditional_rederivation() {
        let j = JointPmf::new(vec![bin("a"), bin("b")], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let f = j.conditional(&["b"], &["a"]).unwrap();
        assert!((f.prob(&[0], &[1]) - 2.0 / 3.0).abs() < 1e-15);
        assert!((f.prob(&[1], &[0]) - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn odometer_matches_flat_index() {
        let cards = [2, 3, 4];
        let mut odo = Odometer::new(&cards);
        let mut i = 0;
        while !odo.is_done() {
            assert_eq!(flat_index(&cards, odo.digits()), i);
            assert_eq!(unflatten(&cards, i), odo.digits());
            i += 1;
            odo.advance();
        }
        assert_eq!(i, 24);
    }
}
