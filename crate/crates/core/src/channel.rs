//! The channel transition tensor and its structural classification.

use serde::{Deserialize, Serialize};

use crate::capacity::HiRegimeReport;
use crate::error::{Error, Result};
use crate::labels::{X1, X2, X3, Y1, Y2};
use crate::prob::{ConditionalFactor, JointPmf, Var, SUM_TOL};

/// Default tolerance for the structural predicates.
pub const CLASSIFY_TOL: f64 = 1e-9;

/// Transition probabilities p(y1, y2 | x1, x2, x3), stored row-major over
/// (x1, x2, x3, y1, y2).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    x1: usize,
    x2: usize,
    x3: usize,
    y1: usize,
    y2: usize,
    p: Vec<f64>,
}

/// On-disk layout of a channel spec.
#[derive(Debug, Serialize, Deserialize)]
struct ChannelDoc {
    x1: usize,
    x2: usize,
    x3: usize,
    y1: usize,
    y2: usize,
    p: Vec<f64>,
}

impl ChannelSpec {
    /// `cards` is `[|X1|, |X2|, |X3|, |Y1|, |Y2|]`.
    pub fn new(cards: [usize; 5], p: Vec<f64>) -> Result<Self> {
        let [x1, x2, x3, y1, y2] = cards;
        for (name, c) in ["x1", "x2", "x3", "y1", "y2"].iter().zip(cards) {
            if c == 0 {
                return Err(Error::ZeroCardinality(name.to_string()));
            }
        }
        let expected = cards.iter().product();
        if p.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                found: p.len(),
            });
        }
        if let Some((index, &value)) = p
            .iter()
            .enumerate()
            .find(|(_, &v)| !v.is_finite() || v < 0.0)
        {
            return Err(Error::NegativeEntry { index, value });
        }
        let ch = ChannelSpec { x1, x2, x3, y1, y2, p };
        let n_out = y1 * y2;
        for (row, chunk) in ch.p.chunks(n_out).enumerate() {
            let sum: f64 = chunk.iter().sum();
            if (sum - 1.0).abs() > SUM_TOL {
                return Err(Error::RowSum {
                    x1: row / (x2 * x3),
                    x2: (row / x3) % x2,
                    x3: row % x3,
                    sum,
                });
            }
        }
        Ok(ch)
    }

    /// Builds a channel from a density `f(x1, x2, x3, y1, y2)`.
    pub fn from_fn(
        cards: [usize; 5],
        mut f: impl FnMut(usize, usize, usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let [x1, x2, x3, y1, y2] = cards;
        let mut p = Vec::with_capacity(cards.iter().product());
        for a in 0..x1 {
            for b in 0..x2 {
                for c in 0..x3 {
                    for d in 0..y1 {
                        for e in 0..y2 {
                            p.push(f(a, b, c, d, e));
                        }
                    }
                }
            }
        }
        ChannelSpec::new(cards, p)
    }

    /// Noiseless channel `(y1, y2) = f(x1, x2, x3)`.
    pub fn deterministic(
        cards: [usize; 5],
        mut f: impl FnMut(usize, usize, usize) -> (usize, usize),
    ) -> Result<Self> {
        ChannelSpec::from_fn(cards, |a, b, c, d, e| {
            if f(a, b, c) == (d, e) {
                1.0
            } else {
                0.0
            }
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ChannelDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        ChannelSpec::new([doc.x1, doc.x2, doc.x3, doc.y1, doc.y2], doc.p)
    }

    pub fn to_json(&self) -> String {
        let doc = ChannelDoc {
            x1: self.x1,
            x2: self.x2,
            x3: self.x3,
            y1: self.y1,
            y2: self.y2,
            p: self.p.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("channel serializes")
    }

    /// `[|X1|, |X2|, |X3|, |Y1|, |Y2|]`
    pub fn cards(&self) -> [usize; 5] {
        [self.x1, self.x2, self.x3, self.y1, self.y2]
    }

    pub fn input_cards(&self) -> [usize; 3] {
        [self.x1, self.x2, self.x3]
    }

    pub fn transition(&self) -> &[f64] {
        &self.p
    }

    pub fn p(&self, x1: usize, x2: usize, x3: usize, y1: usize, y2: usize) -> f64 {
        self.p[(((x1 * self.x2 + x2) * self.x3 + x3) * self.y1 + y1) * self.y2 + y2]
    }

    fn row(&self, x1: usize, x2: usize, x3: usize) -> &[f64] {
        let n = self.y1 * self.y2;
        let r = (x1 * self.x2 + x2) * self.x3 + x3;
        &self.p[r * n..(r + 1) * n]
    }

    /// p(y1 | x1, x2, x3)
    pub fn y1_marginal(&self, x1: usize, x2: usize, x3: usize) -> Vec<f64> {
        self.row(x1, x2, x3)
            .chunks(self.y2)
            .map(|c| c.iter().sum())
            .collect()
    }

    /// p(y2 | x1, x2, x3)
    pub fn y2_marginal(&self, x1: usize, x2: usize, x3: usize) -> Vec<f64> {
        let row = self.row(x1, x2, x3);
        (0..self.y2)
            .map(|e| (0..self.y1).map(|d| row[d * self.y2 + e]).sum())
            .collect()
    }

    /// log2 of the product of all five alphabet sizes; an upper bound on
    /// every rate this crate reports for the channel.
    pub fn rate_cap(&self) -> f64 {
        (self.cards().iter().product::<usize>() as f64).log2().max(1.0)
    }

    /// The channel as the factor p(y1, y2 | x1, x2, x3).
    pub fn as_factor(&self) -> ConditionalFactor {
        ConditionalFactor::new(
            vec![Var::new(Y1, self.y1), Var::new(Y2, self.y2)],
            vec![
                Var::new(X1, self.x1),
                Var::new(X2, self.x2),
                Var::new(X3, self.x3),
            ],
            self.p.clone(),
        )
        .expect("validated channel is a valid factor")
    }

    /// Appends (y1, y2) to a pmf that carries x1, x2 and x3 (in any
    /// position, alongside any other variables).
    pub fn attach_outputs(&self, inputs: &JointPmf) -> Result<JointPmf> {
        let pos = [
            inputs.position(X1)?,
            inputs.position(X2)?,
            inputs.position(X3)?,
        ];
        let cards = inputs.cards();
        let expected = self.input_cards();
        for (k, &p) in pos.iter().enumerate() {
            if cards[p] != expected[k] {
                return Err(Error::CardinalityMismatch(format!(
                    "input `{}` has {} symbols, channel expects {}",
                    inputs.vars()[p].label,
                    cards[p],
                    expected[k]
                )));
            }
        }
        let n_out = self.y1 * self.y2;
        let mut probs = Vec::with_capacity(inputs.len() * n_out);
        let mut odo = crate::prob::Odometer::new(&cards);
        for &q in inputs.probs() {
            let d = odo.digits();
            let row = self.row(d[pos[0]], d[pos[1]], d[pos[2]]);
            probs.extend(row.iter().map(|&r| q * r));
            odo.advance();
        }
        let mut vars = inputs.vars().to_vec();
        vars.push(Var::new(Y1, self.y1));
        vars.push(Var::new(Y2, self.y2));
        JointPmf::new(vars, probs)
    }

    /// Deterministic Y2 symbol, if p(y2|x1,x2,x3) is a point mass within `tol`.
    pub fn y2_function(&self, x1: usize, x2: usize, x3: usize, tol: f64) -> Option<usize> {
        let m = self.y2_marginal(x1, x2, x3);
        let hit = m.iter().position(|&v| (v - 1.0).abs() <= tol)?;
        m.iter()
            .enumerate()
            .all(|(e, &v)| e == hit || v.abs() <= tol)
            .then_some(hit)
    }

    fn inputs(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.x1).flat_map(move |a| {
            (0..self.x2).flat_map(move |b| (0..self.x3).map(move |c| (a, b, c)))
        })
    }
}

/// Structural flags of a channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuralClass {
    pub is_z: bool,
    pub is_degraded: bool,
    pub is_semi_deterministic: bool,
}

/// Full classification outcome. `hi_regime` is only filled in when the
/// high-interference falsifier was run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassReport {
    #[serde(flatten)]
    pub structure: StructuralClass,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hi_regime: Option<HiRegimeReport>,
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Z-structure: p(y1, y2 | x) = p(y1 | x1, x3) p(y2 | x1, x2, x3).
pub fn is_z(ch: &ChannelSpec, tol: f64) -> bool {
    ch.inputs().all(|(a, b, c)| {
        let m1 = ch.y1_marginal(a, b, c);
        let m2 = ch.y2_marginal(a, b, c);
        let x2_free = close(&m1, &ch.y1_marginal(a, 0, c), tol);
        let product = (0..ch.y1)
            .all(|d| (0..ch.y2).all(|e| (ch.p(a, b, c, d, e) - m1[d] * m2[e]).abs() <= tol));
        x2_free && product
    })
}

/// Markov chain (X1, X2) - (Y2, X3) - Y1. Outcomes y2 that an input cannot
/// produce (probability at most `tol`) place no constraint.
pub fn is_degraded(ch: &ChannelSpec, tol: f64) -> bool {
    for c in 0..ch.x3 {
        for e in 0..ch.y2 {
            let mut reference: Option<Vec<f64>> = None;
            for a in 0..ch.x1 {
                for b in 0..ch.x2 {
                    let py2 = ch.y2_marginal(a, b, c)[e];
                    if py2 <= tol {
                        continue;
                    }
                    let cond: Vec<f64> = (0..ch.y1).map(|d| ch.p(a, b, c, d, e) / py2).collect();
                    match &reference {
                        None => reference = Some(cond),
                        Some(r) if close(r, &cond, tol) => {}
                        Some(_) => return false,
                    }
                }
            }
        }
    }
    true
}

/// Y2 is a deterministic function of (X1, X2, X3).
pub fn is_semi_deterministic(ch: &ChannelSpec, tol: f64) -> bool {
    ch.inputs().all(|(a, b, c)| {
        ch.y2_marginal(a, b, c)
            .iter()
            .all(|&v| v.abs() <= tol || (v - 1.0).abs() <= tol)
    })
}

pub fn classify(ch: &ChannelSpec, tol: f64) -> StructuralClass {
    StructuralClass {
        is_z: is_z(ch, tol),
        is_degraded: is_degraded(ch, tol),
        is_semi_deterministic: is_semi_deterministic(ch, tol),
    }
}

/// Fixes destination 2's transmitted symbol, leaving a channel with a single
/// X3 symbol.
pub fn pin_x3(ch: &ChannelSpec, symbol: usize) -> Result<ChannelSpec> {
    if symbol >= ch.x3 {
        return Err(Error::IndexOutOfRange {
            index: symbol,
            len: ch.x3,
        });
    }
    ChannelSpec::from_fn([ch.x1, ch.x2, 1, ch.y1, ch.y2], |a, b, _, d, e| {
        ch.p(a, b, symbol, d, e)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn clean() -> ChannelSpec {
        ChannelSpec::deterministic([2, 2, 2, 2, 2], |a, b, _| (a, b)).unwrap()
    }

    fn degraded_z() -> ChannelSpec {
        ChannelSpec::deterministic([2, 2, 2, 2, 4], |a, b, c| (a ^ c, 2 * a + b)).unwrap()
    }

    #[test]
    fn load_examples() {
        let ch = ChannelSpec::from_json(&clean().to_json()).unwrap();
        assert_eq!(ch, clean());

        let mut p = clean().transition().to_vec();
        let base = (2 * 2 + 1) * 4;
        // row (x1=1, x2=0, x3=1) puts all mass on (y1=1, y2=0)
        p[base + 2] -= 0.1;
        let doc = serde_json::json!({"x1":2,"x2":2,"x3":2,"y1":2,"y2":2,"p":p}).to_string();
        match ChannelSpec::from_json(&doc) {
            Err(Error::RowSum { x1, x2, x3, sum }) => {
                assert_eq!((x1, x2, x3), (1, 0, 1));
                assert!((sum - 0.9).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }

        let ch = clean();
        let short = &ch.transition()[..31];
        let doc = serde_json::json!({"x1":2,"x2":2,"x3":2,"y1":2,"y2":2,"p":short}).to_string();
        assert!(matches!(
            ChannelSpec::from_json(&doc),
            Err(Error::ShapeMismatch { expected: 32, found: 31 })
        ));
        assert!(matches!(ChannelSpec::from_json("{\"x1\":"), Err(Error::Parse(_))));
    }

    #[test]
    fn classify_examples() {
        let c = classify(&clean(), CLASSIFY_TOL);
        assert!(c.is_z && !c.is_degraded && c.is_semi_deterministic);

        let c = classify(&degraded_z(), CLASSIFY_TOL);
        assert!(c.is_z && c.is_degraded && c.is_semi_deterministic);

        let xor = ChannelSpec::deterministic([2, 2, 2, 2, 2], |a, b, _| (a ^ b, a ^ b)).unwrap();
        assert!(!classify(&xor, CLASSIFY_TOL).is_z);
    }

    #[test]
    fn noisy_y1_given_y2_is_z_but_noisy_y2_is_not_semidet() {
        let ch = ChannelSpec::from_fn([2, 2, 1, 2, 2], |a, b, _, d, e| {
            let p1 = if d == a { 0.9 } else { 0.1 };
            let p2 = if e == b { 0.8 } else { 0.2 };
            p1 * p2
        })
        .unwrap();
        let c = classify(&ch, CLASSIFY_TOL);
        assert!(c.is_z);
        assert!(!c.is_semi_deterministic);
    }

    #[test]
    fn pin_examples() {
        let pinned = pin_x3(&clean(), 0).unwrap();
        assert_eq!(pinned.cards(), [2, 2, 1, 2, 2]);
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(pinned.p(a, b, 0, a, b), 1.0);
            }
        }
        let xor3 = ChannelSpec::deterministic([2, 2, 2, 2, 2], |a, b, c| (a ^ c, b)).unwrap();
        let pinned = pin_x3(&xor3, 1).unwrap();
        for a in 0..2 {
            assert_eq!(pinned.p(a, 0, 0, 1 - a, 0), 1.0);
        }
        assert!(matches!(
            pin_x3(&clean(), 5),
            Err(Error::IndexOutOfRange { index: 5, len: 2 })
        ));
    }
}
