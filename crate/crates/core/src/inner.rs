//! Inner bound from rate splitting, Gel'fand-Pinsker and Marton binning,
//! decode-forward of public sub-messages and compress-forward at
//! destination 2.
//!
//! A single distribution is described by a [`FactorizationT1`] of nine
//! conditional factors around the channel. [`inner_constants`] evaluates the
//! mutual-information constants of that distribution, and
//! [`region_for_distribution`] turns them into a rate region by building the
//! constraint system over the split rates and eliminating everything except
//! `(R1, R2)`. [`inner_region`] takes the union over sampled distributions.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::labels::{U1, U1P, U2, U2P, V1, V12, V2, X1, X2, X3, Y1, Y2, YHAT2};
use crate::polytope::{hull_union, project_to_region, LinearSystem, Region2D};
use crate::prob::{joint_from_factors, ConditionalFactor, JointPmf, Var};
use crate::search::{dirichlet, par_map, substream};

/// Slack on the compress-forward admissibility test.
pub const ADMISSIBLE_TOL: f64 = 1e-9;

/// Alphabet sizes of the auxiliary variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxCards {
    pub u1p: usize,
    pub u1: usize,
    pub v1: usize,
    pub u2p: usize,
    pub u2: usize,
    pub v12: usize,
    pub v2: usize,
    pub yhat2: usize,
}

impl Default for AuxCards {
    fn default() -> Self {
        AuxCards::uniform(2)
    }
}

impl AuxCards {
    pub fn uniform(k: usize) -> Self {
        AuxCards {
            u1p: k,
            u1: k,
            v1: k,
            u2p: k,
            u2: k,
            v12: k,
            v2: k,
            yhat2: k,
        }
    }
}

/// Alphabet sizes of every variable in the inner-bound joint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct T1Cards {
    pub aux: AuxCards,
    pub x1: usize,
    pub x2: usize,
    pub x3: usize,
    pub y2: usize,
}

impl T1Cards {
    pub fn for_channel(ch: &ChannelSpec, aux: AuxCards) -> Self {
        let [x1, x2, x3, _, y2] = ch.cards();
        T1Cards { aux, x1, x2, x3, y2 }
    }

    fn var(&self, label: &str) -> Var {
        let a = &self.aux;
        let card = match label {
            U1P => a.u1p,
            U1 => a.u1,
            V1 => a.v1,
            U2P => a.u2p,
            U2 => a.u2,
            V12 => a.v12,
            V2 => a.v2,
            YHAT2 => a.yhat2,
            X1 => self.x1,
            X2 => self.x2,
            X3 => self.x3,
            Y2 => self.y2,
            _ => unreachable!("unknown label {label}"),
        };
        Var::new(label, card)
    }
}

/// The nine factors of the inner-bound distribution, in multiplication order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    U1p,
    U1,
    V1,
    U2p,
    U2V12V2,
    X1,
    X2,
    X3,
    YHat2,
}

impl Slot {
    pub const ALL: [Slot; 9] = [
        Slot::U1p,
        Slot::U1,
        Slot::V1,
        Slot::U2p,
        Slot::U2V12V2,
        Slot::X1,
        Slot::X2,
        Slot::X3,
        Slot::YHat2,
    ];

    /// Target and conditioning labels of this factor.
    pub fn signature(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            Slot::U1p => (&[U1P], &[]),
            Slot::U1 => (&[U1], &[U1P]),
            Slot::V1 => (&[V1], &[U1P, U1]),
            Slot::U2p => (&[U2P], &[U1P]),
            Slot::U2V12V2 => (&[U2, V12, V2], &[U1P, U1, V1, U2P]),
            Slot::X1 => (&[X1], &[U1P, U1, V1]),
            Slot::X2 => (&[X2], &[U1P, U1, V1, U2P, U2, V12, V2]),
            Slot::X3 => (&[X3], &[U1P, U2P]),
            Slot::YHat2 => (&[YHAT2], &[U1P, U1, U2P, U2, X3, Y2]),
        }
    }

    fn vars(self, cards: &T1Cards) -> (Vec<Var>, Vec<Var>) {
        let (t, g) = self.signature();
        (
            t.iter().map(|l| cards.var(l)).collect(),
            g.iter().map(|l| cards.var(l)).collect(),
        )
    }
}

/// One inner-bound input distribution (everything except the channel).
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationT1 {
    factors: Vec<ConditionalFactor>,
}

impl FactorizationT1 {
    /// Accepts the nine factors in [`Slot::ALL`] order; each must carry
    /// exactly the slot's target and conditioning labels.
    pub fn new(factors: Vec<ConditionalFactor>) -> Result<Self> {
        if factors.len() != Slot::ALL.len() {
            return Err(Error::InvalidFactor(format!(
                "expected {} factors, got {}",
                Slot::ALL.len(),
                factors.len()
            )));
        }
        for (slot, f) in Slot::ALL.iter().zip(&factors) {
            let (t, g) = slot.signature();
            let tl: Vec<&str> = f.targets().iter().map(|v| v.label.as_str()).collect();
            let gl: Vec<&str> = f.given().iter().map(|v| v.label.as_str()).collect();
            if tl != t || gl != g {
                return Err(Error::InvalidFactor(format!(
                    "{slot:?} factor is p({}|{}), expected p({}|{})",
                    tl.join(","),
                    gl.join(","),
                    t.join(","),
                    g.join(",")
                )));
            }
        }
        Ok(FactorizationT1 { factors })
    }

    /// Builds every factor from `row(slot, conditioning digits)`, which returns
    /// the distribution over the slot's joint target assignment.
    pub fn from_fn(cards: &T1Cards, mut row: impl FnMut(Slot, &[usize]) -> Vec<f64>) -> Result<Self> {
        let factors = Slot::ALL
            .iter()
            .map(|&slot| {
                let (t, g) = slot.vars(cards);
                ConditionalFactor::from_fn(t, g, |d| row(slot, d))
            })
            .collect::<Result<Vec<_>>>()?;
        FactorizationT1::new(factors)
    }

    pub fn factor(&self, slot: Slot) -> &ConditionalFactor {
        &self.factors[Slot::ALL.iter().position(|&s| s == slot).expect("slot")]
    }

    pub fn factors(&self) -> &[ConditionalFactor] {
        &self.factors
    }

    fn card(&self, slot: Slot, k: usize) -> usize {
        self.factor(slot).targets()[k].card
    }

    /// Same distribution with the compress-forward description `yhat2`
    /// replaced by a constant.
    pub fn with_constant_yhat(&self) -> FactorizationT1 {
        let mut factors = self.factors.clone();
        let old = &factors[8];
        let n = old.n_targets();
        factors[8] = ConditionalFactor::from_fn(old.targets().to_vec(), old.given().to_vec(), |_| {
            let mut r = vec![0.0; n];
            r[0] = 1.0;
            r
        })
        .expect("constant factor");
        FactorizationT1 { factors }
    }

    pub fn yhat_is_constant(&self) -> bool {
        let f = self.factor(Slot::YHat2);
        let n = f.n_targets();
        n == 1 || f.table().chunks(n).all(|r| r[0] == 1.0)
    }
}

/// Multiplies the factorization and the channel into the 13-variable joint
/// over `(u1p, u1, v1, u2p, u2, v12, v2, x1, x2, x3, y1, y2, yhat2)`.
pub fn assemble_joint_t1(f: &FactorizationT1, ch: &ChannelSpec) -> Result<JointPmf> {
    let [x1, x2, x3, _, y2] = ch.cards();
    let got = [
        f.card(Slot::X1, 0),
        f.card(Slot::X2, 0),
        f.card(Slot::X3, 0),
        f.factor(Slot::YHat2).given()[4..]
            .iter()
            .find(|v| v.label == Y2)
            .map_or(0, |v| v.card),
    ];
    if got != [x1, x2, x3, y2] {
        return Err(Error::CardinalityMismatch(format!(
            "factorization has (|X1|,|X2|,|X3|,|Y2|) = {got:?}, channel has {:?}",
            [x1, x2, x3, y2]
        )));
    }
    let mut factors: Vec<ConditionalFactor> = f.factors[..8].to_vec();
    factors.push(ch.as_factor());
    factors.push(f.factors[8].clone());
    joint_from_factors(&factors)
}

/// The mutual-information constants of one inner-bound distribution, in
/// bits. Letters follow the customary naming of this rate region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerConstants {
    /// I(V1; U2 | U1p, U1, U2p)
    pub a: f64,
    /// I(Y1, V1, V12; Yhat2 | U1p, U1, U2p, U2, X3)
    pub b: f64,
    /// I(Y2; Yhat2 | U1p, U1, U2p, U2, X3)
    pub c: f64,
    /// I(Y1; U1p, U1, V1, U2p, U2, V12, X3)
    pub d: f64,
    /// I(Y1; V1, U2p, U2, V12, X3 | U1p, U1)
    pub e: f64,
    /// I(Y1; V1, V12, X3 | U1p, U1, U2p, U2)
    pub f: f64,
    /// I(Y1, Yhat2; V1, V12 | U1p, U1, U2p, U2, X3)
    pub g: f64,
    /// I(Y1; U2p, U2, V12, X3 | U1p, U1, V1)
    pub h: f64,
    /// I(Y1; V12, X3 | U1p, U1, V1, U2p, U2)
    pub i: f64,
    /// I(Y1, Yhat2; V12 | U1p, U1, V1, U2p, U2, X3)
    pub j: f64,
    /// I(Y2; U1, U2, V2 | U1p, U2p, X3)
    pub k: f64,
    /// I(Y2; U2, V2 | U1p, U1, U2p, X3)
    pub l: f64,
    /// I(Y2; V2 | U1p, U1, U2p, U2, X3)
    pub m: f64,
    /// I(V1; V2 | U1p, U1, U2p, U2), floor on the Marton binning rate of V2
    pub n1: f64,
    /// I(V1, V12; V2 | U1p, U1, U2p, U2), floor on the combined binning rates
    pub n2: f64,
    /// I(Y1; X3 | U1p, U1, V1, U2p, U2, V12), relay gain in the admissibility test
    pub p: f64,
}

impl InnerConstants {
    pub const NAMES: [&'static str; 16] = [
        "A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K", "L", "M", "N1", "N2", "P",
    ];

    pub fn as_array(&self) -> [f64; 16] {
        [
            self.a, self.b, self.c, self.d, self.e, self.f, self.g, self.h, self.i, self.j, self.k,
            self.l, self.m, self.n1, self.n2, self.p,
        ]
    }

    pub fn from_array(v: [f64; 16]) -> Self {
        let [a, b, c, d, e, f, g, h, i, j, k, l, m, n1, n2, p] = v;
        InnerConstants {
            a,
            b,
            c,
            d,
            e,
            f,
            g,
            h,
            i,
            j,
            k,
            l,
            m,
            n1,
            n2,
            p,
        }
    }

    /// Chain-rule orderings every genuine constant vector satisfies:
    /// `D>=E>=H>=P`, `F>=I`, `G>=J`, `K>=L>=M`, `N2>=N1`.
    pub fn ordering_violation(&self) -> f64 {
        [
            self.e - self.d,
            self.h - self.e,
            self.p - self.h,
            self.i - self.f,
            self.j - self.g,
            self.l - self.k,
            self.m - self.l,
            self.n1 - self.n2,
        ]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Evaluates every constant on an assembled inner-bound joint.
pub fn inner_constants(joint: &JointPmf) -> Result<InnerConstants> {
    for l in [U1P, U1, V1, U2P, U2, V12, V2, X1, X2, X3, Y1, Y2, YHAT2] {
        if !joint.has(l) {
            return Err(Error::MissingVariable(l.to_string()));
        }
    }
    let mi = |a: &[&str], b: &[&str], c: &[&str]| joint.conditional_mutual_information(a, b, c);
    Ok(InnerConstants {
        a: mi(&[V1], &[U2], &[U1P, U1, U2P])?,
        b: mi(&[Y1, V1, V12], &[YHAT2], &[U1P, U1, U2P, U2, X3])?,
        c: mi(&[Y2], &[YHAT2], &[U1P, U1, U2P, U2, X3])?,
        d: mi(&[Y1], &[U1P, U1, V1, U2P, U2, V12, X3], &[])?,
        e: mi(&[Y1], &[V1, U2P, U2, V12, X3], &[U1P, U1])?,
        f: mi(&[Y1], &[V1, V12, X3], &[U1P, U1, U2P, U2])?,
        g: mi(&[Y1, YHAT2], &[V1, V12], &[U1P, U1, U2P, U2, X3])?,
        h: mi(&[Y1], &[U2P, U2, V12, X3], &[U1P, U1, V1])?,
        i: mi(&[Y1], &[V12, X3], &[U1P, U1, V1, U2P, U2])?,
        j: mi(&[Y1, YHAT2], &[V12], &[U1P, U1, V1, U2P, U2, X3])?,
        k: mi(&[Y2], &[U1, U2, V2], &[U1P, U2P, X3])?,
        l: mi(&[Y2], &[U2, V2], &[U1P, U1, U2P, X3])?,
        m: mi(&[Y2], &[V2], &[U1P, U1, U2P, U2, X3])?,
        n1: mi(&[V1], &[V2], &[U1P, U1, U2P, U2])?,
        n2: mi(&[V1, V12], &[V2], &[U1P, U1, U2P, U2])?,
        p: mi(&[Y1], &[X3], &[U1P, U1, V1, U2P, U2, V12])?,
    })
}

/// Compress-forward admissibility: `C <= P + B`.
pub fn admissible(c: &InnerConstants) -> bool {
    c.c <= c.p + c.b + ADMISSIBLE_TOL
}

const R11: &str = "r11";
const R1P: &str = "r1p";
const R1B: &str = "r1b";
const R22: &str = "r22";
const R2P: &str = "r2p";
const R1B_BIN: &str = "r1b_bin";
const R2P_BIN: &str = "r2p_bin";
const R22_BIN: &str = "r22_bin";
const RATE1: &str = "R1";
const RATE2: &str = "R2";

/// Split rates that are pinned to zero so that destination 1's constraints
/// can be relaxed. Each case implies the previous ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Dest1Case {
    AllActive,
    /// `L1B = 0`
    NoBinned,
    /// `R11 = L1B = 0`
    NoPrivate,
    /// `R1p = R11 = L1B = 0`
    Silent,
}

/// Split rates pinned to zero to relax destination 2's constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dest2Case {
    AllActive,
    /// `L2p = L22 = 0`
    Silent,
}

/// Rate system for one pinned case, over the eight split rates plus `R1`
/// and `R2`.
pub fn case_system(c: &InnerConstants, d1: Dest1Case, d2: Dest2Case) -> Result<LinearSystem> {
    let mut s = LinearSystem::new(&[
        R11, R1P, R1B, R22, R2P, R1B_BIN, R2P_BIN, R22_BIN, RATE1, RATE2,
    ])?;
    for v in [R11, R1P, R1B, R22, R2P] {
        s.set_nonnegative(v)?;
    }
    s.add_eq(&[(RATE1, 1.0), (R11, -1.0), (R1P, -1.0), (R1B, -1.0)], 0.0)?;
    s.add_eq(&[(RATE2, 1.0), (R22, -1.0), (R2P, -1.0)], 0.0)?;

    // binning floors
    s.add_ge(&[(R2P_BIN, 1.0)], c.a)?;
    s.add_ge(&[(R1B_BIN, 1.0)], 0.0)?;
    s.add_ge(&[(R22_BIN, 1.0)], c.n1)?;
    s.add_ge(&[(R1B_BIN, 1.0), (R22_BIN, 1.0)], c.n2)?;

    let l1b = [(R1B, 1.0), (R1B_BIN, 1.0)];
    let l2p = [(R2P, 1.0), (R2P_BIN, 1.0)];
    let l22 = [(R22, 1.0), (R22_BIN, 1.0)];
    let terms = |head: &[(&'static str, f64)], tails: &[&[(&'static str, f64)]]| {
        let mut t = head.to_vec();
        for tail in tails {
            t.extend_from_slice(tail);
        }
        t
    };
    let base = c.a + c.b - c.c;

    // destination 1
    if d1 < Dest1Case::Silent {
        s.add_le(&terms(&[(R1P, 1.0), (R11, 1.0)], &[&l2p, &l1b]), base + c.d)?;
    }
    if d1 < Dest1Case::NoPrivate {
        s.add_le(&terms(&[(R11, 1.0)], &[&l2p, &l1b]), base + c.e)?;
    }
    if d1 < Dest1Case::NoBinned {
        s.add_le(&terms(&[], &[&l2p, &l1b]), base + c.h)?;
    }
    s.add_le(&terms(&[(R11, 1.0)], &[&l1b]), base + c.f)?;
    s.add_le(&terms(&[(R11, 1.0)], &[&l1b]), c.a + c.g)?;
    s.add_le(&l1b, c.j)?;
    s.add_le(&l1b, c.b + c.i - c.c)?;

    // destination 2
    if d2 == Dest2Case::AllActive {
        s.add_le(&terms(&[(R1P, 1.0)], &[&l2p, &l22]), c.k)?;
    }
    s.add_le(&terms(&[], &[&l2p, &l22]), c.l)?;
    s.add_le(&l22, c.m)?;

    let mut pinned: Vec<&str> = Vec::new();
    if d1 >= Dest1Case::NoBinned {
        pinned.extend([R1B, R1B_BIN]);
    }
    if d1 >= Dest1Case::NoPrivate {
        pinned.push(R11);
    }
    if d1 >= Dest1Case::Silent {
        pinned.push(R1P);
    }
    if d2 == Dest2Case::Silent {
        pinned.extend([R2P, R2P_BIN, R22, R22_BIN]);
    }
    for v in pinned {
        s.add_eq(&[(v, 1.0)], 0.0)?;
    }
    Ok(s)
}

/// Loose cap valid for any rate the constants can support.
fn constants_cap(c: &InnerConstants) -> f64 {
    1.0 + 4.0 * c.as_array().iter().map(|x| x.abs()).sum::<f64>()
}

/// Rate region of one distribution: the union over the eight pinned cases,
/// each projected onto `(R1, R2)`.
pub fn region_for_distribution(c: &InnerConstants) -> Result<Region2D> {
    region_for_distribution_capped(c, constants_cap(c))
}

/// As [`region_for_distribution`], intersected with `R1, R2 <= cap`.
pub fn region_for_distribution_capped(c: &InnerConstants, cap: f64) -> Result<Region2D> {
    if !admissible(c) {
        return Err(Error::InadmissibleConstants {
            c: c.c,
            bound: c.p + c.b,
        });
    }
    let mut pieces = Vec::with_capacity(8);
    for d1 in [
        Dest1Case::AllActive,
        Dest1Case::NoBinned,
        Dest1Case::NoPrivate,
        Dest1Case::Silent,
    ] {
        for d2 in [Dest2Case::AllActive, Dest2Case::Silent] {
            let sys = case_system(c, d1, d2)?;
            pieces.push(project_to_region(&sys, RATE1, RATE2, cap)?);
        }
    }
    hull_union(&pieces)
}

/// Sampling budget and shape for region estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub seed: u64,
    pub num_samples: usize,
    pub aux: AuxCards,
    pub dirichlet_concentration: f64,
    pub include_deterministic_corners: bool,
    pub include_yhat_constant_variant: bool,
    /// Upper limit on the number of structured corner distributions.
    pub corner_cap: usize,
    /// Alphabet size of V12 in outer-bound searches; `None` means |X1|*|X2|.
    pub card_v12: Option<usize>,
    /// Number of support directions in the positive quadrant.
    pub fan: usize,
    /// Random starts refined per direction.
    pub refine_starts: usize,
    /// Coordinate-ascent sweeps per refinement.
    pub refine_sweeps: usize,
    /// Worker threads; results do not depend on this.
    pub threads: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0,
            num_samples: 0,
            aux: AuxCards::default(),
            dirichlet_concentration: 1.0,
            include_deterministic_corners: true,
            include_yhat_constant_variant: true,
            corner_cap: 4096,
            card_v12: None,
            fan: 64,
            refine_starts: 5,
            refine_sweeps: 50,
            threads: 1,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.dirichlet_concentration.is_finite() || self.dirichlet_concentration <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "dirichlet concentration must be positive, got {}",
                self.dirichlet_concentration
            )));
        }
        let a = &self.aux;
        if [a.u1p, a.u1, a.v1, a.u2p, a.u2, a.v12, a.v2, a.yhat2].contains(&0) {
            return Err(Error::InvalidConfig("auxiliary cardinalities must be at least 1".into()));
        }
        if self.card_v12 == Some(0) {
            return Err(Error::InvalidConfig("card_v12 must be at least 1".into()));
        }
        Ok(())
    }
}

/// How one component of a structured corner distribution is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Choice {
    Constant,
    Uniform,
    /// Copies the conditioning variable at this position of the slot's
    /// conditioning list, reduced modulo the target alphabet.
    Copy(usize),
}

/// One random variable of the factorization and the slot that generates it.
struct Component {
    label: &'static str,
    slot: Slot,
    allow_uniform: bool,
}

const COMPONENTS: [Component; 11] = [
    Component { label: U1P, slot: Slot::U1p, allow_uniform: true },
    Component { label: U1, slot: Slot::U1, allow_uniform: true },
    Component { label: V1, slot: Slot::V1, allow_uniform: true },
    Component { label: U2P, slot: Slot::U2p, allow_uniform: true },
    Component { label: U2, slot: Slot::U2V12V2, allow_uniform: true },
    Component { label: V12, slot: Slot::U2V12V2, allow_uniform: true },
    Component { label: V2, slot: Slot::U2V12V2, allow_uniform: true },
    Component { label: X1, slot: Slot::X1, allow_uniform: true },
    Component { label: X2, slot: Slot::X2, allow_uniform: true },
    Component { label: X3, slot: Slot::X3, allow_uniform: true },
    // an independent uniform description carries nothing
    Component { label: YHAT2, slot: Slot::YHat2, allow_uniform: false },
];

const AUXILIARY_COMPONENTS: usize = 7;

/// Enumerates structured corners: every variable is either constant,
/// uniform and independent, or a copy of one of its conditioning variables.
/// Corners are listed by increasing number of non-constant variables. An
/// auxiliary that is non-constant must be copied by some later variable,
/// and copies are only taken from non-constant sources.
pub(crate) fn corner_choices(cards: &T1Cards, cap: usize) -> Vec<[Choice; 11]> {
    let mut out = Vec::new();
    for level in 0..=COMPONENTS.len() {
        let mut current = [Choice::Constant; 11];
        corner_level(cards, 0, level, &mut current, &mut out, cap);
        if out.len() >= cap {
            break;
        }
    }
    out.truncate(cap);
    out
}

fn corner_level(
    cards: &T1Cards,
    pos: usize,
    remaining: usize,
    current: &mut [Choice; 11],
    out: &mut Vec<[Choice; 11]>,
    cap: usize,
) {
    if out.len() >= cap {
        return;
    }
    if pos == COMPONENTS.len() {
        if remaining == 0 && auxiliaries_used(current) {
            out.push(*current);
        }
        return;
    }
    if COMPONENTS.len() - pos < remaining {
        return;
    }
    let comp = &COMPONENTS[pos];
    let card = cards.var(comp.label).card;
    let mut options = vec![Choice::Constant];
    if card > 1 && remaining > 0 {
        if comp.allow_uniform {
            options.push(Choice::Uniform);
        }
        let (_, given) = comp.slot.signature();
        for (gi, g) in given.iter().enumerate() {
            let source_active = match COMPONENTS.iter().position(|c| c.label == *g) {
                Some(k) => current[k] != Choice::Constant && cards.var(g).card > 1,
                // y2 is produced by the channel
                None => true,
            };
            if source_active {
                options.push(Choice::Copy(gi));
            }
        }
    }
    for choice in options {
        let used = usize::from(choice != Choice::Constant);
        if used > remaining {
            continue;
        }
        current[pos] = choice;
        corner_level(cards, pos + 1, remaining - used, current, out, cap);
    }
    current[pos] = Choice::Constant;
}

fn auxiliaries_used(choices: &[Choice; 11]) -> bool {
    (0..AUXILIARY_COMPONENTS).all(|k| {
        choices[k] == Choice::Constant
            || COMPONENTS.iter().zip(choices).skip(k + 1).any(|(c, ch)| match ch {
                Choice::Copy(gi) => c.slot.signature().1[*gi] == COMPONENTS[k].label,
                _ => false,
            })
    })
}

fn corner_factorization(cards: &T1Cards, choices: &[Choice; 11]) -> Result<FactorizationT1> {
    FactorizationT1::from_fn(cards, |slot, given| {
        let (targets, _) = slot.signature();
        let tcards: Vec<usize> = targets.iter().map(|l| cards.var(l).card).collect();
        // each target component is independent given the conditioning variables
        let marginals: Vec<Vec<f64>> = targets
            .iter()
            .zip(&tcards)
            .map(|(label, &card)| {
                let k = COMPONENTS.iter().position(|c| c.label == *label).expect("component");
                let mut row = vec![0.0; card];
                match choices[k] {
                    Choice::Constant => row[0] = 1.0,
                    Choice::Uniform => row.iter_mut().for_each(|x| *x = 1.0 / card as f64),
                    Choice::Copy(gi) => row[given[gi] % card] = 1.0,
                }
                row
            })
            .collect();
        let mut joint = vec![1.0];
        for m in marginals {
            joint = joint.iter().flat_map(|&p| m.iter().map(move |&q| p * q)).collect();
        }
        joint
    })
}

fn random_factorization(cards: &T1Cards, seed: u64, index: u64, concentration: f64) -> Result<FactorizationT1> {
    let mut rng = substream(seed, index);
    FactorizationT1::from_fn(cards, |slot, _| {
        let (targets, _) = slot.signature();
        let n: usize = targets.iter().map(|l| cards.var(l).card).product();
        dirichlet(&mut rng, n, concentration)
    })
}

/// The distributions an inner-region estimate ranges over, in a fixed
/// order: structured corners first, then `num_samples` Dirichlet draws.
/// With `include_yhat_constant_variant`, every distribution whose `yhat2`
/// is not already constant is followed by its constant-`yhat2` twin.
pub fn sample_factorizations(ch: &ChannelSpec, cfg: &SamplerConfig) -> Result<Vec<FactorizationT1>> {
    cfg.validate()?;
    let cards = T1Cards::for_channel(ch, cfg.aux);
    let mut base = Vec::new();
    if cfg.include_deterministic_corners {
        for choices in corner_choices(&cards, cfg.corner_cap) {
            base.push(corner_factorization(&cards, &choices)?);
        }
    }
    for i in 0..cfg.num_samples {
        base.push(random_factorization(&cards, cfg.seed, i as u64, cfg.dirichlet_concentration)?);
    }
    if !cfg.include_yhat_constant_variant {
        return Ok(base);
    }
    let mut out = Vec::with_capacity(2 * base.len());
    for f in base {
        let twin = (!f.yhat_is_constant()).then(|| f.with_constant_yhat());
        out.push(f);
        out.extend(twin);
    }
    Ok(out)
}

/// Per-distribution outcome recorded by [`inner_region`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub admissible: bool,
    pub constants: InnerConstants,
    pub vertex_count: usize,
}

impl SampleRecord {
    pub const HEADER: &'static str = "index\tadmissible\tA\tB\tC\tD\tE\tF\tG\tH\tI\tJ\tK\tL\tM\tN1\tN2\tP\tvertices";

    pub fn to_line(&self) -> String {
        let mut s = format!("{}\t{}", self.index, self.admissible);
        for v in self.constants.as_array() {
            let _ = write!(s, "\t{v}");
        }
        let _ = write!(s, "\t{}", self.vertex_count);
        s
    }
}

/// Region estimate plus the per-sample log it was built from.
#[derive(Debug, Clone)]
pub struct InnerResult {
    pub region: Region2D,
    pub log: Vec<SampleRecord>,
}

impl InnerResult {
    pub fn log_text(&self) -> String {
        let mut s = String::from(SampleRecord::HEADER);
        s.push('\n');
        for r in &self.log {
            s.push_str(&r.to_line());
            s.push('\n');
        }
        s
    }
}

/// Region and log entry for a single distribution.
pub fn evaluate_factorization(
    index: usize,
    f: &FactorizationT1,
    ch: &ChannelSpec,
) -> Result<(Region2D, SampleRecord)> {
    let joint = assemble_joint_t1(f, ch)?;
    let constants = inner_constants(&joint)?;
    let ok = admissible(&constants);
    let region = if ok {
        region_for_distribution_capped(&constants, ch.rate_cap())?
    } else {
        Region2D::empty()
    };
    let record = SampleRecord {
        index,
        admissible: ok,
        constants,
        vertex_count: region.vertices().len(),
    };
    Ok((region, record))
}

/// Union of the per-distribution regions over the given factorizations.
pub fn inner_region_from(
    ch: &ChannelSpec,
    factorizations: &[FactorizationT1],
    threads: usize,
) -> Result<InnerResult> {
    let results = par_map(factorizations, threads, |i, f| evaluate_factorization(i, f, ch));
    let mut regions = Vec::with_capacity(results.len());
    let mut log = Vec::with_capacity(results.len());
    for r in results {
        let (region, record) = r?;
        regions.push(region);
        log.push(record);
    }
    let region = if regions.is_empty() {
        Region2D::empty()
    } else {
        hull_union(&regions)?
    };
    Ok(InnerResult { region, log })
}

/// Inner-region estimate: union over the sampled distributions. The true
/// region is a superset of the estimate.
pub fn inner_region(ch: &ChannelSpec, cfg: &SamplerConfig) -> Result<InnerResult> {
    let samples = sample_factorizations(ch, cfg)?;
    inner_region_from(ch, &samples, cfg.threads)
}
