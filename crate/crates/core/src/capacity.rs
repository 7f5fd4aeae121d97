//! Capacity regions for two channel classes, the high-interference
//! falsifier, and the achievability chain that specializes the inner bound
//! for semi-deterministic channels.
//!
//! * Degraded Z channels: [`t3_polygon`] per input distribution and its
//!   sampled union [`capacity_degraded_z`].
//! * Semi-deterministic channels in the high-interference-gain regime:
//!   [`t4_polygon`] and [`capacity_semidet_hi`]. Membership in the regime is
//!   a statement about every distribution, so it is never assumed; the
//!   falsifier [`hi_regime_falsify`] searches for a counterexample and its
//!   report travels with every result.
//! * [`iv5_region`] is the inner bound after fixing the auxiliaries as the
//!   achievability argument does, [`specialize_iv5`] builds that same
//!   distribution as a full inner-bound factorization, and [`iv6_region`]
//!   is the version with `V2 = Y2`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{is_degraded, is_semi_deterministic, is_z, ChannelSpec, CLASSIFY_TOL};
use crate::error::{Error, Result};
use crate::inner::{AuxCards, FactorizationT1, SamplerConfig, Slot, T1Cards};
use crate::labels::{U1, U1P, U2, U2P, V1, V12, V2, X1, X2, X3, Y1, Y2, YHAT2};
use crate::outer::{candidate_distributions, card_v12, outer_corners, support_search, OuterDistribution};
use crate::polytope::{hull_union, HalfPlane, Region2D};
use crate::prob::{ConditionalFactor, JointPmf, Var};
use crate::search::{coordinate_ascent, direction_fan, dirichlet, par_map, substream, AscentConfig};

/// A regime inequality counts as violated when it fails by more than this.
pub const VIOLATION_TOL: f64 = 1e-9;

/// Two regions count as equal for the drop-consistency check within this
/// Hausdorff distance.
pub const DROP_TOL: f64 = 1e-7;

/// The two inequalities defining the high-interference-gain regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HiCondition {
    /// `I(Y2; X1 | X3) >= I(Y1; X1, X3)`
    CrossGain,
    /// `I(Y1; V12 | X1, X3) >= I(Y2; V12 | X1, X3)`
    AuxiliaryGain,
}

impl fmt::Display for HiCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HiCondition::CrossGain => "I(Y2;X1|X3) >= I(Y1;X1,X3)",
            HiCondition::AuxiliaryGain => "I(Y1;V12|X1,X3) >= I(Y2;V12|X1,X3)",
        })
    }
}

/// A distribution on which one regime inequality fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiRegimeWitness {
    /// Joint pmf over `(x1, v12, x2, x3)`.
    pub pmf: JointPmf,
    pub condition: HiCondition,
    pub lhs: f64,
    pub rhs: f64,
}

impl fmt::Display for HiRegimeWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} fails: left side {:.6} < right side {:.6}",
            self.condition, self.lhs, self.rhs
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HiStatus {
    NoViolationFound,
    Falsified,
}

/// Outcome of a falsification search. `NoViolationFound` is evidence, not a
/// proof, that the channel is in the regime.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiRegimeReport {
    pub status: HiStatus,
    pub samples: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<HiRegimeWitness>,
}

impl HiRegimeReport {
    pub fn is_falsified(&self) -> bool {
        self.status == HiStatus::Falsified
    }
}

/// Both sides of both regime inequalities at one distribution:
/// `[(lhs, rhs) cross-gain, (lhs, rhs) auxiliary-gain]`.
pub fn hi_regime_sides(d: &OuterDistribution, ch: &ChannelSpec) -> Result<[(f64, f64); 2]> {
    let j = d.with_outputs(ch)?;
    let mi = |a: &[&str], b: &[&str], c: &[&str]| j.conditional_mutual_information(a, b, c);
    Ok([
        (mi(&[Y2], &[X1], &[X3])?, mi(&[Y1], &[X1, X3], &[])?),
        (mi(&[Y1], &[V12], &[X1, X3])?, mi(&[Y2], &[V12], &[X1, X3])?),
    ])
}

const CONDITIONS: [HiCondition; 2] = [HiCondition::CrossGain, HiCondition::AuxiliaryGain];

fn witness_at(d: &OuterDistribution, ch: &ChannelSpec) -> Option<HiRegimeWitness> {
    let sides = hi_regime_sides(d, ch).ok()?;
    let (k, &(lhs, rhs)) = sides
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 .0 - a.1 .1).total_cmp(&(b.1 .0 - b.1 .1)))?;
    (lhs - rhs < -VIOLATION_TOL).then(|| HiRegimeWitness {
        pmf: d.pmf().clone(),
        condition: CONDITIONS[k],
        lhs,
        rhs,
    })
}

/// Searches distributions `p(x1, v12, x2, x3)` for a violation of either
/// regime inequality.
///
/// Structured corners are scanned first, in order of increasing complexity,
/// and the first violating corner is returned as the witness. Otherwise the
/// Dirichlet samples are scanned for the most negative gap, and the best
/// `refine_starts` samples per condition are pushed further by coordinate
/// ascent on the gap.
pub fn hi_regime_falsify(ch: &ChannelSpec, cfg: &SamplerConfig) -> Result<HiRegimeReport> {
    cfg.validate()?;
    let [n1, n2, n3] = ch.input_cards();
    let cards = [n1, card_v12(ch, cfg), n2, n3];
    let mut evaluated = 0;
    let falsified = |witness: HiRegimeWitness, samples: usize| HiRegimeReport {
        status: HiStatus::Falsified,
        samples,
        seed: cfg.seed,
        witness: Some(witness),
    };
    if cfg.include_deterministic_corners {
        let corners = outer_corners(cards);
        let found = par_map(&corners, cfg.threads, |_, d| witness_at(d, ch));
        if let Some((k, w)) = found.into_iter().enumerate().find_map(|(k, w)| w.map(|w| (k, w))) {
            return Ok(falsified(w, k + 1));
        }
        evaluated += corners.len();
    }

    let randoms: Vec<OuterDistribution> = (0..cfg.num_samples as u64)
        .map(|i| crate::outer::random_outer(cards, cfg.seed, i, cfg.dirichlet_concentration))
        .collect();
    let gaps: Vec<[f64; 2]> = par_map(&randoms, cfg.threads, |_, d| {
        hi_regime_sides(d, ch).map_or([f64::INFINITY; 2], |s| [s[0].0 - s[0].1, s[1].0 - s[1].1])
    });
    evaluated += randoms.len();
    let mut best: Option<(f64, HiRegimeWitness)> = None;
    let mut offer = |d: &OuterDistribution| {
        if let Some(w) = witness_at(d, ch) {
            let gap = w.lhs - w.rhs;
            if best.as_ref().is_none_or(|(g, _)| gap < *g) {
                best = Some((gap, w));
            }
        }
    };
    for d in &randoms {
        offer(d);
    }

    let ascent = AscentConfig {
        sweeps: cfg.refine_sweeps,
        ..AscentConfig::default()
    };
    let starts: Vec<(usize, usize)> = (0..2)
        .flat_map(|c| {
            let mut order: Vec<usize> = (0..randoms.len()).collect();
            order.sort_by(|&a, &b| gaps[a][c].total_cmp(&gaps[b][c]).then(a.cmp(&b)));
            order.into_iter().take(cfg.refine_starts).map(move |i| (c, i))
        })
        .collect();
    let refined = par_map(&starts, cfg.threads, |_, &(c, i)| {
        let objective = |p: &[f64]| {
            OuterDistribution::from_probs(cards, p.to_vec())
                .ok()
                .and_then(|d| hi_regime_sides(&d, ch).ok())
                .map_or(f64::NEG_INFINITY, |s| s[c].1 - s[c].0)
        };
        let (p, _) = coordinate_ascent(randoms[i].pmf().probs(), ascent, objective);
        OuterDistribution::from_probs(cards, p).expect("ascent stays on the simplex")
    });
    evaluated += starts.len();
    for d in &refined {
        offer(d);
    }
    Ok(match best {
        Some((_, w)) => falsified(w, evaluated),
        None => HiRegimeReport {
            status: HiStatus::NoViolationFound,
            samples: evaluated,
            seed: cfg.seed,
            witness: None,
        },
    })
}

fn require_degraded_z(ch: &ChannelSpec) -> Result<()> {
    if !is_z(ch, CLASSIFY_TOL) {
        return Err(Error::NotZChannel);
    }
    if !is_degraded(ch, CLASSIFY_TOL) {
        return Err(Error::NotDegraded);
    }
    Ok(())
}

fn require_semidet(ch: &ChannelSpec) -> Result<()> {
    if !is_semi_deterministic(ch, CLASSIFY_TOL) {
        return Err(Error::NotSemiDeterministic);
    }
    Ok(())
}

fn polygon(halfplanes: &[HalfPlane], ch: &ChannelSpec) -> Region2D {
    Region2D::from_halfplanes(halfplanes, ch.rate_cap())
}

/// Right-hand sides for the degraded Z class: `R1`, `R2`, `R1 + R2`.
pub fn t3_bounds(inputs: &JointPmf, ch: &ChannelSpec) -> Result<[f64; 3]> {
    let m = inputs.marginalize(&[X1, X2, X3])?;
    let j = ch.attach_outputs(&m)?;
    Ok([
        j.mutual_information(&[Y1], &[X1, X3])?,
        j.conditional_mutual_information(&[Y2], &[X2], &[X1, X3])?,
        j.conditional_mutual_information(&[Y2], &[X1, X2], &[X3])?,
    ])
}

/// Capacity polygon of one input distribution on a degraded Z channel.
/// `inputs` must carry `x1, x2, x3` and may carry other variables. With
/// `force` the class check is skipped.
pub fn t3_polygon(inputs: &JointPmf, ch: &ChannelSpec, force: bool) -> Result<Region2D> {
    if !force {
        require_degraded_z(ch)?;
    }
    let b = t3_bounds(inputs, ch)?;
    Ok(polygon(
        &[HalfPlane::r1_at_most(b[0]), HalfPlane::r2_at_most(b[1]), HalfPlane::sum_at_most(b[2])],
        ch,
    ))
}

/// Right-hand sides for the semi-deterministic class: `R1`, `R2`, `R1 + R2`.
pub fn t4_bounds(d: &OuterDistribution, ch: &ChannelSpec) -> Result<[f64; 3]> {
    require_semidet(ch)?;
    let j = d.with_outputs(ch)?;
    let r1 = j.mutual_information(&[Y1], &[X1, V12, X3])?;
    Ok([
        r1,
        j.conditional_entropy(&[Y2], &[X1, X3])?,
        r1 + j.conditional_entropy(&[Y2], &[X1, V12, X3])?,
    ])
}

pub fn t4_polygon(d: &OuterDistribution, ch: &ChannelSpec) -> Result<Region2D> {
    let b = t4_bounds(d, ch)?;
    Ok(polygon(
        &[HalfPlane::r1_at_most(b[0]), HalfPlane::r2_at_most(b[1]), HalfPlane::sum_at_most(b[2])],
        ch,
    ))
}

/// A joint pmf over `(x1, v12, v2, x2, x3)`, in that variable order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iv5Distribution {
    pmf: JointPmf,
}

pub(crate) fn iv5_vars(cards: [usize; 5]) -> Vec<Var> {
    vec![
        Var::new(X1, cards[0]),
        Var::new(V12, cards[1]),
        Var::new(V2, cards[2]),
        Var::new(X2, cards[3]),
        Var::new(X3, cards[4]),
    ]
}

impl Iv5Distribution {
    pub fn new(pmf: JointPmf) -> Result<Self> {
        let labels: Vec<&str> = pmf.vars().iter().map(|v| v.label.as_str()).collect();
        if labels != [X1, V12, V2, X2, X3] {
            return Err(Error::InvalidFactor(format!(
                "expected variables (x1, v12, v2, x2, x3), found {labels:?}"
            )));
        }
        Ok(Iv5Distribution { pmf })
    }

    /// `cards` is `[|X1|, |V12|, |V2|, |X2|, |X3|]`.
    pub fn from_probs(cards: [usize; 5], probs: Vec<f64>) -> Result<Self> {
        Iv5Distribution::new(JointPmf::new(iv5_vars(cards), probs)?)
    }

    /// Dirichlet draw for sample `index`.
    pub fn random(cards: [usize; 5], seed: u64, index: u64, concentration: f64) -> Self {
        let mut rng = substream(seed, index);
        let n = cards.iter().product();
        Iv5Distribution {
            pmf: JointPmf::new(iv5_vars(cards), dirichlet(&mut rng, n, concentration))
                .expect("dirichlet draw is a pmf"),
        }
    }

    pub fn pmf(&self) -> &JointPmf {
        &self.pmf
    }

    pub fn cards(&self) -> [usize; 5] {
        let c = self.pmf.cards();
        [c[0], c[1], c[2], c[3], c[4]]
    }

    fn with_outputs(&self, ch: &ChannelSpec) -> Result<JointPmf> {
        ch.attach_outputs(&self.pmf)
    }
}

/// The five right-hand sides of the specialized inner bound, in order: one
/// bound on `R1`, two on `R2`, two on `R1 + R2`.
pub fn iv5_bounds(d: &Iv5Distribution, ch: &ChannelSpec) -> Result<[f64; 5]> {
    let j = d.with_outputs(ch)?;
    let mi = |a: &[&str], b: &[&str], c: &[&str]| j.conditional_mutual_information(a, b, c);
    let r1 = mi(&[Y1], &[X1, V12, X3], &[])?;
    let r2 = mi(&[Y2], &[V2], &[X1, X3])?;
    let q = mi(&[Y1], &[V12], &[X1, X3])?;
    let bin = mi(&[V12], &[V2], &[X1, X3])?;
    let k = mi(&[Y2], &[X1, V2], &[X3])?;
    Ok([r1, r2, r2 + q - bin, q + k - bin, r1 + r2 - bin])
}

fn five_bound_polygon(b: &[f64; 5], ch: &ChannelSpec) -> Region2D {
    polygon(
        &[
            HalfPlane::r1_at_most(b[0]),
            HalfPlane::r2_at_most(b[1]),
            HalfPlane::r2_at_most(b[2]),
            HalfPlane::sum_at_most(b[3]),
            HalfPlane::sum_at_most(b[4]),
        ],
        ch,
    )
}

pub fn iv5_region(d: &Iv5Distribution, ch: &ChannelSpec) -> Result<Region2D> {
    Ok(five_bound_polygon(&iv5_bounds(d, ch)?, ch))
}

/// The five right-hand sides with `V2 = Y2`, written with entropies.
pub fn iv6_bounds(d: &OuterDistribution, ch: &ChannelSpec) -> Result<[f64; 5]> {
    require_semidet(ch)?;
    let j = d.with_outputs(ch)?;
    let r1 = j.mutual_information(&[Y1], &[X1, V12, X3])?;
    let h = j.conditional_entropy(&[Y2], &[X1, X3])?;
    let q = j.conditional_mutual_information(&[Y1], &[V12], &[X1, X3])?;
    let leak = j.conditional_mutual_information(&[Y2], &[V12], &[X1, X3])?;
    let h3 = j.conditional_entropy(&[Y2], &[X3])?;
    Ok([r1, h, h + q - leak, q + h3 - leak, r1 + h - leak])
}

pub fn iv6_region(d: &OuterDistribution, ch: &ChannelSpec) -> Result<Region2D> {
    Ok(five_bound_polygon(&iv6_bounds(d, ch)?, ch))
}

/// [`iv6_region`] without the two bounds the regime makes redundant.
pub fn iv6_region_reduced(d: &OuterDistribution, ch: &ChannelSpec) -> Result<Region2D> {
    let b = iv6_bounds(d, ch)?;
    Ok(polygon(
        &[HalfPlane::r1_at_most(b[0]), HalfPlane::r2_at_most(b[1]), HalfPlane::sum_at_most(b[4])],
        ch,
    ))
}

/// Adds `v2 = y2`, computed from the inputs through the channel's
/// deterministic `Y2` map.
pub fn lift_v2_equals_y2(d: &OuterDistribution, ch: &ChannelSpec) -> Result<Iv5Distribution> {
    require_semidet(ch)?;
    let [n1, nv, n2, n3] = d.cards();
    let ny2 = ch.cards()[4];
    let cards = [n1, nv, ny2, n2, n3];
    let pmf = JointPmf::from_fn(iv5_vars(cards), |g| {
        let (a, w, y, b, c) = (g[0], g[1], g[2], g[3], g[4]);
        match ch.y2_function(a, b, c, CLASSIFY_TOL) {
            Some(e) if e == y => d.pmf().prob(&[a, w, b, c]),
            _ => 0.0,
        }
    })?;
    Iv5Distribution::new(pmf)
}

/// The inner-bound factorization that collapses to [`iv5_region`]: `V1`,
/// `U2p`, `U2` and `Yhat2` constant, `U1` carrying `X1` and `U1p` carrying
/// `X3`, with `(V12, V2, X2)` distributed as in `d`. The copies are real
/// deterministic factors, so the generic pipeline runs unmodified.
pub fn specialize_iv5(d: &Iv5Distribution, ch: &ChannelSpec) -> Result<FactorizationT1> {
    let [n1, nv12, nv2, n2, n3] = d.cards();
    if [n1, n2, n3] != ch.input_cards() {
        return Err(Error::CardinalityMismatch(format!(
            "distribution has (|X1|,|X2|,|X3|) = {:?}, channel has {:?}",
            [n1, n2, n3],
            ch.input_cards()
        )));
    }
    let aux = AuxCards {
        u1p: n3,
        u1: n1,
        v1: 1,
        u2p: 1,
        u2: 1,
        v12: nv12,
        v2: nv2,
        yhat2: 1,
    };
    let cards = T1Cards::for_channel(ch, aux);
    let p = d.pmf();
    let x3 = p.conditional(&[X3], &[])?;
    let x1_given_x3 = p.conditional(&[X1], &[X3])?;
    let v_given = p.conditional(&[V12, V2], &[X3, X1])?;
    let x2_given = p.conditional(&[X2], &[X3, X1, V12, V2])?;
    let var = |l: &str, c: usize| Var::new(l, c);
    let one_hot = |n: usize, k: usize| {
        let mut r = vec![0.0; n];
        r[k] = 1.0;
        r
    };
    let factors = vec![
        ConditionalFactor::new(vec![var(U1P, n3)], vec![], x3.table().to_vec())?,
        ConditionalFactor::new(vec![var(U1, n1)], vec![var(U1P, n3)], x1_given_x3.table().to_vec())?,
        ConditionalFactor::uniform(vec![var(V1, 1)], vec![var(U1P, n3), var(U1, n1)])?,
        ConditionalFactor::uniform(vec![var(U2P, 1)], vec![var(U1P, n3)])?,
        ConditionalFactor::from_fn(
            vec![var(U2, 1), var(V12, nv12), var(V2, nv2)],
            vec![var(U1P, n3), var(U1, n1), var(V1, 1), var(U2P, 1)],
            |g| {
                let n = v_given.n_targets();
                v_given.table()[(g[0] * n1 + g[1]) * n..][..n].to_vec()
            },
        )?,
        ConditionalFactor::from_fn(
            vec![var(X1, n1)],
            vec![var(U1P, n3), var(U1, n1), var(V1, 1)],
            |g| one_hot(n1, g[1]),
        )?,
        ConditionalFactor::from_fn(
            vec![var(X2, n2)],
            vec![
                var(U1P, n3),
                var(U1, n1),
                var(V1, 1),
                var(U2P, 1),
                var(U2, 1),
                var(V12, nv12),
                var(V2, nv2),
            ],
            |g| {
                let row = ((g[0] * n1 + g[1]) * nv12 + g[5]) * nv2 + g[6];
                x2_given.table()[row * n2..][..n2].to_vec()
            },
        )?,
        ConditionalFactor::from_fn(vec![var(X3, n3)], vec![var(U1P, n3), var(U2P, 1)], |g| {
            one_hot(n3, g[0])
        })?,
        ConditionalFactor::uniform(
            vec![var(YHAT2, 1)],
            Slot::YHat2
                .signature()
                .1
                .iter()
                .map(|l| {
                    let c = match *l {
                        Y2 => cards.y2,
                        X3 => n3,
                        U1P => n3,
                        U1 => n1,
                        _ => 1,
                    };
                    var(l, c)
                })
                .collect(),
        )?,
    ];
    FactorizationT1::new(factors)
}

/// Capacity-region estimate together with the distributions that defined
/// its boundary.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    pub region: Region2D,
    /// Distributions that attained the best support value in some fan
    /// direction, in fan order without repeats. Other estimators can be
    /// seeded with these.
    pub best: Vec<JointPmf>,
    /// Falsifier report; present for the semi-deterministic class.
    pub hi_regime: Option<HiRegimeReport>,
    /// Samples where dropping the two regime-redundant bounds changed the
    /// polygon even though neither regime inequality failed there.
    pub drop_mismatches: usize,
    pub evaluated: usize,
}

/// Shared search: hull of `poly` over candidates and per-direction
/// refinements of the support value.
fn capacity_search<D>(
    candidates: &[D],
    cfg: &SamplerConfig,
    probs_of: impl Fn(&D) -> Vec<f64> + Sync,
    rebuild: impl Fn(Vec<f64>) -> Option<D> + Sync,
    poly: impl Fn(&D) -> Option<Region2D> + Sync,
) -> Result<(Region2D, Vec<D>)>
where
    D: Clone + Send + Sync,
{
    let directions = direction_fan(cfg.fan.max(2));
    let score = |p: &[f64], dir: [f64; 2]| poly(&rebuild(p.to_vec())?)?.support(dir).ok();
    let (_, argmax) = support_search(candidates, &directions, cfg, &probs_of, score);
    let mut best: Vec<Vec<f64>> = Vec::new();
    for p in argmax.into_iter().flatten() {
        if !best.contains(&p) {
            best.push(p);
        }
    }
    let best: Vec<D> = best.into_iter().filter_map(&rebuild).collect();
    let mut regions: Vec<Region2D> = par_map(candidates, cfg.threads, |_, d| poly(d))
        .into_iter()
        .flatten()
        .collect();
    regions.extend(best.iter().filter_map(&poly));
    let region = if regions.is_empty() {
        Region2D::empty()
    } else {
        hull_union(&regions)?
    };
    Ok((region, best))
}

/// Structured and random input distributions `p(x1, x2, x3)`.
fn input_candidates(ch: &ChannelSpec, cfg: &SamplerConfig, extra: &[JointPmf]) -> Result<Vec<JointPmf>> {
    let [n1, n2, n3] = ch.input_cards();
    let outer = candidate_distributions([n1, 1, n2, n3], cfg, &[]);
    let mut out: Vec<JointPmf> = outer.iter().map(|d| d.inputs()).collect();
    for e in extra {
        out.push(e.marginalize(&[X1, X2, X3])?);
    }
    Ok(out)
}

fn input_vars(ch: &ChannelSpec) -> Vec<Var> {
    let [n1, n2, n3] = ch.input_cards();
    vec![Var::new(X1, n1), Var::new(X2, n2), Var::new(X3, n3)]
}

/// Capacity region of a degraded Z channel, estimated as the hull of
/// [`t3_polygon`] over structured, random and refined input distributions.
pub fn capacity_degraded_z(ch: &ChannelSpec, cfg: &SamplerConfig) -> Result<CapacityResult> {
    capacity_degraded_z_with(ch, cfg, &[])
}

/// As [`capacity_degraded_z`], also evaluating the `(x1, x2, x3)` marginals
/// of `extra`.
pub fn capacity_degraded_z_with(ch: &ChannelSpec, cfg: &SamplerConfig, extra: &[JointPmf]) -> Result<CapacityResult> {
    cfg.validate()?;
    require_degraded_z(ch)?;
    let candidates = input_candidates(ch, cfg, extra)?;
    let vars = input_vars(ch);
    let (region, best) = capacity_search(
        &candidates,
        cfg,
        |d: &JointPmf| d.probs().to_vec(),
        |p| JointPmf::new(vars.clone(), p).ok(),
        |d| t3_polygon(d, ch, true).ok(),
    )?;
    Ok(CapacityResult {
        region,
        best,
        hi_regime: None,
        drop_mismatches: 0,
        evaluated: candidates.len(),
    })
}

/// Whether dropping the two regime-redundant bounds leaves the polygon of
/// `d` unchanged. Distributions that violate a regime inequality are not
/// checked and count as consistent.
pub fn drop_is_consistent(d: &OuterDistribution, ch: &ChannelSpec) -> Result<bool> {
    let sides = hi_regime_sides(d, ch)?;
    if sides.iter().any(|(l, r)| l - r < -VIOLATION_TOL) {
        return Ok(true);
    }
    let full = iv6_region(d, ch)?;
    let reduced = iv6_region_reduced(d, ch)?;
    Ok(full.hausdorff(&reduced) <= DROP_TOL)
}

/// Capacity region of a semi-deterministic channel in the high-interference
/// regime. Runs the falsifier first and refuses with the witness if it finds
/// a violation, unless `force` is set.
pub fn capacity_semidet_hi(ch: &ChannelSpec, cfg: &SamplerConfig, force: bool) -> Result<CapacityResult> {
    cfg.validate()?;
    require_semidet(ch)?;
    let report = hi_regime_falsify(ch, cfg)?;
    if let (false, Some(w)) = (force, &report.witness) {
        return Err(Error::HiRegimeFalsified(Box::new(w.clone())));
    }
    let [n1, n2, n3] = ch.input_cards();
    let cards = [n1, card_v12(ch, cfg), n2, n3];
    let candidates = candidate_distributions(cards, cfg, &[]);
    let (region, best) = capacity_search(
        &candidates,
        cfg,
        |d: &OuterDistribution| d.pmf().probs().to_vec(),
        |p| OuterDistribution::from_probs(cards, p).ok(),
        |d| t4_polygon(d, ch).ok(),
    )?;
    let checks = par_map(&candidates, cfg.threads, |_, d| drop_is_consistent(d, ch));
    let mut drop_mismatches = 0;
    for c in checks.into_iter().chain(best.iter().map(|d| drop_is_consistent(d, ch))) {
        drop_mismatches += usize::from(!c?);
    }
    Ok(CapacityResult {
        region,
        best: best.iter().map(|d| d.pmf().clone()).collect(),
        hi_regime: Some(report),
        drop_mismatches,
        evaluated: candidates.len(),
    })
}

/// A channel found by [`search_hi_regime_channels`].
#[derive(Debug, Clone)]
pub struct HiRegimeCandidate {
    pub index: u64,
    pub channel: ChannelSpec,
    pub report: HiRegimeReport,
    /// Area of the capacity polygon of the uniform input distribution with
    /// `V12` copying the input pair, a cheap nondegeneracy score.
    pub score: f64,
}

/// Draws random deterministic channels `Y1 = f(x1, x2, x3)`,
/// `Y2 = g(x1, x2, x3)` with the given alphabets and keeps those on which
/// the falsifier finds no violation, ranked by decreasing score.
pub fn search_hi_regime_channels(
    cards: [usize; 5],
    trials: u64,
    cfg: &SamplerConfig,
) -> Result<Vec<HiRegimeCandidate>> {
    let [_, _, _, ny1, ny2] = cards;
    let items: Vec<u64> = (0..trials).collect();
    let found = par_map(&items, cfg.threads, |_, &t| -> Result<Option<HiRegimeCandidate>> {
        use rand::Rng;
        let mut rng = substream(cfg.seed ^ 0x5eed_c4a2, t);
        let n_in = cards[0] * cards[1] * cards[2];
        let f: Vec<usize> = (0..n_in).map(|_| rng.random_range(0..ny1)).collect();
        let g: Vec<usize> = (0..n_in).map(|_| rng.random_range(0..ny2)).collect();
        let idx = |a: usize, b: usize, c: usize| (a * cards[1] + b) * cards[2] + c;
        let ch = ChannelSpec::deterministic(cards, |a, b, c| (f[idx(a, b, c)], g[idx(a, b, c)]))?;
        let inner = SamplerConfig {
            threads: 1,
            ..cfg.clone()
        };
        let report = hi_regime_falsify(&ch, &inner)?;
        if report.is_falsified() {
            return Ok(None);
        }
        let [n1, n2, n3] = ch.input_cards();
        let nv = card_v12(&ch, cfg);
        let probe = JointPmf::from_fn(crate::outer::outer_vars([n1, nv, n2, n3]), |d| {
            if d[1] == (d[0] * n2 + d[2]) % nv {
                1.0 / (n1 * n2 * n3) as f64
            } else {
                0.0
            }
        })?;
        let score = area(&t4_polygon(&OuterDistribution::new(probe)?, &ch)?);
        Ok(Some(HiRegimeCandidate {
            index: t,
            channel: ch,
            report,
            score,
        }))
    });
    let mut out = Vec::new();
    for r in found {
        out.extend(r?);
    }
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));
    Ok(out)
}

/// Shoelace area of a region.
pub fn area(r: &Region2D) -> f64 {
    let v = r.vertices();
    let n = v.len();
    (0..n)
        .map(|i| {
            let (p, q) = (v[i], v[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
        .abs()
        / 2.0
}
