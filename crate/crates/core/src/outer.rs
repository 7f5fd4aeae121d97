//! The converse outer bound and a numerical estimate of its union over all
//! input distributions.
//!
//! For one distribution `p(x1, v12, x2, x3)` the bound is a pentagon-like
//! polygon ([`t2_polygon`]). The union over distributions is estimated by its
//! support function: for every direction of a fixed fan the largest support
//! value seen over sampled and refined distributions becomes a halfplane,
//! and the estimate is the intersection of those halfplanes.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSpec;
use crate::error::{Error, Result};
use crate::inner::SamplerConfig;
use crate::labels::{V12, X1, X2, X3, Y1, Y2};
use crate::polytope::{HalfPlane, Region2D};
use crate::prob::{JointPmf, Var};
use crate::search::{coordinate_ascent, direction_fan, dirichlet, par_map, substream, AscentConfig};

/// Stream offset separating refinement randomness from sampling randomness.
const SAMPLE_STREAM: u64 = 0;

/// A joint pmf over `(x1, v12, x2, x3)`, in that variable order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterDistribution {
    pmf: JointPmf,
}

impl OuterDistribution {
    pub fn new(pmf: JointPmf) -> Result<Self> {
        let labels: Vec<&str> = pmf.vars().iter().map(|v| v.label.as_str()).collect();
        if labels != [X1, V12, X2, X3] {
            return Err(Error::InvalidFactor(format!(
                "expected variables (x1, v12, x2, x3), found {labels:?}"
            )));
        }
        Ok(OuterDistribution { pmf })
    }

    /// `cards` is `[|X1|, |V12|, |X2|, |X3|]`.
    pub fn from_probs(cards: [usize; 4], probs: Vec<f64>) -> Result<Self> {
        OuterDistribution::new(JointPmf::new(outer_vars(cards), probs)?)
    }

    pub fn uniform(cards: [usize; 4]) -> Self {
        OuterDistribution {
            pmf: JointPmf::uniform(outer_vars(cards)).expect("positive cardinalities"),
        }
    }

    /// Embeds an input distribution `p(x1, x2, x3)` with a constant `v12`.
    pub fn from_inputs(inputs: &JointPmf, card_v12: usize) -> Result<Self> {
        let m = inputs.marginalize(&[X1, X2, X3])?;
        let c = m.cards();
        let cards = [c[0], card_v12, c[1], c[2]];
        let pmf = JointPmf::from_fn(outer_vars(cards), |d| {
            if d[1] == 0 {
                m.prob(&[d[0], d[2], d[3]])
            } else {
                0.0
            }
        })?;
        Ok(OuterDistribution { pmf })
    }

    pub fn pmf(&self) -> &JointPmf {
        &self.pmf
    }

    pub fn cards(&self) -> [usize; 4] {
        let c = self.pmf.cards();
        [c[0], c[1], c[2], c[3]]
    }

    /// The `(x1, x2, x3)` marginal.
    pub fn inputs(&self) -> JointPmf {
        self.pmf.marginalize(&[X1, X2, X3]).expect("labels present")
    }

    fn check_channel(&self, ch: &ChannelSpec) -> Result<()> {
        let [a, _, b, c] = self.cards();
        if [a, b, c] != ch.input_cards() {
            return Err(Error::CardinalityMismatch(format!(
                "distribution has (|X1|,|X2|,|X3|) = {:?}, channel has {:?}",
                [a, b, c],
                ch.input_cards()
            )));
        }
        Ok(())
    }

    /// Full joint over `(x1, v12, x2, x3, y1, y2)`.
    pub fn with_outputs(&self, ch: &ChannelSpec) -> Result<JointPmf> {
        self.check_channel(ch)?;
        ch.attach_outputs(&self.pmf)
    }
}

pub(crate) fn outer_vars(cards: [usize; 4]) -> Vec<Var> {
    vec![
        Var::new(X1, cards[0]),
        Var::new(V12, cards[1]),
        Var::new(X2, cards[2]),
        Var::new(X3, cards[3]),
    ]
}

/// The five right-hand sides of the outer bound, in order: two bounds on
/// `R1`, one on `R2`, two on `R1 + R2`.
pub fn t2_bounds(d: &OuterDistribution, ch: &ChannelSpec) -> Result<[f64; 5]> {
    let j = d.with_outputs(ch)?;
    let mi = |a: &[&str], b: &[&str], c: &[&str]| j.conditional_mutual_information(a, b, c);
    let r1_full = mi(&[Y1], &[X1, X2, X3], &[])?;
    let r1_aux = mi(&[Y1], &[X1, V12, X3], &[])?;
    let r2 = mi(&[Y2], &[X2], &[X1, X3])?;
    let sum_joint = mi(&[Y1, Y2], &[X1, X2], &[X3])?;
    let sum_split = mi(&[X2], &[Y2], &[X1, V12, X3])? + r1_aux;
    Ok([r1_full, r1_aux, r2, sum_joint, sum_split])
}

fn t2_halfplanes(b: &[f64; 5]) -> [HalfPlane; 5] {
    [
        HalfPlane::r1_at_most(b[0]),
        HalfPlane::r1_at_most(b[1]),
        HalfPlane::r2_at_most(b[2]),
        HalfPlane::sum_at_most(b[3]),
        HalfPlane::sum_at_most(b[4]),
    ]
}

/// Outer-bound polygon of one distribution.
pub fn t2_polygon(d: &OuterDistribution, ch: &ChannelSpec) -> Result<Region2D> {
    Ok(Region2D::from_halfplanes(&t2_halfplanes(&t2_bounds(d, ch)?), ch.rate_cap()))
}

/// Structured input distributions: each of `x1, x2, x3` is constant or
/// uniform, and `v12` is constant, uniform, or a copy of `x1`, of `x2` or of
/// the pair `(x1, x2)` (reduced modulo `|V12|`). Ordered by the number of
/// non-constant variables.
pub fn outer_corners(cards: [usize; 4]) -> Vec<OuterDistribution> {
    #[derive(Clone, Copy)]
    enum V {
        Const,
        Uniform,
        CopyX1,
        CopyX2,
        CopyPair,
    }
    let [n1, nv, n2, n3] = cards;
    let mut specs = Vec::new();
    for mask in 0..8u32 {
        let v_options: &[V] = if nv > 1 {
            &[V::Const, V::Uniform, V::CopyX1, V::CopyX2, V::CopyPair]
        } else {
            &[V::Const]
        };
        for &v in v_options {
            let (u1, u2, u3) = (mask & 1 != 0, mask & 2 != 0, mask & 4 != 0);
            if (u1 && n1 == 1) || (u2 && n2 == 1) || (u3 && n3 == 1) {
                continue;
            }
            let needs = match v {
                V::CopyX1 => u1,
                V::CopyX2 => u2,
                V::CopyPair => u1 && u2,
                _ => true,
            };
            if !needs {
                continue;
            }
            let weight = mask.count_ones() + u32::from(!matches!(v, V::Const));
            specs.push((weight, u1, u2, u3, v));
        }
    }
    specs.sort_by_key(|s| s.0);
    specs
        .into_iter()
        .map(|(_, u1, u2, u3, v)| {
            let marginal = |uniform: bool, n: usize, k: usize| {
                if uniform {
                    1.0 / n as f64
                } else if k == 0 {
                    1.0
                } else {
                    0.0
                }
            };
            let pmf = JointPmf::from_fn(outer_vars(cards), |d| {
                let (a, w, b, c) = (d[0], d[1], d[2], d[3]);
                let pv = match v {
                    V::Const => marginal(false, nv, w),
                    V::Uniform => marginal(true, nv, w),
                    V::CopyX1 => f64::from(u8::from(w == a % nv)),
                    V::CopyX2 => f64::from(u8::from(w == b % nv)),
                    V::CopyPair => f64::from(u8::from(w == (a * n2 + b) % nv)),
                };
                marginal(u1, n1, a) * marginal(u2, n2, b) * marginal(u3, n3, c) * pv
            })
            .expect("structured corner is a pmf");
            OuterDistribution { pmf }
        })
        .collect()
}

/// Dirichlet draw for sample `index`.
pub fn random_outer(cards: [usize; 4], seed: u64, index: u64, concentration: f64) -> OuterDistribution {
    let n = cards.iter().product();
    let mut rng = substream(seed, index);
    OuterDistribution {
        pmf: JointPmf::new(outer_vars(cards), dirichlet(&mut rng, n, concentration))
            .expect("dirichlet draw is a pmf"),
    }
}

/// `|V12|` used for a channel under `cfg`.
pub fn card_v12(ch: &ChannelSpec, cfg: &SamplerConfig) -> usize {
    cfg.card_v12.unwrap_or_else(|| {
        let [a, b, _] = ch.input_cards();
        a * b
    })
}

/// The candidate distributions a support-function search starts from:
/// corners (when enabled), `extra`, the uniform pmf, then Dirichlet draws.
pub fn candidate_distributions(
    cards: [usize; 4],
    cfg: &SamplerConfig,
    extra: &[OuterDistribution],
) -> Vec<OuterDistribution> {
    let mut out = Vec::new();
    if cfg.include_deterministic_corners {
        out.extend(outer_corners(cards));
    }
    out.extend(extra.iter().cloned());
    out.push(OuterDistribution::uniform(cards));
    out.extend((0..cfg.num_samples as u64).map(|i| {
        random_outer(cards, cfg.seed, SAMPLE_STREAM + i, cfg.dirichlet_concentration)
    }));
    out
}

/// Maximizes `score` in every fan direction: evaluates all candidates, then
/// refines the best `cfg.refine_starts` per direction by coordinate ascent
/// over the pmf entries. Returns the best value per direction and the pmf
/// entries that attained it.
pub(crate) fn support_search<D: Sync>(
    candidates: &[D],
    directions: &[[f64; 2]],
    cfg: &SamplerConfig,
    probs_of: &(impl Fn(&D) -> Vec<f64> + Sync),
    score: impl Fn(&[f64], [f64; 2]) -> Option<f64> + Sync,
) -> (Vec<f64>, Vec<Option<Vec<f64>>>) {
    let evaluated: Vec<Vec<f64>> = par_map(candidates, cfg.threads, |_, d| {
        let p = probs_of(d);
        directions
            .iter()
            .map(|&dir| score(&p, dir).unwrap_or(f64::NEG_INFINITY))
            .collect()
    });
    let ascent = AscentConfig {
        sweeps: cfg.refine_sweeps,
        ..AscentConfig::default()
    };
    let per_dir = par_map(directions, cfg.threads, |k, &dir| {
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|&a, &b| evaluated[b][k].total_cmp(&evaluated[a][k]).then(a.cmp(&b)));
        let Some(&first) = order.first() else {
            return (f64::NEG_INFINITY, None);
        };
        let mut best = (evaluated[first][k], probs_of(&candidates[first]));
        for &i in order.iter().take(cfg.refine_starts) {
            let (p, v) = coordinate_ascent(&probs_of(&candidates[i]), ascent, |p| {
                score(p, dir).unwrap_or(f64::NEG_INFINITY)
            });
            if v > best.0 {
                best = (v, p);
            }
        }
        (best.0, best.0.is_finite().then_some(best.1))
    });
    per_dir.into_iter().unzip()
}

/// Record stating how an estimate was produced. Under-sampling can only
/// make the estimate smaller than the exact bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Caveat {
    pub samples: usize,
    pub seed: u64,
    pub card_v12: usize,
    pub fan: usize,
    pub refine_starts: usize,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct OuterResult {
    pub region: Region2D,
    pub caveat: Caveat,
}

/// Support-function estimate of the union of [`t2_polygon`] over all input
/// distributions.
pub fn outer_region_estimate(ch: &ChannelSpec, cfg: &SamplerConfig) -> Result<OuterResult> {
    outer_region_estimate_with(ch, cfg, &[])
}

/// As [`outer_region_estimate`], with `extra` distributions evaluated
/// alongside the sampled ones.
pub fn outer_region_estimate_with(
    ch: &ChannelSpec,
    cfg: &SamplerConfig,
    extra: &[OuterDistribution],
) -> Result<OuterResult> {
    cfg.validate()?;
    let [n1, n2, n3] = ch.input_cards();
    let cards = [n1, card_v12(ch, cfg), n2, n3];
    for d in extra {
        d.check_channel(ch)?;
        if d.cards() != cards {
            return Err(Error::CardinalityMismatch(format!(
                "extra distribution has cardinalities {:?}, search uses {cards:?}",
                d.cards()
            )));
        }
    }
    let candidates = candidate_distributions(cards, cfg, extra);
    let directions = direction_fan(cfg.fan.max(2));
    let score = |p: &[f64], dir: [f64; 2]| {
        let d = OuterDistribution::from_probs(cards, p.to_vec()).ok()?;
        t2_polygon(&d, ch).ok()?.support(dir).ok()
    };
    let (best, _) = support_search(
        &candidates,
        &directions,
        cfg,
        &|d: &OuterDistribution| d.pmf.probs().to_vec(),
        score,
    );
    let region = envelope(&directions, &best, ch.rate_cap());
    Ok(OuterResult {
        region,
        caveat: Caveat {
            samples: cfg.num_samples,
            seed: cfg.seed,
            card_v12: cards[1],
            fan: directions.len(),
            refine_starts: cfg.refine_starts,
            note: "numerical estimate over sampled distributions with a fixed |V12|; \
                   under-sampling can only lower the support value in each fan direction"
                .into(),
        },
    })
}

/// Intersection of the supporting halfplanes `dir . r <= value`.
pub fn envelope(directions: &[[f64; 2]], values: &[f64], cap: f64) -> Region2D {
    let hps: Vec<HalfPlane> = directions
        .iter()
        .zip(values)
        .filter(|(_, v)| v.is_finite())
        .map(|(d, &v)| HalfPlane::new(d[0], d[1], v))
        .collect();
    Region2D::from_halfplanes(&hps, cap)
}
