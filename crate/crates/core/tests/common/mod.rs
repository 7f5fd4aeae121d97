#![allow(dead_code)]

use cifc_udc::search::{dirichlet, substream};
use cifc_udc::{ChannelSpec, JointPmf, LinearSystem, Var};
use rand::Rng;

pub fn fixture(name: &str) -> ChannelSpec {
    let path = format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    ChannelSpec::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get()).min(8)
}

/// Dirichlet(1) joint over `cards.len()` variables labelled a, b, c, ...
pub fn random_joint(cards: &[usize], seed: u64, index: u64) -> JointPmf {
    let vars: Vec<Var> = cards
        .iter()
        .enumerate()
        .map(|(k, &c)| Var::new(((b'a' + k as u8) as char).to_string(), c))
        .collect();
    let n = cards.iter().product();
    JointPmf::new(vars, dirichlet(&mut substream(seed, index), n, 1.0)).unwrap()
}

/// Random channel with every row drawn from Dirichlet(1).
pub fn random_channel(cards: [usize; 5], seed: u64, index: u64) -> ChannelSpec {
    let mut rng = substream(seed, index);
    let rows = cards[0] * cards[1] * cards[2];
    let mut p = Vec::new();
    for _ in 0..rows {
        p.extend(dirichlet(&mut rng, cards[3] * cards[4], 1.0));
    }
    ChannelSpec::new(cards, p).unwrap()
}

/// Semi-deterministic test channel: `Y2 = X1 XOR X2`, `Y1` a noisy copy of
/// `X1 AND X3`.
pub fn semidet_noisy() -> ChannelSpec {
    ChannelSpec::from_fn([2, 2, 2, 2, 2], |a, b, c, y1, y2| {
        let p1 = if y1 == (a & c) { 0.8 } else { 0.2 };
        if y2 == a ^ b {
            p1
        } else {
            0.0
        }
    })
    .unwrap()
}

/// Bounded random system over `r1, r2` and up to four extra variables, all
/// nonnegative, with a total-sum row so vertex enumeration sees a polytope.
pub fn random_system(seed: u64, index: u64) -> LinearSystem {
    let mut rng = substream(seed, index);
    let extra = rng.random_range(1..=4);
    let mut names = vec!["r1".to_string(), "r2".to_string()];
    names.extend((0..extra).map(|k| format!("s{k}")));
    let mut sys = LinearSystem::new(&names).unwrap();
    for v in &names {
        sys.set_nonnegative(v).unwrap();
    }
    let n = names.len();
    sys.push_le(vec![1.0; n], rng.random_range(2.0..6.0)).unwrap();
    let rows = rng.random_range(2..=11);
    for _ in 0..rows {
        let coef: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.35) {
                    0.0
                } else {
                    (rng.random_range(-2.0f64..2.0) * 4.0).round() / 4.0
                }
            })
            .collect();
        sys.push_le(coef, rng.random_range(0.25..4.0)).unwrap();
    }
    sys
}
