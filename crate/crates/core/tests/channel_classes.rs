mod common;

use cifc_udc::channel::CLASSIFY_TOL;
use cifc_udc::search::{dirichlet, substream};
use cifc_udc::{classify, pin_x3, ChannelSpec, Error};
use proptest::prelude::*;

use common::{fixture, random_channel};

#[test]
fn fixtures_load_and_classify() {
    let expect = [
        ("clean.json", (true, false, true)),
        ("degraded_z.json", (true, true, true)),
        ("relay_only.json", (true, true, true)),
        ("semidet_degenerate.json", (true, true, true)),
        ("noisy_z.json", (true, false, false)),
    ];
    for (name, (z, deg, semi)) in expect {
        let c = classify(&fixture(name), CLASSIFY_TOL);
        assert_eq!((c.is_z, c.is_degraded, c.is_semi_deterministic), (z, deg, semi), "{name}");
    }
}

#[test]
fn degraded_z_agrees_with_exhaustive_markov_check() {
    // p(y1 | y2, x1, x2, x3) must not depend on (x1, x2) wherever y2 is
    // reachable; recompute from scratch over all 32 assignments
    let ch = fixture("degraded_z.json");
    for c in 0..2 {
        for e in 0..4 {
            let mut seen: Option<Vec<f64>> = None;
            for a in 0..2 {
                for b in 0..2 {
                    let py2: f64 = (0..2).map(|d| ch.p(a, b, c, d, e)).sum();
                    if py2 == 0.0 {
                        continue;
                    }
                    let row: Vec<f64> = (0..2).map(|d| ch.p(a, b, c, d, e) / py2).collect();
                    if let Some(r) = &seen {
                        assert_eq!(r, &row);
                    }
                    seen = Some(row);
                }
            }
        }
    }
    assert!(classify(&ch, CLASSIFY_TOL).is_degraded);
}

#[test]
fn bad_documents_are_located() {
    let mut doc: serde_json::Value = serde_json::from_str(&fixture("relay_only.json").to_json()).unwrap();
    doc["p"][0] = serde_json::json!(0.9);
    match ChannelSpec::from_json(&doc.to_string()) {
        Err(Error::RowSum { x1: 0, x2: 0, x3: 0, .. }) => {}
        other => panic!("expected a row-sum error at (0,0,0), got {other:?}"),
    }
    doc["p"].as_array_mut().unwrap().pop();
    assert!(matches!(
        ChannelSpec::from_json(&doc.to_string()),
        Err(Error::ShapeMismatch { expected: 32, found: 31 })
    ));
    assert!(matches!(ChannelSpec::from_json("{\"x1\": 2"), Err(Error::Parse(_))));
}

#[test]
fn pinned_xor_channel_inverts() {
    let ch = fixture("degraded_z.json");
    let pinned = pin_x3(&ch, 1).unwrap();
    assert_eq!(pinned.cards(), [2, 2, 1, 2, 4]);
    for a in 0..2 {
        for b in 0..2 {
            assert_eq!(pinned.y1_marginal(a, b, 0)[1 - a], 1.0);
        }
    }
    assert!(matches!(pin_x3(&ch, 5), Err(Error::IndexOutOfRange { index: 5, len: 2 })));
}

/// Channel with `p(y1|x1,x3) p(y2|x1,x2,x3)` built from random rows.
fn product_channel(seed: u64) -> ChannelSpec {
    let mut rng = substream(seed, 0);
    let y1: Vec<Vec<f64>> = (0..6).map(|_| dirichlet(&mut rng, 3, 1.0)).collect();
    let y2: Vec<Vec<f64>> = (0..12).map(|_| dirichlet(&mut rng, 2, 1.0)).collect();
    ChannelSpec::from_fn([2, 3, 3, 3, 2], |a, b, c, d, e| y1[a * 3 + c][d] * y2[(a * 3 + b) * 2 % 12 + c % 2][e])
        .unwrap()
}

fn relabel(ch: &ChannelSpec, perm1: &[usize], perm2: &[usize]) -> ChannelSpec {
    ChannelSpec::from_fn(ch.cards(), |a, b, c, d, e| ch.p(a, b, c, perm1[d], perm2[e])).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn product_form_is_always_z(seed in 0u64..100_000) {
        prop_assert!(classify(&product_channel(seed), CLASSIFY_TOL).is_z);
    }

    #[test]
    fn output_relabelling_changes_no_flag(
        seed in 0u64..100_000,
        p1 in Just(vec![0usize, 1, 2]).prop_shuffle(),
        p2 in Just(vec![0usize, 1]).prop_shuffle(),
        structured in any::<bool>(),
    ) {
        let ch = if structured { product_channel(seed) } else { random_channel([2, 3, 3, 3, 2], seed, 0) };
        let a = classify(&ch, CLASSIFY_TOL);
        let b = classify(&relabel(&ch, &p1, &p2), CLASSIFY_TOL);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn pinning_yields_valid_channels(seed in 0u64..100_000, symbol in 0usize..3) {
        let ch = random_channel([2, 2, 3, 2, 2], seed, 1);
        let pinned = pin_x3(&ch, symbol).unwrap();
        let reparsed = ChannelSpec::from_json(&pinned.to_json()).unwrap();
        prop_assert_eq!(reparsed.cards(), [2, 2, 1, 2, 2]);
        for a in 0..2 {
            for b in 0..2 {
                for d in 0..2 {
                    for e in 0..2 {
                        prop_assert_eq!(pinned.p(a, b, 0, d, e), ch.p(a, b, symbol, d, e));
                    }
                }
            }
        }
    }
}
