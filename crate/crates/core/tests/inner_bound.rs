mod common;

use std::collections::HashMap;

use cifc_udc::inner::{
    admissible, assemble_joint_t1, case_system, inner_constants, inner_region, inner_region_from,
    region_for_distribution, sample_factorizations, AuxCards, Dest1Case, Dest2Case, FactorizationT1, InnerConstants,
    SamplerConfig, Slot, T1Cards,
};
use cifc_udc::labels::*;
use cifc_udc::search::{dirichlet, substream};
use cifc_udc::{hull_union, pin_x3, ChannelSpec, ConditionalFactor, Error, Region2D};
use cifc_udc_oracle::{mi_definition_sum, project_by_vertex_enumeration};
use proptest::prelude::*;
use rand::Rng;

use common::{fixture, random_channel};

fn one_hot(n: usize, k: usize) -> Vec<f64> {
    let mut r = vec![0.0; n];
    r[k] = 1.0;
    r
}

/// Clean-channel distribution with `V1 = X1`, `V2 = X2`, both uniform and
/// independent, every other auxiliary constant.
fn copy_inputs_factorization(ch: &ChannelSpec) -> FactorizationT1 {
    let aux = AuxCards {
        u1p: 1,
        u1: 1,
        v1: 2,
        u2p: 1,
        u2: 1,
        v12: 1,
        v2: 2,
        yhat2: 1,
    };
    let cards = T1Cards::for_channel(ch, aux);
    FactorizationT1::from_fn(&cards, |slot, g| match slot {
        Slot::V1 => vec![0.5, 0.5],
        Slot::U2V12V2 => vec![0.5, 0.5],
        Slot::X1 => one_hot(2, g[2]),
        Slot::X2 => one_hot(2, g[6]),
        _ => vec![1.0],
    })
    .unwrap()
}

fn row_of(f: &ConditionalFactor, given: &[usize]) -> Vec<f64> {
    let n = f.n_targets();
    let mut flat = 0;
    for (d, v) in given.iter().zip(f.given()) {
        flat = flat * v.card + d;
    }
    f.table()[flat * n..(flat + 1) * n].to_vec()
}

#[test]
fn constant_auxiliaries_give_uniform_inputs_times_channel() {
    let ch = fixture("clean.json");
    let cards = T1Cards::for_channel(&ch, AuxCards::uniform(1));
    let f = FactorizationT1::from_fn(&cards, |slot, _| match slot {
        Slot::X1 | Slot::X2 => vec![0.5, 0.5],
        _ => vec![1.0],
    })
    .unwrap();
    let j = assemble_joint_t1(&f, &ch).unwrap();
    let m = j.marginalize(&[X1, X2, X3, Y1, Y2]).unwrap();
    for a in 0..2 {
        for b in 0..2 {
            for d in 0..2 {
                for e in 0..2 {
                    let want = if (d, e) == (a, b) { 0.25 } else { 0.0 };
                    assert_eq!(m.prob(&[a, b, 0, d, e]), want);
                }
            }
        }
    }
}

#[test]
fn copy_assignment_matches_direct_enumeration() {
    let ch = fixture("clean.json");
    let f = copy_inputs_factorization(&ch);
    let j = assemble_joint_t1(&f, &ch).unwrap();
    let labels: Vec<&str> = j.vars().iter().map(|v| v.label.as_str()).collect();
    assert_eq!(labels, [U1P, U1, V1, U2P, U2, V12, V2, X1, X2, X3, Y1, Y2, YHAT2]);
    // product of the factor tables, looked up by label, for every tuple
    let cards = j.cards();
    let total: usize = cards.iter().product();
    let mut support = 0;
    for flat in 0..total {
        let mut digits = vec![0; cards.len()];
        let mut rest = flat;
        for k in (0..cards.len()).rev() {
            digits[k] = rest % cards[k];
            rest /= cards[k];
        }
        let at: HashMap<&str, usize> = labels.iter().copied().zip(digits.iter().copied()).collect();
        let mut direct = ch.p(at[X1], at[X2], at[X3], at[Y1], at[Y2]);
        for slot in Slot::ALL {
            let factor = f.factor(slot);
            let g: Vec<usize> = factor.given().iter().map(|v| at[v.label.as_str()]).collect();
            let t: Vec<usize> = factor.targets().iter().map(|v| at[v.label.as_str()]).collect();
            direct *= factor.prob(&g, &t);
        }
        assert!((j.prob(&digits) - direct).abs() < 1e-15);
        if direct > 0.0 {
            support += 1;
            assert!(at[X1] == at[V1] && at[X2] == at[V2] && at[Y1] == at[X1] && at[Y2] == at[X2]);
        }
    }
    assert_eq!(support, 4);
}

#[test]
fn yhat_outside_its_signature_is_rejected() {
    let ch = fixture("clean.json");
    let f = copy_inputs_factorization(&ch);
    let mut factors = f.factors().to_vec();
    let old = &factors[8];
    let mut given = old.given().to_vec();
    given.push(cifc_udc::Var::new(X1, 2));
    factors[8] = ConditionalFactor::uniform(old.targets().to_vec(), given).unwrap();
    assert!(matches!(FactorizationT1::new(factors), Err(Error::InvalidFactor(_))));
}

#[test]
fn clean_constants_match_definition_sums() {
    let ch = fixture("clean.json");
    let j = assemble_joint_t1(&copy_inputs_factorization(&ch), &ch).unwrap();
    let c = inner_constants(&j).unwrap();
    let want = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0];
    for (k, (got, w)) in c.as_array().iter().zip(want).enumerate() {
        assert!((got - w).abs() < 1e-12, "{} = {got}, expected {w}", InnerConstants::NAMES[k]);
    }
    // spot checks of the grouping against the independent oracle
    let d = mi_definition_sum(&j, &[Y1], &[U1P, U1, V1, U2P, U2, V12, X3], &[]).unwrap();
    let k = mi_definition_sum(&j, &[Y2], &[U1, U2, V2], &[U1P, U2P, X3]).unwrap();
    assert!((c.d - d).abs() < 1e-12 && (c.k - k).abs() < 1e-12);
}

#[test]
fn missing_variables_are_reported() {
    let j = cifc_udc::JointPmf::uniform(vec![cifc_udc::Var::new(X1, 2)]).unwrap();
    assert!(matches!(inner_constants(&j), Err(Error::MissingVariable(_))));
}

/// Union over the eight cases with each case projected by the
/// vertex-enumeration oracle.
fn oracle_region(c: &InnerConstants, cap: f64) -> Region2D {
    let mut pieces = Vec::new();
    for d1 in [Dest1Case::AllActive, Dest1Case::NoBinned, Dest1Case::NoPrivate, Dest1Case::Silent] {
        for d2 in [Dest2Case::AllActive, Dest2Case::Silent] {
            let sys = case_system(c, d1, d2).unwrap();
            if let Ok(r) = project_by_vertex_enumeration(&sys, ["R1", "R2"], cap) {
                pieces.push(r);
            }
        }
    }
    if pieces.is_empty() {
        Region2D::empty()
    } else {
        hull_union(&pieces).unwrap()
    }
}

#[test]
fn clean_constants_give_the_unit_square_by_both_routes() {
    let ch = fixture("clean.json");
    let c = inner_constants(&assemble_joint_t1(&copy_inputs_factorization(&ch), &ch).unwrap()).unwrap();
    let r = region_for_distribution(&c).unwrap();
    assert!(r.hausdorff(&Region2D::rectangle(1.0, 1.0)) < 1e-9);
    assert!(r.hausdorff(&oracle_region(&c, 50.0)) < 1e-7);
}

#[test]
fn inadmissible_constants_are_refused() {
    let mut c = InnerConstants::from_array([0.0; 16]);
    (c.c, c.p, c.b) = (0.5, 0.1, 0.2);
    assert!(!admissible(&c));
    assert!(matches!(region_for_distribution(&c), Err(Error::InadmissibleConstants { .. })));
}

/// Constants that respect every chain-rule ordering and admissibility, with
/// the binning floors small enough that `A + N2 <= L` and `N2 <= M`.
fn ordered_constants() -> impl Strategy<Value = InnerConstants> {
    prop::array::uniform16(0.0f64..1.0).prop_map(|u| {
        let p = u[0];
        let h = p + u[1];
        let e = h + u[2];
        let d = e + u[3];
        let i = p + u[4];
        let f = i + u[5];
        let j = u[6];
        let g = j + u[7];
        let m = u[8] + 0.05;
        let n2 = m * u[9];
        let n1 = n2 * u[10];
        let a = u[11] * u[12];
        let l = (m + u[13]).max(a + n2);
        let k = l + u[14];
        let b = u[15];
        let c = (p + b) * u[12];
        InnerConstants::from_array([a, b, c, d, e, f, g, h, i, j, k, l, m, n1, n2, p])
    })
}

fn any_admissible_constants() -> impl Strategy<Value = InnerConstants> {
    prop::array::uniform16(0.0f64..1.5).prop_map(|mut u| {
        // enforce the orderings only, leaving the binning floors free
        u[4] = u[4].min(u[3]);
        u[7] = u[7].min(u[4]);
        u[15] = u[15].min(u[7]).min(u[8]);
        u[8] = u[8].min(u[5]).max(u[15]);
        u[9] = u[9].min(u[6]);
        u[11] = u[11].min(u[10]);
        u[12] = u[12].min(u[11]);
        u[13] = u[13].min(u[14]);
        u[2] = u[2].min(u[15] + u[1]);
        InnerConstants::from_array(u)
    })
}

#[test]
fn binning_floor_can_exclude_the_origin() {
    // constants of a random distribution on a noisy channel: the floor
    // R'2p >= A leaves no room under L2p + L22 <= L, and the case that
    // drops the first destination-2 constraint pins R'2p = 0 < A
    let mut c = InnerConstants::from_array([0.0; 16]);
    (c.a, c.n1, c.n2, c.l, c.k, c.m) = (0.0288, 0.0514, 0.1441, 0.0019, 0.01, 0.001);
    (c.d, c.e, c.h, c.f, c.i) = (0.3, 0.2, 0.1, 0.2, 0.1);
    assert!(admissible(&c) && c.ordering_violation() <= 1e-12);
    let r = region_for_distribution(&c).unwrap();
    assert!(!r.contains_point([0.0, 0.0], 1e-9));
    assert!(oracle_region(&c, 20.0).is_empty() == r.is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn origin_is_in_the_region_when_floors_fit(c in ordered_constants()) {
        prop_assume!(admissible(&c));
        prop_assert!(region_for_distribution(&c).unwrap().contains_point([0.0, 0.0], 1e-9));
    }

    #[test]
    fn case_union_matches_vertex_enumeration(c in any_admissible_constants()) {
        prop_assume!(admissible(&c));
        let cap = 20.0;
        let fm = cifc_udc::inner::region_for_distribution_capped(&c, cap).unwrap();
        prop_assert!(fm.hausdorff(&oracle_region(&c, cap)) < 1e-7);
    }

    #[test]
    fn sampled_constants_respect_orderings(seed in 0u64..100_000) {
        let ch = random_channel([2; 5], seed, 0);
        let cfg = SamplerConfig { seed, num_samples: 1, include_deterministic_corners: false, ..SamplerConfig::default() };
        for f in sample_factorizations(&ch, &cfg).unwrap() {
            let j = assemble_joint_t1(&f, &ch).unwrap();
            let c = inner_constants(&j).unwrap();
            prop_assert!(c.ordering_violation() <= 1e-9);
            let oracle_h = mi_definition_sum(&j, &[Y1], &[U2P, U2, V12, X3], &[U1P, U1, V1]).unwrap();
            prop_assert!((c.h - oracle_h).abs() < 1e-12);
        }
    }
}

#[test]
fn corner_only_sampling_is_reproducible() {
    let ch = fixture("clean.json");
    let cfg = SamplerConfig {
        corner_cap: 300,
        ..SamplerConfig::default()
    };
    let a = sample_factorizations(&ch, &cfg).unwrap();
    let b = sample_factorizations(&ch, &cfg).unwrap();
    assert!(!a.is_empty() && a == b);
    let with_draws = SamplerConfig {
        num_samples: 5,
        seed: 9,
        ..cfg.clone()
    };
    assert_eq!(
        sample_factorizations(&ch, &with_draws).unwrap(),
        sample_factorizations(&ch, &with_draws).unwrap()
    );
}

#[test]
fn concentration_controls_factor_entropy() {
    let ch = fixture("clean.json");
    let mean_entropy = |conc: f64| {
        let cfg = SamplerConfig {
            seed: 21,
            num_samples: 1000,
            dirichlet_concentration: conc,
            include_deterministic_corners: false,
            include_yhat_constant_variant: false,
            ..SamplerConfig::default()
        };
        let fs = sample_factorizations(&ch, &cfg).unwrap();
        let h: f64 = fs
            .iter()
            .map(|f| {
                let row = &f.factor(Slot::U2V12V2).table()[..8];
                -row.iter().filter(|&&p| p > 0.0).map(|p| p * p.log2()).sum::<f64>()
            })
            .sum();
        h / fs.len() as f64
    };
    assert!(mean_entropy(0.1) + 0.5 < mean_entropy(10.0));
}

#[test]
fn silent_outputs_give_the_origin() {
    let ch = ChannelSpec::deterministic([2, 2, 2, 1, 1], |_, _, _| (0, 0)).unwrap();
    let cfg = SamplerConfig {
        num_samples: 10,
        corner_cap: 300,
        seed: 4,
        ..SamplerConfig::default()
    };
    let r = inner_region(&ch, &cfg).unwrap().region;
    assert_eq!(r.vertices(), &[[0.0, 0.0]]);
}

#[test]
fn union_grows_with_the_sample_set() {
    let ch = fixture("noisy_z.json");
    let cfg = SamplerConfig {
        num_samples: 40,
        corner_cap: 200,
        seed: 5,
        ..SamplerConfig::default()
    };
    let fs = sample_factorizations(&ch, &cfg).unwrap();
    let mut prev = inner_region_from(&ch, &fs[..20], 2).unwrap().region;
    for end in [100, 250, fs.len()] {
        let next = inner_region_from(&ch, &fs[..end], 2).unwrap().region;
        assert!(next.contains(&prev, 1e-9));
        prev = next;
    }
}

#[test]
fn compress_forward_never_hurts() {
    let ch = fixture("noisy_z.json");
    let cfg = SamplerConfig {
        num_samples: 30,
        include_deterministic_corners: false,
        include_yhat_constant_variant: false,
        seed: 6,
        ..SamplerConfig::default()
    };
    for f in sample_factorizations(&ch, &cfg).unwrap() {
        let plain = inner_region_from(&ch, &[f.with_constant_yhat()], 1).unwrap().region;
        let both = inner_region_from(&ch, &[f.clone(), f.with_constant_yhat()], 1).unwrap().region;
        assert!(both.contains(&plain, 1e-9));
    }
}

/// Re-embeds a factorization of the pinned channel into the original one,
/// with `X3` fixed at `symbol`.
fn embed(f: &FactorizationT1, ch: &ChannelSpec, aux: AuxCards, symbol: usize) -> FactorizationT1 {
    let cards = T1Cards::for_channel(ch, aux);
    FactorizationT1::from_fn(&cards, |slot, g| match slot {
        Slot::X3 => one_hot(ch.cards()[2], symbol),
        Slot::YHat2 => {
            let mut g = g.to_vec();
            g[4] = 0;
            row_of(f.factor(slot), &g)
        }
        _ => row_of(f.factor(slot), g),
    })
    .unwrap()
}

#[test]
fn destination_cooperation_never_hurts() {
    let ch = fixture("noisy_z.json");
    let aux = AuxCards::default();
    for symbol in 0..2 {
        let pinned = pin_x3(&ch, symbol).unwrap();
        let cfg = SamplerConfig {
            num_samples: 25,
            corner_cap: 200,
            seed: 7,
            ..SamplerConfig::default()
        };
        let fs = sample_factorizations(&pinned, &cfg).unwrap();
        let lifted: Vec<FactorizationT1> = fs.iter().map(|f| embed(f, &ch, aux, symbol)).collect();
        for (f, g) in fs.iter().zip(&lifted).take(60) {
            let a = inner_constants(&assemble_joint_t1(f, &pinned).unwrap()).unwrap();
            let b = inner_constants(&assemble_joint_t1(g, &ch).unwrap()).unwrap();
            for (x, y) in a.as_array().iter().zip(b.as_array()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        let small = inner_region_from(&pinned, &fs, 2).unwrap().region;
        let large = inner_region_from(&ch, &lifted, 2).unwrap().region;
        assert!(large.contains(&small, 1e-9));
    }
}

#[test]
fn constant_auxiliaries_collapse_to_the_relay_rate() {
    for seed in 0..10u64 {
        let ch = random_channel([2; 5], 70, seed);
        let cards = T1Cards::for_channel(&ch, AuxCards::uniform(1));
        let mut rng = substream(71, seed);
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let conc = rng.random_range(0.3..3.0);
                dirichlet(&mut rng, 2, conc)
            })
            .collect();
        let f = FactorizationT1::from_fn(&cards, |slot, _| match slot {
            Slot::X1 => rows[0].clone(),
            Slot::X2 => rows[1].clone(),
            Slot::X3 => rows[2].clone(),
            _ => vec![1.0],
        })
        .unwrap();
        let j = assemble_joint_t1(&f, &ch).unwrap();
        let d = mi_definition_sum(&j, &[Y1], &[X3], &[]).unwrap();
        let r = region_for_distribution(&inner_constants(&j).unwrap()).unwrap();
        assert!(r.hausdorff(&Region2D::from_points(&[[0.0, 0.0], [d, 0.0]])) < 1e-9);
    }
}
