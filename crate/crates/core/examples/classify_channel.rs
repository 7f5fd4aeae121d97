//! Loads a channel from JSON and reports its structure, plus a search for
//! violations of the high-interference-gain regime.
//!
//! `cargo run --example classify_channel -- [channel.json]`

use cifc_udc::capacity::hi_regime_falsify;
use cifc_udc::channel::CLASSIFY_TOL;
use cifc_udc::inner::SamplerConfig;
use cifc_udc::{classify, ChannelSpec};

fn main() -> cifc_udc::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/semidet_pair.json").into());
    let ch = ChannelSpec::from_json(&std::fs::read_to_string(&path)?)?;
    let class = classify(&ch, CLASSIFY_TOL);
    println!("{path}: alphabets {:?}", ch.cards());
    println!("  Z structure        {}", class.is_z);
    println!("  degraded           {}", class.is_degraded);
    println!("  semi-deterministic {}", class.is_semi_deterministic);
    if class.is_semi_deterministic {
        let cfg = SamplerConfig {
            num_samples: 200,
            ..SamplerConfig::default()
        };
        let report = hi_regime_falsify(&ch, &cfg)?;
        match &report.witness {
            Some(w) => println!("  regime falsified after {} distributions: {w}", report.samples),
            None => println!("  no regime violation in {} distributions", report.samples),
        }
    }
    Ok(())
}
