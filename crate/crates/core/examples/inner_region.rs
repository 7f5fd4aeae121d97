//! Inner-bound region of the cooperating-destination channel, estimated as
//! the hull of per-distribution regions over structured and random
//! distributions.

use cifc_udc::inner::{inner_region, SamplerConfig};
use cifc_udc::ChannelSpec;

fn main() -> cifc_udc::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/noisy_z.json");
    let ch = ChannelSpec::from_json(&std::fs::read_to_string(path)?)?;
    let cfg = SamplerConfig {
        seed: 1,
        num_samples: 200,
        corner_cap: 500,
        threads: 4,
        ..SamplerConfig::default()
    };
    let res = inner_region(&ch, &cfg)?;
    let admissible = res.log.iter().filter(|r| r.admissible).count();
    println!("{} distributions evaluated, {admissible} admissible", res.log.len());
    for v in res.region.vertices() {
        println!("  ({:.4}, {:.4})", v[0], v[1]);
    }
    Ok(())
}
