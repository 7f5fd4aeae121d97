//! Support-function estimate of the converse outer bound, with the record
//! of how it was produced.

use cifc_udc::inner::SamplerConfig;
use cifc_udc::outer::outer_region_estimate;
use cifc_udc::ChannelSpec;

fn main() -> cifc_udc::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/noisy_z.json");
    let ch = ChannelSpec::from_json(&std::fs::read_to_string(path)?)?;
    let cfg = SamplerConfig {
        seed: 2,
        num_samples: 300,
        fan: 32,
        refine_starts: 2,
        threads: 4,
        ..SamplerConfig::default()
    };
    let res = outer_region_estimate(&ch, &cfg)?;
    println!("caveat: {}", serde_json::to_string_pretty(&res.caveat).expect("serializable"));
    for v in res.region.vertices() {
        println!("  ({:.4}, {:.4})", v[0], v[1]);
    }
    Ok(())
}
