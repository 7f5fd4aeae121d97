//! Capacity region of a semi-deterministic channel in the high-interference
//! regime, reported together with the falsifier's evidence.

use cifc_udc::capacity::capacity_semidet_hi;
use cifc_udc::inner::SamplerConfig;
use cifc_udc::{ChannelSpec, Error};

fn main() -> cifc_udc::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let cfg = SamplerConfig {
        num_samples: 300,
        fan: 32,
        threads: 4,
        ..SamplerConfig::default()
    };
    for name in ["semidet_pair.json", "relay_only.json"] {
        let ch = ChannelSpec::from_json(&std::fs::read_to_string(format!("{dir}/{name}"))?)?;
        match capacity_semidet_hi(&ch, &cfg, false) {
            Ok(res) => {
                let report = res.hi_regime.expect("semidet results carry a report");
                println!("{name}: {:?} after {} distributions", report.status, report.samples);
                println!("  drop-step mismatches: {}", res.drop_mismatches);
                for v in res.region.vertices() {
                    println!("  ({:.4}, {:.4})", v[0], v[1]);
                }
            }
            Err(Error::HiRegimeFalsified(w)) => println!("{name}: refused, {w}"),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}
