//! Capacity region of a degraded Z channel: `Y1 = X1 xor X3` at the first
//! destination, the pair `(X1, X2)` at the second.

use cifc_udc::capacity::capacity_degraded_z;
use cifc_udc::inner::SamplerConfig;
use cifc_udc::ChannelSpec;

fn main() -> cifc_udc::Result<()> {
    let ch = ChannelSpec::deterministic([2, 2, 2, 2, 4], |a, b, c| (a ^ c, 2 * a + b))?;
    let cfg = SamplerConfig {
        num_samples: 300,
        fan: 32,
        threads: 4,
        ..SamplerConfig::default()
    };
    let res = capacity_degraded_z(&ch, &cfg)?;
    println!("{} input distributions, {} on the boundary", res.evaluated, res.best.len());
    for v in res.region.vertices() {
        println!("  ({:.4}, {:.4})", v[0], v[1]);
    }
    Ok(())
}
