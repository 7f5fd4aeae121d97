//! Random search for deterministic channels on which the regime falsifier
//! finds no violation. A small run; raise `trials` to search further.

use cifc_udc::capacity::search_hi_regime_channels;
use cifc_udc::inner::SamplerConfig;

fn main() -> cifc_udc::Result<()> {
    let cfg = SamplerConfig {
        num_samples: 40,
        refine_starts: 1,
        refine_sweeps: 5,
        threads: 4,
        ..SamplerConfig::default()
    };
    let found = search_hi_regime_channels([2, 2, 1, 4, 4], 40, &cfg)?;
    println!("{} of 40 channels survived the falsifier", found.len());
    for c in found.iter().take(3) {
        println!("trial {}: score {:.3}, {} distributions checked", c.index, c.score, c.report.samples);
        let [n1, n2, n3, _, _] = c.channel.cards();
        for a in 0..n1 {
            for b in 0..n2 {
                for x3 in 0..n3 {
                    let y1 = c.channel.y1_marginal(a, b, x3).iter().position(|&p| p == 1.0);
                    let y2 = c.channel.y2_marginal(a, b, x3).iter().position(|&p| p == 1.0);
                    println!("  ({a},{b},{x3}) -> y1 {y1:?}, y2 {y2:?}");
                }
            }
        }
    }
    Ok(())
}
