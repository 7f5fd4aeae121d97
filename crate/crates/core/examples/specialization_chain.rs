//! The achievability chain for semi-deterministic channels: a distribution
//! over `(x1, v12, v2, x2, x3)` is turned into a full inner-bound
//! factorization, and the generic inner bound reproduces the specialized
//! five-bound region. Setting `V2 = Y2` then gives the entropy form.

use cifc_udc::capacity::{iv5_region, iv6_region, lift_v2_equals_y2, specialize_iv5, Iv5Distribution};
use cifc_udc::inner::{assemble_joint_t1, inner_constants, region_for_distribution};
use cifc_udc::outer::random_outer;
use cifc_udc::ChannelSpec;

fn main() -> cifc_udc::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/semidet_pair.json");
    let ch = ChannelSpec::from_json(&std::fs::read_to_string(path)?)?;

    let d = Iv5Distribution::random([3, 2, 2, 2, 1], 7, 0, 1.0);
    let direct = iv5_region(&d, &ch)?;
    let f = specialize_iv5(&d, &ch)?;
    let generic = region_for_distribution(&inner_constants(&assemble_joint_t1(&f, &ch)?)?)?;
    println!("specialized vs generic: Hausdorff distance {:.2e}", direct.hausdorff(&generic));

    let o = random_outer([3, 2, 2, 1], 7, 1, 1.0);
    let lifted = iv5_region(&lift_v2_equals_y2(&o, &ch)?, &ch)?;
    let entropy_form = iv6_region(&o, &ch)?;
    println!("V2 = Y2 vs entropy form: Hausdorff distance {:.2e}", lifted.hausdorff(&entropy_form));
    Ok(())
}
