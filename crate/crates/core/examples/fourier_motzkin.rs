//! Projects a small rate system onto (r1, r2) by Fourier-Motzkin
//! elimination and prints the resulting polygon.

use cifc_udc::polytope::polygon_extract;
use cifc_udc::LinearSystem;

fn main() -> cifc_udc::Result<()> {
    // r1 = s + t with s private and t carried jointly with r2
    let mut sys = LinearSystem::new(&["r1", "r2", "s", "t"])?;
    for v in ["r1", "r2", "s", "t"] {
        sys.set_nonnegative(v)?;
    }
    sys.add_le(&[("r1", 1.0), ("s", -1.0), ("t", -1.0)], 0.0)?;
    sys.add_le(&[("s", 1.0)], 0.6)?;
    sys.add_le(&[("t", 1.0), ("r2", 1.0)], 1.2)?;
    sys.add_le(&[("r2", 1.0)], 1.0)?;
    println!("system:\n{}", sys.to_json());

    let projected = sys.eliminate_in_order(&["s", "t"])?;
    println!("after eliminating s and t: {} inequalities", projected.inequalities().len());
    let region = polygon_extract(&projected, "r1", "r2")?;
    println!("vertices:");
    for v in region.vertices() {
        println!("  ({:.3}, {:.3})", v[0], v[1]);
    }
    Ok(())
}
