//! Builds a joint pmf from conditional factors and evaluates information
//! measures on it, including a chain-rule identity.

use cifc_udc::{joint_from_factors, ConditionalFactor, Var};

fn main() -> cifc_udc::Result<()> {
    let (x, z, y) = (Var::new("x", 2), Var::new("z", 2), Var::new("y", 2));
    // x uniform, z a noisy copy of x, y = x xor z
    let px = ConditionalFactor::new(vec![x.clone()], vec![], vec![0.5, 0.5])?;
    let pz = ConditionalFactor::new(vec![z.clone()], vec![x.clone()], vec![0.9, 0.1, 0.1, 0.9])?;
    let py = ConditionalFactor::new(
        vec![y],
        vec![x, z],
        vec![1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0],
    )?;
    let joint = joint_from_factors(&[px, pz, py])?;

    let h = joint.entropy(&["x", "y", "z"])?;
    let i_xy = joint.mutual_information(&["x"], &["y"])?;
    let i_xz = joint.mutual_information(&["x"], &["z"])?;
    let i_xy_z = joint.conditional_mutual_information(&["x"], &["y"], &["z"])?;
    let i_x_yz = joint.mutual_information(&["x"], &["y", "z"])?;
    println!("H(x,y,z)  = {h:.6}");
    println!("I(x;y)    = {i_xy:.6}");
    println!("I(x;z)    = {i_xz:.6}");
    println!("I(x;y|z)  = {i_xy_z:.6}");
    println!("I(x;y,z)  = {i_x_yz:.6}  (= I(x;z) + I(x;y|z) = {:.6})", i_xz + i_xy_z);
    Ok(())
}
