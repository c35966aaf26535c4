//! Exterior-algebra basics: wedge, contraction, Hodge star and the invariant
//! exterior derivative, on the standard G2 model and the Fernandez frame.
//!
//!     cargo run --release -p g2flow --example exterior_algebra

use g2flow::catalog::standard_phi;
use g2flow::exterior::{registry, Form, Metric};

fn main() -> g2flow::Result<()> {
    let phi = standard_phi();
    println!("phi_0          = {phi}");

    let g = Metric::identity(7);
    let star_phi = g.star(&phi)?;
    println!("*phi_0         = {star_phi}");

    let top = phi.wedge(&star_phi)?;
    println!("phi ^ *phi     = {top}   (7 vol)");

    let e1_phi = phi.contract_basis(1)?;
    println!("e_1 . phi_0    = {e1_phi}");

    // the Fernandez nilmanifold: de^6 = e^12, de^7 = e^13
    let fs = registry("fernandez7", None)?;
    let de6 = fs.d(&Form::basis(7, &[6]))?;
    println!("d e^6          = {de6}   (Fernandez frame)");
    let dphi = fs.d(&phi)?;
    println!("|d phi_0|      = {:.3e}   (closed on this frame)", dphi.max_abs());

    // JSON interchange
    let json = serde_json::to_string(&e1_phi)?;
    println!("JSON           = {json}");
    let back: Form = serde_json::from_str(&json)?;
    println!("round trip     = {:.3e}", back.distance(&e1_phi));
    Ok(())
}
