//! The Laplacian flow on the Fernandez nilmanifold: the e^123 coefficient
//! follows (10t/3 + 1)^{3/5} and |tau|^2 = 2 (10t/3 + 1)^{-1}.
//!
//!     cargo run --release -p g2flow --example bryant_flow

use g2flow::catalog::{bryant_frame, bryant_phi};
use g2flow::flows::bryant_flow;

fn main() -> g2flow::Result<()> {
    let fs = bryant_frame();
    let traj = bryant_flow(&bryant_phi(0.0), &fs, 0.0, 1e-3, 1000, 100)?;
    println!("{:>6}  {:>12}  {:>12}  {:>12}  {:>12}", "t", "coeff_e123", "exact", "|tau|^2", "vol");
    for st in &traj.states {
        let exact = (10.0 * st.t / 3.0 + 1.0).powf(0.6);
        println!(
            "{:6.3}  {:12.8}  {:12.8}  {:12.8}  {:12.8}",
            st.t,
            st.phi.coeff(&[1, 2, 3]).eval(0),
            exact,
            st.tau_norm_sq,
            st.vol_coeff,
        );
    }
    let last = traj.last();
    let exact = (10.0 * last.t / 3.0 + 1.0).powf(0.6);
    println!(
        "\nfinal relative error {:.3e}; volume grew by {:.4}x (~ t^(1/5))",
        ((last.phi.coeff(&[1, 2, 3]).eval(0) - exact) / exact).abs(),
        last.vol_coeff
    );
    Ok(())
}
