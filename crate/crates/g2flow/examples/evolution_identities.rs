//! Evolution identities along the flow, checked by central differences in t:
//! the residuals decay at second order in the record spacing (identities that
//! vanish identically on this trajectory sit at round-off).
//!
//!     cargo run --release -p g2flow --example evolution_identities

use g2flow::catalog::{bryant_frame, bryant_phi};
use g2flow::flows::{bryant_flow, evolution_identity_checks};

fn main() -> g2flow::Result<()> {
    let fs = bryant_frame();
    let t_star = 0.5f64;
    let mut tables = Vec::new();
    let spacings = [4e-3f64, 2e-3, 1e-3];
    for dt in spacings {
        let k = (t_star / dt).round() as usize;
        let traj = bryant_flow(&bryant_phi(0.0), &fs, 0.0, dt, k + 1, 1)?;
        tables.push(evolution_identity_checks(
            &traj.states[k - 1].phi,
            &traj.states[k].phi,
            &traj.states[k + 1].phi,
            dt,
            &fs,
            6,
        )?);
    }
    println!(
        "{:>28}  {:>11}  {:>11}  {:>11}  {:>6}",
        "identity", "dt=4e-3", "dt=2e-3", "dt=1e-3", "order"
    );
    for i in 0..tables[0].len() {
        let r: Vec<f64> = tables.iter().map(|t| t[i].residual).collect();
        let order = if r[0] > 1e-12 {
            format!("{:.2}", (r[0] / r[2]).log2() / 2.0)
        } else {
            "exact".into()
        };
        println!(
            "{:>28}  {:>11.3e}  {:>11.3e}  {:>11.3e}  {:>6}",
            tables[0][i].name, r[0], r[1], r[2], order
        );
    }
    Ok(())
}
