//! The inhomogeneous shrinking solitons of the warped ansatz: for
//! F = e^{ku} the structure satisfies Delta phi = lambda phi + L_V phi with
//! lambda = -9k^2/2 and V = (15k/2) d/du, the profile ODE pair holds, and
//! |tau|^2 = 27 k^2 / 2 pointwise (so Scal = -27 k^2 / 4).
//!
//!     cargo run --release -p g2flow --example soliton_residuals

use g2flow::catalog::{as_soliton, as_soliton_constants, JET_DEPTH};
use g2flow::exterior::{Coefficient, Grid};
use g2flow::flows::soliton::{g2_soliton_residual, soliton_ode_residual, SolitonSpec};
use g2flow::structures::g2::{metric_from_phi, torsion_tau};

fn main() -> g2flow::Result<()> {
    let grid = Grid::new(-1.0, 1.0, 201)?;
    for k in [1u32, 2, 3] {
        let (lambda, a) = as_soliton_constants(k);
        let p = as_soliton(k, grid, JET_DEPTH);
        let g2 = metric_from_phi(&p.phi())?;
        let res = g2_soliton_residual(&g2, &SolitonSpec::vertical(lambda, a), &p.frame())?;

        let tor = torsion_tau(&g2, &p.frame())?;
        let tau_sq = g2.metric().norm_sq(&tor.tau)?;
        let expect = 13.5 * (k as f64).powi(2);

        let u = Coefficient::coordinate(grid, JET_DEPTH);
        let (r1, r2) =
            soliton_ode_residual(&u.scale(k as f64).exp(), &Coefficient::Const(a), lambda)?;

        println!(
            "k={k}: lambda={lambda:6.1}, a={a:5.1} | soliton residual {:.2e} | ODE residuals {:.2e} {:.2e} | |tau|^2 - 27k^2/2 = {:.2e} (Scal = {:.2})",
            res.max_abs(),
            r1.max_abs(),
            r2.max_abs(),
            tau_sq.sub(&Coefficient::Const(expect)).max_abs(),
            -0.5 * expect,
        );
    }

    // wrong constants leave an O(1) residual
    let p = as_soliton(2, grid, JET_DEPTH);
    let g2 = metric_from_phi(&p.phi())?;
    let bad = g2_soliton_residual(&g2, &SolitonSpec::vertical(-17.0, 15.0), &p.frame())?;
    println!("\nperturbed lambda = -17: residual {:.3} (detects non-solitons)", bad.max_abs());
    Ok(())
}
