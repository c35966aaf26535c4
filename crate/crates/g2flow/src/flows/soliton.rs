//! Laplacian soliton residuals: the full 7-dimensional equation
//! Delta phi = lambda phi + L_V phi, and the reduced profile ODE pair for the
//! warped ansatz.

use crate::error::{Error, Result};
use crate::exterior::{Coefficient, Form, FrameStructure};
use crate::structures::g2::{laplacian_closed, G2Structure};

/// A soliton candidate: the constant lambda and the vector field V given by
/// frame components.
#[derive(Clone, Debug)]
pub struct SolitonSpec {
    pub lambda: f64,
    pub v: Vec<Coefficient>,
}

impl SolitonSpec {
    /// V = a d/du on a warped 7-frame with du = e^7.
    pub fn vertical(lambda: f64, a: f64) -> Self {
        let mut v = vec![Coefficient::zero(); 7];
        v[6] = Coefficient::Const(a);
        SolitonSpec { lambda, v }
    }
}

/// Residual of Delta phi - lambda phi - L_V phi for a closed structure.
pub fn g2_soliton_residual(
    g2: &G2Structure,
    spec: &SolitonSpec,
    fs: &FrameStructure,
) -> Result<Form> {
    let lap = laplacian_closed(g2, fs)?;
    let lie = fs.lie_derivative(&spec.v, g2.phi())?;
    lap.sub(&g2.phi().scale(spec.lambda))?.sub(&lie)
}

/// Residuals of the two profile ODEs for (F, a) with F > 0, F' > 0:
///   (log(F^2 F'))' = lambda / (log F)' + a
///   ((F (F')^{1/2})' / F')' = -lambda F (F')^{-1/2} - (a F (F')^{-1/2})'
pub fn soliton_ode_residual(
    f: &Coefficient,
    a: &Coefficient,
    lambda: f64,
) -> Result<(Coefficient, Coefficient)> {
    if f.min_value() <= 0.0 {
        return Err(Error::Config("profile F must be positive".into()));
    }
    let fp = f.derivative();
    if fp.min_value() <= 0.0 {
        return Err(Error::Config("profile F must be strictly increasing".into()));
    }
    // first equation: 2 F'/F + F''/F' - lambda F/F' - a
    let fpp = fp.derivative();
    let r1 = fp
        .div(f)
        .scale(2.0)
        .add(&fpp.div(&fp))
        .sub(&f.div(&fp).scale(lambda))
        .sub(a);
    // second equation
    let sq = fp.sqrt();
    let w = f.mul(&sq); // F (F')^{1/2}
    let lhs = w.derivative().div(&fp).derivative();
    let fos = f.div(&sq); // F (F')^{-1/2}
    let rhs = fos.scale(-lambda).sub(&a.mul(&fos).derivative());
    let r2 = lhs.sub(&rhs);
    Ok((r1, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::exterior::Grid;
    use crate::structures::g2::metric_from_phi;

    #[test]
    fn as_shrinker_is_a_soliton() {
        let grid = Grid::new(-1.0, 1.0, 41).unwrap();
        let p = catalog::as_soliton(2, grid, catalog::JET_DEPTH);
        let g2 = metric_from_phi(&p.phi()).unwrap();
        let spec = SolitonSpec::vertical(-18.0, 15.0);
        let res = g2_soliton_residual(&g2, &spec, &p.frame()).unwrap();
        assert!(res.max_abs() < 1e-10, "soliton residual {}", res.max_abs());

        // L_{15 du} phi = Delta phi + 18 phi, stated as the lie-derivative form
        let lap = laplacian_closed(&g2, &p.frame()).unwrap();
        let lie = p
            .frame()
            .lie_derivative(&spec.v, g2.phi())
            .unwrap();
        assert!(lie.distance(&lap.add(&g2.phi().scale(18.0)).unwrap()) < 1e-10);
    }

    #[test]
    fn exponential_family_solitons() {
        let grid = Grid::new(-0.8, 0.8, 33).unwrap();
        for k in [1u32, 3] {
            let p = catalog::as_soliton(k, grid, catalog::JET_DEPTH);
            let g2 = metric_from_phi(&p.phi()).unwrap();
            let (lambda, a) = catalog::as_soliton_constants(k);
            let spec = SolitonSpec::vertical(lambda, a);
            let res = g2_soliton_residual(&g2, &spec, &p.frame()).unwrap();
            assert!(res.max_abs() < 1e-10, "k={k} residual {}", res.max_abs());
        }
    }

    #[test]
    fn wrong_constants_leave_a_residual() {
        let grid = Grid::new(-0.5, 0.5, 33).unwrap();
        let p = catalog::as_soliton(2, grid, catalog::JET_DEPTH);
        let g2 = metric_from_phi(&p.phi()).unwrap();
        let res =
            g2_soliton_residual(&g2, &SolitonSpec::vertical(-17.0, 15.0), &p.frame()).unwrap();
        assert!(res.max_abs() > 1e-2);
    }

    #[test]
    fn torsion_free_is_a_steady_soliton() {
        let grid = Grid::new(1.0, 2.0, 33).unwrap();
        let p = catalog::as_torsionfree(grid, catalog::JET_DEPTH).unwrap();
        let g2 = metric_from_phi(&p.phi()).unwrap();
        let res = g2_soliton_residual(&g2, &SolitonSpec::vertical(0.0, 0.0), &p.frame()).unwrap();
        assert!(res.max_abs() < 1e-9);
    }

    #[test]
    fn ode_pair_on_exponential_profiles() {
        let grid = Grid::new(-0.5, 0.5, 33).unwrap();
        let u = Coefficient::coordinate(grid, catalog::JET_DEPTH);
        // F = e^{2u}, a = 15, lambda = -18
        let (r1, r2) =
            soliton_ode_residual(&u.scale(2.0).exp(), &Coefficient::Const(15.0), -18.0).unwrap();
        assert!(r1.max_abs() < 1e-11, "r1 = {}", r1.max_abs());
        assert!(r2.max_abs() < 1e-10, "r2 = {}", r2.max_abs());
        // F = e^u, a = 15/2, lambda = -9/2
        let (r1, r2) =
            soliton_ode_residual(&u.clone().exp(), &Coefficient::Const(7.5), -4.5).unwrap();
        assert!(r1.max_abs() < 1e-11 && r2.max_abs() < 1e-10);
        // perturbed drift constant leaves a residual in the first equation
        let (r1, _) =
            soliton_ode_residual(&u.scale(2.0).exp(), &Coefficient::Const(14.0), -18.0).unwrap();
        assert!(r1.max_abs() > 0.5);
        // decreasing profile is rejected
        assert!(soliton_ode_residual(&u.scale(-1.0).exp(), &Coefficient::Const(1.0), 0.0).is_err());
    }
}
