//! Registered model structures: the flat G2 3-form, the Bryant flow on the
//! Fernandez nilmanifold, and the Apostolov-Salamon warped ansatz with its
//! torsion-free and soliton profiles. Also random-structure generators for
//! the property suites.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exterior::{registry, Coefficient, Form, FrameStructure, Grid};

/// Default number of analytic derivative levels carried by catalog profiles.
pub const JET_DEPTH: usize = 6;

/// The standard G2 3-form on R^7:
/// e^123 + e^145 + e^167 + e^246 - e^257 - e^347 - e^356.
pub fn standard_phi() -> Form {
    let mut phi = Form::zero(7, 3);
    for (idx, s) in [
        ([1, 2, 3], 1.0),
        ([1, 4, 5], 1.0),
        ([1, 6, 7], 1.0),
        ([2, 4, 6], 1.0),
        ([2, 5, 7], -1.0),
        ([3, 4, 7], -1.0),
        ([3, 5, 6], -1.0),
    ] {
        *phi.coeff_mut(&idx) = Coefficient::Const(s);
    }
    phi
}

/// The standard SU(3) data on R^6: omega, Omega+, Omega- with
/// Omega = (e^1 + i e^2) ^ (e^3 + i e^4) ^ (e^5 + i e^6).
pub fn standard_su3_forms() -> (Form, Form, Form) {
    let mut omega = Form::zero(6, 2);
    for idx in [[1usize, 2], [3, 4], [5, 6]] {
        *omega.coeff_mut(&idx) = Coefficient::one();
    }
    let mut op = Form::zero(6, 3);
    for (idx, s) in [([1, 3, 5], 1.0), ([1, 4, 6], -1.0), ([2, 3, 6], -1.0), ([2, 4, 5], -1.0)] {
        *op.coeff_mut(&idx) = Coefficient::Const(s);
    }
    let mut om = Form::zero(6, 3);
    for (idx, s) in [([1, 3, 6], 1.0), ([1, 4, 5], 1.0), ([2, 3, 5], 1.0), ([2, 4, 6], -1.0)] {
        *om.coeff_mut(&idx) = Coefficient::Const(s);
    }
    (omega, op, om)
}

/// Bryant's closed G2-structure on the Fernandez nilmanifold at flow time t:
/// phi_t = f^3 e^123 + (the six constant terms), f = (10t/3 + 1)^{1/5}.
pub fn bryant_phi(t: f64) -> Form {
    let mut phi = standard_phi();
    *phi.coeff_mut(&[1, 2, 3]) = Coefficient::Const(bryant_f(t).powi(3));
    phi
}

pub fn bryant_f(t: f64) -> f64 {
    (10.0 * t / 3.0 + 1.0).powf(0.2)
}

pub fn bryant_frame() -> FrameStructure {
    registry("fernandez7", None).expect("registered frame")
}

/// Profile functions (f, g, h) of the Apostolov-Salamon ansatz on N^6 x R_u.
#[derive(Clone, Debug)]
pub struct AsProfiles {
    pub grid: Grid,
    pub f: Coefficient,
    pub g: Coefficient,
    pub h: Coefficient,
}

impl AsProfiles {
    /// The G2 3-form
    /// -f^2 h (omega_1 ^ du) + g^2 h (e^56 ^ du) - g f^2 (omega_3 ^ e^5 - omega_2 ^ e^6)
    /// on the "as7" frame with du = e^7.
    pub fn phi(&self) -> Form {
        let (a, b, c) = self.abc();
        as_phi_from_abc(&a, &b, &c)
    }

    /// Max-norm of d(g f^2)/du - g^2 h; zero exactly when phi is closed.
    pub fn closure_residual(&self) -> f64 {
        let (_, b, c) = self.abc();
        b.derivative().sub(&c).max_abs()
    }

    pub fn frame(&self) -> FrameStructure {
        registry("as7", Some(self.grid)).expect("registered frame")
    }

    /// (A, B, C) = (f^2 h, g f^2, g^2 h).
    pub fn abc(&self) -> (Coefficient, Coefficient, Coefficient) {
        (
            self.f.mul(&self.f).mul(&self.h),
            self.g.mul(&self.f).mul(&self.f),
            self.g.mul(&self.g).mul(&self.h),
        )
    }
}

/// Assembles the ansatz 3-form from (A, B, C) = (f^2 h, g f^2, g^2 h).
pub fn as_phi_from_abc(a: &Coefficient, b: &Coefficient, c: &Coefficient) -> Form {
    let mut phi = Form::zero(7, 3);
    *phi.coeff_mut(&[1, 2, 7]) = a.neg();
    *phi.coeff_mut(&[3, 4, 7]) = a.neg();
    *phi.coeff_mut(&[5, 6, 7]) = c.clone();
    *phi.coeff_mut(&[1, 4, 5]) = b.neg();
    *phi.coeff_mut(&[2, 3, 5]) = b.neg();
    *phi.coeff_mut(&[1, 3, 6]) = b.clone();
    *phi.coeff_mut(&[2, 4, 6]) = b.neg();
    phi
}

/// Shrinking-soliton profiles F = e^{ku}: f = k^{-1/4} e^{ku/4},
/// g = k^{1/2} e^{ku/2}, h = 1. For k = 2 this is the inhomogeneous
/// gradient shrinker with lambda = -18, V = 15 d/du.
pub fn as_soliton(k: u32, grid: Grid, depth: usize) -> AsProfiles {
    let kf = k as f64;
    let u = Coefficient::coordinate(grid, depth);
    AsProfiles {
        grid,
        f: u.scale(kf / 4.0).exp().scale(kf.powf(-0.25)),
        g: u.scale(kf / 2.0).exp().scale(kf.sqrt()),
        h: Coefficient::one(),
    }
}

/// Soliton constants for the exponential family: (lambda, a) = (-9k^2/2, 15k/2).
pub fn as_soliton_constants(k: u32) -> (f64, f64) {
    let kf = k as f64;
    (-4.5 * kf * kf, 7.5 * kf)
}

/// The torsion-free profiles f = (3u)^{1/3}, g = (3u)^{-1/3}, h = 1
/// (valid on grids with u > 0).
pub fn as_torsionfree(grid: Grid, depth: usize) -> Result<AsProfiles> {
    if grid.min <= 0.0 {
        return Err(Error::Config("torsion-free profiles need u > 0".into()));
    }
    let u = Coefficient::coordinate(grid, depth);
    let third = u.scale(3.0).powf(1.0 / 3.0);
    Ok(AsProfiles { grid, f: third.clone(), g: third.recip(), h: Coefficient::one() })
}

/// A random closed ansatz: pick B = gf^2 and g as exponentials of mild
/// quadratics with B' > 0, then f^2 = B/g and h = B'/g^2. Closure holds by
/// construction.
pub fn random_closed_as(rng: &mut impl Rng, grid: Grid, depth: usize) -> AsProfiles {
    let u = Coefficient::coordinate(grid, depth);
    let mut quad = |lin_min: f64| {
        let c1: f64 = rng.gen_range(lin_min..lin_min + 0.8);
        let c2: f64 = rng.gen_range(-0.3 * c1.max(0.2)..0.3 * c1.max(0.2));
        let c0: f64 = rng.gen_range(-0.3..0.3);
        (c0, c1, c2)
    };
    let (b0, b1, b2) = quad(0.5);
    let (g0, g1, g2) = quad(0.0);
    let poly = |c0: f64, c1: f64, c2: f64| {
        u.scale(c1).add(&u.mul(&u).scale(c2 / 2.0)).add(&Coefficient::Const(c0))
    };
    let b = poly(b0, b1, b2).exp();
    let g = poly(g0, g1, g2).exp();
    let f = b.div(&g).sqrt();
    let h = b.derivative().div(&g.mul(&g));
    AsProfiles { grid, f, g, h }
}

/// Random well-conditioned element of GL+(n).
pub fn random_gl(rng: &mut impl Rng, n: usize, spread: f64) -> DMatrix<f64> {
    loop {
        let a = DMatrix::from_fn(n, n, |i, j| {
            let base = if i == j { 1.0 } else { 0.0 };
            base + rng.gen_range(-spread..spread)
        });
        if a.determinant() > 0.3 {
            return a;
        }
    }
}

/// Random G2-structure: pullback of the flat model by a random GL+(7) map.
pub fn random_g2_phi(rng: &mut impl Rng) -> Form {
    standard_phi().pullback(&random_gl(rng, 7, 0.2))
}

/// Random constant-coefficient k-form.
pub fn random_form(rng: &mut impl Rng, n: usize, k: usize) -> Form {
    let mut f = Form::zero(n, k);
    for r in 0..crate::exterior::comb::binomial(n, k) {
        f.set_by_rank(r, Coefficient::Const(rng.gen_range(-1.0..1.0)));
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn as_phi_is_closed_iff_profile_condition_holds() {
        let grid = Grid::new(-1.0, 1.0, 41).unwrap();
        let sol = as_soliton(2, grid, JET_DEPTH);
        assert!(sol.closure_residual() < 1e-12);
        let fs = sol.frame();
        let dphi = fs.d(&sol.phi()).unwrap();
        assert!(dphi.max_abs() < 1e-12, "soliton phi not closed: {}", dphi.max_abs());

        // generic profiles are not closed; d phi must match
        // (g^2 h - d(g f^2)/du)(omega_2 ^ e^6 - omega_3 ^ e^5) ^ du
        let u = Coefficient::coordinate(grid, JET_DEPTH);
        let gen = AsProfiles {
            grid,
            f: u.mul(&u).scale(0.25).add(&Coefficient::one()),
            g: u.scale(0.3).exp(),
            h: u.scale(0.2).add(&Coefficient::Const(1.1)),
        };
        let dphi = fs.d(&gen.phi()).unwrap();
        let defect = gen
            .g
            .mul(&gen.g)
            .mul(&gen.h)
            .sub(&gen.g.mul(&gen.f).mul(&gen.f).derivative());
        // (omega_2 ^ e^6 - omega_3 ^ e^5) ^ du expands to
        // e^{1367} - e^{2467} - e^{1457} - e^{2357}
        let mut expect = Form::zero(7, 4);
        *expect.coeff_mut(&[1, 3, 6, 7]) = defect.clone();
        *expect.coeff_mut(&[2, 4, 6, 7]) = defect.neg();
        *expect.coeff_mut(&[1, 4, 5, 7]) = defect.neg();
        *expect.coeff_mut(&[2, 3, 5, 7]) = defect.neg();
        assert!(
            dphi.distance(&expect) < 1e-12,
            "d(phi_AS) mismatch: {}",
            dphi.distance(&expect)
        );
    }

    #[test]
    fn random_closed_as_satisfies_closure() {
        let grid = Grid::new(-1.0, 1.0, 33).unwrap();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..20 {
            let p = random_closed_as(&mut rng, grid, JET_DEPTH);
            assert!(p.closure_residual() < 1e-11);
            assert!(p.f.min_value() > 0.0 && p.g.min_value() > 0.0 && p.h.min_value() > 0.0);
        }
    }

    #[test]
    fn torsionfree_profiles_need_positive_u() {
        assert!(as_torsionfree(Grid::new(-1.0, 1.0, 11).unwrap(), 2).is_err());
        assert!(as_torsionfree(Grid::new(1.0, 2.0, 11).unwrap(), 2).is_ok());
    }
}
