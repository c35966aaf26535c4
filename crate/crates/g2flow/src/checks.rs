//! Identity suites: the interchange lemma, the torsion-norm lemma, the
//! curvature and divergence identities, and soliton checks, each run on the
//! registered examples plus randomized valid inputs. Used by the acceptance
//! tests and the `check` subcommand.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::catalog::{self, AsProfiles};
use crate::error::{Error, Result};
use crate::exterior::{Coefficient, Form, Grid};
use crate::flows::soliton::{g2_soliton_residual, soliton_ode_residual, SolitonSpec};
use crate::reduction::{
    divergence_identity_residual, gibbons_hawking_dxi, quotient_torsion, reduce, ReductionData,
};
use crate::structures::g2::{decompose2_g2, metric_from_phi, torsion_tau};
use crate::structures::su3::{su3_torsion_classes, SU3Structure};

pub const TOL_ANALYTIC: f64 = 1e-9;
pub const TOL_FD: f64 = 1e-6;

/// One residual line of a check report.
#[derive(Clone, Debug, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub suite: String,
    pub cases: usize,
    pub lines: Vec<CheckLine>,
}

impl CheckReport {
    fn new(suite: &str, cases: usize) -> Self {
        CheckReport { suite: suite.into(), cases, lines: Vec::new() }
    }

    fn push(&mut self, name: &str, residual: f64, tol: f64) {
        self.lines.push(CheckLine {
            name: name.into(),
            residual,
            tol,
            pass: residual <= tol,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(|l| l.pass)
    }
}

/// Accumulates the max residual per named identity across many cases.
struct MaxTable {
    entries: Vec<(String, f64)>,
}

impl MaxTable {
    fn new() -> Self {
        MaxTable { entries: Vec::new() }
    }

    fn update(&mut self, name: &str, value: f64) {
        match self.entries.iter_mut().find(|(n, _)| n == name) {
            Some((_, v)) => *v = v.max(value),
            None => self.entries.push((name.to_string(), value)),
        }
    }

    fn into_report(self, suite: &str, cases: usize, tol: f64) -> CheckReport {
        let mut r = CheckReport::new(suite, cases);
        for (name, residual) in self.entries {
            r.push(&name, residual, tol);
        }
        r
    }
}

/// Registered example keys: "bryant", "as-soliton:k=<int>", "as-torsionfree",
/// "flat".
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExampleKey {
    Bryant,
    AsSoliton { k: u32 },
    AsTorsionFree,
    Flat,
}

impl std::str::FromStr for ExampleKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "bryant" {
            return Ok(ExampleKey::Bryant);
        }
        if s == "as-torsionfree" {
            return Ok(ExampleKey::AsTorsionFree);
        }
        if s == "flat" {
            return Ok(ExampleKey::Flat);
        }
        if let Some(rest) = s.strip_prefix("as-soliton:k=") {
            let k: u32 = rest
                .parse()
                .map_err(|_| Error::Config(format!("bad soliton index in '{s}'")))?;
            if k == 0 || k > 12 {
                return Err(Error::Config("soliton index must be in 1..=12".into()));
            }
            return Ok(ExampleKey::AsSoliton { k });
        }
        Err(Error::Config(format!(
            "unknown example '{s}' (expected bryant, as-soliton:k=<int>, as-torsionfree, flat)"
        )))
    }
}

impl std::fmt::Display for ExampleKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExampleKey::Bryant => write!(f, "bryant"),
            ExampleKey::AsSoliton { k } => write!(f, "as-soliton:k={k}"),
            ExampleKey::AsTorsionFree => write!(f, "as-torsionfree"),
            ExampleKey::Flat => write!(f, "flat"),
        }
    }
}

/// Default grid for an example (torsion-free profiles need u > 0).
pub fn default_grid(key: ExampleKey, requested: Option<Grid>) -> Result<Grid> {
    match (key, requested) {
        (_, Some(g)) => Ok(g),
        (ExampleKey::AsTorsionFree, None) => Grid::new(1.0, 2.0, 201),
        _ => Grid::new(-1.0, 1.0, 201),
    }
}

/// Builds the example reduction (with quotient torsion) for identity suites.
pub fn example_reduction(key: ExampleKey, grid: Grid, t: f64) -> Result<ReductionData> {
    let (phi, fs, y) = match key {
        ExampleKey::Bryant => (catalog::bryant_phi(t), catalog::bryant_frame(), 6),
        ExampleKey::AsSoliton { k } => {
            let p = catalog::as_soliton(k, grid, catalog::JET_DEPTH);
            (p.phi(), p.frame(), 6)
        }
        ExampleKey::AsTorsionFree => {
            let p = catalog::as_torsionfree(grid, catalog::JET_DEPTH)?;
            (p.phi(), p.frame(), 6)
        }
        ExampleKey::Flat => (
            catalog::standard_phi(),
            crate::exterior::registry("flat7", None)?,
            7,
        ),
    };
    let g2 = metric_from_phi(&phi)?;
    let mut r = reduce(&g2, &fs, y)?;
    quotient_torsion(&mut r)?;
    Ok(r)
}

fn random_alpha(rng: &mut StdRng) -> Form {
    catalog::random_form(rng, 6, 1)
}

/// The three interchange-lemma identities, two equalities each, for
/// beta = *(alpha ^ Omega-).
fn interchange_case(s: &SU3Structure, alpha: &Form, table: &mut MaxTable) -> Result<()> {
    let beta = s.star(&alpha.wedge(&s.omega_minus)?)?;
    let ja = s.j.apply_oneform(alpha);
    let om2 = s.omega.wedge(&s.omega)?;
    // (1) J(alpha) ^ Omega+ = alpha ^ Omega- = beta ^ omega
    let a = ja.wedge(&s.omega_plus)?;
    let b = alpha.wedge(&s.omega_minus)?;
    let c = beta.wedge(&s.omega)?;
    table.update("interchange_1a", a.distance(&b));
    table.update("interchange_1b", b.distance(&c));
    // (2) beta ^ Omega- = 2 * alpha = -(J alpha) ^ omega^2
    let a = beta.wedge(&s.omega_minus)?;
    let b = s.star(alpha)?.scale(2.0);
    let c = ja.wedge(&om2)?.neg();
    table.update("interchange_2a", a.distance(&b));
    table.update("interchange_2b", b.distance(&c));
    // (3) beta ^ Omega+ = 2 *(J alpha) = alpha ^ omega^2
    let a = beta.wedge(&s.omega_plus)?;
    let b = s.star(&ja)?.scale(2.0);
    let c = alpha.wedge(&om2)?;
    table.update("interchange_3a", a.distance(&b));
    table.update("interchange_3b", b.distance(&c));
    Ok(())
}

/// Interchange lemma on randomized SU(3)-structures plus the reductions of
/// both registered families.
pub fn interchange_suite(seed: u64, cases: usize, grid: Grid) -> Result<CheckReport> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut table = MaxTable::new();
    let (omega0, op0, _) = catalog::standard_su3_forms();
    for _ in 0..cases {
        let a = catalog::random_gl(&mut rng, 6, 0.25);
        let s = SU3Structure::from_omega_plus(&omega0.pullback(&a), &op0.pullback(&a))?;
        interchange_case(&s, &random_alpha(&mut rng), &mut table)?;
    }
    for r in [
        example_reduction(ExampleKey::Bryant, grid, 0.3)?,
        example_reduction(ExampleKey::AsSoliton { k: 2 }, grid, 0.0)?,
    ] {
        interchange_case(&r.su3, &random_alpha(&mut rng), &mut table)?;
    }
    Ok(table.into_report("interchange", cases + 2, TOL_ANALYTIC))
}

fn norm_sq_coeff(s: &SU3Structure, a: &Form) -> Result<Coefficient> {
    s.metric().norm_sq(a)
}

/// Norm-lemma, relation, t68, divergence, curvature and reconstruction
/// identities on one reduction.
fn reduction_identity_case(
    r: &ReductionData,
    phi: &Form,
    table: &mut MaxTable,
) -> Result<()> {
    let su3 = &r.su3;
    let fs6 = &r.fs6;
    let g6 = su3.metric();
    let tor = r.torsion()?;
    let h = &r.h;
    let hinv = h.recip();
    let hm2 = h.mul(h).recip();

    // norm lemma (1): |gamma16|^2 = 1/2 H^{-1} |(dxi)_6|^2
    let lhs = norm_sq_coeff(su3, &r.gamma16)?;
    let rhs = norm_sq_coeff(su3, &r.dxi6)?.mul(&hinv).scale(0.5);
    table.update("norm_lemma_1", lhs.sub(&rhs).max_abs());

    // norm lemma (2): |tau|^2_phi = H^{-2}(|tau8|^2 + 3 |tau6|^2)
    //                             = H^{-2}|tau_h|^2 + H |tau_v|^2
    let g2 = metric_from_phi(phi)?;
    let tau_direct = torsion_tau(&g2, &r.fs7)?;
    let tau_sq = g2.metric().norm_sq(&tau_direct.tau)?;
    let mid = norm_sq_coeff(su3, &tor.tau8)?
        .add(&norm_sq_coeff(su3, &tor.tau6)?.scale(3.0))
        .mul(&hm2);
    let rhs = norm_sq_coeff(su3, &tor.tau_h)?
        .mul(&hm2)
        .add(&norm_sq_coeff(su3, &tor.tau_v)?.mul(h));
    table.update("norm_lemma_2a", tau_sq.sub(&mid).max_abs());
    table.update("norm_lemma_2b", tau_sq.sub(&rhs).max_abs());

    // norm lemma (3): |tau6|^2 = 2 H^{-1} |dH + gamma16|^2
    let mut h_form = Form::zero(6, 0);
    *h_form.coeff_mut(&[]) = h.clone();
    let dh = fs6.d(&h_form)?;
    let lhs = norm_sq_coeff(su3, &tor.tau6)?;
    let rhs = norm_sq_coeff(su3, &dh.add(&r.gamma16)?)?.mul(&hinv).scale(2.0);
    table.update("norm_lemma_3", lhs.sub(&rhs).max_abs());

    // norm lemma (4): |d Omega-|^2 = H^{-1}|tau8|^2
    //   + H^{-2}(9/2 |dH|^2 + 2 |gamma16|^2 + 6 g(dH, gamma16))
    let dom = fs6.d(&su3.omega_minus)?;
    let lhs = norm_sq_coeff(su3, &dom)?;
    let rhs = norm_sq_coeff(su3, &tor.tau8)?.mul(&hinv).add(
        &norm_sq_coeff(su3, &dh)?
            .scale(4.5)
            .add(&norm_sq_coeff(su3, &r.gamma16)?.scale(2.0))
            .add(&g6.inner(&dh, &r.gamma16)?.scale(6.0))
            .mul(&hm2),
    );
    table.update("norm_lemma_4", lhs.sub(&rhs).max_abs());

    // relation identities come out of the quotient torsion residual table
    table.update("relation_1", tor.relation1);
    table.update("relation_2", tor.relation2);
    table.update("t68", tor.t68);
    table.update("noomega", tor.noomega);
    table.update("tau_coclosed", tor.coclosed);
    table.update("tau_match", tor.tau_match);

    // divergence identity, both forms
    let (d1, d2) = divergence_identity_residual(r)?;
    table.update("divergence", d1.max_abs());
    table.update("divergence_alt", d2.max_abs());

    // Gibbons-Hawking curvature formula
    let gh = gibbons_hawking_dxi(su3, h, fs6)?;
    table.update("gibbons_hawking", gh.distance(&r.dxi));

    // d Omega+ and d Omega- reconstruct from the torsion data
    let dplus = fs6.d(&su3.omega_plus)?;
    let one = dh
        .scale_coeff(&hinv)
        .scale(-1.5)
        .sub(&r.gamma16.scale_coeff(&hinv))?
        .wedge(&su3.omega_plus)?;
    let two = r.dxi8.wedge(&su3.omega)?.scale_coeff(&h.powf(-1.5));
    table.update("omega_plus_torsion", dplus.distance(&one.sub(&two)?));

    let dminus = fs6.d(&su3.omega_minus)?;
    let dch = su3.d_c(&h_form, fs6)?;
    let one = tor
        .tau_v
        .scale_coeff(&h.scale(0.5))
        .sub(&dch.scale_coeff(&hinv.scale(0.5)))?
        .wedge(&su3.omega_plus)?;
    let two = tor.tau8.wedge(&su3.omega)?.scale_coeff(&h.powf(-0.5));
    table.update("omega_minus_torsion", dminus.distance(&one.add(&two)?));

    // curvature split membership
    let om2 = su3.omega.wedge(&su3.omega)?;
    table.update("dxi8_omega2", r.dxi8.wedge(&om2)?.max_abs());
    table.update("dxi8_omega_plus", r.dxi8.wedge(&su3.omega_plus)?.max_abs());
    table.update(
        "dxi6_eigen",
        su3.star(&r.dxi6.wedge(&su3.omega)?)?.distance(&r.dxi6),
    );
    Ok(())
}

/// Norm lemma, relations, divergence and Gibbons-Hawking identities on
/// randomized closed warped structures, random Bryant times, and the two
/// registered families.
pub fn reduction_identity_suite(seed: u64, cases: usize, grid: Grid) -> Result<CheckReport> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut table = MaxTable::new();
    let small = Grid::new(-0.6, 0.6, 33)?;
    for i in 0..cases {
        let (phi, fs, y) = if i % 4 == 3 {
            let t: f64 = rng.gen_range(0.0..1.5);
            (catalog::bryant_phi(t), catalog::bryant_frame(), 6)
        } else {
            let p = catalog::random_closed_as(&mut rng, small, 4);
            (p.phi(), p.frame(), 6)
        };
        let g2 = metric_from_phi(&phi)?;
        let mut r = reduce(&g2, &fs, y)?;
        quotient_torsion(&mut r)?;
        reduction_identity_case(&r, &phi, &mut table)?;
    }
    for key in [ExampleKey::Bryant, ExampleKey::AsSoliton { k: 2 }] {
        let r = example_reduction(key, grid, 0.0)?;
        let phi = r.reconstruct_phi()?;
        reduction_identity_case(&r, &phi, &mut table)?;
    }
    Ok(table.into_report("reduction_identities", cases + 2, TOL_ANALYTIC))
}

/// Pointwise 2-form identity: coeff_vol(alpha ^ alpha ^ phi)
/// = 2 |alpha_7|^2 - |alpha_14|^2 on randomized G2-structures.
pub fn pointwise_two_form_suite(seed: u64, cases: usize) -> Result<CheckReport> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut table = MaxTable::new();
    for i in 0..cases + 2 {
        let phi = match i {
            0 => catalog::bryant_phi(0.0),
            1 => catalog::standard_phi(),
            _ => catalog::random_g2_phi(&mut rng),
        };
        let g2 = metric_from_phi(&phi)?;
        let alpha = catalog::random_form(&mut rng, 7, 2);
        let (a7, a14) = decompose2_g2(&alpha, &g2)?;
        let lhs = g2.star(&alpha.wedge(&alpha)?.wedge(&phi)?)?;
        let rhs = g2
            .metric()
            .norm_sq(&a7)?
            .scale(2.0)
            .sub(&g2.metric().norm_sq(&a14)?);
        table.update("pointwise_2form", lhs.coeffs()[0].sub(&rhs).max_abs());
    }
    Ok(table.into_report("pointwise_two_form", cases + 2, TOL_ANALYTIC))
}

/// Soliton checks for the exponential family: the full G2 residual, the
/// profile ODE pair, and the pointwise torsion norm 27 k^2 / 2.
pub fn soliton_suite(k: u32, grid: Grid) -> Result<CheckReport> {
    let mut report = CheckReport::new("soliton", 1);
    let (lambda, a) = catalog::as_soliton_constants(k);
    let p = catalog::as_soliton(k, grid, catalog::JET_DEPTH);
    let g2 = metric_from_phi(&p.phi())?;
    let spec = SolitonSpec::vertical(lambda, a);
    let res = g2_soliton_residual(&g2, &spec, &p.frame())?;
    report.push("soliton_residual_analytic", res.max_abs(), 1e-10);

    // sampled profiles without analytic derivatives: the FD route at the
    // benchmark resolution
    let fine = Grid::new(grid.min, grid.max, 2001)?;
    let pf = catalog::as_soliton(k, fine, 0);
    let (af, bf, cf) = pf.abc();
    let phi_fd =
        catalog::as_phi_from_abc(&af.strip_jets(), &bf.strip_jets(), &cf.strip_jets());
    let g2_fd = metric_from_phi(&phi_fd)?;
    let res_fd = g2_soliton_residual(&g2_fd, &spec, &pf.frame())?;
    report.push("soliton_residual_fd", res_fd.max_abs(), TOL_FD);

    let tor = torsion_tau(&g2, &p.frame())?;
    let n2 = g2.metric().norm_sq(&tor.tau)?;
    let expect = 13.5 * (k as f64).powi(2);
    report.push(
        "tau_norm_sq_pointwise",
        n2.sub(&Coefficient::Const(expect)).max_abs(),
        1e-9,
    );

    let u = Coefficient::coordinate(grid, catalog::JET_DEPTH);
    let f_profile = u.scale(k as f64).exp();
    let (r1, r2) = soliton_ode_residual(&f_profile, &Coefficient::Const(a), lambda)?;
    report.push("soliton_ode_1", r1.max_abs(), 1e-10);
    report.push("soliton_ode_2", r2.max_abs(), 1e-10);
    Ok(report)
}

/// Torsion checks for a named example.
pub fn torsion_suite(key: ExampleKey, grid: Grid) -> Result<CheckReport> {
    let mut report = CheckReport::new("torsion", 1);
    let (phi, fs) = match key {
        ExampleKey::Bryant => (catalog::bryant_phi(0.0), catalog::bryant_frame()),
        ExampleKey::AsSoliton { k } => {
            let p = catalog::as_soliton(k, grid, catalog::JET_DEPTH);
            (p.phi(), p.frame())
        }
        ExampleKey::AsTorsionFree => {
            let p = catalog::as_torsionfree(grid, catalog::JET_DEPTH)?;
            (p.phi(), p.frame())
        }
        ExampleKey::Flat => {
            (catalog::standard_phi(), crate::exterior::registry("flat7", None)?)
        }
    };
    let g2 = metric_from_phi(&phi)?;
    let tor = torsion_tau(&g2, &fs)?;
    report.push("tau_solve_residual", tor.residual, TOL_ANALYTIC);
    report.push("closure_residual", tor.closure_residual, TOL_ANALYTIC);
    match key {
        ExampleKey::AsTorsionFree | ExampleKey::Flat => {
            report.push("tau_norm", tor.tau.max_abs(), 1e-10);
        }
        ExampleKey::Bryant => {
            let n2 = g2.metric().norm_sq(&tor.tau)?.eval(0);
            report.push("tau_norm_sq_vs_2", (n2 - 2.0).abs(), 1e-10);
        }
        ExampleKey::AsSoliton { k } => {
            let n2 = g2.metric().norm_sq(&tor.tau)?;
            let expect = 13.5 * (k as f64).powi(2);
            report.push(
                "tau_norm_sq_vs_27k2_over_2",
                n2.sub(&Coefficient::Const(expect)).max_abs(),
                1e-9,
            );
        }
    }
    Ok(report)
}

/// Quotient soliton system on the reduced shrinker, plus the sensitivity
/// check with a perturbed Higgs field.
pub fn quotient_soliton_suite(k: u32, grid: Grid) -> Result<CheckReport> {
    use crate::reduction::{quotient_soliton_residual, quotient_torsion_forms, QuotientTorsion};
    let mut report = CheckReport::new("quotient_soliton", 1);
    let (lambda, a) = catalog::as_soliton_constants(k);
    let r = example_reduction(ExampleKey::AsSoliton { k }, grid, 0.0)?;
    let mut v = vec![Coefficient::zero(); 6];
    v[5] = Coefficient::Const(a);
    let (r1, r2) = quotient_soliton_residual(&r, lambda, &v)?;
    report.push("quotient_soliton_omega", r1.max_abs(), TOL_ANALYTIC);
    report.push("quotient_soliton_omega_plus", r2.max_abs(), TOL_ANALYTIC);

    let mut rp = r.clone();
    rp.h = rp.h.scale(1.01);
    let (tau_h, tau_v, tau6, tau8) =
        quotient_torsion_forms(&rp.su3, &rp.fs6, &rp.h, &rp.gamma16)?;
    rp.torsion = Some(QuotientTorsion {
        tau_h,
        tau6,
        tau8,
        tau_v,
        tau_match: 0.0,
        noomega: 0.0,
        relation1: 0.0,
        relation2: 0.0,
        t68: 0.0,
        coclosed: 0.0,
    });
    let (p1, p2) = quotient_soliton_residual(&rp, lambda, &v)?;
    let sensitivity = p1.max_abs().max(p2.max_abs());
    report.lines.push(CheckLine {
        name: "higgs_perturbation_visible".into(),
        residual: sensitivity,
        tol: 1e-3,
        pass: sensitivity > 1e-3,
    });
    Ok(report)
}

/// FD variants of the reduction identities: the soliton profiles sampled
/// without analytic derivatives, residuals at the FD tolerance.
pub fn fd_reduction_suite(k: u32, grid: Grid) -> Result<CheckReport> {
    let p = catalog::as_soliton(k, grid, catalog::JET_DEPTH);
    let (af, bf, cf) = p.abc();
    let phi =
        catalog::as_phi_from_abc(&af.strip_jets(), &bf.strip_jets(), &cf.strip_jets());
    let g2 = metric_from_phi(&phi)?;
    let mut r = reduce(&g2, &p.frame(), 6)?;
    quotient_torsion(&mut r)?;
    let mut table = MaxTable::new();
    reduction_identity_case(&r, &phi, &mut table)?;
    Ok(table.into_report("reduction_identities_fd", 1, TOL_FD))
}

/// Torsion classes of an example reduction as a serializable report.
pub fn torsion_class_report(
    r: &ReductionData,
) -> Result<crate::structures::su3::TorsionClasses> {
    su3_torsion_classes(&r.su3, &r.fs6)
}

/// The profiles backing an example, when it is one of the warped families.
pub fn example_profiles(key: ExampleKey, grid: Grid) -> Result<Option<AsProfiles>> {
    Ok(match key {
        ExampleKey::AsSoliton { k } => Some(catalog::as_soliton(k, grid, catalog::JET_DEPTH)),
        ExampleKey::AsTorsionFree => Some(catalog::as_torsionfree(grid, catalog::JET_DEPTH)?),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_key_parsing() {
        assert_eq!("bryant".parse::<ExampleKey>().unwrap(), ExampleKey::Bryant);
        assert_eq!(
            "as-soliton:k=3".parse::<ExampleKey>().unwrap(),
            ExampleKey::AsSoliton { k: 3 }
        );
        assert!("as-soliton:k=0".parse::<ExampleKey>().is_err());
        assert!("nonsense".parse::<ExampleKey>().is_err());
    }

    #[test]
    fn small_suites_pass() {
        let grid = Grid::new(-1.0, 1.0, 33).unwrap();
        let r = interchange_suite(7, 10, grid).unwrap();
        assert!(r.all_pass(), "{:?}", r.lines);
        let r = reduction_identity_suite(11, 8, grid).unwrap();
        assert!(r.all_pass(), "{:?}", r.lines);
        let r = pointwise_two_form_suite(13, 10).unwrap();
        assert!(r.all_pass(), "{:?}", r.lines);
        let r = soliton_suite(2, grid).unwrap();
        assert!(r.all_pass(), "{:?}", r.lines);
        let r = quotient_soliton_suite(2, Grid::new(-0.5, 0.5, 41).unwrap()).unwrap();
        assert!(r.all_pass(), "{:?}", r.lines);
    }
}
