//! SU(3)-structures on a 6-frame: Hitchin's complex structure from a stable
//! 3-form, type decompositions of 2- and 3-forms, and the torsion classes
//! (sigma0, pi0, nu1, pi1, pi2, sigma2, nu3).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::jetlin::JetMat;
use crate::exterior::{comb, Coefficient, Endo, Form, FrameStructure, Metric, SymTensor};

/// An SU(3)-structure (omega, Omega+, Omega-, J, g) on a 6-frame.
#[derive(Clone, Debug)]
pub struct SU3Structure {
    pub omega: Form,
    pub omega_plus: Form,
    pub omega_minus: Form,
    pub j: Endo,
    metric: Metric,
}

/// Residuals of the defining SU(3) compatibilities.
#[derive(Clone, Debug, Serialize)]
pub struct SU3Residuals {
    /// omega ^ Omega+ and omega ^ Omega-
    pub compat_plus: f64,
    pub compat_minus: f64,
    /// (2/3) omega^3 - Omega+ ^ Omega-
    pub normalization: f64,
    /// J^2 + Id
    pub j_squared: f64,
    /// Omega- - *Omega+
    pub star_plus_minus: f64,
    /// omega^3/6 - vol_g
    pub vol_match: f64,
}

impl SU3Residuals {
    pub fn max(&self) -> f64 {
        self.compat_plus
            .max(self.compat_minus)
            .max(self.normalization)
            .max(self.j_squared)
            .max(self.star_plus_minus)
            .max(self.vol_match)
    }
}

impl SU3Structure {
    /// Recovers the full structure from the pair (omega, Omega+): J by the
    /// Hitchin construction (sign fixed by positivity of omega(., J.)),
    /// then g, the orientation from omega^3, and Omega- = * Omega+.
    pub fn from_omega_plus(omega: &Form, omega_plus: &Form) -> Result<SU3Structure> {
        if omega.n() != 6 || omega.degree() != 2 || omega_plus.degree() != 3 {
            return Err(Error::Degree("expected (2-form, 3-form) on a 6-frame".into()));
        }
        let mut hint = Form::zero(6, 6);
        *hint.coeff_mut(&[1, 2, 3, 4, 5, 6]) = Coefficient::one();
        let j_raw = hitchin_j(omega_plus, &hint)?;
        let (j, metric) = match metric_from_omega_j(omega, &j_raw) {
            Ok(m) => (j_raw, m),
            Err(_) => {
                let flipped = j_raw.scale(-1.0);
                let m = metric_from_omega_j(omega, &flipped).map_err(|_| {
                    Error::Metric("omega(., J.) indefinite for both signs of J".into())
                })?;
                (flipped, m)
            }
        };
        let omega_minus = metric.star(omega_plus)?;
        Ok(SU3Structure { omega: omega.clone(), omega_plus: omega_plus.clone(), omega_minus, j, metric })
    }

    /// Recovers the structure from (omega, Omega-): J by the Hitchin
    /// construction applied to Omega- (which induces the same J as Omega+),
    /// sign fixed by positivity, then Omega+ = -*Omega-.
    pub fn from_omega_and_minus(omega: &Form, omega_minus: &Form) -> Result<SU3Structure> {
        if omega.n() != 6 || omega.degree() != 2 || omega_minus.degree() != 3 {
            return Err(Error::Degree("expected (2-form, 3-form) on a 6-frame".into()));
        }
        let mut hint = Form::zero(6, 6);
        *hint.coeff_mut(&[1, 2, 3, 4, 5, 6]) = Coefficient::one();
        let j_raw = hitchin_j(omega_minus, &hint)?;
        let (j, metric) = match metric_from_omega_j(omega, &j_raw) {
            Ok(m) => (j_raw, m),
            Err(_) => {
                let flipped = j_raw.scale(-1.0);
                let m = metric_from_omega_j(omega, &flipped).map_err(|_| {
                    Error::Metric("omega(., J.) indefinite for both signs of J".into())
                })?;
                (flipped, m)
            }
        };
        let omega_plus = metric.star(omega_minus)?.neg();
        Ok(SU3Structure {
            omega: omega.clone(),
            omega_plus,
            omega_minus: omega_minus.clone(),
            j,
            metric,
        })
    }

    /// Assembles a structure from explicitly known data (used by the circle
    /// reduction, where omega, Omega+-, g and the orientation are all given).
    pub fn from_parts(
        omega: Form,
        omega_plus: Form,
        omega_minus: Form,
        metric: Metric,
    ) -> Result<SU3Structure> {
        // J solves omega(u, J v) = g(u, v), i.e. W J = G in matrices.
        let n = 6;
        let mut w_entries = Vec::with_capacity(36);
        for i in 1..=n {
            for j in 1..=n {
                w_entries.push(omega_entry(&omega, i, j));
            }
        }
        let w = JetMat::from_coeffs(n, n, &w_entries)?;
        let g = JetMat::from_coeffs(n, n, &metric.tensor().full_entries())?;
        let j_mat = w.solve(&g)?;
        let j = Endo::from_entries(n, j_mat.to_coeffs());
        Ok(SU3Structure { omega, omega_plus, omega_minus, j, metric })
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn star(&self, a: &Form) -> Result<Form> {
        self.metric.star(a)
    }

    pub fn vol(&self) -> Form {
        self.metric.vol()
    }

    /// d^c f = J(df) for a function (degree-0 form).
    pub fn d_c(&self, f: &Form, fs: &FrameStructure) -> Result<Form> {
        Ok(self.j.apply_oneform(&fs.d(f)?))
    }

    pub fn validate(&self) -> Result<SU3Residuals> {
        let compat_plus = self.omega.wedge(&self.omega_plus)?.max_abs();
        let compat_minus = self.omega.wedge(&self.omega_minus)?.max_abs();
        let om3 = self.omega.wedge(&self.omega)?.wedge(&self.omega)?;
        let normalization =
            om3.scale(2.0 / 3.0).distance(&self.omega_plus.wedge(&self.omega_minus)?);
        let j_squared = self.j.complex_structure_residual();
        let star_plus_minus = self.omega_minus.distance(&self.metric.star(&self.omega_plus)?);
        let vol_match = om3.scale(1.0 / 6.0).distance(&self.metric.vol());
        Ok(SU3Residuals {
            compat_plus,
            compat_minus,
            normalization,
            j_squared,
            star_plus_minus,
            vol_match,
        })
    }
}

/// Antisymmetric matrix entry omega(e_i, e_j) from the 2-form coefficients.
fn omega_entry(omega: &Form, i: usize, j: usize) -> Coefficient {
    use std::cmp::Ordering;
    match i.cmp(&j) {
        Ordering::Less => omega.coeff(&[i, j]).clone(),
        Ordering::Equal => Coefficient::zero(),
        Ordering::Greater => omega.coeff(&[j, i]).neg(),
    }
}

fn metric_from_omega_j(omega: &Form, j: &Endo) -> Result<Metric> {
    let n = 6;
    let mut sym = SymTensor::zero(n);
    for a in 1..=n {
        for b in a..=n {
            // g(e_a, e_b) = omega(e_a, J e_b)
            let mut acc = Coefficient::zero();
            for k in 1..=n {
                let w = omega_entry(omega, a, k);
                if !w.is_const_zero() {
                    acc = acc.add(&w.mul(j.get(k, b)));
                }
            }
            sym.set(a, b, acc);
        }
    }
    // orientation fixed by the sign of omega^3
    let om3 = omega.wedge(omega)?.wedge(omega)?;
    let top = om3.coeffs()[0].clone();
    let orientation = if top.min_value() > 0.0 {
        1.0
    } else if top.scale(-1.0).min_value() > 0.0 {
        -1.0
    } else {
        return Err(Error::Metric("omega^3 vanishes or changes sign".into()));
    };
    Metric::new(sym, orientation)
}

/// Hitchin's construction: K^i_j vol_hint = iota^{-1}((e_j . Omega+) ^ Omega+)
/// with iota(w (x) vol) = w . vol, lambda = tr(K^2)/6 < 0 for stable forms,
/// J = -K / sqrt(-lambda).
///
/// The sign of `vol_hint` fixes the orientation; with vol_hint = +e^{1..6}
/// the standard Omega+ yields J e_1 = e_2.
pub fn hitchin_j(omega_plus: &Form, vol_hint: &Form) -> Result<Endo> {
    if omega_plus.n() != 6 || omega_plus.degree() != 3 {
        return Err(Error::Degree("hitchin_j expects a 3-form on a 6-frame".into()));
    }
    if vol_hint.degree() != 6 || vol_hint.coeffs()[0].max_abs() == 0.0 {
        return Err(Error::Degree("vol_hint must be a non-vanishing 6-form".into()));
    }
    let n = 6;
    let v_inv = vol_hint.coeffs()[0].recip();
    let mut k_entries = vec![Coefficient::zero(); n * n];
    for j in 1..=n {
        let beta = omega_plus.contract_basis(j)?.wedge(omega_plus)?;
        // beta = sum_i w^i (e_i . vol); e_i . e^{1..6} = (-1)^{i-1} e^{comp(i)}
        for i in 1..=n {
            let comp = comb::complement(n, 1u8 << (i - 1));
            let coeff = beta.coeff_by_rank(comb::rank(n, comp));
            let sign = if (i - 1) % 2 == 0 { 1.0 } else { -1.0 };
            k_entries[(i - 1) * n + (j - 1)] = coeff.mul(&v_inv).scale(sign);
        }
    }
    let k = Endo::from_entries(n, k_entries);
    let ksq = k.compose(&k);
    let mut lambda = Coefficient::zero();
    for i in 1..=n {
        lambda = lambda.add(ksq.get(i, i));
    }
    lambda = lambda.scale(1.0 / 6.0);
    if lambda.scale(-1.0).min_value() <= 0.0 {
        return Err(Error::NotStable(format!(
            "lambda(Omega+) must be negative everywhere, sup = {:.3e}",
            -lambda.scale(-1.0).min_value()
        )));
    }
    let norm = lambda.neg().sqrt().recip();
    Ok(k.scale_coeff(&norm).scale(-1.0))
}

/// Splits a 2-form as (<omega> part, Lambda^2_6 part, Lambda^2_8 part) via
/// the +-1 eigensplit of alpha -> *(alpha ^ omega) on the omega-complement.
pub fn decompose2_su3(alpha: &Form, s: &SU3Structure) -> Result<(Form, Form, Form)> {
    if alpha.degree() != 2 {
        return Err(Error::Degree("decompose2_su3 expects a 2-form".into()));
    }
    let c = s.metric.inner(alpha, &s.omega)?.scale(1.0 / 3.0);
    let a1 = s.omega.scale_coeff(&c);
    let rest = alpha.sub(&a1)?;
    let l = s.star(&rest.wedge(&s.omega)?)?;
    let a6 = rest.add(&l)?.scale(0.5);
    let a8 = rest.sub(&l)?.scale(0.5);
    Ok((a1, a6, a8))
}

/// Splits a 3-form as c+ Omega+ + c- Omega- + (alpha ^ omega) + gamma12.
/// Returns (c+, c-, gamma6, gamma12).
pub fn decompose3_su3(
    gamma: &Form,
    s: &SU3Structure,
) -> Result<(Coefficient, Coefficient, Form, Form)> {
    let (cp, cm, alpha, g6, g12) = decompose3_su3_full(gamma, s)?;
    let _ = alpha;
    Ok((cp, cm, g6, g12))
}

/// As `decompose3_su3` but also returning the 1-form alpha with
/// gamma6 = alpha ^ omega.
pub fn decompose3_su3_full(
    gamma: &Form,
    s: &SU3Structure,
) -> Result<(Coefficient, Coefficient, Form, Form, Form)> {
    if gamma.degree() != 3 {
        return Err(Error::Degree("decompose3_su3 expects a 3-form".into()));
    }
    // |Omega+-|^2 = 4
    let cp = s.metric.inner(gamma, &s.omega_plus)?.scale(0.25);
    let cm = s.metric.inner(gamma, &s.omega_minus)?.scale(0.25);
    let rest = gamma
        .sub(&s.omega_plus.scale_coeff(&cp))?
        .sub(&s.omega_minus.scale_coeff(&cm))?;
    // project onto span{e^i ^ omega}
    let basis: Vec<Form> = (1..=6)
        .map(|i| Form::basis(6, &[i]).wedge(&s.omega))
        .collect::<Result<_>>()?;
    let mut gram = Vec::with_capacity(36);
    for bi in &basis {
        for bj in &basis {
            gram.push(s.metric.inner(bi, bj)?);
        }
    }
    let mut rhs = Vec::with_capacity(6);
    for bi in &basis {
        rhs.push(s.metric.inner(&rest, bi)?);
    }
    let sol = JetMat::from_coeffs(6, 6, &gram)?.solve(&JetMat::from_coeffs(6, 1, &rhs)?)?;
    let mut alpha = Form::zero(6, 1);
    for i in 1..=6 {
        *alpha.coeff_mut(&[i]) = sol.entry_coeff(i - 1, 0);
    }
    let g6 = alpha.wedge(&s.omega)?;
    let g12 = rest.sub(&g6)?;
    Ok((cp, cm, alpha, g6, g12))
}

/// Solves *(alpha ^ Omega+) = mu for alpha in Lambda^1 given mu in Lambda^2_6.
pub fn solve_lambda26(mu: &Form, s: &SU3Structure) -> Result<Form> {
    let columns: Vec<Form> = (1..=6)
        .map(|i| s.star(&Form::basis(6, &[i]).wedge(&s.omega_plus)?))
        .collect::<Result<_>>()?;
    let c2 = comb::binomial(6, 2);
    let mut entries = Vec::with_capacity(c2 * 6);
    for r in 0..c2 {
        for col in &columns {
            entries.push(col.coeff_by_rank(r).clone());
        }
    }
    let a = JetMat::from_coeffs(c2, 6, &entries)?;
    let mut rhs = Vec::with_capacity(c2);
    for r in 0..c2 {
        rhs.push(mu.coeff_by_rank(r).clone());
    }
    let b = JetMat::from_coeffs(c2, 1, &rhs)?;
    let sol = a.lsq_solve(&b)?;
    let mut alpha = Form::zero(6, 1);
    for i in 1..=6 {
        *alpha.coeff_mut(&[i]) = sol.entry_coeff(i - 1, 0);
    }
    Ok(alpha)
}

/// The SU(3) torsion classes, defined by
/// d omega  = -3/2 sigma0 Omega+ + 3/2 pi0 Omega- + nu1 ^ omega + nu3,
/// d Omega+ = pi0 omega^2 + pi1 ^ Omega+ - pi2 ^ omega,
/// d Omega- = sigma0 omega^2 + (J pi1) ^ Omega+ - sigma2 ^ omega.
#[derive(Clone, Debug, Serialize)]
pub struct TorsionClasses {
    pub sigma0: Coefficient,
    pub pi0: Coefficient,
    pub nu1: Form,
    pub pi1: Form,
    pub pi2: Form,
    pub sigma2: Form,
    pub nu3: Form,
    pub residuals: TorsionClassResiduals,
}

#[derive(Clone, Debug, Serialize)]
pub struct TorsionClassResiduals {
    /// Re-substitution into the three defining equations.
    pub eq_domega: f64,
    pub eq_domega_plus: f64,
    pub eq_domega_minus: f64,
    /// pi1 extracted from d Omega+ versus d Omega-.
    pub pi1_consistency: f64,
    /// sigma0 and pi0 extracted from their two occurrences.
    pub sigma0_consistency: f64,
    pub pi0_consistency: f64,
    /// Module membership of pi2, sigma2 (Lambda^2_8) and nu3 (Lambda^3_12).
    pub membership: f64,
}

impl TorsionClasses {
    /// Largest class norm other than pi1 (zero for a Kahler structure).
    pub fn max_excluding_pi1(&self) -> f64 {
        self.sigma0
            .max_abs()
            .max(self.pi0.max_abs())
            .max(self.nu1.max_abs())
            .max(self.pi2.max_abs())
            .max(self.sigma2.max_abs())
            .max(self.nu3.max_abs())
    }

    pub fn max_all(&self) -> f64 {
        self.max_excluding_pi1().max(self.pi1.max_abs())
    }
}

pub fn su3_torsion_classes(s: &SU3Structure, fs: &FrameStructure) -> Result<TorsionClasses> {
    su3_torsion_classes_with_tol(s, fs, 1e-6)
}

pub fn su3_torsion_classes_with_tol(
    s: &SU3Structure,
    fs: &FrameStructure,
    pi1_tol: f64,
) -> Result<TorsionClasses> {
    let domega = fs.d(&s.omega)?;
    let dplus = fs.d(&s.omega_plus)?;
    let dminus = fs.d(&s.omega_minus)?;

    // d omega: scalars from the Omega+- components, nu1 from Lambda^3_6, nu3 the rest
    let (cp, cm, nu1, _g6, nu3) = decompose3_su3_full(&domega, s)?;
    let sigma0 = cp.scale(-2.0 / 3.0);
    let pi0_from_domega = cm.scale(2.0 / 3.0);

    // *d Omega+ = 2 pi0 omega + *(pi1 ^ Omega+) + pi2
    let star_dplus = s.star(&dplus)?;
    let (w_part, mu6, pi2) = decompose2_su3(&star_dplus, s)?;
    let pi0 = s.metric.inner(&w_part, &s.omega)?.scale(1.0 / 6.0);
    let pi1 = solve_lambda26(&mu6, s)?;

    // *d Omega- = 2 sigma0 omega + *((J pi1) ^ Omega+) + sigma2
    let star_dminus = s.star(&dminus)?;
    let (w_part_m, mu6_m, sigma2) = decompose2_su3(&star_dminus, s)?;
    let sigma0_alt = s.metric.inner(&w_part_m, &s.omega)?.scale(1.0 / 6.0);
    let jpi1 = solve_lambda26(&mu6_m, s)?;
    // J(J pi1) = -pi1
    let pi1_alt = s.j.apply_oneform(&jpi1).neg();

    let pi1_consistency = pi1.distance(&pi1_alt);
    if pi1_consistency > pi1_tol {
        return Err(Error::TorsionClasses(format!(
            "pi1 mismatch between d Omega+ and d Omega-: {pi1_consistency:.3e}"
        )));
    }

    // re-substitution residuals
    let om2 = s.omega.wedge(&s.omega)?;
    let eq1 = s
        .omega_plus
        .scale_coeff(&sigma0.scale(-1.5))
        .add(&s.omega_minus.scale_coeff(&pi0.scale(1.5)))?
        .add(&nu1.wedge(&s.omega)?)?
        .add(&nu3)?;
    let eq_domega = domega.distance(&eq1);
    let eq2 = om2
        .scale_coeff(&pi0)
        .add(&pi1.wedge(&s.omega_plus)?)?
        .sub(&pi2.wedge(&s.omega)?)?;
    let eq_domega_plus = dplus.distance(&eq2);
    let eq3 = om2
        .scale_coeff(&sigma0)
        .add(&s.j.apply_oneform(&pi1).wedge(&s.omega_plus)?)?
        .sub(&sigma2.wedge(&s.omega)?)?;
    let eq_domega_minus = dminus.distance(&eq3);

    let membership = pi2
        .wedge(&om2)?
        .max_abs()
        .max(pi2.wedge(&s.omega_plus)?.max_abs())
        .max(sigma2.wedge(&om2)?.max_abs())
        .max(sigma2.wedge(&s.omega_plus)?.max_abs())
        .max(nu3.wedge(&s.omega)?.max_abs())
        .max(nu3.wedge(&s.omega_plus)?.max_abs())
        .max(nu3.wedge(&s.omega_minus)?.max_abs());

    let residuals = TorsionClassResiduals {
        eq_domega,
        eq_domega_plus,
        eq_domega_minus,
        pi1_consistency,
        sigma0_consistency: sigma0.sub(&sigma0_alt).max_abs(),
        pi0_consistency: pi0.sub(&pi0_from_domega).max_abs(),
        membership,
    };
    Ok(TorsionClasses { sigma0, pi0, nu1, pi1, pi2, sigma2, nu3, residuals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use rand::SeedableRng;

    fn standard() -> SU3Structure {
        let (omega, op, _) = catalog::standard_su3_forms();
        SU3Structure::from_omega_plus(&omega, &op).unwrap()
    }

    #[test]
    fn hitchin_on_standard_model() {
        let s = standard();
        // J e_1 = e_2, J e_3 = e_4, J e_5 = e_6 (vectors)
        for (a, b) in [(1usize, 2usize), (3, 4), (5, 6)] {
            assert!((s.j.get(b, a).eval(0) - 1.0).abs() < 1e-12);
            assert!((s.j.get(a, b).eval(0) + 1.0).abs() < 1e-12);
        }
        assert!(s.j.complex_structure_residual() < 1e-12);
        let (_, _, om) = catalog::standard_su3_forms();
        assert!(s.omega_minus.distance(&om) < 1e-12);
        let r = s.validate().unwrap();
        assert!(r.max() < 1e-12, "residuals {r:?}");
        // metric is the identity
        for i in 1..=6 {
            assert!((s.metric().tensor().get(i, i).eval(0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hitchin_rejects_unstable_forms() {
        // e^{123} alone is not stable: lambda = 0
        let bad = Form::basis(6, &[1, 2, 3]);
        let hint = Form::basis(6, &[1, 2, 3, 4, 5, 6]);
        assert!(hitchin_j(&bad, &hint).is_err());
    }

    #[test]
    fn hitchin_j_squares_to_minus_id_on_random_stable_forms() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(17);
        let (omega, op, _) = catalog::standard_su3_forms();
        for _ in 0..10 {
            let a = catalog::random_gl(&mut rng, 6, 0.25);
            let s = SU3Structure::from_omega_plus(&omega.pullback(&a), &op.pullback(&a)).unwrap();
            assert!(s.j.complex_structure_residual() < 1e-10);
            let r = s.validate().unwrap();
            assert!(r.max() < 1e-10, "residuals {r:?}");
        }
    }

    #[test]
    fn decompositions_reconstruct_and_annihilate() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(23);
        let (omega, op, _) = catalog::standard_su3_forms();
        let a = catalog::random_gl(&mut rng, 6, 0.2);
        let s = SU3Structure::from_omega_plus(&omega.pullback(&a), &op.pullback(&a)).unwrap();

        let alpha = catalog::random_form(&mut rng, 6, 2);
        let (a1, a6, a8) = decompose2_su3(&alpha, &s).unwrap();
        assert!(a1.add(&a6).unwrap().add(&a8).unwrap().distance(&alpha) < 1e-11);
        let om2 = s.omega.wedge(&s.omega).unwrap();
        assert!(a8.wedge(&om2).unwrap().max_abs() < 1e-10);
        assert!(a8.wedge(&s.omega_plus).unwrap().max_abs() < 1e-10);
        // Lambda^2_6: *(a6 ^ omega) = a6
        assert!(s.star(&a6.wedge(&s.omega).unwrap()).unwrap().distance(&a6) < 1e-10);

        let gamma = catalog::random_form(&mut rng, 6, 3);
        let (cp, cm, g6, g12) = decompose3_su3(&gamma, &s).unwrap();
        let rebuilt = s
            .omega_plus
            .scale_coeff(&cp)
            .add(&s.omega_minus.scale_coeff(&cm))
            .unwrap()
            .add(&g6)
            .unwrap()
            .add(&g12)
            .unwrap();
        assert!(rebuilt.distance(&gamma) < 1e-12);
        assert!(g12.wedge(&s.omega).unwrap().max_abs() < 1e-10);
        assert!(g12.wedge(&s.omega_plus).unwrap().max_abs() < 1e-10);
        assert!(g12.wedge(&s.omega_minus).unwrap().max_abs() < 1e-10);
    }

    #[test]
    fn decompose3_trivial_cases() {
        let s = standard();
        let (cp, cm, g6, g12) = decompose3_su3(&s.omega_plus, &s).unwrap();
        assert!((cp.eval(0) - 1.0).abs() < 1e-12);
        assert!(cm.max_abs() < 1e-12 && g6.max_abs() < 1e-12 && g12.max_abs() < 1e-12);
        // e^1 ^ omega lies in Lambda^3_6
        let w = Form::basis(6, &[1]).wedge(&s.omega).unwrap();
        let (cp, cm, g6, g12) = decompose3_su3(&w, &s).unwrap();
        assert!(cp.max_abs() < 1e-12 && cm.max_abs() < 1e-12);
        assert!(g6.distance(&w) < 1e-12);
        assert!(g12.max_abs() < 1e-12);
    }

    #[test]
    fn flat_torus_is_torsion_free() {
        let s = standard();
        let fs = crate::exterior::registry("flat6", None).unwrap();
        let tc = su3_torsion_classes(&s, &fs).unwrap();
        assert!(tc.max_all() < 1e-13);
        assert!(tc.residuals.eq_domega < 1e-13);
    }

    #[test]
    fn inconsistent_torsion_data_is_rejected() {
        // flipping the sign of Omega- breaks the pi1 match between the
        // d Omega+ and d Omega- equations on a frame with torsion
        let grid = crate::exterior::Grid::new(-0.5, 0.5, 17).unwrap();
        let p = crate::catalog::as_soliton(2, grid, crate::catalog::JET_DEPTH);
        let g2 = crate::structures::g2::metric_from_phi(&p.phi()).unwrap();
        let r = crate::reduction::reduce(&g2, &p.frame(), 6).unwrap();
        let bad = SU3Structure {
            omega: r.su3.omega.clone(),
            omega_plus: r.su3.omega_plus.clone(),
            omega_minus: r.su3.omega_minus.neg(),
            j: r.su3.j.clone(),
            metric: r.su3.metric().clone(),
        };
        assert!(matches!(
            su3_torsion_classes(&bad, &r.fs6),
            Err(crate::error::Error::TorsionClasses(_))
        ));
    }

    #[test]
    fn omega_norm_and_volume_conventions() {
        let s = standard();
        // |omega|^2 = 3, |Omega+-|^2 = 4, vol = omega^3/6
        assert!((s.metric().norm_sq(&s.omega).unwrap().eval(0) - 3.0).abs() < 1e-12);
        assert!((s.metric().norm_sq(&s.omega_plus).unwrap().eval(0) - 4.0).abs() < 1e-12);
        assert!((s.metric().norm_sq(&s.omega_minus).unwrap().eval(0) - 4.0).abs() < 1e-12);
        let om3 = s.omega.wedge(&s.omega).unwrap().wedge(&s.omega).unwrap();
        assert!(om3.scale(1.0 / 6.0).distance(&s.vol()) < 1e-12);
    }
}
