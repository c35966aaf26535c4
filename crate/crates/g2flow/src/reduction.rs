//! Circle reduction of an invariant closed G2-structure to SU(3) data
//! (omega, Omega, H, xi) on the quotient 6-frame, the quotient torsion forms,
//! and the Gibbons-Hawking style curvature reconstruction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::{comb, Coefficient, Form, FrameStructure, Metric, SymTensor};
use crate::structures::g2::{metric_from_phi, torsion_tau, G2Structure};
use crate::structures::su3::{decompose2_su3, SU3Residuals, SU3Structure};

pub const INVARIANCE_TOL: f64 = 1e-9;

/// Index bookkeeping between the 7-frame and the quotient 6-frame.
#[derive(Clone, Copy, Debug)]
pub struct QuotientMap {
    pub fiber: usize,
    /// upstairs index of each quotient coframe element, ascending.
    pub up_of_down: [usize; 6],
}

impl QuotientMap {
    pub fn new(fiber: usize) -> Self {
        let mut up = [0usize; 6];
        let mut k = 0;
        for i in 1..=7 {
            if i != fiber {
                up[k] = i;
                k += 1;
            }
        }
        QuotientMap { fiber, up_of_down: up }
    }

    fn down_mask(&self, up_mask: u8) -> u8 {
        let mut m = 0u8;
        for (d, &u) in self.up_of_down.iter().enumerate() {
            if up_mask & (1 << (u - 1)) != 0 {
                m |= 1 << d;
            }
        }
        m
    }

    fn up_mask(&self, down_mask: u8) -> u8 {
        let mut m = 0u8;
        for (d, &u) in self.up_of_down.iter().enumerate() {
            if down_mask & (1 << d) != 0 {
                m |= 1 << (u - 1);
            }
        }
        m
    }

    /// Max-norm of the coefficients that involve the fiber direction.
    pub fn horizontality_residual(&self, a: &Form) -> f64 {
        let bit = 1u8 << (self.fiber - 1);
        let mut max = 0.0f64;
        for (r, &m) in comb::masks(7, a.degree()).iter().enumerate() {
            if m & bit != 0 {
                max = max.max(a.coeff_by_rank(r).max_abs());
            }
        }
        max
    }

    /// Push a horizontal form on the 7-frame down to the 6-frame. The index
    /// relabeling is order-preserving, so no signs appear.
    pub fn push_down(&self, a: &Form) -> Result<Form> {
        let res = self.horizontality_residual(a);
        if res > 1e-8 {
            return Err(Error::NotInvariant(format!(
                "form is not horizontal: fiber components up to {res:.3e}"
            )));
        }
        let mut out = Form::zero(6, a.degree());
        let bit = 1u8 << (self.fiber - 1);
        for (r, &m) in comb::masks(7, a.degree()).iter().enumerate() {
            if m & bit == 0 {
                out.set_by_rank(comb::rank(6, self.down_mask(m)), a.coeff_by_rank(r).clone());
            }
        }
        Ok(out)
    }

    /// Lift a form on the quotient frame back to the 7-frame.
    pub fn lift(&self, a: &Form) -> Form {
        let mut out = Form::zero(7, a.degree());
        for (r, &m) in comb::masks(6, a.degree()).iter().enumerate() {
            out.set_by_rank(comb::rank(7, self.up_mask(m)), a.coeff_by_rank(r).clone());
        }
        out
    }
}

/// Residuals recorded while building a reduction.
#[derive(Clone, Debug, Serialize)]
pub struct ReductionResiduals {
    pub invariance: f64,
    pub dxi_horizontal: f64,
    /// phi = xi ^ omega + H^{3/2} Omega+
    pub reconstruction_phi: f64,
    /// *phi = 1/2 H^2 omega^2 - xi ^ H^{1/2} Omega-
    pub reconstruction_star_phi: f64,
    /// g_phi = H^{-2} xi^2 + H g_omega
    pub reconstruction_metric: f64,
    /// d xi ^ omega^2 = 0
    pub dxi_omega2: f64,
    /// defining relation of gamma^1_6
    pub gamma16: f64,
    pub su3: SU3Residuals,
}

impl ReductionResiduals {
    pub fn max(&self) -> f64 {
        self.invariance
            .max(self.dxi_horizontal)
            .max(self.reconstruction_phi)
            .max(self.reconstruction_star_phi)
            .max(self.reconstruction_metric)
            .max(self.dxi_omega2)
            .max(self.gamma16)
            .max(self.su3.max())
    }
}

/// Quotient torsion data of a closed invariant G2-structure.
#[derive(Clone, Debug)]
pub struct QuotientTorsion {
    pub tau_h: Form,
    pub tau6: Form,
    pub tau8: Form,
    pub tau_v: Form,
    /// tau_h + xi ^ tau_v versus the direct torsion solve upstairs.
    pub tau_match: f64,
    /// tau_h ^ omega^2 = 0
    pub noomega: f64,
    /// tau_v ^ 1/2 H^{3/2} omega^2 = tau_h ^ Omega-
    pub relation1: f64,
    /// H dH ^ omega^2 - (dxi)_6 ^ H^{1/2} Omega- = tau_6 ^ H^{3/2} Omega+
    pub relation2: f64,
    /// d tau_6 ^ omega = d tau_8 ^ omega
    pub t68: f64,
    /// d*_omega tau_h = 0
    pub coclosed: f64,
}

impl QuotientTorsion {
    pub fn max_residual(&self) -> f64 {
        self.tau_match
            .max(self.noomega)
            .max(self.relation1)
            .max(self.relation2)
            .max(self.t68)
            .max(self.coclosed)
    }
}

/// All data of a circle reduction.
#[derive(Clone, Debug)]
pub struct ReductionData {
    pub fs7: FrameStructure,
    pub y: usize,
    pub map: QuotientMap,
    pub fs6: FrameStructure,
    pub h: Coefficient,
    /// connection 1-form, on the 7-frame
    pub xi: Form,
    /// curvature and its type split, on the quotient frame
    pub dxi: Form,
    pub dxi6: Form,
    pub dxi8: Form,
    pub gamma16: Form,
    pub su3: SU3Structure,
    pub residuals: ReductionResiduals,
    pub torsion: Option<QuotientTorsion>,
}

impl ReductionData {
    pub fn reconstruct_phi(&self) -> Result<Form> {
        let h32 = self.h.powf(1.5);
        self.xi
            .wedge(&self.map.lift(&self.su3.omega))?
            .add(&self.map.lift(&self.su3.omega_plus).scale_coeff(&h32))
    }

    pub fn reconstruct_star_phi(&self) -> Result<Form> {
        let om2 = self.su3.omega.wedge(&self.su3.omega)?;
        let first = self.map.lift(&om2).scale_coeff(&self.h.mul(&self.h).scale(0.5));
        let second = self
            .xi
            .wedge(&self.map.lift(&self.su3.omega_minus))?
            .scale_coeff(&self.h.powf(0.5));
        first.sub(&second)
    }

    pub fn torsion(&self) -> Result<&QuotientTorsion> {
        self.torsion
            .as_ref()
            .ok_or_else(|| Error::Config("quotient torsion not computed yet".into()))
    }
}

/// Builds the quotient frame structure, requiring every non-fiber coframe
/// differential to be horizontal and fiber-free.
fn quotient_frame(fs7: &FrameStructure, map: &QuotientMap) -> Result<FrameStructure> {
    let mut differentials = Vec::with_capacity(6);
    for &u in &map.up_of_down {
        let de = fs7.coframe_differential(u);
        differentials.push(map.push_down(de).map_err(|_| {
            Error::NotInvariant(format!("de^{u} involves the fiber direction"))
        })?);
    }
    let u_index = match fs7.u_index() {
        Some(u) if u == map.fiber => {
            return Err(Error::NotInvariant("circle direction cannot be du".into()))
        }
        Some(u) => Some(map.up_of_down.iter().position(|&v| v == u).unwrap() + 1),
        None => None,
    };
    FrameStructure::new(6, differentials, u_index, fs7.grid())
}

/// Circle reduction of an invariant closed G2-structure along the frame
/// direction Y = e_y: H = |Y|^{-1}, xi = H^2 g(Y, .), omega = Y . phi,
/// Omega+ = H^{-3/2}(phi - xi ^ omega), Omega- = -H^{-1/2}(Y . *phi),
/// g_omega = H^{-1}(g - H^{-2} xi xi), plus the curvature split and
/// gamma^1_6.
pub fn reduce(g2: &G2Structure, fs7: &FrameStructure, y: usize) -> Result<ReductionData> {
    if fs7.n() != 7 || y == 0 || y > 7 {
        return Err(Error::Dimension("reduction needs a 7-frame direction".into()));
    }
    let phi = g2.phi();
    let invariance = fs7.lie_derivative_basis(y, phi)?.max_abs();
    if invariance > INVARIANCE_TOL {
        return Err(Error::NotInvariant(format!("L_Y phi has max norm {invariance:.3e}")));
    }
    let g = g2.metric();
    let yy = g.tensor().get(y, y).clone();
    if yy.min_value() <= 0.0 {
        return Err(Error::NotFree(format!("|Y|^2 reaches {:.3e}", yy.min_value())));
    }
    let h = yy.sqrt().recip();
    let h2 = h.mul(&h);
    let mut xi = Form::zero(7, 1);
    for i in 1..=7 {
        *xi.coeff_mut(&[i]) = h2.mul(g.tensor().get(y, i));
    }

    let map = QuotientMap::new(y);
    let fs6 = quotient_frame(fs7, &map)?;

    let omega_up = phi.contract_basis(y)?;
    let omega = map.push_down(&omega_up)?;
    let op_up = phi.sub(&xi.wedge(&omega_up)?)?.scale_coeff(&h.powf(-1.5));
    let omega_plus = map.push_down(&op_up)?;
    let star_phi = g2.star_phi()?;
    let om_up = star_phi.contract_basis(y)?.scale_coeff(&h.powf(-0.5)).neg();
    let omega_minus = map.push_down(&om_up)?;

    // quotient metric on horizontal pairs
    let mut sym = SymTensor::zero(6);
    let h_inv = h.recip();
    let hm2 = h2.recip();
    for a in 1..=6 {
        for b in a..=6 {
            let (ua, ub) = (map.up_of_down[a - 1], map.up_of_down[b - 1]);
            let corr = hm2.mul(xi.coeff(&[ua])).mul(xi.coeff(&[ub]));
            sym.set(a, b, h_inv.mul(&g.tensor().get(ua, ub).sub(&corr)));
        }
    }
    // orientation from vol_omega = H^{-2} (Y . vol_phi): contracting the
    // positively oriented 7-volume costs (-1)^{y-1} under the relabeling
    let orientation = if y % 2 == 1 { 1.0 } else { -1.0 };
    let metric6 = Metric::new(sym, orientation)?;
    let su3 = SU3Structure::from_parts(omega, omega_plus, omega_minus, metric6)?;

    // curvature split
    let dxi_up = fs7.d(&xi)?;
    let dxi_horizontal = dxi_up.contract_basis(y)?.max_abs();
    let dxi = map.push_down(&dxi_up)?;
    let (dxi_w, dxi6, dxi8) = decompose2_su3(&dxi, &su3)?;
    let om2 = su3.omega.wedge(&su3.omega)?;
    let dxi_omega2 = dxi.wedge(&om2)?.max_abs().max(dxi_w.max_abs());

    let (gamma16, gamma16_res) = gamma16_from_dxi(&dxi6, &su3, &h)?;

    let su3_res = su3.validate()?;
    let mut r = ReductionData {
        fs7: fs7.clone(),
        y,
        map,
        fs6,
        h,
        xi,
        dxi,
        dxi6,
        dxi8,
        gamma16,
        su3,
        residuals: ReductionResiduals {
            invariance,
            dxi_horizontal,
            reconstruction_phi: 0.0,
            reconstruction_star_phi: 0.0,
            reconstruction_metric: 0.0,
            dxi_omega2,
            gamma16: gamma16_res,
            su3: su3_res,
        },
        torsion: None,
    };
    r.residuals.reconstruction_phi = r.reconstruct_phi()?.distance(phi);
    r.residuals.reconstruction_star_phi = r.reconstruct_star_phi()?.distance(&star_phi);
    r.residuals.reconstruction_metric = metric_reconstruction_residual(&r, g);
    Ok(r)
}

fn metric_reconstruction_residual(r: &ReductionData, g7: &Metric) -> f64 {
    // g_phi = H^{-2} xi (x) xi + H g_omega
    let hm2 = r.h.mul(&r.h).recip();
    let mut max = 0.0f64;
    for i in 1..=7 {
        for j in i..=7 {
            let mut acc = hm2.mul(r.xi.coeff(&[i])).mul(r.xi.coeff(&[j]));
            let di = r.map.up_of_down.iter().position(|&u| u == i);
            let dj = r.map.up_of_down.iter().position(|&u| u == j);
            if let (Some(di), Some(dj)) = (di, dj) {
                acc = acc.add(&r.h.mul(r.su3.metric().tensor().get(di + 1, dj + 1)));
            }
            max = max.max(acc.sub(g7.tensor().get(i, j)).max_abs());
        }
    }
    max
}

/// Solves H^{-1/2} (dxi)_6 ^ omega = gamma ^ Omega+ for the unique 1-form
/// gamma in Lambda^1_6. Returns (gamma, residual of the defining relation).
pub fn gamma16_from_dxi(
    dxi6: &Form,
    su3: &SU3Structure,
    h: &Coefficient,
) -> Result<(Form, f64)> {
    use crate::exterior::jetlin::JetMat;
    let rhs_form = dxi6.wedge(&su3.omega)?.scale_coeff(&h.powf(-0.5));
    let basis: Vec<Form> = (1..=6)
        .map(|i| Form::basis(6, &[i]).wedge(&su3.omega_plus))
        .collect::<Result<_>>()?;
    let c4 = comb::binomial(6, 4);
    let mut entries = Vec::with_capacity(c4 * 6);
    for r in 0..c4 {
        for b in &basis {
            entries.push(b.coeff_by_rank(r).clone());
        }
    }
    let a = JetMat::from_coeffs(c4, 6, &entries)?;
    let mut rhs = Vec::with_capacity(c4);
    for r in 0..c4 {
        rhs.push(rhs_form.coeff_by_rank(r).clone());
    }
    let b = JetMat::from_coeffs(c4, 1, &rhs)?;
    let sol = a.lsq_solve(&b)?;
    let mut gamma = Form::zero(6, 1);
    for i in 1..=6 {
        *gamma.coeff_mut(&[i]) = sol.entry_coeff(i - 1, 0);
    }
    let residual = gamma.wedge(&su3.omega_plus)?.distance(&rhs_form);
    if residual > 1e-6 {
        return Err(Error::TorsionClasses(format!(
            "(dxi)_6 is not in Lambda^2_6: defining relation residual {residual:.3e}"
        )));
    }
    Ok((gamma, residual))
}

/// Fills in the quotient torsion forms:
/// tau_h = d*(H^{1/2} Omega+), tau_v = -2 H^{-2}(d^c H + J gamma^1_6),
/// tau_6 = -1/2 H^{3/2} *(tau_v ^ Omega+), tau_8 = tau_h - tau_6,
/// and cross-checks tau_h + xi ^ tau_v against the direct torsion solve.
pub fn quotient_torsion(r: &mut ReductionData) -> Result<&QuotientTorsion> {
    let (tau_h, tau_v, tau6, tau8) = quotient_torsion_forms(&r.su3, &r.fs6, &r.h, &r.gamma16)?;
    let su3 = &r.su3;
    let fs6 = &r.fs6;
    let g6 = su3.metric();

    // residual table
    let om2 = su3.omega.wedge(&su3.omega)?;
    let noomega = tau_h.wedge(&om2)?.max_abs();
    let relation1 = tau_v
        .wedge(&om2)?
        .scale_coeff(&r.h.powf(1.5).scale(0.5))
        .distance(&tau_h.wedge(&su3.omega_minus)?);
    let mut h_form = Form::zero(6, 0);
    *h_form.coeff_mut(&[]) = r.h.clone();
    let dh = fs6.d(&h_form)?;
    let relation2 = dh
        .scale_coeff(&r.h)
        .wedge(&om2)?
        .sub(&r.dxi6.wedge(&su3.omega_minus)?.scale_coeff(&r.h.powf(0.5)))?
        .distance(&tau6.wedge(&su3.omega_plus)?.scale_coeff(&r.h.powf(1.5)));
    let t68 = fs6
        .d(&tau6)?
        .wedge(&su3.omega)?
        .distance(&fs6.d(&tau8)?.wedge(&su3.omega)?);
    let coclosed = g6.codifferential(&tau_h, fs6)?.max_abs();

    // reassemble upstairs and compare with the direct solve
    let phi = r.reconstruct_phi()?;
    let g2 = metric_from_phi(&phi)?;
    let direct = torsion_tau(&g2, &r.fs7)?;
    let tau_up = r.map.lift(&tau_h).add(&r.xi.wedge(&r.map.lift(&tau_v))?)?;
    let tau_match = tau_up.distance(&direct.tau);
    if tau_match > 1e-6 {
        return Err(Error::Torsion(format!(
            "quotient torsion disagrees with the direct solve: {tau_match:.3e}"
        )));
    }

    r.torsion = Some(QuotientTorsion {
        tau_h,
        tau6,
        tau8,
        tau_v,
        tau_match,
        noomega,
        relation1,
        relation2,
        t68,
        coclosed,
    });
    Ok(r.torsion.as_ref().unwrap())
}

/// The defining formulas for (tau_h, tau_v, tau_6, tau_8) from quotient data.
pub fn quotient_torsion_forms(
    su3: &SU3Structure,
    fs6: &FrameStructure,
    h: &Coefficient,
    gamma16: &Form,
) -> Result<(Form, Form, Form, Form)> {
    let g6 = su3.metric();
    let h12_op = su3.omega_plus.scale_coeff(&h.powf(0.5));
    let tau_h = g6.codifferential(&h12_op, fs6)?;

    let mut h_form = Form::zero(6, 0);
    *h_form.coeff_mut(&[]) = h.clone();
    let dch = su3.d_c(&h_form, fs6)?;
    let jg = su3.j.apply_oneform(gamma16);
    let tau_v = dch.add(&jg)?.scale_coeff(&h.mul(h).recip()).scale(-2.0);

    let tau6 = su3
        .star(&tau_v.wedge(&su3.omega_plus)?)?
        .scale_coeff(&h.powf(1.5))
        .scale(-0.5);
    let tau8 = tau_h.sub(&tau6)?;
    Ok((tau_h, tau_v, tau6, tau8))
}

/// The Gibbons-Hawking style curvature prediction
/// dxi = -*( d*(H^{3/2} Omega-) ^ omega ).
pub fn gibbons_hawking_dxi(
    su3: &SU3Structure,
    h: &Coefficient,
    fs6: &FrameStructure,
) -> Result<Form> {
    let h32_om = su3.omega_minus.scale_coeff(&h.powf(1.5));
    let codiff = su3.metric().codifferential(&h32_om, fs6)?;
    Ok(su3.star(&codiff.wedge(&su3.omega)?)?.neg())
}

/// Residuals of the divergence identity
/// d(H^{3/2} tau_h ^ Omega+) = g(dxi, tau_h) vol, and of the equivalent form
/// d(tau_h) ^ H^{3/2} Omega+ = 2 g(dxi, tau_6) vol.
pub fn divergence_identity_residual(r: &ReductionData) -> Result<(Coefficient, Coefficient)> {
    let t = r.torsion()?;
    let su3 = &r.su3;
    let h32 = r.h.powf(1.5);
    let vol = su3.vol();
    let lhs1 = r.fs6.d(&t.tau_h.scale_coeff(&h32).wedge(&su3.omega_plus)?)?;
    let rhs1 = vol.scale_coeff(&su3.metric().inner(&r.dxi, &t.tau_h)?);
    let res1 = lhs1.sub(&rhs1)?.coeffs()[0].clone();
    let lhs2 = r.fs6.d(&t.tau_h)?.wedge(&su3.omega_plus.scale_coeff(&h32))?;
    let rhs2 = vol.scale_coeff(&su3.metric().inner(&r.dxi, &t.tau6)?.scale(2.0));
    let res2 = lhs2.sub(&rhs2)?.coeffs()[0].clone();
    Ok((res1, res2))
}

/// Residuals of the reduced soliton system for a horizontal vector field V
/// (components in the quotient frame):
///   -lambda omega = d(tau_v + V . omega)
///   lambda H^{3/2} Omega+ = d tau_h + dxi ^ (tau_v + V . omega)
///                           - d(H^{3/2} V . Omega+).
pub fn quotient_soliton_residual(
    r: &ReductionData,
    lambda: f64,
    v: &[Coefficient],
) -> Result<(Form, Form)> {
    let t = r.torsion()?;
    let su3 = &r.su3;
    let w = t.tau_v.add(&su3.omega.contract(v)?)?;
    let res1 = r.fs6.d(&w)?.add(&su3.omega.scale(lambda))?;
    let h32 = r.h.powf(1.5);
    let res2 = r
        .fs6
        .d(&t.tau_h)?
        .add(&r.dxi.wedge(&w)?)?
        .sub(&r.fs6.d(&su3.omega_plus.contract(v)?.scale_coeff(&h32))?)?
        .sub(&su3.omega_plus.scale_coeff(&h32).scale(lambda))?;
    Ok((res1, res2))
}
