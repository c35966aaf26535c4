//! Evolution-identity checks along a flow trajectory: central finite
//! differences in t of each left side against the stated right side on the
//! middle state. All identities are evaluated on three consecutive states.

use crate::error::Result;
use crate::exterior::{Form, FrameStructure, SymTensor};
use crate::reduction::{quotient_torsion, reduce, ReductionData};
use crate::structures::g2::{j_map, metric_from_phi, torsion_tau, G2Structure};
use crate::structures::su3::decompose3_su3;

#[derive(Clone, Debug)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub residual: f64,
}

struct Snapshot {
    g2: G2Structure,
    star_phi: Form,
    tau: Form,
    red: ReductionData,
}

fn snapshot(phi: &Form, fs: &FrameStructure, y: usize) -> Result<Snapshot> {
    let g2 = metric_from_phi(phi)?;
    let star_phi = g2.star_phi()?;
    let tau = torsion_tau(&g2, fs)?.tau;
    let mut red = reduce(&g2, fs, y)?;
    quotient_torsion(&mut red)?;
    Ok(Snapshot { g2, star_phi, tau, red })
}

fn fd_form(prev: &Form, next: &Form, dt: f64) -> Form {
    next.sub(prev).expect("degree").scale(1.0 / (2.0 * dt))
}

fn fd_sym(prev: &SymTensor, next: &SymTensor, dt: f64) -> SymTensor {
    next.sub(prev).scale(1.0 / (2.0 * dt))
}

/// Runs every identity on the middle state. `dt` is the record spacing of
/// the three states.
pub fn evolution_identity_checks(
    phi_prev: &Form,
    phi_mid: &Form,
    phi_next: &Form,
    dt: f64,
    fs: &FrameStructure,
    y: usize,
) -> Result<Vec<IdentityResidual>> {
    let p = snapshot(phi_prev, fs, y)?;
    let m = snapshot(phi_mid, fs, y)?;
    let n = snapshot(phi_next, fs, y)?;
    let mut out = Vec::new();
    let g = m.g2.metric();
    let tau_sq = g.norm_sq(&m.tau)?;
    let dtau = fs.d(&m.tau)?;

    // d/dt(*phi) = 1/3 |tau|^2 *phi - * d tau
    let lhs = fd_form(&p.star_phi, &n.star_phi, dt);
    let rhs = m
        .star_phi
        .scale_coeff(&tau_sq.scale(1.0 / 3.0))
        .sub(&m.g2.star(&dtau)?)?;
    out.push(IdentityResidual { name: "dual_evolution", residual: lhs.distance(&rhs) });

    // d/dt(vol) = 1/3 |tau|^2 vol
    let lhs = fd_form(p.g2.vol(), n.g2.vol(), dt);
    let rhs = m.g2.vol().scale_coeff(&tau_sq.scale(1.0 / 3.0));
    out.push(IdentityResidual { name: "volume_evolution", residual: lhs.distance(&rhs) });

    // d/dt(g) = -1/3 |tau|^2 g + 1/2 j(d tau)
    let lhs = fd_sym(p.g2.metric().tensor(), n.g2.metric().tensor(), dt);
    let rhs = g
        .tensor()
        .scale_coeff(&tau_sq.scale(-1.0 / 3.0))
        .add(&j_map(&dtau, &m.g2)?.scale(0.5));
    out.push(IdentityResidual { name: "metric_evolution", residual: lhs.distance(&rhs) });

    // d/dt(tau) ^ phi = -tau ^ d tau + 1/3 d(|tau|^2) ^ *phi
    //                   + 1/3 |tau|^2 tau ^ phi - d * d tau
    let lhs = fd_form(&p.tau, &n.tau, dt).wedge(phi_mid)?;
    let mut tau_sq_form = Form::zero(7, 0);
    *tau_sq_form.coeff_mut(&[]) = tau_sq.clone();
    let rhs = m
        .tau
        .wedge(&dtau)?
        .neg()
        .add(&fs.d(&tau_sq_form)?.wedge(&m.star_phi)?.scale(1.0 / 3.0))?
        .add(&m.tau.wedge(phi_mid)?.scale_coeff(&tau_sq.scale(1.0 / 3.0)))?
        .sub(&fs.d(&m.g2.star(&dtau)?)?)?;
    out.push(IdentityResidual { name: "tau_evolution", residual: lhs.distance(&rhs) });

    // quotient data on the middle state
    let su3 = &m.red.su3;
    let g6 = su3.metric();
    let fs6 = &m.red.fs6;
    let tor = m.red.torsion()?;
    let h = &m.red.h;
    let dtau_v = fs6.d(&tor.tau_v)?;
    let dtau_h = fs6.d(&tor.tau_h)?;
    let th_sq = g6.norm_sq(&tor.tau_h)?;
    let tv_sq = g6.norm_sq(&tor.tau_v)?;
    let gdtv = g6.inner(&dtau_v, &su3.omega)?;

    // d/dt(omega) = -d tau_v
    let lhs = fd_form(&p.red.su3.omega, &n.red.su3.omega, dt);
    out.push(IdentityResidual {
        name: "omega_evolution",
        residual: lhs.distance(&dtau_v.neg()),
    });

    // d/dt(log H) = 1/6 (H^{-2}|tau_h|^2 + H|tau_v|^2) + 1/2 g(d tau_v, omega)
    let lhs = n.red.h.ln().sub(&p.red.h.ln()).scale(1.0 / (2.0 * dt));
    let rhs = h
        .powi(-2)
        .mul(&th_sq)
        .add(&h.mul(&tv_sq))
        .scale(1.0 / 6.0)
        .add(&gdtv.scale(0.5));
    out.push(IdentityResidual { name: "higgs_evolution", residual: lhs.sub(&rhs).max_abs() });

    // d/dt(xi) = -*(J(d tau_v) ^ H^{3/2} Omega-), lifted
    let lhs = fd_form(&p.red.xi, &n.red.xi, dt);
    let rhs_down = su3
        .star(&su3.j.apply_twoform(&dtau_v).wedge(&su3.omega_minus.scale_coeff(&h.powf(1.5)))?)?
        .neg();
    out.push(IdentityResidual {
        name: "connection_evolution",
        residual: lhs.distance(&m.red.map.lift(&rhs_down)),
    });

    // d/dt(Omega+) = -(1/4 |tau|^2 + 3/4 g(d tau_v, omega)) Omega+
    //                + H^{-3/2}(d tau_h + dxi ^ tau_v)
    //                + *(J(d tau_v) ^ Omega-) ^ omega
    let lhs = fd_form(&p.red.su3.omega_plus, &n.red.su3.omega_plus, dt);
    let c = tau_sq.scale(0.25).add(&gdtv.scale(0.75));
    let rhs = su3
        .omega_plus
        .scale_coeff(&c)
        .neg()
        .add(
            &dtau_h
                .add(&m.red.dxi.wedge(&tor.tau_v)?)?
                .scale_coeff(&h.powf(-1.5)),
        )?
        .add(
            &su3.star(&su3.j.apply_twoform(&dtau_v).wedge(&su3.omega_minus)?)?
                .wedge(&su3.omega)?,
        )?;
    out.push(IdentityResidual { name: "omega_plus_evolution", residual: lhs.distance(&rhs) });

    // d/dt(Omega-) = 1/4 (H^{-2}|tau_h|^2 + H|tau_v|^2 - g(d tau_v, omega)) Omega-
    //                - H^{-3/2}(d* d(H^{1/2} Omega-) + *(dxi ^ tau_v))
    let lhs = fd_form(&p.red.su3.omega_minus, &n.red.su3.omega_minus, dt);
    let c = h
        .powi(-2)
        .mul(&th_sq)
        .add(&h.mul(&tv_sq))
        .sub(&gdtv)
        .scale(0.25);
    let h12_om = su3.omega_minus.scale_coeff(&h.powf(0.5));
    let rhs = su3
        .omega_minus
        .scale_coeff(&c)
        .sub(
            &g6.codifferential(&fs6.d(&h12_om)?, fs6)?
                .add(&su3.star(&m.red.dxi.wedge(&tor.tau_v)?)?)?
                .scale_coeff(&h.powf(-1.5)),
        )?;
    out.push(IdentityResidual { name: "omega_minus_evolution", residual: lhs.distance(&rhs) });

    // d/dt(vol_omega) = -1/2 d(tau_v ^ omega^2) = -g(d tau_v, omega) vol_omega
    let om2 = su3.omega.wedge(&su3.omega)?;
    let lhs = fd_form(&p.red.su3.vol(), &n.red.su3.vol(), dt);
    let rhs_a = fs6.d(&tor.tau_v.wedge(&om2)?)?.scale(-0.5);
    let rhs_b = su3.vol().scale_coeff(&gdtv).neg();
    let residual = lhs.distance(&rhs_a).max(lhs.distance(&rhs_b));
    out.push(IdentityResidual { name: "vol_omega_evolution", residual });

    // d/dt(g_omega) per the quotient metric evolution
    let lhs = fd_sym(p.red.su3.metric().tensor(), n.red.su3.metric().tensor(), dt);
    let x = m.red.dxi.wedge(&tor.tau_v)?.add(&dtau_h)?;
    let (cp, _, _, x12) = decompose3_su3(&x, su3)?;
    let scalar = tau_sq
        .scale(0.5)
        .add(&gdtv.scale(1.0 / 6.0))
        .sub(&h.powf(-1.5).mul(&cp).scale(2.0));
    let (_, _, dtv8) = crate::structures::su3::decompose2_su3(&dtau_v, su3)?;
    let arg = m
        .red
        .map
        .lift(&x12)
        .add(&m.red.xi.wedge(&m.red.map.lift(&dtv8))?)?;
    let jfull = j_map(&arg, &m.g2)?;
    let mut rhs = su3.metric().tensor().scale_coeff(&scalar).scale(-1.0);
    let hinv_half = h.recip().scale(0.5);
    for a in 1..=6 {
        for b in a..=6 {
            let (ua, ub) = (m.red.map.up_of_down[a - 1], m.red.map.up_of_down[b - 1]);
            let cur = rhs.get(a, b).add(&jfull.get(ua, ub).mul(&hinv_half));
            rhs.set(a, b, cur);
        }
    }
    out.push(IdentityResidual { name: "metric_omega_evolution", residual: lhs.distance(&rhs) });

    // form-evolution identities of the final lemma:
    // (1) alpha in L^2_6 + L^2_8 (alpha = dxi):
    //     d/dt(alpha) ^ omega^2 = 2 g(d tau_v, alpha_6 - alpha_8) vol
    let lhs = fd_form(&p.red.dxi, &n.red.dxi, dt).wedge(&om2)?;
    let diff = m.red.dxi6.sub(&m.red.dxi8)?;
    let rhs = su3.vol().scale_coeff(&g6.inner(&dtau_v, &diff)?.scale(2.0));
    out.push(IdentityResidual { name: "form_evolution_26_28", residual: lhs.distance(&rhs) });

    // (2) alpha in <omega> + L^2_8 (alpha = tau_8):
    //     d/dt(alpha) ^ Omega- = H^{-3/2} alpha ^ *(d tau_h + dxi ^ tau_v)
    let lhs = fd_form(&p.red.torsion()?.tau8, &n.red.torsion()?.tau8, dt)
        .wedge(&su3.omega_minus)?;
    let rhs = tor
        .tau8
        .wedge(&su3.star(&dtau_h.add(&m.red.dxi.wedge(&tor.tau_v)?)?)?)?
        .scale_coeff(&h.powf(-1.5));
    out.push(IdentityResidual { name: "form_evolution_omega_28", residual: lhs.distance(&rhs) });

    // (3) alpha in <Om+> + <Om-> + L^3_12 (alpha = Omega+):
    //     d/dt(alpha) ^ omega = alpha ^ d tau_v
    let lhs = fd_form(&p.red.su3.omega_plus, &n.red.su3.omega_plus, dt).wedge(&su3.omega)?;
    let rhs = su3.omega_plus.wedge(&dtau_v)?;
    out.push(IdentityResidual { name: "form_evolution_3forms_omega", residual: lhs.distance(&rhs) });

    // (4) alpha in <Om-> + L^3_6 + L^3_12 (alpha = Omega-):
    //     d/dt(alpha) ^ Omega- = H^{-3/2} alpha ^ *(d tau_h + dxi ^ tau_v)
    // (differentiating alpha ^ Omega- = 0 against the Omega- evolution
    //  produces the Hodge star on the right side)
    let lhs = fd_form(&p.red.su3.omega_minus, &n.red.su3.omega_minus, dt)
        .wedge(&su3.omega_minus)?;
    let rhs = su3
        .omega_minus
        .wedge(&su3.star(&dtau_h.add(&m.red.dxi.wedge(&tor.tau_v)?)?)?)?
        .scale_coeff(&h.powf(-1.5));
    out.push(IdentityResidual { name: "form_evolution_3forms_minus", residual: lhs.distance(&rhs) });

    Ok(out)
}
