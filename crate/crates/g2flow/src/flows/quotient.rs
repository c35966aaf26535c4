//! The reduced Laplacian flow on the quotient data (omega, H^{1/2} Omega-,
//! log H, xi):
//!
//!   d/dt omega          = -d tau_v
//!   d/dt (H^{1/2} Om-)  = 1/3 (H^{-3/2}|tau_h|^2 + H^{3/2}|tau_v|^2) Om-
//!                         - H^{-1} *(d tau_h + dxi ^ tau_v)
//!   d/dt log H          = 1/6 (H^{-2}|tau_h|^2 + H |tau_v|^2)
//!                         + 1/2 g(d tau_v, omega)
//!   d/dt xi             = -*(J(d tau_v) ^ H^{3/2} Om-)
//!
//! with tau_h = d*(H^{1/2} Om+) and tau_v = -2 H^{-2}(d^c H + J gamma^1_6).

use crate::error::{Error, Result};
use crate::exterior::{Coefficient, Form, FrameStructure};
use crate::reduction::{gamma16_from_dxi, quotient_torsion_forms, QuotientMap, ReductionData};
use crate::structures::su3::{decompose2_su3, SU3Structure};

#[derive(Clone, Debug)]
pub struct QuotientFlowState {
    pub t: f64,
    pub omega: Form,
    /// H^{1/2} Omega-
    pub theta: Form,
    pub log_h: Coefficient,
    /// connection 1-form on the 7-frame
    pub xi: Form,
}

#[derive(Clone, Debug)]
pub struct QuotientFlowContext {
    pub fs7: FrameStructure,
    pub fs6: FrameStructure,
    pub map: QuotientMap,
}

#[derive(Clone, Debug)]
pub struct QuotientTrajectory {
    pub dt: f64,
    pub record_every: usize,
    pub states: Vec<QuotientFlowState>,
}

impl QuotientTrajectory {
    pub fn last(&self) -> &QuotientFlowState {
        self.states.last().expect("non-empty trajectory")
    }
}

impl QuotientFlowState {
    pub fn from_reduction(r: &ReductionData) -> (QuotientFlowContext, QuotientFlowState) {
        let ctx = QuotientFlowContext { fs7: r.fs7.clone(), fs6: r.fs6.clone(), map: r.map };
        let state = QuotientFlowState {
            t: 0.0,
            omega: r.su3.omega.clone(),
            theta: r.su3.omega_minus.scale_coeff(&r.h.powf(0.5)),
            log_h: r.h.ln(),
            xi: r.xi.clone(),
        };
        (ctx, state)
    }

    pub fn h(&self) -> Coefficient {
        self.log_h.exp()
    }

    /// Rebuilds the SU(3)-structure from (omega, theta, log H).
    pub fn su3(&self) -> Result<SU3Structure> {
        let om_minus = self.theta.scale_coeff(&self.h().powf(-0.5));
        SU3Structure::from_omega_and_minus(&self.omega, &om_minus)
    }

    /// phi = xi ^ omega + H^{3/2} Omega+ on the 7-frame.
    pub fn reconstruct_phi(&self, ctx: &QuotientFlowContext) -> Result<Form> {
        let su3 = self.su3()?;
        let h32 = self.h().powf(1.5);
        self.xi
            .wedge(&ctx.map.lift(&self.omega))?
            .add(&ctx.map.lift(&su3.omega_plus).scale_coeff(&h32))
    }

    fn linear_combo(&self, deltas: &[(&StateDelta, f64)], dt_t: f64) -> QuotientFlowState {
        let mut omega = self.omega.clone();
        let mut theta = self.theta.clone();
        let mut log_h = self.log_h.clone();
        let mut xi = self.xi.clone();
        for (d, w) in deltas {
            omega = omega.add(&d.omega.scale(*w)).expect("degree");
            theta = theta.add(&d.theta.scale(*w)).expect("degree");
            log_h = log_h.add(&d.log_h.scale(*w));
            xi = xi.add(&d.xi.scale(*w)).expect("degree");
        }
        QuotientFlowState { t: self.t + dt_t, omega, theta, log_h, xi }
    }
}

#[derive(Clone, Debug)]
struct StateDelta {
    omega: Form,
    theta: Form,
    log_h: Coefficient,
    xi: Form,
}

/// Boundary handling for warped quotient flows.
#[derive(Clone, Copy, Debug)]
pub enum QuotientBoundary {
    /// No pinning (constant-coefficient states, e.g. the Bryant reduction).
    None,
    /// Dirichlet rows from the exact self-similar soliton evolution.
    SelfSimilar { k: u32 },
}

/// Exact boundary data for the self-similar family: every coefficient of the
/// initial reduced state is a pure exponential in u, so its value at time t
/// is value0 * s^p * exp(rho c(t)) with rho the logarithmic u-derivative,
/// s = 1 + 2 lambda t / 3 and c(t) = -(5/2k) log s; log H evolves additively.
struct SelfSimilarPin {
    k: f64,
    /// (rank, row, value0, rho) per pinned coefficient sample
    omega: Vec<(usize, usize, f64, f64)>,
    theta: Vec<(usize, usize, f64, f64)>,
    log_h: Vec<(usize, f64, f64)>,
}

fn exp_pin_data(form: &Form, rows: &[usize]) -> Vec<(usize, usize, f64, f64)> {
    let mut out = Vec::new();
    for (r, c) in form.coeffs().iter().enumerate() {
        if c.is_const_zero() {
            continue;
        }
        let dc = c.derivative();
        for &row in rows {
            let v = c.eval(row);
            let rho = if v.abs() > 0.0 { dc.eval(row) / v } else { 0.0 };
            out.push((r, row, v, rho));
        }
    }
    out
}

impl SelfSimilarPin {
    fn build(state: &QuotientFlowState, k: u32, rows: Vec<usize>) -> SelfSimilarPin {
        let log_h = rows
            .iter()
            .map(|&row| (row, state.log_h.eval(row), state.log_h.derivative().eval(row)))
            .collect();
        SelfSimilarPin {
            k: k as f64,
            omega: exp_pin_data(&state.omega, &rows),
            theta: exp_pin_data(&state.theta, &rows),
            log_h,
        }
    }

    fn impose(&self, state: &mut QuotientFlowState, grid: crate::exterior::Grid, t: f64) {
        let s = 1.0 - 3.0 * self.k * self.k * t;
        let c = -2.5 / self.k * s.ln();
        for &(rank, row, v0, rho) in &self.omega {
            let v = v0 * s.powf(1.5) * (rho * c).exp();
            let mut cur = state.omega.coeff_by_rank(rank).clone();
            cur.set_sample(grid, row, v);
            state.omega.set_by_rank(rank, cur);
        }
        for &(rank, row, v0, rho) in &self.theta {
            let v = v0 * s.powf(2.0) * (rho * c).exp();
            let mut cur = state.theta.coeff_by_rank(rank).clone();
            cur.set_sample(grid, row, v);
            state.theta.set_by_rank(rank, cur);
        }
        for &(row, v0, slope) in &self.log_h {
            state.log_h.set_sample(grid, row, v0 + slope * c - 0.5 * s.ln());
        }
    }
}

fn rhs(state: &QuotientFlowState, ctx: &QuotientFlowContext) -> Result<StateDelta> {
    let h = state.h();
    if h.min_value() <= 0.0 {
        return Err(Error::Numeric("H reached zero during the quotient flow".into()));
    }
    let su3 = state.su3()?;
    let fs6 = &ctx.fs6;
    let g6 = su3.metric();

    let dxi_up = ctx.fs7.d(&state.xi)?;
    let dxi = ctx.map.push_down(&dxi_up)?;
    let (_, dxi6, _) = decompose2_su3(&dxi, &su3)?;
    let (gamma16, _) = gamma16_from_dxi(&dxi6, &su3, &h)?;
    let (tau_h, tau_v, _tau6, _tau8) = quotient_torsion_forms(&su3, fs6, &h, &gamma16)?;

    let dtau_v = fs6.d(&tau_v)?;
    let dtau_h = fs6.d(&tau_h)?;
    let th_sq = g6.norm_sq(&tau_h)?;
    let tv_sq = g6.norm_sq(&tau_v)?;

    let omega_dot = dtau_v.neg();

    let om_minus = state.theta.scale_coeff(&h.powf(-0.5));
    let coeff = h
        .powf(-1.5)
        .mul(&th_sq)
        .add(&h.powf(1.5).mul(&tv_sq))
        .scale(1.0 / 3.0);
    let theta_dot = om_minus
        .scale_coeff(&coeff)
        .sub(&su3.star(&dtau_h.add(&dxi.wedge(&tau_v)?)?)?.scale_coeff(&h.recip()))?;

    let log_h_dot = h
        .powi(-2)
        .mul(&th_sq)
        .add(&h.mul(&tv_sq))
        .scale(1.0 / 6.0)
        .add(&g6.inner(&dtau_v, &su3.omega)?.scale(0.5));

    let jd = su3.j.apply_twoform(&dtau_v);
    let xi_dot_down = su3
        .star(&jd.wedge(&om_minus.scale_coeff(&h.powf(1.5)))?)?
        .neg();
    let xi_dot = ctx.map.lift(&xi_dot_down);

    Ok(StateDelta { omega: omega_dot, theta: theta_dot, log_h: log_h_dot, xi: xi_dot })
}

/// Fixed-step RK4 on the quotient state.
pub fn quotient_flow(
    r: &ReductionData,
    dt: f64,
    steps: usize,
    record_every: usize,
    boundary: QuotientBoundary,
) -> Result<QuotientTrajectory> {
    if dt <= 0.0 {
        return Err(Error::Config("dt must be positive".into()));
    }
    let (ctx, state0) = QuotientFlowState::from_reduction(r);
    let pin = match boundary {
        QuotientBoundary::None => None,
        QuotientBoundary::SelfSimilar { k } => {
            let grid = ctx
                .fs6
                .grid()
                .ok_or_else(|| Error::Config("self-similar pinning needs a grid".into()))?;
            let n = grid.count;
            let rows = vec![0, 1, 2, n - 3, n - 2, n - 1];
            Some((grid, SelfSimilarPin::build(&state0, k, rows)))
        }
    };
    let impose = |st: &mut QuotientFlowState, t: f64| {
        if let Some((grid, p)) = &pin {
            p.impose(st, *grid, t);
        }
    };
    let record_every = record_every.max(1);
    let mut traj =
        QuotientTrajectory { dt, record_every, states: vec![state0.clone()] };
    let mut st = state0;
    for step in 1..=steps {
        let t = st.t;
        let k1 = rhs(&st, &ctx)?;
        let mut s2 = st.linear_combo(&[(&k1, dt / 2.0)], dt / 2.0);
        impose(&mut s2, t + dt / 2.0);
        let k2 = rhs(&s2, &ctx)?;
        let mut s3 = st.linear_combo(&[(&k2, dt / 2.0)], dt / 2.0);
        impose(&mut s3, t + dt / 2.0);
        let k3 = rhs(&s3, &ctx)?;
        let mut s4 = st.linear_combo(&[(&k3, dt)], dt);
        impose(&mut s4, t + dt);
        let k4 = rhs(&s4, &ctx)?;
        st = st.linear_combo(
            &[
                (&k1, dt / 6.0),
                (&k2, dt / 3.0),
                (&k3, dt / 3.0),
                (&k4, dt / 6.0),
            ],
            dt,
        );
        let t_new = st.t;
        impose(&mut st, t_new);
        if step % record_every == 0 || step == steps {
            traj.states.push(st.clone());
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::exterior::Grid;
    use crate::flows::bryant::bryant_flow;
    use crate::reduction::reduce;
    use crate::structures::g2::metric_from_phi;
    use crate::structures::su3::su3_torsion_classes;

    #[test]
    fn bryant_quotient_flow_matches_exact_higgs_field() {
        let g2 = metric_from_phi(&catalog::bryant_phi(0.0)).unwrap();
        let r = reduce(&g2, &catalog::bryant_frame(), 6).unwrap();
        let dt = 1e-3;
        let steps = 300;
        let traj = quotient_flow(&r, dt, steps, 50, QuotientBoundary::None).unwrap();
        for st in &traj.states {
            let expect = (10.0 * st.t / 3.0 + 1.0).powf(0.1);
            let got = st.h().eval(0);
            assert!(
                (got - expect).abs() < 1e-6,
                "t={}: H={got}, expect {expect}",
                st.t
            );
            // omega stays constant
            assert!(st.omega.distance(&r.su3.omega) < 1e-10, "omega moved");
            // xi stays e^6
            assert!(st.xi.distance(&r.xi) < 1e-10, "xi moved");
        }
    }

    #[test]
    fn bryant_quotient_flow_reconstructs_the_direct_flow() {
        let g2 = metric_from_phi(&catalog::bryant_phi(0.0)).unwrap();
        let fs = catalog::bryant_frame();
        let r = reduce(&g2, &fs, 6).unwrap();
        let dt = 1e-3;
        let steps = 100;
        let qtraj = quotient_flow(&r, dt, steps, steps, QuotientBoundary::None).unwrap();
        let (ctx, _) = QuotientFlowState::from_reduction(&r);
        let phi_q = qtraj.last().reconstruct_phi(&ctx).unwrap();
        let dtraj = bryant_flow(&catalog::bryant_phi(0.0), &fs, 0.0, dt, steps, steps).unwrap();
        let err = phi_q.distance(&dtraj.last().phi);
        assert!(err < 1e-8, "phi reconstruction error {err:.3e}");
    }

    #[test]
    fn as_quotient_flow_preserves_kahler_reduction() {
        let grid = Grid::new(-0.2, 0.2, 101).unwrap();
        let p = catalog::as_soliton(2, grid, catalog::JET_DEPTH);
        let g2 = metric_from_phi(&p.phi()).unwrap();
        let r = reduce(&g2, &p.frame(), 6).unwrap();
        let dt = 1e-5;
        let steps = 30;
        let traj = quotient_flow(&r, dt, steps, steps, QuotientBoundary::SelfSimilar { k: 2 }).unwrap();
        let last = traj.last();
        let su3 = last.su3().unwrap();
        // the flow keeps d omega = 0 and d(H^{3/2} Omega+) = -dxi ^ omega
        assert!(r.fs6.d(&last.omega).unwrap().max_abs() < 1e-8, "omega stays symplectic");
        let h32 = last.h().powf(1.5);
        let lhs = r.fs6.d(&su3.omega_plus.scale_coeff(&h32)).unwrap();
        let dxi = r
            .map
            .push_down(&r.fs7.d(&last.xi).unwrap())
            .unwrap();
        let rhs = dxi.wedge(&last.omega).unwrap().neg();
        assert!(lhs.distance(&rhs) < 5e-6, "closure identity {}", lhs.distance(&rhs));
        // torsion classes other than pi1 stay at zero (Kahler preservation)
        let tc = su3_torsion_classes(&su3, &r.fs6).unwrap();
        assert!(
            tc.max_excluding_pi1() < 1e-8,
            "Kahler violated: {:.3e}",
            tc.max_excluding_pi1()
        );
        // H actually evolved
        assert!((last.h().eval(50) - r.h.eval(50)).abs() > 1e-7);
    }
}
