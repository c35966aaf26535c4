//! Laplacian flow on the warped ansatz: method of lines for the profile
//! system in the variables (A, B, C) = (f^2 h, g f^2, g^2 h),
//!
//!   dA/dt = -d/du( (1/C) d/du(B g) ),
//!   dB/dt = 4 g^4 / B - (2 g^2 / h)(B'/B - g'/g),
//!   dC/dt = d/du( dB/dt ),
//!
//! with g = (C B / A)^{1/3}, f^2 = B/g, h = A g / B and C slaved to dB/du in
//! every right-side evaluation. The third equation is integrated alongside as
//! a consistency companion; the closure-constraint drift max|C - dB/du| is
//! monitored and reported.

use crate::catalog;
use crate::error::{Error, Result};
use crate::exterior::grid::derivative4;
use crate::exterior::{Coefficient, Form, Grid};

/// Profile samples at one flow time.
#[derive(Clone, Debug)]
pub struct AsFlowState {
    pub t: f64,
    pub grid: Grid,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl AsFlowState {
    pub fn from_profiles(p: &catalog::AsProfiles, t: f64) -> Self {
        let (a, b, c) = p.abc();
        let n = p.grid.count;
        AsFlowState {
            t,
            grid: p.grid,
            a: (0..n).map(|s| a.eval(s)).collect(),
            b: (0..n).map(|s| b.eval(s)).collect(),
            c: (0..n).map(|s| c.eval(s)).collect(),
        }
    }

    /// The ansatz 3-form with sampled (depth-0) coefficients.
    pub fn phi(&self) -> Form {
        let a = Coefficient::field(self.grid, self.a.clone());
        let b = Coefficient::field(self.grid, self.b.clone());
        let c = Coefficient::field(self.grid, self.c.clone());
        catalog::as_phi_from_abc(&a, &b, &c)
    }

    /// Max-norm of C - dB/du.
    pub fn constraint_drift(&self) -> f64 {
        let bp = derivative4(&self.b, self.grid.spacing());
        self.c
            .iter()
            .zip(&bp)
            .map(|(c, bp)| (c - bp).abs())
            .fold(0.0, f64::max)
    }
}

/// Dirichlet boundary sources for (A, B, C).
#[derive(Clone, Copy, Debug)]
pub enum AsBoundary {
    /// Boundary values frozen at their initial values.
    Fixed,
    /// Boundary values from the exact self-similar soliton solution.
    SelfSimilar { k: u32 },
}

/// The exact self-similar solution through the k-soliton:
/// s = 1 + (2/3) lambda t, and (A, B, C) = s^{3/2} (A0, B0, C0)(u + c) where
/// the pullback shift c = -(5/2k) log s comes from the reparametrized soliton
/// field U(t) = s^{-1} V (the power -1 makes phi_t solve the flow equation;
/// it is re-verified against the direct PDE integration in the tests).
pub fn as_exact_selfsimilar(k: u32, t: f64, u: f64) -> (f64, f64, f64) {
    let kf = k as f64;
    let s = 1.0 - 3.0 * kf * kf * t;
    assert!(s > 0.0, "self-similar solution collapsed");
    let shift = -2.5 / kf * s.ln();
    let w = u + shift;
    let scale = s.powf(1.5);
    (
        scale * kf.powf(-0.5) * (kf * w / 2.0).exp(),
        scale * (kf * w).exp(),
        scale * kf * (kf * w).exp(),
    )
}

#[derive(Clone, Debug)]
pub struct AsRecord {
    pub t: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// closure-constraint drift max |C - dB/du|
    pub drift: f64,
    /// |tau|^2 at the middle grid point (closed-family formula)
    pub tau_norm_sq_mid: f64,
    /// volume density A B g at the middle grid point
    pub vol_coeff_mid: f64,
}

#[derive(Clone, Debug)]
pub struct AsTrajectory {
    pub grid: Grid,
    pub dt: f64,
    pub record_every: usize,
    pub states: Vec<AsRecord>,
    pub max_drift: f64,
}

impl AsTrajectory {
    pub fn last(&self) -> &AsRecord {
        self.states.last().expect("non-empty trajectory")
    }
}

struct Rhs {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

fn profile_rhs(a: &[f64], b: &[f64], h: f64) -> Result<Rhs> {
    let n = a.len();
    let bp = derivative4(b, h); // slaved C
    for i in 0..n {
        if a[i] <= 0.0 || b[i] <= 0.0 || bp[i] <= 0.0 {
            return Err(Error::Numeric(format!(
                "positivity lost at sample {i}: A={:.3e} B={:.3e} dB/du={:.3e}",
                a[i], b[i], bp[i]
            )));
        }
    }
    let g: Vec<f64> = (0..n).map(|i| (bp[i] * b[i] / a[i]).cbrt()).collect();
    let ap = derivative4(a, h);
    let cp = derivative4(&bp, h);
    let bg: Vec<f64> = (0..n).map(|i| b[i] * g[i]).collect();
    let dbg = derivative4(&bg, h);
    let flux: Vec<f64> = (0..n).map(|i| dbg[i] / bp[i]).collect();
    let dflux = derivative4(&flux, h);
    let mut rb = vec![0.0; n];
    for i in 0..n {
        // g'/g = (C'/C + B'/B - A'/A)/3, h = A g / B
        let glog = (cp[i] / bp[i] + bp[i] / b[i] - ap[i] / a[i]) / 3.0;
        let hh = a[i] * g[i] / b[i];
        let g2 = g[i] * g[i];
        rb[i] = 4.0 * g2 * g2 / b[i] - (2.0 * g2 / hh) * (bp[i] / b[i] - glog);
    }
    let rc = derivative4(&rb, h);
    let ra: Vec<f64> = dflux.iter().map(|d| -d).collect();
    Ok(Rhs { a: ra, b: rb, c: rc })
}

/// Stability bound for the explicit integrator: the dominant diffusion
/// coefficient is D = 2 g B / (3 A C); with the composed 4th-order stencils
/// the RK4 real-axis limit gives dt <= 1.48 du^2 / D.
pub fn cfl_dt_max(state: &AsFlowState) -> f64 {
    let h = state.grid.spacing();
    let bp = derivative4(&state.b, h);
    let mut dmax = 0.0f64;
    for i in 0..state.grid.count {
        if bp[i] <= 0.0 {
            continue;
        }
        let g = (bp[i] * state.b[i] / state.a[i]).cbrt();
        dmax = dmax.max(2.0 * g * state.b[i] / (3.0 * state.a[i] * bp[i]));
    }
    1.48 * h * h / dmax.max(1e-300)
}

fn boundary_values(
    boundary: &AsBoundary,
    init: &AsFlowState,
    grid: Grid,
    t: f64,
    side: usize, // 0 = left, 1 = right
) -> (f64, f64, f64) {
    let idx = if side == 0 { 0 } else { grid.count - 1 };
    match boundary {
        AsBoundary::Fixed => (init.a[idx], init.b[idx], init.c[idx]),
        AsBoundary::SelfSimilar { k } => as_exact_selfsimilar(*k, t, grid.point(idx)),
    }
}

/// Runs the profile flow with fixed-step RK4 and Dirichlet boundaries.
/// Aborts on positivity loss; enforces the CFL bound before starting.
pub fn as_flow(
    state0: &AsFlowState,
    dt: f64,
    steps: usize,
    boundary: AsBoundary,
    record_every: usize,
) -> Result<AsTrajectory> {
    if dt <= 0.0 {
        return Err(Error::Config("dt must be positive".into()));
    }
    let drift0 = state0.constraint_drift();
    if drift0 > 1e-4 {
        return Err(Error::Config(format!(
            "initial data violates the closure constraint: |C - dB/du| = {drift0:.3e}"
        )));
    }
    let dt_max = cfl_dt_max(state0);
    if dt > dt_max {
        return Err(Error::Numeric(format!(
            "dt = {dt:.3e} exceeds the CFL estimate {dt_max:.3e}"
        )));
    }
    let record_every = record_every.max(1);
    let grid = state0.grid;
    let h = grid.spacing();
    let n = grid.count;
    let mut st = state0.clone();
    let mut traj = AsTrajectory {
        grid,
        dt,
        record_every,
        states: vec![record_state(&st)],
        max_drift: drift0,
    };

    // time derivative of the boundary data, by central differences in t
    let bdry_rate = |t: f64, side: usize| -> (f64, f64, f64) {
        match boundary {
            AsBoundary::Fixed => (0.0, 0.0, 0.0),
            AsBoundary::SelfSimilar { .. } => {
                let eps = (dt * 1e-2).max(1e-12);
                let p = boundary_values(&boundary, state0, grid, t + eps, side);
                let m = boundary_values(&boundary, state0, grid, t - eps, side);
                ((p.0 - m.0) / (2.0 * eps), (p.1 - m.1) / (2.0 * eps), (p.2 - m.2) / (2.0 * eps))
            }
        }
    };

    let impose = |a: &mut [f64], b: &mut [f64], c: &mut [f64], t: f64| {
        for side in 0..2 {
            let idx = if side == 0 { 0 } else { n - 1 };
            let (va, vb, vc) = boundary_values(&boundary, state0, grid, t, side);
            a[idx] = va;
            b[idx] = vb;
            c[idx] = vc;
        }
    };

    let stage = |base: &AsFlowState, k: Option<(&Rhs, f64)>, t_stage: f64| -> Result<Rhs> {
        let mut a = base.a.clone();
        let mut b = base.b.clone();
        let mut c = base.c.clone();
        if let Some((k, w)) = k {
            for i in 0..n {
                a[i] += w * k.a[i];
                b[i] += w * k.b[i];
                c[i] += w * k.c[i];
            }
        }
        impose(&mut a, &mut b, &mut c, t_stage);
        let mut r = profile_rhs(&a, &b, h)?;
        for side in 0..2 {
            let idx = if side == 0 { 0 } else { n - 1 };
            let (ra, rb, rc) = bdry_rate(t_stage, side);
            r.a[idx] = ra;
            r.b[idx] = rb;
            r.c[idx] = rc;
        }
        Ok(r)
    };

    for step in 1..=steps {
        let t = st.t;
        let k1 = stage(&st, None, t)?;
        let k2 = stage(&st, Some((&k1, dt / 2.0)), t + dt / 2.0)?;
        let k3 = stage(&st, Some((&k2, dt / 2.0)), t + dt / 2.0)?;
        let k4 = stage(&st, Some((&k3, dt)), t + dt)?;
        for i in 0..n {
            st.a[i] += dt / 6.0 * (k1.a[i] + 2.0 * k2.a[i] + 2.0 * k3.a[i] + k4.a[i]);
            st.b[i] += dt / 6.0 * (k1.b[i] + 2.0 * k2.b[i] + 2.0 * k3.b[i] + k4.b[i]);
            st.c[i] += dt / 6.0 * (k1.c[i] + 2.0 * k2.c[i] + 2.0 * k3.c[i] + k4.c[i]);
        }
        st.t = state0.t + step as f64 * dt;
        impose(&mut st.a, &mut st.b, &mut st.c, st.t);
        if step % record_every == 0 || step == steps {
            let rec = record_state(&st);
            traj.max_drift = traj.max_drift.max(rec.drift);
            traj.states.push(rec);
        }
    }
    Ok(traj)
}

fn record_state(st: &AsFlowState) -> AsRecord {
    let h = st.grid.spacing();
    let n = st.grid.count;
    let mid = n / 2;
    let bp = derivative4(&st.b, h);
    let drift = st
        .c
        .iter()
        .zip(&bp)
        .map(|(c, bp)| (c - bp).abs())
        .fold(0.0, f64::max);
    // |tau|^2 = 2 c1^2 g^2 / B^2 + c2^2 / g^4 with c1 = d(Bg)/du / C and
    // c2 the (LF2) right side; vol density = A B g
    let (tau_norm_sq_mid, vol_coeff_mid) = match profile_rhs(&st.a, &st.b, h) {
        Ok(r) => {
            let g = (bp[mid] * st.b[mid] / st.a[mid]).cbrt();
            let bg: Vec<f64> = (0..n).map(|i| {
                let gi = (bp[i] * st.b[i] / st.a[i]).cbrt();
                st.b[i] * gi
            }).collect();
            let dbg = derivative4(&bg, h);
            let c1 = dbg[mid] / bp[mid];
            let c2 = r.b[mid];
            let t2 = 2.0 * c1 * c1 * g * g / (st.b[mid] * st.b[mid]) + c2 * c2 / g.powi(4);
            (t2, st.a[mid] * st.b[mid] * g)
        }
        Err(_) => (f64::NAN, f64::NAN),
    };
    AsRecord {
        t: st.t,
        a: st.a.clone(),
        b: st.b.clone(),
        c: st.c.clone(),
        drift,
        tau_norm_sq_mid,
        vol_coeff_mid,
    }
}
