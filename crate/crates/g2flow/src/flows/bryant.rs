//! Laplacian flow for constant-coefficient invariant G2-structures
//! (the Bryant-Fernandez setting): explicit RK4 on the 35 coefficients of
//! phi with right side d tau.

use crate::error::{Error, Result};
use crate::exterior::{Form, FrameStructure};
use crate::structures::g2::{laplacian_closed, metric_from_phi, torsion_tau};

/// One recorded state of an invariant flow.
#[derive(Clone, Debug)]
pub struct InvariantState {
    pub t: f64,
    pub phi: Form,
    pub tau_norm_sq: f64,
    pub vol_coeff: f64,
}

#[derive(Clone, Debug)]
pub struct InvariantTrajectory {
    pub dt: f64,
    pub record_every: usize,
    pub states: Vec<InvariantState>,
}

impl InvariantTrajectory {
    pub fn last(&self) -> &InvariantState {
        self.states.last().expect("non-empty trajectory")
    }
}

fn rhs(phi: &Form, fs: &FrameStructure) -> Result<Form> {
    let g2 = metric_from_phi(phi)
        .map_err(|e| Error::Numeric(format!("positivity lost during flow: {e}")))?;
    laplacian_closed(&g2, fs)
}

fn record(t: f64, phi: &Form, fs: &FrameStructure) -> Result<InvariantState> {
    let g2 = metric_from_phi(phi)?;
    let tor = torsion_tau(&g2, fs)?;
    let tau_norm_sq = g2.metric().norm_sq(&tor.tau)?.eval(0);
    let vol_coeff = g2.vol().coeffs()[0].eval(0);
    Ok(InvariantState { t, phi: phi.clone(), tau_norm_sq, vol_coeff })
}

/// Integrates d phi/dt = d tau with fixed-step RK4. Closedness is preserved
/// exactly (the right side is exact); positivity is checked at every stage.
pub fn bryant_flow(
    phi0: &Form,
    fs: &FrameStructure,
    t0: f64,
    dt: f64,
    steps: usize,
    record_every: usize,
) -> Result<InvariantTrajectory> {
    if dt <= 0.0 {
        return Err(Error::Config("dt must be positive".into()));
    }
    if phi0.grid().is_some() {
        return Err(Error::Config("bryant_flow expects constant coefficients".into()));
    }
    let dphi = fs.d(phi0)?.max_abs();
    if dphi > 1e-10 {
        return Err(Error::Torsion(format!("initial form is not closed: |d phi| = {dphi:.3e}")));
    }
    let record_every = record_every.max(1);
    let mut states = vec![record(t0, phi0, fs)?];
    let mut phi = phi0.clone();
    for step in 1..=steps {
        let k1 = rhs(&phi, fs)?;
        let k2 = rhs(&phi.add(&k1.scale(dt / 2.0))?, fs)?;
        let k3 = rhs(&phi.add(&k2.scale(dt / 2.0))?, fs)?;
        let k4 = rhs(&phi.add(&k3.scale(dt))?, fs)?;
        let incr = k1
            .add(&k2.scale(2.0))?
            .add(&k3.scale(2.0))?
            .add(&k4)?
            .scale(dt / 6.0);
        phi = phi.add(&incr)?;
        if step % record_every == 0 || step == steps {
            states.push(record(t0 + step as f64 * dt, &phi, fs)?);
        }
    }
    Ok(InvariantTrajectory { dt, record_every, states })
}
