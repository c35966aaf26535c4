//! Laplacian-flow integrators for the invariant ansatze, the reduced
//! quotient flow, and soliton residual checks.

pub mod as_ansatz;
pub mod bryant;
pub mod check;
pub mod quotient;
pub mod soliton;

pub use as_ansatz::{as_exact_selfsimilar, as_flow, cfl_dt_max, AsBoundary, AsFlowState, AsTrajectory};
pub use bryant::{bryant_flow, InvariantState, InvariantTrajectory};
pub use check::{evolution_identity_checks, IdentityResidual};
pub use quotient::{quotient_flow, QuotientBoundary, QuotientFlowState, QuotientTrajectory};
pub use soliton::{g2_soliton_residual, soliton_ode_residual, SolitonSpec};
