//! Computational kernel for S1-invariant closed G2-structures, their SU(3)
//! reductions, and the Laplacian flow on invariant ansatze.
//!
//! The crate is organized around five layers:
//!
//! - [`exterior`]: forms over a fixed coframe with constant or u-dependent
//!   coefficients; wedge, contraction, Hodge star, exterior derivative.
//! - [`structures`]: G2 and SU(3) structures, type decompositions, torsion.
//! - [`reduction`]: circle reduction of an invariant closed G2-structure and
//!   the Gibbons-Hawking style reconstruction.
//! - [`flows`]: Laplacian-flow integrators and soliton residual checks.
//! - [`cli`]: the `g2flow` command-line front end (`flow`, `check`, `reduce`).
//!
//! See the crate examples for runnable walkthroughs of each capability.

pub mod catalog;
pub mod checks;
pub mod cli;
pub mod error;
pub mod exterior;
pub mod flows;
pub mod reduction;
pub mod structures;

pub use error::{Error, Result};
