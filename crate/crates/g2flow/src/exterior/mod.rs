//! Exterior algebra over a fixed coframe: wedge, contraction, Hodge star,
//! Lie derivative, and the exterior derivative for invariant and
//! warped-invariant forms.

pub mod coeff;
pub mod comb;
pub mod form;
pub mod frame;
pub mod grid;
pub mod jetlin;
pub mod metric;

pub use coeff::Coefficient;
pub use form::Form;
pub use frame::{registry, FrameStructure};
pub use grid::Grid;
pub use metric::{Endo, Metric, SymTensor};
