//! G2 and SU(3) structure extraction: metrics, volumes, torsion, type
//! decompositions, the j map and Hitchin's complex structure.

pub mod g2;
pub mod su3;

pub use g2::{
    decompose2_g2, decompose3_g2, j_map, laplacian_closed, metric_from_phi, torsion_tau,
    G2Structure, TorsionResult,
};
pub use su3::{
    decompose2_su3, decompose3_su3, hitchin_j, su3_torsion_classes, SU3Structure, TorsionClasses,
};
