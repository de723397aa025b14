//! Grid fields, maximal operators and the empirical inequality checks.
//!
//! Balls are replaced by centered cubes and the supremum over radii by a
//! finite window lattice; both only change dimensional constants.

mod field;
mod ops;
mod random;
mod sat;
mod verify;

pub use field::{GridField, MIN_EXTENT};
pub use ops::{hl_maximal, poincare_ratio, sharp_maximal, WindowLattice};
pub use random::{random_field, SummandKind, TestFunctionSpec};
pub use sat::SummedArea;
pub use verify::{
    morrey_window_sup, verify_fs_equivalence, verify_holder_chain, verify_lemma1, verify_sobolev, FsRatios,
    HolderReport, Lemma1Report,
};

use crate::error::Result;

/// `(Σ |u|^s h^d)^{1/s}`.
pub fn lp_norm(field: &GridField, s: f64) -> Result<f64> {
    field.lp_norm(s)
}

pub fn gradient(field: &GridField) -> Vec<GridField> {
    field.gradient()
}
