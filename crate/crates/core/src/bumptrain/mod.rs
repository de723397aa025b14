//! One-dimensional building blocks of the counterexample: the cutoff
//! profiles, the dyadic offset schedule, the bump train `σ_n` and its norms.

mod morrey;
mod profile;
mod schedule;
mod train;

pub use morrey::{
    dense_morrey_sup, sigma_morrey_sup, weighted_morrey_sup, WindowArgmax, WindowMass, DENSE_MAX_N,
};
pub use profile::{unit_sphere_area, Profile1D, ProfileKind, RadialProfile};
pub use schedule::{
    make_schedule, minimal_k0, total_count, verify_layout, Block, LayoutReport, OffsetSchedule,
};
pub use train::{BumpRef, SigmaTrain, QUADRATURE_BUMP_LIMIT};

use crate::error::Result;

/// `∫ η^r`.
pub fn profile_moment(profile: &Profile1D, r: f64) -> Result<f64> {
    profile.moment(r)
}

/// `∫ |η'|^p`.
pub fn profile_prime_moment(profile: &Profile1D, p: f64) -> Result<f64> {
    profile.prime_moment(p)
}

pub fn sigma_eval(train: &SigmaTrain, t: f64) -> f64 {
    train.eval(t)
}

pub fn sigma_prime_eval(train: &SigmaTrain, t: f64) -> f64 {
    train.eval_prime(t)
}

pub fn sigma_lr_norm_closed(train: &SigmaTrain, r: f64) -> Result<f64> {
    train.lr_norm_closed(r)
}

pub fn sigma_lr_norm_quadrature(train: &SigmaTrain, r: f64, tol: f64) -> Result<f64> {
    train.lr_norm_quadrature(r, tol)
}
