//! Empirical constants of the inequality chain on grid fields.

use rayon::prelude::*;

use super::field::GridField;
use super::ops::{hl_maximal, sharp_maximal, window, WindowLattice};
use super::sat::SummedArea;
use crate::error::{Error, Result};
use crate::paramlab::ParamSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Report {
    /// `∫ |u|^{p(q/d + 1)}`.
    pub lhs: f64,
    /// `∫ |∇u|^p`.
    pub rhs_grad: f64,
    /// `(sup_Q R^{d/q} avg_Q |u|)^{qp/d}`.
    pub rhs_morrey: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsRatios {
    /// `‖f‖_s / ‖M# f‖_s`; only reported.
    pub r1: f64,
    /// `‖M# f‖_s / ‖f‖_s`.
    pub r2: f64,
    /// `‖f‖_s / ‖M f‖_s`, at most 1.
    pub r3: f64,
    /// `‖M f‖_s / ‖f‖_s`.
    pub r4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderReport {
    pub r: f64,
    /// Interpolation weight: `1/r = θ/r_low + (1 - θ)/p*`.
    pub theta_interp: f64,
    pub lhs: f64,
    pub bound: f64,
    pub slack: f64,
}

fn check_dim(field: &GridField, ps: &ParamSet) -> Result<()> {
    if field.dim() != ps.d() as usize {
        return Err(Error::DimensionMismatch {
            field: field.dim(),
            params: ps.d(),
        });
    }
    Ok(())
}

fn nonzero(field: &GridField) -> Result<()> {
    if field.is_zero() {
        Err(Error::ZeroField)
    } else {
        Ok(())
    }
}

/// `sup R^{d/q} · avg_Q |u|` over cube windows of every cell and the radii
/// `{0} ∪ lattice`, where `R = (ρ + 1/2) h` and `|Q| = (2R)^d`.
pub fn morrey_window_sup(field: &GridField, q: f64, lattice: &WindowLattice) -> f64 {
    let shape = field.shape3();
    let dim = field.dim();
    let abs: Vec<f64> = field.values().iter().map(|v| v.abs()).collect();
    let sat = SummedArea::new(shape, &abs);
    let cell = field.cell_volume();
    let mut radii = vec![0];
    radii.extend_from_slice(lattice.radii());
    // Per radius, R^{d/q} / (2R)^d is a constant factor.
    let factors: Vec<f64> = radii
        .iter()
        .map(|&rho| {
            let r = (rho as f64 + 0.5) * field.h();
            r.powf(dim as f64 / q) / (2.0 * r).powi(dim as i32) * cell
        })
        .collect();
    (0..field.len())
        .into_par_iter()
        .map(|i| {
            let idx = field.unravel(i);
            radii.iter().zip(&factors).fold(0.0f64, |best, (&rho, &c)| {
                let (lo, hi, _) = window(shape, dim, idx, rho);
                best.max(c * sat.sum(lo, hi))
            })
        })
        .reduce(|| 0.0, f64::max)
}

/// Empirical constant of `∫|u|^{p(q/d+1)} <= C ∫|∇u|^p (sup R^{d/q} avg|u|)^{qp/d}`.
/// Windows use radii `{0} ∪ half-octave lattice` up to the padding.
pub fn verify_lemma1(field: &GridField, ps: &ParamSet) -> Result<Lemma1Report> {
    check_dim(field, ps)?;
    nonzero(field)?;
    let (d, p, q) = (f64::from(ps.d()), ps.p(), ps.q());
    let lhs = field.power_sum(ps.r_low());
    let rhs_grad = field.gradient_magnitude().power_sum(p);
    let sup = morrey_window_sup(field, q, &WindowLattice::half_octave(field.padding()));
    let rhs_morrey = sup.powf(q * p / d);
    Ok(Lemma1Report {
        lhs,
        rhs_grad,
        rhs_morrey,
        ratio: lhs / (rhs_grad * rhs_morrey),
    })
}

/// The four Lebesgue-norm ratios between `f`, `M f` and `M# f`.
pub fn verify_fs_equivalence(field: &GridField, s: f64, lattice: &WindowLattice) -> Result<FsRatios> {
    if !(s > 1.0 && s.is_finite()) {
        return Err(Error::SOutOfRange(s));
    }
    nonzero(field)?;
    let f = field.lp_norm(s)?;
    let m = hl_maximal(field, lattice)?.lp_norm(s)?;
    let sharp = sharp_maximal(field, lattice)?.lp_norm(s)?;
    Ok(FsRatios {
        r1: f / sharp,
        r2: sharp / f,
        r3: f / m,
        r4: m / f,
    })
}

/// `‖u‖_{p*} / ‖∇u‖_p`.
pub fn verify_sobolev(field: &GridField, ps: &ParamSet) -> Result<f64> {
    check_dim(field, ps)?;
    nonzero(field)?;
    let num = field.lp_norm(ps.sobolev_exp())?;
    let den = field.gradient_magnitude().lp_norm(ps.p())?;
    Ok(num / den)
}

/// Hölder interpolation of `∫|u|^r` between `r_low` and `p*`. The slack is
/// `bound - lhs`, which is nonnegative for exact sums; at the endpoints the
/// weight is exactly 0 or 1, so the slack is exactly 0.
pub fn verify_holder_chain(field: &GridField, ps: &ParamSet, r: f64) -> Result<HolderReport> {
    let range = ps.admissible_range();
    if !range.contains(r) {
        return Err(Error::ROutOfRange {
            r,
            lo: range.lo,
            hi: range.hi,
        });
    }
    nonzero(field)?;
    let (r_low, p_star) = (ps.r_low(), ps.sobolev_exp());
    let theta_interp = (1.0 / r - 1.0 / p_star) / (1.0 / r_low - 1.0 / p_star);
    let lhs = field.power_sum(r);
    let low = field.power_sum(r_low);
    let high = field.power_sum(p_star);
    let bound = low.powf(r * theta_interp / r_low) * high.powf(r * (1.0 - theta_interp) / p_star);
    Ok(HolderReport {
        r,
        theta_interp,
        lhs,
        bound,
        slack: bound - lhs,
    })
}
