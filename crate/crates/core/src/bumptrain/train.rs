use rayon::prelude::*;

use super::profile::Profile1D;
use super::schedule::{Block, OffsetSchedule};
use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, QuadOptions};

/// Upper bump count for [`SigmaTrain::lr_norm_quadrature`].
pub const QUADRATURE_BUMP_LIMIT: u128 = 1_000_000;

/// `χ_n(t) = Σ_{k,j} η(t - a_{k,j})`, and `σ_n(t) = χ_n(t) + χ_n(-t)` when
/// symmetrized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaTrain {
    schedule: OffsetSchedule,
    profile: Profile1D,
    symmetrized: bool,
}

/// A located bump: block, index and center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpRef {
    pub block: Block,
    pub j: u128,
    pub center: f64,
}

/// `⌊log₂ s⌋ + 1` for `s >= 1`, i.e. the block whose dyadic range holds `s`.
pub(crate) fn block_index(s: f64) -> Option<u32> {
    if !(s >= 1.0) || !s.is_finite() {
        return None;
    }
    let exp = ((s.to_bits() >> 52) & 0x7ff) as i64 - 1023;
    Some(exp as u32 + 1)
}

impl SigmaTrain {
    pub fn new(schedule: OffsetSchedule, profile: Profile1D) -> Self {
        Self {
            schedule,
            profile,
            symmetrized: true,
        }
    }

    /// One-sided `χ_n` instead of `σ_n`.
    pub fn one_sided(schedule: OffsetSchedule, profile: Profile1D) -> Self {
        Self {
            schedule,
            profile,
            symmetrized: false,
        }
    }

    pub fn schedule(&self) -> &OffsetSchedule {
        &self.schedule
    }

    pub fn profile(&self) -> &Profile1D {
        &self.profile
    }

    pub fn is_symmetrized(&self) -> bool {
        self.symmetrized
    }

    /// Number of translated bumps: `2N` when symmetrized, `N` otherwise.
    pub fn bump_count(&self) -> u128 {
        let n = self.schedule.total_count();
        if self.symmetrized {
            2 * n
        } else {
            n
        }
    }

    /// The bump whose support contains `s > 0`, if any. Supports are
    /// disjoint, so the nearest center of the dyadic block is the only
    /// candidate.
    pub fn locate(&self, s: f64) -> Option<BumpRef> {
        let block = self.schedule.block(block_index(s)?)?;
        let j = ((s - block.base - 1.0) / block.gap).round().clamp(1.0, block.count as f64) as u128;
        let center = block.center(j);
        ((s - center).abs() < 2.0).then_some(BumpRef { block, j, center })
    }

    fn signed_arg(&self, t: f64) -> Option<(f64, f64)> {
        if t > 0.0 {
            Some((t, 1.0))
        } else if self.symmetrized && t < 0.0 {
            Some((-t, -1.0))
        } else {
            None
        }
    }

    /// `σ_n(t)` in O(1).
    pub fn eval(&self, t: f64) -> f64 {
        match self.signed_arg(t) {
            Some((s, _)) => self
                .locate(s)
                .map_or(0.0, |b| self.profile.value(s - b.center)),
            None => 0.0,
        }
    }

    /// `σ_n'(t)` in O(1).
    pub fn eval_prime(&self, t: f64) -> f64 {
        match self.signed_arg(t) {
            Some((s, sign)) => self
                .locate(s)
                .map_or(0.0, |b| sign * self.profile.derivative(s - b.center)),
            None => 0.0,
        }
    }

    /// `∫ σ_n^r = (2) N(n, θ) ∫ η^r`; exact because supports are disjoint.
    pub fn lr_norm_closed(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveR(r));
        }
        Ok(self.bump_count() as f64 * self.profile.moment(r)?)
    }

    /// `log₂ ∫ σ_n^r`, safe for counts beyond `f64` overflow of the product.
    pub fn lr_norm_closed_log2(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveR(r));
        }
        Ok((self.bump_count() as f64).log2() + self.profile.moment(r)?.log2())
    }

    /// `∫ σ_n^r` by adaptive quadrature of [`Self::eval`] over every bump
    /// support, one panel set per bump.
    pub fn lr_norm_quadrature(&self, r: f64, tol: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveR(r));
        }
        if !(tol > 0.0) {
            return Err(Error::BadTolerance(tol));
        }
        let count = self.schedule.total_count();
        if count > QUADRATURE_BUMP_LIMIT {
            return Err(Error::TooManyBumps {
                count,
                limit: QUADRATURE_BUMP_LIMIT,
            });
        }
        let opts = QuadOptions {
            rel_tol: 0.1 * tol,
            abs_tol: 1e-15,
            max_intervals: 200,
        };
        let offsets = self.profile.breakpoints();
        let centers: Vec<f64> = self.schedule.centers().map(|(_, _, c)| c).collect();
        let per_bump: Vec<f64> = centers
            .par_iter()
            .map(|&c| {
                let integrand = |t: f64| self.eval(t).powf(r);
                let pts: Vec<f64> = offsets.iter().map(|o| c + o).collect();
                let mut v = integrate_with_breaks(integrand, &pts, opts).value;
                if self.symmetrized {
                    let pts: Vec<f64> = offsets.iter().rev().map(|o| -c - o).collect();
                    v += integrate_with_breaks(integrand, &pts, opts).value;
                }
                v
            })
            .collect();
        Ok(per_bump.iter().sum())
    }

    /// CSV rows `(theta, n, r, norm)` for the closed form.
    pub fn norm_rows(&self, rs: &[f64]) -> Result<Vec<(f64, u32, f64, f64)>> {
        rs.iter()
            .map(|&r| Ok((self.schedule.theta(), self.schedule.n(), r, self.lr_norm_closed(r)?)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bumptrain::schedule::make_schedule;

    fn train(n: u32) -> SigmaTrain {
        SigmaTrain::new(make_schedule(0.5, n).unwrap(), Profile1D::trapezoid())
    }

    #[test]
    fn block_index_boundaries() {
        assert_eq!(block_index(1.0), Some(1));
        assert_eq!(block_index(255.999), Some(8));
        assert_eq!(block_index(256.0), Some(9));
        assert_eq!(block_index(0.5), None);
        assert_eq!(block_index(f64::NAN), None);
    }

    #[test]
    fn pointwise_values() {
        let s = train(12);
        assert_eq!(s.eval(273.0), 1.0);
        assert_eq!(s.eval(274.5), 0.5);
        assert_eq!(s.eval(-274.5), 0.5);
        assert_eq!(s.eval(275.5), 0.0);
        assert_eq!(s.eval(0.0), 0.0);
        assert_eq!(s.eval(21.0), 1.0);
        assert_eq!(s.eval(4096.0), 0.0);
        for (_, _, c) in s.schedule().centers() {
            assert_eq!(s.eval(c), 1.0);
            assert_eq!(s.eval(-c), 1.0);
        }
        assert_eq!(s.eval_prime(274.5), -1.0);
        assert_eq!(s.eval_prime(-274.5), 1.0);
        assert_eq!(s.eval_prime(273.0), 0.0);
    }

    #[test]
    fn one_sided_vanishes_on_negative_axis() {
        let s = SigmaTrain::one_sided(make_schedule(0.5, 9).unwrap(), Profile1D::trapezoid());
        assert_eq!(s.eval(-273.0), 0.0);
        assert_eq!(s.eval(273.0), 1.0);
        assert_eq!(s.lr_norm_closed(1.0).unwrap(), 87.0);
    }

    #[test]
    fn closed_norms() {
        assert_eq!(train(9).lr_norm_closed(1.0).unwrap(), 174.0);
        let v = train(5).lr_norm_closed(2.0).unwrap();
        assert!((v - 16.0 / 3.0).abs() < 1e-14);
        assert_eq!(train(5).lr_norm_closed(1.0).unwrap(), 2.0 * 3.0);
        assert_eq!(train(5).lr_norm_closed(-1.0), Err(Error::NonPositiveR(-1.0)));
    }

    #[test]
    fn quadrature_norms() {
        let v = train(9).lr_norm_quadrature(1.0, 1e-8).unwrap();
        assert!((v - 174.0).abs() < 1e-6);
        let v = train(5).lr_norm_quadrature(3.0, 1e-8).unwrap();
        assert!((v - 5.0).abs() < 1e-6);
        assert_eq!(train(5).lr_norm_quadrature(1.0, 0.0), Err(Error::BadTolerance(0.0)));
    }

    #[test]
    fn quadrature_refuses_huge_trains() {
        let s = train(45);
        assert!(matches!(s.lr_norm_quadrature(1.0, 1e-6), Err(Error::TooManyBumps { .. })));
    }

    #[test]
    fn log2_norm_agrees() {
        let s = train(14);
        let a = s.lr_norm_closed(1.5).unwrap().log2();
        assert!((a - s.lr_norm_closed_log2(1.5).unwrap()).abs() < 1e-13);
    }
}
