//! Parameter validation and exponent algebra.
//!
//! A [`ParamSet`] is the validated tuple `(d, p, q, q1)` together with every
//! exponent derived from it:
//!
//! * `theta = d (q - q1) / q` : the Morrey weight exponent of the bump train,
//! * `alpha = d (q - q1) / (d p - (d - p) q)` : the dilation rate of `u_n`,
//! * `p* = p d / (d - p)` : the Sobolev exponent,
//! * `r_low = p (q / d + 1)` : the lower end of the admissible `r` range.
//!
//! The growth rate of `∫|u_n|^r` in `n` is
//! `e(r) = d² (q - q1) / (q (d p - (d - p) q)) · (r_low - r)`.
//! [`ExactParams`] re-evaluates all of this in exact rational arithmetic; every
//! finite `f64` is a dyadic rational, so the conversion is lossless.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::error::{Error, Result};

/// Largest `theta` accepted in counterexample mode. Bump gaps grow like
/// `2^{(1 - theta)(k - 1)}`, so `theta` must stay away from 1.
pub const THETA_MAX: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// `1 <= q1 <= q`: hypotheses of the boundedness theorem.
    Verification,
    /// `1 <= q1 < q` and `0 < theta <= THETA_MAX`: the counterexample regime.
    Counterexample,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Verification => f.write_str("verification"),
            Mode::Counterexample => f.write_str("counterexample"),
        }
    }
}

/// One violated constraint.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("d = {d} must be at least 2")]
    DimensionTooSmall { d: u32 },
    #[error("p = {p} must satisfy 1 < p < d = {d}")]
    POutOfRange { p: f64, d: u32 },
    #[error("q = {q} must satisfy 1 < q < pd/(d-p) = {upper}")]
    QOutOfRange { q: f64, upper: f64 },
    #[error("q1 = {q1} must satisfy 1 <= q1 <= q = {q} ({mode} mode)")]
    Q1OutOfRange { q1: f64, q: f64, mode: Mode },
    #[error("q1 = q gives theta = 0; counterexample mode needs q1 < q")]
    ThetaDegenerate,
    #[error("theta = {theta} exceeds the bump-disjointness cap {max}")]
    ThetaTooLarge { theta: f64, max: f64 },
    #[error("{name} is not a finite number")]
    NonFinite { name: &'static str },
}

/// Every constraint that `validate` found violated.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid parameters: ")?;
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ClosedInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }

    /// `count` evenly spaced points including both endpoints.
    pub fn sample(&self, count: usize) -> Vec<f64> {
        match count {
            0 => Vec::new(),
            1 => vec![self.lo],
            _ => (0..count)
                .map(|i| {
                    if i + 1 == count {
                        self.hi
                    } else {
                        self.lo + (self.hi - self.lo) * i as f64 / (count - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSet {
    d: u32,
    p: f64,
    q: f64,
    q1: f64,
    theta: f64,
    alpha: f64,
    sobolev_exp: f64,
    r_low: f64,
    mode: Mode,
}

/// Validates raw parameters, reporting every violated constraint at once.
pub fn validate(d: u32, p: f64, q: f64, q1: f64, mode: Mode) -> std::result::Result<ParamSet, ValidationError> {
    let mut violations = Vec::new();
    for (name, v) in [("p", p), ("q", q), ("q1", q1)] {
        if !v.is_finite() {
            violations.push(Violation::NonFinite { name });
        }
    }
    if !violations.is_empty() {
        return Err(ValidationError { violations });
    }

    let df = f64::from(d);
    if d < 2 {
        violations.push(Violation::DimensionTooSmall { d });
    }
    let p_ok = p > 1.0 && p < df;
    if !p_ok {
        violations.push(Violation::POutOfRange { p, d });
    }
    let sobolev_exp = p * df / (df - p);
    if p_ok && !(q > 1.0 && q < sobolev_exp) {
        violations.push(Violation::QOutOfRange { q, upper: sobolev_exp });
    }

    let theta = df * (q - q1) / q;
    match mode {
        Mode::Verification => {
            if !(q1 >= 1.0 && q1 <= q) {
                violations.push(Violation::Q1OutOfRange { q1, q, mode });
            }
        }
        Mode::Counterexample => {
            if !(q1 >= 1.0 && q1 <= q) {
                violations.push(Violation::Q1OutOfRange { q1, q, mode });
            } else if q1 == q {
                violations.push(Violation::ThetaDegenerate);
            } else if theta > THETA_MAX {
                violations.push(Violation::ThetaTooLarge { theta, max: THETA_MAX });
            }
        }
    }
    if !violations.is_empty() {
        return Err(ValidationError { violations });
    }

    Ok(ParamSet {
        d,
        p,
        q,
        q1,
        theta,
        alpha: df * (q - q1) / (df * p - (df - p) * q),
        sobolev_exp,
        r_low: p * (q / df + 1.0),
        mode,
    })
}

impl ParamSet {
    pub fn d(&self) -> u32 {
        self.d
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn q1(&self) -> f64 {
        self.q1
    }
    pub fn theta(&self) -> f64 {
        self.theta
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn sobolev_exp(&self) -> f64 {
        self.sobolev_exp
    }
    pub fn r_low(&self) -> f64 {
        self.r_low
    }
    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Coefficient `αd/q` multiplying `(r_low - r)` in the scaling exponent.
    pub fn exponent_slope(&self) -> f64 {
        let d = f64::from(self.d);
        d * d * (self.q - self.q1) / (self.q * (d * self.p - (d - self.p) * self.q))
    }

    /// `e(r)`: base-2 growth rate of `∫|u_n|^r` in `n`.
    pub fn scaling_exponent(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveR(r));
        }
        Ok(self.exponent_slope() * (self.r_low - r))
    }

    /// Range of `r` on which the boundedness theorem applies: `[r_low, p*]`.
    pub fn admissible_range(&self) -> ClosedInterval {
        ClosedInterval {
            lo: self.r_low,
            hi: self.sobolev_exp,
        }
    }

    /// `[q, r_low]` when `q1 = q`; `None` otherwise, since the counterexample
    /// rules the extension out for `q1 < q`.
    pub fn extended_range(&self) -> Option<ClosedInterval> {
        (self.q1 == self.q).then_some(ClosedInterval {
            lo: self.q,
            hi: self.r_low,
        })
    }

    pub fn exact(&self) -> ExactParams {
        ExactParams::new(self)
    }
}

pub fn scaling_exponent(ps: &ParamSet, r: f64) -> Result<f64> {
    ps.scaling_exponent(r)
}

pub fn admissible_range(ps: &ParamSet) -> ClosedInterval {
    ps.admissible_range()
}

pub fn extended_range(ps: &ParamSet) -> Option<ClosedInterval> {
    ps.extended_range()
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("validated parameters are finite")
}

/// Exact rational mirror of a [`ParamSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExactParams {
    pub d: BigRational,
    pub p: BigRational,
    pub q: BigRational,
    pub q1: BigRational,
}

impl ExactParams {
    pub fn new(ps: &ParamSet) -> Self {
        Self {
            d: BigRational::from_integer(BigInt::from(ps.d)),
            p: rat(ps.p),
            q: rat(ps.q),
            q1: rat(ps.q1),
        }
    }

    pub fn theta(&self) -> BigRational {
        &self.d * (&self.q - &self.q1) / &self.q
    }

    fn denom(&self) -> BigRational {
        &self.d * &self.p - (&self.d - &self.p) * &self.q
    }

    pub fn alpha(&self) -> BigRational {
        &self.d * (&self.q - &self.q1) / self.denom()
    }

    pub fn sobolev_exp(&self) -> BigRational {
        &self.p * &self.d / (&self.d - &self.p)
    }

    pub fn r_low(&self) -> BigRational {
        &self.p * (&self.q / &self.d + BigRational::one())
    }

    /// `d²(q-q1)/(q(dp-(d-p)q)) · (r_low - r)`.
    pub fn scaling_exponent(&self, r: &BigRational) -> BigRational {
        &self.d * &self.d * (&self.q - &self.q1) / (&self.q * self.denom()) * (self.r_low() - r)
    }

    /// `θ + αd - rαd/q`, the second algebraic form of the exponent.
    pub fn scaling_exponent_alt(&self, r: &BigRational) -> BigRational {
        let a = self.alpha();
        self.theta() + &a * &self.d - r * &a * &self.d / &self.q
    }

    /// `-pαd/q + dα - pα + θ`, which vanishes identically.
    pub fn gradient_cancellation(&self) -> BigRational {
        let a = self.alpha();
        -(&self.p * &a * &self.d / &self.q) + &self.d * &a - &self.p * &a + self.theta()
    }

    pub fn to_f64(x: &BigRational) -> f64 {
        use num_traits::ToPrimitive;
        x.to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_zero(x: &BigRational) -> bool {
        x.is_zero()
    }

    pub fn is_positive(x: &BigRational) -> bool {
        x.is_positive()
    }
}
