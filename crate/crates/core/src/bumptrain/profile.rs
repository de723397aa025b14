//! Cutoff profiles: the 1-D bump `η` and the radial cutoff `φ`.
//!
//! Both are 1 on `[-1, 1]` (resp. the unit ball) and vanish outside `[-2, 2]`
//! (resp. the ball of radius 2). A smooth cutoff with slope bound 1 that drops
//! from 1 to 0 over a unit interval does not exist, so the default is the
//! Lipschitz trapezoid, with a mollified variant for smoothness checks.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_with_breaks, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    /// Piecewise linear: 1 on `[-1, 1]`, `2 - |t|` on the transitions.
    Trapezoid,
    /// A shrunken trapezoid convolved with the standard mollifier.
    SmoothMollified,
}

/// Mollified trapezoid: plateau `|t| <= 1 + eps`, foot `2 - eps`, smoothed by
/// `exp(-1 / (1 - (s/eps)^2))` of width `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Mollified {
    eps: f64,
    // ∫_{-1}^{1} exp(-1/(1-x²)) dx
    mass: f64,
}

fn mollifier_kernel(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

const KERNEL_OPTS: QuadOptions = QuadOptions {
    rel_tol: 1e-13,
    abs_tol: 1e-16,
    max_intervals: 400,
};

impl Mollified {
    fn new(eps: f64) -> Self {
        let mass = integrate(mollifier_kernel, -1.0, 1.0, KERNEL_OPTS).value;
        Self { eps, mass }
    }

    /// Mollifier CDF `Φ(y) = ∫_{-eps}^{y} ψ`.
    fn cdf(&self, y: f64) -> f64 {
        let x = y / self.eps;
        if x <= -1.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            integrate(mollifier_kernel, -1.0, x, KERNEL_OPTS).value / self.mass
        }
    }

    /// `Φ₂(y) = ∫_{-eps}^{y} Φ = ∫ (y - s)₊ ψ(s) ds`.
    fn cdf2(&self, y: f64) -> f64 {
        let x = y / self.eps;
        if x <= -1.0 {
            0.0
        } else if x >= 1.0 {
            y
        } else {
            let v = integrate(|s| (x - s) * mollifier_kernel(s), -1.0, x, KERNEL_OPTS).value;
            self.eps * v / self.mass
        }
    }

    fn ramp(&self) -> (f64, f64, f64) {
        let a = 1.0 + self.eps;
        let b = 2.0 - self.eps;
        (a, b, b - a)
    }

    fn value(&self, t: f64) -> f64 {
        let s = t.abs();
        if s <= 1.0 {
            return 1.0;
        }
        if s >= 2.0 {
            return 0.0;
        }
        let (a, b, w) = self.ramp();
        (1.0 - (self.cdf2(s - a) - self.cdf2(s - b)) / w).clamp(0.0, 1.0)
    }

    fn derivative(&self, t: f64) -> f64 {
        let s = t.abs();
        if s <= 1.0 || s >= 2.0 {
            return 0.0;
        }
        let (a, b, w) = self.ramp();
        -t.signum() * (self.cdf(s - a) - self.cdf(s - b)) / w
    }
}

/// Even cutoff `η` with `η = 1` on `[-1, 1]` and `η = 0` outside `(-2, 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile1D {
    kind: ProfileKind,
    smooth: Option<Mollified>,
}

impl Default for Profile1D {
    fn default() -> Self {
        Self::trapezoid()
    }
}

impl Profile1D {
    pub fn trapezoid() -> Self {
        Self {
            kind: ProfileKind::Trapezoid,
            smooth: None,
        }
    }

    /// Mollified trapezoid with smoothing width `eps ∈ (0, 1/4)`.
    pub fn smooth_mollified(eps: f64) -> Self {
        assert!(eps > 0.0 && eps < 0.25, "mollifier width must lie in (0, 1/4)");
        Self {
            kind: ProfileKind::SmoothMollified,
            smooth: Some(Mollified::new(eps)),
        }
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.smooth {
            None => (2.0 - t.abs()).clamp(0.0, 1.0),
            Some(m) => m.value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self.smooth {
            None => {
                let s = t.abs();
                if s > 1.0 && s < 2.0 {
                    -t.signum()
                } else {
                    0.0
                }
            }
            Some(m) => m.derivative(t),
        }
    }

    /// `sup |η'|`: 1 for the trapezoid, `1 / (1 - 2 eps)` once mollified.
    pub fn slope_bound(&self) -> f64 {
        match self.smooth {
            None => 1.0,
            Some(m) => 1.0 / (1.0 - 2.0 * m.eps),
        }
    }

    /// Points where the profile changes formula, ascending, spanning `[-2, 2]`.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.smooth {
            None => vec![-2.0, -1.0, 1.0, 2.0],
            Some(m) => {
                let e2 = 2.0 * m.eps;
                vec![-2.0, -2.0 + e2, -1.0 - e2, -1.0, 1.0, 1.0 + e2, 2.0 - e2, 2.0]
            }
        }
    }

    /// `∫ η^r`; the trapezoid gives `2 + 2/(r+1)`.
    pub fn moment(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveExponent(r));
        }
        Ok(match self.smooth {
            None => 2.0 + 2.0 / (r + 1.0),
            Some(_) => 2.0 + 2.0 * self.ramp_integral(r, 1.0, 2.0),
        })
    }

    /// `∫ |η'|^p` for `p >= 1`; the trapezoid gives 2.
    pub fn prime_moment(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::NonPositiveExponent(p));
        }
        Ok(match self.smooth {
            None => 2.0,
            Some(_) => {
                let pts: Vec<f64> = self.breakpoints().into_iter().filter(|&x| x >= 1.0).collect();
                2.0 * integrate_with_breaks(|t| self.derivative(t).abs().powf(p), &pts, QuadOptions::rel(1e-11)).value
            }
        })
    }

    /// `∫_lo^hi η^r`, with the interval clipped to the support.
    pub fn partial_moment(&self, r: f64, lo: f64, hi: f64) -> f64 {
        let lo = lo.max(-2.0);
        let hi = hi.min(2.0);
        if !(hi > lo) {
            return 0.0;
        }
        match self.smooth {
            None => trapezoid_cumulative(r, hi) - trapezoid_cumulative(r, lo),
            Some(_) => {
                let mut pts = vec![lo];
                pts.extend(self.breakpoints().into_iter().filter(|&x| x > lo && x < hi));
                pts.push(hi);
                integrate_with_breaks(|t| self.value(t).powf(r), &pts, QuadOptions::rel(1e-11)).value
            }
        }
    }

    /// `∫_lo^hi η^r` for `1 <= lo <= hi <= 2` (the right transition).
    fn ramp_integral(&self, r: f64, lo: f64, hi: f64) -> f64 {
        let mut pts = vec![lo];
        pts.extend(self.breakpoints().into_iter().filter(|&x| x > lo && x < hi));
        pts.push(hi);
        integrate_with_breaks(|t| self.value(t).powf(r), &pts, QuadOptions::rel(1e-11)).value
    }
}

/// `∫_{-2}^{x} η^r` for the trapezoid.
fn trapezoid_cumulative(r: f64, x: f64) -> f64 {
    let edge = 1.0 / (r + 1.0);
    if x <= -2.0 {
        0.0
    } else if x <= -1.0 {
        (2.0 + x).powf(r + 1.0) * edge
    } else if x <= 1.0 {
        edge + (x + 1.0)
    } else if x < 2.0 {
        edge + 2.0 + (1.0 - (2.0 - x).powf(r + 1.0)) * edge
    } else {
        2.0 + 2.0 * edge
    }
}

/// Surface measure of the unit sphere in `R^m` (`m >= 1`), via
/// `S_1 = 2`, `S_2 = 2π`, `S_{m+2} = 2π S_m / m`.
pub fn unit_sphere_area(m: u32) -> f64 {
    assert!(m >= 1, "ambient dimension must be positive");
    let mut k = if m % 2 == 1 { 1 } else { 2 };
    let mut area = if k == 1 { 2.0 } else { 2.0 * PI };
    while k < m {
        area *= 2.0 * PI / f64::from(k);
        k += 2;
    }
    area
}

/// Radial cutoff `φ(x) = φ₀(|x|)` on `R^m`, with `φ₀` the restriction of a
/// [`Profile1D`] to `s >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProfile {
    section: Profile1D,
    m: u32,
}

impl RadialProfile {
    pub fn new(section: Profile1D, m: u32) -> Self {
        assert!(m >= 1, "ambient dimension must be positive");
        Self { section, m }
    }

    pub fn ambient_dim(&self) -> u32 {
        self.m
    }

    pub fn section(&self) -> &Profile1D {
        &self.section
    }

    pub fn radial(&self, s: f64) -> f64 {
        self.section.value(s)
    }

    pub fn radial_derivative(&self, s: f64) -> f64 {
        self.section.derivative(s.abs())
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.radial(x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }

    /// `|∇φ(x)| = |φ₀'(|x|)|`.
    pub fn gradient_norm(&self, x: &[f64]) -> f64 {
        self.radial_derivative(x.iter().map(|v| v * v).sum::<f64>().sqrt()).abs()
    }

    /// `∫_{|x| < radius} φ^r dx = S_m ∫_0^radius φ₀(u)^r u^{m-1} du`.
    pub fn ball_moment(&self, r: f64, radius: f64) -> f64 {
        let radius = radius.min(2.0);
        if !(radius > 0.0) {
            return 0.0;
        }
        let m = self.m;
        let area = unit_sphere_area(m);
        let core = radius.min(1.0).powi(m as i32) / f64::from(m);
        if radius <= 1.0 {
            return area * core;
        }
        let ramp = if m == 1 {
            self.section.partial_moment(r, 1.0, radius)
        } else if self.section.kind() == ProfileKind::Trapezoid {
            // ∫_{2-radius}^1 v^r (2 - v)^{m-1} dv, expanding (2 - v)^{m-1}.
            let mut acc = 0.0;
            let mut binom = 1.0;
            for i in 0..m {
                let e = r + f64::from(i) + 1.0;
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * binom * f64::from(m - 1 - i).exp2() * (1.0 - (2.0 - radius).powf(e)) / e;
                binom = binom * f64::from(m - 1 - i) / f64::from(i + 1);
            }
            acc
        } else {
            let mut pts = vec![1.0];
            pts.extend(self.section.breakpoints().into_iter().filter(|&x| x > 1.0 && x < radius));
            pts.push(radius);
            integrate_with_breaks(
                |u| self.radial(u).powf(r) * u.powi(m as i32 - 1),
                &pts,
                QuadOptions::rel(1e-12),
            )
            .value
        };
        area * (core + ramp)
    }

    /// `∫ φ^r` over all of `R^m`.
    pub fn moment(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveExponent(r));
        }
        Ok(self.ball_moment(r, 2.0))
    }
}
