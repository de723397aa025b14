//! The counterexample family
//! `u_n(t, x) = s^{-1} 2^{-αdn/q} σ_n(2^{-αn} t) φ(2^{-αn} x)` on `R × R^{d-1}`.
//!
//! Every norm factorizes into a one-dimensional bump-train quantity and a
//! radial quantity, so nothing is ever sampled on a `d`-dimensional grid.
//! Norms are carried in `log₂` form and only exponentiated on output, which
//! keeps large `n` free of overflow.

use std::fmt;

use rayon::prelude::*;

use crate::bumptrain::{
    minimal_k0, unit_sphere_area, weighted_morrey_sup, OffsetSchedule, Profile1D, RadialProfile, SigmaTrain, WindowMass,
};
use crate::error::{Error, Result};
use crate::export::{fmt_f64, Table};
use crate::fit::least_squares;
use crate::paramlab::{ParamSet, THETA_MAX};
use crate::quad::{integrate_with_breaks, QuadOptions};

/// Fitted slopes above this count as growth.
pub const SLOPE_TOL: f64 = 0.02;
/// Shortest accepted fit window.
pub const MIN_FIT_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CexFamily {
    ps: ParamSet,
    profile_t: Profile1D,
    profile_x: RadialProfile,
    k0: Option<u32>,
    s: f64,
    grad_constant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorreyReport {
    pub n: u32,
    /// `sup ρ^{-θ} ∫_{C_ρ} |u_n|^{q1}` over circumscribing cylinders `C_ρ`
    /// (half-length and radius `ρ`, axis through the origin of `R^{d-1}`).
    pub sup: f64,
    /// Maximizing window in original coordinates.
    pub center: f64,
    pub radius: f64,
    /// Maximizing radius in the rescaled variable `2^{-αn} ρ`.
    pub scaled_radius: f64,
    /// Circumscribed over inscribed (`ρ/√2` cylinder) value at the argmax.
    pub bracket_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormReport {
    pub n: u32,
    pub grad_lp: f64,
    pub morrey: MorreyReport,
    /// `(r, ∫|u_n|^r)`.
    pub lr: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    BlowUp,
    Bounded,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::BlowUp => "blow-up",
            Verdict::Bounded => "bounded",
        })
    }
}

impl Verdict {
    pub fn from_slope(slope: f64) -> Self {
        if slope > SLOPE_TOL {
            Verdict::BlowUp
        } else {
            Verdict::Bounded
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub r: f64,
    pub n_window: (u32, u32),
    /// Base-2 slope of `log₂ ∫|u_n|^r` against `n`.
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
    /// `e(r)`.
    pub predicted: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpnessRow {
    pub r: f64,
    pub slope: f64,
    pub predicted: f64,
    pub verdict: Verdict,
    /// Verdict matches `r >= r_low`.
    pub agrees: bool,
}

/// `K(p) = ∫_{-2}^{2} ∫_{R^{d-1}} (η'(t)² φ(x)² + η(t)² |∇φ(x)|²)^{p/2} dx dt`,
/// by nested adaptive quadrature in `(t, |x|)`.
pub fn gradient_constant(profile_t: &Profile1D, profile_x: &RadialProfile, p: f64) -> f64 {
    let m = profile_x.ambient_dim();
    let area = unit_sphere_area(m);
    let mut t_pts = profile_t.breakpoints();
    t_pts.sort_by(f64::total_cmp);
    let mut u_pts: Vec<f64> = profile_x.section().breakpoints().into_iter().filter(|&u| u >= 0.0).collect();
    u_pts.insert(0, 0.0);
    u_pts.sort_by(f64::total_cmp);
    u_pts.dedup();
    let inner_opts = QuadOptions {
        rel_tol: 1e-11,
        abs_tol: 1e-14,
        max_intervals: 500,
    };
    let outer_opts = QuadOptions {
        rel_tol: 1e-10,
        abs_tol: 1e-13,
        max_intervals: 500,
    };
    let inner = |t: f64| {
        let (e, de) = (profile_t.value(t), profile_t.derivative(t));
        integrate_with_breaks(
            |u| {
                let (f, df) = (profile_x.radial(u), profile_x.radial_derivative(u));
                (de * de * f * f + e * e * df * df).powf(0.5 * p) * u.powi(m as i32 - 1)
            },
            &u_pts,
            inner_opts,
        )
        .value
    };
    area * integrate_with_breaks(inner, &t_pts, outer_opts).value
}

impl CexFamily {
    /// Trapezoid profiles in `t` and `|x|`, minimal block start, `s = 1`.
    pub fn new(ps: ParamSet) -> Result<Self> {
        Self::with_profiles(ps, Profile1D::trapezoid(), Profile1D::trapezoid(), None)
    }

    pub fn with_profiles(ps: ParamSet, profile_t: Profile1D, radial_section: Profile1D, k0: Option<u32>) -> Result<Self> {
        let theta = ps.theta();
        if !(theta > 0.0 && theta <= THETA_MAX) {
            return Err(Error::ThetaOutOfRange { theta, max: THETA_MAX });
        }
        // Rejects an override below the minimal block start.
        OffsetSchedule::new(theta, k0.unwrap_or_else(|| minimal_k0(theta)), k0)?;
        let profile_x = RadialProfile::new(radial_section, ps.d() - 1);
        let grad_constant = gradient_constant(&profile_t, &profile_x, ps.p());
        Ok(Self {
            ps,
            profile_t,
            profile_x,
            k0,
            s: 1.0,
            grad_constant,
        })
    }

    pub fn params(&self) -> &ParamSet {
        &self.ps
    }

    pub fn profile_t(&self) -> &Profile1D {
        &self.profile_t
    }

    pub fn profile_x(&self) -> &RadialProfile {
        &self.profile_x
    }

    /// First block index.
    pub fn k0(&self) -> u32 {
        self.k0.unwrap_or_else(|| minimal_k0(self.ps.theta()))
    }

    /// The divisor `s`.
    pub fn normalization(&self) -> f64 {
        self.s
    }

    pub fn with_normalization(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::NonPositiveExponent(s));
        }
        Ok(Self { s, ..*self })
    }

    /// `K(p)`, the per-bump gradient integral.
    pub fn gradient_constant(&self) -> f64 {
        self.grad_constant
    }

    /// `2^{-αn}`.
    pub fn lambda(&self, n: u32) -> f64 {
        (-self.ps.alpha() * f64::from(n)).exp2()
    }

    pub fn schedule(&self, n: u32) -> Result<OffsetSchedule> {
        OffsetSchedule::new(self.ps.theta(), n, self.k0)
    }

    pub fn train(&self, n: u32) -> Result<SigmaTrain> {
        Ok(SigmaTrain::new(self.schedule(n)?, self.profile_t))
    }

    fn log2_amplitude(&self, n: u32) -> f64 {
        let ps = &self.ps;
        -self.s.log2() - ps.alpha() * f64::from(ps.d()) * f64::from(n) / ps.q()
    }

    /// `u_n(t, x)`.
    pub fn value(&self, n: u32, t: f64, x: &[f64]) -> Result<f64> {
        let train = self.train(n)?;
        let lambda = self.lambda(n);
        let xs: Vec<f64> = x.iter().map(|v| v * lambda).collect();
        Ok(self.log2_amplitude(n).exp2() * train.eval(lambda * t) * self.profile_x.value(&xs))
    }

    /// `log₂ ∫ |u_n|^r`.
    pub fn lr_norm_log2(&self, n: u32, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveR(r));
        }
        let train = self.train(n)?;
        let d = f64::from(self.ps.d());
        let scale = r * self.log2_amplitude(n) + d * self.ps.alpha() * f64::from(n);
        Ok(scale + train.lr_norm_closed_log2(r)? + self.profile_x.moment(r)?.log2())
    }

    /// `∫ |u_n|^r`, exact by separability.
    pub fn lr_norm(&self, n: u32, r: f64) -> Result<f64> {
        Ok(self.lr_norm_log2(n, r)?.exp2())
    }

    /// `log₂ ∫ |∇u_n|^p`.
    pub fn grad_lp_norm_log2(&self, n: u32) -> Result<f64> {
        let train = self.train(n)?;
        let (d, p) = (f64::from(self.ps.d()), self.ps.p());
        let scale = p * self.log2_amplitude(n) + (d - p) * self.ps.alpha() * f64::from(n);
        Ok(scale + (train.bump_count() as f64).log2() + self.grad_constant.log2())
    }

    /// `∫ |∇u_n|^p = s^{-p} c_n^p 2^{(d-p)αn} · 2N · K(p)`.
    pub fn grad_lp_norm(&self, n: u32) -> Result<f64> {
        Ok(self.grad_lp_norm_log2(n)?.exp2())
    }

    /// `sup_{t0, ρ} ρ^{-θ} ∫_{C_ρ(t0)} |u_n|^{q1}`. After the change of
    /// variables `(t, x) → 2^{-αn}(t, x)` the powers of `2^{αn}` cancel and the
    /// supremum is `s^{-q1}` times the weighted train supremum with weight
    /// `∫_{|x|<ρ} φ^{q1}`.
    pub fn morrey_sup(&self, n: u32) -> Result<MorreyReport> {
        let train = self.train(n)?;
        let (q1, theta) = (self.ps.q1(), self.ps.theta());
        let phi = self.profile_x;
        let weight = move |rho: f64| phi.ball_moment(q1, rho);
        let best = weighted_morrey_sup(&train, q1, theta, weight)?;
        let norm = self.s.powf(-q1);

        let wm = WindowMass::new(&train, q1)?;
        let big = std::f64::consts::SQRT_2 * best.radius;
        let inscribed = big.powf(-theta)
            * wm.mass(best.center - best.radius, best.center + best.radius)
            * weight(best.radius);
        let inv_lambda = self.lambda(n).recip();
        Ok(MorreyReport {
            n,
            sup: norm * best.sup,
            center: best.center * inv_lambda,
            radius: best.radius * inv_lambda,
            scaled_radius: best.radius,
            bracket_ratio: best.sup / inscribed,
        })
    }

    pub fn norm_report(&self, n: u32, rs: &[f64]) -> Result<NormReport> {
        let lr = rs
            .iter()
            .map(|&r| Ok((r, self.lr_norm(n, r)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(NormReport {
            n,
            grad_lp: self.grad_lp_norm(n)?,
            morrey: self.morrey_sup(n)?,
            lr,
        })
    }

    /// Reports for every `n` in `ns`, computed in parallel.
    pub fn norm_reports(&self, ns: &[u32], rs: &[f64]) -> Result<Vec<NormReport>> {
        ns.par_iter().map(|&n| self.norm_report(n, rs)).collect()
    }
}

/// Multiplies the divisor by `max(1, max grad^{1/p}, max morrey^{1/q1})` over
/// `ns`, then nudges it up by ulps until every value is `<= 1` in floating
/// point. A family that already satisfies both bounds is returned unchanged.
pub fn normalize(family: &CexFamily, ns: &[u32]) -> Result<CexFamily> {
    if ns.is_empty() {
        return Err(Error::WindowTooShort { len: 0, min: 1 });
    }
    let (p, q1) = (family.ps.p(), family.ps.q1());
    // Morrey sups at s = 1; `morrey_sup` multiplies them by s^{-q1}.
    let raw = family.with_normalization(1.0)?;
    let morrey_raw: Vec<f64> = ns
        .par_iter()
        .map(|&n| raw.morrey_sup(n).map(|m| m.sup))
        .collect::<Result<_>>()?;
    let holds = |s: f64| -> Result<bool> {
        let f = family.with_normalization(s)?;
        for &n in ns {
            if f.grad_lp_norm(n)? > 1.0 {
                return Ok(false);
            }
        }
        Ok(morrey_raw.iter().all(|&m| s.powf(-q1) * m <= 1.0))
    };
    if holds(family.s)? {
        return Ok(*family);
    }
    let mut g = 0.0f64;
    for &n in ns {
        g = g.max(family.grad_lp_norm(n)?);
    }
    let m = morrey_raw.iter().copied().fold(0.0, f64::max) * family.s.powf(-q1);
    let mut s = family.s * 1f64.max(g.powf(1.0 / p)).max(m.powf(1.0 / q1));
    while !holds(s)? {
        s = s.next_up();
    }
    family.with_normalization(s)
}

/// Least-squares slope of `log₂ ∫|u_n|^r` over `n_lo..=n_hi`.
pub fn scaling_fit(family: &CexFamily, r: f64, n_lo: u32, n_hi: u32) -> Result<ScalingFit> {
    let len = if n_hi >= n_lo { (n_hi - n_lo + 1) as usize } else { 0 };
    if len < MIN_FIT_WINDOW {
        return Err(Error::WindowTooShort {
            len,
            min: MIN_FIT_WINDOW,
        });
    }
    let predicted = family.ps.scaling_exponent(r)?;
    let xs: Vec<f64> = (n_lo..=n_hi).map(f64::from).collect();
    let ys: Vec<f64> = (n_lo..=n_hi)
        .map(|n| family.lr_norm_log2(n, r))
        .collect::<Result<_>>()?;
    let line = least_squares(&xs, &ys)?;
    Ok(ScalingFit {
        r,
        n_window: (n_lo, n_hi),
        slope: line.slope,
        intercept: line.intercept,
        max_residual: line.max_residual,
        predicted,
        verdict: Verdict::from_slope(line.slope),
    })
}

/// One row per `r`: the verdict from the fitted slope against `r >= r_low`.
pub fn sharpness_report(family: &CexFamily, rs: &[f64], n_lo: u32, n_hi: u32) -> Result<Vec<SharpnessRow>> {
    let r_low = family.ps.r_low();
    rs.iter()
        .map(|&r| {
            let fit = scaling_fit(family, r, n_lo, n_hi)?;
            let expect = if r >= r_low { Verdict::Bounded } else { Verdict::BlowUp };
            Ok(SharpnessRow {
                r,
                slope: fit.slope,
                predicted: fit.predicted,
                verdict: fit.verdict,
                agrees: fit.verdict == expect,
            })
        })
        .collect()
}

/// Columns `n, grad_lp, morrey_sup, morrey_center, morrey_radius,
/// bracket_ratio`, then `lr_<r>` per exponent.
pub fn norm_table(reports: &[NormReport]) -> Table {
    let mut header: Vec<String> = ["n", "grad_lp", "morrey_sup", "morrey_center", "morrey_radius", "bracket_ratio"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    if let Some(first) = reports.first() {
        header.extend(first.lr.iter().map(|(r, _)| format!("lr_{r}")));
    }
    let mut t = Table::new(header);
    for rep in reports {
        let mut row = vec![
            rep.n.to_string(),
            fmt_f64(rep.grad_lp),
            fmt_f64(rep.morrey.sup),
            fmt_f64(rep.morrey.center),
            fmt_f64(rep.morrey.radius),
            fmt_f64(rep.morrey.bracket_ratio),
        ];
        row.extend(rep.lr.iter().map(|&(_, v)| fmt_f64(v)));
        t.push(row);
    }
    t
}

/// Columns `r, slope, predicted, verdict, agrees`.
pub fn sharpness_table(rows: &[SharpnessRow]) -> Table {
    let mut t = Table::new(["r", "slope", "predicted", "verdict", "agrees"]);
    for row in rows {
        t.push(vec![
            fmt_f64(row.r),
            fmt_f64(row.slope),
            fmt_f64(row.predicted),
            row.verdict.to_string(),
            row.agrees.to_string(),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paramlab::{validate, Mode};
    use proptest::prelude::*;

    fn example() -> CexFamily {
        CexFamily::new(validate(2, 1.5, 2.0, 1.5, Mode::Counterexample).unwrap()).unwrap()
    }

    #[test]
    fn gradient_constant_d2_p2() {
        let ps = validate(2, 1.5, 2.0, 1.5, Mode::Counterexample).unwrap();
        let trap = Profile1D::trapezoid();
        let k = gradient_constant(&trap, &RadialProfile::new(trap, ps.d() - 1), 2.0);
        // (∫η'²)(∫φ²) + (∫η²)(∫φ'²) = 2·8/3 + 8/3·2.
        assert!((k - 32.0 / 3.0).abs() < 1e-9 * 32.0 / 3.0, "{k}");
        for p in [1.2, 1.5, 2.0] {
            assert!(gradient_constant(&trap, &RadialProfile::new(trap, 1), p) > 0.0);
        }
    }

    #[test]
    fn single_bump_lr_norm() {
        let f = example();
        let k0 = f.k0();
        assert_eq!(k0, 5);
        for r in [1.0f64, 2.5, 4.0] {
            // c^r 2^{dαk0} 2 I_η(r) J_φ(r), and J_φ = I_η on the line.
            let i = 2.0 + 2.0 / (r + 1.0);
            let expect = (-0.5 * 2.0 * 5.0 / 2.0 * r).exp2() * (2.0 * 0.5 * 5.0f64).exp2() * 2.0 * i * i;
            let got = f.lr_norm(k0, r).unwrap();
            assert!((got / expect - 1.0).abs() < 1e-12, "r={r}: {got} vs {expect}");
        }
    }

    #[test]
    fn increments_approach_exponent() {
        let f = example();
        for (r, e) in [(3.0, 0.0), (4.0, -0.5)] {
            let inc = f.lr_norm_log2(41, r).unwrap() - f.lr_norm_log2(40, r).unwrap();
            assert!((inc - e).abs() < 0.02, "r={r}: {inc}");
        }
        let g = f.grad_lp_norm_log2(41).unwrap() - f.grad_lp_norm_log2(40).unwrap();
        assert!(g.abs() < 0.02, "{g}");
    }

    #[test]
    fn fits_match_exponents() {
        let f = example();
        for (r, e, tol) in [(2.5, 0.25, 0.05), (3.0, 0.0, 0.02), (6.0, -1.5, 0.05)] {
            let fit = scaling_fit(&f, r, 30, 44).unwrap();
            assert!((fit.slope - e).abs() <= tol, "r={r}: {fit:?}");
            assert_eq!(fit.predicted, e);
        }
        assert_eq!(scaling_fit(&f, 3.0, 30, 33), Err(Error::WindowTooShort { len: 4, min: 5 }));
    }

    #[test]
    fn sharpness_rows() {
        let f = example();
        let rows = sharpness_report(&f, &[2.5, 3.0, 4.0, 6.0], 30, 44).unwrap();
        assert!(rows.iter().all(|r| r.agrees));
        assert_eq!(rows[0].verdict, Verdict::BlowUp);
        assert!(rows[1..].iter().all(|r| r.verdict == Verdict::Bounded));
        assert!(sharpness_report(&f, &[], 30, 44).unwrap().is_empty());
    }

    #[test]
    fn morrey_small_radius_is_never_argmax() {
        let f = example();
        let m = f.morrey_sup(12).unwrap();
        assert!(m.scaled_radius > 0.5);
        assert!((m.bracket_ratio - 0.25f64.exp2()).abs() < 1e-12);
    }

    #[test]
    fn normalize_enforces_bounds() {
        let f = example();
        let ns: Vec<u32> = (15..=24).collect();
        let g = normalize(&f, &ns).unwrap();
        assert!(g.normalization() >= 1.0);
        for &n in &ns {
            assert!(g.grad_lp_norm(n).unwrap() <= 1.0);
            assert!(g.morrey_sup(n).unwrap().sup <= 1.0);
        }
        let a = scaling_fit(&f, 2.5, 15, 24).unwrap();
        let b = scaling_fit(&g, 2.5, 15, 24).unwrap();
        assert!((a.slope - b.slope).abs() < 1e-12);
        assert!(normalize(&f, &[]).is_err());
    }

    #[test]
    fn already_normalized_family_is_unchanged() {
        let f = example().with_normalization(1e6).unwrap();
        assert_eq!(normalize(&f, &[20, 21]).unwrap(), f);
        let g = normalize(&example(), &[20, 21]).unwrap();
        assert_eq!(normalize(&g, &[20, 21]).unwrap(), g);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn normalization_never_changes_slopes(s in 1.0f64..1e6, r in 1.0f64..8.0) {
            let f = example();
            let g = f.with_normalization(s).unwrap();
            let a = scaling_fit(&f, r, 30, 44).unwrap();
            let b = scaling_fit(&g, r, 30, 44).unwrap();
            prop_assert!((a.slope - b.slope).abs() < 1e-12);
        }

        #[test]
        fn fitted_slope_matches_algebra(q1 in 1.3f64..1.95, r in 1.0f64..8.0) {
            let ps = validate(2, 1.5, 2.0, q1, Mode::Counterexample).unwrap();
            let f = CexFamily::new(ps).unwrap();
            let lo = f.k0() + 30;
            let fit = scaling_fit(&f, r, lo, lo + 14).unwrap();
            let alt = ps.theta() + ps.alpha() * 2.0 - r * ps.alpha() * 2.0 / ps.q();
            prop_assert!((fit.slope - alt).abs() < 0.05, "{:?} vs {}", fit, alt);
        }
    }
}
