use morreycex_core::paramlab::{validate, ExactParams, Mode, ParamSet};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

/// Valid Verification-mode parameters on a dyadic lattice (exact in `f64`).
fn dyadic_params() -> impl Strategy<Value = ParamSet> {
    (2u32..=6, 1u32..=63, 1u32..=63, 0u32..=64).prop_filter_map("out of range", |(d, pi, qi, q1i)| {
        let df = f64::from(d);
        let p = 1.0 + (df - 1.0) * f64::from(pi) / 64.0;
        let q_hi = p * df / (df - p);
        let q = 1.0 + (q_hi - 1.0) * f64::from(qi) / 64.0;
        let q = (q * 64.0).floor() / 64.0;
        let q1 = 1.0 + (q - 1.0) * f64::from(q1i) / 64.0;
        let q1 = (q1 * 64.0).floor() / 64.0;
        validate(d, p, q, q1, Mode::Verification).ok()
    })
}

fn generic_params() -> impl Strategy<Value = ParamSet> {
    (2u32..=8, 0.001f64..0.999, 0.001f64..0.999, 0.0f64..=1.0).prop_filter_map("out of range", |(d, a, b, c)| {
        let df = f64::from(d);
        let p = 1.0 + (df - 1.0) * a;
        let q = 1.0 + (p * df / (df - p) - 1.0) * b;
        let q1 = 1.0 + (q - 1.0) * c;
        validate(d, p, q, q1, Mode::Verification).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn exponent_forms_agree(ps in generic_params(), r in 0.01f64..50.0) {
        let e = ps.scaling_exponent(r).unwrap();
        let d = f64::from(ps.d());
        let alt = ps.theta() + ps.alpha() * d - r * ps.alpha() * d / ps.q();
        prop_assert!((e - alt).abs() <= 1e-12 * e.abs().max(alt.abs()).max(1.0), "{} vs {}", e, alt);
    }

    #[test]
    fn admissible_range_nonempty(ps in generic_params()) {
        let range = ps.admissible_range();
        prop_assert!(range.lo < range.hi);
        prop_assert!(range.contains(ps.r_low()) && range.contains(ps.sobolev_exp()));
    }

    #[test]
    fn exponent_decreases_when_q1_below_q(ps in generic_params(), r in 0.01f64..20.0, dr in 0.01f64..5.0) {
        prop_assume!(ps.q1() < ps.q());
        prop_assert!(ps.scaling_exponent(r + dr).unwrap() < ps.scaling_exponent(r).unwrap());
    }

    #[test]
    fn exact_zero_at_r_low(ps in dyadic_params()) {
        let ex = ExactParams::new(&ps);
        prop_assert!(ExactParams::is_zero(&ex.scaling_exponent(&ex.r_low())));
        prop_assert!(ExactParams::is_zero(&ex.gradient_cancellation()));
        let r = ex.r_low() + BigRational::one();
        prop_assert_eq!(ex.scaling_exponent(&r), ex.scaling_exponent_alt(&r));
        prop_assert!(ex.r_low() < ex.sobolev_exp() || ex.theta().is_zero());
    }
}

#[test]
fn example_values_are_exact() {
    let ps = validate(2, 1.5, 2.0, 1.5, Mode::Counterexample).unwrap();
    let ex = ExactParams::new(&ps);
    let half = BigRational::new(1.into(), 2.into());
    assert_eq!(ex.theta(), half);
    assert_eq!(ex.alpha(), half);
    assert_eq!(ex.r_low(), BigRational::from_integer(3.into()));
    assert_eq!(ex.sobolev_exp(), BigRational::from_integer(6.into()));
    for (r, e) in [(2.5, 0.25), (3.0, 0.0), (4.0, -0.5), (6.0, -1.5)] {
        let rr = BigRational::from_float(r).unwrap();
        assert_eq!(ExactParams::to_f64(&ex.scaling_exponent(&rr)), e);
    }
}
