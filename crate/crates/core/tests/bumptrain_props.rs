use morreycex_core::bumptrain::{
    dense_morrey_sup, make_schedule, sigma_morrey_sup, verify_layout, Profile1D, SigmaTrain,
};
use proptest::prelude::*;

fn train(theta: f64, n: u32) -> SigmaTrain {
    SigmaTrain::new(make_schedule(theta, n).unwrap(), Profile1D::trapezoid())
}

#[test]
fn closed_norm_matches_quadrature() {
    for theta in [0.3, 0.5, 0.75] {
        let k0 = make_schedule(theta, 60).unwrap().k0();
        for n in k0..=14.max(k0 + 2) {
            let s = train(theta, n);
            if s.schedule().total_count() > 100_000 {
                continue;
            }
            for r in [1.0, 1.5, 2.0, 3.0] {
                let closed = s.lr_norm_closed(r).unwrap();
                let quad = s.lr_norm_quadrature(r, 1e-9).unwrap();
                assert!((closed - quad).abs() <= 1e-6 * closed, "θ={theta} n={n} r={r}");
            }
        }
    }
}

#[test]
fn mollified_closed_norm_matches_quadrature() {
    let s = SigmaTrain::new(make_schedule(0.5, 10).unwrap(), Profile1D::smooth_mollified(0.1));
    for r in [1.0, 2.0, 3.5] {
        let closed = s.lr_norm_closed(r).unwrap();
        let quad = s.lr_norm_quadrature(r, 1e-9).unwrap();
        assert!((closed - quad).abs() <= 1e-6 * closed, "r={r}: {closed} vs {quad}");
    }
}

#[test]
fn count_growth_tends_to_theta() {
    for n in 30..=100 {
        let a = make_schedule(0.5, n).unwrap().total_count() as f64;
        let b = make_schedule(0.5, n + 1).unwrap().total_count() as f64;
        assert!(((b / a).log2() - 0.5).abs() <= 0.02, "n={n}");
    }
}

#[test]
fn layout_holds_to_sixty() {
    for theta in [0.3, 0.5, 0.75] {
        let report = verify_layout(theta, 60).unwrap();
        assert!(report.containment && report.disjoint(), "{report:?}");
        // Brute check against the materialized centers where feasible.
        let s = make_schedule(theta, 26).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for b in s.blocks() {
            for j in 1..=b.count {
                let a = b.center(j);
                assert!(a > b.base + 2.0 && a < 2.0 * b.base - 2.0);
                assert!(a - prev >= 4.0);
                prev = a;
            }
        }
    }
}

#[test]
fn morrey_sup_bounded_across_n() {
    let sups: Vec<f64> = [20, 24, 28]
        .iter()
        .map(|&n| sigma_morrey_sup(&train(0.5, n), 1.5, 0.5).unwrap().sup)
        .collect();
    let max = sups.iter().copied().fold(0.0, f64::max);
    let min = sups.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(max / min <= 4.0, "{sups:?}");
}

#[test]
fn candidates_match_brute_force() {
    for (n, step) in [(5, 1.0 / 32.0), (8, 1.0 / 16.0), (12, 0.25), (20, 1.0)] {
        let s = train(0.5, n);
        let cand = sigma_morrey_sup(&s, 1.5, 0.5).unwrap();
        let brute = dense_morrey_sup(&s, 1.5, 0.5, step).unwrap();
        assert!(cand.sup >= brute.sup * (1.0 - 1e-9), "n={n}: {cand:?} < {brute:?}");
        assert!(cand.sup <= brute.sup * 1.05, "n={n}: {cand:?} vs {brute:?}");
    }
}

#[test]
fn single_bump_window_value() {
    let s = train(0.5, 5);
    let w = sigma_morrey_sup(&s, 1.0, 0.5).unwrap();
    assert!(w.sup >= 3.0 / 2f64.sqrt());
}

proptest! {
    #[test]
    fn sigma_is_even_and_bounded(t in -5000.0f64..5000.0, n in 5u32..13) {
        let s = train(0.5, n);
        let v = s.eval(t);
        prop_assert_eq!(v, s.eval(-t));
        prop_assert!((0.0..=1.0).contains(&v));
        if t.abs() >= f64::from(n).exp2() || t.abs() <= 16.0 {
            prop_assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn derivative_is_odd(t in 1.0f64..5000.0) {
        let s = train(0.5, 13);
        prop_assert_eq!(s.eval_prime(t), -s.eval_prime(-t));
    }
}
