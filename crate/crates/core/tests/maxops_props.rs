use morreycex_core::maxops::{
    hl_maximal, random_field, sharp_maximal, verify_holder_chain, verify_lemma1, verify_sobolev, GridField,
    SummandKind, TestFunctionSpec, WindowLattice,
};
use morreycex_core::paramlab::{validate, Mode};
use proptest::prelude::*;

const BOX2: [(f64, f64); 2] = [(-1.0, 1.0), (-1.0, 1.0)];

fn field2(seed: u64, cells: usize) -> GridField {
    random_field(&TestFunctionSpec::new(seed, 4, SummandKind::Gaussian), 2, &BOX2, &[cells, cells]).unwrap()
}

fn field1(values: Vec<f64>, padding: usize) -> GridField {
    GridField::new(1, &[values.len()], &[0.0], 1.0, padding, values).unwrap()
}

fn brute_1d(v: &[f64], radii: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let n = v.len() as isize;
    let at = |j: isize| if j < 0 || j >= n { 0.0 } else { v[j as usize] };
    let mut m = Vec::new();
    let mut sharp = Vec::new();
    for i in 0..n {
        let mut best_m = v[i as usize].abs();
        let mut best_s = 0.0f64;
        for &r in radii {
            let r = r as isize;
            let w = (2 * r + 1) as f64;
            let abs_sum: f64 = (i - r..=i + r).map(|j| at(j).abs()).sum();
            best_m = best_m.max(abs_sum / w);
            let mean: f64 = (i - r..=i + r).map(at).sum::<f64>() / w;
            let dev: f64 = (i - r..=i + r).map(|j| (at(j) - mean).abs()).sum();
            best_s = best_s.max(dev / w);
        }
        m.push(best_m);
        sharp.push(best_s);
    }
    (m, sharp)
}

fn padded_line() -> impl Strategy<Value = (Vec<f64>, usize)> {
    (4usize..=16, 8usize..=96).prop_flat_map(|(pad, inner)| {
        prop::collection::vec(-3.0f64..3.0, inner).prop_map(move |core| {
            let mut v = vec![0.0; pad];
            v.extend(core);
            v.extend(std::iter::repeat_n(0.0, pad));
            (v, pad)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prefix_sums_match_direct_scan((v, pad) in padded_line()) {
        prop_assume!(v.len() <= 128);
        let lattice = WindowLattice::dyadic(pad);
        let f = field1(v.clone(), pad);
        let m = hl_maximal(&f, &lattice).unwrap();
        let s = sharp_maximal(&f, &lattice).unwrap();
        let (bm, bs) = brute_1d(&v, lattice.radii());
        for i in 0..v.len() {
            prop_assert!((m.values()[i] - bm[i]).abs() <= 1e-13, "M at {}: {} vs {}", i, m.values()[i], bm[i]);
            prop_assert!((s.values()[i] - bs[i]).abs() <= 1e-13, "M# at {}: {} vs {}", i, s.values()[i], bs[i]);
        }
    }

    #[test]
    fn pointwise_operator_inequalities(seed_a in 0u64..1000, seed_b in 0u64..1000, c in 0.1f64..10.0) {
        let f = field2(seed_a, 64 + 32);
        let g = field2(seed_b, 64 + 32);
        let lattice = WindowLattice::dyadic(16);
        let mf = hl_maximal(&f, &lattice).unwrap();
        let mg = hl_maximal(&g, &lattice).unwrap();
        let mfg = hl_maximal(&f.add(&g).unwrap(), &lattice).unwrap();
        let sf = sharp_maximal(&f, &lattice).unwrap();
        let mcf = hl_maximal(&f.scale(c), &lattice).unwrap();
        let scf = sharp_maximal(&f.scale(c), &lattice).unwrap();
        let scale = c * mf.values().iter().copied().fold(0.0, f64::max);
        for i in 0..f.len() {
            let (a, b, ab) = (mf.values()[i], mg.values()[i], mfg.values()[i]);
            prop_assert!(a >= f.values()[i].abs());
            prop_assert!(ab <= a + b + 1e-12);
            prop_assert!(sf.values()[i] <= 2.0 * a + 1e-12);
            prop_assert!((mcf.values()[i] - c * a).abs() <= 1e-12 * scale);
            prop_assert!((scf.values()[i] - c * sf.values()[i]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn holder_slack_nonnegative(seed in 0u64..10_000, t in 0.0f64..=1.0) {
        let ps = validate(2, 1.5, 2.0, 1.5, Mode::Verification).unwrap();
        let f = field2(seed, 96);
        let range = ps.admissible_range();
        let r = range.lo + t * (range.hi - range.lo);
        let rep = verify_holder_chain(&f, &ps, r).unwrap();
        prop_assert!(rep.slack >= -1e-12 * rep.bound, "{:?}", rep);
    }

    #[test]
    fn ratios_are_amplitude_invariant(seed in 0u64..10_000, c in 0.01f64..100.0) {
        let ps = validate(2, 1.5, 2.0, 1.5, Mode::Verification).unwrap();
        let f = field2(seed, 96);
        let a = verify_lemma1(&f, &ps).unwrap();
        let b = verify_lemma1(&f.scale(c), &ps).unwrap();
        prop_assert!((a.ratio / b.ratio - 1.0).abs() <= 1e-10);
        let sa = verify_sobolev(&f, &ps).unwrap();
        let sb = verify_sobolev(&f.scale(c), &ps).unwrap();
        prop_assert!((sa / sb - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn sharp_maximal_ignores_added_constant_in_the_interior() {
    let f = field2(5, 96);
    let pad = f.padding();
    let lattice = WindowLattice::dyadic(8);
    let shifted: Vec<f64> = (0..f.len())
        .map(|i| {
            let idx = f.unravel(i);
            let inside = (0..2).all(|a| idx[a] >= pad && idx[a] < 96 - pad);
            f.values()[i] + if inside { 2.5 } else { 0.0 }
        })
        .collect();
    let g = GridField::new(2, &[96, 96], &[-1.0, -1.0], f.h(), pad, shifted).unwrap();
    let sf = sharp_maximal(&f, &lattice).unwrap();
    let sg = sharp_maximal(&g, &lattice).unwrap();
    let reach = pad + lattice.max_radius();
    for i in 0..f.len() {
        let idx = f.unravel(i);
        if (0..2).all(|a| idx[a] >= reach && idx[a] < 96 - reach) {
            assert!((sf.values()[i] - sg.values()[i]).abs() < 1e-12);
        }
    }
}

#[test]
fn constant_block_has_zero_oscillation() {
    let mut v = vec![0.0; 64];
    for x in &mut v[8..56] {
        *x = 1.75;
    }
    let f = field1(v, 8);
    let s = sharp_maximal(&f, &WindowLattice::dyadic(8)).unwrap();
    assert!(s.values()[16..48].iter().all(|&x| x == 0.0));
}

#[test]
fn sobolev_ratio_is_dilation_invariant() {
    // u(x) and u(x/2) sampled at the same number of cells per unit feature.
    let ps = validate(2, 1.5, 2.0, 1.5, Mode::Verification).unwrap();
    let bump = |x: &[f64]| (-(x[0] * x[0] + 0.5 * x[1] * x[1]) / 0.04).exp() * (1.0 + 0.3 * x[0]);
    let small = GridField::from_fn(2, &[256, 256], &[-1.0, -1.0], 2.0 / 256.0, 16, bump).unwrap();
    let large = GridField::from_fn(2, &[512, 512], &[-2.0, -2.0], 4.0 / 512.0, 32, |x| bump(&[x[0] / 2.0, x[1] / 2.0]))
        .unwrap();
    let a = verify_sobolev(&small, &ps).unwrap();
    let b = verify_sobolev(&large, &ps).unwrap();
    assert!((a / b - 1.0).abs() <= 0.02, "{a} vs {b}");
}
