//! Seeded random test fields: sums of Gaussians or scaled bumps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::GridField;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummandKind {
    /// `a exp(-|x - c|² / w²)`, kept `6w` away from the padding.
    Gaussian,
    /// `a exp(1 - 1/(1 - |x - c|²/w²))` inside `|x - c| < w`.
    ScaledBump,
}

impl SummandKind {
    fn margin(self, width: f64) -> f64 {
        match self {
            SummandKind::Gaussian => 6.0 * width,
            SummandKind::ScaledBump => width,
        }
    }

    fn eval(self, r2: f64) -> f64 {
        match self {
            SummandKind::Gaussian => (-r2).exp(),
            SummandKind::ScaledBump if r2 < 1.0 => (1.0 - 1.0 / (1.0 - r2)).exp(),
            SummandKind::ScaledBump => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionSpec {
    pub seed: u64,
    pub count: usize,
    pub kind: SummandKind,
    /// Width range (physical units).
    pub width: (f64, f64),
    /// Amplitude magnitude range; signs are drawn at random.
    pub amplitude: (f64, f64),
    /// Zero margin in cells.
    pub padding: usize,
}

impl TestFunctionSpec {
    pub fn new(seed: u64, count: usize, kind: SummandKind) -> Self {
        Self {
            seed,
            count,
            kind,
            width: (0.04, 0.1),
            amplitude: (0.5, 1.5),
            padding: 16,
        }
    }
}

#[derive(Debug, Clone)]
struct Summand {
    center: [f64; 3],
    width: f64,
    amplitude: f64,
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

/// Deterministic in `spec.seed`. `bounds` are per-axis `(lo, hi)`; the cell
/// size must come out the same on every axis.
pub fn random_field(
    spec: &TestFunctionSpec,
    dim: usize,
    bounds: &[(f64, f64)],
    cells: &[usize],
) -> Result<GridField> {
    if !(1..=3).contains(&dim) {
        return Err(Error::UnsupportedDim(dim));
    }
    if bounds.len() != dim || cells.len() != dim {
        return Err(Error::InvalidGrid(format!(
            "expected {dim} bounds and extents, got {} and {}",
            bounds.len(),
            cells.len()
        )));
    }
    if cells.contains(&0) {
        return Err(Error::InvalidGrid("zero extent".into()));
    }
    let h = (bounds[0].1 - bounds[0].0) / cells[0] as f64;
    for a in 1..dim {
        let ha = (bounds[a].1 - bounds[a].0) / cells[a] as f64;
        if (ha - h).abs() > 1e-12 * h.abs() {
            return Err(Error::InvalidGrid(format!("cell size {ha} on axis {a} differs from {h}")));
        }
    }
    let pad = spec.padding as f64 * h;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut summands = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        let width = uniform(&mut rng, spec.width);
        let mut amplitude = uniform(&mut rng, spec.amplitude);
        if rng.gen::<bool>() {
            amplitude = -amplitude;
        }
        let margin = spec.kind.margin(width);
        let mut center = [0.0; 3];
        for a in 0..dim {
            let lo = bounds[a].0 + pad + margin;
            let hi = bounds[a].1 - pad - margin;
            if !(hi > lo) {
                return Err(Error::InvalidGrid(format!(
                    "width {width} leaves no room for centers on axis {a}"
                )));
            }
            center[a] = uniform(&mut rng, (lo, hi));
        }
        summands.push(Summand {
            center,
            width,
            amplitude,
        });
    }

    let lower: Vec<f64> = bounds.iter().map(|b| b.0).collect();
    let kind = spec.kind;
    GridField::from_fn(dim, cells, &lower, h, spec.padding, |x| {
        summands
            .iter()
            .map(|s| {
                let r2: f64 = (0..dim).map(|a| (x[a] - s.center[a]).powi(2)).sum::<f64>() / (s.width * s.width);
                s.amplitude * kind.eval(r2)
            })
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOX2: [(f64, f64); 2] = [(-1.0, 1.0), (-1.0, 1.0)];

    #[test]
    fn zero_summands_give_zero_field() {
        let f = random_field(&TestFunctionSpec::new(7, 0, SummandKind::Gaussian), 2, &BOX2, &[128, 128]).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn same_seed_same_bits() {
        let spec = TestFunctionSpec::new(7, 3, SummandKind::Gaussian);
        let a = random_field(&spec, 2, &BOX2, &[128, 128]).unwrap();
        let b = random_field(&spec, 2, &BOX2, &[128, 128]).unwrap();
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = random_field(&TestFunctionSpec::new(8, 3, SummandKind::Gaussian), 2, &BOX2, &[128, 128]).unwrap();
        assert!(a.values().iter().zip(c.values()).any(|(x, y)| x != y));
    }

    #[test]
    fn bumps_respect_padding() {
        let mut spec = TestFunctionSpec::new(3, 5, SummandKind::ScaledBump);
        spec.padding = 8;
        let f = random_field(&spec, 1, &[(0.0, 2.0)], &[128]).unwrap();
        assert!(f.zero_margin() >= 8);
        assert!(!f.is_zero());
    }

    #[test]
    fn errors() {
        let spec = TestFunctionSpec::new(1, 1, SummandKind::Gaussian);
        assert_eq!(random_field(&spec, 4, &[(0.0, 1.0); 4], &[8; 4]), Err(Error::UnsupportedDim(4)));
        assert!(random_field(&spec, 2, &[(0.0, 1.0), (0.0, 2.0)], &[16, 16]).is_err());
        let mut wide = spec.clone();
        wide.width = (1.0, 1.0);
        assert!(random_field(&wide, 1, &[(0.0, 1.0)], &[64]).is_err());
    }
}
