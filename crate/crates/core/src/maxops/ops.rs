//! Discrete Hardy–Littlewood and sharp maximal functions over centered cube
//! windows, and the empirical Poincaré constant.
//!
//! A window of radius `ρ` (cells) around a cell spans `2ρ + 1` cells per
//! active axis and is clipped to the grid; averages always divide by the full
//! `(2ρ + 1)^d` cells, which is the zero extension of the field.

use rayon::prelude::*;

use super::field::GridField;
use super::sat::SummedArea;
use crate::error::{Error, Result};

/// Window radii in cells. The degenerate one-cell window (radius 0) is always
/// used in addition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowLattice {
    radii: Vec<usize>,
}

impl WindowLattice {
    /// `1, 2, 4, ...` up to `max_radius`.
    pub fn dyadic(max_radius: usize) -> Self {
        let radii = std::iter::successors(Some(1usize), |r| r.checked_mul(2))
            .take_while(|&r| r <= max_radius)
            .collect();
        Self { radii }
    }

    /// Rounded `2^{i/2}` up to `max_radius`, deduplicated.
    pub fn half_octave(max_radius: usize) -> Self {
        let mut radii: Vec<usize> = (0..)
            .map(|i| (f64::from(i) / 2.0).exp2().round() as usize)
            .take_while(|&r| r <= max_radius)
            .collect();
        radii.dedup();
        Self { radii }
    }

    /// Arbitrary radii; zero entries are dropped (radius 0 is implicit).
    pub fn with_radii(radii: &[usize]) -> Self {
        let mut radii: Vec<usize> = radii.iter().copied().filter(|&r| r > 0).collect();
        radii.sort_unstable();
        radii.dedup();
        Self { radii }
    }

    pub fn radii(&self) -> &[usize] {
        &self.radii
    }

    pub fn max_radius(&self) -> usize {
        self.radii.last().copied().unwrap_or(0)
    }

    pub fn check(&self, field: &GridField) -> Result<()> {
        let radius = self.max_radius();
        if radius > field.padding() {
            return Err(Error::RadiusExceedsPadding {
                radius,
                padding: field.padding(),
            });
        }
        Ok(())
    }
}

/// Clipped half-open window bounds and the full (unclipped) cell count.
pub(crate) fn window(shape: [usize; 3], dim: usize, idx: [usize; 3], rho: usize) -> ([usize; 3], [usize; 3], f64) {
    let mut lo = [0; 3];
    let mut hi = [1; 3];
    for a in 0..dim {
        lo[a] = idx[a].saturating_sub(rho);
        hi[a] = (idx[a] + rho + 1).min(shape[a]);
    }
    let full = ((2 * rho + 1) as f64).powi(dim as i32);
    (lo, hi, full)
}

fn window_cells(lo: [usize; 3], hi: [usize; 3]) -> usize {
    (0..3).map(|a| hi[a] - lo[a]).product()
}

/// `Σ_{window} |v - m|` by direct scan.
pub(crate) fn abs_deviation(field: &GridField, lo: [usize; 3], hi: [usize; 3], m: f64) -> f64 {
    let values = field.values();
    let mut acc = 0.0;
    for i in lo[0]..hi[0] {
        for j in lo[1]..hi[1] {
            let row = field.index([i, j, 0]);
            for &v in &values[row + lo[2]..row + hi[2]] {
                acc += (v - m).abs();
            }
        }
    }
    acc
}

/// `M f(x) = max(|f(x)|, max_ρ avg_{Q_ρ(x)} |f|)`.
pub fn hl_maximal(field: &GridField, lattice: &WindowLattice) -> Result<GridField> {
    lattice.check(field)?;
    let shape = field.shape3();
    let abs: Vec<f64> = field.values().iter().map(|v| v.abs()).collect();
    let sat = SummedArea::new(shape, &abs);
    let values = (0..field.len())
        .into_par_iter()
        .map(|i| {
            let idx = field.unravel(i);
            lattice.radii().iter().fold(abs[i], |best, &rho| {
                let (lo, hi, full) = window(shape, field.dim(), idx, rho);
                best.max(sat.sum(lo, hi) / full)
            })
        })
        .collect();
    Ok(field.with_values(values))
}

/// `M# f(x) = max_ρ avg_{Q_ρ(x)} |f - avg_{Q_ρ(x)} f|`; the one-cell window
/// contributes 0.
pub fn sharp_maximal(field: &GridField, lattice: &WindowLattice) -> Result<GridField> {
    lattice.check(field)?;
    let shape = field.shape3();
    let sat = SummedArea::new(shape, field.values());
    let values = (0..field.len())
        .into_par_iter()
        .map(|i| {
            let idx = field.unravel(i);
            lattice.radii().iter().fold(0.0f64, |best, &rho| {
                let (lo, hi, full) = window(shape, field.dim(), idx, rho);
                let m = sat.sum(lo, hi) / full;
                let outside = full - window_cells(lo, hi) as f64;
                let dev = abs_deviation(field, lo, hi, m) + outside * m.abs();
                best.max(dev / full)
            })
        })
        .collect();
    Ok(field.with_values(values))
}

/// Largest `avg_Q |u - avg_Q u| / (R avg_Q |∇u|)` over windows `Q` of the
/// lattice radii centered at the cells nearest to `sample_centers`, with `R`
/// the physical half-width `(ρ + 1/2) h`. Windows leaving the grid, and
/// windows with `avg |∇u| < 1e-14`, are skipped; an empty sample gives 0.
pub fn poincare_ratio(field: &GridField, lattice: &WindowLattice, sample_centers: &[Vec<f64>]) -> f64 {
    let shape = field.shape3();
    let dim = field.dim();
    let grad = field.gradient_magnitude();
    let sat_u = SummedArea::new(shape, field.values());
    let sat_g = SummedArea::new(shape, grad.values());
    sample_centers
        .par_iter()
        .map(|x| {
            let idx = field.locate(x);
            let mut best = 0.0f64;
            for &rho in lattice.radii() {
                let inside = (0..dim).all(|a| idx[a] >= rho && idx[a] + rho < shape[a]);
                if !inside {
                    continue;
                }
                let (lo, hi, full) = window(shape, dim, idx, rho);
                let mean_grad = sat_g.sum(lo, hi) / full;
                if mean_grad < 1e-14 {
                    continue;
                }
                let m = sat_u.sum(lo, hi) / full;
                let osc = abs_deviation(field, lo, hi, m) / full;
                let radius = (rho as f64 + 0.5) * field.h();
                best = best.max(osc / (radius * mean_grad));
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(values: &[f64], padding: usize) -> GridField {
        GridField::new(1, &[values.len()], &[0.0], 1.0, padding, values.to_vec()).unwrap()
    }

    fn brute_hl(v: &[f64], radii: &[usize]) -> Vec<f64> {
        let n = v.len() as isize;
        (0..n)
            .map(|i| {
                let mut best = v[i as usize].abs();
                for &r in radii {
                    let r = r as isize;
                    let s: f64 = (i - r..=i + r)
                        .map(|j| if j < 0 || j >= n { 0.0 } else { v[j as usize].abs() })
                        .sum();
                    best = best.max(s / (2 * r + 1) as f64);
                }
                best
            })
            .collect()
    }

    #[test]
    fn lattice_shapes() {
        assert_eq!(WindowLattice::dyadic(20).radii(), &[1, 2, 4, 8, 16]);
        assert_eq!(WindowLattice::dyadic(0).radii(), &[] as &[usize]);
        assert_eq!(WindowLattice::half_octave(8).radii(), &[1, 2, 3, 4, 6, 8]);
        assert_eq!(WindowLattice::with_radii(&[3, 0, 1, 3]).radii(), &[1, 3]);
    }

    #[test]
    fn radius_beyond_padding() {
        let f = line(&[0.0; 16], 2);
        assert_eq!(
            hl_maximal(&f, &WindowLattice::dyadic(4)),
            Err(Error::RadiusExceedsPadding { radius: 4, padding: 2 })
        );
    }

    #[test]
    fn spike_decays_like_one_over_window() {
        let mut v = vec![0.0; 64];
        v[32] = 1.0;
        let f = line(&v, 16);
        let radii: Vec<usize> = (1..=16).collect();
        let m = hl_maximal(&f, &WindowLattice::with_radii(&radii)).unwrap();
        for k in 1..=16usize {
            assert!((m.values()[32 + k] - 1.0 / (2 * k + 1) as f64).abs() < 1e-15);
        }
        let dy = hl_maximal(&f, &WindowLattice::dyadic(16)).unwrap();
        assert_eq!(dy.values(), brute_hl(&v, &[1, 2, 4, 8, 16]).as_slice());
    }

    #[test]
    fn constant_plateau() {
        let mut v = vec![0.0; 40];
        for x in &mut v[8..32] {
            *x = 2.0;
        }
        let f = line(&v, 8);
        let lat = WindowLattice::dyadic(4);
        let m = hl_maximal(&f, &lat).unwrap();
        assert!(m.values()[12..28].iter().all(|&x| x == 2.0));
        let s = sharp_maximal(&f, &lat).unwrap();
        assert!(s.values()[12..28].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn checkerboard_deviation() {
        let mut v = vec![0.0; 32];
        for (i, x) in v.iter_mut().enumerate().take(28).skip(4) {
            *x = if i % 2 == 0 { 1.0 } else { -1.0 };
        }
        let f = line(&v, 4);
        let s = sharp_maximal(&f, &WindowLattice::with_radii(&[1])).unwrap();
        for i in 6..26 {
            assert!((s.values()[i] - 8.0 / 9.0).abs() < 1e-15, "{i}: {}", s.values()[i]);
        }
    }

    #[test]
    fn poincare_ramp_is_geometric() {
        let f = GridField::from_fn(1, &[64], &[0.0], 0.5, 0, |x| 2.0 * x[0]).unwrap();
        let ratio = poincare_ratio(&f, &WindowLattice::with_radii(&[4]), &[vec![16.25]]);
        // Cells at offsets -4..=4 (times h), slope 2: mean |x - x̄| = 2h·20/9.
        let expect = (2.0 * 0.5 * 20.0 / 9.0) / (4.5 * 0.5 * 2.0);
        assert!((ratio - expect).abs() < 1e-12, "{ratio} vs {expect}");
        assert!(ratio < 1.0);
    }

    #[test]
    fn poincare_constant_is_skipped() {
        let f = GridField::from_fn(2, &[16, 16], &[0.0, 0.0], 1.0, 0, |_| 1.0).unwrap();
        assert_eq!(poincare_ratio(&f, &WindowLattice::dyadic(4), &[vec![8.0, 8.0]]), 0.0);
        assert_eq!(poincare_ratio(&f, &WindowLattice::dyadic(4), &[]), 0.0);
    }
}
