//! Morrey-type suprema `sup_{t0, ρ} w(ρ) ρ^{-θ} ∫_{t0-ρ}^{t0+ρ} σ_n^r`.
//!
//! Window integrals are exact: fully covered bumps contribute `∫η^r` each
//! (counted by index arithmetic, whole blocks through a prefix table), and the
//! at most two bumps cut by the window ends contribute a partial moment.
//!
//! The supremum is searched over a structured candidate set: centers at the
//! origin, at block midpoints and at bump centers (all of them for small
//! trains, an even subsample per block otherwise) together with midpoints of
//! neighbouring bumps; radii on a geometric grid of ratio `2^{1/8}` up to
//! `2^{n+1}`. The best candidates are then polished by a pattern search over
//! the window endpoints. [`dense_morrey_sup`] is the brute-force fallback.

use rayon::prelude::*;

use super::schedule::Block;
use super::train::{block_index, SigmaTrain};
use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, QuadOptions};

/// Trains up to this many bumps (one side) use every bump center as a candidate.
const FULL_CENTER_LIMIT: u128 = 4096;
/// Per-block center subsample otherwise.
const CENTERS_PER_BLOCK: u128 = 32;
const RADIUS_STEPS_PER_OCTAVE: i32 = 8;
const REFINE_TOP: usize = 12;
/// Largest `n` accepted by the dense fallback.
pub const DENSE_MAX_N: u32 = 20;
const DENSE_LINEAR_RADII: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowArgmax {
    pub sup: f64,
    pub center: f64,
    pub radius: f64,
}

/// Exact window integrals of `σ_n^r` for a fixed exponent.
#[derive(Debug, Clone)]
pub struct WindowMass<'a> {
    train: &'a SigmaTrain,
    r: f64,
    moment: f64,
    // cumulative[i] = Σ counts of blocks k0 .. k0+i-1
    cumulative: Vec<f64>,
}

impl<'a> WindowMass<'a> {
    pub fn new(train: &'a SigmaTrain, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::NonPositiveR(r));
        }
        let moment = train.profile().moment(r)?;
        let mut cumulative = vec![0.0];
        let mut acc = 0.0;
        for b in train.schedule().blocks() {
            acc += b.count as f64;
            cumulative.push(acc);
        }
        Ok(Self {
            train,
            r,
            moment,
            cumulative,
        })
    }

    pub fn train(&self) -> &SigmaTrain {
        self.train
    }

    /// `∫_lo^hi σ_n^r`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        let mut total = self.positive_mass(lo.max(0.0), hi.max(0.0));
        if self.train.is_symmetrized() {
            total += self.positive_mass((-hi).max(0.0), (-lo).max(0.0));
        }
        total
    }

    fn blocks_between(&self, k_first: u32, k_last: u32) -> f64 {
        if k_last < k_first {
            return 0.0;
        }
        let k0 = self.train.schedule().k0();
        self.cumulative[(k_last - k0 + 1) as usize] - self.cumulative[(k_first - k0) as usize]
    }

    /// `∫_a^b χ_n^r` for `0 <= a <= b`.
    fn positive_mass(&self, a: f64, b: f64) -> f64 {
        if !(b > a) {
            return 0.0;
        }
        let sched = self.train.schedule();
        let (k0, n) = (sched.k0(), sched.n());
        let ka = block_index(a).unwrap_or(0).max(k0);
        let kb = block_index(b).unwrap_or(0).min(n);
        if kb < k0 || ka > n || ka > kb {
            return 0.0;
        }
        if ka == kb {
            return self.block_mass(&Block::new(sched.theta(), ka), a, b);
        }
        self.block_mass(&Block::new(sched.theta(), ka), a, b)
            + self.moment * self.blocks_between(ka + 1, kb - 1)
            + self.block_mass(&Block::new(sched.theta(), kb), a, b)
    }

    /// Mass of block `blk` inside `[a, b]`.
    fn block_mass(&self, blk: &Block, a: f64, b: f64) -> f64 {
        let m = blk.count as f64;
        let index = |x: f64| (x - blk.base - 1.0) / blk.gap;
        let full_lo = index(a + 2.0).ceil().max(1.0);
        let full_hi = index(b - 2.0).floor().min(m);
        let full = (full_hi - full_lo + 1.0).max(0.0);
        let mut total = full * self.moment;
        let is_full = |j: f64| full > 0.0 && j >= full_lo && j <= full_hi;

        let ja = index(a).round().clamp(1.0, m);
        let jb = index(b).round().clamp(1.0, m);
        for (i, &j) in [ja, jb].iter().enumerate() {
            if i == 1 && j == ja {
                break;
            }
            if is_full(j) {
                continue;
            }
            let c = blk.center(j as u128);
            if b > c - 2.0 && a < c + 2.0 {
                total += self.train.profile().partial_moment(self.r, a - c, b - c);
            }
        }
        total
    }
}

/// Window value `w(ρ) ρ^{-θ} mass`, as used by the searches.
fn window_value<W: Fn(f64) -> f64>(wm: &WindowMass, theta: f64, weight: &W, lo: f64, hi: f64) -> f64 {
    let rho = 0.5 * (hi - lo);
    if !(rho > 0.0) {
        return 0.0;
    }
    let m = wm.mass(lo, hi);
    if m == 0.0 {
        return 0.0;
    }
    weight(rho) * rho.powf(-theta) * m
}

fn candidate_centers(train: &SigmaTrain) -> Vec<f64> {
    let sched = train.schedule();
    let mut centers = vec![0.0];
    let all = sched.total_count() <= FULL_CENTER_LIMIT;
    let mut prev_last: Option<f64> = None;
    for b in sched.blocks() {
        centers.push(1.5 * b.base);
        let js: Vec<u128> = if all || b.count <= CENTERS_PER_BLOCK {
            (1..=b.count).collect()
        } else {
            let mut v: Vec<u128> = (0..CENTERS_PER_BLOCK)
                .map(|i| 1 + i * (b.count - 1) / (CENTERS_PER_BLOCK - 1))
                .collect();
            v.dedup();
            v
        };
        for &j in &js {
            let c = b.center(j);
            centers.push(c);
            if j < b.count {
                centers.push(c + 0.5 * b.gap);
            }
        }
        if let Some(last) = prev_last {
            centers.push(0.5 * (last + b.center(1)));
        }
        prev_last = Some(b.center(b.count));
    }
    centers
}

fn radius_grid(n: u32) -> Vec<f64> {
    let top = RADIUS_STEPS_PER_OCTAVE * (n as i32 + 1);
    (-RADIUS_STEPS_PER_OCTAVE..=top)
        .map(|i| (f64::from(i) / f64::from(RADIUS_STEPS_PER_OCTAVE)).exp2())
        .collect()
}

/// Pattern search over window endpoints `(lo, hi)`, starting from a candidate.
fn polish<W: Fn(f64) -> f64>(wm: &WindowMass, theta: f64, weight: &W, start: WindowArgmax) -> WindowArgmax {
    const DIRS: [(f64, f64); 8] = [
        (1.0, 0.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (1.0, 1.0),
        (-1.0, -1.0),
        (-1.0, 1.0),
        (1.0, -1.0),
    ];
    let mut lo = start.center - start.radius;
    let mut hi = start.center + start.radius;
    let mut best = window_value(wm, theta, weight, lo, hi);
    let mut step = (0.1 * start.radius).max(0.25);
    let floor = 1e-10 * hi.abs().max(1.0);
    let mut iters = 0;
    while step > floor && iters < 20_000 {
        iters += 1;
        let mut moved = false;
        for (dl, dh) in DIRS {
            let (l, h) = (lo + dl * step, hi + dh * step);
            if h <= l {
                continue;
            }
            let v = window_value(wm, theta, weight, l, h);
            if v > best {
                best = v;
                lo = l;
                hi = h;
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    WindowArgmax {
        sup: best,
        center: 0.5 * (lo + hi),
        radius: 0.5 * (hi - lo),
    }
}

/// Candidate search plus polishing for `sup w(ρ) ρ^{-θ} ∫_window σ_n^r`.
pub fn weighted_morrey_sup<W>(train: &SigmaTrain, r: f64, theta: f64, weight: W) -> Result<WindowArgmax>
where
    W: Fn(f64) -> f64 + Sync,
{
    let wm = WindowMass::new(train, r)?;
    let radii = radius_grid(train.schedule().n());
    let factors: Vec<f64> = radii.iter().map(|&rho| weight(rho) * rho.powf(-theta)).collect();
    let centers = candidate_centers(train);

    let mut per_center: Vec<WindowArgmax> = centers
        .par_iter()
        .map(|&c| {
            let mut best = WindowArgmax {
                sup: 0.0,
                center: c,
                radius: radii[0],
            };
            for (&rho, &f) in radii.iter().zip(&factors) {
                let v = f * wm.mass(c - rho, c + rho);
                if v > best.sup {
                    best = WindowArgmax {
                        sup: v,
                        center: c,
                        radius: rho,
                    };
                }
            }
            best
        })
        .collect();
    // Stable sort keeps ties in candidate order, so results are reproducible.
    per_center.sort_by(|a, b| b.sup.total_cmp(&a.sup));
    per_center.truncate(REFINE_TOP);

    let polished: Vec<WindowArgmax> = per_center
        .par_iter()
        .map(|&start| polish(&wm, theta, &weight, start))
        .collect();
    Ok(polished
        .into_iter()
        .fold(None::<WindowArgmax>, |acc, w| match acc {
            Some(a) if a.sup >= w.sup => Some(a),
            _ => Some(w),
        })
        .unwrap_or(WindowArgmax {
            sup: 0.0,
            center: 0.0,
            radius: 1.0,
        }))
}

/// `sup_{t0, ρ} ρ^{-θ} ∫_{t0-ρ}^{t0+ρ} σ_n^r` with its maximizing window.
pub fn sigma_morrey_sup(train: &SigmaTrain, r: f64, theta: f64) -> Result<WindowArgmax> {
    weighted_morrey_sup(train, r, theta, |_| 1.0)
}

/// Brute-force supremum over a lattice of windows.
///
/// `∫σ_n^r` is tabulated cumulatively on a grid of spacing `step` by adaptive
/// quadrature of pointwise values, independently of [`WindowMass`]. Window
/// centers are all grid points `t0 >= 0` (σ is even); radii are every multiple
/// of `step` up to `256 step`, then multiples of `step` nearest to a
/// `2^{1/64}`-geometric grid up to `2^{n+1}`. Only for `n <= DENSE_MAX_N`.
pub fn dense_morrey_sup(train: &SigmaTrain, r: f64, theta: f64, step: f64) -> Result<WindowArgmax> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveR(r));
    }
    let n = train.schedule().n();
    if n > DENSE_MAX_N {
        return Err(Error::TooManyBumps {
            count: train.schedule().total_count(),
            limit: super::train::QUADRATURE_BUMP_LIMIT,
        });
    }
    if !(step > 0.0) {
        return Err(Error::BadTolerance(step));
    }
    let extent = f64::from(n).exp2() + 4.0;
    let half_cells = (extent / step).ceil() as usize;
    let cells = 2 * half_cells;
    let x = |i: usize| -extent + step * i as f64;

    // Breakpoints: every bump support edge and kink.
    let mut kinks: Vec<f64> = Vec::new();
    let offsets = train.profile().breakpoints();
    for (_, _, c) in train.schedule().centers() {
        for o in &offsets {
            kinks.push(c + o);
            if train.is_symmetrized() {
                kinks.push(-c - o);
            }
        }
    }
    kinks.sort_by(f64::total_cmp);

    let opts = QuadOptions {
        rel_tol: 1e-12,
        abs_tol: 1e-15,
        max_intervals: 200,
    };
    let cell_mass: Vec<f64> = (0..cells)
        .into_par_iter()
        .map(|i| {
            let (a, b) = (x(i), x(i + 1));
            let start = kinks.partition_point(|&k| k <= a);
            let end = kinks.partition_point(|&k| k < b);
            let mut pts = vec![a];
            pts.extend_from_slice(&kinks[start..end]);
            pts.push(b);
            integrate_with_breaks(|t| train.eval(t).powf(r), &pts, opts).value
        })
        .collect();
    let mut cumulative = Vec::with_capacity(cells + 1);
    cumulative.push(0.0);
    let mut acc = 0.0;
    for m in &cell_mass {
        acc += m;
        cumulative.push(acc);
    }

    let max_radius_cells = ((f64::from(n + 1).exp2()) / step).ceil() as usize;
    let mut radii: Vec<usize> = (1..=DENSE_LINEAR_RADII.min(max_radius_cells)).collect();
    let mut k = DENSE_LINEAR_RADII as f64;
    while k < max_radius_cells as f64 {
        k *= (1.0f64 / 64.0).exp2();
        let cells = (k.round() as usize).min(max_radius_cells);
        if cells > *radii.last().unwrap() {
            radii.push(cells);
        }
    }
    let factors: Vec<f64> = radii.iter().map(|&k| (step * k as f64).powf(-theta)).collect();
    let best = (half_cells..=cells)
        .into_par_iter()
        .map(|c| {
            let mut best = WindowArgmax {
                sup: 0.0,
                center: x(c),
                radius: step,
            };
            for (&k, &f) in radii.iter().zip(&factors) {
                let lo = c.saturating_sub(k);
                let hi = (c + k).min(cells);
                let v = f * (cumulative[hi] - cumulative[lo]);
                if v > best.sup {
                    best = WindowArgmax {
                        sup: v,
                        center: x(c),
                        radius: step * k as f64,
                    };
                }
            }
            best
        })
        .reduce_with(|a, b| if b.sup > a.sup { b } else { a })
        .expect("nonempty center range");
    Ok(best)
}
