//! Dyadic-block offset schedule.
//!
//! Block `k` places `m_k = ⌊2^{θ(k-1)}⌋ - 3` bump centers
//! `a_{k,j} = 2^{k-1} + 1 + j g_k`, `1 <= j <= m_k`, with gap
//! `g_k = 2^{(1-θ)(k-1)}`. Blocks start at the first `k0` for which `m_k >= 1`
//! and `g_k >= 4`, which keeps all supports `[a - 2, a + 2]` disjoint and
//! inside `(2^{k-1}, 2^k)`. Nothing is materialized: blocks are computed on
//! demand from `(θ, k)`.

use crate::error::{Error, Result};
use crate::paramlab::THETA_MAX;

/// Largest `θ(n - 1)` accepted, so that every block count fits in a `u128`
/// after conversion from `f64`.
const MAX_LOG2_COUNT: f64 = 120.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub k: u32,
    /// `2^{k-1}`.
    pub base: f64,
    /// `g_k`.
    pub gap: f64,
    /// `m_k`.
    pub count: u128,
}

impl Block {
    pub fn new(theta: f64, k: u32) -> Self {
        let km1 = f64::from(k - 1);
        let raw = (theta * km1).exp2().floor();
        Block {
            k,
            base: km1.exp2(),
            gap: ((1.0 - theta) * km1).exp2(),
            count: if raw >= 3.0 { raw as u128 - 3 } else { 0 },
        }
    }

    /// `a_{k,j}`.
    pub fn center(&self, j: u128) -> f64 {
        self.base + 1.0 + j as f64 * self.gap
    }

    fn is_usable(&self) -> bool {
        self.count >= 1 && self.gap >= 4.0
    }
}

/// Smallest usable block start for `theta`.
pub fn minimal_k0(theta: f64) -> u32 {
    let guess = (1.0 + 2.0 / theta).ceil().max((1.0 + 2.0 / (1.0 - theta)).ceil()) as u32;
    let mut k = guess.max(2);
    while !Block::new(theta, k).is_usable() {
        k += 1;
    }
    while k > 2 && Block::new(theta, k - 1).is_usable() {
        k -= 1;
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetSchedule {
    theta: f64,
    n: u32,
    k0: u32,
}

/// Schedule for blocks `k0..=n` with the minimal `k0`.
pub fn make_schedule(theta: f64, n: u32) -> Result<OffsetSchedule> {
    OffsetSchedule::new(theta, n, None)
}

impl OffsetSchedule {
    /// `k0_override` must not undercut [`minimal_k0`].
    pub fn new(theta: f64, n: u32, k0_override: Option<u32>) -> Result<Self> {
        if !(theta > 0.0 && theta <= THETA_MAX) {
            return Err(Error::ThetaOutOfRange { theta, max: THETA_MAX });
        }
        let min = minimal_k0(theta);
        let k0 = match k0_override {
            Some(k0) if k0 < min => return Err(Error::BlockStartTooSmall { k0, min }),
            Some(k0) => k0,
            None => min,
        };
        if n < k0 {
            return Err(Error::NTooSmall { n, k0 });
        }
        if theta * f64::from(n - 1) > MAX_LOG2_COUNT {
            return Err(Error::NTooLarge { n, theta });
        }
        Ok(Self { theta, n, k0 })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k0(&self) -> u32 {
        self.k0
    }

    /// Block `k`; `None` outside `k0..=n`.
    pub fn block(&self, k: u32) -> Option<Block> {
        (self.k0..=self.n).contains(&k).then(|| Block::new(self.theta, k))
    }

    pub fn blocks(&self) -> impl Iterator<Item = Block> + '_ {
        (self.k0..=self.n).map(move |k| Block::new(self.theta, k))
    }

    /// `(k, j, a_{k,j})` for every bump, block by block.
    pub fn centers(&self) -> impl Iterator<Item = (u32, u128, f64)> + '_ {
        self.blocks()
            .flat_map(|b| (1..=b.count).map(move |j| (b.k, j, b.center(j))))
    }

    /// `N(n, θ) = Σ_{k=k0}^{n} m_k`.
    pub fn total_count(&self) -> u128 {
        self.blocks().map(|b| b.count).sum()
    }

    /// Same schedule with one more or fewer block.
    pub fn with_n(&self, n: u32) -> Result<Self> {
        Self::new(self.theta, n, Some(self.k0))
    }

    /// CSV rows `(theta, n, k, g_k, m_k)`.
    pub fn rows(&self) -> Vec<(f64, u32, u32, f64, u128)> {
        self.blocks()
            .map(|b| (self.theta, self.n, b.k, b.gap, b.count))
            .collect()
    }
}

/// `N(n, θ)` for the minimal block start.
pub fn total_count(schedule: &OffsetSchedule) -> u128 {
    schedule.total_count()
}

/// Outward-rounded bounds on offsets, checked block by block.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutReport {
    pub theta: f64,
    pub k0: u32,
    pub k_max: u32,
    /// Every `a_{k,j}` lies in `(2^{k-1} + 2, 2^k - 2)`.
    pub containment: bool,
    /// Lower bound on the smallest gap between consecutive centers of a block.
    pub min_within_gap: f64,
    /// Lower bound on the gap from the last center of block `k` to the first of `k + 1`.
    pub min_cross_gap: f64,
    pub first_failure: Option<u32>,
}

impl LayoutReport {
    pub fn disjoint(&self) -> bool {
        self.min_within_gap >= 4.0 && self.min_cross_gap >= 4.0
    }
}

fn down(x: f64) -> f64 {
    x.next_down()
}

fn up(x: f64) -> f64 {
    x.next_up()
}

/// Checks containment and disjointness for blocks `k0..=k_max` using interval
/// bounds: `exp2` is trusted to one ulp and widened by two.
pub fn verify_layout(theta: f64, k_max: u32) -> Result<LayoutReport> {
    let schedule = OffsetSchedule::new(theta, k_max, None)?;
    let mut report = LayoutReport {
        theta,
        k0: schedule.k0(),
        k_max,
        containment: true,
        min_within_gap: f64::INFINITY,
        min_cross_gap: f64::INFINITY,
        first_failure: None,
    };
    // exp2 of an exactly representable integer exponent is exact.
    let gap_bounds = |b: &Block| {
        let e = (1.0 - theta) * f64::from(b.k - 1);
        if e.fract() == 0.0 && e.exp2() == b.gap {
            (b.gap, b.gap)
        } else {
            (down(down(b.gap)), up(up(b.gap)))
        }
    };
    let count_bounds = |b: &Block| {
        let c = b.count as f64;
        if b.count < (1u128 << 53) {
            (c, c)
        } else {
            (down(c), up(c))
        }
    };

    let mut prev: Option<Block> = None;
    for b in schedule.blocks() {
        let (g_lo, g_hi) = gap_bounds(&b);
        let (_, m_hi) = count_bounds(&b);
        // a_{k,1} - 2^{k-1} = 1 + g > 2
        let first_ok = down(1.0 + g_lo) > 2.0;
        // a_{k,m} - 2^{k-1} + 2 = 3 + m g < 2^{k-1}
        let last_hi = up(up(m_hi * g_hi) + 3.0);
        let last_ok = last_hi < b.base;
        if !(first_ok && last_ok) {
            report.containment = false;
            report.first_failure.get_or_insert(b.k);
        }
        if b.count >= 2 {
            report.min_within_gap = report.min_within_gap.min(g_lo);
            if g_lo < 4.0 {
                report.first_failure.get_or_insert(b.k);
            }
        }
        if let Some(p) = prev {
            let (_, pg_hi) = gap_bounds(&p);
            let (_, pm_hi) = count_bounds(&p);
            // a_{k,1} - a_{k-1,m} = 2^{k-2} + g_k - m_{k-1} g_{k-1}
            let cross = down(down(p.base - up(pm_hi * pg_hi)) + g_lo);
            report.min_cross_gap = report.min_cross_gap.min(cross);
            if cross < 4.0 {
                report.first_failure.get_or_insert(b.k);
            }
        }
        prev = Some(b);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_theta_block_nine() {
        let s = make_schedule(0.5, 12).unwrap();
        let b = s.block(9).unwrap();
        assert_eq!(b.gap, 16.0);
        assert_eq!(b.count, 13);
        assert_eq!(b.center(1), 273.0);
        assert_eq!(b.center(13), 465.0);
    }

    #[test]
    fn half_theta_first_block() {
        let s = make_schedule(0.5, 12).unwrap();
        assert_eq!(s.k0(), 5);
        let b = s.block(5).unwrap();
        assert_eq!(b.gap, 4.0);
        assert_eq!(b.count, 1);
        assert_eq!(b.center(1), 21.0);
        assert!(b.center(1) > 18.0 && b.center(1) < 30.0);
        assert!(s.block(4).is_none());
        assert!(s.block(13).is_none());
    }

    #[test]
    fn n_below_k0() {
        assert_eq!(make_schedule(0.5, 4), Err(Error::NTooSmall { n: 4, k0: 5 }));
    }

    #[test]
    fn theta_bounds() {
        assert!(matches!(make_schedule(0.0, 20), Err(Error::ThetaOutOfRange { .. })));
        assert!(matches!(make_schedule(0.8, 20), Err(Error::ThetaOutOfRange { .. })));
        assert!(make_schedule(0.75, 20).is_ok());
    }

    #[test]
    fn k0_override() {
        assert_eq!(
            OffsetSchedule::new(0.5, 12, Some(4)),
            Err(Error::BlockStartTooSmall { k0: 4, min: 5 })
        );
        let s = OffsetSchedule::new(0.5, 12, Some(7)).unwrap();
        assert_eq!(s.k0(), 7);
        assert_eq!(s.total_count(), 5 + 8 + 13 + 19 + 29 + 42);
    }

    #[test]
    fn counts() {
        assert_eq!(make_schedule(0.5, 5).unwrap().total_count(), 1);
        assert_eq!(make_schedule(0.5, 9).unwrap().total_count(), 29);
        for &theta in &[0.3, 0.5, 0.75] {
            let s = make_schedule(theta, minimal_k0(theta)).unwrap();
            assert!(s.total_count() >= 1);
        }
    }

    #[test]
    fn minimal_k0_values() {
        assert_eq!(minimal_k0(0.5), 5);
        assert_eq!(minimal_k0(0.3), 8);
        assert_eq!(minimal_k0(0.75), 9);
    }

    #[test]
    fn centers_iterate_in_order() {
        let s = make_schedule(0.5, 9).unwrap();
        let c: Vec<f64> = s.centers().map(|(_, _, a)| a).collect();
        assert_eq!(c.len(), 29);
        assert!(c.windows(2).all(|w| w[1] - w[0] >= 4.0));
    }

    #[test]
    fn layout_large_k() {
        for &theta in &[0.3, 0.5, 0.75] {
            let r = verify_layout(theta, 60).unwrap();
            assert!(r.containment, "theta {theta}: {r:?}");
            assert!(r.disjoint(), "theta {theta}: {r:?}");
            assert_eq!(r.first_failure, None);
        }
    }

    #[test]
    fn too_large_n() {
        assert!(matches!(make_schedule(0.75, 200), Err(Error::NTooLarge { .. })));
        assert!(make_schedule(0.5, 200).is_ok());
    }
}
