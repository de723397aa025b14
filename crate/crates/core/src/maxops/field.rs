//! Uniform-grid fields on boxes in 1, 2 or 3 dimensions.
//!
//! Storage is always three-dimensional and row-major, with extent 1 along the
//! unused trailing axes, so every operator is written once.

use std::io::{self, Read, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::export::{fmt_f64, Table};

/// Smallest accepted extent along an active axis.
pub const MIN_EXTENT: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    dim: usize,
    shape: [usize; 3],
    lower: [f64; 3],
    h: f64,
    padding: usize,
    values: Vec<f64>,
}

fn check_shape(dim: usize, shape: &[usize], lower: &[f64], h: f64) -> Result<[usize; 3]> {
    if !(1..=3).contains(&dim) {
        return Err(Error::UnsupportedDim(dim));
    }
    if shape.len() != dim || lower.len() != dim {
        return Err(Error::InvalidGrid(format!(
            "expected {dim} extents and lower corners, got {} and {}",
            shape.len(),
            lower.len()
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidGrid(format!("cell size {h} must be positive")));
    }
    if let Some(&n) = shape.iter().find(|&&n| n < MIN_EXTENT) {
        return Err(Error::InvalidGrid(format!("extent {n} below {MIN_EXTENT}")));
    }
    let mut s = [1; 3];
    s[..dim].copy_from_slice(shape);
    Ok(s)
}

impl GridField {
    /// Validates the grid and checks that the `padding` outer layers vanish.
    pub fn new(
        dim: usize,
        shape: &[usize],
        lower: &[f64],
        h: f64,
        padding: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        let s = check_shape(dim, shape, lower, h)?;
        if values.len() != s.iter().product::<usize>() {
            return Err(Error::InvalidGrid(format!(
                "{} values for shape {shape:?}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value {v}")));
        }
        if 2 * padding >= *shape.iter().min().unwrap() {
            return Err(Error::InvalidGrid(format!("padding {padding} leaves no interior")));
        }
        let mut lo = [0.0; 3];
        lo[..dim].copy_from_slice(lower);
        let field = Self {
            dim,
            shape: s,
            lower: lo,
            h,
            padding,
            values,
        };
        if field.padding_layer_nonzero() {
            return Err(Error::InvalidGrid(format!(
                "nonzero values inside the {padding}-cell padding"
            )));
        }
        Ok(field)
    }

    pub fn zeros(dim: usize, shape: &[usize], lower: &[f64], h: f64, padding: usize) -> Result<Self> {
        let s = check_shape(dim, shape, lower, h)?;
        Self::new(dim, shape, lower, h, padding, vec![0.0; s.iter().product()])
    }

    /// Samples `f` at cell centers; the padding layers are set to zero.
    pub fn from_fn<F>(dim: usize, shape: &[usize], lower: &[f64], h: f64, padding: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let mut field = Self::zeros(dim, shape, lower, h, padding)?;
        let values: Vec<f64> = (0..field.len())
            .into_par_iter()
            .map(|i| {
                let idx = field.unravel(i);
                if field.in_padding(idx) {
                    0.0
                } else {
                    f(&field.center(idx)[..dim])
                }
            })
            .collect();
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value {v}")));
        }
        field.values = values;
        Ok(field)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Extents of the active axes.
    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.dim]
    }

    pub(crate) fn shape3(&self) -> [usize; 3] {
        self.shape
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower[..self.dim]
    }

    pub fn upper(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|a| self.lower[a] + self.shape[a] as f64 * self.h)
            .collect()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn padding(&self) -> usize {
        self.padding
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    pub fn index(&self, idx: [usize; 3]) -> usize {
        (idx[0] * self.shape[1] + idx[1]) * self.shape[2] + idx[2]
    }

    pub fn unravel(&self, i: usize) -> [usize; 3] {
        let k = i % self.shape[2];
        let rest = i / self.shape[2];
        [rest / self.shape[1], rest % self.shape[1], k]
    }

    pub fn get(&self, idx: [usize; 3]) -> f64 {
        self.values[self.index(idx)]
    }

    /// Physical center of a cell; unused axes are 0.
    pub fn center(&self, idx: [usize; 3]) -> [f64; 3] {
        let mut c = [0.0; 3];
        for a in 0..self.dim {
            c[a] = self.lower[a] + (idx[a] as f64 + 0.5) * self.h;
        }
        c
    }

    /// Nearest cell to a physical point, clamped to the grid.
    pub fn locate(&self, x: &[f64]) -> [usize; 3] {
        let mut idx = [0; 3];
        for a in 0..self.dim {
            let i = ((x[a] - self.lower[a]) / self.h - 0.5).round();
            idx[a] = i.clamp(0.0, (self.shape[a] - 1) as f64) as usize;
        }
        idx
    }

    pub(crate) fn in_padding(&self, idx: [usize; 3]) -> bool {
        (0..self.dim).any(|a| idx[a] < self.padding || idx[a] >= self.shape[a] - self.padding)
    }

    fn padding_layer_nonzero(&self) -> bool {
        self.padding > 0
            && (0..self.len()).any(|i| self.values[i] != 0.0 && self.in_padding(self.unravel(i)))
    }

    /// Same grid, new values (not re-validated against the padding).
    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            values,
            ..self.clone()
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.dim == other.dim && self.shape == other.shape && self.lower == other.lower && self.h == other.h
    }

    /// Pointwise sum; the padding is the smaller of the two.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::InvalidGrid("fields live on different grids".into()));
        }
        let mut out = self.with_values(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect());
        out.padding = self.padding.min(other.padding);
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `Σ |u|^s h^d`.
    pub fn power_sum(&self, s: f64) -> f64 {
        self.values.iter().map(|v| v.abs().powf(s)).sum::<f64>() * self.cell_volume()
    }

    /// `(Σ |u|^s h^d)^{1/s}`, midpoint rule.
    pub fn lp_norm(&self, s: f64) -> Result<f64> {
        if !(s >= 1.0 && s.is_finite()) {
            return Err(Error::SOutOfRange(s));
        }
        Ok(self.power_sum(s).powf(1.0 / s))
    }

    /// Per-axis partial derivatives: central differences, one-sided at the
    /// outermost cells.
    pub fn gradient(&self) -> Vec<GridField> {
        (0..self.dim)
            .map(|axis| {
                let n = self.shape[axis];
                let mut stride = [0usize; 3];
                stride[axis] = 1;
                let step = self.index(stride);
                let values = (0..self.len())
                    .into_par_iter()
                    .map(|i| {
                        let pos = self.unravel(i)[axis];
                        if pos == 0 {
                            (self.values[i + step] - self.values[i]) / self.h
                        } else if pos == n - 1 {
                            (self.values[i] - self.values[i - step]) / self.h
                        } else {
                            (self.values[i + step] - self.values[i - step]) / (2.0 * self.h)
                        }
                    })
                    .collect();
                self.with_values(values)
            })
            .collect()
    }

    /// `|∇u|` (Euclidean norm of the difference gradient).
    pub fn gradient_magnitude(&self) -> Self {
        let g = self.gradient();
        let values = (0..self.len())
            .map(|i| g.iter().map(|c| c.values[i] * c.values[i]).sum::<f64>().sqrt())
            .collect();
        self.with_values(values)
    }

    /// Rows `x0[, x1[, x2]], value` at cell centers.
    pub fn snapshot_table(&self) -> Table {
        let mut header: Vec<String> = (0..self.dim).map(|a| format!("x{a}")).collect();
        header.push("value".into());
        let mut t = Table::new(header);
        for i in 0..self.len() {
            let c = self.center(self.unravel(i));
            let mut row: Vec<String> = c[..self.dim].iter().map(|&x| fmt_f64(x)).collect();
            row.push(fmt_f64(self.values[i]));
            t.push(row);
        }
        t
    }

    /// Binary layout, little-endian: `u32` dim, `dim` x `u64` extents, `f64`
    /// h, `dim` x (`f64` lo, `f64` hi), then the row-major `f64` payload.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&(self.dim as u32).to_le_bytes())?;
        for &n in self.shape() {
            w.write_all(&(n as u64).to_le_bytes())?;
        }
        w.write_all(&self.h.to_le_bytes())?;
        let upper = self.upper();
        for a in 0..self.dim {
            w.write_all(&self.lower[a].to_le_bytes())?;
            w.write_all(&upper[a].to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads [`Self::write_binary`] output. The padding is taken as the
    /// number of all-zero outer layers common to every face.
    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        fn bytes<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
            let mut b = [0u8; N];
            r.read_exact(&mut b)
                .map_err(|e| Error::InvalidGrid(format!("truncated field file: {e}")))?;
            Ok(b)
        }
        let dim = u32::from_le_bytes(bytes(&mut r)?) as usize;
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDim(dim));
        }
        let mut shape = Vec::with_capacity(dim);
        for _ in 0..dim {
            let n = u64::from_le_bytes(bytes(&mut r)?);
            shape.push(usize::try_from(n).map_err(|_| Error::InvalidGrid(format!("extent {n}")))?);
        }
        let h = f64::from_le_bytes(bytes(&mut r)?);
        let mut lower = Vec::with_capacity(dim);
        for (a, &n) in shape.iter().enumerate() {
            let lo = f64::from_le_bytes(bytes(&mut r)?);
            let hi = f64::from_le_bytes(bytes(&mut r)?);
            let expect = lo + n as f64 * h;
            if (hi - expect).abs() > 1e-9 * expect.abs().max(h) {
                return Err(Error::InvalidGrid(format!(
                    "axis {a}: box [{lo}, {hi}] does not match {n} cells of size {h}"
                )));
            }
            lower.push(lo);
        }
        let s = check_shape(dim, &shape, &lower, h)?;
        let count: usize = s.iter().product();
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            values.push(f64::from_le_bytes(bytes(&mut r)?));
        }
        let mut field = Self::new(dim, &shape, &lower, h, 0, values)?;
        field.padding = field.zero_margin();
        Ok(field)
    }

    /// Largest `p` such that every cell within `p` layers of a face is zero.
    pub fn zero_margin(&self) -> usize {
        let half = (self.shape().iter().min().unwrap() - 1) / 2;
        let mut margin = half;
        for i in 0..self.len() {
            if self.values[i] != 0.0 {
                let idx = self.unravel(i);
                for a in 0..self.dim {
                    margin = margin.min(idx[a]).min(self.shape[a] - 1 - idx[a]);
                }
            }
        }
        margin
    }
}
