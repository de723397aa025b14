//! Summed-area tables for O(1) box sums on 3-D row-major arrays.

#[derive(Debug, Clone)]
pub struct SummedArea {
    // (n0+1) x (n1+1) x (n2+1), zero first layer on every axis
    dims: [usize; 3],
    table: Vec<f64>,
}

impl SummedArea {
    pub fn new(shape: [usize; 3], values: &[f64]) -> Self {
        let dims = [shape[0] + 1, shape[1] + 1, shape[2] + 1];
        let mut table = vec![0.0; dims[0] * dims[1] * dims[2]];
        let at = |i: usize, j: usize, k: usize| (i * dims[1] + j) * dims[2] + k;
        for i in 0..shape[0] {
            for j in 0..shape[1] {
                let mut row = 0.0;
                for k in 0..shape[2] {
                    row += values[(i * shape[1] + j) * shape[2] + k];
                    table[at(i + 1, j + 1, k + 1)] =
                        row + table[at(i, j + 1, k + 1)] + table[at(i + 1, j, k + 1)] - table[at(i, j, k + 1)];
                }
            }
        }
        Self { dims, table }
    }

    /// Sum over the half-open box `lo..hi` (per axis).
    pub fn sum(&self, lo: [usize; 3], hi: [usize; 3]) -> f64 {
        let d = self.dims;
        let at = |i: usize, j: usize, k: usize| self.table[(i * d[1] + j) * d[2] + k];
        at(hi[0], hi[1], hi[2]) - at(lo[0], hi[1], hi[2]) - at(hi[0], lo[1], hi[2]) - at(hi[0], hi[1], lo[2])
            + at(lo[0], lo[1], hi[2])
            + at(lo[0], hi[1], lo[2])
            + at(hi[0], lo[1], lo[2])
            - at(lo[0], lo[1], lo[2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_sums_match_direct() {
        let shape = [5, 4, 3];
        let values: Vec<f64> = (0..60).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let sat = SummedArea::new(shape, &values);
        for (lo, hi) in [([0, 0, 0], [5, 4, 3]), ([1, 2, 0], [4, 4, 2]), ([2, 1, 1], [3, 2, 2]), ([3, 3, 2], [3, 4, 3])] {
            let mut direct = 0.0;
            for i in lo[0]..hi[0] {
                for j in lo[1]..hi[1] {
                    for k in lo[2]..hi[2] {
                        direct += values[(i * 4 + j) * 3 + k];
                    }
                }
            }
            assert_eq!(sat.sum(lo, hi), direct);
        }
    }
}
