//! Ordinary least squares for log-log scaling fits.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest `|y_i - (slope x_i + intercept)|`.
    pub max_residual: f64,
}

/// Least-squares line through `(x_i, y_i)`; needs at least two distinct `x`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    assert_eq!(xs.len(), ys.len(), "x and y lengths differ");
    if xs.len() < 2 {
        return Err(Error::WindowTooShort { len: xs.len(), min: 2 });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::WindowTooShort { len: 1, min: 2 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).abs())
        .fold(0.0, f64::max);
    Ok(LineFit {
        slope,
        intercept,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_line() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.25 * x - 3.0).collect();
        let f = least_squares(&xs, &ys).unwrap();
        assert!((f.slope - 0.25).abs() < 1e-14);
        assert!((f.intercept + 3.0).abs() < 1e-13);
        assert!(f.max_residual < 1e-13);
    }

    #[test]
    fn residual_of_v_shape() {
        let f = least_squares(&[-1.0, 0.0, 1.0], &[1.0, 0.0, 1.0]).unwrap();
        assert_eq!(f.slope, 0.0);
        assert!((f.intercept - 2.0 / 3.0).abs() < 1e-15);
        assert!((f.max_residual - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn too_short() {
        assert!(least_squares(&[1.0], &[2.0]).is_err());
        assert!(least_squares(&[1.0, 1.0], &[2.0, 3.0]).is_err());
    }

    proptest! {
        #[test]
        fn recovers_slope_under_offset(a in -5.0f64..5.0, b in -100.0f64..100.0, c in -100.0f64..100.0) {
            let xs: Vec<f64> = (30..=44).map(f64::from).collect();
            let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let shifted: Vec<f64> = ys.iter().map(|y| y + c).collect();
            let f1 = least_squares(&xs, &ys).unwrap();
            let f2 = least_squares(&xs, &shifted).unwrap();
            prop_assert!((f1.slope - a).abs() < 1e-9);
            prop_assert!((f1.slope - f2.slope).abs() < 1e-9);
        }
    }
}
