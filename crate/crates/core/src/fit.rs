//! Small fitting helpers shared by the growth, decay and Li–Yau fits.

use crate::error::{Error, Result};

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::Usage("abscissa and ordinate lengths differ".into()));
    }
    if xs.len() < 3 {
        return Err(Error::Usage(format!(
            "degenerate fit window: {} points (need at least 3)",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return Err(Error::Usage("fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: my - slope * mx,
    })
}

/// `n` points spaced geometrically from `lo` to `hi` (both included).
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let ratio = (hi / lo).ln();
    (0..n)
        .map(|k| {
            if k == n - 1 {
                hi
            } else {
                lo * (ratio * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// `n` points spaced uniformly from `lo` to `hi` (both included).
pub fn lin_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|k| if k == n - 1 { hi } else { lo + step * k as f64 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 1.5 - 0.25 * x).collect();
        let fit = least_squares(&xs, &ys).unwrap();
        assert!((fit.slope + 0.25).abs() < 1e-15);
        assert!((fit.intercept - 1.5).abs() < 1e-15);
    }

    #[test]
    fn two_points_is_degenerate() {
        assert!(matches!(
            least_squares(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn grids_hit_endpoints() {
        let g = log_spaced(10.0, 1000.0, 5);
        assert_eq!(g[0], 10.0);
        assert_eq!(g[4], 1000.0);
        assert!((g[2] - 100.0).abs() < 1e-12);
        let l = lin_spaced(0.0, 5.0, 11);
        assert_eq!(l[10], 5.0);
        assert!((l[3] - 1.5).abs() < 1e-15);
    }
}
