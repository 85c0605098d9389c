//! Tabulated warp profiles, interpolated by C² quintic Hermite pieces.
//!
//! Knot slopes and curvatures are estimated from five neighbouring samples
//! (non-uniform difference weights), so the interpolant reproduces quartics
//! exactly and `f''` is continuous across knots. Accuracy caveat: `f''` (and
//! hence the curvature) is third-order accurate in the knot spacing, and
//! `f'''` jumps at the knots by the same order. For increasing data the knot
//! slopes are clamped at zero so the interpolant does not acquire spurious
//! dips.
//!
//! Beyond the last sample the profile continues as the power law
//! `c s^β` through the last two samples; the last knot takes its
//! derivatives from that law so the continuation is C².

use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::{Jet, TailLaw};
use crate::error::{Error, Result};

/// Samples per derivative estimate.
const STENCIL: usize = 5;

/// Weights `w[k][m]` such that `Σ_k w[k][m] g(x_k)` approximates `g^{(m)}(z)`,
/// `m = 0, 1, 2`, exact for polynomials of degree `< xs.len()` (Fornberg's
/// recursion).
fn fornberg_weights(z: f64, xs: &[f64]) -> Vec<[f64; 3]> {
    let n = xs.len();
    let mut w = vec![[0.0; 3]; n];
    w[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    for i in 1..n {
        let mn = i.min(2);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    w[i][k] = c1 * (k as f64 * w[i - 1][k - 1] - c5 * w[i - 1][k]) / c2;
                }
                w[i][0] = -c1 * c5 * w[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                w[j][k] = (c4 * w[j][k] - k as f64 * w[j][k - 1]) / c3;
            }
            w[j][0] = c4 * w[j][0] / c3;
        }
        c1 = c2;
    }
    w
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpTable {
    knots: Vec<f64>,
    values: Vec<f64>,
    /// Power coefficients in `τ ∈ [0, 1]` for each interval.
    coeffs: Vec<[f64; 6]>,
    tail: TailLaw,
    pole_smooth: bool,
}

#[derive(Debug, Deserialize)]
struct Row {
    s: f64,
    f: f64,
}

impl WarpTable {
    pub fn from_samples(s: &[f64], f: &[f64]) -> Result<Self> {
        let n = s.len();
        if n != f.len() {
            return Err(Error::Table("columns s and f differ in length".into()));
        }
        if n < 4 {
            return Err(Error::Table(format!("need at least 4 samples, got {n}")));
        }
        if s[0] < 0.0 || s.iter().any(|x| !x.is_finite()) {
            return Err(Error::Table("radii must be finite and non-negative".into()));
        }
        if s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Table("radii must be strictly increasing".into()));
        }
        if f[0] < 0.0 || f[1..].iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Table(
                "profile must be positive (zero allowed only at the first sample)".into(),
            ));
        }
        if f[0] == 0.0 && s[0] != 0.0 {
            return Err(Error::Table(
                "a zero profile value must sit at s = 0".into(),
            ));
        }

        let beta = (f[n - 1] / f[n - 2]).ln() / (s[n - 1] / s[n - 2]).ln();
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::Table(format!(
                "cannot fit a growing tail law through the last two samples (beta = {beta})"
            )));
        }
        let tail = TailLaw {
            coefficient: f[n - 1] / s[n - 1].powf(beta),
            exponent: beta,
        };

        let increasing = f.windows(2).all(|w| w[1] >= w[0]);
        let width = STENCIL.min(n);
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        for i in 0..n - 1 {
            let lo = i.saturating_sub(width / 2).min(n - width);
            let w = fornberg_weights(s[i], &s[lo..lo + width]);
            let (first, second) = w
                .iter()
                .zip(&f[lo..lo + width])
                .fold((0.0, 0.0), |(a, b), (wk, fk)| {
                    (a + wk[1] * fk, b + wk[2] * fk)
                });
            d1[i] = if increasing { first.max(0.0) } else { first };
            d2[i] = second;
        }
        let last = s[n - 1];
        d1[n - 1] = tail.coefficient * beta * last.powf(beta - 1.0);
        d2[n - 1] = tail.coefficient * beta * (beta - 1.0) * last.powf(beta - 2.0);

        let coeffs = (0..n - 1)
            .map(|i| {
                let h = s[i + 1] - s[i];
                let a0 = f[i];
                let a1 = h * d1[i];
                let a2 = 0.5 * h * h * d2[i];
                let e0 = f[i + 1] - (a0 + a1 + a2);
                let e1 = h * d1[i + 1] - (a1 + 2.0 * a2);
                let e2 = h * h * d2[i + 1] - 2.0 * a2;
                [
                    a0,
                    a1,
                    a2,
                    10.0 * e0 - 4.0 * e1 + 0.5 * e2,
                    -15.0 * e0 + 7.0 * e1 - e2,
                    6.0 * e0 - 3.0 * e1 + 0.5 * e2,
                ]
            })
            .collect();

        Ok(Self {
            knots: s.to_vec(),
            values: f.to_vec(),
            coeffs,
            tail,
            pole_smooth: s[0] == 0.0 && f[0] == 0.0 && (d1[0] - 1.0).abs() < 1e-2,
        })
    }

    /// Reads CSV with header `s,f`.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| Error::Table(e.to_string()))?
            .clone();
        if headers.len() != 2 || &headers[0] != "s" || &headers[1] != "f" {
            return Err(Error::Table(format!(
                "expected header `s,f`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let (mut s, mut f) = (Vec::new(), Vec::new());
        for row in rdr.deserialize::<Row>() {
            let row = row.map_err(|e| Error::Table(e.to_string()))?;
            s.push(row.s);
            f.push(row.f);
        }
        Self::from_samples(&s, &f)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Table(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file)
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn start(&self) -> f64 {
        self.knots[0]
    }

    pub fn start_value(&self) -> f64 {
        self.values[0]
    }

    pub fn pole_smooth(&self) -> bool {
        self.pole_smooth
    }

    pub fn tail_law(&self) -> TailLaw {
        self.tail
    }

    pub fn jet(&self, s: f64) -> Jet {
        let n = self.knots.len();
        if s >= self.knots[n - 1] {
            let TailLaw {
                coefficient: c,
                exponent: b,
            } = self.tail;
            let p = c * s.powf(b - 2.0);
            return Jet {
                f: p * s * s,
                df: b * p * s,
                d2f: b * (b - 1.0) * p,
            };
        }
        let i = match self.knots.partition_point(|&k| k <= s) {
            0 => 0,
            k => k - 1,
        };
        let h = self.knots[i + 1] - self.knots[i];
        let tau = (s - self.knots[i]) / h;
        let a = &self.coeffs[i];
        let f = a[0] + tau * (a[1] + tau * (a[2] + tau * (a[3] + tau * (a[4] + tau * a[5]))));
        let df =
            a[1] + tau * (2.0 * a[2] + tau * (3.0 * a[3] + tau * (4.0 * a[4] + tau * 5.0 * a[5])));
        let d2f = 2.0 * a[2] + tau * (6.0 * a[3] + tau * (12.0 * a[4] + tau * 20.0 * a[5]));
        Jet {
            f,
            df: df / h,
            d2f: d2f / (h * h),
        }
    }
}
