use serde::Serialize;

use super::Jet;
use crate::error::{Error, Result};

/// Round cap `f = sin s` on `[0, s_cap]`, joined over `[s_cap, s_cap + w]`
/// to an affine profile of slope `a`.
///
/// On the blend, `f''` is the quartic `H(τ)`, `τ = (s - s_cap)/w`, fixed by
/// Hermite matching of `f''` and `f'''` at both ends plus the slope change
/// `∫ f'' = a - cos(s_cap)`. The joins are therefore C³.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereCapBlend {
    s_cap: f64,
    width: f64,
    slope: f64,
    /// Coefficients of `H(τ) = Σ h_k τ^k`.
    h: [f64; 5],
    /// `H(τ) = (1 - τ)² q(τ)`; evaluating through `q` keeps the sign of
    /// `f''` exact near the outer join.
    q: [f64; 3],
    /// `f` at the end of the blend.
    end_value: f64,
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

impl SphereCapBlend {
    pub fn new(s_cap: f64, width: f64, slope: f64) -> Result<Self> {
        if !(s_cap > 0.0 && s_cap < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidParameter {
                name: "s_cap",
                value: s_cap,
                reason: "cap radius must lie in (0, pi/2)",
            });
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "blend_width",
                value: width,
                reason: "blend width must be positive",
            });
        }
        if !(slope > 0.0 && slope <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "slope",
                value: slope,
                reason: "asymptotic slope must lie in (0, 1]",
            });
        }

        let (sin_c, cos_c) = s_cap.sin_cos();
        let h0 = -sin_c;
        let h1 = -width * cos_c;
        let mean = (slope - cos_c) / width;
        // h2 + h3 + h4 = -h0 - h1            (H(1) = 0)
        // 2h2 + 3h3 + 4h4 = -h1              (H'(1) = 0)
        // h2/3 + h3/4 + h4/5 = mean - h0 - h1/2   (∫H = mean)
        let a = [[1.0, 1.0, 1.0], [2.0, 3.0, 4.0], [1.0 / 3.0, 0.25, 0.2]];
        let rhs = [-h0 - h1, -h1, mean - h0 - 0.5 * h1];
        let d = det3(a);
        let mut sol = [0.0; 3];
        for (k, out) in sol.iter_mut().enumerate() {
            let mut m = a;
            for row in 0..3 {
                m[row][k] = rhs[row];
            }
            *out = det3(m) / d;
        }
        let h = [h0, h1, sol[0], sol[1], sol[2]];
        let q1 = h1 + 2.0 * h0;
        let q = [h0, q1, sol[0] + 2.0 * q1 - h0];

        let mut blend = Self {
            s_cap,
            width,
            slope,
            h,
            q,
            end_value: 0.0,
        };
        blend.end_value = blend.blend_jet(1.0).f;

        for k in 0..=64 {
            let tau = k as f64 / 64.0;
            if blend.blend_jet(tau).f <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "blend_width",
                    value: width,
                    reason: "blend drives the profile non-positive",
                });
            }
        }
        Ok(blend)
    }

    pub fn s_cap(&self) -> f64 {
        self.s_cap
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn blend_end(&self) -> f64 {
        self.s_cap + self.width
    }

    /// Offset `b` of the affine continuation `f = a s + b`.
    pub fn offset(&self) -> f64 {
        self.end_value - self.slope * self.blend_end()
    }

    /// Whether `f'' <= 0` across the blend, i.e. `Ric(∂s, ∂s) >= 0`.
    pub fn is_concave(&self) -> bool {
        (0..=256).all(|k| {
            let tau = k as f64 / 256.0;
            self.q[0] + tau * (self.q[1] + tau * self.q[2]) <= 0.0
        })
    }

    fn blend_jet(&self, tau: f64) -> Jet {
        let (sin_c, cos_c) = self.s_cap.sin_cos();
        let w = self.width;
        let (mut f1, mut f0) = (0.0, 0.0);
        let mut p = 1.0;
        for (k, hk) in self.h.iter().enumerate() {
            let k = k as f64;
            f1 += hk * p * tau / (k + 1.0);
            f0 += hk * p * tau * tau / ((k + 1.0) * (k + 2.0));
            p *= tau;
        }
        let f2 = (1.0 - tau).powi(2) * (self.q[0] + tau * (self.q[1] + tau * self.q[2]));
        Jet {
            f: sin_c + w * cos_c * tau + w * w * f0,
            df: cos_c + w * f1,
            d2f: f2,
        }
    }

    /// `f'''` on the open pieces, for smoothness tests.
    pub fn third_derivative(&self, s: f64) -> f64 {
        if s <= self.s_cap {
            -s.cos()
        } else if s < self.blend_end() {
            let tau = (s - self.s_cap) / self.width;
            let mut d = 0.0;
            let mut p = 1.0;
            for (k, hk) in self.h.iter().enumerate().skip(1) {
                d += k as f64 * hk * p;
                p *= tau;
            }
            d / self.width
        } else {
            0.0
        }
    }

    pub fn jet(&self, s: f64) -> Jet {
        if s <= self.s_cap {
            let (sin, cos) = s.sin_cos();
            Jet {
                f: sin,
                df: cos,
                d2f: -sin,
            }
        } else if s < self.blend_end() {
            self.blend_jet((s - self.s_cap) / self.width)
        } else {
            Jet {
                f: self.end_value + self.slope * (s - self.blend_end()),
                df: self.slope,
                d2f: 0.0,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_c3_at(b: &SphereCapBlend, s: f64) {
        let dx = 1e-12;
        let lo = b.jet(s - dx);
        let hi = b.jet(s + dx);
        assert!((lo.f - hi.f).abs() < 1e-10, "f jump at {s}");
        assert!((lo.df - hi.df).abs() < 1e-10, "f' jump at {s}");
        assert!((lo.d2f - hi.d2f).abs() < 1e-9, "f'' jump at {s}");
        let d3 = (b.third_derivative(s - dx) - b.third_derivative(s + dx)).abs();
        assert!(d3 < 1e-6, "f''' jump {d3} at {s}");
    }

    #[test]
    fn joins_are_c3() {
        for (c, w, a) in [(1.0, 0.3, 0.25), (0.1, 0.1, 0.5), (0.85, 0.3, 0.5)] {
            let b = SphereCapBlend::new(c, w, a).unwrap();
            assert_c3_at(&b, b.s_cap());
            assert_c3_at(&b, b.blend_end());
        }
    }

    #[test]
    fn catalog_blends_are_concave() {
        assert!(SphereCapBlend::new(1.0, 0.3, 0.25).unwrap().is_concave());
        assert!(SphereCapBlend::new(0.85, 0.5, 0.5).unwrap().is_concave());
        assert!(SphereCapBlend::new(0.1, 0.1, 0.5).unwrap().is_concave());
    }

    #[test]
    fn affine_continuation_has_requested_slope() {
        let b = SphereCapBlend::new(0.1, 0.1, 0.5).unwrap();
        let j = b.jet(50.0);
        assert_eq!(j.df, 0.5);
        assert!((j.f - (0.5 * 50.0 + b.offset())).abs() < 1e-12);
        assert!(b.offset() > 0.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SphereCapBlend::new(2.0, 0.3, 0.5).is_err());
        assert!(SphereCapBlend::new(1.0, 0.0, 0.5).is_err());
        assert!(SphereCapBlend::new(1.0, 0.3, 1.5).is_err());
    }
}
