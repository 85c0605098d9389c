//! Rotationally symmetric metrics `g = ds² + f(s)² g_{S²}` on a radial
//! interval, given by their warp profile `f`.

mod blend;
mod curvature;
mod table;
mod volume;

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

pub use blend::SphereCapBlend;
pub use curvature::{
    check_pinching, curvature_at, epsilon_star, finite_difference_curvature_oracle, pinched_at,
    CurvaturePoint, PinchReport, PINCH_TOLERANCE,
};
pub use table::WarpTable;
pub use volume::{growth_fit, volume_ball, GrowthReport};

/// Value and first two derivatives of the warp profile at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jet {
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
}

/// Asymptotic law `f(s) ≈ c · s^β` as `s → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailLaw {
    pub coefficient: f64,
    pub exponent: f64,
}

impl TailLaw {
    pub fn eval(&self, s: f64) -> f64 {
        self.coefficient * s.powf(self.exponent)
    }

    /// `∫_S^∞ (c σ^β)^-2 dσ`, finite only for `β > 1/2`.
    pub fn integral_beyond(&self, s: f64) -> Result<f64> {
        let b = self.exponent;
        if b <= 0.5 {
            return Err(Error::Nonparabolic { beta: b });
        }
        Ok(s.powf(1.0 - 2.0 * b) / (self.coefficient * self.coefficient * (2.0 * b - 1.0)))
    }
}

#[derive(Debug, Clone)]
pub enum Profile {
    /// `f = s`, Euclidean space.
    Flat,
    /// `f = a s`, a cone with a singular tip.
    Cone {
        slope: f64,
    },
    /// `f = c s^β`.
    Power {
        coefficient: f64,
        exponent: f64,
    },
    /// Time-symmetric slice of Schwarzschild, `s` measured from the horizon.
    Schwarzschild {
        mass: f64,
    },
    SphereCapBlend(SphereCapBlend),
    Table(Arc<WarpTable>),
}

/// The warp profile of a rotationally symmetric 3-metric.
#[derive(Debug, Clone)]
pub struct WarpFunction {
    profile: Profile,
    core_volume: f64,
}

impl WarpFunction {
    pub fn flat() -> Self {
        Self::from_profile(Profile::Flat)
    }

    pub fn cone(slope: f64) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "a",
                value: slope,
                reason: "cone slope must be positive",
            });
        }
        Ok(Self::from_profile(Profile::Cone { slope }))
    }

    pub fn power(coefficient: f64, exponent: f64) -> Result<Self> {
        if !(coefficient > 0.0 && coefficient.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "c",
                value: coefficient,
                reason: "coefficient must be positive",
            });
        }
        if !(exponent > 0.0 && exponent <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: exponent,
                reason: "exponent must lie in (0, 1]",
            });
        }
        Ok(Self::from_profile(Profile::Power {
            coefficient,
            exponent,
        }))
    }

    pub fn schwarzschild(mass: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "m",
                value: mass,
                reason: "mass must be positive",
            });
        }
        Ok(Self::from_profile(Profile::Schwarzschild { mass }))
    }

    pub fn sphere_cap_blend(s_cap: f64, blend_width: f64, slope: f64) -> Result<Self> {
        Ok(Self::from_profile(Profile::SphereCapBlend(
            SphereCapBlend::new(s_cap, blend_width, slope)?,
        )))
    }

    pub fn table(table: WarpTable) -> Self {
        Self::from_profile(Profile::Table(Arc::new(table)))
    }

    fn from_profile(profile: Profile) -> Self {
        Self {
            profile,
            core_volume: 0.0,
        }
    }

    /// Declares the volume of the region `s < s_min` that the profile does
    /// not describe (only meaningful for boundary-start metrics).
    pub fn with_core_volume(mut self, core_volume: f64) -> Self {
        self.core_volume = core_volume;
        self
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn core_volume(&self) -> f64 {
        self.core_volume
    }

    pub fn kind_name(&self) -> &'static str {
        match self.profile {
            Profile::Flat => "flat",
            Profile::Cone { .. } => "cone",
            Profile::Power { .. } => "power",
            Profile::Schwarzschild { .. } => "schwarzschild",
            Profile::SphereCapBlend(_) => "sphere_cap_blend",
            Profile::Table(_) => "user_table",
        }
    }

    /// Scalar parameters, for provenance in reports.
    pub fn parameters(&self) -> Vec<(&'static str, f64)> {
        match &self.profile {
            Profile::Flat => vec![],
            Profile::Cone { slope } => vec![("a", *slope)],
            Profile::Power {
                coefficient,
                exponent,
            } => vec![("c", *coefficient), ("beta", *exponent)],
            Profile::Schwarzschild { mass } => vec![("m", *mass)],
            Profile::SphereCapBlend(b) => vec![
                ("s_cap", b.s_cap()),
                ("blend_width", b.width()),
                ("slope", b.slope()),
            ],
            Profile::Table(t) => vec![("samples", t.len() as f64)],
        }
    }

    /// Lower end `s_min` of the radial domain.
    pub fn domain_start(&self) -> f64 {
        match &self.profile {
            Profile::Table(t) => t.start(),
            _ => 0.0,
        }
    }

    /// Whether `s_min` itself belongs to the domain. True for boundary-start
    /// profiles with `f(s_min) > 0`, false at a pole or cone tip.
    pub fn domain_closed(&self) -> bool {
        match &self.profile {
            Profile::Schwarzschild { .. } => true,
            Profile::Table(t) => t.start_value() > 0.0,
            _ => false,
        }
    }

    /// Pole-smooth profiles have `f(0) = 0`, `f'(0) = 1`.
    pub fn pole_smooth(&self) -> bool {
        match &self.profile {
            Profile::Flat | Profile::SphereCapBlend(_) => true,
            Profile::Power {
                coefficient,
                exponent,
            } => *exponent == 1.0 && *coefficient == 1.0,
            Profile::Cone { slope } => *slope == 1.0,
            Profile::Schwarzschild { .. } => false,
            Profile::Table(t) => t.pole_smooth(),
        }
    }

    pub fn contains(&self, s: f64) -> bool {
        let start = self.domain_start();
        s.is_finite() && (s > start || (s == start && self.domain_closed()))
    }

    pub fn check_domain(&self, s: f64) -> Result<()> {
        if self.contains(s) {
            Ok(())
        } else {
            Err(Error::Domain {
                s,
                start: self.domain_start(),
                closure: if self.domain_closed() {
                    "closed"
                } else {
                    "open"
                },
            })
        }
    }

    /// `f`, `f'`, `f''` at `s`.
    pub fn jet(&self, s: f64) -> Result<Jet> {
        self.check_domain(s)?;
        Ok(self.jet_unchecked(s))
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        self.jet(s).map(|j| j.f)
    }

    pub(crate) fn jet_unchecked(&self, s: f64) -> Jet {
        match &self.profile {
            Profile::Flat => Jet {
                f: s,
                df: 1.0,
                d2f: 0.0,
            },
            Profile::Cone { slope } => Jet {
                f: slope * s,
                df: *slope,
                d2f: 0.0,
            },
            Profile::Power {
                coefficient: c,
                exponent: b,
            } => {
                let p = c * s.powf(b - 2.0);
                Jet {
                    f: p * s * s,
                    df: b * p * s,
                    d2f: b * (b - 1.0) * p,
                }
            }
            Profile::Schwarzschild { mass } => schwarzschild_jet(*mass, s),
            Profile::SphereCapBlend(b) => b.jet(s),
            Profile::Table(t) => t.jet(s),
        }
    }

    /// Radii where the profile is only finitely smooth; quadrature panels
    /// are split there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.profile {
            Profile::SphereCapBlend(b) => vec![b.s_cap(), b.blend_end()],
            Profile::Table(t) => t.knots().to_vec(),
            _ => vec![],
        }
    }

    pub fn tail_law(&self) -> TailLaw {
        match &self.profile {
            Profile::Flat | Profile::Schwarzschild { .. } => TailLaw {
                coefficient: 1.0,
                exponent: 1.0,
            },
            Profile::Cone { slope } => TailLaw {
                coefficient: *slope,
                exponent: 1.0,
            },
            Profile::Power {
                coefficient,
                exponent,
            } => TailLaw {
                coefficient: *coefficient,
                exponent: *exponent,
            },
            Profile::SphereCapBlend(b) => TailLaw {
                coefficient: b.slope(),
                exponent: 1.0,
            },
            Profile::Table(t) => t.tail_law(),
        }
    }

    /// Radius beyond which the profile has no further breakpoints.
    pub fn tail_onset(&self) -> f64 {
        self.breakpoints()
            .last()
            .copied()
            .unwrap_or(0.0)
            .max(self.domain_start())
    }

    /// Relative mismatch `|f(S) / (c S^β) - 1|` of the tail law.
    pub fn tail_mismatch(&self, s: f64) -> f64 {
        let law = self.tail_law().eval(s);
        (self.jet_unchecked(s).f / law - 1.0).abs()
    }

    /// The areal radius `f(s)`.
    pub fn areal_radius(&self, s: f64) -> Result<f64> {
        self.value(s)
    }

    /// Inverts the areal radius. Closed form for Schwarzschild; bracketed
    /// root finding on the (assumed increasing) profile otherwise.
    pub fn arclength_at_areal(&self, r: f64) -> Result<f64> {
        match &self.profile {
            Profile::Schwarzschild { mass } => {
                if !(r >= 2.0 * mass) {
                    return Err(Error::Domain {
                        s: r,
                        start: 2.0 * mass,
                        closure: "closed (areal radius)",
                    });
                }
                let zeta = (r / mass - 1.0).acosh();
                Ok(mass * (zeta.sinh() + zeta))
            }
            _ => {
                let start = self.domain_start();
                let mut hi = start.max(1.0);
                while self.jet_unchecked(hi).f < r {
                    hi *= 2.0;
                    if hi > 1e300 {
                        return Err(Error::Numeric(format!("areal radius {r} not attained")));
                    }
                }
                crate::roots::bisect_secant(
                    |s| Ok(self.jet_unchecked(s).f - r),
                    start,
                    hi,
                    crate::roots::RootTolerance::default(),
                )
            }
        }
    }
}

/// Spatial Schwarzschild in arclength `s` from the horizon. With the
/// substitution `r = m (1 + cosh ζ)` one has `s = m (sinh ζ + ζ)`,
/// `f' = dr/ds = tanh(ζ/2)` and `f'' = m / r²`.
fn schwarzschild_jet(mass: f64, s: f64) -> Jet {
    let zeta = schwarzschild_zeta(mass, s);
    let r = mass * (1.0 + zeta.cosh());
    Jet {
        f: r,
        df: (0.5 * zeta).tanh(),
        d2f: mass / (r * r),
    }
}

fn schwarzschild_zeta(mass: f64, s: f64) -> f64 {
    let x = s / mass;
    if x <= 0.0 {
        return 0.0;
    }
    // g(ζ) = sinh ζ + ζ - x is convex and increasing on ζ >= 0 with
    // g(asinh x) >= 0, so Newton from asinh x decreases monotonically.
    let mut zeta = x.asinh();
    for _ in 0..100 {
        let step = (zeta.sinh() + zeta - x) / (zeta.cosh() + 1.0);
        zeta -= step;
        if step.abs() <= 2.0 * f64::EPSILON * zeta {
            break;
        }
    }
    zeta
}
