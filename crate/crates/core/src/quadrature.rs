//! Adaptive Gauss–Kronrod quadrature (7-point Gauss, 15-point Kronrod).
//!
//! Intervals are bisected globally: the sub-interval with the largest error
//! estimate is split until the summed estimate meets the tolerance.

// Nodes and weights are tabulated to the published digits.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_3,
    0.949_107_912_342_758_524_526_189_684_047_9,
    0.864_864_423_359_769_072_789_712_788_640_9,
    0.741_531_185_599_394_439_863_864_773_280_8,
    0.586_087_235_467_691_130_294_144_845_693_0,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_2,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_5,
    0.140_653_259_715_525_918_745_189_590_510_2,
    0.169_004_726_639_267_902_826_583_426_598_6,
    0.190_350_578_064_785_409_913_256_402_421_0,
    0.204_432_940_075_298_892_414_161_999_234_6,
    0.209_482_141_084_727_828_012_999_174_891_7,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_1,
    0.279_705_391_489_276_667_901_467_771_423_8,
    0.381_830_050_505_118_944_950_369_775_489_0,
    0.417_959_183_673_469_387_755_102_040_816_3,
];

const MAX_INTERVALS: usize = 4000;

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Piece {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += wk * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Piece {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[a, b]` until the error estimate is below
/// `max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    if b < a {
        let q = integrate(f, b, a, abs_tol, rel_tol)?;
        return Ok(Quadrature {
            value: -q.value,
            ..q
        });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Numeric(format!(
            "quadrature bounds must be finite, got [{a}, {b}]"
        )));
    }

    let mut pieces = vec![gk15(&f, a, b)];
    let mut evaluations = 15;
    loop {
        let value: f64 = pieces.iter().map(|p| p.value).sum();
        let error: f64 = pieces.iter().map(|p| p.error).sum();
        if !value.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
        // Below ~50 ulp of the result the estimate is pure rounding.
        let floor = 50.0 * f64::EPSILON * value.abs();
        if error <= abs_tol.max(rel_tol * value.abs()).max(floor) {
            return Ok(Quadrature {
                value,
                error,
                evaluations,
            });
        }
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::Numeric(format!(
                "quadrature on [{a}, {b}] did not converge: value {value}, error {error}"
            )));
        }
        let worst = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one piece");
        let p = pieces.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Interval can no longer be split in floating point.
            return Ok(Quadrature {
                value,
                error,
                evaluations,
            });
        }
        pieces.push(gk15(&f, p.a, mid));
        pieces.push(gk15(&f, mid, p.b));
        evaluations += 30;
    }
}

/// Integrates over `[a, b]` split at the given interior breakpoints, so that
/// each panel sees a smooth integrand.
pub fn integrate_panels<F>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    rel_tol: f64,
) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    let mut edges = vec![a];
    edges.extend(breakpoints.iter().copied().filter(|&x| x > a && x < b));
    edges.push(b);
    let mut total = Quadrature {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
    };
    for w in edges.windows(2) {
        let q = integrate(&f, w[0], w[1], 0.0, rel_tol)?;
        total.value += q.value;
        total.error += q.error;
        total.evaluations += q.evaluations;
    }
    Ok(total)
}
