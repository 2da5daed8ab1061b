//! Globally adaptive Gauss-Kronrod (10/21-point) quadrature on finite intervals.
//!
//! The interval with the largest error estimate is bisected until the summed
//! error estimate drops below `max(abs, rel·|I|)` or below the rounding floor
//! `50 ε ∫|f|`, whichever is larger.

// Nodes and weights are kept as tabulated.
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_280,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Weights of the embedded 10-point Gauss rule, on the odd Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            max_intervals: 2000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(1e-13, 1e-12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Piece> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    check_finite(fc, center)?;
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    let mut abs_value = WGK[10] * fc.abs();
    for j in 0..10 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        check_finite(f1, center - dx)?;
        check_finite(f2, center + dx)?;
        kronrod += WGK[j] * (f1 + f2);
        abs_value += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Ok(Piece {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        abs_value: abs_value * half.abs(),
    })
}

fn check_finite(v: f64, x: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("integrand is {v} at x = {x}")))
    }
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    integrate_with_breakpoints(f, &[a, b], tol)
}

/// Integrates `f` over `[points[0], points[last]]`, starting from the
/// partition given by `points` (which must be non-decreasing). Use this to
/// place known kinks or jumps on subinterval boundaries.
pub fn integrate_with_breakpoints<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    tol: Tolerance,
) -> Result<Integral> {
    if points.len() < 2 || points.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::domain(
            "breakpoints must be a non-decreasing list of length >= 2",
        ));
    }
    let (lower, upper) = (points[0], points[points.len() - 1]);
    let mut pieces = Vec::with_capacity(64);
    for w in points.windows(2).filter(|w| w[0] < w[1]) {
        pieces.push(kronrod(&mut f, w[0], w[1])?);
    }
    let mut evaluations = 21 * pieces.len();
    if pieces.is_empty() {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            intervals: 0,
            evaluations: 0,
        });
    }

    loop {
        let value: f64 = pieces.iter().map(|p| p.value).sum();
        let error: f64 = pieces.iter().map(|p| p.error).sum();
        let abs_value: f64 = pieces.iter().map(|p| p.abs_value).sum();
        let target = tol
            .abs
            .max(tol.rel * value.abs())
            .max(50.0 * f64::EPSILON * abs_value);
        if error <= target {
            return Ok(Integral {
                value,
                error,
                intervals: pieces.len(),
                evaluations,
            });
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("non-empty");
        let piece = pieces[worst];
        let mid = 0.5 * (piece.a + piece.b);
        let splittable = piece.a < mid && mid < piece.b;
        if pieces.len() >= tol.max_intervals || !splittable {
            return Err(Error::Quadrature {
                lower,
                upper,
                estimate: value,
                error,
                intervals: pieces.len(),
            });
        }
        pieces[worst] = kronrod(&mut f, piece.a, mid)?;
        pieces.push(kronrod(&mut f, mid, piece.b)?);
        evaluations += 42;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn rule_is_exact_for_polynomials() {
        // The Kronrod rule integrates degree 31 exactly, the Gauss rule degree 19.
        for deg in 0..=31 {
            let piece = kronrod(&mut |x: f64| x.powi(deg), -1.0, 1.0).unwrap();
            let exact = if deg % 2 == 0 {
                2.0 / (deg as f64 + 1.0)
            } else {
                0.0
            };
            assert!((piece.value - exact).abs() < 1e-14, "degree {deg}");
            if deg <= 19 {
                assert!(piece.error < 1e-14, "gauss degree {deg}: {}", piece.error);
            }
        }
        let weights: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        assert_relative_eq!(weights, 2.0, max_relative = 1e-15);
        assert_relative_eq!(2.0 * WG.iter().sum::<f64>(), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn smooth_integrals() {
        let r = integrate(f64::sin, 0.0, PI, Tolerance::default()).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-14);
        let r = integrate(|x: f64| (-x * x).exp(), -10.0, 10.0, Tolerance::default()).unwrap();
        assert_relative_eq!(r.value, PI.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn kinks_and_jumps() {
        let r = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, Tolerance::default()).unwrap();
        assert_relative_eq!(r.value, 0.5 * (0.09 + 0.49), max_relative = 1e-12);
        let step = |x: f64| if x < 0.3 { 0.0 } else { 1.0 };
        let r = integrate_with_breakpoints(step, &[0.0, 0.3, 1.0], Tolerance::default()).unwrap();
        assert_relative_eq!(r.value, 0.7, max_relative = 1e-14);
        assert_eq!(r.intervals, 2);
    }

    #[test]
    fn failures_are_reported() {
        let tight = Tolerance {
            abs: 0.0,
            rel: 0.0,
            max_intervals: 3,
        };
        let err = integrate(|x: f64| x.sqrt(), 0.0, 1.0, tight).unwrap_err();
        assert!(matches!(err, Error::Quadrature { intervals: 3, .. }));
        assert!(integrate(|x: f64| 1.0 / x, -1.0, 1.0, Tolerance::default()).is_err());
        assert!(integrate_with_breakpoints(|x| x, &[1.0, 0.0], Tolerance::default()).is_err());
    }

    #[test]
    fn empty_interval() {
        assert_eq!(
            integrate(|x| x, 1.0, 1.0, Tolerance::default())
                .unwrap()
                .value,
            0.0
        );
    }
}
