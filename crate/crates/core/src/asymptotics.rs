//! Ratio sweeps toward `t = 0` for the quantities whose limits drive the
//! non-metricity constructions.
//!
//! | sweep | ratio | limit |
//! |-------|-------|-------|
//! | [`jsd_fg_sweep`] | `g(t)/f(t)`, `2g'(t)/f'(t)` | `1/4`, `1/2` |
//! | [`cauchy_h_ratio_sweep`] | `h(2t)/h(t)`, `2h'(2t)/h'(t)`, `4h''(2t)/h''(t)` | `4` |
//! | [`cauchy_tv_ratio_sweep`] | `h(2t)/h(t)`, `h'(t)` for `tv` | `2`, `1/π` |
//! | [`cauchy_h2_limit`] | `h''(t)` | `f''(1)/2` |
//!
//! Limits are estimated by a least-squares line `ratio ≈ L + c·t` through the
//! three smallest `t`.

use std::f64::consts::{FRAC_1_PI, LN_2};

use serde::{Deserialize, Serialize};

use crate::cauchy::{h, h_double_prime, h_prime};
use crate::distributions::binary_point;
use crate::divergences::{jsd_in, LogBase};
use crate::error::{Error, Result};
use crate::generators::{generator_tv, Generator};

pub const DEFAULT_GRID: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
const FIT_POINTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub target_name: String,
    /// `(t, ratio)` pairs sorted by decreasing `t`.
    pub samples: Vec<(f64, f64)>,
    pub estimate: f64,
    pub error_bar: f64,
    pub expected: Option<f64>,
}

impl LimitEstimate {
    /// `|estimate - expected|`, if an expected value is known.
    pub fn deviation(&self) -> Option<f64> {
        self.expected.map(|e| (self.estimate - e).abs())
    }

    /// `true` when the estimate is within `tol` of the expected value.
    pub fn passes(&self, tol: f64) -> bool {
        self.deviation().is_some_and(|d| d <= tol)
    }

    /// `true` when the expected value lies inside the error bar.
    pub fn covers_expected(&self) -> bool {
        self.deviation().is_some_and(|d| d <= self.error_bar)
    }
}

/// Fits `ratio ≈ L + c·t` to the [`FIT_POINTS`] smallest `t` and reports `L`.
///
/// The error bar is the larger of the worst fit residual and the distance
/// from `L` to the ratio at the smallest `t`; the second term covers the
/// bias of a linear fit when the ratio is even in `t`.
pub fn extrapolate(
    target_name: impl Into<String>,
    mut samples: Vec<(f64, f64)>,
    expected: Option<f64>,
) -> Result<LimitEstimate> {
    let target_name = target_name.into();
    if samples.is_empty() {
        return Err(Error::domain(format!("no samples for `{target_name}`")));
    }
    if let Some(&(t, r)) = samples
        .iter()
        .find(|(t, r)| !t.is_finite() || !r.is_finite())
    {
        return Err(Error::domain(format!(
            "non-finite sample ({t}, {r}) for `{target_name}`"
        )));
    }
    samples.sort_by(|a, b| b.0.total_cmp(&a.0));
    let tail = &samples[samples.len().saturating_sub(FIT_POINTS)..];
    let (estimate, error_bar) = match tail {
        [(_, r)] => (*r, 0.0),
        _ => {
            let k = tail.len() as f64;
            let mean_t = tail.iter().map(|p| p.0).sum::<f64>() / k;
            let mean_r = tail.iter().map(|p| p.1).sum::<f64>() / k;
            let sxx: f64 = tail.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
            let sxy: f64 = tail.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_r)).sum();
            let slope = sxy / sxx;
            let intercept = mean_r - slope * mean_t;
            let residual = tail
                .iter()
                .map(|&(t, r)| (r - intercept - slope * t).abs())
                .fold(0.0, f64::max);
            let nearest = tail[tail.len() - 1].1;
            (intercept, residual.max((intercept - nearest).abs()))
        }
    };
    Ok(LimitEstimate {
        target_name,
        samples,
        estimate,
        error_bar,
        expected,
    })
}

fn check_binary_grid(ts: &[f64]) -> Result<()> {
    if ts.is_empty() {
        return Err(Error::domain("empty t grid"));
    }
    match ts.iter().find(|&&t| !(t > 0.0 && t < 0.5)) {
        Some(t) => Err(Error::domain(format!("grid value {t} not in (0, 1/2)"))),
        None => Ok(()),
    }
}

fn check_positive_grid(ts: &[f64]) -> Result<()> {
    if ts.is_empty() {
        return Err(Error::domain("empty t grid"));
    }
    match ts.iter().find(|&&t| !(t > 0.0) || !t.is_finite()) {
        Some(t) => Err(Error::domain(format!("grid value {t} is not positive"))),
        None => Ok(()),
    }
}

/// `f(t) = D_JS(P_{1/2-t} : P_{1/2+t})`.
pub fn jsd_f(t: f64, base: LogBase) -> Result<f64> {
    Ok(jsd_in(&binary_point(0.5 - t)?, &binary_point(0.5 + t)?, base)?.value)
}

/// `g(t) = D_JS(P_{1/2-t} : P_{1/2})`.
pub fn jsd_g(t: f64, base: LogBase) -> Result<f64> {
    Ok(jsd_in(&binary_point(0.5 - t)?, &binary_point(0.5)?, base)?.value)
}

/// `ln((1 + x)/(1 - x))`.
fn log_odds(x: f64) -> f64 {
    (2.0 * x / (1.0 - x)).ln_1p()
}

/// `f'(t) = -d/dt H(P_{1/2+t}) = log₂((1+2t)/(1-2t))`.
pub fn jsd_f_prime(t: f64) -> f64 {
    log_odds(2.0 * t) / LN_2
}

/// `g'(t) = d/dt H(P_{(1+t)/2}) - (1/2) d/dt H(P_{1/2+t})`, in bits.
pub fn jsd_g_prime(t: f64) -> f64 {
    0.5 * (log_odds(2.0 * t) - log_odds(t)) / LN_2
}

/// `2g'(t)/f'(t) = 1 - ln((1+t)/(1-t)) / ln((1+2t)/(1-2t))`.
pub fn two_g_prime_over_f_prime(t: f64) -> f64 {
    1.0 - log_odds(t) / log_odds(2.0 * t)
}

/// Limits of `g/f` (expected `1/4`) and `2g'/f'` (expected `1/2`).
pub fn jsd_fg_sweep(ts: &[f64]) -> Result<(LimitEstimate, LimitEstimate)> {
    jsd_fg_sweep_in(ts, LogBase::Two)
}

pub fn jsd_fg_sweep_in(ts: &[f64], base: LogBase) -> Result<(LimitEstimate, LimitEstimate)> {
    check_binary_grid(ts)?;
    let ratio = ts
        .iter()
        .map(|&t| Ok((t, jsd_g(t, base)? / jsd_f(t, base)?)))
        .collect::<Result<Vec<_>>>()?;
    let slopes = ts
        .iter()
        .map(|&t| (t, two_g_prime_over_f_prime(t)))
        .collect();
    Ok((
        extrapolate("g/f", ratio, Some(0.25))?,
        extrapolate("2g'/f'", slopes, Some(0.5))?,
    ))
}

/// `(g/f)^{1-α} - 2g'/f'`; positive for small `t` iff `α > 1/2`, with limit
/// `4^{α-1} - 1/2`.
pub fn eq1_margin(alpha: f64, t: f64) -> Result<f64> {
    check_binary_grid(&[t])?;
    if !alpha.is_finite() {
        return Err(Error::domain(format!("alpha must be finite, got {alpha}")));
    }
    let ratio = jsd_g(t, LogBase::Two)? / jsd_f(t, LogBase::Two)?;
    Ok(ratio.powf(1.0 - alpha) - two_g_prime_over_f_prime(t))
}

/// The three l'Hôpital ratios for a smooth generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HRatioSweep {
    /// `h(2t)/h(t)`.
    pub value: LimitEstimate,
    /// `2h'(2t)/h'(t)`.
    pub first: LimitEstimate,
    /// `4h''(2t)/h''(t)`.
    pub second: LimitEstimate,
}

impl HRatioSweep {
    pub fn estimates(&self) -> [&LimitEstimate; 3] {
        [&self.value, &self.first, &self.second]
    }
}

fn require_smooth(generator: &Generator) -> Result<f64> {
    generator
        .require_smooth_positive_curvature()
        .map_err(|e| match e {
            Error::Precondition(msg) => Error::Domain(msg),
            other => other,
        })
}

/// Limits of `h(2t)/h(t)`, `2h'(2t)/h'(t)` and `4h''(2t)/h''(t)`; all
/// three are expected to be 4.
pub fn cauchy_h_ratio_sweep(generator: &Generator, ts: &[f64]) -> Result<HRatioSweep> {
    require_smooth(generator)?;
    check_positive_grid(ts)?;
    let mut value = Vec::with_capacity(ts.len());
    let mut first = Vec::with_capacity(ts.len());
    let mut second = Vec::with_capacity(ts.len());
    for &t in ts {
        value.push((t, h(generator, 2.0 * t)? / h(generator, t)?));
        first.push((
            t,
            2.0 * h_prime(generator, 2.0 * t)? / h_prime(generator, t)?,
        ));
        second.push((
            t,
            4.0 * h_double_prime(generator, 2.0 * t)? / h_double_prime(generator, t)?,
        ));
    }
    Ok(HRatioSweep {
        value: extrapolate("h(2t)/h(t)", value, Some(4.0))?,
        first: extrapolate("2h'(2t)/h'(t)", first, Some(4.0))?,
        second: extrapolate("4h''(2t)/h''(t)", second, Some(4.0))?,
    })
}

/// For the total variation generator: limits of `h(2t)/h(t)` (expected 2)
/// and `h'(t)` (expected `1/π`).
pub fn cauchy_tv_ratio_sweep(ts: &[f64]) -> Result<(LimitEstimate, LimitEstimate)> {
    check_positive_grid(ts)?;
    let tv = generator_tv();
    let mut ratio = Vec::with_capacity(ts.len());
    let mut slope = Vec::with_capacity(ts.len());
    for &t in ts {
        let ht = h(&tv, t)?;
        if !(ht > 0.0) {
            return Err(Error::domain(format!("h({t}) = {ht} for tv, expected > 0")));
        }
        ratio.push((t, h(&tv, 2.0 * t)? / ht));
        slope.push((t, h_prime(&tv, t)?));
    }
    Ok((
        extrapolate("h(2t)/h(t)", ratio, Some(2.0))?,
        extrapolate("h'(t)", slope, Some(FRAC_1_PI))?,
    ))
}

/// Limit of `h''(t)` on [`DEFAULT_GRID`]; expected `f''(1)/2`.
pub fn cauchy_h2_limit(generator: &Generator) -> Result<LimitEstimate> {
    cauchy_h2_limit_on(generator, &DEFAULT_GRID)
}

pub fn cauchy_h2_limit_on(generator: &Generator, ts: &[f64]) -> Result<LimitEstimate> {
    let curvature = require_smooth(generator)?;
    check_positive_grid(ts)?;
    let samples = ts
        .iter()
        .map(|&t| Ok((t, h_double_prime(generator, t)?)))
        .collect::<Result<Vec<_>>>()?;
    extrapolate("h''(t)", samples, Some(0.5 * curvature))
}
