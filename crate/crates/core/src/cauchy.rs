//! f-divergences between univariate Cauchy distributions.
//!
//! Every f-divergence between `C(μ₁, σ₁)` and `C(μ₂, σ₂)` depends on the pair
//! only through the invariant
//!
//! ```text
//! ζ = 1 + ((μ₂ - μ₁)² + (σ₂ - σ₁)²) / (2 σ₁ σ₂)
//! ```
//!
//! and equals `∫₀^π f(1 / (ζ + √(ζ² - 1) cos θ)) dθ/π`. [`f_div_cauchy`]
//! evaluates that integral; [`f_div_cauchy_oracle`] integrates the defining
//! real-line integral instead and serves as a cross-check.
//!
//! Along the scale family `σ = e^{±t}` the invariant is `cosh t`, which gives
//! `h(t)` and its derivatives ([`h`], [`h_prime`], [`h_double_prime`]).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::quadrature::{integrate_with_breakpoints, Tolerance};

/// Tolerance for the θ-integral.
pub const THETA_TOLERANCE: Tolerance = Tolerance::new(1e-13, 1e-12);
/// Tolerance for the real-line oracle.
pub const ORACLE_TOLERANCE: Tolerance = Tolerance {
    abs: 1e-12,
    rel: 1e-12,
    max_intervals: 5000,
};
/// Finite-difference disagreement above which a derivative diagnostic is logged.
pub const DERIVATIVE_DISCREPANCY: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct CauchyParams {
    mu: f64,
    sigma: f64,
}

#[derive(Deserialize)]
struct RawParams {
    mu: f64,
    sigma: f64,
}

impl TryFrom<RawParams> for CauchyParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        CauchyParams::new(raw.mu, raw.sigma)
    }
}

impl CauchyParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !sigma.is_finite() || !(sigma > 0.0) {
            return Err(Error::domain(format!(
                "Cauchy parameters need finite mu and sigma > 0, got ({mu}, {sigma})"
            )));
        }
        Ok(CauchyParams { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn density(&self, x: f64) -> f64 {
        let z = x - self.mu;
        self.sigma / (PI * (z * z + self.sigma * self.sigma))
    }

    /// Common translation `μ ↦ μ + shift`.
    pub fn translate(&self, shift: f64) -> Result<Self> {
        CauchyParams::new(self.mu + shift, self.sigma)
    }

    /// Common scaling `(μ, σ) ↦ (kμ, kσ)`.
    pub fn scale(&self, k: f64) -> Result<Self> {
        CauchyParams::new(k * self.mu, k * self.sigma)
    }
}

/// The invariant `ζ ≥ 1` of a pair of Cauchy distributions. The excess
/// `ζ - 1` is stored separately so that nearby pairs keep full precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zeta {
    excess: f64,
}

impl Zeta {
    /// Builds `ζ` from its excess `ζ - 1 >= 0`.
    pub fn from_excess(excess: f64) -> Result<Self> {
        if !(excess >= 0.0) || !excess.is_finite() {
            return Err(Error::domain(format!(
                "zeta excess {excess} must be finite and >= 0"
            )));
        }
        Ok(Zeta { excess })
    }

    pub fn value(&self) -> f64 {
        1.0 + self.excess
    }

    pub fn excess(&self) -> f64 {
        self.excess
    }

    /// `√(ζ² - 1)`.
    pub fn radius(&self) -> f64 {
        (self.excess * (self.excess + 2.0)).sqrt()
    }

    /// The range `[ζ - √(ζ²-1), ζ + √(ζ²-1)]` of the density ratio `p_b / p_a`.
    pub fn ratio_range(&self) -> (f64, f64) {
        let upper = self.value() + self.radius();
        (1.0 / upper, upper)
    }
}

pub fn zeta(a: &CauchyParams, b: &CauchyParams) -> Zeta {
    let dmu = b.mu - a.mu;
    let dsigma = b.sigma - a.sigma;
    Zeta {
        excess: (dmu * dmu + dsigma * dsigma) / (2.0 * a.sigma * b.sigma),
    }
}

/// Range of `p_b(x) / p_a(x)` over the real line; always a compact subset
/// of `(0, ∞)`.
pub fn density_ratio_range(a: &CauchyParams, b: &CauchyParams) -> (f64, f64) {
    zeta(a, b).ratio_range()
}

/// `D_f(p_a : p_b)` through the θ-integral.
pub fn f_div_cauchy(generator: &Generator, a: &CauchyParams, b: &CauchyParams) -> Result<f64> {
    f_div_from_zeta(generator, zeta(a, b))
}

/// `∫₀^π f(1/(ζ + √(ζ²-1) cos θ)) dθ/π`.
pub fn f_div_from_zeta(generator: &Generator, z: Zeta) -> Result<f64> {
    if z.excess == 0.0 {
        return Ok(0.0);
    }
    let radius = z.radius();
    let (lo, hi) = z.ratio_range();
    let integrand = |theta: f64| {
        let u = 1.0 / scale_denominator(lo, radius, theta);
        debug_assert!(
            u >= lo * (1.0 - 1e-12) && u <= hi * (1.0 + 1e-12),
            "ratio {u} outside [{lo}, {hi}]"
        );
        generator.eval(u)
    };
    // The argument crosses 1 where cos θ = (1 - ζ)/√(ζ² - 1).
    let kink = (-z.excess / radius).clamp(-1.0, 1.0).acos();
    theta_integral(generator, integrand, kink)
}

/// `ζ + r cos θ` written as `(ζ - r) + 2r cos²(θ/2)`, where `ζ - r = 1/(ζ + r)`
/// is passed as `floor`. Both terms are non-negative, so there is no
/// cancellation near `θ = π` even for large `ζ`.
fn scale_denominator(floor: f64, radius: f64, theta: f64) -> f64 {
    let half = (0.5 * theta).cos();
    floor + 2.0 * radius * half * half
}

fn theta_integral<F: FnMut(f64) -> f64>(generator: &Generator, f: F, kink: f64) -> Result<f64> {
    let result = if generator.smooth_at_1() {
        integrate_with_breakpoints(f, &[0.0, PI], THETA_TOLERANCE)?
    } else {
        integrate_with_breakpoints(f, &[0.0, kink, PI], THETA_TOLERANCE)?
    };
    Ok(result.value / PI)
}

fn clamp_nonnegative(generator: &Generator, v: f64) -> f64 {
    if generator.convexity_warning() {
        v
    } else {
        v.max(0.0)
    }
}

/// `D_f(p_a : p_b) = ∫ f(p_b/p_a) p_a dx`, integrated directly over the
/// real line after the substitution `x = μ_a + σ_a tan u`, which turns
/// `p_a dx` into `du/π` on `(-π/2, π/2)`.
pub fn f_div_cauchy_oracle(
    generator: &Generator,
    a: &CauchyParams,
    b: &CauchyParams,
) -> Result<f64> {
    let dmu = a.mu - b.mu;
    let ratio = |u: f64| {
        let (s, c) = u.sin_cos();
        let shifted = a.sigma * s + dmu * c;
        let spread = b.sigma * c;
        a.sigma * b.sigma / (shifted * shifted + spread * spread)
    };
    let half_pi = 0.5 * PI;
    let result = integrate_with_breakpoints(
        |u| generator.eval(ratio(u)),
        &[-half_pi, 0.0, half_pi],
        ORACLE_TOLERANCE,
    )?;
    Ok(clamp_nonnegative(generator, result.value / PI))
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("t must be finite and > 0, got {t}")));
    }
    Ok(())
}

/// Kink of the `h` integrands: `cosh t + sinh t cos θ = 1` at
/// `cos θ = -tanh(t/2)`.
fn scale_family_kink(t: f64) -> f64 {
    (-(0.5 * t).tanh()).acos()
}

/// `cosh t`, `sinh t` and `e^{-t}` for the scale family at a fixed `t`.
#[derive(Clone, Copy)]
struct ScaleFamily {
    cosh: f64,
    sinh: f64,
    decay: f64,
}

impl ScaleFamily {
    fn new(t: f64) -> Self {
        ScaleFamily {
            cosh: t.cosh(),
            sinh: t.sinh(),
            decay: (-t).exp(),
        }
    }

    /// `(cosh t + sinh t cos θ, sinh t + cosh t cos θ)`, evaluated without
    /// cancellation near `θ = π`.
    fn terms(&self, theta: f64) -> (f64, f64) {
        let half = (0.5 * theta).cos();
        let lift = 2.0 * half * half;
        (self.decay + self.sinh * lift, self.cosh * lift - self.decay)
    }
}

/// `h(t) = D_f(C(0, e^{-t}) : C(0, 1)) = D_f(C(0, 1) : C(0, e^t))`.
pub fn h(generator: &Generator, t: f64) -> Result<f64> {
    check_t(t)?;
    let family = ScaleFamily::new(t);
    let v = theta_integral(
        generator,
        |theta| generator.eval(1.0 / family.terms(theta).0),
        scale_family_kink(t),
    )?;
    Ok(clamp_nonnegative(generator, v))
}

/// `h'(t) = ∫ -(sinh t + cosh t cos θ)/(cosh t + sinh t cos θ)² f'(·) dθ/π`.
///
/// At a kink of a non-smooth generator the mean of the one-sided
/// derivatives is used; the kink is a subinterval boundary so this never
/// affects the integral.
pub fn h_prime(generator: &Generator, t: f64) -> Result<f64> {
    check_t(t)?;
    let family = ScaleFamily::new(t);
    theta_integral(
        generator,
        |theta| {
            let (a, b) = family.terms(theta);
            -b / (a * a) * generator.deriv1_ae(1.0 / a)
        },
        scale_family_kink(t),
    )
}

/// `h''(t)`, from the two-term integrand in `f''` and `f'`. Requires a
/// generator that is C² near 1.
pub fn h_double_prime(generator: &Generator, t: f64) -> Result<f64> {
    check_t(t)?;
    if !generator.smooth_at_1() {
        return Err(Error::domain(format!(
            "h'' needs a generator that is C² near 1; `{}` is not",
            generator.name()
        )));
    }
    let family = ScaleFamily::new(t);
    theta_integral(
        generator,
        |theta| {
            let (a, b) = family.terms(theta);
            let u = 1.0 / a;
            let curvature = generator.deriv2(u).unwrap_or(f64::NAN);
            let slope = generator.deriv1_ae(u);
            let a2 = a * a;
            b * b / (a2 * a2) * curvature + (2.0 * b * b - a2) / (a2 * a) * slope
        },
        0.0,
    )
}

/// Analytic derivatives of `h` next to centered finite differences of `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheck {
    pub t: f64,
    pub first: f64,
    pub first_fd: f64,
    pub second: Option<f64>,
    pub second_fd: f64,
}

impl DerivativeCheck {
    pub fn max_discrepancy(&self) -> f64 {
        let d1 = (self.first - self.first_fd).abs();
        let d2 = self.second.map_or(0.0, |v| (v - self.second_fd).abs());
        d1.max(d2)
    }
}

/// Compares [`h_prime`] and [`h_double_prime`] with finite differences of
/// [`h`] and logs a warning when they disagree by more than
/// [`DERIVATIVE_DISCREPANCY`].
pub fn check_h_derivatives(generator: &Generator, t: f64) -> Result<DerivativeCheck> {
    check_t(t)?;
    let d1 = 1e-5_f64.min(0.5 * t);
    let d2 = 1e-3_f64.min(0.5 * t);
    let first_fd = (h(generator, t + d1)? - h(generator, t - d1)?) / (2.0 * d1);
    let second_fd =
        (h(generator, t + d2)? - 2.0 * h(generator, t)? + h(generator, t - d2)?) / (d2 * d2);
    let check = DerivativeCheck {
        t,
        first: h_prime(generator, t)?,
        first_fd,
        second: if generator.smooth_at_1() {
            Some(h_double_prime(generator, t)?)
        } else {
            None
        },
        second_fd,
    };
    if check.max_discrepancy() > DERIVATIVE_DISCREPANCY {
        log::warn!(
            "generator `{}`: analytic and finite-difference derivatives of h differ by {:e} at t = {t}",
            generator.name(),
            check.max_discrepancy()
        );
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generator_js, generator_kl, generator_tv};
    use approx::assert_relative_eq;

    fn p(mu: f64, sigma: f64) -> CauchyParams {
        CauchyParams::new(mu, sigma).unwrap()
    }

    /// KL between Cauchy distributions, `ln((1 + ζ)/2)`.
    fn kl_closed_form(zeta: f64) -> f64 {
        ((1.0 + zeta) / 2.0).ln()
    }

    #[test]
    fn params_validation() {
        assert!(CauchyParams::new(0.0, 0.0).is_err());
        assert!(CauchyParams::new(0.0, -1.0).is_err());
        assert!(CauchyParams::new(f64::NAN, 1.0).is_err());
        assert!(serde_json::from_str::<CauchyParams>(r#"{"mu":0,"sigma":-2}"#).is_err());
        let q: CauchyParams = serde_json::from_str(r#"{"mu":1.5,"sigma":2}"#).unwrap();
        assert_eq!(q, p(1.5, 2.0));
        assert_relative_eq!(p(0.0, 1.0).density(0.0), 1.0 / PI);
    }

    #[test]
    fn zeta_examples() {
        assert_eq!(zeta(&p(0.0, 1.0), &p(0.0, 1.0)).value(), 1.0);
        let t: f64 = 0.5;
        assert_relative_eq!(
            zeta(&p(0.0, 1.0), &p(0.0, t.exp())).value(),
            t.cosh(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            zeta(&p(0.0, (-t).exp()), &p(0.0, t.exp())).value(),
            (2.0 * t).cosh(),
            max_relative = 1e-15
        );
        let (a, b) = (p(0.3, 2.0), p(-1.0, 0.7));
        assert_eq!(zeta(&a, &b), zeta(&b, &a));
    }

    #[test]
    fn zeta_group_invariance() {
        let (a, b) = (p(0.3, 2.0), p(-1.0, 0.7));
        let z = zeta(&a, &b).value();
        let shifted = zeta(&a.translate(5.0).unwrap(), &b.translate(5.0).unwrap()).value();
        let scaled = zeta(&a.scale(3.5).unwrap(), &b.scale(3.5).unwrap()).value();
        assert_relative_eq!(z, shifted, max_relative = 1e-13);
        assert_relative_eq!(z, scaled, max_relative = 1e-13);
    }

    #[test]
    fn identical_pair_is_zero() {
        let a = p(0.4, 1.3);
        for g in [generator_js(), generator_kl(), generator_tv()] {
            assert_eq!(f_div_cauchy(&g, &a, &a).unwrap(), 0.0);
            assert!(f_div_cauchy_oracle(&g, &a, &a).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_matches_oracle() {
        let (a, b) = (p(0.0, 1.0), p(0.0, std::f64::consts::E));
        let kl = generator_kl();
        let closed = f_div_cauchy(&kl, &a, &b).unwrap();
        assert!((closed - f_div_cauchy_oracle(&kl, &a, &b).unwrap()).abs() < 1e-8);

        let tv = generator_tv();
        let b = p(0.0, 0.1f64.exp());
        let closed = f_div_cauchy(&tv, &a, &b).unwrap();
        // Half the L1 distance between the densities, on the real line.
        let l1 = crate::quadrature::integrate_with_breakpoints(
            |u: f64| {
                let x = u.tan();
                (b.density(x) - a.density(x)).abs() / u.cos().powi(2)
            },
            &[-0.5 * PI, 0.0, 0.5 * PI],
            ORACLE_TOLERANCE,
        )
        .unwrap()
        .value;
        assert!((closed - 0.5 * l1).abs() < 1e-8, "{closed} vs {}", 0.5 * l1);
    }

    #[test]
    fn oracle_kl_closed_form_and_symmetry() {
        let kl = generator_kl();
        for t in [0.5f64, 1.0] {
            let (a, b) = (p(0.0, 1.0), p(0.0, t.exp()));
            let expected = 2.0 * (0.5 * t).cosh().ln();
            assert!((f_div_cauchy_oracle(&kl, &a, &b).unwrap() - expected).abs() < 1e-9);
        }
        let (a, b) = (p(0.2, 0.5), p(-1.0, 3.0));
        for g in [generator_js(), generator_kl(), generator_tv()] {
            let ab = f_div_cauchy_oracle(&g, &a, &b).unwrap();
            let ba = f_div_cauchy_oracle(&g, &b, &a).unwrap();
            assert!((ab - ba).abs() < 2e-9, "{}: {ab} vs {ba}", g.name());
        }
    }

    #[test]
    fn density_ratio_is_bounded_by_zeta() {
        let (a, b) = (p(0.7, 0.4), p(-2.0, 1.9));
        let (lo, hi) = density_ratio_range(&a, &b);
        assert!(lo > 0.0 && hi.is_finite());
        assert_relative_eq!(lo * hi, 1.0, max_relative = 1e-14);
        let (mut seen_lo, mut seen_hi) = (f64::INFINITY, 0.0f64);
        for i in 1..200_000 {
            let x = (PI * (i as f64 / 200_000.0 - 0.5)).tan();
            let r = b.density(x) / a.density(x);
            seen_lo = seen_lo.min(r);
            seen_hi = seen_hi.max(r);
        }
        assert!(seen_lo >= lo * (1.0 - 1e-12) && seen_hi <= hi * (1.0 + 1e-12));
        assert_relative_eq!(seen_lo, lo, max_relative = 1e-6);
        assert_relative_eq!(seen_hi, hi, max_relative = 1e-6);
    }

    #[test]
    fn h_matches_pairs() {
        let t: f64 = 0.37;
        for g in [generator_js(), generator_kl(), generator_tv()] {
            let ht = h(&g, t).unwrap();
            let left = f_div_cauchy(&g, &p(0.0, (-t).exp()), &p(0.0, 1.0)).unwrap();
            let right = f_div_cauchy(&g, &p(0.0, 1.0), &p(0.0, t.exp())).unwrap();
            assert!((ht - left).abs() < 1e-10 && (ht - right).abs() < 1e-10);
            let h2t = h(&g, 2.0 * t).unwrap();
            let outer = f_div_cauchy(&g, &p(0.0, (-t).exp()), &p(0.0, t.exp())).unwrap();
            assert!((h2t - outer).abs() < 1e-10);
        }
        assert!(h(&generator_js(), 0.0).is_err());
        assert!(h(&generator_js(), -1.0).is_err());
    }

    #[test]
    fn h_kl_closed_form() {
        let kl = generator_kl();
        assert_relative_eq!(
            h(&kl, 1.0).unwrap(),
            2.0 * 0.5f64.cosh().ln(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            h(&kl, 1.0).unwrap(),
            kl_closed_form(1f64.cosh()),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            h_prime(&kl, 0.5).unwrap(),
            0.25f64.tanh(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn h_vanishes_at_zero() {
        for g in [generator_js(), generator_kl(), generator_tv()] {
            assert!(h(&g, 1e-6).unwrap() < 1e-5);
        }
        for g in [generator_js(), generator_kl()] {
            assert!(h_prime(&g, 1e-6).unwrap().abs() < 1e-5);
        }
    }

    #[test]
    fn h_prime_matches_finite_difference() {
        let js = generator_js();
        let t = 0.01;
        let d = 1e-5;
        let fd = (h(&js, t + d).unwrap() - h(&js, t - d).unwrap()) / (2.0 * d);
        assert!((h_prime(&js, t).unwrap() - fd).abs() < 1e-6);
        for g in [generator_js(), generator_kl(), generator_tv()] {
            for t in [1e-3, 0.01, 0.1, 0.5, 1.0] {
                let check = check_h_derivatives(&g, t).unwrap();
                assert!(
                    (check.first - check.first_fd).abs() < 1e-6,
                    "{} t={t}: {check:?}",
                    g.name()
                );
            }
        }
    }

    #[test]
    fn h_double_prime_checks() {
        let js = generator_js();
        assert!((h_double_prime(&js, 1e-4).unwrap() - 0.125).abs() < 1e-4);
        assert!((h_double_prime(&generator_kl(), 1e-4).unwrap() - 0.5).abs() < 1e-4);
        let check = check_h_derivatives(&js, 0.01).unwrap();
        assert!(
            (check.second.unwrap() - check.second_fd).abs() < 1e-5,
            "{check:?}"
        );
        assert!(matches!(
            h_double_prime(&generator_tv(), 0.1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn tv_slope_at_zero() {
        let v = h_prime(&generator_tv(), 1e-3).unwrap();
        assert!((v - 1.0 / PI).abs() < 1e-3);
    }
}
