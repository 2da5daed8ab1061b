//! Convex generators `f` for f-divergences `D_f(P:Q) = ∫ f(q/p) p`.
//!
//! The built-in generators use natural logarithms:
//!
//! | id | `f(u)` | `f''(1)` |
//! |----|--------|----------|
//! | `js` | `(u ln(2u/(1+u)) - ln((1+u)/2)) / 2` | `1/4` |
//! | `kl` | `-ln u` | `1` |
//! | `tv` | `|u - 1| / 2` | not defined |

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Probe grid for the convexity spot-check.
const CONVEXITY_GRID_LEN: usize = 25;
const CONVEXITY_SLACK: f64 = 1e-12;
const UNIT_VALUE_TOL: f64 = 1e-14;
const DERIVATIVE_CHECK_POINTS: [f64; 3] = [0.5, 1.0, 2.0];
const DERIVATIVE_CHECK_RTOL: f64 = 1e-6;

/// A generator function with its first two derivatives and the metadata the
/// divergence routines need at the boundary of `(0, ∞)`.
#[derive(Clone)]
pub struct Generator {
    name: String,
    eval: ScalarFn,
    deriv1: Option<ScalarFn>,
    deriv2: Option<ScalarFn>,
    smooth_at_1: bool,
    one_sided_at_1: Option<(f64, f64)>,
    value_at_0: Option<f64>,
    slope_at_infinity: Option<f64>,
    convexity_warning: bool,
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Generator")
            .field("name", &self.name)
            .field("smooth_at_1", &self.smooth_at_1)
            .field("one_sided_at_1", &self.one_sided_at_1)
            .field("value_at_0", &self.value_at_0)
            .field("slope_at_infinity", &self.slope_at_infinity)
            .field("convexity_warning", &self.convexity_warning)
            .finish_non_exhaustive()
    }
}

impl Generator {
    /// Starts a user-defined generator. Derivatives that are not supplied
    /// are computed by centered finite differences of `eval`.
    pub fn builder<F>(name: impl Into<String>, eval: F) -> GeneratorBuilder
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        GeneratorBuilder {
            generator: Generator {
                name: name.into(),
                eval: Arc::new(eval),
                deriv1: None,
                deriv2: None,
                smooth_at_1: true,
                one_sided_at_1: None,
                value_at_0: None,
                slope_at_infinity: None,
                convexity_warning: false,
            },
        }
    }

    /// Looks up a built-in generator by its CLI id.
    pub fn by_id(id: &str) -> Result<Generator> {
        match id {
            "js" => Ok(generator_js()),
            "kl" => Ok(generator_kl()),
            "tv" => Ok(generator_tv()),
            other => Err(Error::domain(format!(
                "unknown generator `{other}` (expected js, kl or tv)"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn smooth_at_1(&self) -> bool {
        self.smooth_at_1
    }

    pub fn defined_at_0(&self) -> bool {
        self.value_at_0.is_some()
    }

    /// `f(0+)`, when finite.
    pub fn value_at_0(&self) -> Option<f64> {
        self.value_at_0
    }

    /// `lim f(u)/u` as `u → ∞`, when finite.
    pub fn slope_at_infinity(&self) -> Option<f64> {
        self.slope_at_infinity
    }

    /// Left and right derivatives at 1 for generators with a kink there.
    pub fn one_sided_at_1(&self) -> Option<(f64, f64)> {
        self.one_sided_at_1
    }

    /// Set when the convexity spot-check failed at registration.
    pub fn convexity_warning(&self) -> bool {
        self.convexity_warning
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u == 0.0 {
            if let Some(v) = self.value_at_0 {
                return v;
            }
        }
        (self.eval)(u)
    }

    pub fn deriv1(&self, u: f64) -> Result<f64> {
        self.check_differentiable(u)?;
        Ok(match &self.deriv1 {
            Some(d) => d(u),
            None => central_first_difference(&*self.eval, u),
        })
    }

    pub fn deriv2(&self, u: f64) -> Result<f64> {
        self.check_differentiable(u)?;
        Ok(match &self.deriv2 {
            Some(d) => d(u),
            None => central_second_difference(&*self.eval, u),
        })
    }

    /// First derivative defined almost everywhere: at a kink it returns the
    /// mean of the one-sided derivatives. Used inside integrals, where the
    /// kink is a null set.
    pub(crate) fn deriv1_ae(&self, u: f64) -> f64 {
        match (u == 1.0, self.one_sided_at_1) {
            (true, Some((left, right))) => 0.5 * (left + right),
            _ => match &self.deriv1 {
                Some(d) => d(u),
                None => central_first_difference(&*self.eval, u),
            },
        }
    }

    /// Fails unless the generator satisfies the hypotheses of the Cauchy
    /// non-metricity construction: smooth at 1 with `f''(1) > 0`.
    pub fn require_smooth_positive_curvature(&self) -> Result<f64> {
        if !self.smooth_at_1 {
            return Err(Error::Precondition(format!(
                "generator `{}` is not C² near u = 1",
                self.name
            )));
        }
        let curvature = self.deriv2(1.0)?;
        if !(curvature > 0.0) {
            return Err(Error::Precondition(format!(
                "generator `{}` has f''(1) = {curvature}, expected > 0",
                self.name
            )));
        }
        Ok(curvature)
    }

    fn check_differentiable(&self, u: f64) -> Result<()> {
        if !(u > 0.0) || !u.is_finite() {
            return Err(Error::domain(format!(
                "generator `{}` evaluated at u = {u} outside (0, ∞)",
                self.name
            )));
        }
        if u == 1.0 && !self.smooth_at_1 {
            return Err(Error::NotDifferentiable {
                generator: self.name.clone(),
                u,
            });
        }
        Ok(())
    }
}

pub struct GeneratorBuilder {
    generator: Generator,
}

impl GeneratorBuilder {
    pub fn deriv1<F>(mut self, d: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.generator.deriv1 = Some(Arc::new(d));
        self
    }

    pub fn deriv2<F>(mut self, d: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.generator.deriv2 = Some(Arc::new(d));
        self
    }

    /// Marks the generator as having a kink at 1 with the given one-sided
    /// first derivatives.
    pub fn kink_at_1(mut self, left: f64, right: f64) -> Self {
        self.generator.smooth_at_1 = false;
        self.generator.one_sided_at_1 = Some((left, right));
        self
    }

    pub fn value_at_0(mut self, v: f64) -> Self {
        self.generator.value_at_0 = Some(v);
        self
    }

    pub fn slope_at_infinity(mut self, s: f64) -> Self {
        self.generator.slope_at_infinity = Some(s);
        self
    }

    /// Validates the generator: `f(1) = 0`, supplied derivatives agree with
    /// finite differences, and a convexity spot-check (failure only sets
    /// [`Generator::convexity_warning`]).
    pub fn build(self) -> Result<Generator> {
        let mut g = self.generator;
        let invalid = |reason: String| Error::InvalidGenerator {
            name: g.name.clone(),
            reason,
        };

        let at_one = (g.eval)(1.0);
        if !(at_one.abs() <= UNIT_VALUE_TOL) {
            return Err(invalid(format!("f(1) = {at_one:e}, expected 0")));
        }

        for &u in &DERIVATIVE_CHECK_POINTS {
            if u == 1.0 && !g.smooth_at_1 {
                continue;
            }
            if let Some(d) = &g.deriv1 {
                let (exact, fd) = (d(u), central_first_difference(&*g.eval, u));
                if !agrees(exact, fd) {
                    return Err(invalid(format!(
                        "f'({u}) = {exact} but finite difference gives {fd}"
                    )));
                }
            }
            if let Some(d) = &g.deriv2 {
                let (exact, fd) = (d(u), central_second_difference(&*g.eval, u));
                if !agrees(exact, fd) {
                    return Err(invalid(format!(
                        "f''({u}) = {exact} but finite difference gives {fd}"
                    )));
                }
            }
        }

        g.convexity_warning = !passes_convexity_spot_check(&*g.eval);
        if g.convexity_warning {
            log::warn!("generator `{}` failed the convexity spot-check", g.name);
        }
        Ok(g)
    }
}

fn agrees(exact: f64, approx: f64) -> bool {
    (exact - approx).abs() <= DERIVATIVE_CHECK_RTOL * exact.abs().max(approx.abs()).max(1.0)
}

fn convexity_grid() -> impl Iterator<Item = f64> {
    // Geometric grid from 0.1 to 10.
    (0..CONVEXITY_GRID_LEN)
        .map(|i| 10f64.powf(-1.0 + 2.0 * i as f64 / (CONVEXITY_GRID_LEN - 1) as f64))
}

fn passes_convexity_spot_check(f: &dyn Fn(f64) -> f64) -> bool {
    let grid: Vec<(f64, f64)> = convexity_grid().map(|u| (u, f(u))).collect();
    grid.iter().enumerate().all(|(i, &(a, fa))| {
        grid[i + 1..]
            .iter()
            .all(|&(b, fb)| f(0.5 * (a + b)) <= 0.5 * (fa + fb) + CONVEXITY_SLACK)
    })
}

pub(crate) fn central_first_difference(f: &dyn Fn(f64) -> f64, u: f64) -> f64 {
    let h = 1e-5 * u.min(1.0);
    (f(u + h) - f(u - h)) / (2.0 * h)
}

pub(crate) fn central_second_difference(f: &dyn Fn(f64) -> f64, u: f64) -> f64 {
    let h = 1e-4 * u.min(1.0);
    (f(u + h) - 2.0 * f(u) + f(u - h)) / (h * h)
}

/// Jensen-Shannon generator `f(u) = (u ln(2u/(1+u)) - ln((1+u)/2)) / 2`.
pub fn generator_js() -> Generator {
    fn log_two_u_over_one_plus_u(u: f64) -> f64 {
        if u < 0.5 {
            (2.0 * u / (1.0 + u)).ln()
        } else {
            ((u - 1.0) / (u + 1.0)).ln_1p()
        }
    }
    let ln2 = std::f64::consts::LN_2;
    Generator::builder("js", move |u: f64| {
        if u == 0.0 {
            return 0.5 * ln2;
        }
        0.5 * (u * log_two_u_over_one_plus_u(u) - (0.5 * (u - 1.0)).ln_1p())
    })
    .deriv1(|u| 0.5 * log_two_u_over_one_plus_u(u))
    .deriv2(|u| 1.0 / (2.0 * u * (1.0 + u)))
    .value_at_0(0.5 * ln2)
    .slope_at_infinity(0.5 * ln2)
    .build()
    .expect("built-in js generator is valid")
}

/// Kullback-Leibler generator `f(u) = -ln u`, so that `D_f(P:Q) = ∫ p ln(p/q)`.
pub fn generator_kl() -> Generator {
    Generator::builder("kl", |u: f64| -u.ln())
        .deriv1(|u| -1.0 / u)
        .deriv2(|u| 1.0 / (u * u))
        .slope_at_infinity(0.0)
        .build()
        .expect("built-in kl generator is valid")
}

/// Total variation generator `f(u) = |u - 1| / 2`.
pub fn generator_tv() -> Generator {
    Generator::builder("tv", |u: f64| 0.5 * (u - 1.0).abs())
        .deriv1(|u| if u > 1.0 { 0.5 } else { -0.5 })
        .deriv2(|_| 0.0)
        .kink_at_1(-0.5, 0.5)
        .value_at_0(0.5)
        .slope_at_infinity(0.5)
        .build()
        .expect("built-in tv generator is valid")
}
