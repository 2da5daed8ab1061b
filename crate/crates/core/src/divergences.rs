//! Divergences between multinomials.
//!
//! [`kl`] and [`jsd`] report values in bits; [`f_divergence_discrete`]
//! stays on the generator's natural-log scale.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::distributions::{entropy_in, Multinomial};
use crate::error::{Error, Result};
use crate::generators::Generator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LogBase {
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "e")]
    E,
}

impl LogBase {
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::Two => nats / LN_2,
            LogBase::E => nats,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            LogBase::Two => "2",
            LogBase::E => "e",
        }
    }
}

/// A divergence value together with the logarithm base it is expressed in.
/// The value may be `+∞` for KL and generic f-divergences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceValue {
    pub value: f64,
    pub base: LogBase,
}

impl DivergenceValue {
    fn new(value: f64, base: LogBase) -> Self {
        DivergenceValue { value, base }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

fn same_dim(p: &Multinomial, q: &Multinomial) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(Error::domain(format!(
            "dimension mismatch: {} vs {}",
            p.dim(),
            q.dim()
        )));
    }
    Ok(())
}

fn pairs<'a>(p: &'a Multinomial, q: &'a Multinomial) -> impl Iterator<Item = (f64, f64)> + 'a {
    p.weights().iter().copied().zip(q.weights().iter().copied())
}

/// Kullback-Leibler divergence in bits; `+∞` when `P` is not absolutely
/// continuous with respect to `Q`.
pub fn kl(p: &Multinomial, q: &Multinomial) -> Result<DivergenceValue> {
    kl_in(p, q, LogBase::Two)
}

pub fn kl_in(p: &Multinomial, q: &Multinomial, base: LogBase) -> Result<DivergenceValue> {
    same_dim(p, q)?;
    let mut nats = 0.0;
    for (pi, qi) in pairs(p, q).filter(|&(pi, _)| pi > 0.0) {
        if qi == 0.0 {
            return Ok(DivergenceValue::new(f64::INFINITY, base));
        }
        nats += pi * (pi / qi).ln();
    }
    Ok(DivergenceValue::new(base.from_nats(nats).max(0.0), base))
}

/// Per-coordinate Jensen-Shannon term in nats,
/// `(p ln(2p/(p+q)) + q ln(2q/(p+q))) / 2`.
///
/// Written with `ln_1p((p - q)/(p + q))` so that nearby points keep full
/// relative precision, and symmetric in `(p, q)` bit for bit.
fn jsd_term(p: f64, q: f64) -> f64 {
    let s = p + q;
    if s == 0.0 {
        return 0.0;
    }
    let x = (p - q) / s;
    let a = if p > 0.0 { p * x.ln_1p() } else { 0.0 };
    let b = if q > 0.0 { q * (-x).ln_1p() } else { 0.0 };
    0.5 * (a + b)
}

/// Jensen-Shannon divergence in bits; lies in `[0, 1]` and is defined for
/// boundary points.
pub fn jsd(p: &Multinomial, q: &Multinomial) -> Result<DivergenceValue> {
    jsd_in(p, q, LogBase::Two)
}

pub fn jsd_in(p: &Multinomial, q: &Multinomial, base: LogBase) -> Result<DivergenceValue> {
    same_dim(p, q)?;
    let nats: f64 = pairs(p, q).map(|(pi, qi)| jsd_term(pi, qi)).sum();
    Ok(DivergenceValue::new(base.from_nats(nats).max(0.0), base))
}

/// Jensen-Shannon divergence through `H((P+Q)/2) - (H(P) + H(Q))/2`.
///
/// Loses relative precision when `P` and `Q` are close; kept as an
/// independent route for cross-checking [`jsd`].
pub fn jsd_entropy_form(p: &Multinomial, q: &Multinomial, base: LogBase) -> Result<f64> {
    same_dim(p, q)?;
    let mid: Vec<f64> = pairs(p, q).map(|(pi, qi)| 0.5 * (pi + qi)).collect();
    let mid = Multinomial::new(&mid)?;
    Ok(entropy_in(&mid, base) - 0.5 * (entropy_in(p, base) + entropy_in(q, base)))
}

/// Jensen-Shannon divergence as `(KL(P:M) + KL(Q:M)) / 2` with `M = (P+Q)/2`.
pub fn jsd_kl_average(p: &Multinomial, q: &Multinomial, base: LogBase) -> Result<f64> {
    same_dim(p, q)?;
    let mid: Vec<f64> = pairs(p, q).map(|(pi, qi)| 0.5 * (pi + qi)).collect();
    let mid = Multinomial::new(&mid)?;
    Ok(0.5 * (kl_in(p, &mid, base)?.value + kl_in(q, &mid, base)?.value))
}

/// Total variation `Σ |p_i - q_i|`, in `[0, 2]`.
pub fn tvd(p: &Multinomial, q: &Multinomial) -> Result<DivergenceValue> {
    same_dim(p, q)?;
    let value = pairs(p, q).map(|(pi, qi)| (pi - qi).abs()).sum();
    Ok(DivergenceValue::new(value, LogBase::E))
}

/// `Σ p_i f(q_i / p_i)` on the generator's natural-log scale.
///
/// Coordinates with `p_i = 0 < q_i` contribute `q_i · lim f(u)/u` and
/// coordinates with `q_i = 0 < p_i` contribute `p_i · f(0+)`; either limit
/// being unavailable gives `+∞`.
pub fn f_divergence_discrete(
    generator: &Generator,
    p: &Multinomial,
    q: &Multinomial,
) -> Result<DivergenceValue> {
    same_dim(p, q)?;
    let mut total = 0.0;
    for (pi, qi) in pairs(p, q) {
        let term = match (pi > 0.0, qi > 0.0) {
            (true, true) => pi * generator.eval(qi / pi),
            (false, true) => match generator.slope_at_infinity() {
                Some(slope) => qi * slope,
                None => return Ok(DivergenceValue::new(f64::INFINITY, LogBase::E)),
            },
            (true, false) => match generator.value_at_0() {
                Some(v) => pi * v,
                None => return Ok(DivergenceValue::new(f64::INFINITY, LogBase::E)),
            },
            (false, false) => 0.0,
        };
        if term.is_nan() {
            return Err(Error::domain(format!(
                "generator `{}` produced NaN at p = {pi}, q = {qi}",
                generator.name()
            )));
        }
        total += term;
    }
    if !generator.convexity_warning() {
        total = total.max(0.0);
    }
    Ok(DivergenceValue::new(total, LogBase::E))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::binary_point;
    use crate::generators::{generator_js, generator_kl, generator_tv};
    use approx::assert_relative_eq;

    fn m(w: &[f64]) -> Multinomial {
        Multinomial::new(w).unwrap()
    }

    #[test]
    fn kl_examples() {
        let half = m(&[0.5, 0.5]);
        let skew = m(&[0.25, 0.75]);
        assert_eq!(kl(&half, &half).unwrap().value, 0.0);
        // 0.5 log2(2) + 0.5 log2(2/3)
        let expected = 1.0 - 0.5 * 3f64.log2();
        assert_relative_eq!(
            kl(&half, &skew).unwrap().value,
            expected,
            max_relative = 1e-14
        );
        assert_relative_eq!(expected, 0.207_518_749_639_422, max_relative = 1e-12);
        assert_eq!(
            kl(&m(&[1.0, 0.0]), &m(&[0.0, 1.0])).unwrap().value,
            f64::INFINITY
        );
        assert_ne!(
            kl(&half, &skew).unwrap().value,
            kl(&skew, &half).unwrap().value
        );
        assert_eq!(kl(&half, &skew).unwrap().base, LogBase::Two);
    }

    #[test]
    fn jsd_examples() {
        let p = m(&[0.3, 0.2, 0.5]);
        assert_eq!(jsd(&p, &p).unwrap().value, 0.0);
        assert_eq!(jsd(&m(&[1.0, 0.0]), &m(&[0.0, 1.0])).unwrap().value, 1.0);
        let (a, b) = (m(&[0.5, 0.5]), m(&[0.9, 0.1]));
        let v = jsd(&a, &b).unwrap().value;
        assert!(v > 0.0 && v < 1.0);
        assert!((v - jsd_kl_average(&a, &b, LogBase::Two).unwrap()).abs() < 1e-12);
        assert!((v - jsd_entropy_form(&a, &b, LogBase::Two).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn jsd_keeps_precision_for_nearby_points() {
        // f(t) = 1 - H(1/2 + t) ~ 2t²/ln 2 for small t.
        let t = 1e-6;
        let v = jsd(
            &binary_point(0.5 - t).unwrap(),
            &binary_point(0.5 + t).unwrap(),
        )
        .unwrap()
        .value;
        assert_relative_eq!(v, 2.0 * t * t / LN_2, max_relative = 1e-9);
    }

    #[test]
    fn tvd_examples() {
        let (a, b) = (m(&[0.5, 0.5]), m(&[0.25, 0.75]));
        assert_eq!(tvd(&a, &a).unwrap().value, 0.0);
        assert_eq!(tvd(&m(&[1.0, 0.0]), &m(&[0.0, 1.0])).unwrap().value, 2.0);
        assert_eq!(tvd(&a, &b).unwrap().value, 0.5);
    }

    #[test]
    fn f_divergence_examples() {
        let (a, b) = (m(&[0.5, 0.5]), m(&[0.25, 0.75]));
        for g in [generator_js(), generator_kl(), generator_tv()] {
            assert_eq!(f_divergence_discrete(&g, &a, &a).unwrap().value, 0.0);
        }
        let js = f_divergence_discrete(&generator_js(), &a, &b)
            .unwrap()
            .value
            / LN_2;
        assert!((js - jsd(&a, &b).unwrap().value).abs() < 1e-10);
        let tv = f_divergence_discrete(&generator_tv(), &a, &b)
            .unwrap()
            .value;
        assert!((tv - tvd(&a, &b).unwrap().value / 2.0).abs() < 1e-12);
        let kl_nats = f_divergence_discrete(&generator_kl(), &a, &b)
            .unwrap()
            .value;
        assert_relative_eq!(
            kl_nats / LN_2,
            kl(&a, &b).unwrap().value,
            max_relative = 1e-12
        );
    }

    #[test]
    fn f_divergence_boundary_conventions() {
        let (v0, v1) = (m(&[1.0, 0.0]), m(&[0.0, 1.0]));
        let js = f_divergence_discrete(&generator_js(), &v0, &v1)
            .unwrap()
            .value;
        assert_relative_eq!(js / LN_2, 1.0, max_relative = 1e-15);
        assert_eq!(
            f_divergence_discrete(&generator_tv(), &v0, &v1)
                .unwrap()
                .value,
            1.0
        );
        assert_eq!(
            f_divergence_discrete(&generator_kl(), &v0, &v1)
                .unwrap()
                .value,
            f64::INFINITY
        );
        // p_i = 0 < q_i contributes q_i · lim f(u)/u = 0 for KL.
        let (a, b) = (m(&[1.0, 0.0]), m(&[0.5, 0.5]));
        let kl_nats = f_divergence_discrete(&generator_kl(), &a, &b)
            .unwrap()
            .value;
        assert_relative_eq!(kl_nats, LN_2, max_relative = 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let (a, b) = (m(&[0.5, 0.5]), m(&[0.2, 0.3, 0.5]));
        assert!(kl(&a, &b).is_err());
        assert!(jsd(&a, &b).is_err());
        assert!(tvd(&a, &b).is_err());
        assert!(f_divergence_discrete(&generator_js(), &a, &b).is_err());
    }
}
