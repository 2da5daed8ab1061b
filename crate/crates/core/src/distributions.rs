//! Points of the probability simplex and the binary family `P_s = (s, 1 - s)`.

use serde::{Deserialize, Serialize};

use crate::divergences::LogBase;
use crate::error::{Error, Result};

/// Allowed deviation of the weight sum from one.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Default interior perturbation used by [`embed`].
pub const DEFAULT_EMBED_EPS: f64 = 1e-9;

/// A finite discrete distribution on `{1, ..., n}`, `n >= 2`.
///
/// Weights are renormalized at construction so that they sum to one up to
/// rounding. Boundary points (some weight exactly zero) are allowed and are
/// reported by [`Multinomial::is_interior`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Multinomial {
    weights: Vec<f64>,
    interior: bool,
}

impl Multinomial {
    pub fn new(weights: &[f64]) -> Result<Self> {
        make_multinomial(weights)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `true` iff every weight is strictly positive.
    pub fn is_interior(&self) -> bool {
        self.interior
    }

    pub fn entropy(&self) -> f64 {
        entropy(self)
    }
}

impl TryFrom<Vec<f64>> for Multinomial {
    type Error = Error;

    /// Same validation as [`make_multinomial`]; weights that already sum to
    /// one within [`SIMPLEX_TOL`] are kept bit for bit so that serialized
    /// points round-trip exactly.
    fn try_from(weights: Vec<f64>) -> Result<Self> {
        let normalized = make_multinomial(&weights)?;
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() <= SIMPLEX_TOL {
            let interior = weights.iter().all(|&w| w > 0.0);
            return Ok(Multinomial { weights, interior });
        }
        Ok(normalized)
    }
}

impl From<Multinomial> for Vec<f64> {
    fn from(p: Multinomial) -> Self {
        p.weights
    }
}

/// Validates and normalizes `weights` into a point of the closed simplex.
pub fn make_multinomial(weights: &[f64]) -> Result<Multinomial> {
    if weights.len() < 2 {
        return Err(Error::domain(format!(
            "a multinomial needs at least 2 weights, got {}",
            weights.len()
        )));
    }
    if let Some((i, w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !w.is_finite() || **w < 0.0)
    {
        return Err(Error::domain(format!(
            "weight {i} is {w}; weights must be finite and non-negative"
        )));
    }
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return Err(Error::domain("all weights are zero"));
    }
    let weights: Vec<f64> = weights.iter().map(|w| w / sum).collect();
    let interior = weights.iter().all(|&w| w > 0.0);
    Ok(Multinomial { weights, interior })
}

/// The binary point `(s, 1 - s)`.
pub fn binary_point(s: f64) -> Result<Multinomial> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::domain(format!(
            "binary point parameter {s} not in [0, 1]"
        )));
    }
    let weights = vec![s, 1.0 - s];
    let interior = s > 0.0 && s < 1.0;
    Ok(Multinomial { weights, interior })
}

/// Embeds a binary point into dimension `n` by appending `n - 2` copies of
/// `eps` and renormalizing.
///
/// `eps = 0` gives the zero-padded boundary point `(p_1, p_2, 0, ..., 0)`;
/// any positive `eps` must be below `min(p_1, p_2) / 2` and yields an
/// interior point.
pub fn embed(p: &Multinomial, n: usize, eps: f64) -> Result<Multinomial> {
    if p.dim() != 2 {
        return Err(Error::domain(format!(
            "embed expects a binary point, got dimension {}",
            p.dim()
        )));
    }
    if n < 3 {
        return Err(Error::domain(format!(
            "embedding dimension must be >= 3, got {n}"
        )));
    }
    let limit = p.weights[0].min(p.weights[1]) / 2.0;
    if !(eps >= 0.0) || (eps > 0.0 && eps >= limit) {
        return Err(Error::domain(format!(
            "embedding eps {eps} must satisfy 0 <= eps < min(p_1, p_2)/2 = {limit}"
        )));
    }
    let mut weights = Vec::with_capacity(n);
    weights.extend_from_slice(&p.weights);
    weights.resize(n, eps);
    make_multinomial(&weights)
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy(p: &Multinomial) -> f64 {
    entropy_in(p, LogBase::Two)
}

pub fn entropy_in(p: &Multinomial, base: LogBase) -> f64 {
    let nats: f64 = p
        .weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| -w * w.ln())
        .sum();
    // Rounding can push a point mass a hair below zero.
    base.from_nats(nats).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn construction_normalizes() {
        let p = make_multinomial(&[2.0, 2.0]).unwrap();
        assert_eq!(p.weights(), &[0.5, 0.5]);
        assert!(p.is_interior());

        let v = make_multinomial(&[1.0, 0.0]).unwrap();
        assert_eq!(v.weights(), &[1.0, 0.0]);
        assert!(!v.is_interior());
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            make_multinomial(&[0.5, -0.1]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(make_multinomial(&[1.0]), Err(Error::Domain(_))));
        assert!(matches!(
            make_multinomial(&[0.0, 0.0]),
            Err(Error::Domain(_))
        ));
        assert!(make_multinomial(&[f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn binary_points() {
        assert_eq!(binary_point(0.5).unwrap().weights(), &[0.5, 0.5]);
        assert_eq!(binary_point(0.3).unwrap().weights(), &[0.3, 0.7]);
        let v = binary_point(1.0).unwrap();
        assert_eq!(v.weights(), &[1.0, 0.0]);
        assert!(!v.is_interior());
        assert!(binary_point(1.5).is_err());
        assert!(binary_point(-0.1).is_err());
    }

    #[test]
    fn embedding() {
        let half = binary_point(0.5).unwrap();
        let padded = embed(&half, 3, 0.0).unwrap();
        assert_eq!(padded.weights(), &[0.5, 0.5, 0.0]);
        assert!(!padded.is_interior());

        let p = binary_point(0.4).unwrap();
        let e = embed(&p, 4, 1e-9).unwrap();
        assert!(e.is_interior());
        let scale = 1.0 + 2e-9;
        assert_relative_eq!(e.weights()[0], 0.4 / scale, max_relative = 1e-15);
        assert_relative_eq!(e.weights()[3], 1e-9 / scale, max_relative = 1e-15);

        assert!(embed(&p, 2, 1e-9).is_err());
        assert!(embed(&p, 4, -1e-9).is_err());
        assert!(embed(&p, 4, 0.2).is_err());
        assert!(embed(&e, 5, 1e-9).is_err());
    }

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(&binary_point(0.5).unwrap()), 1.0);
        assert_eq!(entropy(&binary_point(1.0).unwrap()), 0.0);
        let direct = -0.25 * 0.25f64.log2() - 0.75 * 0.75f64.log2();
        assert_relative_eq!(
            entropy(&binary_point(0.25).unwrap()),
            direct,
            max_relative = 1e-15
        );
        assert_relative_eq!(direct, 0.811_278_124_459_132_8, max_relative = 1e-15);
    }

    #[test]
    fn entropy_continuous_at_boundary() {
        let p = binary_point(0.3).unwrap();
        let padded = entropy(&embed(&p, 5, 0.0).unwrap());
        let mut last = f64::INFINITY;
        for k in 3..12 {
            let eps = 10f64.powi(-k);
            let gap = (entropy(&embed(&p, 5, eps).unwrap()) - padded).abs();
            assert!(gap < last, "gap {gap} did not shrink at eps {eps}");
            last = gap;
        }
        assert!(last < 1e-8);
    }

    #[test]
    fn json_round_trip_validates() {
        let p: Multinomial = serde_json::from_str("[1, 3]").unwrap();
        assert_eq!(p.weights(), &[0.25, 0.75]);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[0.25,0.75]");
        assert!(serde_json::from_str::<Multinomial>("[1, -3]").is_err());
        assert!(serde_json::from_str::<Multinomial>("[1]").is_err());
    }
}
