//! Triangle-inequality certificates for powers of divergences.
//!
//! For the symmetric binary triple `(P_{1/2-t}, P_{1/2}, P_{1/2+t})` the
//! quantity `F(t) = D_JS(P_{1/2-t}:P_{1/2+t})^α - 2 D_JS(P_{1/2-t}:P_{1/2})^α`
//! is positive for small `t` whenever `α > 1/2`; a positive value is a
//! violation of the triangle inequality for `D_JS^α`. The Cauchy analogue
//! uses the scale triple `(e^{-t}, 1, e^t)` and `h(2t)^α - 2h(t)^α`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cauchy::{f_div_cauchy, h, CauchyParams};
use crate::distributions::{binary_point, embed, make_multinomial, Multinomial, DEFAULT_EMBED_EPS};
use crate::divergences::jsd;
use crate::error::{Error, Result};
use crate::generators::Generator;

pub const SCHEMA_VERSION: u32 = 1;
/// A triangle margin must exceed this to count as a violation.
pub const VIOLATION_SLACK: f64 = 1e-12;
/// Maximum disagreement between stored and recomputed certificate values.
pub const RECOMPUTE_TOL: f64 = 1e-12;
const EMBED_RETRIES: usize = 40;
const AUDIT_CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Multinomial,
    Cauchy,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multinomial" => Ok(Family::Multinomial),
            "cauchy" => Ok(Family::Cauchy),
            other => Err(Error::domain(format!(
                "unknown family `{other}` (expected multinomial or cauchy)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub grid_size: usize,
    pub refine_tol: f64,
    pub margin_floor: f64,
}

impl SearchConfig {
    pub fn multinomial() -> Self {
        SearchConfig {
            t_min: 1e-6,
            t_max: 0.49,
            grid_size: 200,
            refine_tol: 1e-9,
            margin_floor: 1e-10,
        }
    }

    pub fn cauchy() -> Self {
        SearchConfig {
            t_max: 5.0,
            ..SearchConfig::multinomial()
        }
    }

    pub fn for_family(family: Family) -> Self {
        match family {
            Family::Multinomial => SearchConfig::multinomial(),
            Family::Cauchy => SearchConfig::cauchy(),
        }
    }

    pub fn validate(&self, family: Family) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_min < self.t_max && self.t_max.is_finite()) {
            return Err(Error::domain(format!(
                "search interval needs 0 < t_min < t_max, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if family == Family::Multinomial && !(self.t_max < 0.5) {
            return Err(Error::domain(format!(
                "multinomial search needs t_max < 1/2, got {}",
                self.t_max
            )));
        }
        if self.grid_size < 8 {
            return Err(Error::domain(format!(
                "grid_size must be >= 8, got {}",
                self.grid_size
            )));
        }
        if !(self.refine_tol > 0.0) || !(self.margin_floor >= 0.0) {
            return Err(Error::domain(
                "refine_tol must be > 0 and margin_floor >= 0",
            ));
        }
        Ok(())
    }

    /// Geometric grid from `t_min` to `t_max`, both included.
    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi) = (self.t_min.ln(), self.t_max.ln());
        let last = (self.grid_size - 1) as f64;
        (0..self.grid_size)
            .map(|i| match i {
                0 => self.t_min,
                i if i + 1 == self.grid_size => self.t_max,
                i => (lo + (hi - lo) * i as f64 / last).exp(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CertificatePoints {
    Multinomial([Multinomial; 3]),
    Cauchy([CauchyParams; 3]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchMeta {
    /// Family parameter of the witness triple.
    pub t: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub grid_size: usize,
    pub refine_tol: f64,
    pub margin_floor: f64,
    pub evaluations: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dimension: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub embed_eps: Option<f64>,
    /// Exponent of the certificate this one was amplified from.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub amplified_from_alpha: Option<f64>,
}

/// A triple `(x, y, z)` with `d(x,z) > d(x,y) + d(y,z)` for `d = D^α`.
///
/// `d12`, `d23` and `d13` are already raised to `alpha`; `margin` is
/// `d13 - d12 - d23`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangleCertificate {
    pub schema: u32,
    pub family: Family,
    pub points: CertificatePoints,
    pub alpha: f64,
    pub d12: f64,
    pub d23: f64,
    pub d13: f64,
    pub margin: f64,
    /// Generator id for Cauchy certificates; `None` means base-2 JSD on multinomials.
    pub generator: Option<String>,
    pub search_meta: SearchMeta,
}

impl TriangleCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cert: TriangleCertificate =
            serde_json::from_str(s).map_err(|e| Error::Certificate(e.to_string()))?;
        if cert.schema != SCHEMA_VERSION {
            return Err(Error::Certificate(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                cert.schema
            )));
        }
        Ok(cert)
    }

    /// Base (un-powered) divergences `(D12, D23, D13)` recomputed from the points.
    pub fn base_divergences(&self) -> Result<[f64; 3]> {
        match (&self.points, self.family) {
            (CertificatePoints::Multinomial([p1, p2, p3]), Family::Multinomial) => {
                Ok([jsd(p1, p2)?.value, jsd(p2, p3)?.value, jsd(p1, p3)?.value])
            }
            (CertificatePoints::Cauchy([a, b, c]), Family::Cauchy) => {
                let id = self.generator.as_deref().ok_or_else(|| {
                    Error::Certificate("Cauchy certificate without generator".into())
                })?;
                let g = Generator::by_id(id)?;
                Ok([
                    f_div_cauchy(&g, a, b)?,
                    f_div_cauchy(&g, b, c)?,
                    f_div_cauchy(&g, a, c)?,
                ])
            }
            _ => Err(Error::Certificate(
                "points do not match the certificate family".into(),
            )),
        }
    }

    fn points_distinct(&self) -> bool {
        match &self.points {
            CertificatePoints::Multinomial([a, b, c]) => a != b && b != c && a != c,
            CertificatePoints::Cauchy([a, b, c]) => a != b && b != c && a != c,
        }
    }
}

/// Outcome of [`verify_certificate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateCheck {
    /// Largest `|stored - recomputed|` over the three powered divergences.
    pub max_deviation: f64,
    pub margin_consistent: bool,
    pub points_distinct: bool,
    pub margin: f64,
}

impl CertificateCheck {
    pub fn is_sound(&self) -> bool {
        self.max_deviation <= RECOMPUTE_TOL
            && self.margin_consistent
            && self.points_distinct
            && self.margin > 0.0
    }
}

/// Recomputes a certificate from its points.
pub fn verify_certificate(cert: &TriangleCertificate) -> Result<CertificateCheck> {
    let [d12, d23, d13] = cert.base_divergences()?.map(|d| d.powf(cert.alpha));
    let max_deviation = [(d12, cert.d12), (d23, cert.d23), (d13, cert.d13)]
        .iter()
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(CertificateCheck {
        max_deviation,
        margin_consistent: cert.margin == cert.d13 - cert.d12 - cert.d23,
        points_distinct: cert.points_distinct(),
        margin: cert.margin,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::domain(format!(
            "alpha must be finite and > 0, got {alpha}"
        )));
    }
    Ok(())
}

/// The binary triple `(P_{1/2-t}, P_{1/2}, P_{1/2+t})`.
pub fn symmetric_binary_triple(t: f64) -> Result<[Multinomial; 3]> {
    if !(t > 0.0 && t < 0.5) {
        return Err(Error::domain(format!("t must lie in (0, 1/2), got {t}")));
    }
    Ok([
        binary_point(0.5 - t)?,
        binary_point(0.5)?,
        binary_point(0.5 + t)?,
    ])
}

/// `F(t) = f(t)^α - 2 g(t)^α` with `f(t) = D_JS(P_{1/2-t}:P_{1/2+t})` and
/// `g(t) = D_JS(P_{1/2-t}:P_{1/2})`, in bits.
pub fn f_multinomial(alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let [lo, mid, hi] = symmetric_binary_triple(t)?;
    let f = jsd(&lo, &hi)?.value;
    let g = jsd(&lo, &mid)?.value;
    Ok(f.powf(alpha) - 2.0 * g.powf(alpha))
}

/// `h(2t)^α - 2 h(t)^α` for the Cauchy scale triple `(e^{-t}, 1, e^t)`.
pub fn cauchy_scale_margin(generator: &Generator, alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(h(generator, 2.0 * t)?.powf(alpha) - 2.0 * h(generator, t)?.powf(alpha))
}

/// Maximum of a margin function over a search grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMax {
    pub t: f64,
    pub margin: f64,
    pub evaluations: usize,
}

/// Evaluates `margin` on `grid` in parallel; the first maximizer wins ties.
fn grid_max<F>(margin: F, grid: &[f64]) -> Result<GridMax>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let values: Vec<f64> = grid.par_iter().map(|&t| margin(t)).collect::<Result<_>>()?;
    let (i, &best) = values
        .iter()
        .enumerate()
        .fold(None, |acc: Option<(usize, &f64)>, (i, v)| match acc {
            Some((_, b)) if *b >= *v => acc,
            _ => Some((i, v)),
        })
        .expect("grid is non-empty");
    Ok(GridMax {
        t: grid[i],
        margin: best,
        evaluations: grid.len(),
    })
}

/// Grid maximum of `F(t)` for the symmetric binary family.
pub fn jsd_margin_sweep(alpha: f64, cfg: &SearchConfig) -> Result<GridMax> {
    cfg.validate(Family::Multinomial)?;
    check_alpha(alpha)?;
    grid_max(|t| f_multinomial(alpha, t), &cfg.grid())
}

/// Grid maximum of `h(2t)^α - 2h(t)^α` without any hypothesis check on the
/// generator.
pub fn cauchy_margin_sweep(
    generator: &Generator,
    alpha: f64,
    cfg: &SearchConfig,
) -> Result<GridMax> {
    cfg.validate(Family::Cauchy)?;
    check_alpha(alpha)?;
    grid_max(|t| cauchy_scale_margin(generator, alpha, t), &cfg.grid())
}

/// Coarse grid search followed by golden-section refinement in `ln t`
/// around the best grid point.
fn search<F>(margin: F, cfg: &SearchConfig) -> Result<GridMax>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let grid = cfg.grid();
    let coarse = grid_max(&margin, &grid)?;
    let i = grid
        .iter()
        .position(|&t| t == coarse.t)
        .expect("maximizer is on the grid");
    let lo = grid[i.saturating_sub(1)].ln();
    let hi = grid[(i + 1).min(grid.len() - 1)].ln();
    let refined = golden_section_max(|x| margin(x.exp()), lo, hi, cfg.refine_tol)?;
    let best = if refined.margin > coarse.margin {
        GridMax {
            t: refined.t.exp(),
            ..refined
        }
    } else {
        coarse
    };
    let evaluations = coarse.evaluations + refined.evaluations;
    if !(best.margin > cfg.margin_floor) {
        return Err(Error::SearchFailure {
            max_margin: best.margin,
            t_at_max: best.t,
        });
    }
    Ok(GridMax {
        evaluations,
        ..best
    })
}

/// Golden-section search for a maximum of `f` on `[a, b]`; `t` of the
/// returned value is the abscissa passed to `f`.
fn golden_section_max<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<GridMax>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut evaluations = 2;
    while (b - a).abs() > tol && evaluations < 200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        evaluations += 1;
    }
    let (t, margin) = if fc > fd { (c, fc) } else { (d, fd) };
    Ok(GridMax {
        t,
        margin,
        evaluations,
    })
}

fn powered(alpha: f64, base: [f64; 3]) -> (f64, f64, f64, f64) {
    let [d12, d23, d13] = base.map(|d| d.powf(alpha));
    (d12, d23, d13, d13 - d12 - d23)
}

/// Searches the symmetric binary family for a violation of the triangle
/// inequality by `D_JS^α`, then, for `n >= 3`, embeds the triple into the
/// interior of the `n`-simplex and re-verifies it.
///
/// `α <= 1/2` is accepted and ends in [`Error::SearchFailure`] carrying the
/// largest `F` observed.
pub fn find_jsd_violation(alpha: f64, cfg: &SearchConfig, n: usize) -> Result<TriangleCertificate> {
    check_alpha(alpha)?;
    cfg.validate(Family::Multinomial)?;
    if n < 2 {
        return Err(Error::domain(format!("dimension must be >= 2, got {n}")));
    }
    let found = search(|t| f_multinomial(alpha, t), cfg)?;
    let triple = symmetric_binary_triple(found.t)?;

    let mut meta = SearchMeta {
        t: found.t,
        t_min: cfg.t_min,
        t_max: cfg.t_max,
        grid_size: cfg.grid_size,
        refine_tol: cfg.refine_tol,
        margin_floor: cfg.margin_floor,
        evaluations: found.evaluations,
        dimension: Some(n),
        embed_eps: None,
        amplified_from_alpha: None,
    };

    let certify = |points: [Multinomial; 3], meta: SearchMeta| -> Result<TriangleCertificate> {
        let base = [
            jsd(&points[0], &points[1])?.value,
            jsd(&points[1], &points[2])?.value,
            jsd(&points[0], &points[2])?.value,
        ];
        let (d12, d23, d13, margin) = powered(alpha, base);
        Ok(TriangleCertificate {
            schema: SCHEMA_VERSION,
            family: Family::Multinomial,
            points: CertificatePoints::Multinomial(points),
            alpha,
            d12,
            d23,
            d13,
            margin,
            generator: None,
            search_meta: meta,
        })
    };

    if n == 2 {
        let cert = certify(triple, meta)?;
        if !(cert.margin > cfg.margin_floor) {
            return Err(Error::SearchFailure {
                max_margin: cert.margin,
                t_at_max: found.t,
            });
        }
        return Ok(cert);
    }

    let mut eps = DEFAULT_EMBED_EPS;
    let mut last_margin = f64::NEG_INFINITY;
    for _ in 0..EMBED_RETRIES {
        let embedded = [
            embed(&triple[0], n, eps)?,
            embed(&triple[1], n, eps)?,
            embed(&triple[2], n, eps)?,
        ];
        meta.embed_eps = Some(eps);
        let cert = certify(embedded, meta.clone())?;
        if cert.margin > cfg.margin_floor {
            return Ok(cert);
        }
        last_margin = cert.margin;
        eps /= 2.0;
    }
    Err(Error::SearchFailure {
        max_margin: last_margin,
        t_at_max: found.t,
    })
}

/// Searches the Cauchy scale triple `((0, e^{-t}), (0, 1), (0, e^t))` for a
/// violation of the triangle inequality by `D_f^α`.
///
/// The generator must be C² near 1 with `f''(1) > 0`; otherwise this fails
/// with [`Error::Precondition`] before searching.
pub fn find_cauchy_violation(
    generator: &Generator,
    alpha: f64,
    cfg: &SearchConfig,
) -> Result<TriangleCertificate> {
    generator.require_smooth_positive_curvature()?;
    check_alpha(alpha)?;
    cfg.validate(Family::Cauchy)?;
    let found = search(|t| cauchy_scale_margin(generator, alpha, t), cfg)?;
    let t = found.t;
    let points = [
        CauchyParams::new(0.0, (-t).exp())?,
        CauchyParams::new(0.0, 1.0)?,
        CauchyParams::new(0.0, t.exp())?,
    ];
    let base = [
        f_div_cauchy(generator, &points[0], &points[1])?,
        f_div_cauchy(generator, &points[1], &points[2])?,
        f_div_cauchy(generator, &points[0], &points[2])?,
    ];
    let (d12, d23, d13, margin) = powered(alpha, base);
    if !(margin > cfg.margin_floor) {
        return Err(Error::SearchFailure {
            max_margin: margin,
            t_at_max: t,
        });
    }
    Ok(TriangleCertificate {
        schema: SCHEMA_VERSION,
        family: Family::Cauchy,
        points: CertificatePoints::Cauchy(points),
        alpha,
        d12,
        d23,
        d13,
        margin,
        generator: Some(generator.name().to_string()),
        search_meta: SearchMeta {
            t,
            t_min: cfg.t_min,
            t_max: cfg.t_max,
            grid_size: cfg.grid_size,
            refine_tol: cfg.refine_tol,
            margin_floor: cfg.margin_floor,
            evaluations: found.evaluations,
            dimension: None,
            embed_eps: None,
            amplified_from_alpha: None,
        },
    })
}

/// Turns a certificate for `D^α` into one for `D^{αβ}`, `β >= 1`.
///
/// Since `x^β + y^β <= (x + y)^β` for `x, y >= 0`, a positive margin stays
/// positive: `d13^β > (d12 + d23)^β >= d12^β + d23^β`.
pub fn amplify_certificate(cert: &TriangleCertificate, beta: f64) -> Result<TriangleCertificate> {
    if !(beta >= 1.0) || !beta.is_finite() {
        return Err(Error::domain(format!(
            "beta must be finite and >= 1, got {beta}"
        )));
    }
    if !(cert.margin > 0.0) {
        return Err(Error::Certificate(format!(
            "cannot amplify a certificate with margin {}",
            cert.margin
        )));
    }
    if beta == 1.0 {
        return Ok(cert.clone());
    }
    let (d12, d23, d13) = (
        cert.d12.powf(beta),
        cert.d23.powf(beta),
        cert.d13.powf(beta),
    );
    let margin = d13 - d12 - d23;
    if !(margin > 0.0) {
        return Err(Error::Certificate(format!(
            "amplified margin {margin:e} lost to rounding at beta = {beta}"
        )));
    }
    let mut search_meta = cert.search_meta.clone();
    search_meta.amplified_from_alpha =
        Some(cert.search_meta.amplified_from_alpha.unwrap_or(cert.alpha));
    Ok(TriangleCertificate {
        alpha: cert.alpha * beta,
        d12,
        d23,
        d13,
        margin,
        search_meta,
        ..cert.clone()
    })
}

/// Summary of [`random_audit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub alpha: f64,
    pub seed: u64,
    pub dimension: usize,
    pub triples: usize,
    pub violations: usize,
    /// Largest `d(x,z) - d(x,y) - d(y,z)` over all triples and all choices
    /// of the middle point.
    pub worst_margin: f64,
    pub worst_triple: Option<[Multinomial; 3]>,
}

/// Uniform sample from the open simplex: normalized i.i.d. exponentials.
fn sample_simplex<R: rand::Rng>(rng: &mut R, dim: usize) -> Result<Multinomial> {
    let w: Vec<f64> = (0..dim)
        .map(|_| Exp1.sample(rng))
        .map(|x: f64| x.max(f64::MIN_POSITIVE))
        .collect();
    make_multinomial(&w)
}

/// Samples `num_triples` triples of interior points of the `dim`-simplex and
/// counts violations of the triangle inequality by `divergence^α` beyond
/// [`VIOLATION_SLACK`]. `divergence` is treated as symmetric.
///
/// Triples are drawn in fixed-size chunks, chunk `k` from the ChaCha stream
/// `k` of `seed`, so the report depends only on the arguments.
pub fn random_audit<F>(
    divergence: F,
    alpha: f64,
    num_triples: usize,
    seed: u64,
    dim: usize,
) -> Result<AuditReport>
where
    F: Fn(&Multinomial, &Multinomial) -> Result<f64> + Sync,
{
    if num_triples == 0 {
        return Err(Error::Precondition(
            "random audit needs at least one triple".into(),
        ));
    }
    check_alpha(alpha)?;
    if dim < 2 {
        return Err(Error::domain(format!("dimension must be >= 2, got {dim}")));
    }
    let chunks = num_triples.div_ceil(AUDIT_CHUNK);
    let partial: Vec<(usize, f64, Option<[Multinomial; 3]>)> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let count = AUDIT_CHUNK.min(num_triples - k * AUDIT_CHUNK);
            let mut violations = 0;
            let mut worst = f64::NEG_INFINITY;
            let mut worst_triple = None;
            for _ in 0..count {
                let x = sample_simplex(&mut rng, dim)?;
                let y = sample_simplex(&mut rng, dim)?;
                let z = sample_simplex(&mut rng, dim)?;
                let dxy = divergence(&x, &y)?.powf(alpha);
                let dyz = divergence(&y, &z)?.powf(alpha);
                let dxz = divergence(&x, &z)?.powf(alpha);
                let margin = (dxz - dxy - dyz).max(dxy - dxz - dyz).max(dyz - dxy - dxz);
                if margin > VIOLATION_SLACK {
                    violations += 1;
                }
                if margin > worst {
                    worst = margin;
                    worst_triple = Some([x, y, z]);
                }
            }
            Ok((violations, worst, worst_triple))
        })
        .collect::<Result<_>>()?;

    let mut report = AuditReport {
        alpha,
        seed,
        dimension: dim,
        triples: num_triples,
        violations: 0,
        worst_margin: f64::NEG_INFINITY,
        worst_triple: None,
    };
    for (violations, worst, triple) in partial {
        report.violations += violations;
        if worst > report.worst_margin {
            report.worst_margin = worst;
            report.worst_triple = triple;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generator_js, generator_kl, generator_tv};

    fn jsd_bits(p: &Multinomial, q: &Multinomial) -> Result<f64> {
        Ok(jsd(p, q)?.value)
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig::multinomial()
            .validate(Family::Multinomial)
            .is_ok());
        assert!(SearchConfig::cauchy()
            .validate(Family::Multinomial)
            .is_err());
        assert!(SearchConfig::cauchy().validate(Family::Cauchy).is_ok());
        let small = SearchConfig {
            grid_size: 4,
            ..SearchConfig::multinomial()
        };
        assert!(small.validate(Family::Multinomial).is_err());
        let inverted = SearchConfig {
            t_min: 0.3,
            t_max: 0.2,
            ..SearchConfig::multinomial()
        };
        assert!(inverted.validate(Family::Multinomial).is_err());
        let grid = SearchConfig::multinomial().grid();
        assert_eq!(grid.len(), 200);
        assert_eq!((grid[0], grid[199]), (1e-6, 0.49));
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn f_multinomial_behaviour() {
        for alpha in [0.3, 0.5, 0.75, 1.0] {
            assert!(f_multinomial(alpha, 1e-9).unwrap().abs() < 1e-5);
        }
        for t in [1e-4, 1e-2, 0.1, 0.3, 0.49] {
            assert!(f_multinomial(0.5, t).unwrap() <= 0.0);
        }
        assert!(f_multinomial(0.75, 1e-3).unwrap() > 0.0);
        assert!(f_multinomial(0.75, 0.0).is_err());
        assert!(f_multinomial(0.75, 0.5).is_err());
    }

    #[test]
    fn jsd_certificates() {
        let cfg = SearchConfig::multinomial();
        let cert = find_jsd_violation(0.6, &cfg, 2).unwrap();
        assert!(cert.margin > 0.0);
        assert!((cert.d12 - cert.d23).abs() < 1e-12);
        assert!(verify_certificate(&cert).unwrap().is_sound());

        let cert = find_jsd_violation(0.6, &cfg, 5).unwrap();
        match &cert.points {
            CertificatePoints::Multinomial(pts) => {
                assert!(pts.iter().all(|p| p.is_interior() && p.dim() == 5))
            }
            _ => panic!("wrong family"),
        }
        assert!(verify_certificate(&cert).unwrap().is_sound());
        assert_eq!(cert.search_meta.embed_eps, Some(DEFAULT_EMBED_EPS));

        let err = find_jsd_violation(0.5, &cfg, 2).unwrap_err();
        assert!(matches!(err, Error::SearchFailure { max_margin, .. } if max_margin <= 1e-12));
    }

    #[test]
    fn cauchy_certificates() {
        let cfg = SearchConfig::cauchy();
        for (g, alpha) in [(generator_js(), 0.6), (generator_kl(), 0.75)] {
            let cert = find_cauchy_violation(&g, alpha, &cfg).unwrap();
            assert!(cert.margin > 0.0);
            assert!(verify_certificate(&cert).unwrap().is_sound());
        }
        let err = find_cauchy_violation(&generator_tv(), 0.6, &cfg).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn amplification() {
        let cert = find_jsd_violation(0.6, &SearchConfig::multinomial(), 2).unwrap();
        assert_eq!(amplify_certificate(&cert, 1.0).unwrap(), cert);
        for beta in [1.5, 2.0, 4.0, 5.0 / 3.0] {
            let amp = amplify_certificate(&cert, beta).unwrap();
            assert!((amp.alpha - 0.6 * beta).abs() < 1e-15);
            assert!(amp.margin > 0.0);
            assert!(verify_certificate(&amp).unwrap().is_sound());
            assert_eq!(amp.search_meta.amplified_from_alpha, Some(0.6));
        }
        assert!(amplify_certificate(&cert, 0.9).is_err());
        let mut broken = cert.clone();
        broken.margin = -1.0;
        assert!(amplify_certificate(&broken, 2.0).is_err());
    }

    #[test]
    fn certificate_json_round_trip() {
        let cert = find_cauchy_violation(&generator_js(), 0.6, &SearchConfig::cauchy()).unwrap();
        let back = TriangleCertificate::from_json(&cert.to_json()).unwrap();
        assert_eq!(back, cert);
        let cert = find_jsd_violation(0.75, &SearchConfig::multinomial(), 3).unwrap();
        let back = TriangleCertificate::from_json(&cert.to_json()).unwrap();
        assert_eq!(back, cert);
        assert!(verify_certificate(&back).unwrap().is_sound());
    }

    #[test]
    fn tampered_certificate_is_unsound() {
        let mut cert = find_jsd_violation(0.6, &SearchConfig::multinomial(), 2).unwrap();
        cert.d13 *= 1.001;
        let check = verify_certificate(&cert).unwrap();
        assert!(!check.is_sound());
        assert!(!check.margin_consistent);
    }

    #[test]
    fn random_audit_is_deterministic() {
        let a = random_audit(jsd_bits, 1.0, 3000, 7, 3).unwrap();
        let b = random_audit(jsd_bits, 1.0, 3000, 7, 3).unwrap();
        assert_eq!(a, b);
        let c = random_audit(jsd_bits, 1.0, 3000, 8, 3).unwrap();
        assert_ne!(a.worst_margin, c.worst_margin);
        assert!(matches!(
            random_audit(jsd_bits, 0.5, 0, 1, 3),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn random_audit_regimes() {
        let sqrt = random_audit(jsd_bits, 0.5, 20_000, 1, 3).unwrap();
        assert_eq!(sqrt.violations, 0);
        let full = random_audit(jsd_bits, 1.0, 20_000, 1, 2).unwrap();
        assert!(full.violations > 0, "{full:?}");
    }
}
