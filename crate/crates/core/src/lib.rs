//! Divergences between finite discrete distributions and univariate Cauchy
//! distributions, together with tools for auditing whether powers of those
//! divergences satisfy the metric axioms.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`distributions`] | simplex points, the binary family `(s, 1 - s)`, embeddings, entropy |
//! | [`generators`] | convex generators `f` with derivatives (`js`, `kl`, `tv`, custom) |
//! | [`divergences`] | KL, Jensen-Shannon, total variation and generic f-divergences (base 2) |
//! | [`cauchy`] | Cauchy f-divergences through the single `θ`-integral, a real-line oracle, `h(t)` |
//! | [`audit`] | triangle-inequality certificates, amplification, randomized audits |
//! | [`asymptotics`] | ratio sweeps near `t = 0` with linear extrapolation |
//!
//! All logarithms in [`divergences`] are base 2 unless a [`LogBase`] is passed
//! explicitly; generators and everything in [`cauchy`] use natural logarithms.

// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod audit;
pub mod cauchy;
pub mod distributions;
pub mod divergences;
mod error;
pub mod generators;
pub mod quadrature;

pub use asymptotics::LimitEstimate;
pub use audit::{SearchConfig, TriangleCertificate};
pub use cauchy::{CauchyParams, Zeta};
pub use distributions::Multinomial;
pub use divergences::{DivergenceValue, LogBase};
pub use error::{Error, Result};
pub use generators::Generator;
