//! Exact one-dimensional optimal transport on finite discrete distributions.
//!
//! The crate computes 2-Wasserstein distances between finitely supported
//! laws on the real line (and between such a law and the standard normal)
//! by integrating the squared difference of quantile functions segment by
//! segment. On top of that it runs the dyadic renormalization map
//! `law(X) -> law((X + X') / sqrt 2)`, checks the contraction inequality
//!
//! ```text
//! W2((X + Y) / sqrt 2, Z)^2 <= (W2(X, Z)^2 + W2(Y, Z)^2) / 2
//! ```
//!
//! for independent standardized `X`, `Y`, and traces the distance of
//! row sums of bounded triangular arrays to the normal law.
//!
//! Modules:
//!
//! - [`distribution`]: the [`DiscreteDist`] value type and its algebra.
//! - [`gaussian`]: the standard normal reference and closed-form quantile integrals.
//! - [`transport`]: exact, brute-force and Monte Carlo W2, comonotone couplings.
//! - [`renormalization`]: the dyadic iteration and the contraction check.
//! - [`lindeberg`]: triangular-array rows and epsilon sweeps.
//! - [`cli`]: the `w2clt` command-line front end.

pub mod cli;
pub mod distribution;
pub mod error;
pub mod gaussian;
pub mod lindeberg;
mod numeric;
pub mod plot;
pub mod renormalization;
pub mod transport;

pub use distribution::{ConvolveConfig, DiscreteDist, MomentSummary};
pub use error::{Error, ErrorKind, Result};
pub use lindeberg::{ArrayRow, Family, SweepEntry, SweepResult};
pub use renormalization::{Contraction, RgRecord, RgTrace};
pub use transport::{Coupling, Method, QuantileSegment, SegmentValue, W2Report};
