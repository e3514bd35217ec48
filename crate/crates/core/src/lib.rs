//! Regularised approximation of the singular equation
//!
//! ```text
//! X_t = X_0 + a∫_0^t s^{2H-1}/X_s ds - b∫_0^t X_s ds + σB^H_t,   H < 1/2
//! ```
//!
//! driven by rough fractional Brownian motion, and pathwise checks on the
//! limit of the regularised solutions.
//!
//! * [`fbm`]: exact fBm / fGn sampling (circulant embedding, Cholesky,
//!   Hosking), nested refinement, Hölder estimates, path archives.
//! * [`sde`]: the ε-regularised equation and its shared-noise solver.
//! * [`limit`]: ε-ladders, the monotone limit estimate and its checks.
//! * [`picard`]: local existence by contraction near `t = 0`.
//! * [`excursion`]: excursions of the limit path and restart identities.
//! * [`harness`]: configuration, Monte Carlo campaigns and reports.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix `f64`, which is what the harness uses.

// `!(x > 0)` is how NaN gets rejected along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod excursion;
pub mod fbm;
pub mod harness;
pub mod limit;
pub mod picard;
pub mod scalar;
pub mod sde;
pub mod toeplitz;

pub use error::{Error, Result};
pub use scalar::Real;

pub type HurstParam64 = fbm::HurstParam<f64>;
pub type TimeGrid64 = fbm::TimeGrid<f64>;
pub type FbmPath64 = fbm::FbmPath<f64>;
pub type SdeSpec64 = sde::SdeSpec<f64>;
pub type RegularizedPath64 = sde::RegularizedPath<f64>;
pub type EpsilonLadder64 = limit::EpsilonLadder<f64>;
pub type EpsilonFamily64 = limit::EpsilonFamily<f64>;
pub type LocalProblem64 = picard::LocalProblem<f64>;
