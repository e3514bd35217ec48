//! The ε-regularised equation
//! `X_t = X_0 + a∫(s+ε)^{2H-1}/(X_s 1{X_s>0} + ε) ds - b∫X_s ds + σB_t`
//! and its pathwise integrators.

mod comparison;
mod drift;
mod export;
mod solver;

use crate::error::{domain, Result};
use crate::fbm::HurstParam;
use crate::scalar::Real;

pub use comparison::{solve_comparison_pair, ComparisonPair, ComparisonSystem};
pub use drift::{drift_eps, kernel_integral};
pub use export::write_solution_csv;
pub use solver::{solve_regularized, solve_regularized_with, RegularizedPath, StepScheme};

/// Model parameters `(X_0, a, b, σ, H)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeSpec<T> {
    pub x0: T,
    pub a: T,
    pub b: T,
    pub sigma: T,
    pub hurst: HurstParam<T>,
}

impl<T: Real> SdeSpec<T> {
    pub fn new(x0: T, a: T, b: T, sigma: T, hurst: HurstParam<T>) -> Result<Self> {
        if !(x0 > T::zero()) {
            return Err(domain(format!("X_0 must be positive, got {x0}")));
        }
        if !(a > T::zero()) {
            return Err(domain(format!("a must be positive, got {a}")));
        }
        if !(b >= T::zero()) {
            return Err(domain(format!("b must be nonnegative, got {b}")));
        }
        if !(sigma > T::zero()) {
            return Err(domain(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self {
            x0,
            a,
            b,
            sigma,
            hurst,
        })
    }

    /// `C = X_0 + a T^{2H} / (H X_0)`, the deterministic part of the
    /// uniform upper bound on every regularised solution over `[0, T]`.
    pub fn bound_constant(&self, horizon: T) -> T {
        let h = self.hurst.value();
        self.x0 + self.a * horizon.powf(T::two() * h) / (h * self.x0)
    }

    /// `sqrt(X_0^2 + a t^{2H} / H)`: exact solution of `x' = a t^{2H-1}/x`,
    /// i.e. the limit equation without noise and with `b = 0`.
    pub fn noiseless_solution(&self, t: T) -> T {
        let h = self.hurst.value();
        (self.x0 * self.x0 + self.a * t.powf(T::two() * h) / h).sqrt()
    }
}
