use serde::{Deserialize, Serialize};

use super::drift::cell_kernels;
use super::SdeSpec;
use crate::error::{domain, Error, Result};
use crate::fbm::{FbmPath, TimeGrid};
use crate::scalar::Real;

/// How the state enters the singular drift within one grid cell. In both
/// schemes the time factor `(s+ε)^{2H-1}` is integrated exactly over the
/// cell and `-bX` uses the left endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepScheme {
    /// `1/(X_k^+ + ε)` frozen at the left endpoint (explicit).
    FrozenLeft,
    /// `1/(X_{k+1}^+ + ε)` at the right endpoint, solved in closed form.
    ///
    /// The one-step map is nondecreasing in `X_k` and in `1/ε`, so
    /// trajectories for two ε values driven by the same noise never cross.
    /// The explicit map loses this near zero once `aK/ε^2` exceeds one.
    #[default]
    ImplicitSingular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedPath<T> {
    pub spec: SdeSpec<T>,
    pub epsilon: T,
    pub grid: TimeGrid<T>,
    pub values: Vec<T>,
    pub noise_ref: String,
    pub scheme: StepScheme,
}

/// Root of `y = c + A / (y^+ + ε)`; the right-hand side is nonincreasing in
/// `y`, so the root is unique and nondecreasing in `c` and `A`.
#[inline]
pub(crate) fn implicit_root<T: Real>(c: T, forcing: T, epsilon: T) -> T {
    let flat = c + forcing / epsilon;
    if flat <= T::zero() {
        return flat;
    }
    // y^2 + (ε - c) y - (cε + A) = 0, positive root, cancellation-free form.
    let disc = ((c + epsilon) * (c + epsilon) + T::of(4.0) * forcing).sqrt();
    let lead = c - epsilon;
    if lead >= T::zero() {
        T::half() * (lead + disc)
    } else {
        T::two() * (c * epsilon + forcing) / (disc - lead)
    }
}

pub fn solve_regularized<T: Real>(
    spec: &SdeSpec<T>,
    epsilon: T,
    noise: &FbmPath<T>,
) -> Result<RegularizedPath<T>> {
    solve_regularized_with(spec, epsilon, noise, StepScheme::default())
}

pub fn solve_regularized_with<T: Real>(
    spec: &SdeSpec<T>,
    epsilon: T,
    noise: &FbmPath<T>,
    scheme: StepScheme,
) -> Result<RegularizedPath<T>> {
    if !(epsilon > T::zero()) {
        return Err(domain(format!("ε must be positive, got {epsilon}")));
    }
    let grid = noise.grid;
    let kernels = cell_kernels(&grid.nodes(), epsilon, spec.hurst);
    let damp = T::one() - spec.b * grid.dt();
    let mut values = Vec::with_capacity(grid.len());
    let mut x = spec.x0;
    values.push(x);
    for (k, &kern) in kernels.iter().enumerate() {
        let forcing = spec.a * kern;
        let shock = spec.sigma * (noise.values[k + 1] - noise.values[k]);
        x = match scheme {
            StepScheme::FrozenLeft => {
                let pos = if x > T::zero() { x } else { T::zero() };
                damp * x + forcing / (pos + epsilon) + shock
            }
            StepScheme::ImplicitSingular => implicit_root(damp * x + shock, forcing, epsilon),
        };
        if !x.is_finite() {
            return Err(Error::NonFinite {
                step: k + 1,
                value: x.as_f64(),
                epsilon: epsilon.as_f64(),
            });
        }
        values.push(x);
    }
    Ok(RegularizedPath {
        spec: *spec,
        epsilon,
        grid,
        values,
        noise_ref: noise.noise_id(),
        scheme,
    })
}
