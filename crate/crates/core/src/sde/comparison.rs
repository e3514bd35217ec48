//! Generic pair integrator for the comparison criterion
//! `x^i_t = x_0 + ∫g_i(s) f_i(x^i_s) ds + ∫h_i(x^i_s) ds + b(t)`.

use crate::error::{Error, Result};
use crate::fbm::TimeGrid;
use crate::scalar::Real;

/// Right-hand side of one member of the pair.
pub struct ComparisonSystem<'a, T> {
    pub g: &'a dyn Fn(T) -> T,
    pub f: &'a dyn Fn(T) -> T,
    pub h: &'a dyn Fn(T) -> T,
}

/// Trajectories of both members plus whether the strict hypotheses held.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonPair<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    /// `g1 < g2` and `f1 < f2` held strictly at every visited point.
    pub strict: bool,
}

/// Integrates both systems with left-endpoint Euler on `grid`, sharing the
/// additive forcing `forcing[k] = b(t_k)`.
///
/// The ordering hypotheses `0 < g1 <= g2`, `0 < f1 <= f2` and `h1 <= h2`
/// are checked at every visited time and at both visited states; any
/// violation aborts.
pub fn solve_comparison_pair<T: Real>(
    x0: T,
    lower: &ComparisonSystem<'_, T>,
    upper: &ComparisonSystem<'_, T>,
    forcing: &[T],
    grid: TimeGrid<T>,
) -> Result<ComparisonPair<T>> {
    assert_eq!(
        forcing.len(),
        grid.len(),
        "forcing must be sampled on the grid"
    );
    let dt = grid.dt();
    let mut x1 = vec![x0];
    let mut x2 = vec![x0];
    let mut strict = true;
    for k in 0..grid.steps() {
        let t = grid.node(k);
        let (a, b) = (x1[k], x2[k]);
        let (g1, g2) = ((lower.g)(t), (upper.g)(t));
        if !(T::zero() < g1 && g1 <= g2) {
            return Err(Error::Hypothesis {
                step: k,
                detail: format!("need 0 < g1 <= g2 at t = {t}, got {g1}, {g2}"),
            });
        }
        strict &= g1 < g2;
        for x in [a, b] {
            let (f1, f2) = ((lower.f)(x), (upper.f)(x));
            if !(T::zero() < f1 && f1 <= f2) {
                return Err(Error::Hypothesis {
                    step: k,
                    detail: format!("need 0 < f1 <= f2 at x = {x}, got {f1}, {f2}"),
                });
            }
            strict &= f1 < f2;
            let (h1, h2) = ((lower.h)(x), (upper.h)(x));
            if !(h1 <= h2) {
                return Err(Error::Hypothesis {
                    step: k,
                    detail: format!("need h1 <= h2 at x = {x}, got {h1}, {h2}"),
                });
            }
        }
        let shock = forcing[k + 1] - forcing[k];
        x1.push(a + dt * (g1 * (lower.f)(a) + (lower.h)(a)) + shock);
        x2.push(b + dt * (g2 * (upper.f)(b) + (upper.h)(b)) + shock);
    }
    Ok(ComparisonPair {
        lower: x1,
        upper: x2,
        strict,
    })
}
