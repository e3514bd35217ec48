use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::fbm::FbmPath;
use crate::scalar::{sup_distance, Real};
use crate::sde::{solve_regularized_with, SdeSpec, StepScheme};

/// Sup-gaps `max_k |X^{ε*±h}_k - X^{ε*}_k|` for a decreasing sequence of `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityTable<T> {
    pub eps_star: T,
    pub steps: Vec<T>,
    /// Gaps towards larger ε (`ε* + h`).
    pub above: Vec<T>,
    /// Gaps towards smaller ε (`ε* - h`).
    pub below: Vec<T>,
    pub passed: bool,
}

impl<T: Real> ContinuityTable<T> {
    fn judge(gaps: &[T]) -> bool {
        let nonincreasing = gaps.windows(2).all(|w| w[1] <= w[0]);
        let shrunk = match (gaps.first(), gaps.last()) {
            (Some(&first), Some(&last)) => last <= first / T::of(4.0),
            _ => false,
        };
        nonincreasing && shrunk
    }
}

/// Both one-sided gap sequences must be nonincreasing with the last gap at
/// most a quarter of the first.
pub fn verify_eps_continuity<T: Real>(
    spec: &SdeSpec<T>,
    noise: &FbmPath<T>,
    eps_star: T,
    steps: &[T],
    scheme: StepScheme,
) -> Result<ContinuityTable<T>> {
    if !(eps_star > T::zero()) {
        return Err(domain("ε* must be positive"));
    }
    if steps.iter().any(|&h| !(h >= T::zero() && h < eps_star))
        || steps.windows(2).any(|w| !(w[1] < w[0]))
    {
        return Err(domain("h sequence must be decreasing within [0, ε*)"));
    }
    let centre = solve_regularized_with(spec, eps_star, noise, scheme)?;
    let gaps: Vec<(T, T)> = steps
        .par_iter()
        .map(|&h| -> Result<(T, T)> {
            let up = solve_regularized_with(spec, eps_star + h, noise, scheme)?;
            let down = solve_regularized_with(spec, eps_star - h, noise, scheme)?;
            Ok((
                sup_distance(&up.values, &centre.values),
                sup_distance(&down.values, &centre.values),
            ))
        })
        .collect::<Result<_>>()?;
    let above: Vec<T> = gaps.iter().map(|g| g.0).collect();
    let below: Vec<T> = gaps.iter().map(|g| g.1).collect();
    let passed =
        !steps.is_empty() && ContinuityTable::judge(&above) && ContinuityTable::judge(&below);
    Ok(ContinuityTable {
        eps_star,
        steps: steps.to_vec(),
        above,
        below,
        passed,
    })
}
