use super::EpsilonFamily;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonnegativityCheck<T> {
    pub passed: bool,
    pub worst_value: T,
    pub worst_node: usize,
    pub tolerance: T,
    /// Set on failure: the deepest level is still far from the limit.
    pub ladder_too_shallow: bool,
}

/// `min_k X̂_k >= -tol`.
pub fn verify_limit_nonnegativity<T: Real>(
    family: &EpsilonFamily<T>,
    tol: T,
) -> NonnegativityCheck<T> {
    let (worst_node, worst_value) = family.limit_estimate.iter().copied().enumerate().fold(
        (0, T::infinity()),
        |best, (k, v)| if v < best.1 { (k, v) } else { best },
    );
    let passed = worst_value >= -tol;
    NonnegativityCheck {
        passed,
        worst_value,
        worst_node,
        tolerance: tol,
        ladder_too_shallow: !passed,
    }
}
