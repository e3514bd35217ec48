use super::EpsilonFamily;
use crate::scalar::Real;

/// Uniform bound `X^ε_t <= C + 2σ max|B|` scanned over all levels and nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCertificate<T> {
    /// `X_0 + a T^{2H} / (H X_0)`.
    pub constant: T,
    pub noise_sup: T,
    pub bound: T,
    /// `max_{j,k} (X^{ε_j}_k - bound)`; nonpositive when the bound holds.
    pub max_violation: T,
    pub worst_node: (usize, usize),
}

impl<T: Real> BoundCertificate<T> {
    pub fn passes(&self, tol_bound: T) -> bool {
        self.max_violation <= tol_bound
    }
}

pub fn verify_upper_bound<T: Real>(family: &EpsilonFamily<T>) -> BoundCertificate<T> {
    let spec = &family.spec;
    let constant = spec.bound_constant(family.grid().horizon());
    let noise_sup = family.noise.sup_abs();
    let bound = constant + T::two() * spec.sigma * noise_sup;
    let mut max_violation = T::neg_infinity();
    let mut worst_node = (0, 0);
    for (j, sol) in family.solutions.iter().enumerate() {
        for (k, &x) in sol.values.iter().enumerate() {
            if x - bound > max_violation {
                max_violation = x - bound;
                worst_node = (j, k);
            }
        }
    }
    BoundCertificate {
        constant,
        noise_sup,
        bound,
        max_violation,
        worst_node,
    }
}
