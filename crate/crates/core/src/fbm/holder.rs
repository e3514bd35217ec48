use super::TimeGrid;
use crate::error::{domain, Result};
use crate::scalar::Real;

/// Grid Hölder constant: `C = max_{i<j} |g_j - g_i| / (t_j - t_i)^beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderEstimate<T> {
    pub exponent: T,
    pub constant: T,
    pub grid: TimeGrid<T>,
}

impl<T: Real> HolderEstimate<T> {
    /// `C t^beta`, the envelope the estimate certifies for `|g(t) - g(0)|`.
    pub fn envelope(&self, t: T) -> T {
        self.constant * t.powf(self.exponent)
    }
}

/// Exhaustive `O(n^2)` scan over all grid pairs.
pub fn estimate_holder<T: Real>(
    values: &[T],
    grid: TimeGrid<T>,
    beta: T,
) -> Result<HolderEstimate<T>> {
    if !(beta > T::zero() && beta < T::one()) {
        return Err(domain(format!(
            "Hölder exponent must lie in (0, 1), got {beta}"
        )));
    }
    if values.len() < 2 || values.len() != grid.len() {
        return Err(domain(
            "Hölder scan needs at least two nodes matching the grid",
        ));
    }
    let dt = grid.dt();
    // spacing^beta depends only on the lag
    let lag_pow: Vec<T> = (0..values.len())
        .map(|l| (T::of_usize(l) * dt).powf(beta))
        .collect();
    let mut best = T::zero();
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let r = (values[j] - values[i]).abs() / lag_pow[j - i];
            if r > best {
                best = r;
            }
        }
    }
    Ok(HolderEstimate {
        exponent: beta,
        constant: best,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_path() {
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let est = estimate_holder(&[3.0; 11], grid, 0.2).unwrap();
        assert_eq!(est.constant, 0.0);
    }

    #[test]
    fn identity_on_two_nodes() {
        let grid = TimeGrid::new(1.0, 1).unwrap();
        let est = estimate_holder(&[0.0, 1.0], grid, 0.5).unwrap();
        assert_eq!(est.constant, 1.0);
    }

    #[test]
    fn rejects_bad_input() {
        let grid = TimeGrid::new(1.0, 1).unwrap();
        assert!(estimate_holder(&[0.0, 1.0], grid, 0.0).is_err());
        assert!(estimate_holder(&[0.0, 1.0], grid, 1.0).is_err());
        assert!(estimate_holder(&[0.0], grid, 0.5).is_err());
    }

    proptest! {
        #[test]
        fn bound_holds_and_monotone_in_beta(
            vals in prop::collection::vec(-5.0f64..5.0, 2..40),
            b1 in 0.05f64..0.9,
            db in 0.0f64..0.09,
        ) {
            let grid = TimeGrid::new(1.0, vals.len() - 1).unwrap();
            let e1 = estimate_holder(&vals, grid, b1).unwrap();
            let e2 = estimate_holder(&vals, grid, b1 + db).unwrap();
            prop_assert!(e2.constant >= e1.constant);
            for i in 0..vals.len() {
                for j in i + 1..vals.len() {
                    let gap = grid.node(j) - grid.node(i);
                    prop_assert!((vals[j] - vals[i]).abs() <= e1.constant * gap.powf(b1) * (1.0 + 1e-12));
                }
            }
        }
    }
}
