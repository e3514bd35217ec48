use super::EpsilonFamily;
use crate::scalar::Real;
use crate::sde::RegularizedPath;

/// `Δt · #{k in 1..=n : X_k <= 0}`.
pub fn nonpositive_measure<T: Real>(path: &RegularizedPath<T>) -> T {
    let count = path
        .values
        .iter()
        .skip(1)
        .filter(|&&v| v <= T::zero())
        .count();
    path.grid.dt() * T::of_usize(count)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureDecay<T> {
    /// Nonpositive measure per ladder level.
    pub measures: Vec<T>,
    pub nonincreasing: bool,
    pub threshold: T,
    pub passed: bool,
}

impl<T: Real> MeasureDecay<T> {
    pub fn first(&self) -> T {
        self.measures[0]
    }

    pub fn last(&self) -> T {
        *self.measures.last().unwrap()
    }
}

/// Passes when the per-level measure never increases down the ladder and
/// the deepest level's measure is at most `threshold`.
pub fn verify_measure_decay<T: Real>(family: &EpsilonFamily<T>, threshold: T) -> MeasureDecay<T> {
    let measures: Vec<T> = family.solutions.iter().map(nonpositive_measure).collect();
    let nonincreasing = measures.windows(2).all(|w| w[1] <= w[0]);
    let passed = nonincreasing && *measures.last().unwrap() <= threshold;
    MeasureDecay {
        measures,
        nonincreasing,
        threshold,
        passed,
    }
}
