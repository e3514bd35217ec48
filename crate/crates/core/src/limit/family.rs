use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::fbm::FbmPath;
use crate::scalar::{sup_distance, Real};
use crate::sde::{solve_regularized_with, RegularizedPath, SdeSpec, StepScheme};

/// Rounding allowance for the discrete ordering `X^{ε_{j+1}} >= X^{ε_j}`.
pub const TOL_MONO: f64 = 1e-12;

/// `ε_j = ε_0 r^j`, `j = 0..=J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonLadder<T> {
    base: T,
    ratio: T,
    depth: usize,
}

impl<T: Real> EpsilonLadder<T> {
    pub fn new(base: T, ratio: T, depth: usize) -> Result<Self> {
        if !(base > T::zero()) {
            return Err(domain(format!("ladder base must be positive, got {base}")));
        }
        if !(ratio > T::zero() && ratio < T::one()) {
            return Err(domain(format!(
                "ladder ratio must lie in (0, 1), got {ratio}"
            )));
        }
        if depth == 0 {
            return Err(domain("ladder depth must be positive"));
        }
        Ok(Self { base, ratio, depth })
    }

    pub fn base(&self) -> T {
        self.base
    }

    pub fn ratio(&self) -> T {
        self.ratio
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn level(&self, j: usize) -> T {
        self.base * self.ratio.powi(j as i32)
    }

    pub fn levels(&self) -> Vec<T> {
        (0..=self.depth).map(|j| self.level(j)).collect()
    }

    /// Same base and ratio, one more level.
    pub fn deepened(&self) -> Self {
        Self {
            depth: self.depth + 1,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityReport<T> {
    pub tolerance: T,
    /// Nodes `(j, k)`, `k >= 1`, with `X^{ε_{j+1}}_k < X^{ε_j}_k - tol`.
    pub violations: usize,
    /// Largest `X^{ε_j}_k - X^{ε_{j+1}}_k` over all adjacent pairs and `k >= 1`.
    pub worst: T,
    pub first_break: Option<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct EpsilonFamily<T> {
    pub spec: SdeSpec<T>,
    pub noise: FbmPath<T>,
    pub ladder: EpsilonLadder<T>,
    pub solutions: Vec<RegularizedPath<T>>,
    /// Deepest level, `solutions[J].values`.
    pub limit_estimate: Vec<T>,
    /// `max_k |X^{ε_J}_k - X^{ε_{J-1}}_k|`.
    pub cauchy_gap: T,
    pub monotonicity: MonotonicityReport<T>,
}

impl<T: Real> EpsilonFamily<T> {
    pub fn noise_ref(&self) -> &str {
        &self.solutions[0].noise_ref
    }

    pub fn grid(&self) -> crate::fbm::TimeGrid<T> {
        self.noise.grid
    }

    /// `max_{j,k} (X^{ε_j}_k - X̂_k)`; nonpositive when the estimate
    /// dominates every level.
    pub fn sandwich_excess(&self) -> T {
        self.solutions
            .iter()
            .flat_map(|s| {
                s.values
                    .iter()
                    .zip(&self.limit_estimate)
                    .map(|(&x, &l)| x - l)
            })
            .fold(T::neg_infinity(), T::max)
    }
}

pub fn build_family<T: Real>(
    spec: &SdeSpec<T>,
    noise: &FbmPath<T>,
    ladder: EpsilonLadder<T>,
) -> Result<EpsilonFamily<T>> {
    build_family_with(spec, noise, ladder, StepScheme::default(), T::of(TOL_MONO))
}

/// Solves every ladder level against the shared noise (levels in parallel).
pub fn build_family_with<T: Real>(
    spec: &SdeSpec<T>,
    noise: &FbmPath<T>,
    ladder: EpsilonLadder<T>,
    scheme: StepScheme,
    tol_mono: T,
) -> Result<EpsilonFamily<T>> {
    let solutions: Vec<RegularizedPath<T>> = ladder
        .levels()
        .into_par_iter()
        .map(|eps| solve_regularized_with(spec, eps, noise, scheme))
        .collect::<Result<_>>()?;

    let mut report = MonotonicityReport {
        tolerance: tol_mono,
        violations: 0,
        worst: T::neg_infinity(),
        first_break: None,
    };
    for (j, pair) in solutions.windows(2).enumerate() {
        for k in 1..pair[0].values.len() {
            let drop = pair[0].values[k] - pair[1].values[k];
            report.worst = report.worst.max(drop);
            if drop > tol_mono {
                report.violations += 1;
                report.first_break.get_or_insert((j, k));
            }
        }
    }

    let depth = ladder.depth();
    let limit_estimate = solutions[depth].values.clone();
    let cauchy_gap = sup_distance(&solutions[depth].values, &solutions[depth - 1].values);
    Ok(EpsilonFamily {
        spec: *spec,
        noise: noise.clone(),
        ladder,
        solutions,
        limit_estimate,
        cauchy_gap,
        monotonicity: report,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NestingReport {
    /// `{k : X^{ε_{j+1}}_k <= 0} ⊆ {k : X^{ε_j}_k <= 0}` for every `j`.
    pub nested: bool,
    /// First adjacent pair `(j, k)` breaking containment.
    pub first_break: Option<(usize, usize)>,
    /// Ordering holds with zero tolerance at every node.
    pub exact_ordering: bool,
}

/// Exact (tolerance-free) containment of the nonpositive node sets.
pub fn check_nesting<T: Real>(family: &EpsilonFamily<T>) -> NestingReport {
    let mut first_break = None;
    let mut exact_ordering = true;
    for (j, pair) in family.solutions.windows(2).enumerate() {
        for (k, (&coarse, &fine)) in pair[0].values.iter().zip(&pair[1].values).enumerate() {
            if fine < coarse {
                exact_ordering = false;
            }
            if fine <= T::zero() && coarse > T::zero() && first_break.is_none() {
                first_break = Some((j, k));
            }
        }
    }
    NestingReport {
        nested: first_break.is_none(),
        first_break,
        exact_ordering,
    }
}
