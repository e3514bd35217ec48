use super::EpsilonFamily;
use crate::fbm::{HurstParam, TimeGrid};
use crate::scalar::Real;
use crate::sde::kernel_integral;

/// Default truncation floor relative to `X_0`: `η = FLOOR_FRACTION · X_0`.
pub const FLOOR_FRACTION: f64 = 1e-6;

/// Running estimate of `∫_0^t s^{2H-1} / X_s ds` on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularIntegral<T> {
    pub running: Vec<T>,
    pub floor: T,
    /// Nodes where `X̂ < η` and the floor was used.
    pub flagged: Vec<usize>,
    /// `Σ_k K_k |1/X̂_k - 1/X̂_{k+1}|` (floored), the spread between the
    /// left- and right-frozen sums.
    pub spread: T,
    /// `Σ_{k flagged} K_{k-1}`, the kernel mass carried by floored nodes.
    pub flagged_kernel_mass: T,
}

/// Exact kernel integration per cell with the state frozen at the cell's
/// right node, floored at `η`: `Î_{k+1} = Î_k + K(t_k, t_{k+1}) / max(X̂_{k+1}, η)`.
pub fn singular_integral<T: Real>(
    values: &[T],
    grid: TimeGrid<T>,
    hurst: HurstParam<T>,
    floor: T,
) -> SingularIntegral<T> {
    assert_eq!(values.len(), grid.len());
    singular_integral_window(values, grid, hurst, floor, 0, grid.steps())
}

/// As [`singular_integral`] but over nodes `start..=end` only; `running[0]`
/// is the (zero) value at `start` and flagged nodes are absolute indices.
pub fn singular_integral_window<T: Real>(
    values: &[T],
    grid: TimeGrid<T>,
    hurst: HurstParam<T>,
    floor: T,
    start: usize,
    end: usize,
) -> SingularIntegral<T> {
    assert!(start <= end && end < values.len());
    assert!(floor > T::zero(), "floor must be positive");
    let clamp = |v: T| v.max(floor);
    let mut running = Vec::with_capacity(end - start + 1);
    running.push(T::zero());
    let mut flagged = Vec::new();
    let mut acc = T::zero();
    let mut spread = T::zero();
    let mut flagged_kernel_mass = T::zero();
    for k in start..end {
        let kern = kernel_integral(grid.node(k), grid.node(k + 1), T::zero(), hurst)
            .expect("grid nodes are ordered");
        if values[k + 1] < floor {
            flagged.push(k + 1);
            flagged_kernel_mass = flagged_kernel_mass + kern;
        }
        let right = T::one() / clamp(values[k + 1]);
        let left = T::one() / clamp(values[k]);
        acc = acc + kern * right;
        spread = spread + kern * (left - right).abs();
        running.push(acc);
    }
    SingularIntegral {
        running,
        floor,
        flagged,
        spread,
        flagged_kernel_mass,
    }
}

/// `L̂_t = X̂_t - X_0 - a Î_t + b ∫X̂ - σ B_t` with its error budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct CompensatorEstimate<T> {
    pub values: Vec<T>,
    pub floor: T,
    pub flagged_nodes: Vec<usize>,
    /// `a ·` spread of the singular quadrature plus the spread between the
    /// trapezoid and left-endpoint sums of `b∫X̂`.
    pub quadrature_budget: T,
    /// `a · #flagged · Δt / η`.
    pub truncation_budget: T,
    pub cauchy_gap: T,
}

impl<T: Real> CompensatorEstimate<T> {
    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Allowed negativity of `L̂`: `2·gap + truncation + 1e-6`.
    pub fn nonnegativity_tolerance(&self) -> T {
        T::two() * self.cauchy_gap + self.truncation_budget + T::of(1e-6)
    }

    /// Allowed `|L̂|` when the exact compensator vanishes: `2·gap + quadrature`.
    pub fn vanishing_tolerance(&self) -> T {
        T::two() * self.cauchy_gap + self.quadrature_budget
    }
}

pub fn compute_compensator<T: Real>(family: &EpsilonFamily<T>, floor: T) -> CompensatorEstimate<T> {
    let spec = &family.spec;
    let grid = family.grid();
    let x = &family.limit_estimate;
    let integral = singular_integral(x, grid, spec.hurst, floor);
    let half_dt = T::half() * grid.dt();
    let mut trapezoid = T::zero();
    let mut linear_spread = T::zero();
    let mut values = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        if k > 0 {
            trapezoid = trapezoid + half_dt * (x[k - 1] + x[k]);
            linear_spread = linear_spread + half_dt * (x[k] - x[k - 1]).abs();
        }
        let l = x[k] - spec.x0 - spec.a * integral.running[k] + spec.b * trapezoid
            - spec.sigma * family.noise.values[k];
        values.push(if k == 0 { T::zero() } else { l });
    }
    let truncation_budget = spec.a * T::of_usize(integral.flagged.len()) * grid.dt() / floor;
    CompensatorEstimate {
        values,
        floor,
        flagged_nodes: integral.flagged,
        quadrature_budget: spec.a * integral.spread + spec.b * linear_spread,
        truncation_budget,
        cauchy_gap: family.cauchy_gap,
    }
}
