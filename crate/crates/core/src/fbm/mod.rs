//! Fractional Brownian motion on uniform grids.
//!
//! Three exact generators are available: circulant embedding (default,
//! `O(n log n)`), a dense Cholesky factorisation and the Hosking recursion.
//! All of them draw their Gaussian inputs from a counter-based stream keyed
//! by `(master seed, path index)`, so a path does not depend on the order
//! in which paths are generated.

mod archive;
mod cache;
mod cholesky;
mod circulant;
mod covariance;
mod holder;
mod hosking;
mod refine;
mod rng;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

pub use archive::{read_path_archive, write_path_archive, write_path_csv, ARCHIVE_VERSION};
pub use cholesky::CHOLESKY_MAX_STEPS;
pub use circulant::circulant_eigenvalues;
pub use covariance::{
    fbm_covariance, fbm_covariance_raw, fgn_autocovariance, fgn_autocovariance_raw,
    fgn_autocovariance_row,
};
pub use holder::{estimate_holder, HolderEstimate};
pub use refine::refine_midpoint;
pub use rng::{PathRng, SeedRecord};

/// Hurst index restricted to the rough regime `0 < H < 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct HurstParam<T>(T);

impl<T: Real> HurstParam<T> {
    pub fn new(value: T) -> Result<Self> {
        if value > T::zero() && value < T::half() {
            Ok(Self(value))
        } else {
            Err(domain(format!(
                "Hurst parameter must lie in (0, 1/2), got {value}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }

    /// `2H - 1`, the exponent of the singular time factor.
    #[inline]
    pub fn kernel_exponent(self) -> T {
        T::two() * self.0 - T::one()
    }
}

/// Uniform grid `t_k = kT/n`, `k = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    horizon: T,
    steps: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(horizon: T, steps: usize) -> Result<Self> {
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(domain(format!(
                "grid horizon must be positive, got {horizon}"
            )));
        }
        if steps == 0 {
            return Err(domain("grid needs at least one step"));
        }
        Ok(Self { horizon, steps })
    }

    #[inline]
    pub fn horizon(&self) -> T {
        self.horizon
    }

    #[inline]
    pub fn steps(&self) -> usize {
        self.steps
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn dt(&self) -> T {
        self.horizon / T::of_usize(self.steps)
    }

    #[inline]
    pub fn node(&self, k: usize) -> T {
        if k == self.steps {
            self.horizon
        } else {
            T::of_usize(k) * self.horizon / T::of_usize(self.steps)
        }
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..=self.steps).map(|k| self.node(k)).collect()
    }

    /// Same horizon, twice the steps.
    pub fn refined(&self) -> Self {
        Self {
            horizon: self.horizon,
            steps: 2 * self.steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorTag {
    Cholesky,
    Hosking,
    Circulant,
    /// Identically zero driver, used for deterministic oracle runs.
    Zero,
}

impl GeneratorTag {
    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorTag::Cholesky => "cholesky",
            GeneratorTag::Hosking => "hosking",
            GeneratorTag::Circulant => "circulant",
            GeneratorTag::Zero => "zero",
        }
    }
}

impl fmt::Display for GeneratorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GeneratorTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cholesky" => Ok(GeneratorTag::Cholesky),
            "hosking" => Ok(GeneratorTag::Hosking),
            "circulant" => Ok(GeneratorTag::Circulant),
            "zero" => Ok(GeneratorTag::Zero),
            other => Err(domain(format!("unknown generator `{other}`"))),
        }
    }
}

/// A sampled fBm trajectory together with everything needed to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct FbmPath<T> {
    pub grid: TimeGrid<T>,
    pub values: Vec<T>,
    pub hurst: HurstParam<T>,
    pub seed: SeedRecord,
    pub generator: GeneratorTag,
    /// Number of nested midpoint refinements applied to the base draw.
    pub refinements: u32,
}

impl<T: Real> FbmPath<T> {
    /// The zero driver on `grid`.
    pub fn zero(grid: TimeGrid<T>, hurst: HurstParam<T>) -> Self {
        Self {
            grid,
            values: vec![T::zero(); grid.len()],
            hurst,
            seed: SeedRecord::new(0, 0),
            generator: GeneratorTag::Zero,
            refinements: 0,
        }
    }

    /// `max_k |B_{t_k}|`.
    pub fn sup_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Increments `B_{t_{k+1}} - B_{t_k}`.
    pub fn increments(&self) -> Vec<T> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Stable identifier of the driving noise, used to tag solver output.
    pub fn noise_id(&self) -> String {
        format!(
            "{}:{}:{}:n{}:r{}",
            self.generator,
            self.seed.master_seed,
            self.seed.path_index,
            self.grid.steps(),
            self.refinements
        )
    }

    /// Linear interpolation of the path at time `t` (clamped to the grid).
    pub fn value_at(&self, t: T) -> T {
        let dt = self.grid.dt();
        if t <= T::zero() {
            return self.values[0];
        }
        if t >= self.grid.horizon() {
            return self.values[self.grid.steps()];
        }
        let pos = t / dt;
        let k = pos
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(self.grid.steps() - 1);
        let w = pos - T::of_usize(k);
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }
}

/// Draws unit-variance fGn of length `n` with the chosen method.
pub fn generate_fgn<T: Real>(
    n: usize,
    hurst: HurstParam<T>,
    rng: &mut PathRng,
    method: GeneratorTag,
) -> Result<Vec<T>> {
    match method {
        GeneratorTag::Circulant => circulant::sample_fgn(n, hurst, rng),
        GeneratorTag::Cholesky => cholesky::sample_fgn(n, hurst, rng),
        GeneratorTag::Hosking => hosking::sample_fgn(n, hurst, rng),
        GeneratorTag::Zero => Ok(vec![T::zero(); n]),
    }
}

/// Generates one fBm path: cumulative sum of `dt^H`-scaled fGn, `B_0 = 0`.
pub fn generate_fbm<T: Real>(
    grid: TimeGrid<T>,
    hurst: HurstParam<T>,
    seed: SeedRecord,
    method: GeneratorTag,
) -> Result<FbmPath<T>> {
    let mut rng = seed.rng(0);
    let fgn = generate_fgn(grid.steps(), hurst, &mut rng, method)?;
    let scale = grid.dt().powf(hurst.value());
    let mut values = Vec::with_capacity(grid.len());
    values.push(T::zero());
    let mut acc = T::zero();
    for z in fgn {
        acc = acc + scale * z;
        values.push(acc);
    }
    Ok(FbmPath {
        grid,
        values,
        hurst,
        seed,
        generator: method,
        refinements: 0,
    })
}

/// Circulant embedding with a Cholesky fallback on numerical failure.
pub fn generate_fbm_with_fallback<T: Real>(
    grid: TimeGrid<T>,
    hurst: HurstParam<T>,
    seed: SeedRecord,
) -> Result<FbmPath<T>> {
    match generate_fbm(grid, hurst, seed, GeneratorTag::Circulant) {
        Err(Error::NegativeEigenvalue { .. }) => {
            generate_fbm(grid, hurst, seed, GeneratorTag::Cholesky)
        }
        other => other,
    }
}
