//! Nested refinement: doubles the grid resolution of an existing path by
//! exact conditional sampling of the midpoints, keeping every coarse node.

use super::covariance::fgn_autocovariance;
use super::{circulant, FbmPath};
use crate::error::Result;
use crate::scalar::Real;
use crate::toeplitz;

/// Returns a path on the refined grid (`2n` steps) whose even nodes equal
/// the input path bit for bit and whose odd nodes are drawn from the exact
/// conditional law of fBm given all coarse nodes.
///
/// Conditioning uses the kriging identity `d | D = d_u + C_{dD} C_{DD}^{-1}
/// (D - D_u)`, where `d_u` is an unconditional fine fGn draw and `D` are
/// coarse increments. The Toeplitz solve is `O(n^2)`.
pub fn refine_midpoint<T: Real>(path: &FbmPath<T>) -> Result<FbmPath<T>> {
    let n = path.grid.steps();
    let fine = path.grid.refined();
    let hurst = path.hurst;
    let level = path.refinements + 1;

    let mut rng = path.seed.rng(u64::from(level));
    let d_u = circulant::sample_fgn(2 * n, hurst, &mut rng)?;

    // Work in unit-fine-step units: fine increments have covariance gamma(|i-j|),
    // coarse increments D_k = d_{2k} + d_{2k+1} have covariance 2^{2H} gamma(|k-l|).
    let h_fine = fine.dt().powf(hurst.value());
    let coarse: Vec<T> = path.increments().iter().map(|&v| v / h_fine).collect();
    let resid: Vec<T> = (0..n)
        .map(|k| coarse[k] - (d_u[2 * k] + d_u[2 * k + 1]))
        .collect();

    let two_2h = T::two().powf(T::two() * hurst.value());
    let row: Vec<T> = (0..n)
        .map(|k| two_2h * fgn_autocovariance(k, hurst))
        .collect();
    let w = toeplitz::solve_symmetric(&row, &resid)?;

    // Cov(d_{2k}, D_l) = gamma(2k - 2l) + gamma(2k - 2l - 1); lag 2j and 2j+1 for j = k - l.
    let cross = |j: isize| -> T {
        let a = (2 * j).unsigned_abs();
        let b = (2 * j - 1).unsigned_abs();
        fgn_autocovariance(a, hurst) + fgn_autocovariance(b, hurst)
    };
    let table: Vec<T> = (-(n as isize) + 1..n as isize).map(cross).collect();
    let offset = n as isize - 1;

    let mut values = Vec::with_capacity(2 * n + 1);
    for k in 0..n {
        let mut corr = T::zero();
        for (l, &wl) in w.iter().enumerate() {
            corr = corr + table[(k as isize - l as isize + offset) as usize] * wl;
        }
        let first_half = (d_u[2 * k] + corr) * h_fine;
        values.push(path.values[k]);
        values.push(path.values[k] + first_half);
    }
    values.push(path.values[n]);

    Ok(FbmPath {
        grid: fine,
        values,
        hurst,
        seed: path.seed,
        generator: path.generator,
        refinements: level,
    })
}
