//! Levinson-type solvers for symmetric positive definite Toeplitz systems.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Solves `T x = b` where `T` is the symmetric Toeplitz matrix with first
/// row `row` (`row[0]` on the diagonal). `O(n^2)` time, `O(n)` memory.
///
/// Fails when a reflection step shows the matrix is not positive definite.
pub fn solve_symmetric<T: Real>(row: &[T], b: &[T]) -> Result<Vec<T>> {
    let n = b.len();
    assert!(row.len() >= n, "Toeplitz row shorter than right-hand side");
    if n == 0 {
        return Ok(Vec::new());
    }
    let r0 = row[0];
    if !(r0 > T::zero()) {
        return Err(Error::NotPositiveDefinite {
            pivot: 0,
            value: r0.as_f64(),
        });
    }
    // Normalised problem: unit diagonal, r[k] = row[k+1] / row[0].
    let r: Vec<T> = row[1..n].iter().map(|&v| v / r0).collect();
    let rhs: Vec<T> = b.iter().map(|&v| v / r0).collect();

    let mut x = vec![T::zero(); n];
    x[0] = rhs[0];
    if n == 1 {
        return Ok(x);
    }
    let mut y = vec![T::zero(); n];
    y[0] = -r[0];
    let mut beta = T::one();
    let mut alpha = -r[0];
    let mut scratch = vec![T::zero(); n];

    for k in 1..n {
        beta = (T::one() - alpha * alpha) * beta;
        if !(beta > T::zero()) {
            return Err(Error::NotPositiveDefinite {
                pivot: k,
                value: beta.as_f64(),
            });
        }
        let mut acc = T::zero();
        for j in 0..k {
            acc = acc + r[j] * x[k - 1 - j];
        }
        let mu = (rhs[k] - acc) / beta;
        for j in 0..k {
            scratch[j] = x[j] + mu * y[k - 1 - j];
        }
        x[..k].copy_from_slice(&scratch[..k]);
        x[k] = mu;

        if k < n - 1 {
            let mut acc = T::zero();
            for j in 0..k {
                acc = acc + r[j] * y[k - 1 - j];
            }
            alpha = (-r[k] - acc) / beta;
            for j in 0..k {
                scratch[j] = y[j] + alpha * y[k - 1 - j];
            }
            y[..k].copy_from_slice(&scratch[..k]);
            y[k] = alpha;
        }
    }
    Ok(x)
}
