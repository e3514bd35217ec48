//! Exact fGn by dense Cholesky factorisation of the Toeplitz covariance.

use std::sync::Arc;

use super::cache;
use super::covariance::fgn_autocovariance_row;
use super::rng::PathRng;
use super::HurstParam;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Policy limit on the dense generator (`O(n^3)` setup, `O(n^2)` storage).
pub const CHOLESKY_MAX_STEPS: usize = 4096;

/// Lower-triangular factor in packed row-major storage.
pub(crate) struct Factor<T> {
    n: usize,
    packed: Vec<T>,
}

impl<T: Real> Factor<T> {
    #[inline]
    fn row(&self, i: usize) -> &[T] {
        let start = i * (i + 1) / 2;
        &self.packed[start..start + i + 1]
    }
}

fn factorize<T: Real>(n: usize, hurst: HurstParam<T>) -> Result<Factor<T>> {
    let gamma = fgn_autocovariance_row(n, hurst);
    let mut packed = vec![T::zero(); n * (n + 1) / 2];
    for i in 0..n {
        let ri = i * (i + 1) / 2;
        for j in 0..=i {
            let rj = j * (j + 1) / 2;
            let mut sum = gamma[i - j];
            for k in 0..j {
                sum = sum - packed[ri + k] * packed[rj + k];
            }
            if i == j {
                if !(sum > T::zero()) {
                    return Err(Error::NotPositiveDefinite {
                        pivot: i,
                        value: sum.as_f64(),
                    });
                }
                packed[ri + i] = sum.sqrt();
            } else {
                packed[ri + j] = sum / packed[rj + j];
            }
        }
    }
    Ok(Factor { n, packed })
}

pub(crate) fn factor<T: Real>(n: usize, hurst: HurstParam<T>) -> Result<Arc<Factor<T>>> {
    if n > CHOLESKY_MAX_STEPS {
        return Err(Error::GridTooLarge {
            method: "cholesky",
            n,
            limit: CHOLESKY_MAX_STEPS,
        });
    }
    cache::get_or_build("cholesky", n, hurst.value(), || factorize(n, hurst))
}

pub(crate) fn sample_fgn<T: Real>(
    n: usize,
    hurst: HurstParam<T>,
    rng: &mut PathRng,
) -> Result<Vec<T>> {
    let l = factor(n, hurst)?;
    debug_assert_eq!(l.n, n);
    let z: Vec<T> = rng.normals(n);
    Ok((0..n)
        .map(|i| {
            l.row(i)
                .iter()
                .zip(&z)
                .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_reproduces_covariance() {
        let hurst = HurstParam::new(0.2).unwrap();
        let n = 12;
        let l = factorize(n, hurst).unwrap();
        let gamma = fgn_autocovariance_row(n, hurst);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = l.row(i).iter().zip(l.row(j)).map(|(a, b)| a * b).sum();
                assert!((v - gamma[i - j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn size_policy() {
        let hurst = HurstParam::new(0.2).unwrap();
        assert!(matches!(
            factor::<f64>(CHOLESKY_MAX_STEPS + 1, hurst),
            Err(Error::GridTooLarge { .. })
        ));
    }
}
