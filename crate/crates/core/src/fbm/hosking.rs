//! Hosking's sequential method: Durbin–Levinson prediction of each fGn
//! value from its past.

use super::covariance::fgn_autocovariance_row;
use super::rng::PathRng;
use super::HurstParam;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub(crate) fn sample_fgn<T: Real>(
    n: usize,
    hurst: HurstParam<T>,
    rng: &mut PathRng,
) -> Result<Vec<T>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let gamma = fgn_autocovariance_row(n + 1, hurst);
    let mut out = Vec::with_capacity(n);
    out.push(rng.normal::<T>());
    // phi holds the partial regression coefficients of x_k on x_{k-1..0}.
    let mut phi: Vec<T> = Vec::with_capacity(n);
    let mut next = vec![T::zero(); n];
    let mut var = T::one();
    for k in 1..n {
        let mut num = gamma[k];
        for (j, &p) in phi.iter().enumerate() {
            num = num - p * gamma[k - 1 - j];
        }
        let reflect = num / var;
        for j in 0..phi.len() {
            next[j] = phi[j] - reflect * phi[phi.len() - 1 - j];
        }
        let len = phi.len();
        phi.clear();
        phi.extend_from_slice(&next[..len]);
        phi.push(reflect);
        var = var * (T::one() - reflect * reflect);
        if !(var > T::zero()) {
            return Err(Error::NotPositiveDefinite {
                pivot: k,
                value: var.as_f64(),
            });
        }
        let mut mean = T::zero();
        for (j, &p) in phi.iter().enumerate() {
            mean = mean + p * out[k - 1 - j];
        }
        out.push(mean + var.sqrt() * rng.normal::<T>());
    }
    Ok(out)
}
