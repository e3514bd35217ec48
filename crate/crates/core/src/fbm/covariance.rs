//! Closed-form second-order structure of fBm and its unit-step increments.

use crate::error::{domain, Result};
use crate::fbm::HurstParam;
use crate::scalar::Real;

/// `E[B_s B_t] = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2` for any `h` in `(0, 1)`.
///
/// Unrestricted evaluator: accepts `h = 1/2` (Brownian motion) and beyond,
/// for sanity checks. Use [`fbm_covariance`] on the solver side.
pub fn fbm_covariance_raw<T: Real>(s: T, t: T, h: T) -> Result<T> {
    if s < T::zero() || t < T::zero() {
        return Err(domain(format!("covariance needs s, t >= 0 (got {s}, {t})")));
    }
    let e = T::two() * h;
    Ok(T::half() * (t.powf(e) + s.powf(e) - (t - s).abs().powf(e)))
}

pub fn fbm_covariance<T: Real>(s: T, t: T, hurst: HurstParam<T>) -> Result<T> {
    fbm_covariance_raw(s, t, hurst.value())
}

/// Autocovariance of unit-variance fractional Gaussian noise at integer lag.
pub fn fgn_autocovariance_raw<T: Real>(k: usize, h: T) -> T {
    if k == 0 {
        return T::one();
    }
    let e = T::two() * h;
    let k = T::of_usize(k);
    T::half() * ((k + T::one()).powf(e) - T::two() * k.powf(e) + (k - T::one()).powf(e))
}

pub fn fgn_autocovariance<T: Real>(k: usize, hurst: HurstParam<T>) -> T {
    fgn_autocovariance_raw(k, hurst.value())
}

/// `gamma(0..len)` as a vector.
pub fn fgn_autocovariance_row<T: Real>(len: usize, hurst: HurstParam<T>) -> Vec<T> {
    (0..len).map(|k| fgn_autocovariance(k, hurst)).collect()
}
