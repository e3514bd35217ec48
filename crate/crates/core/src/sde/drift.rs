use crate::error::{domain, Result};
use crate::fbm::HurstParam;
use crate::scalar::Real;
use crate::sde::SdeSpec;

/// `a (t+ε)^{2H-1} / (x 1{x>0} + ε) - b x`.
#[inline]
pub fn drift_eps<T: Real>(t: T, x: T, spec: &SdeSpec<T>, epsilon: T) -> T {
    let pos = if x > T::zero() { x } else { T::zero() };
    spec.a * (t + epsilon).powf(spec.hurst.kernel_exponent()) / (pos + epsilon) - spec.b * x
}

/// `∫_{t1}^{t2} (s+ε)^{2H-1} ds = [(t2+ε)^{2H} - (t1+ε)^{2H}] / (2H)`.
pub fn kernel_integral<T: Real>(t1: T, t2: T, epsilon: T, hurst: HurstParam<T>) -> Result<T> {
    if t1 < T::zero() || epsilon < T::zero() {
        return Err(domain(format!(
            "kernel integral needs t1, ε >= 0 (got t1 = {t1}, ε = {epsilon})"
        )));
    }
    if t1 > t2 {
        return Err(domain(format!(
            "kernel integral needs t1 <= t2 (got {t1} > {t2})"
        )));
    }
    let e = T::two() * hurst.value();
    Ok(((t2 + epsilon).powf(e) - (t1 + epsilon).powf(e)) / e)
}

/// Kernel integrals over every grid cell, from cumulative powers.
pub(crate) fn cell_kernels<T: Real>(nodes: &[T], epsilon: T, hurst: HurstParam<T>) -> Vec<T> {
    let e = T::two() * hurst.value();
    let pow: Vec<T> = nodes.iter().map(|&t| (t + epsilon).powf(e)).collect();
    pow.windows(2).map(|w| (w[1] - w[0]) / e).collect()
}
