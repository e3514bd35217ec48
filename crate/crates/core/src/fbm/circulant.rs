//! Davies–Harte / Wood–Chan circulant embedding for fGn.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::cache;
use super::covariance::fgn_autocovariance;
use super::rng::PathRng;
use super::HurstParam;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigenvalues below this abort the embedding instead of being clipped.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

pub(crate) struct Embedding<T: Real> {
    /// `sqrt(max(lambda_k, 0) / m)` for the size-`m = 2n` circulant.
    scale: Vec<T>,
    fft: Arc<dyn Fft<T>>,
}

/// Eigenvalues of the size-`2n` circulant whose first row is
/// `gamma(0), ..., gamma(n-1), gamma(n), gamma(n-1), ..., gamma(1)`.
pub fn circulant_eigenvalues<T: Real>(n: usize, hurst: HurstParam<T>) -> Vec<T> {
    let m = 2 * n;
    let mut row: Vec<Complex<T>> = Vec::with_capacity(m);
    for k in 0..=n {
        row.push(Complex::new(fgn_autocovariance(k, hurst), T::zero()));
    }
    for k in (1..n).rev() {
        row.push(Complex::new(fgn_autocovariance(k, hurst), T::zero()));
    }
    let fft = FftPlanner::new().plan_fft_forward(m);
    fft.process(&mut row);
    row.into_iter().map(|c| c.re).collect()
}

fn build<T: Real>(n: usize, hurst: HurstParam<T>) -> Result<Embedding<T>> {
    let m = 2 * n;
    let eig = circulant_eigenvalues(n, hurst);
    let floor = T::of(EIGENVALUE_FLOOR);
    let m_t = T::of_usize(m);
    let mut scale = Vec::with_capacity(m);
    for (index, &lambda) in eig.iter().enumerate() {
        if lambda < floor {
            return Err(Error::NegativeEigenvalue {
                n,
                index,
                value: lambda.as_f64(),
            });
        }
        scale.push((lambda.max(T::zero()) / m_t).sqrt());
    }
    let fft = FftPlanner::new().plan_fft_forward(m);
    Ok(Embedding { scale, fft })
}

pub(crate) fn embedding<T: Real>(n: usize, hurst: HurstParam<T>) -> Result<Arc<Embedding<T>>> {
    cache::get_or_build("circulant", n, hurst.value(), || build(n, hurst))
}

pub(crate) fn sample_fgn<T: Real>(
    n: usize,
    hurst: HurstParam<T>,
    rng: &mut PathRng,
) -> Result<Vec<T>> {
    let emb = embedding(n, hurst)?;
    let mut w: Vec<Complex<T>> = emb
        .scale
        .iter()
        .map(|&s| {
            let re: T = rng.normal();
            let im: T = rng.normal();
            Complex::new(s * re, s * im)
        })
        .collect();
    emb.fft.process(&mut w);
    // Real and imaginary parts are independent exact samples; keep the real one.
    Ok(w.into_iter().take(n).map(|c| c.re).collect())
}
