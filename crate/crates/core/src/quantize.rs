//! Mid-tread uniform scalar quantization. Raw levels are `round(x / q)`
//! (ties away from zero); stored indices are shifted into `[1, k]` so they
//! address the DNA code directly.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizerSpec<T> {
    /// Step size.
    pub q: T,
    /// Most negative raw level; index 1 reconstructs to `min_index * q`.
    pub min_index: i64,
    /// Number of levels.
    pub k: u32,
}

impl<T: Scalar> QuantizerSpec<T> {
    /// Reconstruction value of a level index in `[1, k]`.
    #[inline]
    pub fn level(&self, index: u32) -> Result<T> {
        if index == 0 || index > self.k {
            return Err(Error::IndexOutOfRange { index, k: self.k });
        }
        Ok(self.level_unchecked(index))
    }

    #[inline]
    pub(crate) fn level_unchecked(&self, index: u32) -> T {
        T::lit((self.min_index + index as i64 - 1) as f64) * self.q
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedSubband<T> {
    pub spec: QuantizerSpec<T>,
    pub width: usize,
    pub height: usize,
    pub indices: Vec<u32>,
}

pub(crate) fn check_step<T: Scalar>(q: T) -> Result<()> {
    if !q.is_finite() || q <= T::zero() {
        return Err(Error::InvalidStep(q.as_f64()));
    }
    Ok(())
}

#[inline]
pub(crate) fn raw_level<T: Scalar>(x: T, q: T) -> i64 {
    (x / q).round().as_f64() as i64
}

/// Range of raw levels `(min, max)` that `q` produces on `coeffs`.
pub(crate) fn level_range<T: Scalar>(coeffs: &[T], q: T) -> (i64, i64) {
    coeffs.iter().fold((i64::MAX, i64::MIN), |(lo, hi), &x| {
        let r = raw_level(x, q);
        (lo.min(r), hi.max(r))
    })
}

pub fn quantize_subband<T: Scalar>(
    coeffs: &[T],
    width: usize,
    height: usize,
    q: T,
) -> Result<QuantizedSubband<T>> {
    check_step(q)?;
    if coeffs.len() != width * height {
        return Err(Error::GeometryMismatch(format!(
            "{} coefficients for a {width}x{height} subband",
            coeffs.len()
        )));
    }
    if let Some(pos) = coeffs.iter().position(|c| !c.is_finite()) {
        return Err(Error::NonFiniteCoefficient(pos));
    }
    if coeffs.is_empty() {
        return Ok(QuantizedSubband {
            spec: QuantizerSpec { q, min_index: 0, k: 1 },
            width,
            height,
            indices: Vec::new(),
        });
    }
    let (lo, hi) = level_range(coeffs, q);
    let k = u32::try_from(hi - lo + 1).map_err(|_| Error::InvalidStep(q.as_f64()))?;
    let indices = coeffs.iter().map(|&x| (raw_level(x, q) - lo + 1) as u32).collect();
    Ok(QuantizedSubband { spec: QuantizerSpec { q, min_index: lo, k }, width, height, indices })
}

pub fn dequantize_subband<T: Scalar>(qsb: &QuantizedSubband<T>) -> Result<Vec<T>> {
    qsb.indices.iter().map(|&i| qsb.spec.level(i)).collect()
}
