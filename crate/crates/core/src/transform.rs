//! Multi-level 2D CDF 9/7 wavelet transform (lifting form) and the
//! per-subband synthesis energy weights used to translate subband-domain
//! squared error into image-domain squared error.
//!
//! Boundaries use whole-sample symmetric extension. Odd lengths split with
//! the low band taking the extra sample. Subbands are stored coarse to fine:
//! `LL_L, HL_L, LH_L, HH_L, HL_{L-1}, ... , HH_1`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Scalar};

const ALPHA: f64 = -1.586_134_342_059_924;
const BETA: f64 = -0.052_980_118_572_961;
const GAMMA: f64 = 0.882_911_075_530_934;
const DELTA: f64 = 0.443_506_852_043_971;
const K: f64 = 1.149_604_398_860_241;

/// A single-channel image. Samples are row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane<T> {
    pub width: usize,
    pub height: usize,
    pub samples: Vec<T>,
}

impl<T: Scalar> ImagePlane<T> {
    pub fn new(width: usize, height: usize, samples: Vec<T>) -> Result<Self> {
        if samples.len() != width * height {
            return Err(Error::GeometryMismatch(format!(
                "{} samples for a {width}x{height} image",
                samples.len()
            )));
        }
        Ok(Self { width, height, samples })
    }

    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self { width, height, samples: vec![value; width * height] }
    }

    pub fn from_u8(width: usize, height: usize, pixels: &[u8]) -> Result<Self> {
        Self::new(width, height, pixels.iter().map(|&p| T::lit(p as f64)).collect())
    }

    /// Clamp to `[0, 255]` and round half away from zero.
    pub fn to_u8(&self) -> Vec<u8> {
        self.samples
            .iter()
            .map(|&s| s.as_f64().round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.samples[y * self.width + x]
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    /// Lowpass in both directions; deepest level only.
    LL,
    /// Highpass horizontally, lowpass vertically.
    HL,
    /// Lowpass horizontally, highpass vertically.
    LH,
    /// Highpass in both directions.
    HH,
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Orientation::LL => "LL",
            Orientation::HL => "HL",
            Orientation::LH => "LH",
            Orientation::HH => "HH",
        };
        f.write_str(s)
    }
}

/// Level 1 is the finest decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SubbandId {
    pub level: usize,
    pub orientation: Orientation,
}

impl fmt::Display for SubbandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.orientation, self.level)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subband<T> {
    pub id: SubbandId,
    pub width: usize,
    pub height: usize,
    pub coeffs: Vec<T>,
}

impl<T> Subband<T> {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubbandSet<T> {
    pub width: usize,
    pub height: usize,
    pub levels: usize,
    pub subbands: Vec<Subband<T>>,
}

impl<T: Scalar> SubbandSet<T> {
    pub fn coefficient_count(&self) -> usize {
        self.subbands.iter().map(Subband::len).sum()
    }

    pub fn get(&self, id: SubbandId) -> Option<&Subband<T>> {
        self.subbands.iter().find(|b| b.id == id)
    }

    /// A set with the given geometry and every coefficient zero.
    pub fn zeros(width: usize, height: usize, levels: usize) -> Result<Self> {
        let subbands = subband_layout(width, height, levels)?
            .into_iter()
            .map(|g| Subband {
                id: g.id,
                width: g.width,
                height: g.height,
                coeffs: vec![T::zero(); g.width * g.height],
            })
            .collect();
        Ok(Self { width, height, levels, subbands })
    }
}

/// Placement of one subband inside the in-place transform buffer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubbandGeometry {
    pub id: SubbandId,
    pub x0: usize,
    pub y0: usize,
    pub width: usize,
    pub height: usize,
}

#[inline]
fn low_len(n: usize) -> usize {
    n.div_ceil(2)
}

/// Subband geometry in canonical order, or an error if any subband would be
/// empty.
pub fn subband_layout(width: usize, height: usize, levels: usize) -> Result<Vec<SubbandGeometry>> {
    let too_small = || Error::DimensionTooSmall { width, height, levels };
    if width == 0 || height == 0 {
        return Err(too_small());
    }
    let (mut w, mut h) = (width, height);
    let mut details = Vec::with_capacity(3 * levels);
    for level in 1..=levels {
        if w < 2 || h < 2 {
            return Err(too_small());
        }
        let (lw, lh) = (low_len(w), low_len(h));
        let (hw, hh) = (w - lw, h - lh);
        let mk = |orientation, x0, y0, width, height| SubbandGeometry {
            id: SubbandId { level, orientation },
            x0,
            y0,
            width,
            height,
        };
        // pushed fine to coarse, reversed below
        details.push(mk(Orientation::HH, lw, lh, hw, hh));
        details.push(mk(Orientation::LH, 0, lh, lw, hh));
        details.push(mk(Orientation::HL, lw, 0, hw, lh));
        w = lw;
        h = lh;
    }
    let mut out = Vec::with_capacity(3 * levels + 1);
    out.push(SubbandGeometry {
        id: SubbandId { level: levels, orientation: Orientation::LL },
        x0: 0,
        y0: 0,
        width: w,
        height: h,
    });
    out.extend(details.into_iter().rev());
    Ok(out)
}

/// One lifting pass over samples of the given parity, with whole-sample
/// symmetric extension at both ends.
#[inline]
fn lift<T: Scalar>(x: &mut [T], start: usize, coef: T) {
    let n = x.len();
    let mut i = start;
    while i < n {
        let left = if i == 0 { x[1] } else { x[i - 1] };
        let right = if i + 1 < n { x[i + 1] } else { x[i - 1] };
        x[i] += coef * (left + right);
        i += 2;
    }
}

/// Forward 1D transform of `x` in place; output is `[low | high]`.
fn forward_1d<T: Scalar>(x: &mut [T], scratch: &mut Vec<T>) {
    let n = x.len();
    if n < 2 {
        return;
    }
    lift(x, 1, T::lit(ALPHA));
    lift(x, 0, T::lit(BETA));
    lift(x, 1, T::lit(GAMMA));
    lift(x, 0, T::lit(DELTA));
    let (k, inv_k) = (T::lit(K), T::lit(1.0 / K));
    scratch.clear();
    scratch.extend(x.iter().step_by(2).map(|&v| v * k));
    scratch.extend(x.iter().skip(1).step_by(2).map(|&v| v * inv_k));
    x.copy_from_slice(scratch);
}

/// Inverse of [`forward_1d`].
fn inverse_1d<T: Scalar>(x: &mut [T], scratch: &mut Vec<T>) {
    let n = x.len();
    if n < 2 {
        return;
    }
    let nl = low_len(n);
    let (k, inv_k) = (T::lit(K), T::lit(1.0 / K));
    scratch.clear();
    scratch.resize(n, T::zero());
    for (i, &v) in x[..nl].iter().enumerate() {
        scratch[2 * i] = v * inv_k;
    }
    for (i, &v) in x[nl..].iter().enumerate() {
        scratch[2 * i + 1] = v * k;
    }
    x.copy_from_slice(scratch);
    lift(x, 0, T::lit(-DELTA));
    lift(x, 1, T::lit(-GAMMA));
    lift(x, 0, T::lit(-BETA));
    lift(x, 1, T::lit(-ALPHA));
}

/// Applies `op` to every row and then every column of the `w x h` top-left
/// region of a row-major buffer with the given stride.
fn rows_then_cols<T: Scalar>(
    buf: &mut [T],
    stride: usize,
    w: usize,
    h: usize,
    op: fn(&mut [T], &mut Vec<T>),
) {
    let mut scratch = Vec::with_capacity(w.max(h));
    for y in 0..h {
        op(&mut buf[y * stride..y * stride + w], &mut scratch);
    }
    let mut col = vec![T::zero(); h];
    for x in 0..w {
        for y in 0..h {
            col[y] = buf[y * stride + x];
        }
        op(&mut col, &mut scratch);
        for y in 0..h {
            buf[y * stride + x] = col[y];
        }
    }
}

fn cols_then_rows<T: Scalar>(
    buf: &mut [T],
    stride: usize,
    w: usize,
    h: usize,
    op: fn(&mut [T], &mut Vec<T>),
) {
    let mut scratch = Vec::with_capacity(w.max(h));
    let mut col = vec![T::zero(); h];
    for x in 0..w {
        for y in 0..h {
            col[y] = buf[y * stride + x];
        }
        op(&mut col, &mut scratch);
        for y in 0..h {
            buf[y * stride + x] = col[y];
        }
    }
    for y in 0..h {
        op(&mut buf[y * stride..y * stride + w], &mut scratch);
    }
}

/// Sizes of the LL region before each level's split, finest first.
fn level_regions(width: usize, height: usize, levels: usize) -> Vec<(usize, usize)> {
    let mut regions = Vec::with_capacity(levels);
    let (mut w, mut h) = (width, height);
    for _ in 0..levels {
        regions.push((w, h));
        w = low_len(w);
        h = low_len(h);
    }
    regions
}

pub fn forward_dwt<T: Scalar>(image: &ImagePlane<T>, levels: usize) -> Result<SubbandSet<T>> {
    let (width, height) = (image.width, image.height);
    if image.samples.len() != width * height {
        return Err(Error::GeometryMismatch("sample count does not match dimensions".into()));
    }
    let layout = subband_layout(width, height, levels)?;
    let mut buf = image.samples.clone();
    for (w, h) in level_regions(width, height, levels) {
        rows_then_cols(&mut buf, width, w, h, forward_1d);
    }
    let subbands = layout
        .into_iter()
        .map(|g| {
            let mut coeffs = Vec::with_capacity(g.width * g.height);
            for y in g.y0..g.y0 + g.height {
                coeffs.extend_from_slice(&buf[y * width + g.x0..y * width + g.x0 + g.width]);
            }
            Subband { id: g.id, width: g.width, height: g.height, coeffs }
        })
        .collect();
    Ok(SubbandSet { width, height, levels, subbands })
}

pub fn inverse_dwt<T: Scalar>(set: &SubbandSet<T>) -> Result<ImagePlane<T>> {
    let (width, height) = (set.width, set.height);
    let layout = subband_layout(width, height, set.levels)?;
    if layout.len() != set.subbands.len() {
        return Err(Error::GeometryMismatch(format!(
            "expected {} subbands, found {}",
            layout.len(),
            set.subbands.len()
        )));
    }
    let mut buf = vec![T::zero(); width * height];
    for (g, band) in layout.iter().zip(&set.subbands) {
        if band.id != g.id || band.width != g.width || band.height != g.height {
            return Err(Error::GeometryMismatch(format!(
                "subband {} is {}x{}, expected {} at {}x{}",
                band.id, band.width, band.height, g.id, g.width, g.height
            )));
        }
        if band.coeffs.len() != g.width * g.height {
            return Err(Error::GeometryMismatch(format!("subband {} has wrong sample count", band.id)));
        }
        for (row, y) in (g.y0..g.y0 + g.height).enumerate() {
            buf[y * width + g.x0..y * width + g.x0 + g.width]
                .copy_from_slice(&band.coeffs[row * g.width..(row + 1) * g.width]);
        }
    }
    for (w, h) in level_regions(width, height, set.levels).into_iter().rev() {
        cols_then_rows(&mut buf, width, w, h, inverse_1d);
    }
    ImagePlane::new(width, height, buf)
}

/// Mean squared norm of the 1D synthesis functions of one band of a
/// `levels`-deep decomposition of a length-`n` signal.
fn basis_energy_1d<T: Scalar>(n: usize, levels: usize, highpass: bool) -> T {
    let lens: Vec<usize> = std::iter::successors(Some(n), |&m| Some(low_len(m)))
        .take(levels + 1)
        .collect();
    let band = if highpass { lens[levels]..lens[levels - 1] } else { 0..lens[levels] };
    let count = band.len();
    let mut scratch = Vec::with_capacity(n);
    let mut total = T::zero();
    let mut signal = vec![T::zero(); n];
    for p in band {
        signal.iter_mut().for_each(|v| *v = T::zero());
        signal[p] = T::one();
        for &m in lens[..levels].iter().rev() {
            inverse_1d(&mut signal[..m], &mut scratch);
        }
        total += signal.iter().map(|&v| v * v).sum::<T>();
    }
    total / T::lit(count as f64)
}

/// Per-subband weight: the mean squared L2 norm of the subband's synthesis
/// basis functions, measured by inverse-transforming unit impulses. The 2D
/// basis is separable, so each weight is the product of a horizontal and a
/// vertical 1D energy. Returned in canonical subband order.
pub fn subband_weights<T: Scalar>(
    levels: usize,
    width: usize,
    height: usize,
) -> Result<Vec<(SubbandId, T)>> {
    let layout = subband_layout(width, height, levels)?;
    Ok(layout
        .into_iter()
        .map(|g| {
            let weight = if levels == 0 {
                T::one()
            } else {
                let level = g.id.level;
                let (hx, hy) = match g.id.orientation {
                    Orientation::LL => (false, false),
                    Orientation::HL => (true, false),
                    Orientation::LH => (false, true),
                    Orientation::HH => (true, true),
                };
                basis_energy_1d::<T>(width, level, hx) * basis_energy_1d::<T>(height, level, hy)
            };
            (g.id, weight)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(w: usize, h: usize, seed: u64) -> ImagePlane<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ImagePlane::new(w, h, (0..w * h).map(|_| rng.random_range(0.0..255.0)).collect()).unwrap()
    }

    #[test]
    fn lena_sized_layout() {
        let layout = subband_layout(512, 512, 3).unwrap();
        assert_eq!(layout.len(), 10);
        assert_eq!(layout[0].id, SubbandId { level: 3, orientation: Orientation::LL });
        assert_eq!((layout[0].width, layout[0].height), (64, 64));
        assert_eq!(layout.iter().map(|g| g.width * g.height).sum::<usize>(), 512 * 512);
    }

    #[test]
    fn constant_image_has_no_detail() {
        let img = ImagePlane::filled(16, 16, 128.0f64);
        let set = forward_dwt(&img, 1).unwrap();
        for band in set.subbands.iter().filter(|b| b.id.orientation != Orientation::LL) {
            assert!(band.coeffs.iter().all(|c| c.abs() < 1e-9), "{}", band.id);
        }
    }

    #[test]
    fn perfect_reconstruction_odd_sizes() {
        for (w, h) in [(37, 53), (9, 8), (64, 17), (5, 5)] {
            let img = random_image(w, h, (w * h) as u64);
            let set = forward_dwt(&img, 2).unwrap();
            assert_eq!(set.coefficient_count(), w * h);
            let back = inverse_dwt(&set).unwrap();
            let err = img.samples.iter().zip(&back.samples).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "{w}x{h}: {err}");
        }
    }

    #[test]
    fn zero_subbands_give_zero_image() {
        let set = SubbandSet::<f64>::zeros(64, 64, 3).unwrap();
        assert!(inverse_dwt(&set).unwrap().samples.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn too_small_is_rejected() {
        assert!(matches!(forward_dwt(&ImagePlane::filled(4, 4, 0.0), 3), Err(Error::DimensionTooSmall { .. })));
        assert!(forward_dwt(&ImagePlane::filled(5, 5, 0.0), 3).is_ok());
    }

    #[test]
    fn mismatched_geometry_is_rejected() {
        let mut set = forward_dwt(&random_image(32, 32, 1), 2).unwrap();
        set.subbands[2].coeffs.pop();
        assert!(matches!(inverse_dwt(&set), Err(Error::GeometryMismatch(_))));
        let mut set = forward_dwt(&random_image(32, 32, 1), 2).unwrap();
        set.subbands.swap(1, 2);
        assert!(inverse_dwt(&set).is_err());
    }

    #[test]
    fn weights_are_near_unity() {
        // with low*K / high/K scaling the basis is close to orthonormal; the
        // 1D lowpass synthesis energy is ~0.983 and the highpass ~1.04
        let w = subband_weights::<f64>(1, 64, 64).unwrap();
        let get = |o| w.iter().find(|(id, _)| id.orientation == o).unwrap().1;
        assert!(get(Orientation::LL) < get(Orientation::HH));
        assert!(w.iter().all(|&(_, v)| v > 0.9 && v < 1.25));
    }

    #[test]
    fn f32_roundtrip_is_close() {
        let img = random_image(32, 32, 9);
        let img32 = ImagePlane::new(32, 32, img.samples.iter().map(|&v| v as f32).collect()).unwrap();
        let back = inverse_dwt(&forward_dwt(&img32, 3).unwrap()).unwrap();
        let err = img32.samples.iter().zip(&back.samples).map(|(a, b)| (a - b).abs()).fold(0.0, f32::max);
        assert!(err < 1e-3, "{err}");
    }
}
