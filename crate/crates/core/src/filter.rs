//! Per-channel plane filtering: bilinear down/up resampling, separable
//! Gaussian blur and edge-preserving bilateral filtering, plus the naive
//! bilateral reference used as a testing oracle.
//!
//! All filters share one border policy: the window is clipped at the plane
//! border and weights are renormalized over the in-bounds neighbors. The
//! weighted averages are computed in centered form
//! `out = v(m) + sum w (v(n) - v(m)) / sum w`, which preserves a constant
//! plane bit-exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Triplane;
use crate::plane::Plane;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Bilinear,
    Gaussian,
    Bilateral,
}

impl std::fmt::Display for FilterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FilterKind::Bilinear => write!(f, "bilinear"),
            FilterKind::Gaussian => write!(f, "gaussian"),
            FilterKind::Bilateral => write!(f, "bilateral"),
        }
    }
}

/// Filter selection plus bandwidths.
///
/// `sigma_s` defaults to `size / 3`; `sigma_r` defaults to half the
/// standard deviation of the plane channel being filtered.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec<T> {
    pub kind: FilterKind,
    /// Window side length; odd, >= 1. Ignored by the bilinear filter.
    pub size: usize,
    pub sigma_s: Option<T>,
    pub sigma_r: Option<T>,
    /// Downscale factor for the bilinear filter; >= 2, must divide R.
    pub factor: usize,
}

impl<T: Real> KernelSpec<T> {
    pub fn gaussian(size: usize) -> Self {
        KernelSpec {
            kind: FilterKind::Gaussian,
            size,
            sigma_s: None,
            sigma_r: None,
            factor: 4,
        }
    }

    pub fn bilateral(size: usize) -> Self {
        KernelSpec {
            kind: FilterKind::Bilateral,
            size,
            sigma_s: None,
            sigma_r: None,
            factor: 4,
        }
    }

    pub fn bilinear(factor: usize) -> Self {
        KernelSpec {
            kind: FilterKind::Bilinear,
            size: 1,
            sigma_s: None,
            sigma_r: None,
            factor,
        }
    }

    pub fn spatial_sigma(&self) -> T {
        self.sigma_s
            .unwrap_or_else(|| T::of(self.size as f64 / 3.0))
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 || self.size % 2 == 0 {
            return Err(Error::invalid(format!(
                "kernel size must be odd and >= 1, got {}",
                self.size
            )));
        }
        if let Some(s) = self.sigma_s {
            if !(s > T::zero()) {
                return Err(Error::invalid("sigma_s must be positive"));
            }
        }
        if let Some(s) = self.sigma_r {
            if !(s > T::zero()) {
                return Err(Error::invalid("sigma_r must be positive"));
            }
        }
        if self.kind == FilterKind::Bilinear && self.factor < 2 {
            return Err(Error::invalid("bilinear downscale factor must be >= 2"));
        }
        Ok(())
    }
}

/// Normalized 1D Gaussian weights over texel offsets -r..=r.
pub fn gaussian_kernel_1d<T: Real>(size: usize, sigma: T) -> Result<Vec<T>> {
    if size == 0 || size % 2 == 0 {
        return Err(Error::invalid(format!("kernel size must be odd, got {size}")));
    }
    if !(sigma > T::zero()) {
        return Err(Error::invalid("sigma must be positive"));
    }
    let r = (size / 2) as i64;
    let inv = T::one() / (T::of(2.0) * sigma * sigma);
    let mut weights = Vec::with_capacity(size);
    let mut sum = T::zero();
    for d in -r..=r {
        let d = T::of(d as f64);
        let w = (-(d * d) * inv).exp();
        sum += w;
        weights.push(w);
    }
    for w in weights.iter_mut() {
        *w = *w / sum;
    }
    Ok(weights)
}

/// Separable per-channel Gaussian blur.
pub fn filter_gaussian<T: Real>(plane: &Plane<T>, spec: &KernelSpec<T>) -> Result<Plane<T>> {
    if spec.kind != FilterKind::Gaussian {
        return Err(Error::invalid(format!(
            "filter_gaussian called with {} spec",
            spec.kind
        )));
    }
    spec.validate()?;
    let weights = gaussian_kernel_1d(spec.size, spec.spatial_sigma())?;
    let res = plane.res();
    let mut out = plane.clone();
    let mut channel = vec![T::zero(); res * res];
    let mut tmp = vec![T::zero(); res * res];
    for c in 0..plane.channels() {
        extract_channel(plane, c, &mut channel);
        blur_rows(&channel, &mut tmp, res, &weights);
        transpose(&tmp, &mut channel, res);
        blur_rows(&channel, &mut tmp, res, &weights);
        transpose(&tmp, &mut channel, res);
        store_channel(&mut out, c, &channel);
    }
    Ok(out)
}

/// One horizontal 1D pass with clipped, renormalized windows.
fn blur_rows<T: Real>(input: &[T], output: &mut [T], res: usize, weights: &[T]) {
    let r = weights.len() / 2;
    for row in 0..res {
        let line = &input[row * res..(row + 1) * res];
        let out_line = &mut output[row * res..(row + 1) * res];
        for col in 0..res {
            let lo = col.saturating_sub(r);
            let hi = (col + r).min(res - 1);
            let center = line[col];
            let mut acc = T::zero();
            let mut wsum = T::zero();
            for n in lo..=hi {
                let w = weights[n + r - col];
                acc += w * (line[n] - center);
                wsum += w;
            }
            out_line[col] = center + acc / wsum;
        }
    }
}

fn transpose<T: Real>(input: &[T], output: &mut [T], res: usize) {
    for row in 0..res {
        for col in 0..res {
            output[col * res + row] = input[row * res + col];
        }
    }
}

/// Range-kernel lookup table for `exp(-x)` on [0, X_MAX]; beyond X_MAX the
/// true weight is below 3e-9 and is treated as zero.
const LUT_X_MAX: f64 = 20.0;
const LUT_SIZE: usize = 32768;

struct ExpLut<T> {
    table: Vec<T>,
    scale: T,
}

impl<T: Real> ExpLut<T> {
    fn new() -> Self {
        let mut table = Vec::with_capacity(LUT_SIZE + 1);
        for i in 0..=LUT_SIZE {
            let x = LUT_X_MAX * i as f64 / LUT_SIZE as f64;
            table.push(T::of((-x).exp()));
        }
        ExpLut {
            table,
            scale: T::of(LUT_SIZE as f64 / LUT_X_MAX),
        }
    }

    /// Linearly interpolated exp(-x); max error ~5e-8 over the domain.
    #[inline(always)]
    fn eval(&self, x: T) -> T {
        let t = x * self.scale;
        let idx = t.as_f64() as usize;
        if idx >= LUT_SIZE {
            return T::zero();
        }
        let a = self.table[idx];
        let b = self.table[idx + 1];
        let frac = t - T::of(idx as f64);
        a + frac * (b - a)
    }
}

/// Per-channel σ_r used by both bilateral implementations: the explicit
/// value when given, otherwise half the channel standard deviation. A
/// non-positive result (constant channel) disables the range term.
fn resolve_sigma_r<T: Real>(plane: &Plane<T>, c: usize, spec: &KernelSpec<T>) -> Option<T> {
    let sr = spec
        .sigma_r
        .unwrap_or_else(|| T::of(0.5) * plane.channel_std(c));
    if sr > T::zero() {
        Some(sr)
    } else {
        None
    }
}

fn spatial_table<T: Real>(size: usize, sigma_s: T) -> Vec<T> {
    let r = (size / 2) as i64;
    let inv = T::one() / (T::of(2.0) * sigma_s * sigma_s);
    let mut table = Vec::with_capacity(size * size);
    for dy in -r..=r {
        for dx in -r..=r {
            let d2 = T::of((dx * dx + dy * dy) as f64);
            table.push((-d2 * inv).exp());
        }
    }
    table
}

/// Edge-preserving bilateral filter, optimized implementation.
///
/// Spatial weights come from a precomputed k x k table, range weights from
/// the interpolated exp table; agreement with the naive reference is within
/// 1e-6 absolute.
pub fn filter_bilateral<T: Real>(plane: &Plane<T>, spec: &KernelSpec<T>) -> Result<Plane<T>> {
    if spec.kind != FilterKind::Bilateral {
        return Err(Error::invalid(format!(
            "filter_bilateral called with {} spec",
            spec.kind
        )));
    }
    spec.validate()?;
    let res = plane.res();
    let k = spec.size;
    let r = k / 2;
    let st = spatial_table(k, spec.spatial_sigma());
    let lut = ExpLut::<T>::new();
    let mut out = plane.clone();
    let mut channel = vec![T::zero(); res * res];
    let mut result = vec![T::zero(); res * res];

    for c in 0..plane.channels() {
        extract_channel(plane, c, &mut channel);
        let inv2sr2 = resolve_sigma_r(plane, c, spec)
            .map(|sr| T::one() / (T::of(2.0) * sr * sr));
        for row in 0..res {
            let row_lo = row.saturating_sub(r);
            let row_hi = (row + r).min(res - 1);
            for col in 0..res {
                let col_lo = col.saturating_sub(r);
                let col_hi = (col + r).min(res - 1);
                let center = channel[row * res + col];
                let mut acc = T::zero();
                let mut wsum = T::zero();
                for n_row in row_lo..=row_hi {
                    let st_row = &st[(n_row + r - row) * k..];
                    let line = &channel[n_row * res..];
                    for n_col in col_lo..=col_hi {
                        let v = line[n_col];
                        let ws = st_row[n_col + r - col];
                        let w = match inv2sr2 {
                            Some(inv) => {
                                let d = v - center;
                                ws * lut.eval(d * d * inv)
                            }
                            None => ws,
                        };
                        acc += w * (v - center);
                        wsum += w;
                    }
                }
                result[row * res + col] = center + acc / wsum;
            }
        }
        store_channel_from(&mut out, c, &result);
    }
    Ok(out)
}

/// Naive O(R^2 k^2) bilateral used only as an oracle in tests/benchmarks.
pub fn filter_bilateral_reference<T: Real>(
    plane: &Plane<T>,
    spec: &KernelSpec<T>,
) -> Result<Plane<T>> {
    if spec.kind != FilterKind::Bilateral {
        return Err(Error::invalid(format!(
            "filter_bilateral_reference called with {} spec",
            spec.kind
        )));
    }
    spec.validate()?;
    let res = plane.res();
    let k = spec.size as i64;
    let radius = k / 2;
    let sigma_s = spec.spatial_sigma();
    let two = T::of(2.0);
    let mut out = plane.clone();
    for c in 0..plane.channels() {
        let sigma_r = resolve_sigma_r(plane, c, spec);
        for row in 0..res as i64 {
            for col in 0..res as i64 {
                let center = plane.get(row as usize, col as usize, c);
                let mut acc = T::zero();
                let mut wsum = T::zero();
                for dy in -radius..=radius {
                    for dx in -radius..=radius {
                        let n_row = row + dy;
                        let n_col = col + dx;
                        if n_row < 0 || n_row >= res as i64 || n_col < 0 || n_col >= res as i64 {
                            continue;
                        }
                        let v = plane.get(n_row as usize, n_col as usize, c);
                        let d2 = T::of((dx * dx + dy * dy) as f64);
                        let mut w = (-d2 / (two * sigma_s * sigma_s)).exp();
                        if let Some(sr) = sigma_r {
                            let dv = v - center;
                            w = w * (-(dv * dv) / (two * sr * sr)).exp();
                        }
                        acc += w * (v - center);
                        wsum += w;
                    }
                }
                out.set(row as usize, col as usize, c, center + acc / wsum);
            }
        }
    }
    Ok(out)
}

/// Fixed local-averaging low-pass: box-downsample by `factor`, then
/// texel-center-aligned bilinear upsample back to the original resolution.
pub fn filter_bilinear_resample<T: Real>(plane: &Plane<T>, factor: usize) -> Result<Plane<T>> {
    let res = plane.res();
    if factor < 2 {
        return Err(Error::invalid("bilinear downscale factor must be >= 2"));
    }
    if res % factor != 0 {
        return Err(Error::invalid(format!(
            "factor {factor} does not divide plane resolution {res}"
        )));
    }
    let coarse_res = res / factor;
    let channels = plane.channels();
    let inv_count = T::one() / T::of((factor * factor) as f64);
    let mut coarse = vec![T::zero(); coarse_res * coarse_res * channels];
    for cr in 0..coarse_res {
        for cc in 0..coarse_res {
            for c in 0..channels {
                // Average as anchor + mean deviation so a constant block
                // stays bit-exact (all deviations are exactly zero).
                let anchor = plane.get(cr * factor, cc * factor, c);
                let mut sum = T::zero();
                for dr in 0..factor {
                    for dc in 0..factor {
                        sum += plane.get(cr * factor + dr, cc * factor + dc, c) - anchor;
                    }
                }
                coarse[(cr * coarse_res + cc) * channels + c] = anchor + sum * inv_count;
            }
        }
    }

    let mut out = plane.clone();
    // Fine texel center (i + 0.5) / res expressed in coarse texel space.
    let coord = |i: usize| (i as f64 + 0.5) / factor as f64 - 0.5;
    let support = |i: usize| -> (usize, usize, T) {
        let x = coord(i);
        let floor = x.floor();
        if floor < 0.0 {
            (0, 0, T::zero())
        } else if floor >= (coarse_res - 1) as f64 {
            (coarse_res - 1, coarse_res - 1, T::zero())
        } else {
            (floor as usize, floor as usize + 1, T::of(x - floor))
        }
    };
    for row in 0..res {
        let (r0, r1, fr) = support(row);
        for col in 0..res {
            let (c0, c1, fc) = support(col);
            for c in 0..channels {
                let g = |rr: usize, cc: usize| coarse[(rr * coarse_res + cc) * channels + c];
                let top = lerp(g(r0, c0), g(r0, c1), fc);
                let bottom = lerp(g(r1, c0), g(r1, c1), fc);
                out.set(row, col, c, lerp(top, bottom, fr));
            }
        }
    }
    Ok(out)
}

#[inline]
fn lerp<T: Real>(a: T, b: T, t: T) -> T {
    a + t * (b - a)
}

/// Apply the selected filter to every channel of all three planes.
pub fn modulate_triplane<T: Real>(tp: &Triplane<T>, spec: &KernelSpec<T>) -> Result<Triplane<T>> {
    spec.validate()?;
    let mut planes = Vec::with_capacity(3);
    for plane in tp.planes() {
        let filtered = match spec.kind {
            FilterKind::Bilinear => filter_bilinear_resample(plane, spec.factor)?,
            FilterKind::Gaussian => filter_gaussian(plane, spec)?,
            FilterKind::Bilateral => filter_bilateral(plane, spec)?,
        };
        planes.push(filtered);
    }
    let planes: [Plane<T>; 3] = planes.try_into().expect("three planes");
    Triplane::from_planes(planes, tp.extent())
}

fn extract_channel<T: Real>(plane: &Plane<T>, c: usize, out: &mut [T]) {
    let channels = plane.channels();
    let data = plane.data();
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = data[i * channels + c];
    }
}

fn store_channel<T: Real>(plane: &mut Plane<T>, c: usize, values: &[T]) {
    let channels = plane.channels();
    let data = plane.data_mut();
    for (i, &v) in values.iter().enumerate() {
        data[i * channels + c] = v;
    }
}

fn store_channel_from<T: Real>(plane: &mut Plane<T>, c: usize, values: &[T]) {
    store_channel(plane, c, values)
}
