//! A single R x R feature plane with C channels.
//!
//! Storage is row-major, channel-minor: `data[(row * res + col) * channels + c]`.
//! Rows index the v axis, columns the u axis. Texel centers sit at
//! `(i + 0.5) / res` in [0, 1]; sampling outside clamps to the border texel.

use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Plane<T> {
    res: usize,
    channels: usize,
    data: Vec<T>,
}

/// Bilinear footprint of a (u, v) sample: two rows, two columns and the
/// four corner weights in (r0c0, r0c1, r1c0, r1c1) order.
#[derive(Debug, Clone, Copy)]
pub struct BilinearSupport<T> {
    pub rows: [usize; 2],
    pub cols: [usize; 2],
    pub weights: [T; 4],
}

impl<T: Real> Plane<T> {
    pub fn zeros(res: usize, channels: usize) -> Self {
        Plane {
            res,
            channels,
            data: vec![T::zero(); res * res * channels],
        }
    }

    pub fn from_fn(res: usize, channels: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut p = Plane::zeros(res, channels);
        for row in 0..res {
            for col in 0..res {
                for c in 0..channels {
                    p.data[(row * res + col) * channels + c] = f(row, col, c);
                }
            }
        }
        p
    }

    pub fn from_data(res: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != res * res * channels {
            return Err(Error::invalid(format!(
                "plane data length {} does not match {res}x{res}x{channels}",
                data.len()
            )));
        }
        Ok(Plane { res, channels, data })
    }

    #[inline]
    pub fn res(&self) -> usize {
        self.res
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.channels
    }

    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, c: usize) -> T {
        self.data[(row * self.res + col) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, c: usize, value: T) {
        self.data[(row * self.res + col) * self.channels + c] = value;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Bilinear footprint of a clamped (u, v) sample.
    #[inline]
    pub fn support(&self, u: T, v: T) -> BilinearSupport<T> {
        let (cols, wu) = axis_support(u, self.res);
        let (rows, wv) = axis_support(v, self.res);
        BilinearSupport {
            rows,
            cols,
            weights: [wv[0] * wu[0], wv[0] * wu[1], wv[1] * wu[0], wv[1] * wu[1]],
        }
    }

    /// Bilinear interpolation of the four texels surrounding (u, v),
    /// written into `out` (length `channels`).
    pub fn sample_into(&self, u: T, v: T, out: &mut [T]) -> Result<()> {
        if !u.is_finite() || !v.is_finite() {
            return Err(Error::NonFinite("plane sample coordinates".into()));
        }
        debug_assert_eq!(out.len(), self.channels);
        let s = self.support(u, v);
        let base = |row: usize, col: usize| (row * self.res + col) * self.channels;
        let b00 = base(s.rows[0], s.cols[0]);
        let b01 = base(s.rows[0], s.cols[1]);
        let b10 = base(s.rows[1], s.cols[0]);
        let b11 = base(s.rows[1], s.cols[1]);
        for c in 0..self.channels {
            out[c] = s.weights[0] * self.data[b00 + c]
                + s.weights[1] * self.data[b01 + c]
                + s.weights[2] * self.data[b10 + c]
                + s.weights[3] * self.data[b11 + c];
        }
        Ok(())
    }

    pub fn sample(&self, u: T, v: T) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.channels];
        self.sample_into(u, v, &mut out)?;
        Ok(out)
    }

    /// Mean over all texels and channels.
    pub fn mean(&self) -> T {
        let mut sum = T::zero();
        for &v in &self.data {
            sum += v;
        }
        sum / T::of(self.data.len() as f64)
    }

    /// Population standard deviation over all texels and channels.
    pub fn std(&self) -> T {
        let mean = self.mean();
        let mut sum = T::zero();
        for &v in &self.data {
            let d = v - mean;
            sum += d * d;
        }
        (sum / T::of(self.data.len() as f64)).sqrt()
    }

    /// Population standard deviation of a single channel.
    pub fn channel_std(&self, c: usize) -> T {
        let n = self.res * self.res;
        let mut sum = T::zero();
        for row in 0..self.res {
            for col in 0..self.res {
                sum += self.get(row, col, c);
            }
        }
        let mean = sum / T::of(n as f64);
        let mut var = T::zero();
        for row in 0..self.res {
            for col in 0..self.res {
                let d = self.get(row, col, c) - mean;
                var += d * d;
            }
        }
        (var / T::of(n as f64)).sqrt()
    }

    /// Mean squared 5-point Laplacian over interior texels, averaged over
    /// channels. Used as the high-frequency energy statistic.
    pub fn laplacian_energy(&self) -> T {
        if self.res < 3 {
            return T::zero();
        }
        let mut sum = T::zero();
        let four = T::of(4.0);
        for row in 1..self.res - 1 {
            for col in 1..self.res - 1 {
                for c in 0..self.channels {
                    let lap = four * self.get(row, col, c)
                        - self.get(row - 1, col, c)
                        - self.get(row + 1, col, c)
                        - self.get(row, col - 1, c)
                        - self.get(row, col + 1, c);
                    sum += lap * lap;
                }
            }
        }
        let count = (self.res - 2) * (self.res - 2) * self.channels;
        sum / T::of(count as f64)
    }
}

/// Texel-center sample support along one axis: the two texel indices and
/// their interpolation weights for coordinate `t` in [0, 1] (clamped).
#[inline]
fn axis_support<T: Real>(t: T, res: usize) -> ([usize; 2], [T; 2]) {
    let x = t * T::of(res as f64) - T::of(0.5);
    let floor = x.floor();
    let frac = x - floor;
    let i = floor.as_f64();
    let last = (res - 1) as f64;
    if i < 0.0 {
        ([0, 0], [T::one(), T::zero()])
    } else if i >= last {
        ([res - 1, res - 1], [T::one(), T::zero()])
    } else {
        let i = i as usize;
        ([i, i + 1], [T::one() - frac, frac])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_plane_samples_zero() {
        let p: Plane<f64> = Plane::zeros(8, 3);
        for &(u, v) in &[(0.0, 0.0), (0.5, 0.5), (1.0, 1.0), (-0.3, 1.7)] {
            assert_eq!(p.sample(u, v).unwrap(), vec![0.0; 3]);
        }
    }

    #[test]
    fn constant_plane_interpolates_to_constant() {
        let p: Plane<f64> = Plane::from_fn(5, 2, |_, _, c| if c == 0 { 2.5 } else { -1.0 });
        for &(u, v) in &[(0.1, 0.9), (0.5, 0.5), (0.0, 1.0), (2.0, -2.0)] {
            let s = p.sample(u, v).unwrap();
            assert!((s[0] - 2.5).abs() < 1e-12);
            assert!((s[1] + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn center_of_two_by_two() {
        // texels [[0,1],[2,3]] row-major, row = v
        let p: Plane<f64> = Plane::from_data(2, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        let s = p.sample(0.5, 0.5).unwrap();
        assert!((s[0] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn clamps_to_border_texel() {
        let p: Plane<f64> = Plane::from_data(2, 1, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        // Far outside: border texel values.
        assert_eq!(p.sample(-5.0, -5.0).unwrap()[0], 0.0);
        assert_eq!(p.sample(5.0, -5.0).unwrap()[0], 1.0);
        assert_eq!(p.sample(-5.0, 5.0).unwrap()[0], 2.0);
        assert_eq!(p.sample(5.0, 5.0).unwrap()[0], 3.0);
    }

    #[test]
    fn nan_coordinate_is_an_error() {
        let p: Plane<f64> = Plane::zeros(4, 1);
        assert!(p.sample(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn texel_center_hits_exact_value() {
        let p: Plane<f64> = Plane::from_fn(4, 1, |row, col, _| (row * 4 + col) as f64);
        for row in 0..4 {
            for col in 0..4 {
                let u = (col as f64 + 0.5) / 4.0;
                let v = (row as f64 + 0.5) / 4.0;
                let s = p.sample(u, v).unwrap();
                assert!((s[0] - (row * 4 + col) as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn laplacian_energy_of_constant_is_zero() {
        let p: Plane<f64> = Plane::from_fn(8, 2, |_, _, _| 3.0);
        assert_eq!(p.laplacian_energy(), 0.0);
    }
}
