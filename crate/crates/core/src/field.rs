//! Triplane field representation and its decoder.
//!
//! A point's feature vector is the sum of three bilinear plane samples
//! (XY, XZ, YZ projections); a small decoder maps the summed features to a
//! signed distance and an RGB color.

use crate::error::{Error, Result};
use crate::plane::Plane;
use crate::real::Real;
use crate::rng::Rng;

/// Plane order is fixed: XY, XZ, YZ.
pub const PLANE_XY: usize = 0;
pub const PLANE_XZ: usize = 1;
pub const PLANE_YZ: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriplaneConfig {
    pub resolution: usize,
    pub channels: usize,
    pub hidden: usize,
    pub extent: f64,
}

impl Default for TriplaneConfig {
    fn default() -> Self {
        TriplaneConfig {
            resolution: 128,
            channels: 8,
            hidden: 16,
            extent: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Triplane<T> {
    extent: T,
    planes: [Plane<T>; 3],
}

impl<T: Real> Triplane<T> {
    pub fn zeros(resolution: usize, channels: usize, extent: T) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::invalid("triplane resolution must be >= 2"));
        }
        if channels < 1 {
            return Err(Error::invalid("triplane must have at least one channel"));
        }
        if !(extent > T::zero()) {
            return Err(Error::invalid("triplane extent must be positive"));
        }
        Ok(Triplane {
            extent,
            planes: [
                Plane::zeros(resolution, channels),
                Plane::zeros(resolution, channels),
                Plane::zeros(resolution, channels),
            ],
        })
    }

    pub fn from_planes(planes: [Plane<T>; 3], extent: T) -> Result<Self> {
        let res = planes[0].res();
        let ch = planes[0].channels();
        if res < 2 || ch < 1 {
            return Err(Error::invalid("triplane needs R >= 2 and C >= 1"));
        }
        for p in &planes {
            if p.res() != res || p.channels() != ch {
                return Err(Error::invalid("all three planes must share R and C"));
            }
            if !p.is_finite() {
                return Err(Error::NonFinite("triplane features".into()));
            }
        }
        Ok(Triplane { extent, planes })
    }

    #[inline]
    pub fn resolution(&self) -> usize {
        self.planes[0].res()
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.planes[0].channels()
    }

    #[inline]
    pub fn extent(&self) -> T {
        self.extent
    }

    #[inline]
    pub fn plane(&self, idx: usize) -> &Plane<T> {
        &self.planes[idx]
    }

    #[inline]
    pub fn plane_mut(&mut self, idx: usize) -> &mut Plane<T> {
        &mut self.planes[idx]
    }

    pub fn planes(&self) -> &[Plane<T>; 3] {
        &self.planes
    }

    /// Map a cube coordinate to [0, 1] plane space.
    #[inline]
    pub fn to_unit(&self, x: T) -> T {
        (x / self.extent + T::one()) * T::of(0.5)
    }

    /// Per-plane (u, v) projections of a point: XY -> (x', y'),
    /// XZ -> (x', z'), YZ -> (y', z').
    #[inline]
    pub fn projections(&self, p: [T; 3]) -> [(T, T); 3] {
        let u = [self.to_unit(p[0]), self.to_unit(p[1]), self.to_unit(p[2])];
        [(u[0], u[1]), (u[0], u[2]), (u[1], u[2])]
    }

    /// Summed bilinear features of the three plane projections.
    pub fn eval_features_into(&self, p: [T; 3], out: &mut [T], scratch: &mut [T]) -> Result<()> {
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("triplane query point".into()));
        }
        debug_assert_eq!(out.len(), self.channels());
        debug_assert_eq!(scratch.len(), self.channels());
        out.fill(T::zero());
        for (plane, (u, v)) in self.planes.iter().zip(self.projections(p)) {
            plane.sample_into(u, v, scratch)?;
            for (o, s) in out.iter_mut().zip(scratch.iter()) {
                *o += *s;
            }
        }
        Ok(())
    }

    pub fn eval_features(&self, p: [T; 3]) -> Result<Vec<T>> {
        let mut out = vec![T::zero(); self.channels()];
        let mut scratch = vec![T::zero(); self.channels()];
        self.eval_features_into(p, &mut out, &mut scratch)?;
        Ok(out)
    }
}

/// Affine (optionally one-hidden-layer tanh) decoder with an SDF head and a
/// sigmoid-squashed color head.
///
/// With `hidden > 0` the heads read the tanh activations, otherwise they
/// read the raw features. Weight layouts are row-major:
/// `w_hidden[h * channels + c]`, `w_color[rgb * width + i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecoder<T> {
    pub channels: usize,
    pub hidden: usize,
    pub w_hidden: Vec<T>,
    pub b_hidden: Vec<T>,
    pub w_sdf: Vec<T>,
    pub b_sdf: T,
    pub w_color: Vec<T>,
    pub b_color: [T; 3],
}

impl<T: Real> FieldDecoder<T> {
    /// Head input width: hidden width if a hidden layer exists, else C.
    #[inline]
    pub fn width(&self) -> usize {
        if self.hidden > 0 {
            self.hidden
        } else {
            self.channels
        }
    }

    pub fn zeros(channels: usize, hidden: usize) -> Self {
        let width = if hidden > 0 { hidden } else { channels };
        FieldDecoder {
            channels,
            hidden,
            w_hidden: vec![T::zero(); hidden * channels],
            b_hidden: vec![T::zero(); hidden],
            w_sdf: vec![T::zero(); width],
            b_sdf: T::zero(),
            w_color: vec![T::zero(); 3 * width],
            b_color: [T::zero(); 3],
        }
    }

    /// First-layer weight gain. Plane features settle near 0.1 magnitude,
    /// so a large gain is needed to push the tanh pre-activations toward 1;
    /// with a conventional small init the hidden layer stays in its linear
    /// range and the field degrades to a sum of three 2D functions.
    pub const HIDDEN_GAIN: f64 = 16.0;

    /// Spread of the hidden bias initialization, which staggers the tanh
    /// transition regions across units.
    pub const HIDDEN_BIAS_SPREAD: f64 = 0.5;

    /// Random initialization, deterministic in the seed.
    pub fn init_random(channels: usize, hidden: usize, rng: &mut Rng) -> Self {
        let mut dec = FieldDecoder::zeros(channels, hidden);
        let a_in = T::of(Self::HIDDEN_GAIN / (channels as f64).sqrt());
        for w in dec.w_hidden.iter_mut() {
            *w = rng.range(-a_in, a_in);
        }
        let spread = T::of(Self::HIDDEN_BIAS_SPREAD);
        for b in dec.b_hidden.iter_mut() {
            *b = rng.range(-spread, spread);
        }
        let a_head = T::of(1.0 / (dec.width() as f64).sqrt());
        for w in dec.w_sdf.iter_mut() {
            *w = rng.range(-a_head, a_head);
        }
        for w in dec.w_color.iter_mut() {
            *w = rng.range(-a_head, a_head);
        }
        dec
    }

    pub fn validate(&self) -> Result<()> {
        let width = self.width();
        let ok = self.w_hidden.len() == self.hidden * self.channels
            && self.b_hidden.len() == self.hidden
            && self.w_sdf.len() == width
            && self.w_color.len() == 3 * width;
        if !ok {
            return Err(Error::invalid("decoder parameter shapes are inconsistent"));
        }
        let all = self
            .w_hidden
            .iter()
            .chain(self.b_hidden.iter())
            .chain(self.w_sdf.iter())
            .chain(self.w_color.iter())
            .chain(self.b_color.iter())
            .chain(std::iter::once(&self.b_sdf));
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("decoder parameters".into()));
        }
        Ok(())
    }

    /// Head inputs: tanh hidden activations, or the features themselves.
    pub fn head_input_into(&self, features: &[T], out: &mut [T]) {
        debug_assert_eq!(features.len(), self.channels);
        debug_assert_eq!(out.len(), self.width());
        if self.hidden == 0 {
            out.copy_from_slice(features);
            return;
        }
        for h in 0..self.hidden {
            let mut z = self.b_hidden[h];
            let row = &self.w_hidden[h * self.channels..(h + 1) * self.channels];
            for (w, f) in row.iter().zip(features.iter()) {
                z += *w * *f;
            }
            out[h] = z.tanh();
        }
    }

    pub fn decode_sdf(&self, features: &[T]) -> T {
        let mut head = vec![T::zero(); self.width()];
        self.head_input_into(features, &mut head);
        self.sdf_from_head(&head)
    }

    #[inline]
    pub fn sdf_from_head(&self, head: &[T]) -> T {
        let mut out = self.b_sdf;
        for (w, h) in self.w_sdf.iter().zip(head.iter()) {
            out += *w * *h;
        }
        out
    }

    pub fn decode_color(&self, features: &[T]) -> [T; 3] {
        let mut head = vec![T::zero(); self.width()];
        self.head_input_into(features, &mut head);
        self.color_from_head(&head)
    }

    #[inline]
    pub fn color_from_head(&self, head: &[T]) -> [T; 3] {
        let mut rgb = [T::zero(); 3];
        let width = self.width();
        for k in 0..3 {
            let mut z = self.b_color[k];
            let row = &self.w_color[k * width..(k + 1) * width];
            for (w, h) in row.iter().zip(head.iter()) {
                z += *w * *h;
            }
            rgb[k] = sigmoid(z);
        }
        rgb
    }
}

#[inline]
pub fn sigmoid<T: Real>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

/// Dense n x n x n scalar samples of a field over [-extent, extent]^3,
/// lattice including the endpoints. Index order: x fastest, then y, then z.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid<T> {
    pub n: usize,
    pub extent: T,
    pub data: Vec<T>,
}

impl<T: Real> ScalarGrid<T> {
    #[inline]
    pub fn value(&self, i: usize, j: usize, k: usize) -> T {
        self.data[(k * self.n + j) * self.n + i]
    }

    /// Lattice coordinate of index i along one axis.
    #[inline]
    pub fn coord(&self, i: usize) -> T {
        let t = T::of(i as f64 / (self.n - 1) as f64);
        -self.extent + (self.extent + self.extent) * t
    }

    #[inline]
    pub fn pos(&self, i: usize, j: usize, k: usize) -> [T; 3] {
        [self.coord(i), self.coord(j), self.coord(k)]
    }
}

/// Decoded SDF over the regular lattice. Slabs along z may be evaluated on
/// separate threads; output is bit-identical for any thread count.
pub fn eval_sdf_grid<T: Real>(
    tp: &Triplane<T>,
    dec: &FieldDecoder<T>,
    n: usize,
    threads: usize,
) -> Result<ScalarGrid<T>> {
    if n < 2 {
        return Err(Error::invalid("grid resolution must be >= 2"));
    }
    dec.validate()?;
    let mut data = vec![T::zero(); n * n * n];
    let extent = tp.extent();

    let eval_slab = |k_range: std::ops::Range<usize>, out: &mut [T]| -> Result<()> {
        let channels = tp.channels();
        let mut feats = vec![T::zero(); channels];
        let mut scratch = vec![T::zero(); channels];
        let mut head = vec![T::zero(); dec.width()];
        let coord = |i: usize| {
            let t = T::of(i as f64 / (n - 1) as f64);
            -extent + (extent + extent) * t
        };
        let mut idx = 0usize;
        for k in k_range {
            for j in 0..n {
                for i in 0..n {
                    let p = [coord(i), coord(j), coord(k)];
                    tp.eval_features_into(p, &mut feats, &mut scratch)?;
                    dec.head_input_into(&feats, &mut head);
                    out[idx] = dec.sdf_from_head(&head);
                    idx += 1;
                }
            }
        }
        Ok(())
    };

    let threads = threads.max(1).min(n);
    if threads == 1 {
        eval_slab(0..n, &mut data)?;
    } else {
        let slab = n.div_ceil(threads);
        let chunks: Vec<(std::ops::Range<usize>, &mut [T])> = {
            let mut rest = data.as_mut_slice();
            let mut out = Vec::new();
            let mut k0 = 0usize;
            while k0 < n {
                let k1 = (k0 + slab).min(n);
                let (head, tail) = rest.split_at_mut((k1 - k0) * n * n);
                out.push((k0..k1, head));
                rest = tail;
                k0 = k1;
            }
            out
        };
        std::thread::scope(|scope| -> Result<()> {
            let mut handles = Vec::new();
            for (range, out) in chunks {
                handles.push(scope.spawn(move || eval_slab(range, out)));
            }
            for h in handles {
                h.join().expect("grid evaluation thread panicked")?;
            }
            Ok(())
        })?;
    }

    Ok(ScalarGrid { n, extent, data })
}
