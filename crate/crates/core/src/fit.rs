//! Fits a triplane + decoder pair to an analytic shape by minibatch
//! gradient descent with analytic gradients. Plain fixed-step descent keeps
//! runs exactly reproducible for a given seed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{sigmoid, FieldDecoder, Triplane, TriplaneConfig};
use crate::real::Real;
use crate::rng::Rng;
use crate::shape::Shape;

/// Half-width of the near-surface sampling band.
pub const SURFACE_BAND: f64 = 0.05;

/// Fraction of the iteration budget over which the reported parameters are
/// averaged (tail averaging). Fixed-step minibatch descent leaves texel
/// scale gradient noise in the planes comparable to the feature signal;
/// averaging the tail of the trajectory removes it by ~sqrt(window) while
/// the update rule stays plain fixed-step descent.
pub const TAIL_AVERAGE_FRACTION: f64 = 0.2;

/// Fixed ratio between the decoder and plane step sizes.
///
/// A batch touches every decoder weight but only a handful of the R*R
/// texels, so under a shared step the planes train orders of magnitude
/// slower than the decoder. This constant rebalances the two groups; it is
/// a fixed diagonal scaling, not an adaptive optimizer.
pub const DECODER_STEP_SCALE: f64 = 1.0 / 1024.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub iterations: usize,
    pub step: f64,
    pub batch: usize,
    /// Fraction of batch samples drawn near the surface (|sdf| < band).
    pub surface_band_fraction: f64,
    /// Ridge coefficient on the plane texels, applied as shrinkage in the
    /// update. A triplane is heavily over-parameterized per field value, so
    /// minibatch descent accumulates a random walk in the per-texel null
    /// space; the decay pulls it to the minimal-norm representation without
    /// touching what the field decodes to.
    #[serde(default = "default_plane_decay")]
    pub plane_decay: f64,
    pub seed: u64,
}

fn default_plane_decay() -> f64 {
    FitConfig::default().plane_decay
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            iterations: 12_000,
            step: 25.0,
            batch: 1024,
            surface_band_fraction: 0.6,
            plane_decay: 1.0e-5,
            seed: 7,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations < 1 {
            return Err(Error::invalid("fit iterations must be >= 1"));
        }
        if !(self.step > 0.0) {
            return Err(Error::invalid("fit step size must be positive"));
        }
        if self.batch < 1 {
            return Err(Error::invalid("fit batch size must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.surface_band_fraction) {
            return Err(Error::invalid("surface band fraction must be in [0, 1]"));
        }
        if !(self.plane_decay >= 0.0) || self.step * self.plane_decay >= 1.0 {
            return Err(Error::invalid("plane decay must be >= 0 and step * decay < 1"));
        }
        Ok(())
    }
}

/// One supervision point; `color` is present for near-surface samples only.
#[derive(Debug, Clone, Copy)]
pub struct FitSample<T> {
    pub p: [T; 3],
    pub sdf: T,
    pub color: Option<[T; 3]>,
}

/// Gradient accumulator matching a triplane + decoder parameter set.
#[derive(Debug, Clone)]
pub struct GradBuffer<T> {
    pub planes: [Vec<T>; 3],
    pub w_hidden: Vec<T>,
    pub b_hidden: Vec<T>,
    pub w_sdf: Vec<T>,
    pub b_sdf: T,
    pub w_color: Vec<T>,
    pub b_color: [T; 3],
}

impl<T: Real> GradBuffer<T> {
    pub fn zeros_like(tp: &Triplane<T>, dec: &FieldDecoder<T>) -> Self {
        let plane_len = tp.plane(0).data().len();
        GradBuffer {
            planes: [
                vec![T::zero(); plane_len],
                vec![T::zero(); plane_len],
                vec![T::zero(); plane_len],
            ],
            w_hidden: vec![T::zero(); dec.w_hidden.len()],
            b_hidden: vec![T::zero(); dec.b_hidden.len()],
            w_sdf: vec![T::zero(); dec.w_sdf.len()],
            b_sdf: T::zero(),
            w_color: vec![T::zero(); dec.w_color.len()],
            b_color: [T::zero(); 3],
        }
    }

    pub fn clear(&mut self) {
        for p in &mut self.planes {
            p.fill(T::zero());
        }
        self.w_hidden.fill(T::zero());
        self.b_hidden.fill(T::zero());
        self.w_sdf.fill(T::zero());
        self.b_sdf = T::zero();
        self.w_color.fill(T::zero());
        self.b_color = [T::zero(); 3];
    }
}

/// Relative weight of the color MSE term against the SDF MSE term.
pub const COLOR_LOSS_WEIGHT: f64 = 0.25;

/// Loss over a sample set and its analytic gradient with respect to every
/// plane texel and decoder parameter. Pure function of its inputs.
pub fn fit_loss_grad<T: Real>(
    tp: &Triplane<T>,
    dec: &FieldDecoder<T>,
    samples: &[FitSample<T>],
    grads: &mut GradBuffer<T>,
) -> T {
    grads.clear();
    let channels = tp.channels();
    let width = dec.width();
    let n_total = samples.len().max(1);
    let n_color = samples.iter().filter(|s| s.color.is_some()).count().max(1);
    let sdf_scale = T::of(1.0 / n_total as f64);
    let color_scale = T::of(COLOR_LOSS_WEIGHT / n_color as f64);
    let two = T::of(2.0);

    let mut feats = vec![T::zero(); channels];
    let mut head = vec![T::zero(); width];
    let mut d_head = vec![T::zero(); width];
    let mut d_feats = vec![T::zero(); channels];
    let mut loss = T::zero();

    for sample in samples {
        // Forward pass, keeping the bilinear supports for the backward pass.
        let projections = tp.projections(sample.p);
        let supports = [
            tp.plane(0).support(projections[0].0, projections[0].1),
            tp.plane(1).support(projections[1].0, projections[1].1),
            tp.plane(2).support(projections[2].0, projections[2].1),
        ];
        feats.fill(T::zero());
        for (plane_idx, support) in supports.iter().enumerate() {
            let plane = tp.plane(plane_idx);
            let res = plane.res();
            let data = plane.data();
            let corners = [
                (support.rows[0], support.cols[0], support.weights[0]),
                (support.rows[0], support.cols[1], support.weights[1]),
                (support.rows[1], support.cols[0], support.weights[2]),
                (support.rows[1], support.cols[1], support.weights[3]),
            ];
            for (row, col, w) in corners {
                let base = (row * res + col) * channels;
                for c in 0..channels {
                    feats[c] += w * data[base + c];
                }
            }
        }
        dec.head_input_into(&feats, &mut head);
        let sdf = dec.sdf_from_head(&head);

        let residual = sdf - sample.sdf;
        loss += sdf_scale * residual * residual;
        let d_sdf = two * sdf_scale * residual;

        grads.b_sdf += d_sdf;
        for h in 0..width {
            grads.w_sdf[h] += d_sdf * head[h];
            d_head[h] = d_sdf * dec.w_sdf[h];
        }

        if let Some(target) = sample.color {
            let rgb = dec.color_from_head(&head);
            for k in 0..3 {
                let diff = rgb[k] - target[k];
                loss += color_scale * diff * diff;
                // d(sigmoid)/dz = y (1 - y)
                let dz = two * color_scale * diff * rgb[k] * (T::one() - rgb[k]);
                grads.b_color[k] += dz;
                for h in 0..width {
                    grads.w_color[k * width + h] += dz * head[h];
                    d_head[h] += dz * dec.w_color[k * width + h];
                }
            }
        }

        if dec.hidden > 0 {
            d_feats.fill(T::zero());
            for h in 0..dec.hidden {
                let dz = d_head[h] * (T::one() - head[h] * head[h]);
                grads.b_hidden[h] += dz;
                let row = h * channels;
                for c in 0..channels {
                    grads.w_hidden[row + c] += dz * feats[c];
                    d_feats[c] += dz * dec.w_hidden[row + c];
                }
            }
        } else {
            d_feats.copy_from_slice(&d_head);
        }

        for (plane_idx, support) in supports.iter().enumerate() {
            let res = tp.plane(plane_idx).res();
            let grad_plane = &mut grads.planes[plane_idx];
            let corners = [
                (support.rows[0], support.cols[0], support.weights[0]),
                (support.rows[0], support.cols[1], support.weights[1]),
                (support.rows[1], support.cols[0], support.weights[2]),
                (support.rows[1], support.cols[1], support.weights[3]),
            ];
            for (row, col, w) in corners {
                let base = (row * res + col) * channels;
                for c in 0..channels {
                    grad_plane[base + c] += w * d_feats[c];
                }
            }
        }
    }
    loss
}

/// Draw one training batch: a near-surface/uniform mixture per the
/// configured band fraction. Near-surface samples carry color targets.
pub fn draw_batch<T: Real>(
    shape: &Shape<T>,
    extent: T,
    cfg: &FitConfig,
    rng: &mut Rng,
    out: &mut Vec<FitSample<T>>,
) {
    out.clear();
    let n_surface = (cfg.batch as f64 * cfg.surface_band_fraction).round() as usize;
    let band = T::of(SURFACE_BAND);
    for i in 0..cfg.batch {
        if i < n_surface {
            // Rejection sampling for |sdf| < band, with a capped retry count.
            let mut chosen = None;
            for _ in 0..200 {
                let p = rng.point_in_cube(extent);
                let d = shape.sdf(p);
                if d.abs() < band {
                    chosen = Some((p, d));
                    break;
                }
            }
            if let Some((p, d)) = chosen {
                out.push(FitSample {
                    p,
                    sdf: d,
                    color: Some(shape.color(p)),
                });
                continue;
            }
        }
        let p = rng.point_in_cube(extent);
        out.push(FitSample {
            p,
            sdf: shape.sdf(p),
            color: None,
        });
    }
}

#[derive(Debug, Clone)]
pub struct FitResult<T> {
    pub triplane: Triplane<T>,
    pub decoder: FieldDecoder<T>,
    /// RMSE of the decoded SDF over fresh uniform samples (see `sdf_fit_error`).
    pub rmse: T,
    pub final_loss: T,
    pub iterations: usize,
}

/// Number of fresh uniform samples used for the reported fit RMSE.
pub const FIT_EVAL_SAMPLES: usize = 20_000;

pub fn fit_triplane<T: Real>(
    shape: &Shape<T>,
    cfg: &FitConfig,
    tp_cfg: &TriplaneConfig,
) -> Result<FitResult<T>> {
    cfg.validate()?;
    shape.validate()?;
    let extent = T::of(tp_cfg.extent);
    let mut tp = Triplane::zeros(tp_cfg.resolution, tp_cfg.channels, extent)?;

    let mut rng = Rng::derive(cfg.seed, 0x66697400);
    // Small random plane init breaks the zero-feature symmetry.
    let init_scale = T::of(0.01);
    for idx in 0..3 {
        for v in tp.plane_mut(idx).data_mut() {
            *v = rng.range(-init_scale, init_scale);
        }
    }
    let mut dec = FieldDecoder::init_random(tp_cfg.channels, tp_cfg.hidden, &mut rng);

    let mut grads = GradBuffer::zeros_like(&tp, &dec);
    let mut batch = Vec::with_capacity(cfg.batch);
    let step = T::of(cfg.step);
    let shrink = T::of(1.0 - cfg.step * cfg.plane_decay);
    let mut loss = T::zero();

    let window = ((cfg.iterations as f64 * TAIL_AVERAGE_FRACTION).round() as usize)
        .clamp(1, cfg.iterations);
    let tail_start = cfg.iterations - window;
    let mut tp_sum = Triplane::zeros(tp_cfg.resolution, tp_cfg.channels, extent)?;
    let mut dec_sum = FieldDecoder::zeros(tp_cfg.channels, tp_cfg.hidden);

    for iteration in 0..cfg.iterations {
        draw_batch(shape, extent, cfg, &mut rng, &mut batch);
        loss = fit_loss_grad(&tp, &dec, &batch, &mut grads);
        if !loss.is_finite() {
            return Err(Error::FitDiverged { iteration });
        }
        for idx in 0..3 {
            let data = tp.plane_mut(idx).data_mut();
            for (v, g) in data.iter_mut().zip(&grads.planes[idx]) {
                *v = *v * shrink - step * *g;
            }
        }
        apply_decoder_step(&mut dec, &grads, step * T::of(DECODER_STEP_SCALE));
        if iteration >= tail_start {
            accumulate(&mut tp_sum, &mut dec_sum, &tp, &dec);
        }
    }

    let inv = T::of(1.0 / window as f64);
    scale_params(&mut tp_sum, &mut dec_sum, inv);
    let (mut tp, mut dec) = (tp_sum, dec_sum);
    balance_channels(&mut tp, &mut dec);

    let rmse = sdf_fit_error(&tp, &dec, shape, FIT_EVAL_SAMPLES, cfg.seed ^ 0x6576616c)?;
    Ok(FitResult {
        triplane: tp,
        decoder: dec,
        rmse,
        final_loss: loss,
        iterations: cfg.iterations,
    })
}

/// Normalize the fitted planes to zero-mean, equal-std channels.
///
/// The decoder is linear in the features, so shifting a channel can be
/// absorbed into the first-layer biases and scaling it into the weights
/// that read it; the decoded field is unchanged. Without this the channel
/// scales that fall out of training span an order of magnitude, which
/// skews every per-channel statistic computed on the planes downstream.
fn balance_channels<T: Real>(tp: &mut Triplane<T>, dec: &mut FieldDecoder<T>) {
    let channels = dec.channels;
    let texels = {
        let res = tp.plane(0).res();
        res * res
    };
    let inv_texels = T::of(1.0 / texels as f64);

    // Center each plane channel; the feature shift is the sum over planes.
    let mut shift = vec![T::zero(); channels];
    for idx in 0..3 {
        let mut mean = vec![T::zero(); channels];
        for texel in tp.plane(idx).data().chunks_exact(channels) {
            for (m, v) in mean.iter_mut().zip(texel) {
                *m += *v;
            }
        }
        for m in mean.iter_mut() {
            *m = *m * inv_texels;
        }
        for texel in tp.plane_mut(idx).data_mut().chunks_exact_mut(channels) {
            for (v, m) in texel.iter_mut().zip(&mean) {
                *v -= *m;
            }
        }
        for (s, m) in shift.iter_mut().zip(&mean) {
            *s += *m;
        }
    }
    let absorb = |weights: &[T], bias: &mut T| {
        for (w, s) in weights.iter().zip(&shift) {
            *bias += *w * *s;
        }
    };
    if dec.hidden > 0 {
        for (row, bias) in dec.w_hidden.chunks_exact(channels).zip(&mut dec.b_hidden) {
            absorb(row, bias);
        }
    } else {
        absorb(&dec.w_sdf, &mut dec.b_sdf);
        for k in 0..3 {
            absorb(&dec.w_color[k * channels..(k + 1) * channels], &mut dec.b_color[k]);
        }
    }

    // Pooled per-channel std over the three centered planes.
    let mut var = vec![T::zero(); channels];
    for idx in 0..3 {
        for texel in tp.plane(idx).data().chunks_exact(channels) {
            for (s, v) in var.iter_mut().zip(texel) {
                *s += *v * *v;
            }
        }
    }
    let inv_count = T::of(1.0 / (3 * texels) as f64);
    let std: Vec<T> = var.iter().map(|v| (*v * inv_count).sqrt()).collect();
    let mut target = T::zero();
    for s in &std {
        target += *s;
    }
    target = target / T::of(channels as f64);
    if !(target > T::zero()) {
        return;
    }
    let scale: Vec<T> = std
        .iter()
        .map(|s| if *s > T::zero() { target / *s } else { T::one() })
        .collect();
    for idx in 0..3 {
        for texel in tp.plane_mut(idx).data_mut().chunks_exact_mut(channels) {
            for (v, s) in texel.iter_mut().zip(&scale) {
                *v = *v * *s;
            }
        }
    }
    let unscale = |weights: &mut [T]| {
        for (w, s) in weights.iter_mut().zip(&scale) {
            *w = *w / *s;
        }
    };
    if dec.hidden > 0 {
        for row in dec.w_hidden.chunks_exact_mut(channels) {
            unscale(row);
        }
    } else {
        unscale(&mut dec.w_sdf);
        for row in dec.w_color.chunks_exact_mut(channels) {
            unscale(row);
        }
    }
}

fn accumulate<T: Real>(
    tp_sum: &mut Triplane<T>,
    dec_sum: &mut FieldDecoder<T>,
    tp: &Triplane<T>,
    dec: &FieldDecoder<T>,
) {
    for idx in 0..3 {
        let sum = tp_sum.plane_mut(idx).data_mut();
        for (s, v) in sum.iter_mut().zip(tp.plane(idx).data()) {
            *s += *v;
        }
    }
    let add = |sum: &mut [T], v: &[T]| {
        for (s, v) in sum.iter_mut().zip(v) {
            *s += *v;
        }
    };
    add(&mut dec_sum.w_hidden, &dec.w_hidden);
    add(&mut dec_sum.b_hidden, &dec.b_hidden);
    add(&mut dec_sum.w_sdf, &dec.w_sdf);
    dec_sum.b_sdf += dec.b_sdf;
    add(&mut dec_sum.w_color, &dec.w_color);
    for k in 0..3 {
        dec_sum.b_color[k] += dec.b_color[k];
    }
}

fn scale_params<T: Real>(tp: &mut Triplane<T>, dec: &mut FieldDecoder<T>, factor: T) {
    for idx in 0..3 {
        for v in tp.plane_mut(idx).data_mut() {
            *v = *v * factor;
        }
    }
    let mul = |vals: &mut [T]| {
        for v in vals.iter_mut() {
            *v = *v * factor;
        }
    };
    mul(&mut dec.w_hidden);
    mul(&mut dec.b_hidden);
    mul(&mut dec.w_sdf);
    dec.b_sdf = dec.b_sdf * factor;
    mul(&mut dec.w_color);
    for k in 0..3 {
        dec.b_color[k] = dec.b_color[k] * factor;
    }
}

fn apply_decoder_step<T: Real>(dec: &mut FieldDecoder<T>, grads: &GradBuffer<T>, step: T) {
    for (v, g) in dec.w_hidden.iter_mut().zip(&grads.w_hidden) {
        *v -= step * *g;
    }
    for (v, g) in dec.b_hidden.iter_mut().zip(&grads.b_hidden) {
        *v -= step * *g;
    }
    for (v, g) in dec.w_sdf.iter_mut().zip(&grads.w_sdf) {
        *v -= step * *g;
    }
    dec.b_sdf -= step * grads.b_sdf;
    for (v, g) in dec.w_color.iter_mut().zip(&grads.w_color) {
        *v -= step * *g;
    }
    for k in 0..3 {
        dec.b_color[k] -= step * grads.b_color[k];
    }
}

/// Root-mean-square SDF error over `n` seeded uniform samples in the cube.
pub fn sdf_fit_error<T: Real>(
    tp: &Triplane<T>,
    dec: &FieldDecoder<T>,
    shape: &Shape<T>,
    n: usize,
    seed: u64,
) -> Result<T> {
    if n < 1 {
        return Err(Error::invalid("sample count must be >= 1"));
    }
    let mut rng = Rng::derive(seed, 0x72657365);
    let channels = tp.channels();
    let mut feats = vec![T::zero(); channels];
    let mut scratch = vec![T::zero(); channels];
    let mut head = vec![T::zero(); dec.width()];
    let mut sum = T::zero();
    for _ in 0..n {
        let p = rng.point_in_cube(tp.extent());
        tp.eval_features_into(p, &mut feats, &mut scratch)?;
        dec.head_input_into(&feats, &mut head);
        let d = dec.sdf_from_head(&head) - shape.sdf(p);
        sum += d * d;
    }
    Ok((sum / T::of(n as f64)).sqrt())
}

/// Reference for the color squashing used in tests.
pub fn squash<T: Real>(z: T) -> T {
    sigmoid(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane::Plane;

    fn small_instance(seed: u64) -> (Triplane<f64>, FieldDecoder<f64>, Shape<f64>) {
        let mut rng = Rng::new(seed);
        let planes = [
            Plane::from_fn(8, 2, |_, _, _| rng.range(-0.3, 0.3)),
            Plane::from_fn(8, 2, |_, _, _| rng.range(-0.3, 0.3)),
            Plane::from_fn(8, 2, |_, _, _| rng.range(-0.3, 0.3)),
        ];
        let tp = Triplane::from_planes(planes, 0.5).unwrap();
        let dec = FieldDecoder::init_random(2, 3, &mut rng);
        let shape = Shape::Sphere {
            center: [0.0; 3],
            radius: 0.3,
            color: [0.8, 0.2, 0.2],
        };
        (tp, dec, shape)
    }

    fn sample_set(shape: &Shape<f64>, n: usize, seed: u64) -> Vec<FitSample<f64>> {
        let mut rng = Rng::new(seed);
        (0..n)
            .map(|i| {
                let p = rng.point_in_cube(0.5);
                FitSample {
                    p,
                    sdf: shape.sdf(p),
                    color: if i % 2 == 0 { Some(shape.color(p)) } else { None },
                }
            })
            .collect()
    }

    /// Central finite differences over every parameter group.
    #[test]
    fn analytic_gradients_match_finite_differences() {
        let (tp, dec, shape) = small_instance(4);
        let samples = sample_set(&shape, 32, 9);
        let mut grads = GradBuffer::zeros_like(&tp, &dec);
        fit_loss_grad(&tp, &dec, &samples, &mut grads);

        let eps = 1e-4;
        let loss_at = |tp: &Triplane<f64>, dec: &FieldDecoder<f64>| {
            let mut g = GradBuffer::zeros_like(tp, dec);
            fit_loss_grad(tp, dec, &samples, &mut g)
        };
        let check = |analytic: f64, plus: f64, minus: f64, what: &str| {
            let numeric = (plus - minus) / (2.0 * eps);
            let denom = analytic.abs().max(numeric.abs()).max(1e-6);
            assert!(
                (analytic - numeric).abs() / denom < 1e-3,
                "{what}: analytic {analytic} vs numeric {numeric}"
            );
        };

        // Every texel of every plane.
        for plane_idx in 0..3 {
            for i in 0..tp.plane(plane_idx).data().len() {
                let mut tp_p = tp.clone();
                tp_p.plane_mut(plane_idx).data_mut()[i] += eps;
                let mut tp_m = tp.clone();
                tp_m.plane_mut(plane_idx).data_mut()[i] -= eps;
                check(
                    grads.planes[plane_idx][i],
                    loss_at(&tp_p, &dec),
                    loss_at(&tp_m, &dec),
                    &format!("plane {plane_idx} texel {i}"),
                );
            }
        }
        // Decoder parameters.
        for i in 0..dec.w_hidden.len() {
            let mut dp = dec.clone();
            dp.w_hidden[i] += eps;
            let mut dm = dec.clone();
            dm.w_hidden[i] -= eps;
            check(grads.w_hidden[i], loss_at(&tp, &dp), loss_at(&tp, &dm), "w_hidden");
        }
        for i in 0..dec.b_hidden.len() {
            let mut dp = dec.clone();
            dp.b_hidden[i] += eps;
            let mut dm = dec.clone();
            dm.b_hidden[i] -= eps;
            check(grads.b_hidden[i], loss_at(&tp, &dp), loss_at(&tp, &dm), "b_hidden");
        }
        for i in 0..dec.w_sdf.len() {
            let mut dp = dec.clone();
            dp.w_sdf[i] += eps;
            let mut dm = dec.clone();
            dm.w_sdf[i] -= eps;
            check(grads.w_sdf[i], loss_at(&tp, &dp), loss_at(&tp, &dm), "w_sdf");
        }
        {
            let mut dp = dec.clone();
            dp.b_sdf += eps;
            let mut dm = dec.clone();
            dm.b_sdf -= eps;
            check(grads.b_sdf, loss_at(&tp, &dp), loss_at(&tp, &dm), "b_sdf");
        }
        for i in 0..dec.w_color.len() {
            let mut dp = dec.clone();
            dp.w_color[i] += eps;
            let mut dm = dec.clone();
            dm.w_color[i] -= eps;
            check(grads.w_color[i], loss_at(&tp, &dp), loss_at(&tp, &dm), "w_color");
        }
        for k in 0..3 {
            let mut dp = dec.clone();
            dp.b_color[k] += eps;
            let mut dm = dec.clone();
            dm.b_color[k] -= eps;
            check(grads.b_color[k], loss_at(&tp, &dp), loss_at(&tp, &dm), "b_color");
        }
    }

    #[test]
    fn zero_iterations_rejected() {
        let (_, _, shape) = small_instance(1);
        let cfg = FitConfig {
            iterations: 0,
            ..FitConfig::default()
        };
        assert!(fit_triplane(&shape, &cfg, &TriplaneConfig::default()).is_err());
    }

    #[test]
    fn identical_seeds_give_bit_identical_fits() {
        let (_, _, shape) = small_instance(1);
        let cfg = FitConfig {
            iterations: 20,
            batch: 64,
            ..FitConfig::default()
        };
        let tp_cfg = TriplaneConfig {
            resolution: 16,
            channels: 2,
            hidden: 4,
            extent: 0.5,
        };
        let a = fit_triplane(&shape, &cfg, &tp_cfg).unwrap();
        let b = fit_triplane(&shape, &cfg, &tp_cfg).unwrap();
        assert_eq!(a.triplane, b.triplane);
        assert_eq!(a.decoder, b.decoder);
        assert_eq!(a.rmse, b.rmse);
    }

    #[test]
    fn identical_field_has_zero_error() {
        // Zero-weight decoder against a hypothetical zero SDF.
        let tp: Triplane<f64> = Triplane::zeros(8, 2, 0.5).unwrap();
        let dec = FieldDecoder::zeros(2, 0);
        let mut rng = Rng::derive(3, 0x72657365);
        let mut sum = 0.0;
        for _ in 0..1000 {
            let p = rng.point_in_cube(0.5);
            let d = dec.decode_sdf(&tp.eval_features(p).unwrap());
            sum += d * d;
        }
        assert_eq!(sum, 0.0);
    }

    #[test]
    fn fit_error_is_statistically_consistent() {
        let (tp, dec, shape) = small_instance(6);
        let a = sdf_fit_error(&tp, &dec, &shape, 20_000, 1).unwrap();
        let b = sdf_fit_error(&tp, &dec, &shape, 40_000, 2).unwrap();
        // Estimates of the same quantity from independent sample sets.
        assert!((a - b).abs() / a.max(b) < 0.1, "a {a} b {b}");
    }
}
