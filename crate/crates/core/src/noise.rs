//! Seeded local high-frequency corruption of triplane feature maps,
//! emulating the artifacts that inconsistent multi-view inputs leave on
//! decoded triplanes: per-patch white noise, high-passed by subtracting its
//! own Gaussian blur, windowed by a smooth radial mask.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Triplane;
use crate::filter::{filter_gaussian, KernelSpec};
use crate::plane::Plane;
use crate::real::Real;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub patches_per_plane: usize,
    /// Patch radius in texels; the perturbation support is strictly inside it.
    pub patch_radius: usize,
    /// In units of the plane's feature standard deviation.
    pub amplitude: f64,
    /// Gaussian sigma (texels) subtracted from the white noise to high-pass it.
    pub highpass_sigma: f64,
    pub seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            patches_per_plane: 8,
            patch_radius: 16,
            amplitude: 0.3,
            highpass_sigma: 2.0,
            seed: 13,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.amplitude < 0.0 {
            return Err(Error::invalid("noise amplitude must be >= 0"));
        }
        if self.patch_radius < 1 {
            return Err(Error::invalid("patch radius must be >= 1 texel"));
        }
        if !(self.highpass_sigma > 0.0) {
            return Err(Error::invalid("high-pass sigma must be positive"));
        }
        Ok(())
    }
}

struct PatchDraw<T> {
    center_row: f64,
    center_col: f64,
    noise: Plane<T>,
}

/// Seeded patch centers and per-patch white-noise fields, plane by plane.
fn draw_patches<T: Real>(res: usize, spec: &NoiseSpec) -> [Vec<PatchDraw<T>>; 3] {
    let mut rng = Rng::derive(spec.seed, 0x6e6f6973);
    std::array::from_fn(|_| {
        (0..spec.patches_per_plane)
            .map(|_| PatchDraw {
                center_row: rng.index(res) as f64,
                center_col: rng.index(res) as f64,
                noise: Plane::from_fn(res, 1, |_, _, _| rng.normal()),
            })
            .collect()
    })
}

/// Returns a corrupted copy of the triplane; the input is unmodified.
/// Zero patches or zero amplitude is the identity perturbation.
pub fn inject_artifacts<T: Real>(tp: &Triplane<T>, spec: &NoiseSpec) -> Result<Triplane<T>> {
    spec.validate()?;
    let mut out = tp.clone();
    if spec.patches_per_plane == 0 || spec.amplitude == 0.0 {
        return Ok(out);
    }
    let res = tp.resolution();
    let channels = tp.channels();
    // Blur kernel covering +-3 sigma.
    let k = 2 * (3.0 * spec.highpass_sigma).ceil() as usize + 1;
    let mut blur_spec = KernelSpec::<T>::gaussian(k);
    blur_spec.sigma_s = Some(T::of(spec.highpass_sigma));
    let radius = spec.patch_radius as f64;

    let patches = draw_patches::<T>(res, spec);
    for (plane_idx, plane_patches) in patches.iter().enumerate() {
        let scale = T::of(spec.amplitude) * tp.plane(plane_idx).std();
        for patch in plane_patches {
            let blurred = filter_gaussian(&patch.noise, &blur_spec)?;
            let plane = out.plane_mut(plane_idx);
            for row in 0..res {
                for col in 0..res {
                    let dr = row as f64 - patch.center_row;
                    let dc = col as f64 - patch.center_col;
                    let d2 = (dr * dr + dc * dc) / (radius * radius);
                    if d2 >= 1.0 {
                        continue;
                    }
                    let mask = T::of((1.0 - d2) * (1.0 - d2));
                    let hp = patch.noise.get(row, col, 0) - blurred.get(row, col, 0);
                    let delta = scale * mask * hp;
                    for c in 0..channels {
                        let v = plane.get(row, col, c);
                        plane.set(row, col, c, v + delta);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// True where any patch of the given spec touches the texel; uses the same
/// seeded draws as `inject_artifacts`. Locality bookkeeping for tests.
pub fn patch_mask(res: usize, spec: &NoiseSpec) -> [Vec<bool>; 3] {
    let patches = draw_patches::<f64>(res, spec);
    let radius = spec.patch_radius as f64;
    std::array::from_fn(|plane_idx| {
        let mut mask = vec![false; res * res];
        for patch in &patches[plane_idx] {
            for row in 0..res {
                for col in 0..res {
                    let dr = row as f64 - patch.center_row;
                    let dc = col as f64 - patch.center_col;
                    if (dr * dr + dc * dc) / (radius * radius) < 1.0 {
                        mask[row * res + col] = true;
                    }
                }
            }
        }
        mask
    })
}
