//! TOML experiment configs and flag merging. Every key is optional; file
//! values override the built-in defaults and command-line flags override
//! the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use triplane_core::error::{Error, Result};
use triplane_core::filter::{FilterKind, KernelSpec};
use triplane_core::pipeline::PipelineConfig;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Path to a corpus TOML replacing the built-in shape set.
    pub corpus: Option<PathBuf>,
    pub shape: Option<String>,
    pub grid_n: Option<usize>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub triplane: TriplaneSection,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(default)]
    pub metrics: MetricsSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriplaneSection {
    pub resolution: Option<usize>,
    pub channels: Option<usize>,
    pub hidden: Option<usize>,
    pub extent: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub iterations: Option<usize>,
    pub step: Option<f64>,
    pub batch: Option<usize>,
    pub surface_band_fraction: Option<f64>,
    pub plane_decay: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub patches_per_plane: Option<usize>,
    pub patch_radius: Option<usize>,
    pub amplitude: Option<f64>,
    pub highpass_sigma: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub kind: Option<FilterKind>,
    pub size: Option<usize>,
    pub sigma_s: Option<f64>,
    pub sigma_r: Option<f64>,
    pub factor: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    pub samples: Option<usize>,
    pub voxel_res: Option<usize>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text)
            .map_err(|e| Error::invalid(format!("config {}: {e}", path.display())))
    }

    pub fn apply(&self, cfg: &mut PipelineConfig<f64>) {
        let t = &self.triplane;
        set(&mut cfg.triplane.resolution, t.resolution);
        set(&mut cfg.triplane.channels, t.channels);
        set(&mut cfg.triplane.hidden, t.hidden);
        set(&mut cfg.triplane.extent, t.extent);
        let f = &self.fit;
        set(&mut cfg.fit.iterations, f.iterations);
        set(&mut cfg.fit.step, f.step);
        set(&mut cfg.fit.batch, f.batch);
        set(&mut cfg.fit.surface_band_fraction, f.surface_band_fraction);
        set(&mut cfg.fit.plane_decay, f.plane_decay);
        set(&mut cfg.fit.seed, f.seed);
        let n = &self.noise;
        set(&mut cfg.noise.patches_per_plane, n.patches_per_plane);
        set(&mut cfg.noise.patch_radius, n.patch_radius);
        set(&mut cfg.noise.amplitude, n.amplitude);
        set(&mut cfg.noise.highpass_sigma, n.highpass_sigma);
        set(&mut cfg.noise.seed, n.seed);
        let k = &self.kernel;
        if let Some(kind) = k.kind {
            cfg.kernel = base_kernel(kind, cfg.kernel.size);
        }
        set(&mut cfg.kernel.size, k.size);
        if k.sigma_s.is_some() {
            cfg.kernel.sigma_s = k.sigma_s;
        }
        if k.sigma_r.is_some() {
            cfg.kernel.sigma_r = k.sigma_r;
        }
        set(&mut cfg.kernel.factor, k.factor);
        set(&mut cfg.grid_n, self.grid_n);
        let m = &self.metrics;
        set(&mut cfg.metrics.samples, m.samples);
        set(&mut cfg.metrics.voxel_res, m.voxel_res);
        set(&mut cfg.metrics.seed, m.seed);
        set(&mut cfg.threads, self.threads);
    }
}

fn set<T: Copy>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}

/// A fresh KernelSpec of the given kind keeping the current window size.
pub fn base_kernel(kind: FilterKind, size: usize) -> KernelSpec<f64> {
    match kind {
        FilterKind::Gaussian => KernelSpec::gaussian(size),
        FilterKind::Bilateral => KernelSpec::bilateral(size),
        FilterKind::Bilinear => KernelSpec::bilinear(4),
    }
}

/// Flat serializable snapshot of the effective configuration, written into
/// every manifest so a run can be reproduced from its outputs alone.
#[derive(Debug, Serialize)]
pub struct ConfigDump {
    pub resolution: usize,
    pub channels: usize,
    pub hidden: usize,
    pub extent: f64,
    pub fit_iterations: usize,
    pub fit_step: f64,
    pub fit_batch: usize,
    pub fit_surface_band_fraction: f64,
    pub fit_plane_decay: f64,
    pub fit_seed: u64,
    pub noise_patches_per_plane: usize,
    pub noise_patch_radius: usize,
    pub noise_amplitude: f64,
    pub noise_highpass_sigma: f64,
    pub noise_seed: u64,
    pub kernel_kind: String,
    pub kernel_size: usize,
    pub kernel_sigma_s: Option<f64>,
    pub kernel_sigma_r: Option<f64>,
    pub kernel_factor: usize,
    pub grid_n: usize,
    pub metric_samples: usize,
    pub metric_voxel_res: usize,
    pub metric_seed: u64,
    pub threads: usize,
}

impl From<&PipelineConfig<f64>> for ConfigDump {
    fn from(cfg: &PipelineConfig<f64>) -> Self {
        ConfigDump {
            resolution: cfg.triplane.resolution,
            channels: cfg.triplane.channels,
            hidden: cfg.triplane.hidden,
            extent: cfg.triplane.extent,
            fit_iterations: cfg.fit.iterations,
            fit_step: cfg.fit.step,
            fit_batch: cfg.fit.batch,
            fit_surface_band_fraction: cfg.fit.surface_band_fraction,
            fit_plane_decay: cfg.fit.plane_decay,
            fit_seed: cfg.fit.seed,
            noise_patches_per_plane: cfg.noise.patches_per_plane,
            noise_patch_radius: cfg.noise.patch_radius,
            noise_amplitude: cfg.noise.amplitude,
            noise_highpass_sigma: cfg.noise.highpass_sigma,
            noise_seed: cfg.noise.seed,
            kernel_kind: cfg.kernel.kind.to_string(),
            kernel_size: cfg.kernel.size,
            kernel_sigma_s: cfg.kernel.sigma_s,
            kernel_sigma_r: cfg.kernel.sigma_r,
            kernel_factor: cfg.kernel.factor,
            grid_n: cfg.grid_n,
            metric_samples: cfg.metrics.samples,
            metric_voxel_res: cfg.metrics.voxel_res,
            metric_seed: cfg.metrics.seed,
            threads: cfg.threads,
        }
    }
}
