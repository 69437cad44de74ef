//! Acceptance gate: one test per criterion, each printing a PASS/FAIL
//! line. Fits are shared across criteria through a lazy cache, and the
//! tests serialize on a global lock so wall-clock budgets are meaningful.

use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use triplane_core::extract::{analytic_mesh, extract_mesh, ColorSource};
use triplane_core::field::{FieldDecoder, Triplane};
use triplane_core::filter::{
    filter_bilateral, filter_bilateral_reference, filter_gaussian, modulate_triplane,
    KernelSpec,
};
use triplane_core::fit::{fit_loss_grad, fit_triplane, FitResult, FitSample, GradBuffer};
use triplane_core::mesh::io::write_obj;
use triplane_core::mesh::TriMesh;
use triplane_core::metrics::{
    brute_force_nearest, evaluate_pair, volume_iou, KdTree, MetricsConfig, MetricsReport,
};
use triplane_core::noise::inject_artifacts;
use triplane_core::pipeline::{run_pipeline, PipelineConfig};
use triplane_core::plane::Plane;
use triplane_core::rng::Rng;
use triplane_core::shape::{Corpus, Shape};

/// Corruption seeds for the 5 x 3 directional comparison.
const CORRUPTION_SEEDS: [u64; 3] = [13, 14, 15];

fn lock() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

struct ShapeFit {
    name: String,
    fitted: FitResult<f64>,
    truth: TriMesh<f64>,
}

struct Fits {
    shapes: Vec<ShapeFit>,
    elapsed: Duration,
}

fn fits() -> &'static Fits {
    static FITS: OnceLock<Fits> = OnceLock::new();
    FITS.get_or_init(|| {
        let start = Instant::now();
        let cfg = PipelineConfig::<f64>::default();
        let corpus: Corpus<f64> = Corpus::builtin();
        let shapes = corpus
            .iter()
            .map(|(name, shape)| {
                let fitted = fit_triplane(shape, &cfg.fit, &cfg.triplane).unwrap();
                let truth = analytic_mesh(shape, cfg.grid_n, 0.5).unwrap();
                ShapeFit {
                    name: name.to_string(),
                    fitted,
                    truth,
                }
            })
            .collect();
        Fits {
            shapes,
            elapsed: start.elapsed(),
        }
    })
}

fn stage_report(
    tp: &Triplane<f64>,
    dec: &FieldDecoder<f64>,
    kernel: Option<&KernelSpec<f64>>,
    truth: &TriMesh<f64>,
) -> MetricsReport {
    let cfg = PipelineConfig::<f64>::default();
    let mesh = extract_mesh(tp, dec, kernel, cfg.grid_n, 0.0, 1, ColorSource::Unfiltered).unwrap();
    evaluate_pair(&mesh, truth, &cfg.metrics).unwrap()
}

fn verdict(criterion: u32, ok: bool, detail: String) {
    println!(
        "criterion {criterion}: {} - {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_01_filtering_improves_ncs_directionally() {
    let _guard = lock();
    let start = Instant::now();
    let cfg = PipelineConfig::<f64>::default();
    let mut wins = 0usize;
    let mut total = 0usize;
    let (mut sum_b, mut sum_c) = (0.0, 0.0);
    for sf in &fits().shapes {
        for seed in CORRUPTION_SEEDS {
            let mut noise = cfg.noise;
            noise.seed = seed;
            let corrupted = inject_artifacts(&sf.fitted.triplane, &noise).unwrap();
            let b = stage_report(&corrupted, &sf.fitted.decoder, None, &sf.truth);
            let c = stage_report(&corrupted, &sf.fitted.decoder, Some(&cfg.kernel), &sf.truth);
            total += 1;
            if c.ncs_percent > b.ncs_percent {
                wins += 1;
            }
            sum_b += b.ncs_percent;
            sum_c += c.ncs_percent;
        }
    }
    let mean_b = sum_b / total as f64;
    let mean_c = sum_c / total as f64;
    let elapsed = start.elapsed() + fits().elapsed;
    let ok = wins >= 12 && mean_c > mean_b && elapsed.as_secs() <= 600;
    verdict(
        1,
        ok,
        format!(
            "filtered beats corrupted in {wins}/{total} runs, mean NCS {mean_b:.2} -> {mean_c:.2}, {elapsed:.0?} incl. fits"
        ),
    );
}

#[test]
fn criterion_02_all_filter_kinds_help_and_bilateral_keeps_fidelity() {
    let _guard = lock();
    let cfg = PipelineConfig::<f64>::default();
    let k = cfg.kernel.size;
    let kinds = [
        KernelSpec::bilinear(4),
        KernelSpec::gaussian(k),
        KernelSpec::bilateral(k),
    ];
    let mut mean_b = 0.0;
    let mut mean_ncs = [0.0f64; 3];
    let mut mean_chamfer = [0.0f64; 3];
    let n = fits().shapes.len() as f64;
    for sf in &fits().shapes {
        let corrupted = inject_artifacts(&sf.fitted.triplane, &cfg.noise).unwrap();
        let b = stage_report(&corrupted, &sf.fitted.decoder, None, &sf.truth);
        mean_b += b.ncs_percent / n;
        for (i, spec) in kinds.iter().enumerate() {
            let c = stage_report(&corrupted, &sf.fitted.decoder, Some(spec), &sf.truth);
            mean_ncs[i] += c.ncs_percent / n;
            mean_chamfer[i] += c.chamfer_x1e3 / n;
        }
    }
    let all_improve = mean_ncs.iter().all(|&m| m > mean_b);
    let fidelity = mean_chamfer[2] <= mean_chamfer[1];
    verdict(
        2,
        all_improve && fidelity,
        format!(
            "baseline NCS {mean_b:.2}; bilinear {:.2} gaussian {:.2} bilateral {:.2}; chamfer bilateral {:.3} vs gaussian {:.3} at k={k}",
            mean_ncs[0], mean_ncs[1], mean_ncs[2], mean_chamfer[2], mean_chamfer[1]
        ),
    );
}

#[test]
fn criterion_03_smoothness_is_monotone_in_kernel_size() {
    let _guard = lock();
    let cfg = PipelineConfig::<f64>::default();
    let ks = [1usize, 3, 5, 9, 15];
    let mut ok = true;
    let mut detail = String::new();
    for sf in &fits().shapes {
        let corrupted = inject_artifacts(&sf.fitted.triplane, &cfg.noise).unwrap();
        let energies: Vec<f64> = ks
            .iter()
            .map(|&k| {
                let filtered = modulate_triplane(&corrupted, &KernelSpec::bilateral(k)).unwrap();
                filtered
                    .planes()
                    .iter()
                    .map(|p| p.laplacian_energy())
                    .sum::<f64>()
                    / 3.0
            })
            .collect();
        let monotone = energies.windows(2).all(|w| w[1] <= w[0]);
        ok &= monotone;
        detail.push_str(&format!(
            "{}: {:.2e} -> {:.2e}{} ",
            sf.name,
            energies[0],
            energies[4],
            if monotone { "" } else { " NOT MONOTONE" }
        ));
    }
    verdict(3, ok, detail);
}

#[test]
fn criterion_04_bilateral_matches_oracle() {
    let _guard = lock();
    let mut worst = 0.0f64;
    for seed in 0..20u64 {
        let mut rng = Rng::new(seed);
        let plane: Plane<f64> = Plane::from_fn(32, 4, |_, _, _| rng.range(-1.0, 1.0));
        let spec = KernelSpec::bilateral(9);
        let fast = filter_bilateral(&plane, &spec).unwrap();
        let slow = filter_bilateral_reference(&plane, &spec).unwrap();
        for (a, b) in fast.data().iter().zip(slow.data()) {
            worst = worst.max((a - b).abs());
        }
        // k=1 must be the exact identity.
        let ident = filter_bilateral(&plane, &KernelSpec::bilateral(1)).unwrap();
        assert_eq!(ident.data(), plane.data(), "k=1 changed the plane");
        // sigma_r -> infinity degenerates to the plain Gaussian.
        let mut wide = KernelSpec::bilateral(9);
        wide.sigma_r = Some(1e6);
        let as_gauss = filter_bilateral(&plane, &wide).unwrap();
        let gauss = filter_gaussian(&plane, &KernelSpec::gaussian(9)).unwrap();
        for (a, b) in as_gauss.data().iter().zip(gauss.data()) {
            worst = worst.max((a - b).abs());
        }
    }
    verdict(4, worst <= 1e-6, format!("worst deviation {worst:.2e}"));
}

#[test]
fn criterion_05_bilateral_preserves_step_edges() {
    let _guard = lock();
    let step_height = 10.0;
    let plane: Plane<f64> =
        Plane::from_fn(32, 1, |_, col, _| if col < 16 { 0.0 } else { step_height });
    let mut spec = KernelSpec::bilateral(9);
    spec.sigma_r = Some(step_height / 100.0);
    let filtered = filter_bilateral(&plane, &spec).unwrap();
    let worst = plane
        .data()
        .iter()
        .zip(filtered.data())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    verdict(5, worst <= 1e-3, format!("max per-pixel change {worst:.2e}"));
}

fn axis_box(lo: [f64; 3], hi: [f64; 3]) -> TriMesh<f64> {
    let v = |mask: usize| {
        [
            if mask & 1 == 0 { lo[0] } else { hi[0] },
            if mask & 2 == 0 { lo[1] } else { hi[1] },
            if mask & 4 == 0 { lo[2] } else { hi[2] },
        ]
    };
    let vertices: Vec<[f64; 3]> = (0..8).map(v).collect();
    let quads = [
        [0u32, 2, 3, 1],
        [4, 5, 7, 6],
        [0, 1, 5, 4],
        [2, 6, 7, 3],
        [0, 4, 6, 2],
        [1, 3, 7, 5],
    ];
    let mut faces = Vec::new();
    for q in quads {
        faces.push([q[0], q[1], q[2]]);
        faces.push([q[0], q[2], q[3]]);
    }
    TriMesh {
        vertices,
        faces,
        colors: None,
        normals: None,
    }
}

#[test]
fn criterion_06_metric_oracles() {
    let _guard = lock();
    let sphere = Shape::Sphere {
        center: [0.0, 0.0, 0.0],
        radius: 0.3,
        color: [0.8, 0.2, 0.2],
    };
    let mesh = analytic_mesh(&sphere, 64, 0.5).unwrap();
    let cfg = MetricsConfig::default();
    let same = evaluate_pair(&mesh, &mesh, &cfg).unwrap();
    let self_exact =
        same.volume_iou == 1.0 && same.chamfer_x1e3 == 0.0 && same.ncs_percent == 100.0;

    let a = axis_box([0.0, 0.0, 0.0], [1.0, 1.0, 1.0]);
    let b = axis_box([0.5, 0.0, 0.0], [1.5, 1.0, 1.0]);
    let iou = volume_iou(&a, &b, 128).unwrap();
    let cubes_ok = (iou - 1.0 / 3.0).abs() <= 0.02;

    let mut rng = Rng::new(11);
    let points: Vec<[f64; 3]> = (0..2000).map(|_| rng.point_in_cube(0.5)).collect();
    let tree = KdTree::build(&points);
    let nn_exact = (0..1000).all(|_| {
        let q = rng.point_in_cube(0.5);
        tree.nearest(q).unwrap().dist_sq == brute_force_nearest(&points, q).unwrap().dist_sq
    });

    verdict(
        6,
        self_exact && cubes_ok && nn_exact,
        format!(
            "self-eval exact {self_exact}, offset-cube IoU {iou:.4} (want 1/3), kd == brute {nn_exact}"
        ),
    );
}

#[test]
fn criterion_07_sphere_extraction_fidelity() {
    let _guard = lock();
    let radius: f64 = 0.3;
    let sphere = Shape::Sphere {
        center: [0.0, 0.0, 0.0],
        radius,
        color: [0.8, 0.2, 0.2],
    };
    let n = 64usize;
    let mesh = analytic_mesh(&sphere, n, 0.5).unwrap();
    let cell = 1.0 / (n as f64 - 1.0);
    let diagonal = cell * 3.0f64.sqrt();
    let worst = mesh
        .vertices
        .iter()
        .map(|v| ((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() - radius).abs())
        .fold(0.0f64, f64::max);
    let watertight = mesh.check_watertight().is_ok();
    verdict(
        7,
        worst <= diagonal && watertight,
        format!("worst radial error {worst:.5} (cell diagonal {diagonal:.5}), watertight {watertight}"),
    );
}

#[test]
fn criterion_08_fit_quality_gate() {
    let _guard = lock();
    let mut detail = String::new();
    let mut ok = true;
    for sf in &fits().shapes {
        let rmse = sf.fitted.rmse;
        ok &= rmse <= 0.01;
        detail.push_str(&format!("{} {rmse:.4} ", sf.name));
    }

    // Analytic gradients vs central finite differences on a small instance.
    let mut rng = Rng::new(4);
    let planes = [
        Plane::from_fn(8, 2, |_, _, _| rng.range(-0.3, 0.3)),
        Plane::from_fn(8, 2, |_, _, _| rng.range(-0.3, 0.3)),
        Plane::from_fn(8, 2, |_, _, _| rng.range(-0.3, 0.3)),
    ];
    let tp = Triplane::from_planes(planes, 0.5).unwrap();
    let dec = FieldDecoder::init_random(2, 3, &mut rng);
    let sphere = Shape::Sphere {
        center: [0.0, 0.0, 0.0],
        radius: 0.3,
        color: [0.8, 0.2, 0.2],
    };
    let samples: Vec<FitSample<f64>> = (0..32)
        .map(|i| {
            let p = rng.point_in_cube(0.5);
            FitSample {
                p,
                sdf: sphere.sdf(p),
                color: if i % 2 == 0 { Some(sphere.color(p)) } else { None },
            }
        })
        .collect();
    let mut grads = GradBuffer::zeros_like(&tp, &dec);
    fit_loss_grad(&tp, &dec, &samples, &mut grads);
    let eps = 1e-4;
    let mut worst_rel = 0.0f64;
    for plane_idx in 0..3 {
        for i in 0..tp.plane(plane_idx).data().len() {
            let mut tp_p = tp.clone();
            tp_p.plane_mut(plane_idx).data_mut()[i] += eps;
            let mut tp_m = tp.clone();
            tp_m.plane_mut(plane_idx).data_mut()[i] -= eps;
            let mut g = GradBuffer::zeros_like(&tp, &dec);
            let plus = fit_loss_grad(&tp_p, &dec, &samples, &mut g);
            let minus = fit_loss_grad(&tp_m, &dec, &samples, &mut g);
            let numeric = (plus - minus) / (2.0 * eps);
            let analytic = grads.planes[plane_idx][i];
            let denom = analytic.abs().max(numeric.abs()).max(1e-6);
            worst_rel = worst_rel.max((analytic - numeric).abs() / denom);
        }
    }
    ok &= worst_rel < 1e-3;
    verdict(
        8,
        ok,
        format!("{detail}(gate 0.01); worst gradient deviation {worst_rel:.2e}"),
    );
}

#[test]
fn criterion_09_and_10_determinism_and_performance() {
    let _guard = lock();
    let cfg = PipelineConfig::<f64>::default();
    let sphere = Corpus::<f64>::builtin().get("sphere").unwrap().clone();

    let run = || {
        let start = Instant::now();
        let out = run_pipeline(&sphere, &cfg).unwrap();
        let elapsed = start.elapsed();
        let dir = tempfile::tempdir().unwrap();
        let container = dir.path().join("c.tpln");
        triplane_core::container::save_container(&container, &out.triplane, &out.decoder).unwrap();
        let container_bytes = std::fs::read(&container).unwrap();
        let mut mesh_bytes = Vec::new();
        for stage in out.stages() {
            write_obj(&mut mesh_bytes, &stage.mesh).unwrap();
        }
        let reports: Vec<String> = out
            .stages()
            .iter()
            .map(|s| serde_json::to_string(&s.report).unwrap())
            .collect();
        (container_bytes, mesh_bytes, reports, elapsed)
    };
    let (ca, ma, ra, t1) = run();
    let (cb, mb, rb, t2) = run();
    let deterministic = ca == cb && ma == mb && ra == rb;
    verdict(
        9,
        deterministic,
        format!(
            "containers {} bytes, meshes {} bytes, reports byte-identical: {deterministic}",
            ca.len(),
            ma.len()
        ),
    );

    let mut rng = Rng::new(256);
    let plane = Plane::from_fn(256, 4, |_, _, _| rng.range(-1.0, 1.0));
    let spec = KernelSpec::bilateral(9);
    let time_of = |f: &dyn Fn() -> Plane<f64>| {
        let start = Instant::now();
        let _ = f();
        start.elapsed().as_secs_f64()
    };
    let fast = time_of(&|| filter_bilateral(&plane, &spec).unwrap());
    let slow = time_of(&|| filter_bilateral_reference(&plane, &spec).unwrap());
    let speedup = slow / fast;
    let per_shape = t1.max(t2);
    let ok = speedup >= 5.0 && per_shape.as_secs_f64() <= 30.0;
    verdict(
        10,
        ok,
        format!("bilateral speedup {speedup:.1}x (need 5x), pipeline {per_shape:.1?}/shape (need <= 30 s)"),
    );
}
