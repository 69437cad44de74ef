use triplane_core::filter::{modulate_triplane, KernelSpec};
use triplane_core::fit::fit_triplane;
use triplane_core::noise::{inject_artifacts, NoiseSpec};
use triplane_core::pipeline::PipelineConfig;
use triplane_core::shape::Corpus;

fn main() {
    let cfg = PipelineConfig::<f64>::default();
    let corpus = Corpus::<f64>::builtin();
    let names: Vec<String> = std::env::args().skip(1).collect();
    for (name, shape) in corpus.iter() {
        if !names.is_empty() && !names.iter().any(|n| n == name) {
            continue;
        }
        let fitted = fit_triplane(shape, &cfg.fit, &cfg.triplane).unwrap();
        let corrupted = inject_artifacts(&fitted.triplane, &NoiseSpec::default()).unwrap();
        for (tag, tp) in [("corrupt", &corrupted), ("clean", &fitted.triplane)] {
            print!("{name} {tag}:");
            for k in [1usize, 3, 5, 9, 15] {
                let f = modulate_triplane(tp, &KernelSpec::bilateral(k)).unwrap();
                let e: f64 =
                    f.planes().iter().map(|p| p.laplacian_energy()).sum::<f64>() / 3.0;
                print!("  k{k} {e:.4e}");
            }
            println!();
        }
    }
}
