//! Command-line front end: fit triplanes to the analytic corpus, corrupt
//! and filter them, extract meshes, and score the results.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use triplane_core::container::{load_container, save_container};
use triplane_core::extract::{analytic_mesh, extract_mesh, ColorSource};
use triplane_core::filter::{
    filter_bilateral, filter_bilateral_reference, FilterKind, KernelSpec,
};
use triplane_core::fit::fit_triplane;
use triplane_core::mesh::io::{load_mesh, save_mesh};
use triplane_core::metrics::{brute_force_nearest, evaluate_pair, KdTree};
use triplane_core::noise::inject_artifacts;
use triplane_core::pipeline::{run_pipeline, PipelineConfig};
use triplane_core::plane::Plane;
use triplane_core::rng::Rng;
use triplane_core::shape::{Corpus, Shape};

use config::{base_kernel, ConfigDump, FileConfig};

/// Environment variable overriding the worker thread count.
const THREADS_ENV: &str = "TRIPLANE_THREADS";

#[derive(Parser)]
#[command(
    name = "triplane",
    version,
    about = "Triplane field pipeline: fit, corrupt, filter, extract, evaluate"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit a triplane + decoder to a corpus shape and save the container
    Fit(CommonArgs),
    /// Inject local high-frequency artifacts into a saved container
    Corrupt(FileCmdArgs),
    /// Apply a plane filter to a saved container
    Filter(FileCmdArgs),
    /// Extract a mesh from a container (geometry filtered when --kernel is given)
    Extract(ExtractArgs),
    /// Score one mesh against another
    Eval(EvalArgs),
    /// Full run per shape: fit, corrupt, filter, extract, evaluate
    Pipeline(CommonArgs),
    /// Comparison tables over filter kinds or kernel sizes
    Ablate(AblateArgs),
    /// Filter and nearest-neighbor throughput benchmarks
    Bench(CommonArgs),
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// TOML config file; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Global seed applied to fitting, corruption, and metrics
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (created if missing)
    #[arg(long, default_value = "triplane-out")]
    out: PathBuf,
    /// Corpus shape name; omit to process the whole corpus
    #[arg(long)]
    shape: Option<String>,
    /// Corpus TOML replacing the built-in shape set
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
    /// Filter window side length (odd)
    #[arg(long)]
    ksize: Option<usize>,
    #[arg(long)]
    sigma_s: Option<f64>,
    #[arg(long)]
    sigma_r: Option<f64>,
    /// Extraction lattice resolution
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long, value_enum, default_value = "obj")]
    format: FormatArg,
}

#[derive(Args)]
struct FileCmdArgs {
    /// Input container (.tpln)
    input: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ExtractArgs {
    /// Input container (.tpln)
    input: PathBuf,
    /// Iso value of the extracted surface
    #[arg(long, default_value_t = 0.0)]
    iso: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// Candidate mesh
    candidate: PathBuf,
    /// Reference mesh
    reference: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct AblateArgs {
    /// Comparison axis
    #[arg(long, value_enum)]
    axis: AblateAxis,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Bilinear,
    Gaussian,
    Bilateral,
}

impl From<KernelArg> for FilterKind {
    fn from(k: KernelArg) -> FilterKind {
        match k {
            KernelArg::Bilinear => FilterKind::Bilinear,
            KernelArg::Gaussian => FilterKind::Gaussian,
            KernelArg::Bilateral => FilterKind::Bilateral,
        }
    }
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum FormatArg {
    #[default]
    Obj,
    Ply,
}

impl FormatArg {
    fn ext(self) -> &'static str {
        match self {
            FormatArg::Obj => "obj",
            FormatArg::Ply => "ply",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AblateAxis {
    /// Bilinear vs Gaussian vs bilateral at the configured kernel size
    FilterKind,
    /// Bilateral windows k in {1, 3, 5, 9, 15}
    KernelSize,
}

/// Errors split by exit code: usage mistakes exit 2, runtime failures 1.
enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<triplane_core::Error> for CliError {
    fn from(e: triplane_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.cmd {
        Cmd::Fit(c) => cmd_fit(c),
        Cmd::Corrupt(a) => cmd_corrupt(a),
        Cmd::Filter(a) => cmd_filter(a),
        Cmd::Extract(a) => cmd_extract(a),
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Pipeline(c) => cmd_pipeline(c),
        Cmd::Ablate(a) => cmd_ablate(a),
        Cmd::Bench(c) => cmd_bench(c),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
    }
}

/// Effective config: defaults, then env threads, then file, then flags.
fn resolve_config(common: &CommonArgs) -> CliResult<(PipelineConfig<f64>, FileConfig)> {
    let mut cfg = PipelineConfig::<f64>::default();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        cfg.threads = v
            .parse()
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a positive integer")))?;
    }
    let file = match &common.config {
        Some(path) => FileConfig::load(path).map_err(|e| CliError::Usage(e.to_string()))?,
        None => FileConfig::default(),
    };
    file.apply(&mut cfg);
    if let Some(seed) = common.seed {
        cfg.fit.seed = seed;
        cfg.noise.seed = seed;
        cfg.metrics.seed = seed;
    }
    if let Some(kind) = common.kernel {
        cfg.kernel = base_kernel(kind.into(), cfg.kernel.size);
    }
    if let Some(k) = common.ksize {
        cfg.kernel.size = k;
    }
    if common.sigma_s.is_some() {
        cfg.kernel.sigma_s = common.sigma_s;
    }
    if common.sigma_r.is_some() {
        cfg.kernel.sigma_r = common.sigma_r;
    }
    if let Some(n) = common.grid_n {
        cfg.grid_n = n;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok((cfg, file))
}

fn load_corpus(common: &CommonArgs, file: &FileConfig) -> CliResult<Corpus<f64>> {
    let path = common.corpus.as_ref().or(file.corpus.as_ref());
    match path {
        Some(p) => Ok(Corpus::load(p)?),
        None => Ok(Corpus::builtin()),
    }
}

/// Shapes selected by --shape (or the config file), else the whole corpus.
fn select_shapes<'a>(
    corpus: &'a Corpus<f64>,
    common: &CommonArgs,
    file: &FileConfig,
) -> CliResult<Vec<(String, &'a Shape<f64>)>> {
    let wanted = common.shape.as_ref().or(file.shape.as_ref());
    match wanted {
        Some(name) => {
            let shape = corpus.get(name).ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown shape '{name}'; available: {}",
                    corpus.names().join(", ")
                ))
            })?;
            Ok(vec![(name.clone(), shape)])
        }
        None => Ok(corpus
            .iter()
            .map(|(n, s)| (n.to_string(), s))
            .collect()),
    }
}

fn ensure_out(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Manifest listing every produced file with its role, plus the effective
/// config, so a run is reproducible from its output directory alone.
fn write_manifest(
    out: &Path,
    command: &str,
    cfg: &PipelineConfig<f64>,
    outputs: &[(String, String)],
) -> CliResult<()> {
    let files: Vec<serde_json::Value> = outputs
        .iter()
        .map(|(path, role)| json!({ "path": path, "role": role }))
        .collect();
    let manifest = json!({
        "command": command,
        "config": serde_json::to_value(ConfigDump::from(cfg))
            .map_err(|e| CliError::Runtime(e.to_string()))?,
        "outputs": files,
    });
    write_json(&out.join("manifest.json"), &manifest)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".to_string())
}

fn cmd_fit(common: &CommonArgs) -> CliResult<()> {
    let (cfg, file) = resolve_config(common)?;
    let corpus = load_corpus(common, &file)?;
    let shapes = select_shapes(&corpus, common, &file)?;
    ensure_out(&common.out)?;
    let mut outputs = Vec::new();
    for (name, shape) in shapes {
        let result = fit_triplane(shape, &cfg.fit, &cfg.triplane)?;
        let container = format!("{name}.tpln");
        save_container(&common.out.join(&container), &result.triplane, &result.decoder)?;
        let log = format!("{name}.fit.json");
        write_json(
            &common.out.join(&log),
            &json!({
                "shape": name,
                "rmse": result.rmse,
                "iterations": result.iterations,
                "seed": cfg.fit.seed,
            }),
        )?;
        println!("{name}: rmse {:.6} -> {container}", result.rmse);
        outputs.push((container, "triplane container".to_string()));
        outputs.push((log, "fit log".to_string()));
    }
    write_manifest(&common.out, "fit", &cfg, &outputs)
}

fn cmd_corrupt(args: &FileCmdArgs) -> CliResult<()> {
    let (cfg, _) = resolve_config(&args.common)?;
    let (tp, dec) = load_container::<f64>(&args.input)?;
    let corrupted = inject_artifacts(&tp, &cfg.noise)?;
    ensure_out(&args.common.out)?;
    let name = format!("{}.corrupted.tpln", file_stem(&args.input));
    save_container(&args.common.out.join(&name), &corrupted, &dec)?;
    println!("{name}");
    write_manifest(
        &args.common.out,
        "corrupt",
        &cfg,
        &[(name, "corrupted container".to_string())],
    )
}

fn cmd_filter(args: &FileCmdArgs) -> CliResult<()> {
    let (cfg, _) = resolve_config(&args.common)?;
    let (tp, dec) = load_container::<f64>(&args.input)?;
    let filtered = triplane_core::filter::modulate_triplane(&tp, &cfg.kernel)?;
    ensure_out(&args.common.out)?;
    let name = format!("{}.filtered.tpln", file_stem(&args.input));
    save_container(&args.common.out.join(&name), &filtered, &dec)?;
    println!("{name}");
    write_manifest(
        &args.common.out,
        "filter",
        &cfg,
        &[(name, "filtered container".to_string())],
    )
}

fn cmd_extract(args: &ExtractArgs) -> CliResult<()> {
    let (cfg, _) = resolve_config(&args.common)?;
    let (tp, dec) = load_container::<f64>(&args.input)?;
    // Geometry comes from the filtered planes only when a kernel is chosen;
    // colors always sample the unfiltered planes (dual-path extraction).
    let kernel = args.common.kernel.map(|_| &cfg.kernel);
    let mesh = extract_mesh(
        &tp,
        &dec,
        kernel,
        cfg.grid_n,
        args.iso,
        cfg.threads,
        ColorSource::Unfiltered,
    )?;
    ensure_out(&args.common.out)?;
    let name = format!("{}.{}", file_stem(&args.input), args.common.format.ext());
    save_mesh(&args.common.out.join(&name), &mesh)?;
    println!("{name}: {} vertices, {} faces", mesh.vertices.len(), mesh.faces.len());
    write_manifest(
        &args.common.out,
        "extract",
        &cfg,
        &[(name, "extracted mesh".to_string())],
    )
}

fn cmd_eval(args: &EvalArgs) -> CliResult<()> {
    let (cfg, _) = resolve_config(&args.common)?;
    let candidate = load_mesh::<f64>(&args.candidate)?;
    let reference = load_mesh::<f64>(&args.reference)?;
    let report = evaluate_pair(&candidate, &reference, &cfg.metrics)?;
    let value = serde_json::to_value(report).map_err(|e| CliError::Runtime(e.to_string()))?;
    println!(
        "{}",
        serde_json::to_string_pretty(&value).map_err(|e| CliError::Runtime(e.to_string()))?
    );
    ensure_out(&args.common.out)?;
    write_json(&args.common.out.join("report.json"), &value)?;
    write_manifest(
        &args.common.out,
        "eval",
        &cfg,
        &[("report.json".to_string(), "metrics report".to_string())],
    )
}

fn cmd_pipeline(common: &CommonArgs) -> CliResult<()> {
    let (cfg, file) = resolve_config(common)?;
    let corpus = load_corpus(common, &file)?;
    let shapes = select_shapes(&corpus, common, &file)?;
    ensure_out(&common.out)?;
    let ext = common.format.ext();
    let mut outputs = Vec::new();
    for (name, shape) in shapes {
        let dir = common.out.join(&name);
        ensure_out(&dir)?;
        let result = run_pipeline(shape, &cfg)?;
        let mut rel = |f: String, role: &str| outputs.push((format!("{name}/{f}"), role.to_string()));

        let truth_file = format!("truth.{ext}");
        save_mesh(&dir.join(&truth_file), &result.truth)?;
        rel(truth_file, "analytic ground-truth mesh");

        let mut csv = String::from("stage,volume_iou,chamfer_x1e3,ncs_percent\n");
        for stage in result.stages() {
            let mesh_file = format!("{}.{ext}", stage.name);
            save_mesh(&dir.join(&mesh_file), &stage.mesh)?;
            rel(mesh_file, "stage mesh");
            let report_file = format!("{}.report.json", stage.name);
            write_json(
                &dir.join(&report_file),
                &serde_json::to_value(stage.report).map_err(|e| CliError::Runtime(e.to_string()))?,
            )?;
            rel(report_file, "stage metrics report");
            csv.push_str(&format!(
                "{},{},{},{}\n",
                stage.name,
                stage.report.volume_iou,
                stage.report.chamfer_x1e3,
                stage.report.ncs_percent
            ));
        }
        std::fs::write(dir.join("summary.csv"), csv)?;
        rel("summary.csv".to_string(), "per-stage metric summary");

        write_json(
            &dir.join("fit.json"),
            &json!({
                "shape": name,
                "rmse": result.fit_rmse,
                "iterations": cfg.fit.iterations,
                "seed": cfg.fit.seed,
            }),
        )?;
        rel("fit.json".to_string(), "fit log");

        println!(
            "{name}: ncs clean {:.2} corrupted {:.2} filtered {:.2} both {:.2}",
            result.clean.report.ncs_percent,
            result.baseline.report.ncs_percent,
            result.filtered.report.ncs_percent,
            result.filtered_both.report.ncs_percent,
        );
    }
    write_manifest(&common.out, "pipeline", &cfg, &outputs)
}

fn cmd_ablate(args: &AblateArgs) -> CliResult<()> {
    let (cfg, file) = resolve_config(&args.common)?;
    let corpus = load_corpus(&args.common, &file)?;
    let shapes = select_shapes(&corpus, &args.common, &file)?;
    ensure_out(&args.common.out)?;

    let variants: Vec<(String, Option<KernelSpec<f64>>)> = match args.axis {
        AblateAxis::FilterKind => {
            let mut v: Vec<(String, Option<KernelSpec<f64>>)> =
                vec![("unfiltered".to_string(), None)];
            for kind in [FilterKind::Bilinear, FilterKind::Gaussian, FilterKind::Bilateral] {
                let mut spec = base_kernel(kind, cfg.kernel.size);
                spec.sigma_s = cfg.kernel.sigma_s;
                spec.sigma_r = cfg.kernel.sigma_r;
                spec.factor = cfg.kernel.factor;
                v.push((kind.to_string(), Some(spec)));
            }
            v
        }
        AblateAxis::KernelSize => {
            let mut v: Vec<(String, Option<KernelSpec<f64>>)> =
                vec![("unfiltered".to_string(), None)];
            for k in [1usize, 3, 5, 9, 15] {
                v.push((format!("bilateral-k{k}"), Some(KernelSpec::bilateral(k))));
            }
            v
        }
    };

    let axis_name = match args.axis {
        AblateAxis::FilterKind => "filter-kind",
        AblateAxis::KernelSize => "kernel-size",
    };
    let mut csv = String::from("shape,variant,volume_iou,chamfer_x1e3,ncs_percent\n");
    for (name, shape) in &shapes {
        // One fit and one corruption per shape, shared across variants.
        let extent = cfg.triplane.extent;
        let truth = analytic_mesh(shape, cfg.grid_n, extent)?;
        let fitted = fit_triplane(shape, &cfg.fit, &cfg.triplane)?;
        let corrupted = inject_artifacts(&fitted.triplane, &cfg.noise)?;
        for (variant, kernel) in &variants {
            let mesh = extract_mesh(
                &corrupted,
                &fitted.decoder,
                kernel.as_ref(),
                cfg.grid_n,
                0.0,
                cfg.threads,
                ColorSource::Unfiltered,
            )?;
            let report = evaluate_pair(&mesh, &truth, &cfg.metrics)?;
            csv.push_str(&format!(
                "{name},{variant},{},{},{}\n",
                report.volume_iou, report.chamfer_x1e3, report.ncs_percent
            ));
            println!(
                "{name} {variant}: iou {:.3} chamfer {:.3} ncs {:.2}",
                report.volume_iou, report.chamfer_x1e3, report.ncs_percent
            );
        }
    }
    let csv_file = format!("ablate-{axis_name}.csv");
    std::fs::write(args.common.out.join(&csv_file), csv)?;
    write_manifest(
        &args.common.out,
        "ablate",
        &cfg,
        &[(csv_file, "ablation table".to_string())],
    )
}

/// Texels/second over enough repetitions to get a stable wall-clock read.
fn time_filter(
    plane: &Plane<f64>,
    spec: &KernelSpec<f64>,
    run: impl Fn(&Plane<f64>, &KernelSpec<f64>) -> triplane_core::Result<Plane<f64>>,
) -> CliResult<f64> {
    let texels = (plane.res() * plane.res()) as f64;
    let mut reps = 0u32;
    let start = Instant::now();
    loop {
        run(plane, spec)?;
        reps += 1;
        if start.elapsed().as_secs_f64() > 0.2 || reps >= 50 {
            break;
        }
    }
    Ok(texels * reps as f64 / start.elapsed().as_secs_f64())
}

fn cmd_bench(common: &CommonArgs) -> CliResult<()> {
    let (cfg, _) = resolve_config(common)?;
    let mut bilateral = Vec::new();
    for res in [64usize, 128, 256] {
        let mut rng = Rng::new(res as u64);
        let plane = Plane::from_fn(res, 4, |_, _, _| rng.range(-1.0, 1.0));
        for k in [3usize, 9] {
            let spec = KernelSpec::bilateral(k);
            let fast = time_filter(&plane, &spec, |p, s| filter_bilateral(p, s))?;
            let slow = time_filter(&plane, &spec, |p, s| filter_bilateral_reference(p, s))?;
            bilateral.push(json!({
                "res": res,
                "k": k,
                "optimized_texels_per_s": fast,
                "reference_texels_per_s": slow,
                "speedup": fast / slow,
            }));
        }
    }

    // Nearest-neighbor throughput: the spatial index answers the full query
    // set; the brute-force loop is timed on a subset to stay tractable.
    let n_points = 100_000usize;
    let n_queries = 100_000usize;
    let brute_queries = 200usize;
    let mut rng = Rng::new(42);
    let points: Vec<[f64; 3]> = (0..n_points).map(|_| rng.point_in_cube(0.5)).collect();
    let queries: Vec<[f64; 3]> = (0..n_queries).map(|_| rng.point_in_cube(0.5)).collect();
    let tree = KdTree::build(&points);
    let start = Instant::now();
    let mut acc = 0.0;
    for q in &queries {
        acc += tree.nearest(*q).map(|n| n.dist_sq).unwrap_or(0.0);
    }
    let tree_qps = n_queries as f64 / start.elapsed().as_secs_f64();
    let start = Instant::now();
    let mut brute_acc = 0.0;
    for q in queries.iter().take(brute_queries) {
        brute_acc += brute_force_nearest(&points, *q).map(|n| n.dist_sq).unwrap_or(0.0);
    }
    let brute_qps = brute_queries as f64 / start.elapsed().as_secs_f64();

    let report = json!({
        "bilateral": bilateral,
        "nearest_neighbor": {
            "points": n_points,
            "index_queries": n_queries,
            "brute_queries": brute_queries,
            "index_queries_per_s": tree_qps,
            "brute_queries_per_s": brute_qps,
            "speedup": tree_qps / brute_qps,
            "checksums": [acc, brute_acc],
        },
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?
    );
    ensure_out(&common.out)?;
    write_json(&common.out.join("bench.json"), &report)?;
    write_manifest(
        &common.out,
        "bench",
        &cfg,
        &[("bench.json".to_string(), "timing report".to_string())],
    )
}
