//! `panosplat`: stitch lifted views into a panorama, analyze homography
//! distortion, evaluate overlap metrics, and generate synthetic scenes.
//!
//! Exit codes: 0 success, 2 input/validation errors, 3 empty-result
//! conditions (no points past filtering, empty overlap). Diagnostics go to
//! stderr as a single `error: <code>: <msg>` line.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use panosplat::distortion::{self, DistortionError, Homography};
use panosplat::fusion::FusionError;
use panosplat::geom::Mat3;
use panosplat::io::{self, CanvasSize, FillMethod, IoError};
use panosplat::metrics::{self, MetricsError, OverlapPair};
use panosplat::pipeline::{self, PipelineError};
use panosplat::synthetic::{self, SyntheticConfig};

#[derive(Parser)]
#[command(
    name = "panosplat",
    version,
    about = "Point-map panorama stitching pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stitch a scene manifest into a panorama.
    Stitch(StitchArgs),
    /// Decompose a homography and rasterize its Jacobian-determinant field.
    AnalyzeHomography(AnalyzeArgs),
    /// PSNR/SSIM between two images over the overlap of their masks.
    Evaluate(EvaluateArgs),
    /// Generate a synthetic cylindrical-room scene with ground truth.
    GenSynthetic(GenArgs),
}

#[derive(Args)]
struct StitchArgs {
    /// Scene manifest (JSON).
    manifest: PathBuf,
    /// Output prefix; writes <prefix>_pano.ppm, _raw.ppm, _mask.pgm,
    /// _support.pfm, _report.json.
    #[arg(long, default_value = "out")]
    out_prefix: String,
    /// Override the manifest hole threshold tau.
    #[arg(long)]
    tau: Option<f64>,
    /// Override the manifest confidence threshold tau_c.
    #[arg(long)]
    tau_c: Option<f64>,
    /// Override the splat kernel sigma (pixels).
    #[arg(long)]
    kernel_sigma: Option<f64>,
    /// Override the splat kernel truncation radius (pixels).
    #[arg(long)]
    kernel_radius: Option<usize>,
    /// Override the fill method: diffusion|pullpush|none|external:<cmd>.
    #[arg(long)]
    fill: Option<String>,
    /// Override the canvas width.
    #[arg(long)]
    width: Option<usize>,
    /// Override the canvas height.
    #[arg(long)]
    height: Option<usize>,
    /// Worker thread count; any value yields bitwise-identical output.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// The nine row-major homography entries.
    #[arg(num_args = 9, value_name = "H", conflicts_with = "file")]
    entries: Vec<f64>,
    /// Read the nine entries (whitespace-separated) from a file instead.
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long, default_value = "homography")]
    out_prefix: String,
    /// Heatmap width in pixels.
    #[arg(long, default_value_t = 256)]
    width: usize,
    /// Heatmap height in pixels.
    #[arg(long, default_value_t = 256)]
    height: usize,
}

#[derive(Args)]
struct EvaluateArgs {
    image_a: PathBuf,
    image_b: PathBuf,
    /// Hole mask for image A (PGM, 255 = hole).
    mask_a: PathBuf,
    /// Hole mask for image B.
    mask_b: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// Output directory for views, manifest, and ground truth.
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    n_views: usize,
    /// Square view resolution in pixels.
    #[arg(long, default_value_t = 512)]
    image_size: usize,
    /// Horizontal field of view in degrees.
    #[arg(long, default_value_t = 90.0)]
    fov_deg: f64,
    /// Panorama canvas width.
    #[arg(long, default_value_t = 2048)]
    width: usize,
    /// Panorama canvas height.
    #[arg(long, default_value_t = 1024)]
    height: usize,
}

struct CliError {
    code: &'static str,
    exit: u8,
    message: String,
}

impl CliError {
    fn validation(message: String) -> Self {
        CliError {
            code: "validation",
            exit: 2,
            message,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        let code = match &e {
            IoError::InvalidManifest(_) => "validation",
            _ => "io",
        };
        CliError {
            code,
            exit: 2,
            message: e.to_string(),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match &e {
            PipelineError::Fusion(FusionError::EmptyResult { .. }) => CliError {
                code: "empty-result",
                exit: 3,
                message: e.to_string(),
            },
            PipelineError::Completion(_) => CliError {
                code: "completion",
                exit: 2,
                message: e.to_string(),
            },
            _ => CliError {
                code: "pipeline",
                exit: 2,
                message: e.to_string(),
            },
        }
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match &e {
            MetricsError::EmptyOverlap => CliError {
                code: "empty-overlap",
                exit: 3,
                message: e.to_string(),
            },
            _ => CliError {
                code: "metrics",
                exit: 2,
                message: e.to_string(),
            },
        }
    }
}

impl From<DistortionError> for CliError {
    fn from(e: DistortionError) -> Self {
        let code = match &e {
            DistortionError::SingularHomography { .. } => "singular-homography",
            DistortionError::HorizonSingularity { .. } => "horizon",
        };
        CliError {
            code,
            exit: 2,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Stitch(args) => cmd_stitch(args),
        Command::AnalyzeHomography(args) => cmd_analyze(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::GenSynthetic(args) => cmd_gen(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let one_line = e.message.replace('\n', " ");
            eprintln!("error: {}: {}", e.code, one_line);
            ExitCode::from(e.exit)
        }
    }
}

fn cmd_stitch(args: StitchArgs) -> Result<(), CliError> {
    let t_load = Instant::now();
    let mut scene = io::load_scene(&args.manifest)?;
    let load_s = t_load.elapsed().as_secs_f64();

    if let Some(tau) = args.tau {
        scene.manifest.params.tau = tau;
    }
    if let Some(tau_c) = args.tau_c {
        scene.manifest.params.tau_c = tau_c;
    }
    if let Some(sigma) = args.kernel_sigma {
        scene.manifest.params.kernel_sigma = sigma;
    }
    if let Some(radius) = args.kernel_radius {
        scene.manifest.params.kernel_radius = radius;
    }
    if let Some(fill) = &args.fill {
        scene.manifest.params.fill_method =
            fill.parse::<FillMethod>().map_err(CliError::validation)?;
    }
    if let Some(w) = args.width {
        scene.manifest.canvas.width = w;
    }
    if let Some(h) = args.height {
        scene.manifest.canvas.height = h;
    }
    if let Some(t) = args.threads {
        if t < 1 {
            return Err(CliError::validation("--threads must be at least 1".into()));
        }
    }
    scene.manifest.validate()?;

    let result = pipeline::stitch(
        &scene.views,
        scene.manifest.canvas,
        &scene.manifest.params,
        args.threads,
    )?;

    let t_write = Instant::now();
    let prefix = &args.out_prefix;
    io::write_image(&PathBuf::from(format!("{prefix}_pano.ppm")), &result.pano)?;
    io::write_image(
        &PathBuf::from(format!("{prefix}_raw.ppm")),
        &result.raw.color,
    )?;
    io::write_mask(
        &PathBuf::from(format!("{prefix}_mask.pgm")),
        &result.raw.mask,
    )?;
    io::write_pfm(
        &PathBuf::from(format!("{prefix}_support.pfm")),
        &result.raw.support,
    )?;
    let write_s = t_write.elapsed().as_secs_f64();

    let report = report::StitchReport::new(&result.stats, load_s, write_s);
    std::fs::write(
        format!("{prefix}_report.json"),
        serde_json::to_string_pretty(&report).expect("report serializes"),
    )
    .map_err(|e| CliError {
        code: "io",
        exit: 2,
        message: e.to_string(),
    })?;

    println!(
        "stitched {} views: {} points ({} skipped), holes {:.4} -> {:.4}",
        report.views_loaded,
        report.points_emitted,
        report.points_skipped,
        report.hole_fraction_before,
        report.hole_fraction_after
    );
    Ok(())
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let entries: Vec<f64> = if let Some(path) = &args.file {
        let text = std::fs::read_to_string(path).map_err(|e| CliError {
            code: "io",
            exit: 2,
            message: e.to_string(),
        })?;
        let parsed: Result<Vec<f64>, _> = text.split_whitespace().map(str::parse).collect();
        parsed.map_err(|e| CliError::validation(format!("bad number in {path:?}: {e}")))?
    } else {
        args.entries.clone()
    };
    if entries.len() != 9 {
        return Err(CliError::validation(format!(
            "need exactly 9 homography entries, got {}",
            entries.len()
        )));
    }
    let m = Mat3::new([
        [entries[0], entries[1], entries[2]],
        [entries[3], entries[4], entries[5]],
        [entries[6], entries[7], entries[8]],
    ]);
    let h = Homography::new(m)?;
    let n = distortion::normalize_rotation(&h);
    let (h_a, h_p) = distortion::factor_affine_projective(&n);

    println!("beta_rad: {}", n.beta);
    println!("c: {}", n.c);
    println!("s_A: {}", n.s_a);
    let print_mat = |name: &str, m: &Mat3| {
        for (i, row) in m.m.iter().enumerate() {
            println!("{name}[{i}]: {} {} {}", row[0], row[1], row[2]);
        }
    };
    print_mat("H_rot", &n.h_rot);
    print_mat("H_A", &h_a);
    print_mat("H_P", &h_p);

    let field = distortion::distortion_field(&n, args.width, args.height);
    let path = PathBuf::from(format!("{}_detj.pfm", args.out_prefix));
    io::write_pfm(&path, &field)?;
    println!("detj_heatmap: {}", path.display());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let a = io::read_image(&args.image_a)?;
    let b = io::read_image(&args.image_b)?;
    let ma = io::read_mask(&args.mask_a)?;
    let mb = io::read_mask(&args.mask_b)?;
    let overlap = metrics::overlap_mask(&ma, &mb)?;
    let pair = OverlapPair::new(a, b, overlap).map_err(|e| CliError {
        code: "metrics",
        exit: 2,
        message: e.to_string(),
    })?;

    println!("overlap_pixels: {}", pair.overlap_count());
    let db = metrics::psnr(&pair)?;
    if db.is_infinite() {
        println!("psnr_db: inf");
    } else {
        println!("psnr_db: {db:.4}");
    }
    match metrics::ssim(&pair) {
        Ok(s) => println!("ssim: {s:.6}"),
        Err(MetricsError::NoValidWindows) => println!("ssim: n/a (overlap thinner than window)"),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    if args.n_views < 1 {
        return Err(CliError::validation("--n-views must be at least 1".into()));
    }
    if args.image_size < 2 {
        return Err(CliError::validation(
            "--image-size must be at least 2".into(),
        ));
    }
    if !(args.fov_deg > 0.0 && args.fov_deg < 180.0) {
        return Err(CliError::validation("--fov-deg must be in (0, 180)".into()));
    }
    let config = SyntheticConfig {
        seed: args.seed,
        n_views: args.n_views,
        image_size: args.image_size,
        fov_deg: args.fov_deg,
        canvas: CanvasSize {
            width: args.width,
            height: args.height,
        },
    };
    synthetic::generate_scene(&args.out_dir, &config)?;
    println!("manifest: {}", args.out_dir.join("scene.json").display());
    println!(
        "ground_truth: {}",
        args.out_dir.join("ground_truth.ppm").display()
    );
    Ok(())
}
