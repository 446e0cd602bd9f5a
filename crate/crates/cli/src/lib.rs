//! Command-line front end: persistence diagrams, topological loss, metrics,
//! Betti numbers and synthetic data.
//!
//! Exit status is 0 on success, 2 on usage errors and 1 on data errors. Data
//! errors print a single line `ERROR <CODE>: <detail>` on stderr.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use cortopo_core::io::{read_raster_auto, write_mask_pgm, write_raster, RasterFormat};
use cortopo_core::persistence::write_diagram_csv;
use cortopo_core::{
    betti_numbers, compute_persistence, evaluate, gen_ribbon, topo_loss, BinaryMask, LikelihoodMap,
    ManifestEntry, MetricsReport, RibbonSpec, Spacing, TopoLossConfig, DEFAULT_THRESHOLD,
};

#[derive(Debug, Parser)]
#[command(
    name = "cortopo",
    version,
    about = "Topology-aware segmentation toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the persistence diagram of a likelihood raster as CSV.
    Diagram {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "0,1", value_parser = parse_dims)]
        dims: Dims,
    },
    /// Topological loss of predictions against binary ground truths.
    Loss(LossArgs),
    /// Dice, ASD, HD95 and Betti-0 error as JSON.
    Metrics(MetricsArgs),
    /// Betti numbers of a mask binarized at a threshold.
    Betti {
        #[arg(long)]
        mask: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
    },
    /// Generate synthetic ribbon images with a JSON Lines manifest.
    Synth(SynthArgs),
}

#[derive(Debug, Clone)]
struct Dims(Vec<u8>);

fn parse_dims(s: &str) -> Result<Dims, String> {
    let mut dims = s
        .split(',')
        .map(|part| match part.trim() {
            "0" => Ok(0u8),
            "1" => Ok(1u8),
            other => Err(format!("unsupported homology dimension {other:?}")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    dims.sort_unstable();
    dims.dedup();
    Ok(Dims(dims))
}

#[derive(Debug, Args)]
struct LossArgs {
    /// Prediction raster; repeat together with --gt for several pairs.
    #[arg(long, required = true)]
    pred: Vec<PathBuf>,
    /// Ground-truth raster, binarized at 0.5.
    #[arg(long, required = true)]
    gt: Vec<PathBuf>,
    #[arg(long, default_value = "0,1", value_parser = parse_dims)]
    dims: Dims,
    #[arg(long = "lambda", default_value_t = 1.0)]
    weight: f64,
    /// Where to write the gradient as F32R, one per pair.
    #[arg(long)]
    grad_out: Vec<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct MetricsArgs {
    #[arg(long, required = true)]
    pred: Vec<PathBuf>,
    #[arg(long, required = true)]
    gt: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, num_args = 2, value_names = ["DY", "DX"], default_values_t = [1.0, 1.0])]
    spacing: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    size: usize,
    #[arg(long)]
    components: usize,
    #[arg(long)]
    holes: usize,
    #[arg(long)]
    thickness: usize,
    #[arg(long)]
    breaks: usize,
    #[arg(long, default_value_t = 1.0)]
    blur_radius: f64,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 1)]
    count: usize,
}

#[derive(Debug)]
enum CliError {
    Data(cortopo_core::Error),
    Io(PathBuf, std::io::Error),
    Usage(String),
}

impl CliError {
    fn code(&self) -> &'static str {
        match self {
            CliError::Data(e) => e.code(),
            CliError::Io(..) => "IO",
            CliError::Usage(_) => "USAGE",
        }
    }

    fn detail(&self) -> String {
        match self {
            CliError::Data(e) => e.to_string(),
            CliError::Io(path, e) => format!("{}: {e}", path.display()),
            CliError::Usage(msg) => msg.clone(),
        }
    }
}

impl From<cortopo_core::Error> for CliError {
    fn from(e: cortopo_core::Error) -> Self {
        CliError::Data(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn read_map(path: &Path) -> CliResult<LikelihoodMap> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    Ok(read_raster_auto(&bytes)?)
}

fn read_mask(path: &Path, threshold: f64) -> CliResult<BinaryMask> {
    Ok(read_map(path)?.binarize(threshold))
}

/// Writes through a sibling temporary file so readers never see a partial
/// output.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io_err = |e| CliError::Io(path.to_path_buf(), e);
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

fn loss_json(value: f64) -> String {
    let number = serde_json::Value::from(value);
    format!("{{\"topo_loss\": {number}}}")
}

fn metrics_json(report: &MetricsReport) -> String {
    serde_json::to_string(report).expect("metrics report serializes")
}

fn run_parallel<T: Send>(
    jobs: usize,
    count: usize,
    task: impl Fn(usize) -> CliResult<T> + Sync + Send,
) -> CliResult<Vec<T>> {
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    if jobs == 1 || count <= 1 {
        return (0..count).map(task).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(task).collect()
    })
}

fn check_pairs(pred: &[PathBuf], gt: &[PathBuf]) -> CliResult<()> {
    if pred.len() != gt.len() {
        return Err(CliError::Data(cortopo_core::Error::LengthMismatch(
            pred.len(),
            gt.len(),
        )));
    }
    Ok(())
}

fn cmd_diagram(input: &Path, out: &Path, dims: &Dims) -> CliResult<String> {
    let map = read_map(input)?;
    let diagram = compute_persistence(&map);
    write_atomic(out, &write_diagram_csv(&diagram, &dims.0))?;
    Ok(String::new())
}

fn cmd_loss(args: &LossArgs) -> CliResult<String> {
    check_pairs(&args.pred, &args.gt)?;
    if !args.grad_out.is_empty() && args.grad_out.len() != args.pred.len() {
        return Err(CliError::Usage(format!(
            "--grad-out given {} times for {} pairs",
            args.grad_out.len(),
            args.pred.len()
        )));
    }
    let config = TopoLossConfig::new(&args.dims.0, args.weight)?;
    let lines = run_parallel(args.jobs, args.pred.len(), |i| {
        let pred = read_map(&args.pred[i])?;
        let gt = read_mask(&args.gt[i], DEFAULT_THRESHOLD)?;
        let result = topo_loss(&pred, &gt, &config)?;
        if let Some(path) = args.grad_out.get(i) {
            let grad = gradient_f32r(pred.height(), pred.width(), &result.grad);
            write_atomic(path, &grad)?;
        }
        Ok(loss_json(result.value))
    })?;
    Ok(lines.join("\n") + "\n")
}

/// Gradients are not probabilities, so they bypass `LikelihoodMap`
/// validation but share its `F32R` layout.
fn gradient_f32r(height: usize, width: usize, values: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 4 * values.len());
    out.extend_from_slice(b"F32R");
    out.extend_from_slice(&(height as u32).to_le_bytes());
    out.extend_from_slice(&(width as u32).to_le_bytes());
    for &v in values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

fn cmd_metrics(args: &MetricsArgs) -> CliResult<String> {
    check_pairs(&args.pred, &args.gt)?;
    let spacing = Spacing::new(args.spacing[0], args.spacing[1])?;
    let lines = run_parallel(args.jobs, args.pred.len(), |i| {
        let pred = read_map(&args.pred[i])?;
        let gt = read_mask(&args.gt[i], DEFAULT_THRESHOLD)?;
        Ok(metrics_json(&evaluate(
            &pred,
            &gt,
            spacing,
            args.threshold,
        )?))
    })?;
    Ok(lines.join("\n") + "\n")
}

fn cmd_betti(mask: &Path, threshold: f64) -> CliResult<String> {
    let betti = betti_numbers(&read_mask(mask, threshold)?);
    Ok(format!("b0={} b1={}\n", betti.b0, betti.b1))
}

fn cmd_synth(args: &SynthArgs) -> CliResult<String> {
    let dir = &args.out_dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.clone(), e))?;
    let mut manifest = String::new();
    for i in 0..args.count {
        let spec = RibbonSpec {
            seed: args.seed.wrapping_add(i as u64),
            size: args.size,
            components: args.components,
            holes: args.holes,
            thickness: args.thickness,
            break_count: args.breaks,
            blur_radius: args.blur_radius,
        };
        let sample = gen_ribbon(&spec)?;
        let id = format!("ribbon-{i:04}");
        let entry = ManifestEntry {
            image_path: format!("{id}_image.f32r"),
            gt_path: format!("{id}_gt.pgm"),
            degraded_path: format!("{id}_degraded.f32r"),
            id,
            spec,
        };
        write_atomic(
            &dir.join(&entry.image_path),
            &write_raster(&sample.clean, RasterFormat::F32r),
        )?;
        write_atomic(&dir.join(&entry.gt_path), &write_mask_pgm(&sample.gt))?;
        write_atomic(
            &dir.join(&entry.degraded_path),
            &write_raster(&sample.degraded, RasterFormat::F32r),
        )?;
        manifest.push_str(&serde_json::to_string(&entry).expect("manifest entry serializes"));
        manifest.push('\n');
    }
    write_atomic(&dir.join("manifest.jsonl"), manifest.as_bytes())?;
    Ok(String::new())
}

fn dispatch(command: &Command) -> CliResult<String> {
    match command {
        Command::Diagram { input, out, dims } => cmd_diagram(input, out, dims),
        Command::Loss(args) => cmd_loss(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Betti { mask, threshold } => cmd_betti(mask, *threshold),
        Command::Synth(args) => cmd_synth(args),
    }
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
                2
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
                0
            };
        }
    };
    match dispatch(&cli.command) {
        Ok(output) => {
            if stdout.write_all(output.as_bytes()).is_err() {
                return 1;
            }
            0
        }
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(e) => {
            let _ = writeln!(stderr, "ERROR {}: {}", e.code(), e.detail());
            1
        }
    }
}
