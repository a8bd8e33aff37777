//! `cmf` - continuous max-flow reconstruction of cyclic-intensity images.
//!
//! Exit codes: 0 on success, 2 when a solver finished without reaching its
//! tolerance (outputs are still written), 1 on usage or I/O errors.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use cyclic_maxflow::data_term::energy;
use cyclic_maxflow::solver::TraceMetrics;
use cyclic_maxflow::CyclicScalarField;
use cyclic_maxflow_cli::config::ConfigMap;
use cyclic_maxflow_cli::synth::{write_synth, SynthParams};
use cyclic_maxflow_cli::{format, run, trace};

#[derive(Parser)]
#[command(
    name = "cmf",
    version,
    about = "Continuous max-flow reconstruction of images with cyclic intensities (phase, hue)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct a denoised angle map from an observation
    Reconstruct(Box<ReconstructArgs>),
    /// Generate a synthetic ground truth and noisy complex-pair observation
    Synth(SynthArgs),
    /// Evaluate the primal energy of a labeling density against cost fields
    Energy(EnergyArgs),
    /// Re-emit a convergence trace as plot-ready CSV
    TracePlotData(TraceArgs),
}

#[derive(Args)]
struct ReconstructArgs {
    /// key=value config file; command-line flags override its entries
    #[arg(long)]
    config: Option<PathBuf>,
    /// Observation input (real part, colour image, or raw angle field)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Imaginary part of a complex-pair observation
    #[arg(long)]
    imag: Option<PathBuf>,
    /// Input kind: complex-pair | rgb | raw-field
    #[arg(long)]
    kind: Option<String>,
    /// Per-voxel confidence weights for raw-field inputs
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Number of cyclic intensity bins
    #[arg(long)]
    n_theta: Option<usize>,
    /// Solver: al | pf
    #[arg(long)]
    solver: Option<String>,
    /// Augmentation weight / proximal temperature
    #[arg(long)]
    c: Option<f64>,
    /// Flow update step size
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    log_every: Option<usize>,
    /// Geometric c annealing factor (pseudo-flow; needs --anneal-floor)
    #[arg(long)]
    anneal_factor: Option<f64>,
    #[arg(long)]
    anneal_floor: Option<f64>,
    /// Data-term distance power (1 or 2)
    #[arg(long)]
    power: Option<f64>,
    /// Data-term scale
    #[arg(long)]
    scale: Option<f64>,
    /// Constant smoothness weight
    #[arg(long)]
    smoothness: Option<f64>,
    /// Smoothness field file (spatial fields broadcast over theta)
    #[arg(long)]
    smoothness_map: Option<PathBuf>,
    #[arg(long)]
    out_labels: Option<PathBuf>,
    #[arg(long)]
    out_u: Option<PathBuf>,
    #[arg(long)]
    out_trace: Option<PathBuf>,
    /// 8-bit preview PNG of the label map
    #[arg(long)]
    out_preview: Option<PathBuf>,
    /// Preview mode: gray | hue
    #[arg(long)]
    preview: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    /// Spatial dims, e.g. 64 or 64x64 or 32x32x8
    #[arg(long, default_value = "64x64")]
    dims: String,
    /// Pattern: two-phase | ramp | disk
    #[arg(long, default_value = "two-phase")]
    pattern: String,
    /// Wrapped Gaussian angle noise sigma (radians)
    #[arg(long, default_value_t = 0.3)]
    noise: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = -std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
    phase_a: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2, allow_hyphen_values = true)]
    phase_b: f64,
    /// Disk radius as a fraction of the smallest extent
    #[arg(long, default_value_t = 0.3)]
    radius: f64,
    /// Output prefix; writes PREFIX_truth.cmf, PREFIX_real.cmf,
    /// PREFIX_imag.cmf, PREFIX.meta
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct EnergyArgs {
    /// Labeling density (cyclic field file)
    #[arg(long)]
    u: PathBuf,
    /// Data cost (cyclic field file)
    #[arg(long)]
    d: PathBuf,
    /// Smoothness cost (cyclic field file)
    #[arg(long, conflicts_with = "s_value")]
    s: Option<PathBuf>,
    /// Constant smoothness cost
    #[arg(long)]
    s_value: Option<f64>,
}

#[derive(Args)]
struct TraceArgs {
    /// Trace CSV written by `reconstruct`
    #[arg(long)]
    trace: PathBuf,
    /// Comma-separated column subset, e.g. iteration,energy
    #[arg(long)]
    columns: Option<String>,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let code = match cli_main() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            1
        }
    };
    std::process::exit(code);
}

fn cli_main() -> Result<i32> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            e.print().ok();
            return Ok(code);
        }
    };

    if let Ok(threads) = std::env::var("CMF_THREADS") {
        let n: usize = threads
            .parse()
            .context("CMF_THREADS must be a positive integer")?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }

    match cli.command {
        Command::Reconstruct(args) => reconstruct(*args),
        Command::Synth(args) => synth(args),
        Command::Energy(args) => energy_cmd(args),
        Command::TracePlotData(args) => trace_plot_data(args),
    }
}

fn reconstruct(args: ReconstructArgs) -> Result<i32> {
    let mut map = match &args.config {
        Some(path) => ConfigMap::from_file(path)?,
        None => ConfigMap::default(),
    };
    let mut set = |key: &str, value: Option<String>| -> Result<()> {
        if let Some(v) = value {
            map.set(key, &v)?;
        }
        Ok(())
    };
    set("input", args.input.map(|p| p.display().to_string()))?;
    set("imag", args.imag.map(|p| p.display().to_string()))?;
    set("kind", args.kind)?;
    set("weights", args.weights.map(|p| p.display().to_string()))?;
    set("n_theta", args.n_theta.map(|v| v.to_string()))?;
    set("solver", args.solver)?;
    set("c", args.c.map(|v| v.to_string()))?;
    set("tau", args.tau.map(|v| v.to_string()))?;
    set("max_iters", args.max_iters.map(|v| v.to_string()))?;
    set("tolerance", args.tolerance.map(|v| v.to_string()))?;
    set("log_every", args.log_every.map(|v| v.to_string()))?;
    set("anneal_factor", args.anneal_factor.map(|v| v.to_string()))?;
    set("anneal_floor", args.anneal_floor.map(|v| v.to_string()))?;
    set("power", args.power.map(|v| v.to_string()))?;
    set("scale", args.scale.map(|v| v.to_string()))?;
    set("smoothness", args.smoothness.map(|v| v.to_string()))?;
    set(
        "smoothness_map",
        args.smoothness_map.map(|p| p.display().to_string()),
    )?;
    set(
        "out_labels",
        args.out_labels.map(|p| p.display().to_string()),
    )?;
    set("out_u", args.out_u.map(|p| p.display().to_string()))?;
    set("out_trace", args.out_trace.map(|p| p.display().to_string()))?;
    set(
        "out_preview",
        args.out_preview.map(|p| p.display().to_string()),
    )?;
    set("preview", args.preview)?;

    let cfg = map.into_run_config()?;
    let outcome = run(&cfg)?;
    let result = &outcome.result;
    let last = result.trace.records.last().expect("trace is never empty");
    println!(
        "solver={} iterations={} converged={} energy={}",
        cfg.solver, last.iteration, result.converged, last.energy
    );
    match last.metrics {
        TraceMetrics::Al { mean_g, max_g } => println!("mean_G={mean_g} max_G={max_g}"),
        TraceMetrics::Pf { objective, max_du } => {
            println!("pf_objective={objective} max_du={max_du}")
        }
    }
    for path in &outcome.written {
        println!("wrote {}", path.display());
    }
    if result.converged {
        Ok(0)
    } else {
        eprintln!(
            "warning: not converged after {} iterations (tolerance {})",
            last.iteration, cfg.solver_config.tolerance
        );
        Ok(2)
    }
}

fn parse_dims(text: &str) -> Result<Vec<usize>> {
    text.split('x')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .context("dims must look like 64 or 64x64")
        })
        .collect()
}

fn synth(args: SynthArgs) -> Result<i32> {
    let params = SynthParams {
        dims: parse_dims(&args.dims)?,
        pattern: args.pattern.parse()?,
        noise_sigma: args.noise,
        seed: args.seed,
        phase_a: args.phase_a,
        phase_b: args.phase_b,
        radius: args.radius,
    };
    let files = write_synth(&args.out_prefix, &params)?;
    for path in [&files.truth, &files.real, &files.imag, &files.meta] {
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn energy_cmd(args: EnergyArgs) -> Result<i32> {
    let u = format::read_cyclic(&args.u).context("loading u")?;
    let d = format::read_cyclic(&args.d).context("loading d")?;
    let s = match (&args.s, args.s_value) {
        (Some(path), None) => format::read_cyclic(path).context("loading s")?,
        (None, Some(value)) => {
            anyhow::ensure!(value >= 0.0, "s-value must be non-negative");
            CyclicScalarField::constant(u.grid(), value)
        }
        _ => anyhow::bail!("give exactly one of --s or --s-value"),
    };
    let report = energy(&u, &d, &s).map_err(|e| anyhow::anyhow!("{e}"))?;
    println!("data_energy={}", report.data_energy);
    println!("smoothness_energy={}", report.smoothness_energy);
    println!("total={}", report.total);
    Ok(0)
}

fn trace_plot_data(args: TraceArgs) -> Result<i32> {
    let data = trace::read_trace(&args.trace)?;
    let columns: Option<Vec<String>> = args
        .columns
        .map(|c| c.split(',').map(|s| s.trim().to_string()).collect());
    match &args.out {
        Some(path) => {
            let mut file = std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            trace::plot_data(&data, columns.as_deref(), &mut file)?;
        }
        None => {
            let stdout = std::io::stdout();
            trace::plot_data(&data, columns.as_deref(), &mut stdout.lock())?;
        }
    }
    Ok(0)
}
