use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use germkit_cli::config::{ExperimentConfig, Task};
use germkit_cli::{run_to_dir, verify_bundle, OUTPUT_ENV};
use germkit_core::MapSpec;

#[derive(Parser)]
#[command(name = "germkit", version, about = "Normal forms and quasiconformal diagnostics for planar map germs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Map spec JSON file (variant tag + numeric fields, complex as [re, im]).
    #[arg(long)]
    map: PathBuf,
    /// Output directory (defaults to $GERMKIT_OUT or ./germkit-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Emit SVG plots alongside the CSV/JSON artifacts.
    #[arg(long)]
    svg: bool,
    /// Iteration depth cap.
    #[arg(long)]
    depth: Option<usize>,
    /// Stopping tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Grid inner radius.
    #[arg(long)]
    r_min: Option<f64>,
    /// Grid outer radius.
    #[arg(long)]
    r_max: Option<f64>,
    /// Grid rings.
    #[arg(long)]
    rings: Option<usize>,
    /// Grid angles per ring.
    #[arg(long)]
    angles: Option<usize>,
    /// Disk radius for the control condition and Koenig motion.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a full experiment configuration file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: bool,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Classify the fixed point at 0.
    Classify(CommonArgs),
    /// Compute the Koenigs linearizer (attracting or repelling).
    Koenig(CommonArgs),
    /// Compute the Boettcher coordinate (superattracting).
    Boettcher(CommonArgs),
    /// Beltrami field, omega curve, and the integrability functional.
    Omega(CommonArgs),
    /// Build and check the holomorphic motion, then extend it.
    Motion(CommonArgs),
    /// Re-verify a previously written run directory.
    Verify { dir: PathBuf },
}

fn default_out() -> PathBuf {
    std::env::var_os(OUTPUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("germkit-out"))
}

fn load_map(path: &Path) -> anyhow::Result<MapSpec> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading map spec {}", path.display()))?;
    let map: MapSpec = serde_json::from_str(&text).context("parsing map spec")?;
    map.validate()?;
    Ok(map)
}

fn config_from_args(args: &CommonArgs, task: Task) -> anyhow::Result<ExperimentConfig> {
    let map = load_map(&args.map)?;
    let mut cfg = ExperimentConfig::new(map, task);
    cfg.emit_svg = args.svg;
    if let Some(depth) = args.depth {
        cfg.budget.max_iterations = depth;
    }
    if let Some(tol) = args.tol {
        cfg.budget.tolerance = tol;
    }
    if let Some(v) = args.r_min {
        cfg.grid.r_min = v;
    }
    if let Some(v) = args.r_max {
        cfg.grid.r_max = v;
    }
    if let Some(v) = args.rings {
        cfg.grid.rings = v;
    }
    if let Some(v) = args.angles {
        cfg.grid.angles = v;
    }
    if let Some(v) = args.delta {
        cfg.delta = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run_and_report(cfg: &ExperimentConfig, out: Option<&Path>) -> anyhow::Result<bool> {
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(default_out);
    let manifest = run_to_dir(cfg, &dir)?;
    for task in &manifest.tasks {
        match &task.error {
            Some(err) => println!("[{}] ERROR: {err}", task.name),
            None => {
                let status = if task.flags.iter().all(|f| f.pass) {
                    "PASS"
                } else {
                    "FAIL"
                };
                let detail: Vec<String> = task
                    .flags
                    .iter()
                    .map(|f| format!("{}={}{}", f.name, f.value, if f.pass { "" } else { " !" }))
                    .collect();
                println!("[{}] {status} ({})", task.name, detail.join(", "));
            }
        }
    }
    println!("wrote {} files to {}", manifest.files.len() + 1, dir.display());
    Ok(manifest.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run {
            config,
            out,
            svg,
            depth,
            tol,
        } => (|| -> anyhow::Result<bool> {
            let text = std::fs::read_to_string(config)
                .with_context(|| format!("reading config {}", config.display()))?;
            let mut cfg = ExperimentConfig::from_json(&text)?;
            if *svg {
                cfg.emit_svg = true;
            }
            if let Some(depth) = depth {
                cfg.budget.max_iterations = *depth;
            }
            if let Some(tol) = tol {
                cfg.budget.tolerance = *tol;
            }
            run_and_report(&cfg, out.as_deref())
        })(),
        Cmd::Classify(args) => config_from_args(args, Task::Classify)
            .and_then(|cfg| run_and_report(&cfg, args.out.as_deref())),
        Cmd::Koenig(args) => config_from_args(args, Task::Koenig)
            .and_then(|cfg| run_and_report(&cfg, args.out.as_deref())),
        Cmd::Boettcher(args) => config_from_args(args, Task::Boettcher)
            .and_then(|cfg| run_and_report(&cfg, args.out.as_deref())),
        Cmd::Omega(args) => config_from_args(args, Task::Omega)
            .and_then(|cfg| run_and_report(&cfg, args.out.as_deref())),
        Cmd::Motion(args) => config_from_args(args, Task::Motion)
            .and_then(|cfg| run_and_report(&cfg, args.out.as_deref())),
        Cmd::Verify { dir } => verify_bundle(dir).map(|report| {
            if report.ok {
                println!("verify: OK");
            } else {
                for p in &report.problems {
                    println!("verify: {p}");
                }
            }
            report.ok
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
