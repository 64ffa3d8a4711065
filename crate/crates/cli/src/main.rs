use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use egoseg_cli::commands::{bench, composite, evaluate, extract, heatmap, segment};
use egoseg_cli::{CliError, CliResult, Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "egoseg",
    version,
    about = "Egocentric arm segmentation dataset and evaluation toolkit"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for background assignment.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores). `bench` is always single-threaded.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Keep every N-th frame during extraction.
    #[arg(long, global = true)]
    stride: Option<usize>,
    /// Nearest-neighbor resize predictions whose size differs from groundtruth.
    #[arg(long, global = true)]
    resize_pred: bool,
    /// Backgrounds drawn per foreground.
    #[arg(long, global = true)]
    copies: Option<u32>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Chroma-key frames -> groundtruth masks, masked foregrounds and a QC report.
    Extract {
        frames_dir: PathBuf,
        out_dir: PathBuf,
    },
    /// Foregrounds + masks + square backgrounds -> semi-synthetic dataset.
    Composite {
        fg_dir: PathBuf,
        mask_dir: PathBuf,
        bg_dir: PathBuf,
        out_dir: PathBuf,
    },
    /// Run the configured baseline segmenter over a directory of images.
    Segment {
        input_dir: PathBuf,
        out_dir: PathBuf,
    },
    /// Score predictions listed in a JSON-lines pairs file.
    Evaluate {
        pairs_file: PathBuf,
        out_dir: PathBuf,
    },
    /// Spatial occurrence heatmap of a directory of masks.
    Heatmap {
        masks_dir: PathBuf,
        out_path: PathBuf,
        /// Reference size as WIDTHxHEIGHT (default: first mask's size).
        #[arg(long, value_parser = parse_size)]
        size: Option<(u32, u32)>,
    },
    /// Single-threaded per-image segmentation latency.
    Bench {
        #[arg(long, value_enum, default_value = "skin")]
        kind: bench::BenchKind,
        /// Image size as WIDTHxHEIGHT.
        #[arg(long, value_parser = parse_size, default_value = "720x720")]
        size: (u32, u32),
        #[arg(long, default_value_t = 100)]
        iterations: usize,
        /// Also write the result JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the effective configuration as TOML.
    Config,
}

fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got {s:?}"))?;
    let w: u32 = w.trim().parse().map_err(|e| format!("width: {e}"))?;
    let h: u32 = h.trim().parse().map_err(|e| format!("height: {e}"))?;
    Ok((w, h))
}

fn print_json<T: serde::Serialize>(value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    let g = &cli.global;
    let overrides = Overrides {
        seed: g.seed,
        threads: g.threads,
        stride: g.stride,
        resize_pred: g.resize_pred,
        copies: g.copies,
    };
    let cfg = RunConfig::load_or_default(g.config.as_deref())?.apply(&overrides)?;

    match cli.command {
        Command::Extract {
            frames_dir,
            out_dir,
        } => {
            let r = extract::run(&frames_dir, &out_dir, &cfg)?;
            eprintln!(
                "extract: {} frames selected, {} accepted, {} rejected, {} failed",
                r.frames_selected, r.accepted, r.rejected, r.failed
            );
        }
        Command::Composite {
            fg_dir,
            mask_dir,
            bg_dir,
            out_dir,
        } => {
            let r = composite::run(&fg_dir, &mask_dir, &bg_dir, &out_dir, &cfg)?;
            eprintln!(
                "composite: {} manifest entries, {} rejected, {} missing",
                r.manifest_entries, r.rejected, r.missing
            );
        }
        Command::Segment { input_dir, out_dir } => {
            let r = segment::run(&input_dir, &out_dir, &cfg)?;
            eprintln!(
                "segment: {} masks written, {} failures",
                r.written.len(),
                r.failures.len()
            );
        }
        Command::Evaluate {
            pairs_file,
            out_dir,
        } => {
            let s = evaluate::run(&pairs_file, &out_dir, &cfg)?;
            let md = egoseg_core::report(&s.datasets, egoseg_core::ReportFormat::Markdown)?;
            print!("{md}");
        }
        Command::Heatmap {
            masks_dir,
            out_path,
            size,
        } => {
            let h = heatmap::run(&masks_dir, &out_path, size, &cfg)?;
            eprintln!("heatmap: {} masks -> {}", h.n_masks(), out_path.display());
        }
        Command::Bench {
            kind,
            size,
            iterations,
            out,
        } => {
            let r = bench::run(kind, size.0, size.1, iterations, &cfg)?;
            print_json(&r)?;
            if let Some(path) = out {
                egoseg_core::compositor::write_json(&path, &r)?;
            }
        }
        Command::Config => {
            let text = toml::to_string(&cfg).map_err(|e| CliError::Config(e.to_string()))?;
            print!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EGOSEG_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("egoseg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
