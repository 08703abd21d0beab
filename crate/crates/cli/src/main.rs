use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use motcom::combiner::{MeanKind, Weights};
use motcom::occlusion::OcclusionMode;
use motcom::rank::load_score_table;
use motcom::report::{
    format_rank_table, plot_metrics, rank_metrics, read_metric_table, run_compute, write_outputs,
    write_rank_outputs, BackendChoice, RunConfig,
};

#[derive(Parser)]
#[command(name = "motcom", version, about = "Complexity metrics for multi-object tracking sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute OCOM, MCOM, VCOM and MOTCOM for every sequence under the data roots
    Compute(ComputeArgs),
    /// Compare metric rankings against tracker scores
    Rank(RankArgs),
    /// Write SVG scatter plots of metrics against tracker scores
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Auto,
    Test,
    Onnx,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mean {
    Arithmetic,
    Quadratic,
    Geometric,
    Harmonic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Occlusion {
    /// Use annotated visibility when every target row has it
    Annotated,
    /// Always derive occlusion from box geometry
    Computed,
}

#[derive(Args)]
struct ComputeArgs {
    /// Dataset roots containing sequence directories with gt/gt.txt
    #[arg(long, num_args = 1.., required_unless_present = "config")]
    data: Vec<PathBuf>,
    /// JSON run configuration; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip the visual metric
    #[arg(long)]
    no_vcom: bool,
    #[arg(long, value_enum)]
    backend: Option<Backend>,
    /// ONNX embedding model; its metadata is read from the .json next to it
    #[arg(long, env = "MOTCOM_MODEL")]
    model: Option<PathBuf>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Sub-metric weights as o,m,v
    #[arg(long)]
    weights: Option<Weights>,
    #[arg(long, value_enum)]
    mean: Option<Mean>,
    #[arg(long, value_enum)]
    occlusion: Option<Occlusion>,
    /// Temporal step for motion prediction
    #[arg(long)]
    beta: Option<u32>,
    /// Reuse embeddings stored under <out>/cache
    #[arg(long)]
    cache: bool,
    /// Only sequences whose directory name matches one of these globs
    #[arg(long)]
    include: Vec<String>,
    #[arg(long)]
    exclude: Vec<String>,
    /// Tracker scores; when given, rank tables and plots are written too
    #[arg(long)]
    scores: Option<PathBuf>,
    /// Score column used for the rank table
    #[arg(long, default_value = "hota")]
    metric: String,
}

#[derive(Args)]
struct RankArgs {
    /// summary.csv, or the output directory of a compute run
    #[arg(long)]
    reports: PathBuf,
    #[arg(long)]
    scores: PathBuf,
    /// Score column to rank against
    #[arg(long, default_value = "hota")]
    metric: String,
    /// Metric columns to compare (default: all)
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    reports: PathBuf,
    #[arg(long)]
    scores: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_delimiter = ',')]
    columns: Vec<String>,
    /// Score columns to plot against (default: all)
    #[arg(long, value_delimiter = ',')]
    score_columns: Vec<String>,
}

fn summary_path(reports: &Path) -> PathBuf {
    if reports.is_dir() {
        reports.join("summary.csv")
    } else {
        reports.to_path_buf()
    }
}

fn run_config(args: &ComputeArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if !args.data.is_empty() {
        cfg.data = args.data.clone();
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    if args.no_vcom {
        cfg.compute_vcom = false;
    }
    if let Some(b) = args.backend {
        cfg.backend = match b {
            Backend::Auto => BackendChoice::Auto,
            Backend::Test => BackendChoice::Test,
            Backend::Onnx => BackendChoice::Onnx,
        };
    }
    if args.model.is_some() {
        cfg.model = args.model.clone();
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    if let Some(w) = args.weights {
        cfg.weights = w;
    }
    if let Some(m) = args.mean {
        cfg.mean = match m {
            Mean::Arithmetic => MeanKind::Arithmetic,
            Mean::Quadratic => MeanKind::Quadratic,
            Mean::Geometric => MeanKind::Geometric,
            Mean::Harmonic => MeanKind::Harmonic,
        };
    }
    if let Some(o) = args.occlusion {
        cfg.occlusion = match o {
            Occlusion::Annotated => OcclusionMode::PreferAnnotated,
            Occlusion::Computed => OcclusionMode::ForceComputed,
        };
    }
    if let Some(beta) = args.beta {
        cfg.motion.beta = beta;
    }
    cfg.cache |= args.cache;
    cfg.include.extend(args.include.iter().cloned());
    cfg.exclude.extend(args.exclude.iter().cloned());
    Ok(cfg)
}

fn rank_and_plot(summary: &Path, scores: &Path, metric: &str, columns: &[String], out: &Path) -> Result<()> {
    let metrics = read_metric_table(summary).with_context(|| format!("reading {}", summary.display()))?;
    let scores = load_score_table(scores).with_context(|| format!("reading {}", scores.display()))?;
    let ranked = rank_metrics(&metrics, &scores, metric, columns)?;
    print!("{}", format_rank_table(&ranked));
    write_rank_outputs(&ranked, out)?;
    plot_metrics(&metrics, &scores, &out.join("plots"), columns, &[])?;
    Ok(())
}

fn compute(args: ComputeArgs) -> Result<ExitCode> {
    let cfg = run_config(&args)?;
    let report = run_compute(&cfg)?;
    let (json, csv) = write_outputs(&report, &cfg.out)?;
    for s in &report.sequences {
        let vcom = s.visual.as_ref().map_or("-".to_string(), |v| format!("{:.4}", v.vcom));
        println!(
            "{:<20} ocom {:.4}  mcom {:.4}  vcom {vcom}  motcom {:.4}",
            s.name, s.occlusion.ocom, s.motion.mcom, s.motcom.motcom
        );
    }
    log::info!("wrote {} and {}", json.display(), csv.display());
    if let Some(scores) = &args.scores {
        rank_and_plot(&csv, scores, &args.metric, &[], &cfg.out)?;
    }
    if report.failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        for f in &report.failures {
            eprintln!("failed: {} ({})", f.sequence, f.reason);
        }
        Ok(ExitCode::FAILURE)
    }
}

fn main() -> Result<ExitCode> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Compute(args) => compute(args),
        Command::Rank(args) => {
            let summary = summary_path(&args.reports);
            let out = args.out.unwrap_or_else(|| {
                summary.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."))
            });
            let metrics = read_metric_table(&summary).with_context(|| format!("reading {}", summary.display()))?;
            let scores = load_score_table(&args.scores)?;
            let ranked = rank_metrics(&metrics, &scores, &args.metric, &args.columns)?;
            print!("{}", format_rank_table(&ranked));
            write_rank_outputs(&ranked, &out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot(args) => {
            let summary = summary_path(&args.reports);
            let metrics = read_metric_table(&summary)?;
            let scores = load_score_table(&args.scores)?;
            let written = plot_metrics(&metrics, &scores, &args.out, &args.columns, &args.score_columns)?;
            if written.is_empty() {
                bail!("no plots written");
            }
            for p in written {
                println!("{}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
