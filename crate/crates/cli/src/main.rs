use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use featbench_cli::synthetic::{SyntheticSpec, DEFAULT_CONTRAST, DEFAULT_HEIGHT, DEFAULT_SEED, DEFAULT_WIDTH};
use featbench_cli::{cmd_generate_synthetic, cmd_report, cmd_run, parse_combinations, CliError, RunConfig};
use featbench_core::bench::figure::Metric;
use featbench_core::bench::{BenchConfig, PositivePolicy};

#[derive(Parser)]
#[command(name = "featbench", version, about = "Detector/descriptor matching benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic pose-grid dataset and its manifest.
    GenerateSynthetic(GenerateArgs),
    /// Run the benchmark over a manifest.
    Run(RunArgs),
    /// Turn a stats dump into scatter data and rankings.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, env = "FEATBENCH_OUTPUT_DIR")]
    output_dir: PathBuf,
    #[arg(long, default_value_t = 5)]
    points: usize,
    #[arg(long, default_value_t = DEFAULT_WIDTH)]
    width: usize,
    #[arg(long, default_value_t = DEFAULT_HEIGHT)]
    height: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_CONTRAST)]
    contrast: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    PoseTolerant,
    SameHeight,
    Exact,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, env = "FEATBENCH_OUTPUT_DIR")]
    output_dir: PathBuf,
    /// `all` or a comma-separated list such as `FAST-SURF,ORB-BRIEF`.
    #[arg(long, default_value = "all")]
    combinations: String,
    /// JSON file with a full benchmark config; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = "FEATBENCH_WORKERS")]
    workers: Option<usize>,
    /// Seed of the BRIEF/ORB sampling pattern.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long)]
    cross_check: bool,
    #[arg(long)]
    min_correct: Option<usize>,
    #[arg(long)]
    max_distance_256: Option<f64>,
    #[arg(long)]
    max_distance_512: Option<f64>,
    #[arg(long)]
    max_distance_real: Option<f64>,
    #[arg(long)]
    hysteresis_lower: Option<usize>,
    #[arg(long)]
    hysteresis_upper: Option<usize>,
    #[arg(long)]
    prefilter_threshold: Option<f64>,
    #[arg(long)]
    acceptance_threshold: Option<f64>,
    #[arg(long, value_enum)]
    positive_policy: Option<PolicyArg>,
    #[arg(long, default_value_t = 30)]
    max_yaw_diff: i32,
    #[arg(long)]
    fast_threshold: Option<u8>,
    #[arg(long)]
    orb_features: Option<usize>,
    #[arg(long)]
    sift_contrast: Option<f64>,
    #[arg(long)]
    surf_hessian: Option<f64>,
    #[arg(long)]
    brisk_threshold: Option<u8>,
    /// Ignore and do not write the per-pair cache.
    #[arg(long)]
    no_cache: bool,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    stats: PathBuf,
    #[arg(long, env = "FEATBENCH_OUTPUT_DIR")]
    output_dir: PathBuf,
    /// Ranking axes: n_correct, mean_angle_diff, min_distance.
    #[arg(long, value_delimiter = ',', default_value = "n_correct,mean_angle_diff,min_distance")]
    axes: Vec<String>,
}

fn bench_config(a: &RunArgs) -> Result<BenchConfig, CliError> {
    let mut c = match &a.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => BenchConfig::default(),
    };
    macro_rules! set {
        ($flag:expr, $field:expr) => {
            if let Some(v) = $flag {
                $field = v;
            }
        };
    }
    set!(a.workers, c.workers);
    set!(a.seed, c.seed);
    set!(a.ratio, c.matcher.ratio);
    set!(a.min_correct, c.matcher.min_correct);
    set!(a.max_distance_256, c.matcher.max_distance.bits_256);
    set!(a.max_distance_512, c.matcher.max_distance.bits_512);
    set!(a.max_distance_real, c.matcher.max_distance.real);
    set!(a.hysteresis_lower, c.elimination.hysteresis_lower);
    set!(a.hysteresis_upper, c.elimination.hysteresis_upper);
    set!(a.prefilter_threshold, c.elimination.prefilter_threshold);
    set!(a.acceptance_threshold, c.elimination.acceptance_threshold);
    set!(a.fast_threshold, c.detector.fast_threshold);
    set!(a.orb_features, c.detector.orb.n_features);
    set!(a.sift_contrast, c.detector.sift.contrast_thresh);
    set!(a.surf_hessian, c.detector.surf.hessian_thresh);
    set!(a.brisk_threshold, c.detector.brisk.fast_threshold);
    if a.cross_check {
        c.matcher.cross_check = true;
    }
    if let Some(p) = a.positive_policy {
        c.positive_policy = match p {
            PolicyArg::PoseTolerant => PositivePolicy::PoseTolerant { max_yaw_diff: a.max_yaw_diff },
            PolicyArg::SameHeight => PositivePolicy::SameHeight { max_yaw_diff: a.max_yaw_diff },
            PolicyArg::Exact => PositivePolicy::Exact,
        };
    }
    Ok(c)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GenerateSynthetic(a) => {
            let spec = SyntheticSpec {
                n_points: a.points,
                width: a.width,
                height: a.height,
                seed: a.seed,
                contrast: a.contrast,
            };
            let m = cmd_generate_synthetic(&a.output_dir, &spec)?;
            println!(
                "wrote {} templates and {} queries to {}",
                m.templates.len(),
                m.queries.len(),
                a.output_dir.display()
            );
        }
        Command::Run(a) => {
            let cfg = RunConfig {
                manifest: a.manifest.clone(),
                combinations: parse_combinations(&a.combinations)?,
                bench: bench_config(&a)?,
                output_dir: a.output_dir.clone(),
                cache: !a.no_cache,
            };
            let s = cmd_run(&cfg, |line| eprintln!("{line}"))?;
            println!("{}", s.csv_path.display());
            println!("{}", s.stats_path.display());
            println!("{}", s.run_path.display());
        }
        Command::Report(a) => {
            let axes = a
                .axes
                .iter()
                .map(|s| s.parse::<Metric>())
                .collect::<Result<Vec<_>, _>>()?;
            let s = cmd_report(&a.stats, &axes, &a.output_dir)?;
            for r in &s.rankings {
                println!("{}: best {}, worst {}", r.case, r.ranking.best, r.ranking.worst);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("featbench: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
