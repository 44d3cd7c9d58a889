//! The three subcommands as library functions.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use featbench_core::bench::figure::{rank, ranking_csv, scatter, scatter_csv, Metric, Ranking, YawCase};
use featbench_core::bench::report::{csv_string, ReportRow, RunStamp, StatsDump};
use featbench_core::bench::{
    combination_matrix, eliminate, run_combination, run_combination_cached, BenchConfig, CombinationId,
    CombinationResult, Dataset, DatasetManifest, PairCache,
};
use featbench_core::Error;
use serde::Serialize;

use crate::synthetic::{generate, SyntheticSpec};
use crate::CliError;

pub const CSV_NAME: &str = "results.csv";
pub const STATS_NAME: &str = "stats.json";
pub const RUN_NAME: &str = "run.json";
pub const CACHE_NAME: &str = "pair_cache.jsonl";
pub const RANKING_NAME: &str = "ranking.json";

type Result<T> = std::result::Result<T, CliError>;

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| {
        CliError::Pipeline(Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| {
        CliError::Pipeline(Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })
    })
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| CliError::Pipeline(Error::Serialization(e.to_string())))
}

pub fn cmd_generate_synthetic(output_dir: &Path, spec: &SyntheticSpec) -> Result<DatasetManifest> {
    Ok(generate(output_dir, spec)?)
}

/// `all`, or a comma-separated list such as `FAST-SURF,ORB-BRIEF`.
pub fn parse_combinations(s: &str) -> Result<Vec<CombinationId>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(combination_matrix());
    }
    let mut out: Vec<CombinationId> = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let c: CombinationId = part.parse()?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("no combinations selected".into()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub combinations: Vec<CombinationId>,
    pub bench: BenchConfig,
    pub output_dir: PathBuf,
    /// Reuse and extend the per-pair cache in the output directory.
    pub cache: bool,
}

impl RunConfig {
    pub fn new(manifest: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            manifest: manifest.into(),
            combinations: combination_matrix(),
            bench: BenchConfig::default(),
            output_dir: output_dir.into(),
            cache: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.manifest.is_file() {
            return Err(CliError::Config(format!("manifest {} does not exist", self.manifest.display())));
        }
        if self.combinations.is_empty() {
            return Err(CliError::Config("no combinations selected".into()));
        }
        Ok(self.bench.validate()?)
    }
}

#[derive(Serialize)]
struct EliminationMeta {
    queries: usize,
    kept: usize,
    rejected: Vec<String>,
    pairs: usize,
}

#[derive(Serialize)]
struct RunMeta<'a> {
    tool: &'static str,
    version: &'static str,
    config_hash: String,
    seed: u64,
    timing_mode: &'static str,
    workers: usize,
    manifest: String,
    combinations: Vec<String>,
    config: &'a BenchConfig,
    elimination: EliminationMeta,
    decode_time_sec: f64,
    wall_time_sec: f64,
}

pub struct RunSummary {
    pub results: Vec<CombinationResult>,
    /// Combinations served entirely from the pair cache.
    pub cached: Vec<CombinationId>,
    pub csv_path: PathBuf,
    pub stats_path: PathBuf,
    pub run_path: PathBuf,
}

/// Eliminate, run every selected combination and write the CSV table, the
/// stats dump and the run metadata. `progress` receives one line per
/// finished combination.
pub fn cmd_run(cfg: &RunConfig, mut progress: impl FnMut(&str)) -> Result<RunSummary> {
    cfg.validate()?;
    let wall = Instant::now();
    let manifest = DatasetManifest::load(&cfg.manifest)?;
    let base = cfg.manifest.parent().unwrap_or(Path::new(".")).to_path_buf();
    let ds = Dataset::load(manifest)?;
    let elim = eliminate(&ds, &cfg.bench.elimination)?;
    create_dir(&cfg.output_dir)?;
    let mut cache = if cfg.cache {
        Some(PairCache::open(cfg.output_dir.join(CACHE_NAME))?)
    } else {
        None
    };

    let mut results = Vec::with_capacity(cfg.combinations.len());
    let mut cached = Vec::new();
    for &combo in &cfg.combinations {
        let (r, hit) = match cache.as_mut() {
            Some(c) => run_combination_cached(combo, &ds, &elim, &cfg.bench, c)?,
            None => (run_combination(combo, &ds, &elim, &cfg.bench)?, false),
        };
        progress(&format!(
            "{combo}: {:.3} s, accuracy {:.2}%, {} matches{}",
            r.total_time,
            r.accuracy,
            r.total_matches,
            if hit { " (cached)" } else { "" }
        ));
        if hit {
            cached.push(combo);
        }
        results.push(r);
    }

    let stamp = RunStamp {
        config_hash: cfg.bench.hash(),
        seed: cfg.bench.seed,
        timing_mode: cfg.bench.timing_mode().to_string(),
    };
    let rows: Vec<ReportRow> = results.iter().map(ReportRow::from).collect();
    let csv_path = cfg.output_dir.join(CSV_NAME);
    write(&csv_path, csv_string(&rows, &stamp)?)?;
    let stats_path = cfg.output_dir.join(STATS_NAME);
    write(&stats_path, StatsDump::build(&results, &ds, &stamp, &base).to_json()?)?;

    let meta = RunMeta {
        tool: "featbench",
        version: env!("CARGO_PKG_VERSION"),
        config_hash: stamp.config_hash.clone(),
        seed: stamp.seed,
        timing_mode: cfg.bench.timing_mode(),
        workers: cfg.bench.workers,
        manifest: cfg.manifest.to_string_lossy().into_owned(),
        combinations: cfg.combinations.iter().map(|c| c.to_string()).collect(),
        config: &cfg.bench,
        elimination: EliminationMeta {
            queries: ds.queries.len(),
            kept: elim.kept.len(),
            rejected: elim
                .rejected
                .iter()
                .map(|&q| {
                    let p = &ds.manifest.queries[q].path;
                    p.strip_prefix(&base).unwrap_or(p).to_string_lossy().into_owned()
                })
                .collect(),
            pairs: elim.pairs().count(),
        },
        decode_time_sec: ds.decode_time,
        wall_time_sec: wall.elapsed().as_secs_f64(),
    };
    let run_path = cfg.output_dir.join(RUN_NAME);
    write(&run_path, to_json(&meta)?)?;
    Ok(RunSummary {
        results,
        cached,
        csv_path,
        stats_path,
        run_path,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseRanking {
    pub case: String,
    pub ranking: Ranking,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportSummary {
    pub config_hash: String,
    pub seed: u64,
    pub scatter_files: Vec<PathBuf>,
    pub ranking_files: Vec<PathBuf>,
    pub rankings: Vec<CaseRanking>,
}

/// Per-yaw scatter data and distance-to-best rankings from a stats dump.
/// Yaw cases with no pairs are skipped; cases where no combination has every
/// ranking metric get scatter data but no ranking.
pub fn cmd_report(stats_path: &Path, axes: &[Metric], output_dir: &Path) -> Result<ReportSummary> {
    let dump = StatsDump::load(stats_path)?;
    if dump.combinations.is_empty() {
        return Err(CliError::Config(format!("{} holds no combinations", stats_path.display())));
    }
    if axes.is_empty() {
        return Err(CliError::Config("at least one ranking axis is needed".into()));
    }
    create_dir(output_dir)?;
    let stamp = (dump.config_hash.as_str(), dump.seed);
    let mut summary = ReportSummary {
        config_hash: dump.config_hash.clone(),
        seed: dump.seed,
        scatter_files: Vec::new(),
        ranking_files: Vec::new(),
        rankings: Vec::new(),
    };
    let mut by_case: BTreeMap<YawCase, Vec<_>> = BTreeMap::new();
    for case in YawCase::all() {
        let pts = scatter(&dump, case);
        if !pts.is_empty() {
            by_case.insert(case, pts);
        }
    }
    if by_case.is_empty() {
        return Err(CliError::Config(format!("{} holds no pair metrics", stats_path.display())));
    }
    for (case, pts) in &by_case {
        let path = output_dir.join(format!("scatter_{}.csv", case.label()));
        write(&path, scatter_csv(pts, stamp))?;
        summary.scatter_files.push(path);
        if let Ok(r) = rank(pts, axes) {
            let path = output_dir.join(format!("ranking_{}.csv", case.label()));
            write(&path, ranking_csv(&r, stamp))?;
            summary.ranking_files.push(path);
            summary.rankings.push(CaseRanking {
                case: case.to_string(),
                ranking: r,
            });
        }
    }
    if summary.rankings.is_empty() {
        return Err(CliError::Config(format!(
            "no combination in {} has every metric of {:?}",
            stats_path.display(),
            axes.iter().map(|m| m.name()).collect::<Vec<_>>()
        )));
    }
    let mut listed = summary.clone();
    for f in listed.scatter_files.iter_mut().chain(listed.ranking_files.iter_mut()) {
        *f = f.strip_prefix(output_dir).unwrap_or(f).to_path_buf();
    }
    write(&output_dir.join(RANKING_NAME), to_json(&listed)?)?;
    Ok(summary)
}
