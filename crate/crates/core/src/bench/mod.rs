//! Benchmark harness: elimination stages, the combination run, metrics,
//! reports and localization.

pub mod accuracy;
pub mod cache;
pub mod combo;
pub mod config;
pub mod eliminate;
pub mod figure;
pub mod localize;
pub mod pose;
pub mod report;
pub mod run;

pub use accuracy::{compute_accuracy, matches_per_second, AccuracyCounts};
pub use cache::{run_combination_cached, PairCache};
pub use combo::{combination_matrix, CombinationId};
pub use config::{BenchConfig, EliminationConfig, MatcherConfig, MaxDistance};
pub use eliminate::{histogram_prefilter, keypoint_count_filter, HistogramComparison};
pub use figure::{rank, scatter, Metric, Ranking, ScatterPoint, YawCase};
pub use localize::{localize, CandidatePolicy, GridGeometry, LocationCube};
pub use pose::{Case, DatasetManifest, PoseLabel, PositivePolicy, QueryEntry, TemplateEntry};
pub use report::{ReportRow, RunStamp, StatsDump};
pub use run::{eliminate, run_combination, CombinationResult, Dataset, Elimination, PairRecord};
