mod common;

use std::path::PathBuf;

use common::*;
use featbench_core::bench::*;
use featbench_core::histogram::{histogram_correlation, intensity_histogram};
use featbench_core::Image;
use proptest::prelude::*;
use rand::Rng;

fn pose(point: u32, h: u8, yaw: i32) -> PoseLabel {
    PoseLabel::new(point, h, yaw).unwrap()
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let mut num = 0.0;
    let (mut da, mut db) = (0.0, 0.0);
    for i in 0..a.len() {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma).powi(2);
        db += (b[i] - mb).powi(2);
    }
    num / (da * db).sqrt()
}

/// Ten textured templates; per template, its identical query and a copy
/// rotated by 15 degrees.
fn dataset(n: usize) -> Dataset {
    let mut manifest = DatasetManifest::default();
    let (mut templates, mut queries) = (Vec::new(), Vec::new());
    for p in 0..n as u32 {
        let img = textured(200, 160, 900 + p as u64);
        manifest.templates.push(TemplateEntry {
            path: PathBuf::from(format!("t{p}.pgm")),
            pose: pose(p, 1, 0),
            object: format!("object {p}"),
        });
        for (yaw, q) in [(0, img.clone()), (15, rotate(&img, -15.0))] {
            manifest.queries.push(QueryEntry {
                path: PathBuf::from(format!("q{p}_{yaw}.pgm")),
                pose: pose(p, 1, yaw),
            });
            queries.push(q);
        }
        templates.push(img);
    }
    Dataset::from_images(manifest, templates, queries).unwrap()
}

fn combo(s: &str) -> CombinationId {
    s.parse().unwrap()
}

#[test]
fn histogram_correlation_matches_pearson() {
    for seed in 0..30 {
        let a = noise(64, 48, seed);
        let b = textured(64, 48, seed + 100);
        let (ha, hb) = (intensity_histogram(&a).unwrap(), intensity_histogram(&b).unwrap());
        let want = pearson(ha.bins(), hb.bins());
        assert!((histogram_correlation(&ha, &hb) - want).abs() < 1e-9);
    }
}

#[test]
fn prefilter_fixtures() {
    let img = textured(120, 90, 3);
    let dark = Image::from_fn(120, 90, |x, y| ((x + y) % 100) as u8);
    let bright = Image::from_fn(120, 90, |x, y| 150 + ((x * 3 + y) % 100) as u8);
    assert_eq!(histogram_prefilter(&img, &[img.clone()], 0.9).unwrap(), vec![0]);
    assert!(histogram_prefilter(&dark, &[bright.clone()], 0.9).unwrap().is_empty());
    assert_eq!(histogram_prefilter(&dark, &[bright, dark.clone(), img], 0.9).unwrap(), vec![1]);
    assert!(histogram_prefilter(&dark, &[dark.clone()], 1.5).is_err());
}

#[test]
fn accuracy_counting_oracle() {
    let identical: Vec<Case> = (0..127)
        .map(|i| Case {
            template: i,
            query: i,
            positive: true,
        })
        .collect();
    let (c, pct) = compute_accuracy(&[true; 127], &identical).unwrap();
    assert_eq!((c.tp, c.tn, c.fp, c.fn_), (127, 0, 0, 0));
    assert_eq!(pct, 100.0);

    let mut r = rng(17);
    for _ in 0..100 {
        let n = r.random_range(1..300);
        let cases: Vec<Case> = (0..n)
            .map(|i| Case {
                template: 0,
                query: i,
                positive: r.random(),
            })
            .collect();
        let decisions: Vec<bool> = (0..n).map(|_| r.random()).collect();
        let (c, pct) = compute_accuracy(&decisions, &cases).unwrap();
        let mut want = [0usize; 4];
        for i in 0..n {
            let k = match (decisions[i], cases[i].positive) {
                (true, true) => 0,
                (false, false) => 1,
                (true, false) => 2,
                (false, true) => 3,
            };
            want[k] += 1;
        }
        assert_eq!([c.tp, c.tn, c.fp, c.fn_], want);
        assert!((pct - (want[0] + want[1]) as f64 / n as f64 * 100.0).abs() < 1e-12);
    }
    assert!(compute_accuracy(&[true], &[]).is_err());
}

#[test]
fn throughput() {
    assert_eq!(matches_per_second(0, 3.0).unwrap(), 0.0);
    assert_eq!(matches_per_second(1000, 2.0).unwrap(), 500.0);
    assert!(matches_per_second(10, 0.0).is_err());
}

#[test]
fn combination_matrix_has_the_table_rows() {
    let m = combination_matrix();
    assert_eq!(m.len(), 23);
    let names: Vec<String> = m.iter().map(|c| c.to_string()).collect();
    assert_eq!(&names[..5], ["ORB-BRIEF", "ORB-BRISK", "ORB-SIFT", "ORB-SURF", "ORB-ORB"]);
    assert!(!names.contains(&"SIFT-ORB".to_string()));
    assert!(!names.contains(&"BRISK-BRISK".to_string()));
    assert_eq!(names.last().unwrap(), "BRISK-ORB");
    assert!("sift-orb".parse::<CombinationId>().is_err());
}

#[test]
fn localize_bounds_the_candidates() {
    let mut r = rng(23);
    for _ in 0..200 {
        let g = GridGeometry::Regular {
            point_spacing: r.random_range(0.1..5.0),
            base_height: r.random_range(0.0..2.0),
            height_step: r.random_range(0.01..1.0),
            arm_radius: r.random_range(0.0..0.5),
        };
        let m = pose(r.random_range(0..50), r.random_range(0..3), [-30, -15, 0, 15, 30][r.random_range(0..5)]);
        for policy in [CandidatePolicy::YawNeighbourhood, CandidatePolicy::FullGrid] {
            let cube = localize(&m, &g, policy).unwrap();
            let pts: Vec<[f64; 3]> = policy.candidates(&m).iter().map(|p| g.position(p).unwrap()).collect();
            for k in 0..3 {
                let lo = pts.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
                let hi = pts.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
                assert_eq!((cube.min[k], cube.max[k]), (lo, hi));
            }
            assert!(cube.candidates.iter().any(|(p, _)| *p == m));
        }
    }
}

#[test]
fn self_match_is_exact() {
    let ds = dataset(3);
    let mut manifest = ds.manifest.clone();
    manifest.queries = manifest
        .templates
        .iter()
        .map(|t| QueryEntry {
            path: t.path.clone(),
            pose: t.pose,
        })
        .collect();
    let ds = Dataset::from_images(manifest, ds.templates.clone(), ds.templates).unwrap();
    let cfg = BenchConfig::default();
    let elim = eliminate(&ds, &cfg.elimination).unwrap();
    for c in ["ORB-BRIEF", "FAST-SIFT", "BRISK-SURF"] {
        let r = run_combination(combo(c), &ds, &elim, &cfg).unwrap();
        assert_eq!(r.accuracy, 100.0, "{c}");
        for p in r.pairs.iter().filter(|p| p.query == p.template) {
            assert_eq!(p.stats.mean_angle_diff, 0.0);
            assert_eq!(p.stats.min_distance, 0.0);
        }
    }
}

#[test]
fn prefilter_is_sound_and_monotone() {
    let ds = dataset(6);
    let mut prev: Option<Vec<(usize, usize)>> = None;
    for th in [0.0, 0.5, 0.8, 0.9, 0.95, 0.99, 1.0] {
        let cfg = EliminationConfig {
            prefilter_threshold: th,
            ..EliminationConfig::default()
        };
        let e = eliminate(&ds, &cfg).unwrap();
        let pairs: Vec<(usize, usize)> = e.pairs().map(|(q, t, _)| (q, t)).collect();
        for (q, t, s) in e.pairs() {
            assert!(s > th);
            let direct = histogram_correlation(&ds.query_histograms[q], &ds.template_histograms[t]);
            assert_eq!(s, direct);
        }
        if let Some(p) = &prev {
            assert!(pairs.iter().all(|x| p.contains(x)), "threshold {th}");
        }
        prev = Some(pairs);
    }
    assert!(prev.unwrap().is_empty());
}

#[test]
fn no_candidates_means_no_matches() {
    let ds = dataset(3);
    let cfg = BenchConfig {
        elimination: EliminationConfig {
            prefilter_threshold: 1.0,
            ..EliminationConfig::default()
        },
        ..BenchConfig::default()
    };
    let elim = eliminate(&ds, &cfg.elimination).unwrap();
    let r = run_combination(combo("ORB-ORB"), &ds, &elim, &cfg).unwrap();
    assert_eq!(r.total_matches, 0);
    assert!(r.pairs.is_empty());
    assert_eq!(r.counts.tp + r.counts.fp, 0);
    assert_eq!(r.ground_truth_cases, 6);
}

#[test]
fn pair_times_add_up_to_the_total() {
    let ds = dataset(5);
    let cfg = BenchConfig::default();
    let elim = eliminate(&ds, &cfg.elimination).unwrap();
    for c in ["SURF-SURF", "SIFT-SIFT"] {
        let r = run_combination(combo(c), &ds, &elim, &cfg).unwrap();
        let sum: f64 = r.pairs.iter().map(|p| p.time_sec).sum();
        assert!((sum - r.total_time).abs() <= 0.01 * r.total_time, "{c}: {sum} vs {}", r.total_time);
    }
}

#[test]
fn parallel_run_equals_sequential_rerun() {
    let ds = dataset(10);
    assert_eq!((ds.queries.len(), ds.templates.len()), (20, 10));
    let seq = BenchConfig::default();
    let par = BenchConfig { workers: 3, ..seq.clone() };
    let elim = eliminate(&ds, &seq.elimination).unwrap();
    for c in ["ORB-ORB", "FAST-BRISK", "SURF-SIFT"] {
        let a = run_combination(combo(c), &ds, &elim, &seq).unwrap();
        let b = run_combination(combo(c), &ds, &elim, &par).unwrap();
        let strip = |r: &CombinationResult| {
            r.pairs
                .iter()
                .map(|p| serde_json::to_string(&(p.query, p.template, p.stats, p.accepted, p.query_features)).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b), "{c}");
        assert_eq!((a.accuracy, a.counts, a.total_matches), (b.accuracy, b.counts, b.total_matches));
        assert_eq!(a.localized, b.localized);
    }
}

#[test]
fn rotated_queries_localize_to_their_point() {
    let ds = dataset(4);
    let cfg = BenchConfig::default();
    let elim = eliminate(&ds, &cfg.elimination).unwrap();
    let r = run_combination(combo("ORB-ORB"), &ds, &elim, &cfg).unwrap();
    for (q, loc) in r.localized.iter().enumerate() {
        assert_eq!(*loc, Some(ds.manifest.queries[q].pose.point_id as usize), "query {q}");
    }
}

#[test]
fn cache_serves_identical_results() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.jsonl");
    let ds = dataset(3);
    let cfg = BenchConfig::default();
    let elim = eliminate(&ds, &cfg.elimination).unwrap();
    let mut cache = PairCache::open(&path).unwrap();
    let (a, hit) = run_combination_cached(combo("FAST-BRIEF"), &ds, &elim, &cfg, &mut cache).unwrap();
    assert!(!hit);
    let mut cache = PairCache::open(&path).unwrap();
    let (b, hit) = run_combination_cached(combo("FAST-BRIEF"), &ds, &elim, &cfg, &mut cache).unwrap();
    assert!(hit);
    assert_eq!(a.pairs, b.pairs);
    assert_eq!(a.accuracy, b.accuracy);
}

proptest! {
    #[test]
    fn correlation_is_symmetric_and_bounded(s1 in any::<u64>(), s2 in any::<u64>()) {
        let (a, b) = (noise(32, 32, s1), textured(32, 32, s2));
        let (ha, hb) = (intensity_histogram(&a).unwrap(), intensity_histogram(&b).unwrap());
        let ab = histogram_correlation(&ha, &hb);
        prop_assert!((ab - histogram_correlation(&hb, &ha)).abs() < 1e-12);
        prop_assert!((-1.0..=1.0).contains(&ab));
        prop_assert!((histogram_correlation(&ha, &ha) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn raising_min_correct_never_adds_localizations(k in 0usize..40) {
        let pairs: Vec<PairRecord> = (0..12)
            .map(|i| PairRecord {
                query: i % 4,
                template: i % 3,
                histogram_score: 0.95,
                query_features: 10,
                template_features: 10,
                stats: featbench_core::MatchStats { n_correct: i * 3, ..featbench_core::MatchStats::EMPTY },
                accepted: i * 3 >= k,
                time_sec: 0.0,
            })
            .collect();
        let stricter: Vec<PairRecord> = pairs
            .iter()
            .cloned()
            .map(|mut p| { p.accepted = p.stats.n_correct > k; p })
            .collect();
        let a = featbench_core::bench::run::localize_queries(&pairs, 4);
        let b = featbench_core::bench::run::localize_queries(&stricter, 4);
        prop_assert!(b.iter().filter(|x| x.is_some()).count() <= a.iter().filter(|x| x.is_some()).count());
    }
}
