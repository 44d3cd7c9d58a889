//! Loading a dataset, eliminating queries and running one combination.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::accuracy::{compute_accuracy, matches_per_second, AccuracyCounts};
use super::combo::CombinationId;
use super::config::{BenchConfig, EliminationConfig};
use super::eliminate::{fast_counts, partition_by_count};
use super::pose::{Case, DatasetManifest};
use crate::describe::{Descriptor, SamplingPattern};
use crate::detect::{DetectorParams, Keypoint};
use crate::error::{Error, Result};
use crate::histogram::{intensity_histogram, Histogram};
use crate::image::{load_image, Image};
use crate::matching::{brute_force_match, filter_matches, image_pair_decision, match_stats, MatchStats};

/// Hex SHA-256 prefix of an image's dimensions and pixels.
pub fn image_hash(img: &Image) -> String {
    let mut h = Sha256::new();
    h.update((img.width() as u64).to_le_bytes());
    h.update((img.height() as u64).to_le_bytes());
    h.update(img.data());
    hex::encode(&h.finalize()[..16])
}

/// Decoded manifest images with their hashes and histograms.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    pub templates: Vec<Image>,
    pub queries: Vec<Image>,
    pub template_hashes: Vec<String>,
    pub query_hashes: Vec<String>,
    pub template_histograms: Vec<Histogram>,
    pub query_histograms: Vec<Histogram>,
    /// Seconds spent decoding image files; not part of any pipeline time.
    pub decode_time: f64,
}

impl Dataset {
    pub fn load(manifest: DatasetManifest) -> Result<Self> {
        let start = Instant::now();
        let read = |path: &std::path::Path| {
            load_image(path).map_err(|e| Error::Pipeline {
                path: path.to_path_buf(),
                source: Box::new(e),
            })
        };
        let templates = manifest.templates.iter().map(|t| read(&t.path)).collect::<Result<Vec<_>>>()?;
        let queries = manifest.queries.iter().map(|q| read(&q.path)).collect::<Result<Vec<_>>>()?;
        let decode_time = start.elapsed().as_secs_f64();
        let mut ds = Self::from_images(manifest, templates, queries)?;
        ds.decode_time = decode_time;
        Ok(ds)
    }

    /// Build from already-decoded images, index-aligned with the manifest.
    pub fn from_images(manifest: DatasetManifest, templates: Vec<Image>, queries: Vec<Image>) -> Result<Self> {
        if templates.len() != manifest.templates.len() || queries.len() != manifest.queries.len() {
            return Err(Error::Manifest(format!(
                "{} templates and {} queries given for a manifest of {} and {}",
                templates.len(),
                queries.len(),
                manifest.templates.len(),
                manifest.queries.len()
            )));
        }
        let hist = |imgs: &[Image]| imgs.iter().map(intensity_histogram).collect::<Result<Vec<_>>>();
        Ok(Dataset {
            template_hashes: templates.iter().map(image_hash).collect(),
            query_hashes: queries.iter().map(image_hash).collect(),
            template_histograms: hist(&templates)?,
            query_histograms: hist(&queries)?,
            manifest,
            templates,
            queries,
            decode_time: 0.0,
        })
    }
}

/// Outcome of both elimination stages, shared by every combination.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Elimination {
    pub fast_counts: Vec<usize>,
    pub kept: Vec<usize>,
    pub rejected: Vec<usize>,
    /// Per query: `(template index, histogram score)` of the templates that
    /// passed the prefilter. Empty for rejected queries.
    pub candidates: Vec<Vec<(usize, f64)>>,
}

impl Elimination {
    /// `(query, template, histogram score)` in matching order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.kept
            .iter()
            .flat_map(move |&q| self.candidates[q].iter().map(move |&(t, s)| (q, t, s)))
    }
}

pub fn eliminate(ds: &Dataset, cfg: &EliminationConfig) -> Result<Elimination> {
    let counts = fast_counts(&ds.queries)?;
    let (kept, rejected) = partition_by_count(&counts, cfg.hysteresis_lower, cfg.hysteresis_upper)?;
    if !(0.0..=1.0).contains(&cfg.prefilter_threshold) {
        return Err(Error::invalid("prefilter threshold must be in [0, 1]"));
    }
    let mut candidates = vec![Vec::new(); ds.queries.len()];
    for &q in &kept {
        let qh = &ds.query_histograms[q];
        candidates[q] = ds
            .template_histograms
            .iter()
            .enumerate()
            .map(|(t, th)| (t, cfg.histogram.compare(qh, th)))
            .filter(|&(_, s)| s > cfg.prefilter_threshold)
            .collect();
    }
    Ok(Elimination {
        fast_counts: counts,
        kept,
        rejected,
        candidates,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Features {
    pub keypoints: Vec<Keypoint>,
    pub descriptors: Vec<Descriptor>,
}

pub fn extract(img: &Image, combo: CombinationId, params: &DetectorParams, pattern: &SamplingPattern) -> Result<Features> {
    let kps = combo.detector.detect(img, params)?;
    let (keypoints, descriptors) = combo.descriptor.describe(img, &kps, pattern);
    Ok(Features { keypoints, descriptors })
}

/// Match, filter and summarize one query/template feature pair.
pub fn match_features(query: &Features, template: &Features, combo: CombinationId, cfg: &BenchConfig) -> Result<MatchStats> {
    if query.descriptors.is_empty() || template.descriptors.is_empty() {
        return Ok(MatchStats::EMPTY);
    }
    let m = &cfg.matcher;
    let raw = brute_force_match(&query.descriptors, &template.descriptors, m.cross_check)?;
    let limit = m
        .max_distance
        .for_descriptor(combo.descriptor.is_binary(), combo.descriptor.len());
    let good = filter_matches(&raw, m.ratio, limit)?;
    match_stats(&good, &query.keypoints, &template.keypoints)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub query: usize,
    pub template: usize,
    pub histogram_score: f64,
    pub query_features: usize,
    pub template_features: usize,
    pub stats: MatchStats,
    /// Enough correct matches and a histogram score above the acceptance
    /// threshold.
    pub accepted: bool,
    /// Matching time plus the extraction this pair triggered.
    pub time_sec: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombinationResult {
    pub combination: CombinationId,
    /// Wall-clock seconds of detection, description, matching and decisions.
    pub total_time: f64,
    pub accuracy: f64,
    pub counts: AccuracyCounts,
    pub ground_truth_cases: usize,
    pub total_matches: usize,
    pub correct_matches_per_second: f64,
    /// Per query: the template it was localized to, if any.
    pub localized: Vec<Option<usize>>,
    pub pairs: Vec<PairRecord>,
}

/// Each query is localized to the accepted template with the most correct
/// matches (ties to the lower template index).
pub fn localize_queries(pairs: &[PairRecord], n_queries: usize) -> Vec<Option<usize>> {
    let mut best: Vec<Option<(usize, usize)>> = vec![None; n_queries];
    for p in pairs.iter().filter(|p| p.accepted) {
        let slot = &mut best[p.query];
        let better = match *slot {
            None => true,
            Some((t, n)) => p.stats.n_correct > n || (p.stats.n_correct == n && p.template < t),
        };
        if better {
            *slot = Some((p.template, p.stats.n_correct));
        }
    }
    best.into_iter().map(|b| b.map(|(t, _)| t)).collect()
}

/// A case is decided "matched" when its query was localized to its template.
pub fn case_decisions(localized: &[Option<usize>], cases: &[Case]) -> Vec<bool> {
    cases.iter().map(|c| localized[c.query] == Some(c.template)).collect()
}

/// Assemble a result from per-pair records.
pub fn summarize(
    combo: CombinationId,
    pairs: Vec<PairRecord>,
    total_time: f64,
    ds: &Dataset,
    cfg: &BenchConfig,
) -> Result<CombinationResult> {
    let cases = ds.manifest.ground_truth_cases(cfg.positive_policy);
    let localized = localize_queries(&pairs, ds.queries.len());
    let decisions = case_decisions(&localized, &cases);
    let (counts, accuracy) = if cases.is_empty() {
        (AccuracyCounts::default(), 0.0)
    } else {
        compute_accuracy(&decisions, &cases)?
    };
    let total_matches = pairs.iter().map(|p| p.stats.n_correct).sum();
    let total_time = total_time.max(f64::MIN_POSITIVE);
    Ok(CombinationResult {
        combination: combo,
        total_time,
        accuracy,
        counts,
        ground_truth_cases: cases.len(),
        total_matches,
        correct_matches_per_second: matches_per_second(total_matches, total_time)?,
        localized,
        pairs,
    })
}

/// Run one combination over every surviving (query, candidate template)
/// pair. Features are extracted once per distinct image; a pair's time
/// includes the extractions it was first to need. With one worker the pair
/// times add up to the total.
pub fn run_combination(combo: CombinationId, ds: &Dataset, elim: &Elimination, cfg: &BenchConfig) -> Result<CombinationResult> {
    cfg.validate()?;
    let pattern = SamplingPattern::new(cfg.seed);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let plan: Vec<(usize, usize, f64)> = elim.pairs().collect();

    // first use of each distinct image, in pair order
    let mut slots: HashMap<&str, usize> = HashMap::new();
    let mut images: Vec<(&Image, &std::path::Path)> = Vec::new();
    let mut pair_slots = Vec::with_capacity(plan.len());
    let mut first_use: Vec<Vec<usize>> = vec![Vec::new(); plan.len()];
    for (pi, &(q, t, _)) in plan.iter().enumerate() {
        let sides = [
            (ds.query_hashes[q].as_str(), &ds.queries[q], ds.manifest.queries[q].path.as_path()),
            (ds.template_hashes[t].as_str(), &ds.templates[t], ds.manifest.templates[t].path.as_path()),
        ];
        let mut pair = [0usize; 2];
        for (k, (hash, img, path)) in sides.into_iter().enumerate() {
            pair[k] = *slots.entry(hash).or_insert_with(|| {
                images.push((img, path));
                first_use[pi].push(images.len() - 1);
                images.len() - 1
            });
        }
        pair_slots.push((pair[0], pair[1]));
    }

    let start = Instant::now();
    let (features, pairs) = pool.install(|| -> Result<_> {
        let features: Vec<(Features, f64)> = images
            .par_iter()
            .map(|&(img, path)| {
                let t0 = Instant::now();
                let f = extract(img, combo, &cfg.detector, &pattern).map_err(|e| Error::Pipeline {
                    path: path.to_path_buf(),
                    source: Box::new(e),
                })?;
                Ok((f, t0.elapsed().as_secs_f64()))
            })
            .collect::<Result<_>>()?;
        let pairs: Vec<(MatchStats, f64)> = pair_slots
            .par_iter()
            .map(|&(qs, ts)| {
                let t0 = Instant::now();
                let s = match_features(&features[qs].0, &features[ts].0, combo, cfg)?;
                Ok((s, t0.elapsed().as_secs_f64()))
            })
            .collect::<Result<_>>()?;
        Ok((features, pairs))
    })?;
    let total_time = start.elapsed().as_secs_f64();

    let min_correct = cfg.matcher.min_correct;
    let records = plan
        .iter()
        .zip(&pair_slots)
        .zip(pairs)
        .enumerate()
        .map(|(pi, ((&(q, t, score), &(qs, ts)), (stats, match_time)))| {
            let extraction: f64 = first_use[pi].iter().map(|&s| features[s].1).sum();
            PairRecord {
                query: q,
                template: t,
                histogram_score: score,
                query_features: features[qs].0.descriptors.len(),
                template_features: features[ts].0.descriptors.len(),
                accepted: image_pair_decision(&stats, min_correct)
                    && score > cfg.elimination.acceptance_threshold,
                stats,
                time_sec: match_time + extraction,
            }
        })
        .collect();
    summarize(combo, records, total_time, ds, cfg)
}
