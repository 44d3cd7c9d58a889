//! Append-only JSONL cache of per-pair results, keyed by
//! (image hashes, combination, config hash).

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::combo::CombinationId;
use super::config::BenchConfig;
use super::run::{summarize, CombinationResult, Dataset, Elimination, PairRecord, run_combination};
use crate::error::{Error, Result};
use crate::matching::MatchStats;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CacheEntry {
    pub key: String,
    pub combination: String,
    pub query_hash: String,
    pub template_hash: String,
    pub config_hash: String,
    pub histogram_score: f64,
    pub query_features: usize,
    pub template_features: usize,
    pub stats: MatchStats,
    pub accepted: bool,
    pub time_sec: f64,
}

pub fn cache_key(query_hash: &str, template_hash: &str, combo: CombinationId, config_hash: &str) -> String {
    let mut h = Sha256::new();
    for part in [query_hash, template_hash, &combo.to_string(), config_hash] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    hex::encode(&h.finalize()[..16])
}

pub struct PairCache {
    path: PathBuf,
    entries: HashMap<String, CacheEntry>,
}

impl PairCache {
    /// Read the cache at `path` if it exists; later lines win on equal keys.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut entries = HashMap::new();
        if path.exists() {
            let f = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            for (i, line) in BufReader::new(f).lines().enumerate() {
                let line = line.map_err(|e| Error::io(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let e: CacheEntry = serde_json::from_str(&line)
                    .map_err(|e| Error::Serialization(format!("{} line {}: {e}", path.display(), i + 1)))?;
                entries.insert(e.key.clone(), e);
            }
        }
        Ok(PairCache { path, entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&CacheEntry> {
        self.entries.get(key)
    }

    pub fn append(&mut self, new: Vec<CacheEntry>) -> Result<()> {
        if new.is_empty() {
            return Ok(());
        }
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| Error::io(&self.path, e))?;
        let mut buf = String::new();
        for e in &new {
            buf.push_str(&serde_json::to_string(e).map_err(|e| Error::Serialization(e.to_string()))?);
            buf.push('\n');
        }
        f.write_all(buf.as_bytes()).map_err(|e| Error::io(&self.path, e))?;
        for e in new {
            self.entries.insert(e.key.clone(), e);
        }
        Ok(())
    }
}

/// Like [`run_combination`], but reuses cached pair results when every pair
/// of the plan is cached (the total time is then the sum of cached pair
/// times), and records fresh results otherwise. Returns whether the cache
/// served the result.
pub fn run_combination_cached(
    combo: CombinationId,
    ds: &Dataset,
    elim: &Elimination,
    cfg: &BenchConfig,
    cache: &mut PairCache,
) -> Result<(CombinationResult, bool)> {
    let config_hash = cfg.hash();
    let keys: Vec<(usize, usize, f64, String)> = elim
        .pairs()
        .map(|(q, t, s)| (q, t, s, cache_key(&ds.query_hashes[q], &ds.template_hashes[t], combo, &config_hash)))
        .collect();
    if !keys.is_empty() && keys.iter().all(|k| cache.get(&k.3).is_some()) {
        let records: Vec<PairRecord> = keys
            .iter()
            .map(|(q, t, s, k)| {
                let e = cache.get(k).expect("checked");
                PairRecord {
                    query: *q,
                    template: *t,
                    histogram_score: *s,
                    query_features: e.query_features,
                    template_features: e.template_features,
                    stats: e.stats,
                    accepted: e.accepted,
                    time_sec: e.time_sec,
                }
            })
            .collect();
        let total = records.iter().map(|r| r.time_sec).sum();
        return Ok((summarize(combo, records, total, ds, cfg)?, true));
    }
    let result = run_combination(combo, ds, elim, cfg)?;
    let entries = result
        .pairs
        .iter()
        .zip(&keys)
        .map(|(r, (q, t, _, k))| CacheEntry {
            key: k.clone(),
            combination: combo.to_string(),
            query_hash: ds.query_hashes[*q].clone(),
            template_hash: ds.template_hashes[*t].clone(),
            config_hash: config_hash.clone(),
            histogram_score: r.histogram_score,
            query_features: r.query_features,
            template_features: r.template_features,
            stats: r.stats,
            accepted: r.accepted,
            time_sec: r.time_sec,
        })
        .collect();
    cache.append(entries)?;
    Ok((result, false))
}
