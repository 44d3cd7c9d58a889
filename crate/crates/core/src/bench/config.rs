//! Benchmark configuration and its content hash.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::eliminate::HistogramComparison;
use super::pose::PositivePolicy;
use crate::describe::DEFAULT_PATTERN_SEED;
use crate::detect::DetectorParams;
use crate::error::{Error, Result};

/// Absolute distance limits used by the match filter, per descriptor family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaxDistance {
    pub bits_256: f64,
    pub bits_512: f64,
    pub real: f64,
}

impl Default for MaxDistance {
    fn default() -> Self {
        MaxDistance {
            bits_256: 64.0,
            bits_512: 128.0,
            real: 0.7,
        }
    }
}

impl MaxDistance {
    /// Limit for a descriptor of `len` bits (binary) or dimensions (real).
    pub fn for_descriptor(&self, binary: bool, len: usize) -> f64 {
        match (binary, len) {
            (false, _) => self.real,
            (true, n) if n <= 256 => self.bits_256,
            (true, _) => self.bits_512,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatcherConfig {
    pub ratio: f64,
    pub cross_check: bool,
    pub max_distance: MaxDistance,
    /// Correct matches needed to declare an image pair matched.
    pub min_correct: usize,
}

impl Default for MatcherConfig {
    fn default() -> Self {
        MatcherConfig {
            ratio: 0.8,
            cross_check: false,
            max_distance: MaxDistance::default(),
            min_correct: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EliminationConfig {
    pub hysteresis_lower: usize,
    pub hysteresis_upper: usize,
    pub histogram: HistogramComparison,
    /// Pairs at or below this histogram score never reach matching.
    pub prefilter_threshold: f64,
    /// Matched pairs at or below this histogram score are not accepted as
    /// the same point.
    pub acceptance_threshold: f64,
}

impl Default for EliminationConfig {
    fn default() -> Self {
        EliminationConfig {
            hysteresis_lower: 40,
            hysteresis_upper: 4000,
            histogram: HistogramComparison::Correlation,
            prefilter_threshold: 0.9,
            acceptance_threshold: 0.9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub detector: DetectorParams,
    pub matcher: MatcherConfig,
    pub elimination: EliminationConfig,
    pub positive_policy: PositivePolicy,
    /// Seed of the BRIEF/ORB test-pair pattern.
    pub seed: u64,
    /// 1 runs everything sequentially (timing mode).
    pub workers: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            detector: DetectorParams::default(),
            matcher: MatcherConfig::default(),
            elimination: EliminationConfig::default(),
            positive_policy: PositivePolicy::default(),
            seed: DEFAULT_PATTERN_SEED,
            workers: 1,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        let m = &self.matcher;
        if !(m.ratio > 0.0 && m.ratio <= 1.0) {
            return Err(Error::invalid(format!("matcher.ratio must be in (0, 1], got {}", m.ratio)));
        }
        let e = &self.elimination;
        if e.hysteresis_lower >= e.hysteresis_upper {
            return Err(Error::invalid("hysteresis_lower must be below hysteresis_upper"));
        }
        for (name, t) in [("prefilter_threshold", e.prefilter_threshold), ("acceptance_threshold", e.acceptance_threshold)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::invalid(format!("{name} must be in [0, 1], got {t}")));
            }
        }
        if self.workers == 0 {
            return Err(Error::invalid("workers must be at least 1"));
        }
        Ok(())
    }

    /// Hex SHA-256 prefix of the canonical JSON form, excluding `workers`
    /// (which changes timing, not results).
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.workers = 1;
        let json = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(&Sha256::digest(&json)[..8])
    }

    pub fn timing_mode(&self) -> &'static str {
        if self.workers == 1 {
            "sequential"
        } else {
            "parallel"
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_tracks_results_not_workers() {
        let a = BenchConfig::default();
        let b = BenchConfig { workers: 4, ..a.clone() };
        let c = BenchConfig { seed: 7, ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 16);
    }

    #[test]
    fn partial_json_uses_defaults() {
        let c: BenchConfig = serde_json::from_str(r#"{"matcher": {"ratio": 0.7}}"#).unwrap();
        assert_eq!(c.matcher.ratio, 0.7);
        assert_eq!(c.matcher.min_correct, 8);
        assert!(c.validate().is_ok());
        let bad = BenchConfig { workers: 0, ..c };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn distance_limits() {
        let m = MaxDistance::default();
        assert_eq!(m.for_descriptor(true, 256), 64.0);
        assert_eq!(m.for_descriptor(true, 512), 128.0);
        assert_eq!(m.for_descriptor(false, 128), 0.7);
    }
}
