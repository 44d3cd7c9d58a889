//! Sampling patterns for the binary descriptors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;

pub const BRIEF_PAIRS: usize = 256;
pub const DEFAULT_PATTERN_SEED: u64 = 42;
const BRIEF_PATCH: f64 = 31.0;
const BRIEF_HALF: i32 = 15;

const BRISK_RING_COUNTS: [usize; 5] = [1, 10, 14, 15, 20];
const BRISK_RING_RADII: [f64; 5] = [0.0, 2.9, 4.9, 7.4, 10.8];
const BRISK_RADIUS_GAIN: f64 = 0.85 * 5.0 / 3.0;
const BRISK_SIGMA_GAIN: f64 = 1.3;
const BRISK_SHORT_MAX: f64 = 9.75;
const BRISK_LONG_MIN: f64 = 13.67;
pub(crate) const BRISK_BITS: usize = 512;

/// The 60-point BRISK pattern at unit scale.
#[derive(Clone, Debug, PartialEq)]
pub struct BriskPattern {
    /// `(x, y, sigma)` per point.
    pub points: Vec<(f64, f64, f64)>,
    /// First [`BRISK_BITS`] point pairs closer than 9.75, in `i < j` order.
    pub short_pairs: Vec<(usize, usize)>,
    /// Point pairs farther apart than 13.67.
    pub long_pairs: Vec<(usize, usize)>,
}

impl BriskPattern {
    pub fn new() -> Self {
        let mut points = Vec::with_capacity(60);
        for (ring, (&n, &r)) in BRISK_RING_COUNTS.iter().zip(&BRISK_RING_RADII).enumerate() {
            let r = r * BRISK_RADIUS_GAIN;
            let sigma = if ring == 0 {
                BRISK_SIGMA_GAIN * 0.5 * BRISK_RADIUS_GAIN
            } else {
                BRISK_SIGMA_GAIN * r * (std::f64::consts::PI / n as f64).sin()
            };
            for k in 0..n {
                let a = std::f64::consts::TAU * k as f64 / n as f64;
                points.push((r * a.cos(), r * a.sin(), sigma));
            }
        }
        let mut short_pairs = Vec::new();
        let mut long_pairs = Vec::new();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let d = (points[i].0 - points[j].0).hypot(points[i].1 - points[j].1);
                if d < BRISK_SHORT_MAX && short_pairs.len() < BRISK_BITS {
                    short_pairs.push((i, j));
                } else if d > BRISK_LONG_MIN {
                    long_pairs.push((i, j));
                }
            }
        }
        BriskPattern {
            points,
            short_pairs,
            long_pairs,
        }
    }

    /// Largest `radius + sigma` over the pattern points.
    pub fn extent(&self) -> f64 {
        self.points
            .iter()
            .map(|&(x, y, s)| x.hypot(y) + s)
            .fold(0.0, f64::max)
    }
}

impl Default for BriskPattern {
    fn default() -> Self {
        BriskPattern::new()
    }
}

/// The BRIEF/ORB test pairs and the BRISK pattern. Identical for equal seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingPattern {
    pub seed: u64,
    /// `((px, py), (qx, qy))` offsets within the 31x31 patch.
    pub brief: Vec<((i32, i32), (i32, i32))>,
    pub brisk: BriskPattern,
}

impl SamplingPattern {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, BRIEF_PATCH / 5.0).expect("finite sigma");
        let draw = |rng: &mut ChaCha8Rng| -> (i32, i32) {
            let mut c = || rng.sample(normal).round().clamp(-BRIEF_HALF as f64, BRIEF_HALF as f64) as i32;
            (c(), c())
        };
        let mut brief = Vec::with_capacity(BRIEF_PAIRS);
        while brief.len() < BRIEF_PAIRS {
            let p = draw(&mut rng);
            let q = draw(&mut rng);
            if p != q {
                brief.push((p, q));
            }
        }
        SamplingPattern {
            seed,
            brief,
            brisk: BriskPattern::new(),
        }
    }
}

impl Default for SamplingPattern {
    fn default() -> Self {
        SamplingPattern::new(DEFAULT_PATTERN_SEED)
    }
}
