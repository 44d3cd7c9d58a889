//! Brute-force matching, ratio/distance filtering and per-pair statistics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::describe::Descriptor;
use crate::detect::Keypoint;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub query_idx: usize,
    pub train_idx: usize,
    pub distance: f64,
    /// `f64::INFINITY` when there is no runner-up.
    pub second_distance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchStats {
    pub n_correct: usize,
    /// Degrees in `[-180, 180)`.
    pub mean_angle_diff: f64,
    /// Pixels; `f64::MAX` when there are no matches.
    pub min_distance: f64,
}

impl MatchStats {
    pub const EMPTY: MatchStats = MatchStats {
        n_correct: 0,
        mean_angle_diff: 0.0,
        min_distance: f64::MAX,
    };
}

/// Population count of `a XOR b`.
pub fn hamming(a: &[u64], b: &[u64]) -> Result<u32> {
    if a.len() != b.len() {
        return Err(Error::DescriptorMismatch(format!(
            "{} vs {} bits",
            a.len() * 64,
            b.len() * 64
        )));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum())
}

/// Euclidean distance.
pub fn l2(a: &[f32], b: &[f32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DescriptorMismatch(format!("{} vs {} dimensions", a.len(), b.len())));
    }
    Ok(squared_l2(a, b).sqrt())
}

fn squared_l2(a: &[f32], b: &[f32]) -> f64 {
    // four independent f32 lanes keep the inner loop vectorizable
    let mut acc = [0.0f32; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            let d = x[k] - y[k];
            acc[k] += d * d;
        }
    }
    let tail: f32 = ra.iter().zip(rb).map(|(x, y)| (x - y) * (x - y)).sum();
    ((acc[0] + acc[1]) + (acc[2] + acc[3]) + tail) as f64
}

/// Distance between two descriptors of the same variant and length.
pub fn distance(a: &Descriptor, b: &Descriptor) -> Result<f64> {
    match (a, b) {
        (Descriptor::Binary(x), Descriptor::Binary(y)) => hamming(x, y).map(f64::from),
        (Descriptor::Real(x), Descriptor::Real(y)) => l2(x, y),
        _ => Err(Error::DescriptorMismatch("binary vs real descriptors".into())),
    }
}

enum Kernel<'a> {
    Binary(Vec<&'a [u64]>),
    Real(Vec<&'a [f32]>),
}

impl<'a> Kernel<'a> {
    fn new(list: &'a [Descriptor], len: usize, binary: bool) -> Result<Self> {
        let check = |d: &Descriptor| {
            if d.is_binary() != binary || d.len() != len {
                Err(Error::DescriptorMismatch(format!(
                    "expected {} descriptors of length {len}",
                    if binary { "binary" } else { "real" }
                )))
            } else {
                Ok(())
            }
        };
        if binary {
            let mut v = Vec::with_capacity(list.len());
            for d in list {
                check(d)?;
                let Descriptor::Binary(w) = d else { unreachable!() };
                v.push(w.as_slice());
            }
            Ok(Kernel::Binary(v))
        } else {
            let mut v = Vec::with_capacity(list.len());
            for d in list {
                check(d)?;
                let Descriptor::Real(x) = d else { unreachable!() };
                v.push(x.as_slice());
            }
            Ok(Kernel::Real(v))
        }
    }

    fn len(&self) -> usize {
        match self {
            Kernel::Binary(v) => v.len(),
            Kernel::Real(v) => v.len(),
        }
    }
}

/// Best and second-best train index and comparable distance for one query.
/// Comparable distances are bit counts or squared L2.
fn nearest_two(q: &Kernel<'_>, qi: usize, t: &Kernel<'_>) -> (usize, f64, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    let mut second = f64::INFINITY;
    let mut consider = |j: usize, d: f64| {
        if d < best.1 {
            second = best.1;
            best = (j, d);
        } else if d < second {
            second = d;
        }
    };
    match (q, t) {
        (Kernel::Binary(qs), Kernel::Binary(ts)) => {
            let a = qs[qi];
            for (j, b) in ts.iter().enumerate() {
                let d: u32 = a.iter().zip(b.iter()).map(|(x, y)| (x ^ y).count_ones()).sum();
                consider(j, d as f64);
            }
        }
        (Kernel::Real(qs), Kernel::Real(ts)) => {
            let a = qs[qi];
            for (j, b) in ts.iter().enumerate() {
                consider(j, squared_l2(a, b));
            }
        }
        _ => unreachable!("kernels share a variant"),
    }
    (best.0, best.1, second)
}

/// Nearest train descriptor per query, with the runner-up distance. Ties go
/// to the lowest train index. With `cross_check`, only mutual nearest
/// neighbours are kept. Output is sorted by `query_idx`; the parallel scan
/// gives the same result as a sequential one.
pub fn brute_force_match(queries: &[Descriptor], trains: &[Descriptor], cross_check: bool) -> Result<Vec<Match>> {
    if queries.is_empty() || trains.is_empty() {
        return Ok(Vec::new());
    }
    let binary = queries[0].is_binary();
    let len = queries[0].len();
    let q = Kernel::new(queries, len, binary)?;
    let t = Kernel::new(trains, len, binary)?;
    let finish = |d: f64| if binary { d } else { d.sqrt() };
    let forward: Vec<(usize, f64, f64)> = (0..q.len()).into_par_iter().map(|i| nearest_two(&q, i, &t)).collect();
    let backward: Option<Vec<usize>> =
        cross_check.then(|| (0..t.len()).into_par_iter().map(|j| nearest_two(&t, j, &q).0).collect());
    let mut out = Vec::with_capacity(forward.len());
    for (i, &(j, d, d2)) in forward.iter().enumerate() {
        if let Some(back) = &backward {
            if back[j] != i {
                continue;
            }
        }
        out.push(Match {
            query_idx: i,
            train_idx: j,
            distance: finish(d),
            second_distance: finish(d2),
        });
    }
    Ok(out)
}

/// Keep matches with `distance < ratio * second_distance` and
/// `distance <= max_distance`, preserving order.
pub fn filter_matches(matches: &[Match], ratio: f64, max_distance: f64) -> Result<Vec<Match>> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::invalid(format!("ratio must be in (0, 1], got {ratio}")));
    }
    Ok(matches
        .iter()
        .filter(|m| m.distance < ratio * m.second_distance && m.distance <= max_distance)
        .copied()
        .collect())
}

/// Wrap degrees into `[-180, 180)`.
pub fn wrap_degrees(d: f64) -> f64 {
    let w = (d + 180.0).rem_euclid(360.0) - 180.0;
    if w >= 180.0 {
        -180.0
    } else {
        w
    }
}

/// Count, mean wrapped orientation difference (query minus train, degrees)
/// and minimum pixel distance between matched keypoint positions.
pub fn match_stats(matches: &[Match], query_kps: &[Keypoint], train_kps: &[Keypoint]) -> Result<MatchStats> {
    if matches.is_empty() {
        return Ok(MatchStats::EMPTY);
    }
    let mut angle_sum = 0.0f64;
    let mut min_distance = f64::MAX;
    for m in matches {
        let (Some(q), Some(t)) = (query_kps.get(m.query_idx), train_kps.get(m.train_idx)) else {
            return Err(Error::invalid(format!(
                "match ({}, {}) out of bounds for {} query and {} train keypoints",
                m.query_idx,
                m.train_idx,
                query_kps.len(),
                train_kps.len()
            )));
        };
        angle_sum += wrap_degrees((q.orientation as f64 - t.orientation as f64).to_degrees());
        let d = (q.x as f64 - t.x as f64).hypot(q.y as f64 - t.y as f64);
        min_distance = min_distance.min(d);
    }
    // the mean of values in [-180, 180) already lies in that range
    let mean = angle_sum / matches.len() as f64;
    Ok(MatchStats {
        n_correct: matches.len(),
        mean_angle_diff: mean.clamp(-180.0, 180.0 - 1e-9),
        min_distance,
    })
}

/// An image pair is declared matched iff it has at least `min_correct`
/// correct matches.
pub fn image_pair_decision(stats: &MatchStats, min_correct: usize) -> bool {
    stats.n_correct >= min_correct
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(words: &[u64]) -> Descriptor {
        Descriptor::Binary(words.to_vec())
    }

    #[test]
    fn hamming_basics() {
        let a = [0xdead_beef_u64, 7, 0, u64::MAX];
        let c: Vec<u64> = a.iter().map(|x| !x).collect();
        assert_eq!(hamming(&a, &a).unwrap(), 0);
        assert_eq!(hamming(&a, &c).unwrap(), 256);
        assert!(hamming(&a, &a[..2]).is_err());
    }

    #[test]
    fn l2_basics() {
        assert_eq!(l2(&[1.0, 0.0], &[1.0, 0.0]).unwrap(), 0.0);
        assert!((l2(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!(l2(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn runner_up_distance() {
        let d = bin(&[0, 0, 0, 0]);
        let far = bin(&[0xff, 0, 0, 0]);
        let m = brute_force_match(&[d.clone()], &[d, far], false).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].query_idx, m[0].train_idx, m[0].distance, m[0].second_distance), (0, 0, 0.0, 8.0));
    }

    #[test]
    fn single_train_has_infinite_runner_up() {
        let m = brute_force_match(&[bin(&[1])], &[bin(&[3])], false).unwrap();
        assert_eq!(m[0].second_distance, f64::INFINITY);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let q = bin(&[0]);
        let m = brute_force_match(&[q], &[bin(&[1]), bin(&[2]), bin(&[0])], false).unwrap();
        assert_eq!(m[0].train_idx, 2);
        let m = brute_force_match(&[bin(&[0])], &[bin(&[1]), bin(&[2])], false).unwrap();
        assert_eq!((m[0].train_idx, m[0].distance, m[0].second_distance), (0, 1.0, 1.0));
    }

    #[test]
    fn variant_mismatch_is_an_error() {
        assert!(brute_force_match(&[bin(&[0])], &[Descriptor::Real(vec![0.0; 64])], false).is_err());
        assert!(distance(&bin(&[0]), &Descriptor::Real(vec![0.0])).is_err());
    }

    #[test]
    fn filter_arithmetic() {
        let m = Match {
            query_idx: 0,
            train_idx: 0,
            distance: 10.0,
            second_distance: 11.0,
        };
        assert!(filter_matches(&[m], 0.8, f64::INFINITY).unwrap().is_empty());
        assert_eq!(filter_matches(&[m], 1.0, f64::INFINITY).unwrap(), vec![m]);
        assert!(filter_matches(&[m], 0.0, 1.0).is_err());
        assert!(filter_matches(&[m], 1.5, 1.0).is_err());
    }

    #[test]
    fn stats_three_four_five() {
        let q = [Keypoint::new(10.0, 10.0, 7.0).with_orientation(30f32.to_radians())];
        let t = [Keypoint::new(13.0, 14.0, 7.0).with_orientation(10f32.to_radians())];
        let m = Match {
            query_idx: 0,
            train_idx: 0,
            distance: 0.0,
            second_distance: 1.0,
        };
        let s = match_stats(&[m], &q, &t).unwrap();
        assert_eq!(s.n_correct, 1);
        assert!((s.min_distance - 5.0).abs() < 1e-9);
        assert!((s.mean_angle_diff - 20.0).abs() < 1e-4);
        assert!(match_stats(&[Match { train_idx: 3, ..m }], &q, &t).is_err());
    }

    #[test]
    fn empty_stats_and_decision() {
        let s = match_stats(&[], &[], &[]).unwrap();
        assert_eq!(s, MatchStats::EMPTY);
        assert!(!image_pair_decision(&s, 8));
        let s8 = MatchStats { n_correct: 8, ..s };
        assert!(image_pair_decision(&s8, 8));
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_degrees(180.0), -180.0);
        assert_eq!(wrap_degrees(-180.0), -180.0);
        assert_eq!(wrap_degrees(350.0), -10.0);
        assert_eq!(wrap_degrees(-190.0), 170.0);
    }
}
