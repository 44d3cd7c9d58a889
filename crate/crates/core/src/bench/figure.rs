//! Per-yaw scatter data and the distance-to-best ranking over combinations.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::pose::YAWS;
use super::report::{CombinationDump, PairDump, StatsDump};
use crate::error::{Error, Result};

/// Which pairs a scatter plot covers: pixel-identical query/template pairs,
/// or non-identical pairs whose query yaw differs from the template's by the
/// given degrees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum YawCase {
    Same,
    Yaw(i32),
}

impl YawCase {
    pub fn all() -> Vec<YawCase> {
        std::iter::once(YawCase::Same).chain(YAWS.into_iter().map(YawCase::Yaw)).collect()
    }

    pub fn of(pair: &PairDump) -> YawCase {
        if pair.identical {
            YawCase::Same
        } else {
            YawCase::Yaw(pair.query_pose.yaw - pair.template_pose.yaw)
        }
    }

    /// Short name usable in file names.
    pub fn label(self) -> String {
        match self {
            YawCase::Same => "same".into(),
            YawCase::Yaw(d) if d < 0 => format!("yaw_m{}", -d),
            YawCase::Yaw(d) => format!("yaw_{d}"),
        }
    }
}

impl fmt::Display for YawCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YawCase::Same => f.write_str("same"),
            YawCase::Yaw(d) => write!(f, "{d}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    NCorrect,
    MeanAngleDiff,
    MinDistance,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::NCorrect, Metric::MeanAngleDiff, Metric::MinDistance];

    pub fn name(self) -> &'static str {
        match self {
            Metric::NCorrect => "n_correct",
            Metric::MeanAngleDiff => "mean_angle_diff",
            Metric::MinDistance => "min_distance",
        }
    }

    /// Larger is better for the match count, smaller for the others.
    pub fn higher_is_better(self) -> bool {
        self == Metric::NCorrect
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown metric {s:?}")))
    }
}

/// One combination's aggregate over the pairs of a yaw case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub combination: String,
    pub pairs: usize,
    /// Mean correct-match count per pair.
    pub n_correct: f64,
    /// Match-weighted mean angle difference, degrees.
    pub mean_angle_diff: Option<f64>,
    /// Mean of the per-pair minimum distance over pairs with matches.
    pub min_distance: Option<f64>,
}

impl ScatterPoint {
    pub fn metric(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::NCorrect => Some(self.n_correct),
            Metric::MeanAngleDiff => self.mean_angle_diff,
            Metric::MinDistance => self.min_distance,
        }
    }
}

pub fn scatter_point(combo: &CombinationDump, case: YawCase) -> Option<ScatterPoint> {
    let pairs: Vec<&PairDump> = combo.pairs.iter().filter(|p| YawCase::of(p) == case).collect();
    if pairs.is_empty() {
        return None;
    }
    let n_total: usize = pairs.iter().map(|p| p.n_correct).sum();
    let matched: Vec<&&PairDump> = pairs.iter().filter(|p| p.n_correct > 0).collect();
    let (angle, dist) = if matched.is_empty() {
        (None, None)
    } else {
        let a = matched.iter().map(|p| p.mean_angle_diff * p.n_correct as f64).sum::<f64>() / n_total as f64;
        let d = matched.iter().map(|p| p.min_distance).sum::<f64>() / matched.len() as f64;
        (Some(a), Some(d))
    };
    Some(ScatterPoint {
        combination: combo.combination.clone(),
        pairs: pairs.len(),
        n_correct: n_total as f64 / pairs.len() as f64,
        mean_angle_diff: angle,
        min_distance: dist,
    })
}

/// Scatter points for every combination that has pairs in `case`.
pub fn scatter(dump: &StatsDump, case: YawCase) -> Vec<ScatterPoint> {
    dump.combinations.iter().filter_map(|c| scatter_point(c, case)).collect()
}

pub fn scatter_csv(points: &[ScatterPoint], stamp: (&str, u64)) -> String {
    let fmt_opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    let mut s = String::from("combination,pairs,n_correct,mean_angle_diff,min_distance,config_hash,seed\n");
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{:.6},{},{},{},{}",
            p.combination,
            p.pairs,
            p.n_correct,
            fmt_opt(p.mean_angle_diff),
            fmt_opt(p.min_distance),
            stamp.0,
            stamp.1
        );
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub combination: String,
    /// Min-max normalized coordinates on the ranking axes, each oriented so
    /// that 0 is the best observed value.
    pub normalized: Vec<f64>,
    pub distance_to_best: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub axes: Vec<String>,
    pub best: String,
    pub worst: String,
    /// Ascending by distance to the best combination.
    pub entries: Vec<RankEntry>,
}

/// Ranks points by Euclidean distance to the best one in min-max normalized
/// metric space. Each axis is normalized over the points given; the angle
/// axis uses its absolute value. The best point is the one nearest the ideal
/// corner (most matches, zero angle, zero distance). Points missing any axis
/// are left out.
pub fn rank(points: &[ScatterPoint], axes: &[Metric]) -> Result<Ranking> {
    if axes.is_empty() {
        return Err(Error::invalid("ranking needs at least one axis"));
    }
    let usable: Vec<(&ScatterPoint, Vec<f64>)> = points
        .iter()
        .filter_map(|p| {
            axes.iter()
                .map(|&m| p.metric(m).map(|v| if m == Metric::MeanAngleDiff { v.abs() } else { v }))
                .collect::<Option<Vec<f64>>>()
                .map(|v| (p, v))
        })
        .collect();
    if usable.is_empty() {
        return Err(Error::invalid("no combination has every ranking metric"));
    }
    let mut normalized: Vec<Vec<f64>> = vec![Vec::with_capacity(axes.len()); usable.len()];
    for (k, &m) in axes.iter().enumerate() {
        let lo = usable.iter().map(|(_, v)| v[k]).fold(f64::INFINITY, f64::min);
        let hi = usable.iter().map(|(_, v)| v[k]).fold(f64::NEG_INFINITY, f64::max);
        for (i, (_, v)) in usable.iter().enumerate() {
            let t = if hi > lo { (v[k] - lo) / (hi - lo) } else { 0.0 };
            normalized[i].push(if m.higher_is_better() { 1.0 - t } else { t });
        }
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let best = (0..usable.len())
        .min_by(|&a, &b| norm(&normalized[a]).total_cmp(&norm(&normalized[b])))
        .expect("non-empty");
    let mut entries: Vec<RankEntry> = usable
        .iter()
        .zip(&normalized)
        .map(|((p, _), nv)| RankEntry {
            combination: p.combination.clone(),
            normalized: nv.clone(),
            distance_to_best: nv
                .iter()
                .zip(&normalized[best])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
        })
        .collect();
    entries.sort_by(|a, b| a.distance_to_best.total_cmp(&b.distance_to_best));
    Ok(Ranking {
        axes: axes.iter().map(|m| m.name().to_string()).collect(),
        best: usable[best].0.combination.clone(),
        worst: entries.last().expect("non-empty").combination.clone(),
        entries,
    })
}

pub fn ranking_csv(r: &Ranking, stamp: (&str, u64)) -> String {
    let mut s = String::from("rank,combination,");
    for a in &r.axes {
        let _ = write!(s, "{a}_normalized,");
    }
    s.push_str("distance_to_best,config_hash,seed\n");
    for (i, e) in r.entries.iter().enumerate() {
        let _ = write!(s, "{},{},", i + 1, e.combination);
        for v in &e.normalized {
            let _ = write!(s, "{v:.6},");
        }
        let _ = writeln!(s, "{:.6},{},{}", e.distance_to_best, stamp.0, stamp.1);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(name: &str, n: f64, a: f64, d: f64) -> ScatterPoint {
        ScatterPoint {
            combination: name.into(),
            pairs: 1,
            n_correct: n,
            mean_angle_diff: Some(a),
            min_distance: Some(d),
        }
    }

    #[test]
    fn single_point_is_best_and_worst() {
        let r = rank(&[point("FAST-SURF", 3.0, 1.0, 0.2)], &Metric::ALL).unwrap();
        assert_eq!((r.best.as_str(), r.worst.as_str()), ("FAST-SURF", "FAST-SURF"));
        assert_eq!(r.entries[0].distance_to_best, 0.0);
    }

    #[test]
    fn hand_computed_ranking() {
        // n: 10, 5, 0 -> 0, .5, 1 ; |angle|: 0, 2, 4 -> 0, .5, 1 ; dist: 1, 3, 2 -> 0, 1, .5
        let pts = [point("A", 10.0, 0.0, 1.0), point("B", 5.0, -2.0, 3.0), point("C", 0.0, 4.0, 2.0)];
        let r = rank(&pts, &Metric::ALL).unwrap();
        assert_eq!(r.best, "A");
        let d = |name: &str| r.entries.iter().find(|e| e.combination == name).unwrap().distance_to_best;
        assert!((d("B") - (0.25f64 + 0.25 + 1.0).sqrt()).abs() < 1e-12);
        assert!((d("C") - (1.0f64 + 1.0 + 0.25).sqrt()).abs() < 1e-12);
        assert_eq!(r.worst, "C");
        assert_eq!(r.entries.iter().map(|e| e.combination.as_str()).collect::<Vec<_>>(), ["A", "B", "C"]);
    }

    #[test]
    fn yaw_case_labels() {
        assert_eq!(YawCase::all().len(), 6);
        assert_eq!(YawCase::Yaw(-15).label(), "yaw_m15");
        assert_eq!(YawCase::Same.to_string(), "same");
        assert!("n_correct".parse::<Metric>().is_ok());
        assert!("speed".parse::<Metric>().is_err());
    }
}
