//! Case-level accuracy and throughput.

use serde::{Deserialize, Serialize};

use super::pose::Case;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccuracyCounts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl AccuracyCounts {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// `(tp + tn) / total * 100`.
    pub fn percent(&self) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        (self.tp + self.tn) as f64 / self.total() as f64 * 100.0
    }
}

/// Tally one decision per case: a matched positive case is a true positive,
/// an unmatched negative case a true negative.
pub fn compute_accuracy(decisions: &[bool], cases: &[Case]) -> Result<(AccuracyCounts, f64)> {
    if decisions.len() != cases.len() {
        return Err(Error::invalid(format!(
            "{} decisions for {} ground-truth cases",
            decisions.len(),
            cases.len()
        )));
    }
    let mut c = AccuracyCounts::default();
    for (&d, case) in decisions.iter().zip(cases) {
        match (d, case.positive) {
            (true, true) => c.tp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok((c, c.percent()))
}

/// Correct matches per second of pipeline time.
pub fn matches_per_second(total_matches: usize, total_time: f64) -> Result<f64> {
    if !(total_time > 0.0) {
        return Err(Error::invalid(format!("total time must be positive, got {total_time}")));
    }
    Ok(total_matches as f64 / total_time)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(positive: bool) -> Case {
        Case {
            template: 0,
            query: 0,
            positive,
        }
    }

    #[test]
    fn all_identical_matched() {
        let cases = vec![case(true); 127];
        let (c, pct) = compute_accuracy(&[true; 127], &cases).unwrap();
        assert_eq!((c.tp, c.tn, c.fp, c.fn_), (127, 0, 0, 0));
        assert_eq!(pct, 100.0);
    }

    #[test]
    fn all_negative() {
        let (c, pct) = compute_accuracy(&[false; 10], &[case(false); 10]).unwrap();
        assert_eq!(c.tn, 10);
        assert_eq!(pct, 100.0);
        assert!(compute_accuracy(&[false; 2], &[case(false); 3]).is_err());
    }

    #[test]
    fn rates() {
        assert_eq!(matches_per_second(0, 3.0).unwrap(), 0.0);
        assert_eq!(matches_per_second(1000, 2.0).unwrap(), 500.0);
        assert!(matches_per_second(5, 0.0).is_err());
    }
}
