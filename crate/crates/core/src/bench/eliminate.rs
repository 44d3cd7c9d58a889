//! The two query-elimination stages: FAST keypoint-count hysteresis and the
//! histogram prefilter.

use serde::{Deserialize, Serialize};

use crate::detect::{fast_detect, DetectorParams};
use crate::error::{Error, Result};
use crate::histogram::{histogram_correlation, intensity_histogram, Histogram};
use crate::image::Image;

/// Keypoint counts of plain FAST with the default detector parameters.
pub fn fast_counts(images: &[Image]) -> Result<Vec<usize>> {
    let p = DetectorParams::default();
    images
        .iter()
        .map(|img| fast_detect(img, p.fast_threshold, p.fast_arc, true).map(|k| k.len()))
        .collect()
}

fn check_band(lower: usize, upper: usize) -> Result<()> {
    if lower >= upper {
        return Err(Error::invalid(format!(
            "hysteresis lower bound {lower} must be below upper bound {upper}"
        )));
    }
    Ok(())
}

/// Split indices by precomputed keypoint counts: kept when
/// `lower <= count <= upper`.
pub fn partition_by_count(counts: &[usize], lower: usize, upper: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    check_band(lower, upper)?;
    Ok((0..counts.len()).partition(|&i| (lower..=upper).contains(&counts[i])))
}

/// Query indices kept and rejected by the FAST keypoint-count band
/// `[lower, upper]`. Always uses FAST, whatever combination is under test.
pub fn keypoint_count_filter(queries: &[Image], lower: usize, upper: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    check_band(lower, upper)?;
    partition_by_count(&fast_counts(queries)?, lower, upper)
}

/// How two intensity histograms are compared; both give 1 for identical
/// histograms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistogramComparison {
    /// Pearson correlation of the bin vectors, in `[-1, 1]`.
    #[default]
    Correlation,
    /// Sum of bin-wise minima, in `[0, 1]`.
    Intersection,
}

impl HistogramComparison {
    pub fn compare(self, a: &Histogram, b: &Histogram) -> f64 {
        match self {
            HistogramComparison::Correlation => histogram_correlation(a, b),
            HistogramComparison::Intersection => a.bins().iter().zip(b.bins()).map(|(x, y)| x.min(*y)).sum(),
        }
    }
}

fn check_threshold(threshold: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::invalid(format!("histogram threshold must be in [0, 1], got {threshold}")));
    }
    Ok(())
}

/// Template indices whose histogram score against the query strictly
/// exceeds `threshold`.
pub fn prefilter_histograms(
    query: &Histogram,
    templates: &[Histogram],
    threshold: f64,
    method: HistogramComparison,
) -> Result<Vec<usize>> {
    check_threshold(threshold)?;
    Ok(templates
        .iter()
        .enumerate()
        .filter(|(_, t)| method.compare(query, t) > threshold)
        .map(|(i, _)| i)
        .collect())
}

/// Template indices whose intensity-histogram correlation with the query
/// strictly exceeds `threshold`.
pub fn histogram_prefilter(query: &Image, templates: &[Image], threshold: f64) -> Result<Vec<usize>> {
    check_threshold(threshold)?;
    let q = intensity_histogram(query)?;
    let t = templates.iter().map(intensity_histogram).collect::<Result<Vec<_>>>()?;
    prefilter_histograms(&q, &t, threshold, HistogramComparison::Correlation)
}
