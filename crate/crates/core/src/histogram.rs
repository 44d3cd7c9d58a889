//! Normalized intensity histograms and their comparison.

use crate::error::{Error, Result};
use crate::image::Image;

/// 256-bin intensity histogram normalized to unit sum.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    bins: [f64; 256],
}

impl Histogram {
    /// Normalize raw bin weights. Fails when the weights are negative or sum
    /// to zero.
    pub fn from_counts(counts: &[f64; 256]) -> Result<Self> {
        if counts.iter().any(|&c| c < 0.0 || !c.is_finite()) {
            return Err(Error::invalid("histogram counts must be finite and non-negative"));
        }
        let total: f64 = counts.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("histogram of an empty population"));
        }
        let mut bins = [0.0; 256];
        for (b, &c) in bins.iter_mut().zip(counts) {
            *b = c / total;
        }
        Ok(Histogram { bins })
    }

    pub fn bins(&self) -> &[f64; 256] {
        &self.bins
    }
}

pub fn intensity_histogram(img: &Image) -> Result<Histogram> {
    if img.data().is_empty() {
        return Err(Error::invalid("histogram of an empty image"));
    }
    let mut counts = [0u64; 256];
    for &v in img.data() {
        counts[v as usize] += 1;
    }
    let total = img.data().len() as f64;
    let mut bins = [0.0; 256];
    for (b, &c) in bins.iter_mut().zip(&counts) {
        *b = c as f64 / total;
    }
    Ok(Histogram { bins })
}

/// Pearson correlation of the two bin vectors.
///
/// A zero-variance histogram correlates 1.0 with an identical histogram and
/// 0.0 with anything else.
pub fn histogram_correlation(a: &Histogram, b: &Histogram) -> f64 {
    let n = 256.0;
    let mean_a = a.bins.iter().sum::<f64>() / n;
    let mean_b = b.bins.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.bins.iter().zip(&b.bins) {
        let dx = x - mean_a;
        let dy = y - mean_b;
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return if a == b { 1.0 } else { 0.0 };
    }
    (cov / (var_a * var_b).sqrt()).clamp(-1.0, 1.0)
}
