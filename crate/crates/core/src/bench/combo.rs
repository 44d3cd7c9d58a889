//! The 23 detector/descriptor pairings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::describe::DescriptorKind;
use crate::detect::DetectorKind;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CombinationId {
    pub detector: DetectorKind,
    pub descriptor: DescriptorKind,
}

impl CombinationId {
    /// Fails for the two pairings outside the matrix.
    pub fn new(detector: DetectorKind, descriptor: DescriptorKind) -> Result<Self> {
        let c = CombinationId { detector, descriptor };
        if is_excluded(c) {
            return Err(Error::invalid(format!("{c} is not part of the combination matrix")));
        }
        Ok(c)
    }
}

fn is_excluded(c: CombinationId) -> bool {
    matches!(
        (c.detector, c.descriptor),
        (DetectorKind::Sift, DescriptorKind::Orb) | (DetectorKind::Brisk, DescriptorKind::Brisk)
    )
}

/// Detector blocks ORB, SURF, SIFT, FAST, BRISK; within each block the
/// descriptors BRIEF, BRISK, SIFT, SURF, ORB. SIFT/ORB and BRISK/BRISK are
/// absent.
pub fn combination_matrix() -> Vec<CombinationId> {
    DetectorKind::ALL
        .into_iter()
        .flat_map(|detector| {
            DescriptorKind::ALL
                .into_iter()
                .map(move |descriptor| CombinationId { detector, descriptor })
        })
        .filter(|&c| !is_excluded(c))
        .collect()
}

impl fmt::Display for CombinationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.detector, self.descriptor)
    }
}

impl FromStr for CombinationId {
    type Err = Error;

    /// `DETECTOR-DESCRIPTOR`, case-insensitive, e.g. `fast-surf`.
    fn from_str(s: &str) -> Result<Self> {
        let (d, e) = s
            .trim()
            .split_once(['-', '/'])
            .ok_or_else(|| Error::invalid(format!("expected DETECTOR-DESCRIPTOR, got {s:?}")))?;
        CombinationId::new(d.parse()?, e.parse()?)
    }
}
