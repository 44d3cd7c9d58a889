//! Descriptor extractors.
//!
//! Each extractor maps an image and a keypoint list to `(kept, descs)`, where
//! `kept` is the subsequence of input keypoints that could be described and
//! `descs[i]` describes `kept[i]`. Keypoints are accepted from any detector:
//! a descriptor that needs an orientation computes its own for keypoints
//! whose orientation is 0, and the kept keypoint carries it.
//!
//! The keypoint `scale` is read with the detector conventions of
//! [`crate::detect`]:
//!
//! | descriptor   | sampling scale                         |
//! |--------------|----------------------------------------|
//! | BRIEF        | none (fixed 31x31 patch)               |
//! | ORB          | `max(1, scale / 31)`                   |
//! | BRISK        | `max(1, scale / 7)`                    |
//! | SIFT         | `sigma = scale / 2^(2/3)`              |
//! | SURF         | `s = 1.2 * scale / 9`                  |

mod brief;
mod brisk;
mod orb;
mod pattern;
mod sift;
mod surf;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::detect::Keypoint;
use crate::error::{Error, Result};
use crate::image::Image;

pub use brief::brief_describe;
pub use brisk::brisk_describe;
pub use orb::orb_describe;
pub use pattern::{BriskPattern, SamplingPattern, BRIEF_PAIRS, DEFAULT_PATTERN_SEED};
pub use sift::sift_describe;
pub use surf::surf_describe;

/// A binary bitstring (bit `i` lives in word `i / 64`, bit `i % 64`) or a
/// real-valued vector.
#[derive(Clone, Debug, PartialEq)]
pub enum Descriptor {
    Binary(Vec<u64>),
    Real(Vec<f32>),
}

impl Descriptor {
    /// Bits for binary descriptors, dimensions for real ones.
    pub fn len(&self) -> usize {
        match self {
            Descriptor::Binary(w) => w.len() * 64,
            Descriptor::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, Descriptor::Binary(_))
    }

    pub fn bit(&self, i: usize) -> Option<bool> {
        match self {
            Descriptor::Binary(w) => w.get(i / 64).map(|word| (word >> (i % 64)) & 1 == 1),
            Descriptor::Real(_) => None,
        }
    }

    /// Bit-packed bytes (bit `i` is bit `i % 8` of byte `i / 8`) or
    /// little-endian `f32`s.
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            Descriptor::Binary(w) => w.iter().flat_map(|x| x.to_le_bytes()).collect(),
            Descriptor::Real(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
        }
    }

    pub fn from_bytes(binary: bool, bytes: &[u8]) -> Result<Self> {
        if binary {
            if bytes.len() % 8 != 0 {
                return Err(Error::Malformed(format!(
                    "binary descriptor of {} bytes is not a whole number of words",
                    bytes.len()
                )));
            }
            Ok(Descriptor::Binary(
                bytes
                    .chunks_exact(8)
                    .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
                    .collect(),
            ))
        } else {
            if bytes.len() % 4 != 0 {
                return Err(Error::Malformed(format!(
                    "real descriptor of {} bytes is not a whole number of floats",
                    bytes.len()
                )));
            }
            Ok(Descriptor::Real(
                bytes
                    .chunks_exact(4)
                    .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
                    .collect(),
            ))
        }
    }
}

/// Packs booleans into [`Descriptor::Binary`] words.
pub(crate) struct BitWriter {
    words: Vec<u64>,
    n: usize,
}

impl BitWriter {
    pub(crate) fn new(bits: usize) -> Self {
        BitWriter {
            words: vec![0; bits.div_ceil(64)],
            n: 0,
        }
    }

    #[inline]
    pub(crate) fn push(&mut self, bit: bool) {
        if bit {
            self.words[self.n / 64] |= 1 << (self.n % 64);
        }
        self.n += 1;
    }

    pub(crate) fn finish(self) -> Descriptor {
        debug_assert_eq!(self.n, self.words.len() * 64);
        Descriptor::Binary(self.words)
    }
}

/// L2-normalize in place; leaves an all-zero vector untouched.
pub(crate) fn normalize(v: &mut [f32]) {
    let norm = v.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x = (*x as f64 / norm) as f32;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DescriptorKind {
    Brief,
    Brisk,
    Sift,
    Surf,
    Orb,
}

impl DescriptorKind {
    pub const ALL: [DescriptorKind; 5] = [
        DescriptorKind::Brief,
        DescriptorKind::Brisk,
        DescriptorKind::Sift,
        DescriptorKind::Surf,
        DescriptorKind::Orb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DescriptorKind::Brief => "BRIEF",
            DescriptorKind::Brisk => "BRISK",
            DescriptorKind::Sift => "SIFT",
            DescriptorKind::Surf => "SURF",
            DescriptorKind::Orb => "ORB",
        }
    }

    pub fn is_binary(self) -> bool {
        matches!(self, DescriptorKind::Brief | DescriptorKind::Brisk | DescriptorKind::Orb)
    }

    /// Bits (binary) or dimensions (real).
    pub fn len(self) -> usize {
        match self {
            DescriptorKind::Brief | DescriptorKind::Orb => 256,
            DescriptorKind::Brisk => 512,
            DescriptorKind::Sift => 128,
            DescriptorKind::Surf => 64,
        }
    }

    pub fn describe(
        self,
        img: &Image,
        kps: &[Keypoint],
        pattern: &SamplingPattern,
    ) -> (Vec<Keypoint>, Vec<Descriptor>) {
        match self {
            DescriptorKind::Brief => brief_describe(img, kps, pattern),
            DescriptorKind::Orb => orb_describe(img, kps, pattern),
            DescriptorKind::Brisk => brisk_describe(img, kps, &pattern.brisk),
            DescriptorKind::Sift => sift_describe(img, kps),
            DescriptorKind::Surf => surf_describe(img, kps),
        }
    }
}

impl fmt::Display for DescriptorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DescriptorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DescriptorKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown descriptor {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_round_trip() {
        let b = Descriptor::Binary(vec![0x0102_0304_0506_0708, u64::MAX]);
        let bytes = b.to_bytes();
        assert_eq!(bytes.len(), 16);
        assert_eq!(bytes[0], 0x08);
        assert_eq!(Descriptor::from_bytes(true, &bytes).unwrap(), b);
        let r = Descriptor::Real(vec![0.5, -1.25, 3.0]);
        assert_eq!(Descriptor::from_bytes(false, &r.to_bytes()).unwrap(), r);
        assert!(Descriptor::from_bytes(true, &[0; 7]).is_err());
    }

    #[test]
    fn bit_writer_is_lsb_first() {
        let mut w = BitWriter::new(64);
        w.push(true);
        w.push(false);
        w.push(true);
        for _ in 3..64 {
            w.push(false);
        }
        let d = w.finish();
        assert_eq!(d, Descriptor::Binary(vec![0b101]));
        assert_eq!(d.bit(2), Some(true));
        assert_eq!(d.to_bytes()[0], 0b101);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in DescriptorKind::ALL {
            assert_eq!(k.name().parse::<DescriptorKind>().unwrap(), k);
        }
        assert!("FREAK".parse::<DescriptorKind>().is_err());
    }
}
