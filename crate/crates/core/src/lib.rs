//! Local feature detection, description and matching, plus the harness that
//! benchmarks every detector/descriptor pairing against a pose-grid dataset.
//!
//! The crate is organised bottom-up:
//!
//! - [`image`], [`integral`], [`pyramid`], [`histogram`]: raster substrate.
//! - [`detect`]: FAST, ORB, SIFT, SURF and BRISK keypoint detectors.
//! - [`describe`]: BRIEF, ORB, BRISK, SIFT and SURF descriptor extractors.
//! - [`matching`]: brute-force matching, match filtering and match statistics.
//! - [`bench`]: query elimination, the combination matrix, accuracy and
//!   throughput metrics, reports and the location-cube localizer.

pub mod bench;
pub mod describe;
pub mod detect;
mod error;
pub mod histogram;
pub mod image;
pub mod integral;
pub mod matching;
pub mod pyramid;

pub use crate::describe::{Descriptor, DescriptorKind, SamplingPattern};
pub use crate::detect::{DetectorParams, Keypoint};
pub use crate::error::{Error, Result};
pub use crate::histogram::Histogram;
pub use crate::image::{FloatImage, Image};
pub use crate::integral::IntegralImage;
pub use crate::matching::{Match, MatchStats};
pub use crate::pyramid::Pyramid;
