//! Keypoint detectors.
//!
//! Every detector is a pure function of an [`Image`] and its parameters and
//! returns keypoints in base-image coordinates. `Keypoint::scale` is a
//! detector-defined size in base pixels:
//!
//! | detector | scale                                   |
//! |----------|-----------------------------------------|
//! | FAST     | 7 (the segment-test circle diameter)     |
//! | ORB      | 31 x level downscale (the patch size)    |
//! | SIFT     | 2^(2/3) x the blob's sigma               |
//! | SURF     | interpolated box-filter side length      |
//! | BRISK    | 7 x fitted layer downscale               |
//!
//! Detectors that do not estimate orientation leave it at 0.

mod brisk;
mod fast;
mod orb;
mod sift;
mod surf;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;

pub use brisk::brisk_detect;
pub use fast::{
    fast_detect, fast_score_map, segment_test_response, CIRCLE_OFFSETS, FAST_SCALE,
};
pub use orb::{harris_response, intensity_centroid_angle, orb_detect, ORB_PATCH_SIZE};
pub use sift::{orientation_peaks, sift_detect, SIFT_SCALE_PER_SIGMA};
pub use surf::{hessian_components, surf_detect, surf_haar_pair, surf_orientation, SurfFilter};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Keypoint {
    pub x: f32,
    pub y: f32,
    pub scale: f32,
    /// Radians in `[0, 2π)`, measured in image coordinates (y down).
    pub orientation: f32,
    pub response: f32,
    pub octave: u32,
}

impl Keypoint {
    pub fn new(x: f32, y: f32, scale: f32) -> Self {
        Keypoint {
            x,
            y,
            scale,
            orientation: 0.0,
            response: 0.0,
            octave: 0,
        }
    }

    pub fn with_orientation(mut self, orientation: f32) -> Self {
        self.orientation = wrap_angle(orientation);
        self
    }
}

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_angle(a: f32) -> f32 {
    let tau = std::f32::consts::TAU;
    let mut w = a.rem_euclid(tau);
    if w >= tau {
        w = 0.0;
    }
    w
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DetectorKind {
    Orb,
    Surf,
    Sift,
    Fast,
    Brisk,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 5] = [
        DetectorKind::Orb,
        DetectorKind::Surf,
        DetectorKind::Sift,
        DetectorKind::Fast,
        DetectorKind::Brisk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Orb => "ORB",
            DetectorKind::Surf => "SURF",
            DetectorKind::Sift => "SIFT",
            DetectorKind::Fast => "FAST",
            DetectorKind::Brisk => "BRISK",
        }
    }

    pub fn detect(self, img: &Image, params: &DetectorParams) -> Result<Vec<Keypoint>> {
        params.validate()?;
        match self {
            DetectorKind::Fast => fast_detect(img, params.fast_threshold, params.fast_arc, true),
            DetectorKind::Orb => orb_detect(img, params),
            DetectorKind::Sift => sift_detect(img, &params.sift),
            DetectorKind::Surf => surf_detect(img, &params.surf),
            DetectorKind::Brisk => brisk_detect(img, &params.brisk),
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DetectorKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown detector {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SiftParams {
    /// `None` picks as many octaves as keep the coarsest at least 16 px.
    pub octaves: Option<usize>,
    pub scales_per_octave: usize,
    pub base_sigma: f64,
    /// Applied to DoG values of an image scaled to `[0, 1]`.
    pub contrast_thresh: f64,
    pub edge_ratio: f64,
}

impl Default for SiftParams {
    fn default() -> Self {
        SiftParams {
            octaves: None,
            scales_per_octave: 3,
            base_sigma: 1.6,
            contrast_thresh: 0.03,
            edge_ratio: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurfParams {
    pub octaves: usize,
    pub hessian_thresh: f64,
}

impl Default for SurfParams {
    fn default() -> Self {
        SurfParams {
            octaves: 4,
            hessian_thresh: 600.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrbParams {
    pub n_features: usize,
    pub levels: usize,
    pub scale_factor: f64,
}

impl Default for OrbParams {
    fn default() -> Self {
        OrbParams {
            n_features: 500,
            levels: 8,
            scale_factor: 1.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BriskParams {
    pub octaves: usize,
    pub fast_threshold: u8,
}

impl Default for BriskParams {
    fn default() -> Self {
        BriskParams {
            octaves: 4,
            fast_threshold: 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorParams {
    pub fast_threshold: u8,
    pub fast_arc: usize,
    pub sift: SiftParams,
    pub surf: SurfParams,
    pub orb: OrbParams,
    pub brisk: BriskParams,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            fast_threshold: 20,
            fast_arc: 9,
            sift: SiftParams::default(),
            surf: SurfParams::default(),
            orb: OrbParams::default(),
            brisk: BriskParams::default(),
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be positive, got {v}")))
            }
        };
        positive("fast_threshold", self.fast_threshold as f64)?;
        if !(9..=12).contains(&self.fast_arc) {
            return Err(Error::invalid(format!(
                "fast_arc must be in [9, 12], got {}",
                self.fast_arc
            )));
        }
        positive("sift.scales_per_octave", self.sift.scales_per_octave as f64)?;
        positive("sift.base_sigma", self.sift.base_sigma)?;
        positive("sift.contrast_thresh", self.sift.contrast_thresh)?;
        positive("sift.edge_ratio", self.sift.edge_ratio)?;
        if let Some(o) = self.sift.octaves {
            positive("sift.octaves", o as f64)?;
        }
        positive("surf.octaves", self.surf.octaves as f64)?;
        positive("surf.hessian_thresh", self.surf.hessian_thresh)?;
        positive("orb.n_features", self.orb.n_features as f64)?;
        positive("orb.levels", self.orb.levels as f64)?;
        if !(self.orb.scale_factor > 1.0) {
            return Err(Error::invalid("orb.scale_factor must exceed 1"));
        }
        positive("brisk.octaves", self.brisk.octaves as f64)?;
        positive("brisk.fast_threshold", self.brisk.fast_threshold as f64)?;
        Ok(())
    }
}

pub(crate) fn require_size(img: &Image, min_w: usize, min_h: usize) -> Result<()> {
    if img.width() < min_w || img.height() < min_h {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min_width: min_w,
            min_height: min_h,
        });
    }
    Ok(())
}

/// Keep `i` when its score beats every 8-neighbour that precedes it in raster
/// order and ties or beats the ones that follow. Two survivors are therefore
/// never 8-adjacent. Scores `<= 0` never survive.
pub(crate) fn raster_nonmax(scores: &[f32], width: usize, height: usize, x: usize, y: usize) -> bool {
    let s = scores[y * width + x];
    if s <= 0.0 {
        return false;
    }
    for dy in -1isize..=1 {
        for dx in -1isize..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let nx = x as isize + dx;
            let ny = y as isize + dy;
            if nx < 0 || ny < 0 || nx >= width as isize || ny >= height as isize {
                continue;
            }
            let n = scores[ny as usize * width + nx as usize];
            let earlier = dy < 0 || (dy == 0 && dx < 0);
            if (earlier && n >= s) || (!earlier && n > s) {
                return false;
            }
        }
    }
    true
}

/// Offset of the vertex of the parabola through `(-1, a), (0, b), (1, c)`,
/// clamped to `[-0.5, 0.5]`; 0 when the points are not concave.
pub(crate) fn parabola_peak(a: f32, b: f32, c: f32) -> f32 {
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return 0.0;
    }
    (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_angle_range() {
        use std::f32::consts::{PI, TAU};
        assert_eq!(wrap_angle(0.0), 0.0);
        assert!((wrap_angle(-PI / 2.0) - 1.5 * PI).abs() < 1e-6);
        assert!(wrap_angle(TAU) < TAU);
        assert!(wrap_angle(-1e-9) < TAU);
    }

    #[test]
    fn detector_names_round_trip() {
        for k in DetectorKind::ALL {
            assert_eq!(k.name().parse::<DetectorKind>().unwrap(), k);
        }
        assert!("HARRIS".parse::<DetectorKind>().is_err());
    }

    #[test]
    fn params_validation() {
        assert!(DetectorParams::default().validate().is_ok());
        let p = DetectorParams {
            fast_arc: 13,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = DetectorParams {
            fast_threshold: 0,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn parabola_vertex() {
        assert_eq!(parabola_peak(1.0, 2.0, 1.0), 0.0);
        assert!((parabola_peak(1.0, 2.0, 1.5) - 0.1666667).abs() < 1e-5);
        assert_eq!(parabola_peak(1.0, 1.0, 1.0), 0.0);
    }
}
