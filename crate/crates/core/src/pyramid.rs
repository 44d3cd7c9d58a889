//! Gaussian image pyramids.

use crate::error::{Error, Result};
use crate::image::{gaussian_blur_f32, Image};

/// Levels coarser than this are dropped: the largest sampling patch used by
/// any descriptor is 31x31 plus a guard pixel.
pub const MIN_LEVEL_SIZE: usize = 32;

/// Anti-alias blur applied before resampling, in units of the level's
/// downsampling factor.
const ANTI_ALIAS_SIGMA: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct PyramidLevel {
    pub image: Image,
    /// Level resolution relative to the base image (1.0 at level 0).
    pub scale: f64,
    /// Effective blur of this level, in base-image pixels.
    pub sigma: f64,
}

impl PyramidLevel {
    /// Base-image pixels per level pixel.
    #[inline]
    pub fn downscale(&self) -> f64 {
        1.0 / self.scale
    }

    /// Map a level pixel position to base-image coordinates.
    #[inline]
    pub fn to_base(&self, x: f64, y: f64) -> (f64, f64) {
        let d = self.downscale();
        ((x + 0.5) * d - 0.5, (y + 0.5) * d - 0.5)
    }
}

#[derive(Clone, Debug)]
pub struct Pyramid {
    pub levels: Vec<PyramidLevel>,
}

impl Pyramid {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// Dimensions of level `k` for a `scale_factor` pyramid over a `w` x `h` base.
pub fn level_dims(w: usize, h: usize, scale_factor: f64, k: usize) -> (usize, usize) {
    let d = scale_factor.powi(k as i32);
    ((w as f64 / d).floor() as usize, (h as f64 / d).floor() as usize)
}

/// Build up to `n_levels` levels, each `scale_factor` smaller than the last.
/// Each level is smoothed from the base image and resampled bilinearly;
/// levels smaller than [`MIN_LEVEL_SIZE`] in either dimension are dropped.
pub fn build_pyramid(img: &Image, n_levels: usize, scale_factor: f64) -> Result<Pyramid> {
    if n_levels == 0 {
        return Err(Error::invalid("pyramid needs at least one level"));
    }
    if !(scale_factor > 1.0) || !scale_factor.is_finite() {
        return Err(Error::invalid(format!(
            "pyramid scale factor must exceed 1, got {scale_factor}"
        )));
    }
    if img.width() < MIN_LEVEL_SIZE || img.height() < MIN_LEVEL_SIZE {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            min_width: MIN_LEVEL_SIZE,
            min_height: MIN_LEVEL_SIZE,
        });
    }
    let base = img.to_float();
    let mut levels = Vec::with_capacity(n_levels);
    for k in 0..n_levels {
        let (w, h) = level_dims(img.width(), img.height(), scale_factor, k);
        if w < MIN_LEVEL_SIZE || h < MIN_LEVEL_SIZE {
            break;
        }
        let downscale = scale_factor.powi(k as i32);
        let sigma = ANTI_ALIAS_SIGMA * downscale;
        let blurred = gaussian_blur_f32(&base, sigma)?;
        let image = if k == 0 {
            blurred.quantize()
        } else {
            blurred.resize(w, h, downscale).quantize()
        };
        levels.push(PyramidLevel {
            image,
            scale: 1.0 / downscale,
            sigma,
        });
    }
    Ok(Pyramid { levels })
}
