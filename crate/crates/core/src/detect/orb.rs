//! Oriented FAST over a Gaussian pyramid, ranked by the Harris measure.

use super::fast::fast_score_map;
use super::{raster_nonmax, require_size, wrap_angle, DetectorParams, Keypoint};
use crate::error::Result;
use crate::image::Image;
use crate::pyramid::{build_pyramid, MIN_LEVEL_SIZE};

pub const ORB_PATCH_SIZE: f32 = 31.0;
const CENTROID_RADIUS: usize = 15;
const HARRIS_K: f64 = 0.04;
const HARRIS_BLOCK: isize = 7;

/// Harris corner measure `det(M) - k tr(M)^2` of the Sobel structure tensor
/// summed over a 7x7 window. `(x, y)` must be at least 4 px from the border.
pub fn harris_response(img: &Image, x: usize, y: usize) -> f64 {
    let r = HARRIS_BLOCK / 2;
    let (mut sxx, mut syy, mut sxy) = (0.0f64, 0.0f64, 0.0f64);
    for dy in -r..=r {
        for dx in -r..=r {
            let px = x as isize + dx;
            let py = y as isize + dy;
            let p = |ox: isize, oy: isize| img.get((px + ox) as usize, (py + oy) as usize) as f64;
            let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            sxx += gx * gx;
            syy += gy * gy;
            sxy += gx * gy;
        }
    }
    // Sobel gain 4 per axis and the window area keep values in a readable range
    let norm = 1.0 / (16.0 * (HARRIS_BLOCK * HARRIS_BLOCK) as f64);
    let (sxx, syy, sxy) = (sxx * norm, syy * norm, sxy * norm);
    sxx * syy - sxy * sxy - HARRIS_K * (sxx + syy) * (sxx + syy)
}

/// Intensity-centroid orientation `atan2(m01, m10)` over a disc of `radius`
/// pixels centred on the pixel nearest `(x, y)`. `None` when the disc leaves
/// the image.
pub fn intensity_centroid_angle(img: &Image, x: f32, y: f32, radius: usize) -> Option<f32> {
    let cx = x.round() as isize;
    let cy = y.round() as isize;
    let r = radius as isize;
    if cx - r < 0 || cy - r < 0 || cx + r >= img.width() as isize || cy + r >= img.height() as isize {
        return None;
    }
    let (mut m10, mut m01) = (0i64, 0i64);
    for dy in -r..=r {
        let span = ((r * r - dy * dy) as f64).sqrt().floor() as isize;
        let row = (cy + dy) as usize * img.width();
        for dx in -span..=span {
            let v = img.data()[row + (cx + dx) as usize] as i64;
            m10 += dx as i64 * v;
            m01 += dy as i64 * v;
        }
    }
    Some(wrap_angle((m01 as f64).atan2(m10 as f64) as f32))
}

struct Candidate {
    harris: f64,
    level: usize,
    x: usize,
    y: usize,
}

/// ORB detector: FAST on every pyramid level, top `n_features` by Harris
/// measure across all levels, intensity-centroid orientation at the
/// keypoint's level. Returned in descending Harris order.
pub fn orb_detect(img: &Image, params: &DetectorParams) -> Result<Vec<Keypoint>> {
    require_size(img, MIN_LEVEL_SIZE, MIN_LEVEL_SIZE)?;
    let p = &params.orb;
    let pyramid = build_pyramid(img, p.levels, p.scale_factor)?;
    let border = CENTROID_RADIUS + 1;
    let mut candidates = Vec::new();
    for (li, level) in pyramid.levels.iter().enumerate() {
        let limg = &level.image;
        let (w, h) = (limg.width(), limg.height());
        if w <= 2 * border || h <= 2 * border {
            continue;
        }
        let scores = fast_score_map(limg, params.fast_threshold, params.fast_arc);
        for y in border..h - border {
            for x in border..w - border {
                if raster_nonmax(&scores, w, h, x, y) {
                    candidates.push(Candidate {
                        harris: harris_response(limg, x, y),
                        level: li,
                        x,
                        y,
                    });
                }
            }
        }
    }
    candidates.sort_by(|a, b| {
        b.harris
            .total_cmp(&a.harris)
            .then(a.level.cmp(&b.level))
            .then(a.y.cmp(&b.y))
            .then(a.x.cmp(&b.x))
    });
    candidates.truncate(p.n_features);

    let mut out = Vec::with_capacity(candidates.len());
    for c in candidates {
        let level = &pyramid.levels[c.level];
        let orientation =
            intensity_centroid_angle(&level.image, c.x as f32, c.y as f32, CENTROID_RADIUS)
                .expect("candidates keep a centroid-radius border");
        let (bx, by) = level.to_base(c.x as f64, c.y as f64);
        let bx = bx.clamp(0.0, img.width() as f64 - 1.0) as f32;
        let by = by.clamp(0.0, img.height() as f64 - 1.0) as f32;
        out.push(Keypoint {
            x: bx,
            y: by,
            scale: ORB_PATCH_SIZE * level.downscale() as f32,
            orientation,
            response: c.harris.max(0.0) as f32,
            octave: c.level as u32,
        });
    }
    Ok(out)
}
