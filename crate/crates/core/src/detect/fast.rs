//! FAST segment-test corner detector.

use super::{raster_nonmax, require_size, Keypoint};
use crate::error::{Error, Result};
use crate::image::Image;

/// Radius-3 Bresenham circle, clockwise from 12 o'clock.
pub const CIRCLE_OFFSETS: [(isize, isize); 16] = [
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
];

pub const FAST_SCALE: f32 = 7.0;

/// Largest threshold `t` for which pixel `(x, y)` still passes the segment
/// test with `arc` contiguous pixels, or `None` when it fails even at `t = 0`.
/// The pixel must be at least 3 px from every border.
pub fn segment_test_response(img: &Image, x: usize, y: usize, arc: usize) -> Option<u8> {
    let c = img.get(x, y) as i32;
    let mut ring = [0i32; 16];
    for (v, &(dx, dy)) in ring.iter_mut().zip(&CIRCLE_OFFSETS) {
        *v = img.get((x as isize + dx) as usize, (y as isize + dy) as usize) as i32 - c;
    }
    arc_response(&ring, arc)
}

/// `ring` holds circle intensity minus centre intensity.
fn arc_response(ring: &[i32; 16], arc: usize) -> Option<u8> {
    let mut best = -1i32;
    for start in 0..16 {
        let mut bright = i32::MAX;
        let mut dark = i32::MAX;
        for k in 0..arc {
            let d = ring[(start + k) & 15];
            bright = bright.min(d);
            dark = dark.min(-d);
        }
        // p > c + t  <=>  t <= (p - c) - 1
        best = best.max(bright - 1).max(dark - 1);
    }
    (best >= 0).then_some(best.min(255) as u8)
}

/// Sum of how far the circle pixels of the winning polarity exceed the
/// threshold; breaks ties between equal segment-test responses.
fn strength(ring: &[i32; 16], threshold: i32) -> i32 {
    let mut bright = 0;
    let mut dark = 0;
    for &d in ring {
        if d > threshold {
            bright += d - threshold;
        } else if d < -threshold {
            dark += -d - threshold;
        }
    }
    bright.max(dark)
}

#[inline]
fn has_run(mask: u32, arc: usize) -> bool {
    let mut m = mask | (mask << 16);
    for _ in 1..arc {
        m &= m >> 1;
    }
    m != 0
}

/// Composite score per pixel: the segment-test response plus a tie-breaking
/// fraction in `[0, 1)` from [`strength`]. Non-corners score 0; corners
/// score at least `threshold`.
pub fn fast_score_map(img: &Image, threshold: u8, arc: usize) -> Vec<f32> {
    let (w, h) = (img.width(), img.height());
    let mut scores = vec![0.0f32; w * h];
    if w < 7 || h < 7 {
        return scores;
    }
    let t = threshold as i32;
    let data = img.data();
    let offsets: [isize; 16] = CIRCLE_OFFSETS.map(|(dx, dy)| dy * w as isize + dx);
    let min_compass = arc / 4;
    for y in 3..h - 3 {
        for x in 3..w - 3 {
            let idx = y * w + x;
            let c = data[idx] as i32;
            let px = |k: usize| data[(idx as isize + offsets[k]) as usize] as i32;
            let mut nb = 0;
            let mut nd = 0;
            for k in [0, 4, 8, 12] {
                let v = px(k);
                nb += (v > c + t) as usize;
                nd += (v < c - t) as usize;
            }
            if nb < min_compass && nd < min_compass {
                continue;
            }
            let mut ring = [0i32; 16];
            let mut bmask = 0u32;
            let mut dmask = 0u32;
            for (k, r) in ring.iter_mut().enumerate() {
                let d = px(k) - c;
                *r = d;
                bmask |= ((d > t) as u32) << k;
                dmask |= ((d < -t) as u32) << k;
            }
            if !has_run(bmask, arc) && !has_run(dmask, arc) {
                continue;
            }
            let response = arc_response(&ring, arc).expect("segment test passed");
            debug_assert!(response as i32 >= t);
            scores[idx] = response as f32 + strength(&ring, t) as f32 / 4096.0;
        }
    }
    scores
}

/// FAST corners: pixels with at least `arc` contiguous circle pixels all
/// brighter than `centre + threshold` or all darker than `centre - threshold`.
/// With `nonmax`, only 3x3 maxima of the score survive. Output is in raster
/// order.
pub fn fast_detect(img: &Image, threshold: u8, arc: usize, nonmax: bool) -> Result<Vec<Keypoint>> {
    require_size(img, 7, 7)?;
    if threshold == 0 {
        return Err(Error::invalid("FAST threshold must be positive"));
    }
    if !(9..=16).contains(&arc) {
        return Err(Error::invalid(format!("FAST arc must be in [9, 16], got {arc}")));
    }
    let (w, h) = (img.width(), img.height());
    let scores = fast_score_map(img, threshold, arc);
    let mut out = Vec::new();
    for y in 3..h - 3 {
        for x in 3..w - 3 {
            let s = scores[y * w + x];
            if s <= 0.0 {
                continue;
            }
            if nonmax && !raster_nonmax(&scores, w, h, x, y) {
                continue;
            }
            out.push(Keypoint {
                x: x as f32,
                y: y as f32,
                scale: FAST_SCALE,
                orientation: 0.0,
                response: s.floor(),
                octave: 0,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Image {
        Image::from_fn(20, 20, |x, y| {
            if (5..15).contains(&x) && (5..15).contains(&y) {
                255
            } else {
                0
            }
        })
    }

    #[test]
    fn constant_image_has_no_corners() {
        let img = Image::filled(32, 32, 128);
        assert!(fast_detect(&img, 20, 9, true).unwrap().is_empty());
        assert!(fast_detect(&img, 20, 9, false).unwrap().is_empty());
    }

    #[test]
    fn white_square_has_four_corners() {
        let kps = fast_detect(&square(), 20, 9, true).unwrap();
        assert_eq!(kps.len(), 4, "{kps:?}");
        for (cx, cy) in [(5.0, 5.0), (14.0, 5.0), (5.0, 14.0), (14.0, 14.0)] {
            assert!(kps
                .iter()
                .any(|k| ((k.x - cx).powi(2) + (k.y - cy).powi(2)).sqrt() <= 1.0));
        }
        assert!(kps.iter().all(|k| k.scale == 7.0 && k.orientation == 0.0 && k.response == 254.0));
    }

    #[test]
    fn response_is_the_largest_passing_threshold() {
        let img = square();
        let r = segment_test_response(&img, 5, 5, 9).unwrap() as i32;
        let ring: [i32; 16] = CIRCLE_OFFSETS.map(|(dx, dy)| {
            img.get((5 + dx) as usize, (5 + dy) as usize) as i32 - img.get(5, 5) as i32
        });
        let passes = |t: i32| {
            (0..16).any(|s| (0..9).all(|k| ring[(s + k) % 16] < -t))
                || (0..16).any(|s| (0..9).all(|k| ring[(s + k) % 16] > t))
        };
        assert!(passes(r));
        assert!(!passes(r + 1));
    }

    #[test]
    fn too_small_or_bad_params() {
        assert!(fast_detect(&Image::filled(6, 10, 0), 20, 9, true).is_err());
        assert!(fast_detect(&square(), 0, 9, true).is_err());
        assert!(fast_detect(&square(), 20, 8, true).is_err());
    }
}
