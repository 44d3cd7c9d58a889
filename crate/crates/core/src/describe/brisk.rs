//! BRISK: smoothed samples on concentric rings, oriented by long-pair
//! gradients, compared over short pairs.

use super::pattern::BRISK_BITS;
use super::{BitWriter, BriskPattern, Descriptor};
use crate::detect::{wrap_angle, Keypoint, FAST_SCALE};
use crate::image::Image;
use crate::integral::IntegralImage;

/// Rounded box mean of half-width `max(sigma, 0.5)` centred on the real
/// position `(x, y)`.
fn sample(ii: &IntegralImage, x: f64, y: f64, sigma: f64) -> f64 {
    let r = sigma.max(0.5);
    let (cx, cy) = (x + 0.5, y + 0.5);
    ii.box_mean(cx - r, cy - r, cx + r, cy + r).round()
}

/// Long-pair gradient direction of the unrotated pattern at scale `t`.
fn orientation(ii: &IntegralImage, pattern: &BriskPattern, x: f64, y: f64, t: f64) -> f32 {
    let values: Vec<f64> = pattern
        .points
        .iter()
        .map(|&(px, py, s)| sample(ii, x + px * t, y + py * t, s * t))
        .collect();
    let (mut gx, mut gy) = (0.0f64, 0.0f64);
    for &(i, j) in &pattern.long_pairs {
        let (dx, dy) = (pattern.points[j].0 - pattern.points[i].0, pattern.points[j].1 - pattern.points[i].1);
        let g = (values[j] - values[i]) / (dx * dx + dy * dy);
        gx += g * dx;
        gy += g * dy;
    }
    wrap_angle(gy.atan2(gx) as f32)
}

/// 512-bit BRISK descriptors. The pattern is scaled by `max(1, scale / 7)`
/// and rotated by the keypoint orientation (computed from long pairs when it
/// is 0); bit `k` is set iff `I(a_k) > I(b_k)` for short pair `k`.
/// Keypoints whose pattern leaves the image are dropped.
pub fn brisk_describe(
    img: &Image,
    kps: &[Keypoint],
    pattern: &BriskPattern,
) -> (Vec<Keypoint>, Vec<Descriptor>) {
    let ii = IntegralImage::new(img);
    let (w, h) = (img.width() as f64, img.height() as f64);
    let extent = pattern.extent();
    let mut kept = Vec::new();
    let mut descs = Vec::new();
    let mut values = vec![0.0f64; pattern.points.len()];
    for kp in kps {
        let t = (kp.scale as f64 / FAST_SCALE as f64).max(1.0);
        let (x, y) = (kp.x as f64, kp.y as f64);
        let reach = extent * t + 1.0;
        if x + 0.5 - reach < 0.0 || y + 0.5 - reach < 0.0 || x + 0.5 + reach > w || y + 0.5 + reach > h {
            continue;
        }
        let angle = if kp.orientation == 0.0 {
            orientation(&ii, pattern, x, y, t)
        } else {
            kp.orientation
        };
        let (s, c) = (angle as f64).sin_cos();
        for (v, &(px, py, sigma)) in values.iter_mut().zip(&pattern.points) {
            let rx = c * px - s * py;
            let ry = s * px + c * py;
            *v = sample(&ii, x + rx * t, y + ry * t, sigma * t);
        }
        let mut bits = BitWriter::new(BRISK_BITS);
        for &(a, b) in &pattern.short_pairs {
            bits.push(values[a] > values[b]);
        }
        kept.push(kp.with_orientation(angle));
        descs.push(bits.finish());
    }
    (kept, descs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_orientation_points_to_brighter_side() {
        let img = Image::from_fn(96, 96, |x, _| (x * 2) as u8);
        let (kept, descs) = brisk_describe(&img, &[Keypoint::new(48.0, 48.0, 7.0)], &BriskPattern::new());
        assert_eq!(descs.len(), 1);
        assert_eq!(descs[0].len(), 512);
        let a = kept[0].orientation;
        assert!(a < 0.05 || a > std::f32::consts::TAU - 0.05, "{a}");
    }

    #[test]
    fn border_keypoints_are_dropped() {
        let img = Image::filled(96, 96, 1);
        let (kept, _) = brisk_describe(&img, &[Keypoint::new(10.0, 48.0, 7.0)], &BriskPattern::new());
        assert!(kept.is_empty());
    }
}
