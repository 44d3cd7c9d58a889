//! Steered BRIEF: the BRIEF pairs rotated by the keypoint orientation and
//! scaled by the keypoint size.

use std::f32::consts::TAU;

use super::brief::SMOOTHING_SIGMA;
use super::{BitWriter, Descriptor, SamplingPattern, BRIEF_PAIRS};
use crate::detect::{intensity_centroid_angle, Keypoint, ORB_PATCH_SIZE};
use crate::image::{gaussian_blur, Image};
use crate::integral::IntegralImage;

const ANGLE_STEPS: f32 = 30.0;
const CENTROID_RADIUS: f32 = 15.0;

/// Orientation quantized to multiples of 2π/30.
pub(crate) fn quantize_angle(a: f32) -> f32 {
    let step = TAU / ANGLE_STEPS;
    ((a / step).round() as i64).rem_euclid(ANGLE_STEPS as i64) as f32 * step
}

/// 256-bit ORB descriptors. The pattern is rotated by the quantized keypoint
/// orientation and scaled by `max(1, scale / 31)`; at larger scales each
/// test compares box means whose half-width grows with the scale.
/// Orientation-0 keypoints first get an intensity-centroid orientation,
/// except at exactly the base patch size of 31, where orientation 0 is taken
/// as a deliberate upright request.
/// Keypoints whose samples leave the image are dropped.
pub fn orb_describe(
    img: &Image,
    kps: &[Keypoint],
    pattern: &SamplingPattern,
) -> (Vec<Keypoint>, Vec<Descriptor>) {
    let smooth = gaussian_blur(img, SMOOTHING_SIGMA).expect("positive sigma");
    let ii = IntegralImage::new(&smooth);
    let (w, h) = (img.width() as isize, img.height() as isize);
    let mut kept = Vec::new();
    let mut descs = Vec::new();
    let mut points = Vec::with_capacity(2 * BRIEF_PAIRS);
    'kp: for kp in kps {
        let f = (kp.scale / ORB_PATCH_SIZE).max(1.0);
        let angle = if kp.orientation == 0.0 && kp.scale != ORB_PATCH_SIZE {
            let r = (CENTROID_RADIUS * f).round() as usize;
            match intensity_centroid_angle(img, kp.x, kp.y, r) {
                Some(a) => a,
                None => continue,
            }
        } else {
            kp.orientation
        };
        let q = quantize_angle(angle);
        let (s, c) = q.sin_cos();
        let hw = (f.round() as isize - 1).max(0);
        let cx = kp.x.round() as isize;
        let cy = kp.y.round() as isize;
        points.clear();
        for &(p, q) in &pattern.brief {
            for (dx, dy) in [p, q] {
                let (dx, dy) = (dx as f32, dy as f32);
                let x = cx + ((c * dx - s * dy) * f).round() as isize;
                let y = cy + ((s * dx + c * dy) * f).round() as isize;
                if x - hw < 0 || y - hw < 0 || x + hw >= w || y + hw >= h {
                    continue 'kp;
                }
                points.push((x as usize, y as usize));
            }
        }
        let hw = hw as usize;
        let value = |(x, y): (usize, usize)| {
            if hw == 0 {
                smooth.get(x, y) as u64
            } else {
                ii.box_sum_unchecked(x - hw, y - hw, x + hw, y + hw)
            }
        };
        let mut bits = BitWriter::new(BRIEF_PAIRS);
        for pair in points.chunks_exact(2) {
            bits.push(value(pair[0]) < value(pair[1]));
        }
        kept.push(kp.with_orientation(angle));
        descs.push(bits.finish());
    }
    (kept, descs)
}
