//! BRIEF: unrotated pairwise intensity tests on a smoothed 31x31 patch.

use super::{BitWriter, Descriptor, SamplingPattern, BRIEF_PAIRS};
use crate::detect::Keypoint;
use crate::image::{gaussian_blur, Image};

pub(crate) const SMOOTHING_SIGMA: f64 = 2.0;
const HALF_PATCH: isize = 15;

/// 256-bit BRIEF descriptors; bit `i` is set iff `I(p_i) < I(q_i)` on the
/// image smoothed with sigma 2. Keypoints whose 31x31 patch leaves the image
/// are dropped.
pub fn brief_describe(
    img: &Image,
    kps: &[Keypoint],
    pattern: &SamplingPattern,
) -> (Vec<Keypoint>, Vec<Descriptor>) {
    let smooth = gaussian_blur(img, SMOOTHING_SIGMA).expect("positive sigma");
    let (w, h) = (img.width() as isize, img.height() as isize);
    let mut kept = Vec::new();
    let mut descs = Vec::new();
    for kp in kps {
        let cx = kp.x.round() as isize;
        let cy = kp.y.round() as isize;
        if cx < HALF_PATCH || cy < HALF_PATCH || cx + HALF_PATCH >= w || cy + HALF_PATCH >= h {
            continue;
        }
        let at = |(dx, dy): (i32, i32)| smooth.get((cx + dx as isize) as usize, (cy + dy as isize) as usize);
        let mut bits = BitWriter::new(BRIEF_PAIRS);
        for &(p, q) in &pattern.brief {
            bits.push(at(p) < at(q));
        }
        kept.push(*kp);
        descs.push(bits.finish());
    }
    (kept, descs)
}
