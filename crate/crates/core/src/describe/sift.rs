//! SIFT: a 4x4 grid of 8-bin gradient-orientation histograms.

use std::f32::consts::TAU;

use super::{normalize, Descriptor};
use crate::detect::{orientation_peaks, wrap_angle, Keypoint, SIFT_SCALE_PER_SIGMA};
use crate::image::{gaussian_blur_f32, FloatImage, Image};

const GRID: usize = 4;
const BINS: usize = 8;
const DIMS: usize = GRID * GRID * BINS;
const BIN_WIDTH_SIGMAS: f32 = 3.0;
const CLAMP: f32 = 0.2;
const CLAMP_SLACK: f32 = 1e-7;
const MAX_CLAMP_ROUNDS: usize = 64;
const LEVEL_SIGMA: f64 = 1.6;
const ASSUMED_INPUT_BLUR: f64 = 0.5;
const MIN_LEVEL_SIDE: usize = 16;

/// Gradient source images: level `o` is smoothed to sigma 1.6 in its own
/// pixels and subsampled by `2^o`.
fn build_levels(img: &Image) -> Vec<FloatImage> {
    let base = img.to_float().map(|v| v / 255.0);
    let first = (LEVEL_SIGMA * LEVEL_SIGMA - ASSUMED_INPUT_BLUR * ASSUMED_INPUT_BLUR).sqrt();
    let mut levels = vec![gaussian_blur_f32(&base, first).expect("positive sigma")];
    let step = ((2.0 * LEVEL_SIGMA).powi(2) - LEVEL_SIGMA * LEVEL_SIGMA).sqrt();
    loop {
        let last = levels.last().expect("non-empty");
        if last.width() / 2 < MIN_LEVEL_SIDE || last.height() / 2 < MIN_LEVEL_SIDE {
            break;
        }
        let next = gaussian_blur_f32(last, step).expect("positive sigma").decimate();
        levels.push(next);
    }
    levels
}

fn describe_one(img: &FloatImage, x: f32, y: f32, sigma: f32, angle: f32) -> Vec<f32> {
    let d = GRID as f32;
    let hist_width = BIN_WIDTH_SIGMAS * sigma;
    let radius = ((hist_width * std::f32::consts::SQRT_2 * (d + 1.0) * 0.5).round() as isize).max(1);
    let (s, c) = angle.sin_cos();
    let weight_scale = -1.0 / (2.0 * (0.5 * d) * (0.5 * d));
    let (w, h) = (img.width() as isize, img.height() as isize);
    let cx = x.round() as isize;
    let cy = y.round() as isize;
    let mut hist = [0.0f32; (GRID + 2) * (GRID + 2) * (BINS + 2)];
    let idx = |r: usize, c: usize, o: usize| (r * (GRID + 2) + c) * (BINS + 2) + o;
    for j in -radius..=radius {
        let py = cy + j;
        if py < 1 || py >= h - 1 {
            continue;
        }
        for i in -radius..=radius {
            let px = cx + i;
            if px < 1 || px >= w - 1 {
                continue;
            }
            // offset from the keypoint, rotated into its frame, in bin units
            let (ox, oy) = (px as f32 - x, py as f32 - y);
            let u = (c * ox + s * oy) / hist_width;
            let v = (-s * ox + c * oy) / hist_width;
            let rbin = v + 0.5 * d - 0.5;
            let cbin = u + 0.5 * d - 0.5;
            if rbin <= -1.0 || rbin >= d || cbin <= -1.0 || cbin >= d {
                continue;
            }
            let (pxu, pyu) = (px as usize, py as usize);
            let gx = img.get(pxu + 1, pyu) - img.get(pxu - 1, pyu);
            let gy = img.get(pxu, pyu + 1) - img.get(pxu, pyu - 1);
            let mag = (gx * gx + gy * gy).sqrt();
            if mag == 0.0 {
                continue;
            }
            let ori = wrap_angle(gy.atan2(gx) - angle);
            let obin = ori * BINS as f32 / TAU;
            let m = mag * ((u * u + v * v) * weight_scale).exp();

            let (r0, c0, o0) = (rbin.floor(), cbin.floor(), obin.floor());
            let (dr, dc, dobin) = (rbin - r0, cbin - c0, obin - o0);
            let (r0, c0) = ((r0 + 1.0) as usize, (c0 + 1.0) as usize);
            let o0 = (o0 as usize) % BINS;
            for (ri, wr) in [(0, 1.0 - dr), (1, dr)] {
                for (ci, wc) in [(0, 1.0 - dc), (1, dc)] {
                    for (oi, wo) in [(0, 1.0 - dobin), (1, dobin)] {
                        hist[idx(r0 + ri, c0 + ci, o0 + oi)] += m * wr * wc * wo;
                    }
                }
            }
        }
    }
    let mut out = vec![0.0f32; DIMS];
    for r in 0..GRID {
        for c in 0..GRID {
            for o in 0..BINS + 2 {
                out[(r * GRID + c) * BINS + o % BINS] += hist[idx(r + 1, c + 1, o)];
            }
        }
    }
    normalize(&mut out);
    // renormalizing can push clamped entries back above the limit, so repeat
    // until the vector is both unit length and within the clamp
    for _ in 0..MAX_CLAMP_ROUNDS {
        if out.iter().all(|&v| v <= CLAMP + CLAMP_SLACK) {
            break;
        }
        for v in out.iter_mut() {
            *v = v.min(CLAMP);
        }
        normalize(&mut out);
    }
    out
}

/// 128-dimensional SIFT descriptors: L2-normalized, clamped at 0.2 and
/// renormalized; the zero vector when the window has no gradient.
/// Orientation-0 keypoints first get the dominant orientation-histogram
/// peak. No keypoint is dropped; samples outside the image are skipped.
pub fn sift_describe(img: &Image, kps: &[Keypoint]) -> (Vec<Keypoint>, Vec<Descriptor>) {
    let levels = build_levels(img);
    let mut kept = Vec::with_capacity(kps.len());
    let mut descs = Vec::with_capacity(kps.len());
    for kp in kps {
        let sigma = (kp.scale / SIFT_SCALE_PER_SIGMA).max(0.5);
        let o = ((sigma as f64 / LEVEL_SIGMA).log2().floor().max(0.0) as usize).min(levels.len() - 1);
        let f = (1u32 << o) as f32;
        let (lx, ly, ls) = (kp.x / f, kp.y / f, sigma / f);
        let level = &levels[o];
        let angle = if kp.orientation == 0.0 {
            orientation_peaks(level, lx, ly, ls).first().copied().unwrap_or(0.0)
        } else {
            kp.orientation
        };
        descs.push(Descriptor::Real(describe_one(level, lx, ly, ls, angle)));
        kept.push(kp.with_orientation(angle));
    }
    (kept, descs)
}
