//! SURF: sums of oriented Haar-wavelet responses over a 4x4 grid.

use super::{normalize, Descriptor};
use crate::detect::{surf_haar_pair, surf_orientation, Keypoint};
use crate::image::Image;
use crate::integral::IntegralImage;

const GRID: usize = 4;
const SAMPLES_PER_CELL: usize = 5;
const WINDOW: usize = GRID * SAMPLES_PER_CELL;
const WEIGHT_SIGMA: f32 = 3.3;

/// SURF sampling step `s` for a keypoint of size `scale`.
pub(crate) fn surf_step(scale: f32) -> f32 {
    1.2 * scale / 9.0
}

/// Per-cell `(Σdx, Σdy, Σ|dx|, Σ|dy|)` in the keypoint frame, before
/// normalization.
pub(crate) fn surf_cells(ii: &IntegralImage, x: f32, y: f32, s: f32, angle: f32) -> [f32; 64] {
    let (sn, cs) = angle.sin_cos();
    let denom = 2.0 * (WEIGHT_SIGMA * s).powi(2);
    let mut out = [0.0f32; 64];
    for v in 0..WINDOW {
        for u in 0..WINDOW {
            let ox = (u as f32 - 9.5) * s;
            let oy = (v as f32 - 9.5) * s;
            let px = x + cs * ox - sn * oy;
            let py = y + sn * ox + cs * oy;
            let Some((hx, hy)) = surf_haar_pair(ii, px.round() as isize, py.round() as isize, 2.0 * s) else {
                continue;
            };
            let (hx, hy) = (hx as f32, hy as f32);
            let g = (-(ox * ox + oy * oy) / denom).exp();
            let rx = (cs * hx + sn * hy) * g;
            let ry = (-sn * hx + cs * hy) * g;
            let cell = (v / SAMPLES_PER_CELL) * GRID + u / SAMPLES_PER_CELL;
            let o = &mut out[cell * 4..cell * 4 + 4];
            o[0] += rx;
            o[1] += ry;
            o[2] += rx.abs();
            o[3] += ry.abs();
        }
    }
    out
}

/// 64-dimensional SURF descriptors, L2-normalized (zero vector for flat
/// windows). Orientation-0 keypoints first get the sliding-sector
/// orientation. No keypoint is dropped; wavelets outside the image are
/// skipped.
pub fn surf_describe(img: &Image, kps: &[Keypoint]) -> (Vec<Keypoint>, Vec<Descriptor>) {
    let ii = IntegralImage::new(img);
    let mut kept = Vec::with_capacity(kps.len());
    let mut descs = Vec::with_capacity(kps.len());
    for kp in kps {
        let s = surf_step(kp.scale);
        let angle = if kp.orientation == 0.0 {
            surf_orientation(&ii, kp.x, kp.y, s).unwrap_or(0.0)
        } else {
            kp.orientation
        };
        let mut v = surf_cells(&ii, kp.x, kp.y, s, angle).to_vec();
        normalize(&mut v);
        descs.push(Descriptor::Real(v));
        kept.push(kp.with_orientation(angle));
    }
    (kept, descs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_patch_gives_zero_vector() {
        let img = Image::filled(100, 100, 77);
        let (_, d) = surf_describe(&img, &[Keypoint::new(50.0, 50.0, 20.0)]);
        assert_eq!(d[0], Descriptor::Real(vec![0.0; 64]));
    }

    #[test]
    fn unit_norm() {
        let img = Image::from_fn(100, 100, |x, y| ((x * 7 + y * y) % 256) as u8);
        let (_, d) = surf_describe(&img, &[Keypoint::new(50.0, 50.0, 20.0)]);
        let Descriptor::Real(v) = &d[0] else { panic!() };
        assert_eq!(v.len(), 64);
        let n: f32 = v.iter().map(|x| x * x).sum::<f32>().sqrt();
        assert!((n - 1.0).abs() < 1e-6);
    }

    #[test]
    fn vertical_edge_is_dominated_by_dx() {
        let img = Image::from_fn(120, 120, |x, _| if x < 60 { 30 } else { 200 });
        let (kept, _) = surf_describe(&img, &[Keypoint::new(60.0, 60.0, 15.0)]);
        assert!(kept[0].orientation < 1e-3 || kept[0].orientation > std::f32::consts::TAU - 1e-3);
        let cells = surf_cells(&IntegralImage::new(&img), 60.0, 60.0, surf_step(15.0), kept[0].orientation);
        let mut crossed = 0;
        for c in cells.chunks_exact(4) {
            if c[2] > 0.0 {
                crossed += 1;
                assert!(c[2] > c[3], "{c:?}");
            }
        }
        assert!(crossed >= 4);
    }
}
