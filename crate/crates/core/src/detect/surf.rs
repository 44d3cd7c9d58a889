//! Fast-Hessian detector on box-filter approximations of second derivatives.

use std::f32::consts::{PI, TAU};

use super::{require_size, wrap_angle, Keypoint, SurfParams};
use crate::error::Result;
use crate::image::Image;
use crate::integral::IntegralImage;

const DXY_WEIGHT: f64 = 0.9;
const ORI_RADIUS: isize = 6;
const ORI_SIGMA: f32 = 2.5;
const ORI_WINDOW: f32 = PI / 3.0;
const ORI_STEPS: usize = 72;

/// Weighted rectangles `(x0, y0, x1, y1, weight)` of the 9x9 filters,
/// half-open, relative to the window's top-left corner.
const DXX_9: [(i32, i32, i32, i32, f64); 3] = [(0, 2, 3, 7, 1.0), (3, 2, 6, 7, -2.0), (6, 2, 9, 7, 1.0)];
const DYY_9: [(i32, i32, i32, i32, f64); 3] = [(2, 0, 7, 3, 1.0), (2, 3, 7, 6, -2.0), (2, 6, 7, 9, 1.0)];
const DXY_9: [(i32, i32, i32, i32, f64); 4] = [
    (1, 1, 4, 4, 1.0),
    (5, 1, 8, 4, -1.0),
    (1, 5, 4, 8, -1.0),
    (5, 5, 8, 8, 1.0),
];

/// Box approximation of the three second-derivative filters at one size.
#[derive(Clone, Debug)]
pub struct SurfFilter {
    pub size: usize,
    dxx: Vec<(isize, isize, isize, isize, f64)>,
    dyy: Vec<(isize, isize, isize, isize, f64)>,
    dxy: Vec<(isize, isize, isize, isize, f64)>,
}

impl SurfFilter {
    /// `size` must be odd and at least 9.
    pub fn new(size: usize) -> Self {
        assert!(size >= 9 && size % 2 == 1, "SURF filter size must be odd and >= 9");
        let ratio = size as f64 / 9.0;
        let half = (size / 2) as isize;
        let scale = |rects: &[(i32, i32, i32, i32, f64)]| {
            rects
                .iter()
                .map(|&(x0, y0, x1, y1, w)| {
                    let r = |v: i32| (ratio * v as f64).round() as isize - half;
                    (r(x0), r(y0), r(x1), r(y1), w)
                })
                .collect()
        };
        SurfFilter {
            size,
            dxx: scale(&DXX_9),
            dyy: scale(&DYY_9),
            dxy: scale(&DXY_9),
        }
    }

    fn apply(ii: &IntegralImage, x: isize, y: isize, rects: &[(isize, isize, isize, isize, f64)]) -> f64 {
        rects
            .iter()
            .map(|&(x0, y0, x1, y1, w)| w * ii.clipped_sum(x + x0, y + y0, x + x1, y + y1))
            .sum()
    }

    /// Area-normalized determinant-of-Hessian response at pixel `(x, y)`.
    pub fn response(&self, ii: &IntegralImage, x: isize, y: isize) -> f64 {
        let (dxx, dyy, dxy) = self.components(ii, x, y);
        let inv_area = 1.0 / (self.size * self.size) as f64;
        let (dxx, dyy, dxy) = (dxx * inv_area, dyy * inv_area, dxy * inv_area);
        dxx * dyy - (DXY_WEIGHT * dxy).powi(2)
    }

    /// Raw (unnormalized) filter outputs `(Dxx, Dyy, Dxy)`.
    pub fn components(&self, ii: &IntegralImage, x: isize, y: isize) -> (f64, f64, f64) {
        (
            Self::apply(ii, x, y, &self.dxx),
            Self::apply(ii, x, y, &self.dyy),
            Self::apply(ii, x, y, &self.dxy),
        )
    }

    fn fits(&self, ii: &IntegralImage, x: isize, y: isize) -> bool {
        let half = (self.size / 2) as isize;
        ii.contains(x - half, y - half, x + half + 1, y + half + 1)
    }
}

/// Raw `(Dxx, Dyy, Dxy)` box-filter outputs of side `size` centred on `(x, y)`.
pub fn hessian_components(ii: &IntegralImage, x: usize, y: usize, size: usize) -> (f64, f64, f64) {
    SurfFilter::new(size).components(ii, x as isize, y as isize)
}

fn haar_x(ii: &IntegralImage, x: isize, y: isize, size: isize) -> Option<f64> {
    let h = size / 2;
    if !ii.contains(x - h, y - h, x + h, y + h) {
        return None;
    }
    Some(ii.clipped_sum(x, y - h, x + h, y + h) - ii.clipped_sum(x - h, y - h, x, y + h))
}

fn haar_y(ii: &IntegralImage, x: isize, y: isize, size: isize) -> Option<f64> {
    let h = size / 2;
    if !ii.contains(x - h, y - h, x + h, y + h) {
        return None;
    }
    Some(ii.clipped_sum(x - h, y, x + h, y + h) - ii.clipped_sum(x - h, y - h, x + h, y))
}

/// Haar-wavelet responses `(dx, dy)` of side `size` (rounded up to even);
/// `None` when the wavelet leaves the image.
pub fn surf_haar_pair(ii: &IntegralImage, x: isize, y: isize, size: f32) -> Option<(f64, f64)> {
    let s = ((size / 2.0).round() as isize).max(1) * 2;
    Some((haar_x(ii, x, y, s)?, haar_y(ii, x, y, s)?))
}

/// Dominant Haar-response direction in a sliding π/3 sector over a disc of
/// radius 6s, for SURF scale `s`. `None` when no wavelet fits in the image
/// or every response is zero.
pub fn surf_orientation(ii: &IntegralImage, x: f32, y: f32, s: f32) -> Option<f32> {
    let mut samples: Vec<(f32, f32, f32)> = Vec::with_capacity(113);
    let denom = 2.0 * ORI_SIGMA * ORI_SIGMA;
    for j in -ORI_RADIUS..=ORI_RADIUS {
        for i in -ORI_RADIUS..=ORI_RADIUS {
            if i * i + j * j > ORI_RADIUS * ORI_RADIUS {
                continue;
            }
            let px = (x + i as f32 * s).round() as isize;
            let py = (y + j as f32 * s).round() as isize;
            let Some((dx, dy)) = surf_haar_pair(ii, px, py, 4.0 * s) else {
                continue;
            };
            let w = (-((i * i + j * j) as f32) / denom).exp();
            let (dx, dy) = (dx as f32 * w, dy as f32 * w);
            if dx == 0.0 && dy == 0.0 {
                continue;
            }
            samples.push((wrap_angle(dy.atan2(dx)), dx, dy));
        }
    }
    if samples.is_empty() {
        return None;
    }
    let mut best = (0.0f32, 0.0f32, 0.0f32);
    for step in 0..ORI_STEPS {
        let start = step as f32 * TAU / ORI_STEPS as f32;
        let (mut sx, mut sy) = (0.0f32, 0.0f32);
        for &(a, dx, dy) in &samples {
            let rel = (a - start).rem_euclid(TAU);
            if rel < ORI_WINDOW {
                sx += dx;
                sy += dy;
            }
        }
        let mag = sx * sx + sy * sy;
        if mag > best.0 {
            best = (mag, sx, sy);
        }
    }
    (best.0 > 0.0).then(|| wrap_angle(best.2.atan2(best.1)))
}

/// Filter sizes of octave `o`: 9, 15, 21, 27 for the first, then doubling
/// spacing.
fn octave_sizes(o: usize) -> [usize; 4] {
    let m = 1usize << (o + 1);
    [1, 2, 3, 4].map(|i| 3 * (i * m + 1))
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-18 {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut m = a;
        for row in 0..3 {
            m[row][col] = b[row];
        }
        *o = det(m) / d;
    }
    Some(out)
}

/// SURF keypoints: 3x3x3 maxima of the determinant-of-Hessian response above
/// `hessian_thresh`, interpolated in position and filter size, oriented by
/// the sliding-sector Haar method.
pub fn surf_detect(img: &Image, p: &SurfParams) -> Result<Vec<Keypoint>> {
    require_size(img, 64, 64)?;
    let ii = IntegralImage::new(img);
    let (w, h) = (img.width(), img.height());
    let mut out = Vec::new();
    for o in 0..p.octaves {
        let step = 1usize << o;
        let sizes = octave_sizes(o);
        if sizes[3] >= w.min(h) {
            break;
        }
        let gw = w.div_ceil(step);
        let gh = h.div_ceil(step);
        let layers: Vec<Vec<f64>> = sizes
            .iter()
            .map(|&size| {
                let f = SurfFilter::new(size);
                let mut r = vec![0.0; gw * gh];
                for gy in 0..gh {
                    for gx in 0..gw {
                        let (x, y) = ((gx * step) as isize, (gy * step) as isize);
                        if f.fits(&ii, x, y) {
                            r[gy * gw + gx] = f.response(&ii, x, y);
                        }
                    }
                }
                r
            })
            .collect();
        for li in 1..=2 {
            // every neighbour must be covered by the largest of the three filters
            let margin = sizes[li + 1] / 2 / step + 2;
            if gw <= 2 * margin || gh <= 2 * margin {
                continue;
            }
            for gy in margin..gh - margin {
                for gx in margin..gw - margin {
                    let v = layers[li][gy * gw + gx];
                    if v < p.hessian_thresh {
                        continue;
                    }
                    let at = |l: usize, dx: isize, dy: isize| {
                        layers[l][(gy as isize + dy) as usize * gw + (gx as isize + dx) as usize]
                    };
                    let mut is_max = true;
                    'scan: for l in li - 1..=li + 1 {
                        for dy in -1..=1 {
                            for dx in -1..=1 {
                                if (l, dx, dy) != (li, 0, 0) && at(l, dx, dy) >= v {
                                    is_max = false;
                                    break 'scan;
                                }
                            }
                        }
                    }
                    if !is_max {
                        continue;
                    }
                    let g = [
                        0.5 * (at(li, 1, 0) - at(li, -1, 0)),
                        0.5 * (at(li, 0, 1) - at(li, 0, -1)),
                        0.5 * (at(li + 1, 0, 0) - at(li - 1, 0, 0)),
                    ];
                    let dxx = at(li, 1, 0) + at(li, -1, 0) - 2.0 * v;
                    let dyy = at(li, 0, 1) + at(li, 0, -1) - 2.0 * v;
                    let dss = at(li + 1, 0, 0) + at(li - 1, 0, 0) - 2.0 * v;
                    let dxy = 0.25 * (at(li, 1, 1) - at(li, -1, 1) - at(li, 1, -1) + at(li, -1, -1));
                    let dxs = 0.25 * (at(li + 1, 1, 0) - at(li + 1, -1, 0) - at(li - 1, 1, 0) + at(li - 1, -1, 0));
                    let dys = 0.25 * (at(li + 1, 0, 1) - at(li + 1, 0, -1) - at(li - 1, 0, 1) + at(li - 1, 0, -1));
                    let Some(sol) = solve3([[dxx, dxy, dxs], [dxy, dyy, dys], [dxs, dys, dss]], g) else {
                        continue;
                    };
                    let off = [-sol[0], -sol[1], -sol[2]];
                    if off.iter().any(|v| v.abs() > 1.0) {
                        continue;
                    }
                    let x = ((gx as f64 + off[0]) * step as f64).clamp(0.0, w as f64 - 1.0) as f32;
                    let y = ((gy as f64 + off[1]) * step as f64).clamp(0.0, h as f64 - 1.0) as f32;
                    let size = sizes[li] as f64 + off[2] * (sizes[1] - sizes[0]) as f64;
                    let s = (1.2 * size / 9.0) as f32;
                    let orientation = surf_orientation(&ii, x, y, s).unwrap_or(0.0);
                    out.push(Keypoint {
                        x,
                        y,
                        scale: size as f32,
                        orientation,
                        response: v as f32,
                        octave: o as u32,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(size: usize, r: f64) -> Image {
        let c = (size as f64 - 1.0) / 2.0;
        Image::from_fn(size, size, |x, y| {
            let d = ((x as f64 - c).powi(2) + (y as f64 - c).powi(2)).sqrt();
            // one-pixel linear ramp at the rim
            (20.0 + 200.0 * (r + 0.5 - d).clamp(0.0, 1.0)).round() as u8
        })
    }

    #[test]
    fn constant_image_has_no_keypoints() {
        let img = Image::filled(96, 96, 200);
        assert!(surf_detect(&img, &SurfParams::default()).unwrap().is_empty());
    }

    #[test]
    fn filter_geometry() {
        assert_eq!(octave_sizes(0), [9, 15, 21, 27]);
        assert_eq!(octave_sizes(1), [15, 27, 39, 51]);
        assert_eq!(octave_sizes(2), [27, 51, 75, 99]);
        let f = SurfFilter::new(15);
        // lobes of 5 columns, 9 rows
        assert_eq!(f.dxx[0], (-7, -4, -2, 5, 1.0));
        assert_eq!(f.dxx[1].0, -2);
        assert_eq!(f.dxx[2].2, 8);
    }

    fn strongest(kps: &[Keypoint]) -> Keypoint {
        *kps.iter().max_by(|a, b| a.response.total_cmp(&b.response)).unwrap()
    }

    #[test]
    fn blob_is_found_at_centre_and_scale_grows_with_radius() {
        let small = surf_detect(&disc(129, 5.0), &SurfParams::default()).unwrap();
        let large = surf_detect(&disc(129, 10.0), &SurfParams::default()).unwrap();
        let (a, b) = (strongest(&small), strongest(&large));
        for k in [a, b] {
            assert!((k.x - 64.0).abs() <= 2.0 && (k.y - 64.0).abs() <= 2.0, "{k:?}");
        }
        assert!(b.scale > a.scale, "{} vs {}", a.scale, b.scale);
    }

    #[test]
    fn orientation_follows_gradient() {
        let img = Image::from_fn(80, 80, |x, _| if x < 40 { 30 } else { 220 });
        let ii = IntegralImage::new(&img);
        let a = surf_orientation(&ii, 40.0, 40.0, 2.0).unwrap();
        assert!(a < 0.05 || a > TAU - 0.05, "{a}");
        let flat = IntegralImage::new(&Image::filled(80, 80, 9));
        assert!(surf_orientation(&flat, 40.0, 40.0, 2.0).is_none());
    }
}
