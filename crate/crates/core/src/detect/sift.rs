//! Difference-of-Gaussians scale-space extrema.

use std::f32::consts::TAU;

use super::{require_size, wrap_angle, Keypoint, SiftParams};
use crate::error::Result;
use crate::image::{gaussian_blur_f32, FloatImage, Image};

/// `Keypoint::scale / sigma` for SIFT keypoints: sqrt(2) times the LoG
/// sigma a DoG layer approximates, which is `2^(1/6)` above the layer sigma
/// at three scales per octave.
pub const SIFT_SCALE_PER_SIGMA: f32 = 1.587_401; // 2^(2/3)

/// Blur already present in a camera image.
const ASSUMED_INPUT_BLUR: f64 = 0.5;
const IMAGE_BORDER: usize = 5;
const MAX_REFINE_STEPS: usize = 5;
const ORI_BINS: usize = 36;
const ORI_SIGMA_FACTOR: f32 = 1.5;
const ORI_RADIUS_FACTOR: f32 = 3.0 * ORI_SIGMA_FACTOR;
const ORI_PEAK_RATIO: f32 = 0.8;

/// Dominant gradient orientations around `(x, y)` on a Gaussian-smoothed
/// image whose blur is `sigma` (in that image's pixels): peaks of a 36-bin,
/// magnitude-weighted histogram that reach 80% of the maximum, strongest
/// first. Empty for zero-gradient neighbourhoods.
pub fn orientation_peaks(img: &FloatImage, x: f32, y: f32, sigma: f32) -> Vec<f32> {
    let (w, h) = (img.width() as isize, img.height() as isize);
    let radius = (ORI_RADIUS_FACTOR * sigma).round() as isize;
    let weight_scale = -1.0 / (2.0 * (ORI_SIGMA_FACTOR * sigma).powi(2));
    let cx = x.round() as isize;
    let cy = y.round() as isize;
    let mut hist = [0.0f32; ORI_BINS];
    for dy in -radius..=radius {
        let py = cy + dy;
        if py < 1 || py >= h - 1 {
            continue;
        }
        for dx in -radius..=radius {
            let px = cx + dx;
            if px < 1 || px >= w - 1 {
                continue;
            }
            let (px, py) = (px as usize, py as usize);
            let gx = img.get(px + 1, py) - img.get(px - 1, py);
            let gy = img.get(px, py + 1) - img.get(px, py - 1);
            let mag = (gx * gx + gy * gy).sqrt();
            if mag == 0.0 {
                continue;
            }
            let weight = (((dx * dx + dy * dy) as f32) * weight_scale).exp();
            let angle = wrap_angle(gy.atan2(gx));
            let bin = ((angle * ORI_BINS as f32 / TAU).round() as usize) % ORI_BINS;
            hist[bin] += weight * mag;
        }
    }
    let n = ORI_BINS;
    let mut smooth = [0.0f32; ORI_BINS];
    for i in 0..n {
        smooth[i] = (hist[(i + n - 2) % n] + hist[(i + 2) % n]) * (1.0 / 16.0)
            + (hist[(i + n - 1) % n] + hist[(i + 1) % n]) * (4.0 / 16.0)
            + hist[i] * (6.0 / 16.0);
    }
    let max = smooth.iter().cloned().fold(0.0f32, f32::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let mut peaks: Vec<(f32, usize, f32)> = Vec::new();
    for i in 0..n {
        let l = smooth[(i + n - 1) % n];
        let r = smooth[(i + 1) % n];
        let c = smooth[i];
        if c > l && c > r && c >= ORI_PEAK_RATIO * max {
            let offset = 0.5 * (l - r) / (l - 2.0 * c + r);
            let bin = i as f32 + offset;
            peaks.push((c, i, wrap_angle(bin * TAU / n as f32)));
        }
    }
    peaks.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    peaks.into_iter().map(|p| p.2).collect()
}

struct Octave {
    gauss: Vec<FloatImage>,
    dog: Vec<FloatImage>,
}

fn auto_octaves(w: usize, h: usize) -> usize {
    let m = w.min(h) as f64 / 16.0;
    (m.log2().floor() as usize).max(1)
}

fn build_octaves(img: &Image, p: &SiftParams) -> Result<Vec<Octave>> {
    let s = p.scales_per_octave;
    let n_oct = p
        .octaves
        .unwrap_or_else(|| auto_octaves(img.width(), img.height()))
        .min(auto_octaves(img.width(), img.height()) + 1);
    let sigma0 = p.base_sigma;
    let base = img.to_float().map(|v| v / 255.0);
    let first_blur = (sigma0 * sigma0 - ASSUMED_INPUT_BLUR * ASSUMED_INPUT_BLUR).max(0.01).sqrt();
    let mut increments = vec![0.0f64; s + 3];
    for (i, inc) in increments.iter_mut().enumerate().skip(1) {
        let prev = sigma0 * 2f64.powf((i - 1) as f64 / s as f64);
        let cur = sigma0 * 2f64.powf(i as f64 / s as f64);
        *inc = (cur * cur - prev * prev).sqrt();
    }
    let mut octaves: Vec<Octave> = Vec::with_capacity(n_oct);
    for _ in 0..n_oct {
        let first = match octaves.last() {
            None => gaussian_blur_f32(&base, first_blur)?,
            Some(prev) => prev.gauss[s].decimate(),
        };
        if first.width() < 2 * IMAGE_BORDER + 3 || first.height() < 2 * IMAGE_BORDER + 3 {
            break;
        }
        let mut gauss = Vec::with_capacity(s + 3);
        gauss.push(first);
        for inc in increments.iter().skip(1) {
            let next = gaussian_blur_f32(gauss.last().expect("non-empty"), *inc)?;
            gauss.push(next);
        }
        let dog = gauss
            .windows(2)
            .map(|pair| {
                let data = pair[1]
                    .data()
                    .iter()
                    .zip(pair[0].data())
                    .map(|(a, b)| a - b)
                    .collect();
                FloatImage::new(pair[0].width(), pair[0].height(), data).expect("same dims")
            })
            .collect();
        octaves.push(Octave { gauss, dog });
    }
    Ok(octaves)
}

fn is_extremum(dog: &[FloatImage], l: usize, x: usize, y: usize) -> bool {
    let v = dog[l].get(x, y);
    let is_max = v > 0.0;
    for layer in &dog[l - 1..=l + 1] {
        for yy in y - 1..=y + 1 {
            for xx in x - 1..=x + 1 {
                let n = layer.get(xx, yy);
                if (is_max && n > v) || (!is_max && n < v) {
                    return false;
                }
            }
        }
    }
    true
}

/// Solve `a * x = b` for a symmetric 3x3 system by Cramer's rule.
fn solve3(a: [[f32; 3]; 3], b: [f32; 3]) -> Option<[f32; 3]> {
    let det = |m: [[f32; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-12 {
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

struct Refined {
    x: usize,
    y: usize,
    layer: usize,
    offset: [f32; 3],
    contrast: f32,
}

fn refine(dog: &[FloatImage], s: usize, mut x: usize, mut y: usize, mut l: usize) -> Option<Refined> {
    let (w, h) = (dog[0].width(), dog[0].height());
    for _ in 0..MAX_REFINE_STEPS {
        let d = |dl: isize, dx: isize, dy: isize| {
            dog[(l as isize + dl) as usize].get((x as isize + dx) as usize, (y as isize + dy) as usize)
        };
        let v = d(0, 0, 0);
        let g = [
            0.5 * (d(0, 1, 0) - d(0, -1, 0)),
            0.5 * (d(0, 0, 1) - d(0, 0, -1)),
            0.5 * (d(1, 0, 0) - d(-1, 0, 0)),
        ];
        let dxx = d(0, 1, 0) + d(0, -1, 0) - 2.0 * v;
        let dyy = d(0, 0, 1) + d(0, 0, -1) - 2.0 * v;
        let dss = d(1, 0, 0) + d(-1, 0, 0) - 2.0 * v;
        let dxy = 0.25 * (d(0, 1, 1) - d(0, -1, 1) - d(0, 1, -1) + d(0, -1, -1));
        let dxs = 0.25 * (d(1, 1, 0) - d(1, -1, 0) - d(-1, 1, 0) + d(-1, -1, 0));
        let dys = 0.25 * (d(1, 0, 1) - d(1, 0, -1) - d(-1, 0, 1) + d(-1, 0, -1));
        let hess = [[dxx, dxy, dxs], [dxy, dyy, dys], [dxs, dys, dss]];
        let sol = solve3(hess, g)?;
        let offset = [-sol[0], -sol[1], -sol[2]];
        if offset.iter().all(|o| o.abs() < 0.5) {
            let contrast = v + 0.5 * (g[0] * offset[0] + g[1] * offset[1] + g[2] * offset[2]);
            return Some(Refined {
                x,
                y,
                layer: l,
                offset,
                contrast,
            });
        }
        if offset.iter().any(|o| o.abs() > 1e3) {
            return None;
        }
        let nx = x as isize + offset[0].round() as isize;
        let ny = y as isize + offset[1].round() as isize;
        let nl = l as isize + offset[2].round() as isize;
        let b = IMAGE_BORDER as isize;
        if nl < 1 || nl > s as isize || nx < b || ny < b || nx >= w as isize - b || ny >= h as isize - b {
            return None;
        }
        x = nx as usize;
        y = ny as usize;
        l = nl as usize;
    }
    None
}

fn passes_edge_test(dog: &FloatImage, x: usize, y: usize, edge_ratio: f32) -> bool {
    let v = dog.get(x, y);
    let dxx = dog.get(x + 1, y) + dog.get(x - 1, y) - 2.0 * v;
    let dyy = dog.get(x, y + 1) + dog.get(x, y - 1) - 2.0 * v;
    let dxy = 0.25
        * (dog.get(x + 1, y + 1) - dog.get(x - 1, y + 1) - dog.get(x + 1, y - 1)
            + dog.get(x - 1, y - 1));
    let tr = dxx + dyy;
    let det = dxx * dyy - dxy * dxy;
    det > 0.0 && tr * tr * edge_ratio < (edge_ratio + 1.0).powi(2) * det
}

/// SIFT keypoints: DoG extrema refined by a 3-D quadratic fit, filtered for
/// contrast and edge response, one keypoint per dominant orientation.
pub fn sift_detect(img: &Image, p: &SiftParams) -> Result<Vec<Keypoint>> {
    require_size(img, 64, 64)?;
    let s = p.scales_per_octave;
    let octaves = build_octaves(img, p)?;
    let contrast_thresh = p.contrast_thresh as f32;
    let prefilter = 0.5 * contrast_thresh;
    let edge_ratio = p.edge_ratio as f32;
    let mut out = Vec::new();
    for (o, oct) in octaves.iter().enumerate() {
        let (w, h) = (oct.dog[0].width(), oct.dog[0].height());
        let octave_scale = (1usize << o) as f32;
        for l in 1..=s {
            for y in IMAGE_BORDER..h - IMAGE_BORDER {
                for x in IMAGE_BORDER..w - IMAGE_BORDER {
                    let v = oct.dog[l].get(x, y);
                    if v.abs() < prefilter || !is_extremum(&oct.dog, l, x, y) {
                        continue;
                    }
                    let Some(r) = refine(&oct.dog, s, x, y, l) else {
                        continue;
                    };
                    if r.contrast.abs() < contrast_thresh
                        || !passes_edge_test(&oct.dog[r.layer], r.x, r.y, edge_ratio)
                    {
                        continue;
                    }
                    let fx = r.x as f32 + r.offset[0];
                    let fy = r.y as f32 + r.offset[1];
                    let sigma_oct = p.base_sigma as f32
                        * 2f32.powf((r.layer as f32 + r.offset[2]) / s as f32);
                    let bx = (fx * octave_scale).clamp(0.0, img.width() as f32 - 1.0);
                    let by = (fy * octave_scale).clamp(0.0, img.height() as f32 - 1.0);
                    let scale = SIFT_SCALE_PER_SIGMA * sigma_oct * octave_scale;
                    for angle in orientation_peaks(&oct.gauss[r.layer], fx, fy, sigma_oct) {
                        out.push(Keypoint {
                            x: bx,
                            y: by,
                            scale,
                            orientation: angle,
                            response: r.contrast.abs(),
                            octave: o as u32,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}
