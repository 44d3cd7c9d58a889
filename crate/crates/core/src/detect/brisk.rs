//! Scale-space FAST: octave and intra-octave layers with cross-layer
//! suppression and sub-scale refinement.

use super::fast::{fast_score_map, FAST_SCALE};
use super::{parabola_peak, raster_nonmax, require_size, BriskParams, Keypoint};
use crate::error::Result;
use crate::image::{gaussian_blur_f32, Image};
use crate::pyramid::MIN_LEVEL_SIZE;

const BRISK_ARC: usize = 9;
/// Pixels kept clear of each layer's border so the FAST circle and the
/// neighbour windows stay inside.
const LAYER_BORDER: usize = 4;

struct Layer {
    /// Downscale relative to the base image.
    t: f64,
    width: usize,
    height: usize,
    scores: Vec<f32>,
}

impl Layer {
    fn score(&self, x: isize, y: isize) -> f32 {
        if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
            return 0.0;
        }
        self.scores[y as usize * self.width + x as usize]
    }

    /// Maximum score in a `(2r+1)^2` window around the pixel nearest the
    /// position `(x, y)` given in another layer's coordinates with downscale `t`.
    fn window_max(&self, x: f64, y: f64, t: f64, r: isize) -> f32 {
        let ratio = t / self.t;
        let cx = ((x + 0.5) * ratio - 0.5).round() as isize;
        let cy = ((y + 0.5) * ratio - 0.5).round() as isize;
        let mut m = 0.0f32;
        for dy in -r..=r {
            for dx in -r..=r {
                m = m.max(self.score(cx + dx, cy + dy));
            }
        }
        m
    }
}

/// Downscales of the octave (`2^k`) and intra-octave (`1.5 * 2^k`) layers,
/// ascending.
fn layer_scales(octaves: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(2 * octaves);
    for k in 0..octaves {
        let o = (1u64 << k) as f64;
        t.push(o);
        t.push(1.5 * o);
    }
    t
}

fn build_layers(img: &Image, p: &BriskParams) -> Result<Vec<Layer>> {
    let base = img.to_float();
    let mut layers = Vec::new();
    for t in layer_scales(p.octaves) {
        let w = (img.width() as f64 / t).floor() as usize;
        let h = (img.height() as f64 / t).floor() as usize;
        if w < MIN_LEVEL_SIZE || h < MIN_LEVEL_SIZE {
            break;
        }
        let limg = if t == 1.0 {
            img.clone()
        } else {
            gaussian_blur_f32(&base, 0.5 * t)?.resize(w, h, t).quantize()
        };
        layers.push(Layer {
            t,
            width: w,
            height: h,
            scores: fast_score_map(&limg, p.fast_threshold, BRISK_ARC),
        });
    }
    Ok(layers)
}

/// BRISK keypoints. A layer maximum survives when it also beats every score
/// in a window of the next finer layer and ties or beats the next coarser
/// one, and when no stronger keypoint of another layer overlaps it, so one
/// structure seen at several scales yields a single keypoint.
pub fn brisk_detect(img: &Image, p: &BriskParams) -> Result<Vec<Keypoint>> {
    require_size(img, 64, 64)?;
    let layers = build_layers(img, p)?;
    let mut out = Vec::new();
    for (li, layer) in layers.iter().enumerate() {
        let (w, h) = (layer.width, layer.height);
        if w <= 2 * LAYER_BORDER || h <= 2 * LAYER_BORDER {
            continue;
        }
        let finer = li.checked_sub(1).map(|i| &layers[i]);
        let coarser = layers.get(li + 1);
        for y in LAYER_BORDER..h - LAYER_BORDER {
            for x in LAYER_BORDER..w - LAYER_BORDER {
                if !raster_nonmax(&layer.scores, w, h, x, y) {
                    continue;
                }
                let s = layer.scores[y * w + x];
                let (fx, fy) = (x as f64, y as f64);
                let below = finer.map(|f| f.window_max(fx, fy, layer.t, 2));
                if below.is_some_and(|b| b >= s) {
                    continue;
                }
                let above = coarser.map(|c| c.window_max(fx, fy, layer.t, 1));
                if above.is_some_and(|a| a > s) {
                    continue;
                }
                let at = |dx: isize, dy: isize| layer.score(x as isize + dx, y as isize + dy);
                let ox = parabola_peak(at(-1, 0), s, at(1, 0)) as f64;
                let oy = parabola_peak(at(0, -1), s, at(0, 1)) as f64;
                let t = match (below, above) {
                    (Some(b), Some(a)) => {
                        let d = parabola_peak(b, s, a) as f64;
                        let log_t = layer.t.log2();
                        let neighbour = if d >= 0.0 { coarser } else { finer }.expect("both present");
                        (log_t + d.abs() * (neighbour.t.log2() - log_t)).exp2()
                    }
                    _ => layer.t,
                };
                let bx = ((fx + ox + 0.5) * layer.t - 0.5).clamp(0.0, img.width() as f64 - 1.0);
                let by = ((fy + oy + 0.5) * layer.t - 0.5).clamp(0.0, img.height() as f64 - 1.0);
                out.push(Keypoint {
                    x: bx as f32,
                    y: by as f32,
                    scale: FAST_SCALE * t as f32,
                    orientation: 0.0,
                    response: s.floor(),
                    octave: li as u32,
                });
            }
        }
    }
    Ok(suppress_across_layers(out))
}

/// Drop a keypoint when a stronger one from another layer sits within half
/// the smaller of their scales. Adjacent-layer checks miss a structure whose
/// score dips at an intermediate layer and recovers further up. Ties go to
/// the finer layer. Survivors keep their original order.
fn suppress_across_layers(kps: Vec<Keypoint>) -> Vec<Keypoint> {
    let mut order: Vec<usize> = (0..kps.len()).collect();
    order.sort_by(|&a, &b| {
        kps[b]
            .response
            .total_cmp(&kps[a].response)
            .then(kps[a].octave.cmp(&kps[b].octave))
            .then(a.cmp(&b))
    });
    let mut keep = vec![false; kps.len()];
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let k = &kps[i];
        let covered = kept.iter().any(|&j| {
            let o = &kps[j];
            o.octave != k.octave && (o.x - k.x).hypot(o.y - k.y) <= 0.5 * o.scale.min(k.scale)
        });
        if !covered {
            keep[i] = true;
            kept.push(i);
        }
    }
    kps.into_iter().zip(keep).filter(|(_, k)| *k).map(|(kp, _)| kp).collect()
}
