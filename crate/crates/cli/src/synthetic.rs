//! Synthetic pose-grid dataset: one textured scene per capture point, viewed
//! through 3 vertically offset crops and 5 in-plane rotations.

use std::path::{Path, PathBuf};

use featbench_core::bench::pose::{PoseLabel, QueryEntry, TemplateEntry, HEIGHT_LEVELS, MIDDLE_HEIGHT, YAWS};
use featbench_core::bench::DatasetManifest;
use featbench_core::image::{gaussian_blur_f32, save_pgm};
use featbench_core::{Error, FloatImage, Image, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_WIDTH: usize = 555;
pub const DEFAULT_HEIGHT: usize = 480;
pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_CONTRAST: f64 = 150.0;
pub const MANIFEST_NAME: &str = "manifest.tsv";

/// Vertical crop offset between adjacent height levels, pixels.
const HEIGHT_SHIFT: f64 = 40.0;
const SCENE_BLUR: f64 = 1.0;
const NOISE_SD: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n_points: usize,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    /// Half-range of shape intensities around the point's palette mean.
    pub contrast: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_points: 5,
            width: DEFAULT_WIDTH,
            height: DEFAULT_HEIGHT,
            seed: DEFAULT_SEED,
            contrast: DEFAULT_CONTRAST,
        }
    }
}

/// A scene large enough to hold every rotated and shifted crop.
pub struct Scene {
    pub image: FloatImage,
}

fn scene_side(width: usize, height: usize) -> usize {
    let half_diag = 0.5 * (width as f64).hypot(height as f64);
    (2.0 * (half_diag + HEIGHT_SHIFT) + 16.0).ceil() as usize
}

/// Mean intensity of a point's palette. Points are spread over the
/// intensity range so their histograms differ.
fn palette_mean(point: usize, n_points: usize) -> f64 {
    if n_points <= 1 {
        return 128.0;
    }
    let k = (point * 3) % n_points;
    60.0 + 130.0 * k as f64 / (n_points - 1) as f64
}

fn paint(img: &mut FloatImage, x0: f64, y0: f64, x1: f64, y1: f64, v: f32, inside: impl Fn(f64, f64) -> bool) {
    let (w, h) = (img.width() as f64, img.height() as f64);
    let xa = x0.floor().clamp(0.0, w) as usize;
    let xb = x1.ceil().clamp(0.0, w) as usize;
    let ya = y0.floor().clamp(0.0, h) as usize;
    let yb = y1.ceil().clamp(0.0, h) as usize;
    for y in ya..yb {
        for x in xa..xb {
            if inside(x as f64 + 0.5, y as f64 + 0.5) {
                img.set(x, y, v);
            }
        }
    }
}

fn draw_stroke(img: &mut FloatImage, a: (f64, f64), b: (f64, f64), half_width: f64, v: f32) {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = (dx * dx + dy * dy).max(1e-9);
    let pad = half_width + 1.0;
    paint(
        img,
        a.0.min(b.0) - pad,
        a.1.min(b.1) - pad,
        a.0.max(b.0) + pad,
        a.1.max(b.1) + pad,
        v,
        |x, y| {
            let t = (((x - a.0) * dx + (y - a.1) * dy) / len2).clamp(0.0, 1.0);
            (x - a.0 - t * dx).hypot(y - a.1 - t * dy) <= half_width
        },
    );
}

impl Scene {
    pub fn render(point: usize, spec: &SyntheticSpec) -> Scene {
        let side = scene_side(spec.width, spec.height);
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(point as u64));
        let mean = palette_mean(point, spec.n_points);
        let contrast = spec.contrast;
        let shade = |rng: &mut ChaCha8Rng| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            (mean + sign * rng.random_range(0.4 * contrast..contrast)).clamp(0.0, 255.0) as f32
        };

        // smooth background gradient
        let (gx, gy) = (rng.random_range(-0.03..0.03), rng.random_range(-0.03..0.03));
        let mut img = FloatImage::zeros(side, side);
        let c = side as f64 / 2.0;
        for y in 0..side {
            for x in 0..side {
                img.set(x, y, (mean + gx * (x as f64 - c) + gy * (y as f64 - c)) as f32);
            }
        }
        let s = side as f64;
        let area = s * s / (555.0 * 480.0);
        for _ in 0..(70.0 * area) as usize {
            let (x, y) = (rng.random_range(0.0..s), rng.random_range(0.0..s));
            let (w, h) = (rng.random_range(12.0..70.0), rng.random_range(12.0..70.0));
            let v = shade(&mut rng);
            paint(&mut img, x, y, x + w, y + h, v, |_, _| true);
        }
        for _ in 0..(45.0 * area) as usize {
            let (x, y) = (rng.random_range(0.0..s), rng.random_range(0.0..s));
            let (rx, ry) = (rng.random_range(3.0..25.0), rng.random_range(3.0..25.0));
            let v = shade(&mut rng);
            paint(&mut img, x - rx, y - ry, x + rx, y + ry, v, |px, py| {
                ((px - x) / rx).powi(2) + ((py - y) / ry).powi(2) <= 1.0
            });
        }
        // small high-contrast dots, away from the palette mean
        let dot = (if mean < 128.0 { mean + contrast } else { mean - contrast }).clamp(0.0, 255.0) as f32;
        for _ in 0..(80.0 * area) as usize {
            let (x, y) = (rng.random_range(0.0..s), rng.random_range(0.0..s));
            let r = rng.random_range(1.5..4.5);
            paint(&mut img, x - r, y - r, x + r, y + r, dot, |px, py| (px - x).hypot(py - y) <= r);
        }
        // glyphs: short runs of connected strokes on a small grid
        for _ in 0..(35.0 * area) as usize {
            let (x, y) = (rng.random_range(0.0..s), rng.random_range(0.0..s));
            let cell = rng.random_range(5.0..10.0);
            let v = shade(&mut rng);
            let mut p = (x, y);
            for _ in 0..rng.random_range(2..5) {
                let q = (
                    x + cell * rng.random_range(0..3) as f64,
                    y + cell * rng.random_range(0..4) as f64,
                );
                draw_stroke(&mut img, p, q, 1.5, v);
                p = q;
            }
        }
        for v in img.data_mut() {
            *v += (rng.random::<f64>() - 0.5) as f32 * (NOISE_SD * 12f64.sqrt()) as f32;
        }
        let image = gaussian_blur_f32(&img, SCENE_BLUR).expect("positive sigma");
        Scene { image }
    }

    /// The view at `(height_level, yaw)`: the crop centred `HEIGHT_SHIFT`
    /// pixels per level from the scene centre, rotated by `yaw` degrees
    /// about its own centre, bilinearly resampled.
    pub fn view(&self, width: usize, height: usize, height_level: u8, yaw: i32) -> Image {
        let c = self.image.width() as f64 / 2.0;
        let cy = c + (height_level as f64 - MIDDLE_HEIGHT as f64) * HEIGHT_SHIFT;
        let (sin, cos) = (yaw as f64).to_radians().sin_cos();
        let (hw, hh) = (width as f64 / 2.0, height as f64 / 2.0);
        Image::from_fn(width, height, |u, v| {
            let (du, dv) = (u as f64 + 0.5 - hw, v as f64 + 0.5 - hh);
            let sx = c + cos * du - sin * dv - 0.5;
            let sy = cy + sin * du + cos * dv - 0.5;
            self.image.sample_bilinear(sx as f32, sy as f32).round().clamp(0.0, 255.0) as u8
        })
    }
}

fn yaw_tag(yaw: i32) -> String {
    if yaw < 0 {
        format!("m{}", -yaw)
    } else {
        format!("p{yaw}")
    }
}

/// Writes every image and the manifest under `dir` and returns the manifest.
/// Per point: 15 queries and one template (the middle-height 0 degree view).
pub fn generate(dir: &Path, spec: &SyntheticSpec) -> Result<DatasetManifest> {
    if spec.n_points == 0 {
        return Err(Error::InvalidArgument("n_points must be at least 1".into()));
    }
    if spec.width < 64 || spec.height < 64 {
        return Err(Error::InvalidArgument(format!(
            "image size {}x{} is below 64x64",
            spec.width, spec.height
        )));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let mut manifest = DatasetManifest::default();
    for point in 0..spec.n_points {
        let scene = Scene::render(point, spec);
        let id = point as u32;
        for pose in PoseLabel::grid(id) {
            let img = scene.view(spec.width, spec.height, pose.height_level, pose.yaw);
            let path = dir.join(format!("p{point:03}_h{}_{}.pgm", pose.height_level, yaw_tag(pose.yaw)));
            save_pgm(&img, &path)?;
            if pose.height_level == MIDDLE_HEIGHT && pose.yaw == 0 {
                let tpath: PathBuf = dir.join(format!("p{point:03}_template.pgm"));
                save_pgm(&img, &tpath)?;
                manifest.templates.push(TemplateEntry {
                    path: tpath,
                    pose,
                    object: format!("scene {point}"),
                });
            }
            manifest.queries.push(QueryEntry { path, pose });
        }
    }
    debug_assert_eq!(manifest.queries.len(), spec.n_points * HEIGHT_LEVELS as usize * YAWS.len());
    manifest.save(dir.join(MANIFEST_NAME))?;
    Ok(manifest)
}
