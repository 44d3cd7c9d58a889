//! Shared fixtures: seeded noise and textured scenes, plus exact geometric
//! warps used as ground truth.
#![allow(dead_code)]

use featbench_core::image::gaussian_blur;
use featbench_core::Image;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn noise(w: usize, h: usize, seed: u64) -> Image {
    let mut r = rng(seed);
    Image::from_fn(w, h, |_, _| r.random())
}

/// Random rectangles and discs over a mid-grey ground, lightly blurred.
pub fn textured(w: usize, h: usize, seed: u64) -> Image {
    let mut r = rng(seed);
    let mut px = vec![128u8; w * h];
    let n = (w * h) / 600 + 8;
    for _ in 0..n {
        let v: u8 = if r.random::<bool>() { r.random_range(0..70) } else { r.random_range(185..=255) };
        let cx = r.random_range(0.0..w as f64);
        let cy = r.random_range(0.0..h as f64);
        if r.random::<bool>() {
            let (hw, hh) = (r.random_range(3.0..18.0), r.random_range(3.0..18.0));
            for y in 0..h {
                for x in 0..w {
                    if (x as f64 - cx).abs() <= hw && (y as f64 - cy).abs() <= hh {
                        px[y * w + x] = v;
                    }
                }
            }
        } else {
            let rad = r.random_range(2.0..12.0);
            for y in 0..h {
                for x in 0..w {
                    if (x as f64 - cx).hypot(y as f64 - cy) <= rad {
                        px[y * w + x] = v;
                    }
                }
            }
        }
    }
    let img = Image::new(w, h, px).unwrap();
    gaussian_blur(&img, 0.8).unwrap()
}

/// Image centre in pixel coordinates.
pub fn centre(img: &Image) -> (f64, f64) {
    ((img.width() as f64 - 1.0) / 2.0, (img.height() as f64 - 1.0) / 2.0)
}

/// Where a point of the source lands after [`rotate`] by `deg`.
pub fn rotate_point(x: f64, y: f64, deg: f64, c: (f64, f64)) -> (f64, f64) {
    let (s, co) = deg.to_radians().sin_cos();
    let (dx, dy) = (x - c.0, y - c.1);
    (c.0 + co * dx - s * dy, c.1 + s * dx + co * dy)
}

/// Rotate by `deg` about the centre (positive turns x toward y, i.e.
/// clockwise on screen), bilinear, same size, clamped borders.
pub fn rotate(img: &Image, deg: f64) -> Image {
    let c = centre(img);
    Image::from_fn(img.width(), img.height(), |x, y| {
        let (sx, sy) = rotate_point(x as f64, y as f64, -deg, c);
        img.sample_bilinear(sx, sy).round().clamp(0.0, 255.0) as u8
    })
}

/// Scale by `f` about the origin corner, bilinear.
pub fn scale(img: &Image, f: f64) -> Image {
    let w = (img.width() as f64 * f).round() as usize;
    let h = (img.height() as f64 * f).round() as usize;
    Image::from_fn(w, h, |x, y| {
        img.sample_bilinear((x as f64 + 0.5) / f - 0.5, (y as f64 + 0.5) / f - 0.5)
            .round()
            .clamp(0.0, 255.0) as u8
    })
}

/// Fraction of `a` whose mapped position has a counterpart in `b` within
/// `tol` pixels. Points mapping within `margin` of the border are skipped.
pub fn repeatability(
    a: &[(f64, f64)],
    b: &[(f64, f64)],
    map: impl Fn(f64, f64) -> (f64, f64),
    dims: (f64, f64),
    margin: f64,
    tol: f64,
) -> f64 {
    let mut total = 0usize;
    let mut hit = 0usize;
    for &(x, y) in a {
        let (mx, my) = map(x, y);
        if mx < margin || my < margin || mx > dims.0 - 1.0 - margin || my > dims.1 - 1.0 - margin {
            continue;
        }
        total += 1;
        if b.iter().any(|&(bx, by)| (bx - mx).hypot(by - my) <= tol) {
            hit += 1;
        }
    }
    assert!(total > 0, "no keypoints inside the comparison window");
    hit as f64 / total as f64
}
