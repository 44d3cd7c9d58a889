//! 8-bit grayscale rasters, a float working raster, file I/O and Gaussian
//! smoothing.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Row-major 8-bit grayscale image.
#[derive(Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl std::fmt::Debug for Image {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Image")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Malformed(format!(
                "zero-dimension image {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::Malformed(format!(
                "{} bytes of pixel data for a {width}x{height} image",
                data.len()
            )));
        }
        Ok(Image {
            width,
            height,
            data,
        })
    }

    /// A `width` x `height` image filled with `value`.
    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Image {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Image {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.data[y * self.width + x] = v;
    }

    /// Pixel lookup with clamp-to-edge replication.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    pub fn to_float(&self) -> FloatImage {
        FloatImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| v as f32).collect(),
        }
    }

    /// Bilinear sample at a real-valued position, clamp-to-edge outside.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (x0, y0) = (x0 as isize, y0 as isize);
        let p00 = self.get_clamped(x0, y0) as f64;
        let p10 = self.get_clamped(x0 + 1, y0) as f64;
        let p01 = self.get_clamped(x0, y0 + 1) as f64;
        let p11 = self.get_clamped(x0 + 1, y0 + 1) as f64;
        let top = p00 + (p10 - p00) * fx;
        let bottom = p01 + (p11 - p01) * fx;
        top + (bottom - top) * fy
    }
}

/// Real-valued working raster used inside the scale-space detectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatImage {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl FloatImage {
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::Malformed(format!(
                "{} values for a {width}x{height} float image",
                data.len()
            )));
        }
        Ok(FloatImage {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        FloatImage {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f32 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.data[y * self.width + x]
    }

    pub fn map(&self, f: impl Fn(f32) -> f32) -> FloatImage {
        FloatImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Round and clamp back to 8 bits.
    pub fn quantize(&self) -> Image {
        Image {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|&v| v.round().clamp(0.0, 255.0) as u8)
                .collect(),
        }
    }

    pub fn sample_bilinear(&self, x: f32, y: f32) -> f32 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (x0, y0) = (x0 as isize, y0 as isize);
        let p00 = self.get_clamped(x0, y0);
        let p10 = self.get_clamped(x0 + 1, y0);
        let p01 = self.get_clamped(x0, y0 + 1);
        let p11 = self.get_clamped(x0 + 1, y0 + 1);
        let top = p00 + (p10 - p00) * fx;
        let bottom = p01 + (p11 - p01) * fx;
        top + (bottom - top) * fy
    }

    /// Take every second pixel in both directions.
    pub fn decimate(&self) -> FloatImage {
        let w = (self.width / 2).max(1);
        let h = (self.height / 2).max(1);
        let mut out = Vec::with_capacity(w * h);
        for y in 0..h {
            let row = &self.data[(2 * y) * self.width..];
            for x in 0..w {
                out.push(row[2 * x]);
            }
        }
        FloatImage {
            width: w,
            height: h,
            data: out,
        }
    }

    /// Bilinear resampling to `width` x `height`, where destination pixel
    /// centres map to source positions `(x + 0.5) * ratio - 0.5`.
    pub fn resize(&self, width: usize, height: usize, ratio: f64) -> FloatImage {
        let mut out = Vec::with_capacity(width * height);
        for y in 0..height {
            let sy = ((y as f64 + 0.5) * ratio - 0.5) as f32;
            for x in 0..width {
                let sx = ((x as f64 + 0.5) * ratio - 0.5) as f32;
                out.push(self.sample_bilinear(sx, sy));
            }
        }
        FloatImage {
            width,
            height,
            data: out,
        }
    }
}

/// Normalized, sampled Gaussian with radius `ceil(3 * sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let denom = 2.0 * sigma * sigma;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / denom).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= sum);
    k
}

fn convolve_separable(
    width: usize,
    height: usize,
    src: &[f64],
    kernel: &[f64],
) -> Vec<f64> {
    let r = (kernel.len() / 2) as isize;
    let mut tmp = vec![0.0f64; width * height];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0;
            for (k, &w) in kernel.iter().enumerate() {
                let sx = (x as isize + k as isize - r).clamp(0, width as isize - 1) as usize;
                acc += w * row[sx];
            }
            tmp[y * width + x] = acc;
        }
    }
    let mut out = vec![0.0f64; width * height];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (k, &w) in kernel.iter().enumerate() {
                let sy = (y as isize + k as isize - r).clamp(0, height as isize - 1) as usize;
                acc += w * tmp[sy * width + x];
            }
            out[y * width + x] = acc;
        }
    }
    out
}

/// Separable Gaussian blur with clamp-to-edge borders, requantized to 8 bits.
pub fn gaussian_blur(img: &Image, sigma: f64) -> Result<Image> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("blur sigma must be positive, got {sigma}")));
    }
    let src: Vec<f64> = img.data.iter().map(|&v| v as f64).collect();
    let out = convolve_separable(img.width, img.height, &src, &gaussian_kernel(sigma));
    Ok(Image {
        width: img.width,
        height: img.height,
        data: out
            .into_iter()
            .map(|v| v.round().clamp(0.0, 255.0) as u8)
            .collect(),
    })
}

/// Separable Gaussian blur of a float raster with clamp-to-edge borders.
pub fn gaussian_blur_f32(img: &FloatImage, sigma: f64) -> Result<FloatImage> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("blur sigma must be positive, got {sigma}")));
    }
    let kernel: Vec<f32> = gaussian_kernel(sigma).into_iter().map(|w| w as f32).collect();
    let (w, h) = (img.width, img.height);
    let r = kernel.len() / 2;
    let mut tmp = vec![0.0f32; w * h];
    let mut padded = vec![0.0f32; w.max(h) + 2 * r];
    for y in 0..h {
        let row = &img.data[y * w..(y + 1) * w];
        for (i, p) in padded[..w + 2 * r].iter_mut().enumerate() {
            *p = row[(i as isize - r as isize).clamp(0, w as isize - 1) as usize];
        }
        for x in 0..w {
            let window = &padded[x..x + kernel.len()];
            tmp[y * w + x] = window.iter().zip(&kernel).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = vec![0.0f32; w * h];
    let mut acc = vec![0.0f32; w];
    for y in 0..h {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for (k, &wk) in kernel.iter().enumerate() {
            let sy = (y as isize + k as isize - r as isize).clamp(0, h as isize - 1) as usize;
            let src = &tmp[sy * w..(sy + 1) * w];
            for (a, &s) in acc.iter_mut().zip(src) {
                *a += wk * s;
            }
        }
        out[y * w..(y + 1) * w].copy_from_slice(&acc);
    }
    Ok(FloatImage {
        width: w,
        height: h,
        data: out,
    })
}

/// Rec.601 luma, rounded to nearest.
#[inline]
pub fn luma(r: u8, g: u8, b: u8) -> u8 {
    (0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64)
        .round()
        .clamp(0.0, 255.0) as u8
}

/// Load a grayscale image from a binary/ASCII PGM or a PNG file.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_image(&bytes)
}

/// Decode an in-memory PGM or PNG.
pub fn decode_image(bytes: &[u8]) -> Result<Image> {
    if bytes.starts_with(b"P5") || bytes.starts_with(b"P2") {
        decode_pgm(bytes)
    } else if bytes.starts_with(b"\x89PNG") {
        decode_png(bytes)
    } else {
        Err(Error::UnsupportedFormat(
            "expected a PGM (P5/P2) or PNG file".into(),
        ))
    }
}

fn decode_png(bytes: &[u8]) -> Result<Image> {
    use ::image::{DynamicImage, ImageFormat};
    let dynimg = ::image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| Error::Malformed(e.to_string()))?;
    let (w, h) = (dynimg.width() as usize, dynimg.height() as usize);
    let data = match dynimg {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0]).collect(),
        DynamicImage::ImageRgb8(buf) => buf.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        DynamicImage::ImageRgba8(buf) => buf.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2])).collect(),
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "PNG color type {:?} (only 8-bit gray/RGB are supported)",
                other.color()
            )))
        }
    };
    Image::new(w, h, data)
}

struct PgmHeader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmHeader<'a> {
    fn skip_ws_and_comments(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip_ws_and_comments();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Malformed("bad PGM header field".into()))
    }
}

fn decode_pgm(bytes: &[u8]) -> Result<Image> {
    let ascii = bytes.starts_with(b"P2");
    let mut hdr = PgmHeader { bytes, pos: 2 };
    let width = hdr.number()?;
    let height = hdr.number()?;
    let maxval = hdr.number()?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::UnsupportedFormat(format!(
            "PGM maxval {maxval} (only 8-bit samples are supported)"
        )));
    }
    if width == 0 || height == 0 {
        return Err(Error::Malformed(format!(
            "zero-dimension image {width}x{height}"
        )));
    }
    let n = width * height;
    let data = if ascii {
        let mut data = Vec::with_capacity(n);
        for _ in 0..n {
            let v = hdr.number()?;
            if v > maxval {
                return Err(Error::Malformed(format!("sample {v} exceeds maxval {maxval}")));
            }
            data.push(v as u8);
        }
        data
    } else {
        // exactly one whitespace byte separates the header from the raster
        let start = hdr.pos + 1;
        let raster = bytes
            .get(start..start + n)
            .ok_or_else(|| Error::Malformed("truncated PGM raster".into()))?;
        raster.to_vec()
    };
    Image::new(width, height, data)
}

/// Encode as binary PGM (P5, maxval 255).
pub fn encode_pgm(img: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width, img.height).into_bytes();
    out.extend_from_slice(&img.data);
    out
}

pub fn save_pgm(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode_pgm(img)).map_err(|e| Error::io(path, e))
}
