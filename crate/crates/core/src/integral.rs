//! Summed-area tables.

use crate::error::{Error, Result};
use crate::image::Image;

/// `(width + 1) x (height + 1)` table where entry `(i, j)` holds the sum of
/// every pixel strictly above row `j` and strictly left of column `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralImage {
    width: usize,
    height: usize,
    table: Vec<u64>,
}

impl IntegralImage {
    pub fn new(img: &Image) -> Self {
        let (w, h) = (img.width(), img.height());
        let stride = w + 1;
        let mut table = vec![0u64; stride * (h + 1)];
        for y in 0..h {
            let mut row_sum = 0u64;
            let src = &img.data()[y * w..(y + 1) * w];
            for x in 0..w {
                row_sum += src[x] as u64;
                table[(y + 1) * stride + x + 1] = table[y * stride + x + 1] + row_sum;
            }
        }
        IntegralImage {
            width: w,
            height: h,
            table,
        }
    }

    /// Width of the source image (the table is one wider).
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Table entry at column `i`, row `j`, both in `0..=width` / `0..=height`.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> u64 {
        self.table[j * (self.width + 1) + i]
    }

    /// Exact sum over the inclusive pixel rectangle `[x0, x1] x [y0, y1]`.
    pub fn box_sum(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> Result<u64> {
        if x0 > x1 || y0 > y1 || x1 >= self.width || y1 >= self.height {
            return Err(Error::OutOfBounds {
                x0,
                y0,
                x1,
                y1,
                width: self.width,
                height: self.height,
            });
        }
        Ok(self.box_sum_unchecked(x0, y0, x1, y1))
    }

    #[inline]
    pub(crate) fn box_sum_unchecked(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> u64 {
        self.entry(x1 + 1, y1 + 1) + self.entry(x0, y0) - self.entry(x1 + 1, y0) - self.entry(x0, y1 + 1)
    }

    /// Sum over the half-open rectangle `[x0, x1) x [y0, y1)` after clipping it
    /// to the image; empty after clipping gives 0.
    #[inline]
    pub(crate) fn clipped_sum(&self, x0: isize, y0: isize, x1: isize, y1: isize) -> f64 {
        let cx0 = x0.clamp(0, self.width as isize) as usize;
        let cx1 = x1.clamp(0, self.width as isize) as usize;
        let cy0 = y0.clamp(0, self.height as isize) as usize;
        let cy1 = y1.clamp(0, self.height as isize) as usize;
        if cx1 <= cx0 || cy1 <= cy0 {
            return 0.0;
        }
        (self.entry(cx1, cy1) + self.entry(cx0, cy0) - self.entry(cx1, cy0) - self.entry(cx0, cy1))
            as f64
    }

    /// True when the half-open rectangle lies inside the image.
    #[inline]
    pub(crate) fn contains(&self, x0: isize, y0: isize, x1: isize, y1: isize) -> bool {
        x0 >= 0 && y0 >= 0 && x1 <= self.width as isize && y1 <= self.height as isize
    }

    /// The table bilinearly interpolated at a real-valued corner position.
    fn entry_interp(&self, u: f64, v: f64) -> f64 {
        let u = u.clamp(0.0, self.width as f64);
        let v = v.clamp(0.0, self.height as f64);
        let i0 = (u.floor() as usize).min(self.width.saturating_sub(1));
        let j0 = (v.floor() as usize).min(self.height.saturating_sub(1));
        let fu = u - i0 as f64;
        let fv = v - j0 as f64;
        let a = self.entry(i0, j0) as f64;
        let b = self.entry(i0 + 1, j0) as f64;
        let c = self.entry(i0, j0 + 1) as f64;
        let d = self.entry(i0 + 1, j0 + 1) as f64;
        let top = a + (b - a) * fu;
        let bottom = c + (d - c) * fu;
        top + (bottom - top) * fv
    }

    /// Mean intensity over a box with real-valued edges, in pixel-edge
    /// coordinates (pixel `x` covers `[x, x + 1)`). Partially covered pixels
    /// contribute in proportion to their covered area.
    pub fn box_mean(&self, left: f64, top: f64, right: f64, bottom: f64) -> f64 {
        let area = (right - left) * (bottom - top);
        if area <= 0.0 {
            return 0.0;
        }
        let s = self.entry_interp(right, bottom) + self.entry_interp(left, top)
            - self.entry_interp(right, top)
            - self.entry_interp(left, bottom);
        s / area
    }
}

/// Build the summed-area table of `img`.
pub fn integral(img: &Image) -> IntegralImage {
    IntegralImage::new(img)
}
