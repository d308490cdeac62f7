//! Image containers and color conversions.
//!
//! All images are row-major with the origin at the top-left corner. The
//! texture pipeline needs a one-pixel border, so anything loaded from disk
//! must be at least 3x3.

use std::path::Path;

use crate::error::{Error, Result};

/// Smallest width/height accepted by the texture pipeline.
pub const MIN_DIMENSION: usize = 3;

/// 8-bit sRGB image, row-major RGB triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::mismatch(
                format!("{} bytes for {width}x{height} RGB", width * height * 3),
                format!("{} bytes", data.len()),
            ));
        }
        Ok(Self { width, height, data })
    }

    /// Builds an image by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn pixels(&self) -> impl Iterator<Item = [u8; 3]> + '_ {
        self.data.chunks_exact(3).map(|c| [c[0], c[1], c[2]])
    }

    /// Copies the `w x h` window whose top-left corner is `(x0, y0)`.
    ///
    /// Panics if the window does not fit inside the image.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> RgbImage {
        assert!(x0 + w <= self.width && y0 + h <= self.height, "crop window out of bounds");
        RgbImage::from_fn(w, h, |x, y| self.pixel(x0 + x, y0 + y))
    }

    /// Drops a `border`-pixel frame, matching the LBP interior of that radius.
    pub fn interior(&self, border: usize) -> RgbImage {
        self.crop(
            border,
            border,
            self.width.saturating_sub(2 * border),
            self.height.saturating_sub(2 * border),
        )
    }

    /// Fails with `ImageTooSmall` unless both sides are at least `min`.
    pub fn ensure_min_size(&self, min: usize) -> Result<()> {
        if self.width < min || self.height < min {
            return Err(Error::ImageTooSmall {
                width: self.width,
                height: self.height,
                min,
            });
        }
        Ok(())
    }

    /// Writes the image as an 8-bit RGB PNG.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        image::save_buffer_with_format(
            path,
            &self.data,
            self.width as u32,
            self.height as u32,
            image::ExtendedColorType::Rgb8,
            image::ImageFormat::Png,
        )
        .map_err(|e| Error::Encode(format!("{}: {e}", path.display())))
    }
}

/// CIELAB image (D65), row-major `[L, a, b]` triples.
#[derive(Debug, Clone, PartialEq)]
pub struct LabImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl LabImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[[f64; 3]] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }
}

/// 8-bit single-channel image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::mismatch(
                format!("{} bytes for {width}x{height} gray", width * height),
                format!("{} bytes", data.len()),
            ));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[y * self.width + x]
    }

    /// Drops a `border`-pixel frame, matching the LBP interior of that radius.
    pub fn interior(&self, border: usize) -> GrayImage {
        let w = self.width.saturating_sub(2 * border);
        let h = self.height.saturating_sub(2 * border);
        GrayImage::from_fn(w, h, |x, y| self.get(x + border, y + border))
    }

    /// Writes the image as an 8-bit grayscale PNG.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        image::save_buffer_with_format(
            path,
            &self.data,
            self.width as u32,
            self.height as u32,
            image::ExtendedColorType::L8,
            image::ImageFormat::Png,
        )
        .map_err(|e| Error::Encode(format!("{}: {e}", path.display())))
    }
}

fn open_dynamic(path: &Path) -> Result<image::DynamicImage> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let reader = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    reader.decode().map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Decodes a PNG or JPEG into 8-bit RGB.
///
/// Alpha is dropped and 16-bit channels are rescaled to 8 bits. Images
/// smaller than 3x3 are rejected.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let rgb = open_dynamic(path)?.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let img = RgbImage::new(w, h, rgb.into_raw())?;
    img.ensure_min_size(MIN_DIMENSION)?;
    Ok(img)
}

/// Decodes a single-channel mask (class ids or 0/255 water masks).
///
/// Color masks are reduced to their first channel rather than to luma so
/// that class ids survive unchanged.
pub fn load_mask(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let dynamic = open_dynamic(path)?;
    let (w, h) = (dynamic.width() as usize, dynamic.height() as usize);
    let data = match dynamic {
        image::DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        other => other.to_rgb8().pixels().map(|p| p.0[0]).collect(),
    };
    GrayImage::new(w, h, data)
}

// sRGB (IEC 61966-2-1) to XYZ, D65.
const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

fn srgb_to_linear(channel: u8) -> f64 {
    let c = channel as f64 / 255.0;
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// Converts one sRGB pixel to CIELAB under D65.
pub fn srgb_pixel_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let lin = rgb.map(srgb_to_linear);
    let mut xyz = [0.0; 3];
    for (row, out) in SRGB_TO_XYZ.iter().zip(xyz.iter_mut()) {
        *out = row[0] * lin[0] + row[1] * lin[1] + row[2] * lin[2];
    }
    // White point taken from the matrix rows so that sRGB white lands on a = b = 0.
    let white = SRGB_TO_XYZ.map(|row| row[0] + row[1] + row[2]);
    let fx = lab_f(xyz[0] / white[0]);
    let fy = lab_f(xyz[1] / white[1]);
    let fz = lab_f(xyz[2] / white[2]);
    let l = (116.0 * fy - 16.0).clamp(0.0, 100.0);
    let a = (500.0 * (fx - fy)).clamp(-128.0, 127.0);
    let b = (200.0 * (fy - fz)).clamp(-128.0, 127.0);
    [l, a, b]
}

pub fn rgb_to_lab(img: &RgbImage) -> LabImage {
    LabImage {
        width: img.width,
        height: img.height,
        data: img.pixels().map(srgb_pixel_to_lab).collect(),
    }
}

/// BT.601 luma, rounded to the nearest integer.
pub fn rgb_to_gray(img: &RgbImage) -> GrayImage {
    let data = img
        .pixels()
        .map(|[r, g, b]| {
            let y = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
            y.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        data,
    }
}
