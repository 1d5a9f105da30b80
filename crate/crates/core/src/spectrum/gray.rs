use std::path::Path;

use image::{ColorType, DynamicImage};

use crate::{Error, Result};

/// ITU-R BT.601 luma weights for (R, G, B).
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Row-major grid of luminance samples.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    /// Builds an image from row-major samples.
    ///
    /// Both sides must be at least 2 and every sample finite and non-negative.
    pub fn new(height: usize, width: usize, pixels: Vec<f64>) -> Result<Self> {
        if height < 2 || width < 2 {
            return Err(Error::Dimension(format!(
                "image must be at least 2x2, got {height}x{width}"
            )));
        }
        if pixels.len() != height * width {
            return Err(Error::Dimension(format!(
                "{height}x{width} image needs {} samples, got {}",
                height * width,
                pixels.len()
            )));
        }
        if let Some(bad) = pixels.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Parameter(format!(
                "pixel values must be finite and non-negative, found {bad}"
            )));
        }
        Ok(GrayImage {
            height,
            width,
            pixels,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// Converts a decoded image. Single-channel images are used as is;
    /// everything else is reduced to 8-bit RGB and mapped through BT.601 luma.
    pub fn from_dynamic(img: &DynamicImage) -> Result<Self> {
        let (width, height) = (img.width() as usize, img.height() as usize);
        match img.color() {
            ColorType::L8 | ColorType::La8 => {
                let luma = img.to_luma8();
                let pixels = luma.as_raw().iter().map(|&v| f64::from(v)).collect();
                GrayImage::new(height, width, pixels)
            }
            _ => {
                let rgb = img.to_rgb8();
                let raw = rgb.as_raw();
                let channel =
                    |c: usize| -> Vec<u8> { raw.iter().skip(c).step_by(3).copied().collect() };
                to_grayscale(height, width, &channel(0), &channel(1), &channel(2))
            }
        }
    }

    /// Decodes a PNG or JPEG file.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        GrayImage::from_dynamic(&img)
    }
}

/// Combines three 8-bit channel planes into luma `0.299 R + 0.587 G + 0.114 B`.
pub fn to_grayscale(
    height: usize,
    width: usize,
    red: &[u8],
    green: &[u8],
    blue: &[u8],
) -> Result<GrayImage> {
    let expected = height * width;
    for (name, plane) in [("red", red), ("green", green), ("blue", blue)] {
        if plane.len() != expected {
            return Err(Error::Dimension(format!(
                "{name} channel has {} samples, expected {expected} for {height}x{width}",
                plane.len()
            )));
        }
    }
    let [wr, wg, wb] = LUMA_WEIGHTS;
    let pixels = red
        .iter()
        .zip(green)
        .zip(blue)
        .map(|((&r, &g), &b)| wr * f64::from(r) + wg * f64::from(g) + wb * f64::from(b))
        .collect();
    GrayImage::new(height, width, pixels)
}
