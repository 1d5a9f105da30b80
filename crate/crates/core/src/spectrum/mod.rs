//! Image to 1D power-spectrum profile.
//!
//! The pipeline is grayscale, 2D DFT, centred power map, optional
//! `ln(epsilon + p)` compression, azimuthal average over integer radii,
//! optional linear resampling to a fixed length and optional division by the
//! DC bin.

mod fft;
mod gray;

use std::io::Write;
use std::path::Path;

use image::DynamicImage;
use num_complex::Complex64;

pub use fft::Fft;
pub use gray::{to_grayscale, GrayImage, LUMA_WEIGHTS};

use crate::{numfmt, Error, Result};

/// Complex DFT coefficients of a [`GrayImage`], row-major, DC at `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum2D {
    height: usize,
    width: usize,
    coefficients: Vec<Complex64>,
}

impl Spectrum2D {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Coefficient `X[k, l]` for vertical frequency `k` and horizontal frequency `l`.
    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        self.coefficients[k * self.width + l]
    }
}

/// Squared DFT magnitudes with the DC bin moved to `(height / 2, width / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerMap {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl PowerMap {
    /// Wraps an already centred map. Values must be finite; negative values
    /// are allowed only because log-compressed maps reuse this type.
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 || values.len() != height * width {
            return Err(Error::Dimension(format!(
                "power map {height}x{width} cannot hold {} values",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("power map values must be finite".into()));
        }
        Ok(PowerMap {
            height,
            width,
            values,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    pub fn center(&self) -> (usize, usize) {
        (self.height / 2, self.width / 2)
    }

    fn map(mut self, f: impl Fn(f64) -> f64) -> Self {
        for v in &mut self.values {
            *v = f(*v);
        }
        self
    }
}

/// 1D radial profile; the classifier feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProfile(Vec<f64>);

impl SpectralProfile {
    pub fn new(bins: Vec<f64>) -> Self {
        SpectralProfile(bins)
    }

    pub fn bins(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Post-processing switches for [`extract_features`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionConfig {
    /// Resample the profile to this many bins; 0 keeps the native length.
    pub target_length: usize,
    /// Divide every bin by bin 0.
    pub normalize_dc: bool,
    /// Replace each power value by `ln(epsilon + p)` before averaging.
    pub log_power: bool,
    pub epsilon: f64,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            target_length: 0,
            normalize_dc: true,
            log_power: true,
            epsilon: 1e-12,
        }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.target_length == 1 {
            return Err(Error::Parameter(
                "target length must be 0 (native) or at least 2".into(),
            ));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Parameter(format!(
                "epsilon must be a positive finite number, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// Two-dimensional DFT via row-column decomposition.
pub fn dft2d(img: &GrayImage) -> Spectrum2D {
    let (height, width) = (img.height(), img.width());
    let mut coefficients: Vec<Complex64> = img
        .pixels()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();

    let row_fft = Fft::new(width);
    for row in coefficients.chunks_exact_mut(width) {
        row_fft.forward(row);
    }

    let col_fft = Fft::new(height);
    let mut column = vec![Complex64::new(0.0, 0.0); height];
    for c in 0..width {
        for (r, slot) in column.iter_mut().enumerate() {
            *slot = coefficients[r * width + c];
        }
        col_fft.forward(&mut column);
        for (r, v) in column.iter().enumerate() {
            coefficients[r * width + c] = *v;
        }
    }

    Spectrum2D {
        height,
        width,
        coefficients,
    }
}

/// `|X|^2` with quadrants swapped so DC lands at `(height / 2, width / 2)`.
pub fn power_map(spec: &Spectrum2D) -> PowerMap {
    let (height, width) = (spec.height, spec.width);
    let (cy, cx) = (height / 2, width / 2);
    let mut values = vec![0.0; height * width];
    for r in 0..height {
        let k = (r + height - cy) % height;
        for c in 0..width {
            let l = (c + width - cx) % width;
            values[r * width + c] = spec.get(k, l).norm_sqr();
        }
    }
    PowerMap {
        height,
        width,
        values,
    }
}

/// Mean of the map over rings of constant rounded radius around the DC bin.
///
/// Radii are rounded half away from zero. Bin `i` averages every pixel whose
/// rounded distance is `i`; empty bins at the outer edge are dropped.
pub fn azimuthal_average(pm: &PowerMap) -> SpectralProfile {
    let (cy, cx) = pm.center();
    let max_radius = radius(cy as f64, cx as f64);
    let mut sums = vec![0.0; max_radius + 1];
    let mut counts = vec![0usize; max_radius + 1];
    for r in 0..pm.height {
        let dy = r as f64 - cy as f64;
        for c in 0..pm.width {
            let ring = radius(dy, c as f64 - cx as f64);
            sums[ring] += pm.get(r, c);
            counts[ring] += 1;
        }
    }
    while counts.last() == Some(&0) {
        counts.pop();
        sums.pop();
    }
    let bins = sums
        .iter()
        .zip(&counts)
        .map(|(s, &n)| if n == 0 { 0.0 } else { s / n as f64 })
        .collect();
    SpectralProfile(bins)
}

fn radius(dy: f64, dx: f64) -> usize {
    // f64::round rounds half away from zero
    (dy * dy + dx * dx).sqrt().round() as usize
}

/// Native profile length for an image of the given size.
pub fn native_length(height: usize, width: usize) -> usize {
    radius((height / 2) as f64, (width / 2) as f64) + 1
}

/// Linear resampling onto `target_length` evenly spaced points of `[0, 1]`.
///
/// Both endpoints are reproduced exactly, and so is every bin when the
/// length does not change.
pub fn interpolate_profile(p: &SpectralProfile, target_length: usize) -> Result<SpectralProfile> {
    if target_length < 2 {
        return Err(Error::Parameter(format!(
            "interpolation target length must be at least 2, got {target_length}"
        )));
    }
    let src = p.bins();
    if src.len() < 2 {
        return Err(Error::Dimension(format!(
            "cannot interpolate a profile with {} bins",
            src.len()
        )));
    }
    let last = src.len() - 1;
    let denom = (target_length - 1) as f64;
    let bins = (0..target_length)
        .map(|k| {
            let t = (k * last) as f64 / denom;
            let i = t.floor() as usize;
            if i >= last {
                return src[last];
            }
            let frac = t - i as f64;
            if frac == 0.0 {
                src[i]
            } else {
                src[i] + frac * (src[i + 1] - src[i])
            }
        })
        .collect();
    Ok(SpectralProfile(bins))
}

/// Divides every bin by bin 0. Fails when bin 0 is not above `epsilon`.
pub fn normalize_profile(p: &SpectralProfile, epsilon: f64) -> Result<SpectralProfile> {
    let dc = match p.bins().first() {
        Some(&dc) => dc,
        None => return Err(Error::Dimension("cannot normalize an empty profile".into())),
    };
    if !(dc > epsilon) {
        return Err(Error::DegenerateImage { dc, epsilon });
    }
    let mut bins: Vec<f64> = p.bins().iter().map(|v| v / dc).collect();
    bins[0] = 1.0;
    Ok(SpectralProfile(bins))
}

/// Runs the whole extraction chain on an already grayscale image.
pub fn profile_of(img: &GrayImage, cfg: &ExtractionConfig) -> Result<SpectralProfile> {
    cfg.validate()?;
    let mut pm = power_map(&dft2d(img));
    if cfg.log_power {
        let eps = cfg.epsilon;
        pm = pm.map(|p| (eps + p).ln());
    }
    let mut profile = azimuthal_average(&pm);
    if cfg.target_length != 0 {
        profile = interpolate_profile(&profile, cfg.target_length)?;
    }
    if cfg.normalize_dc {
        profile = normalize_profile(&profile, cfg.epsilon)?;
    }
    Ok(profile)
}

/// Extracts the feature profile of a decoded image.
pub fn extract_features(img: &DynamicImage, cfg: &ExtractionConfig) -> Result<SpectralProfile> {
    profile_of(&GrayImage::from_dynamic(img)?, cfg)
}

/// Decodes an image file and extracts its profile.
pub fn extract_file(path: impl AsRef<Path>, cfg: &ExtractionConfig) -> Result<SpectralProfile> {
    profile_of(&GrayImage::open(path)?, cfg)
}

/// Writes one `path,label,b0,...` CSV record with 17 significant digits.
/// An unknown label is written as an empty field.
pub fn write_profile_row<W: Write>(
    out: W,
    path: &str,
    label: Option<u8>,
    profile: &SpectralProfile,
) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    let mut record = Vec::with_capacity(profile.len() + 2);
    record.push(path.to_string());
    record.push(label.map(|l| l.to_string()).unwrap_or_default());
    record.extend(profile.bins().iter().map(|&v| numfmt::real(v)));
    w.write_record(&record)?;
    w.flush()
}
