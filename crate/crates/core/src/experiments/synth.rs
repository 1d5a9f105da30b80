//! Synthetic stand-in corpus.
//!
//! A "real" image is isotropic noise with radial power spectrum `1/f^p`. Its
//! "fake" twin is the same noise field passed through a radial Gaussian
//! low-pass, then rescaled to the real image's mean and standard deviation.
//! The only systematic difference between the classes therefore sits at high
//! spatial frequencies. Each pair draws its own brightness and contrast so
//! that low-frequency power varies across images.

use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::classify::Label;
use crate::dataset::{DatasetManifest, ManifestEntry};
use crate::spectrum::Fft;
use crate::{Error, Result};

/// Name of the manifest written next to the images.
pub const MANIFEST_NAME: &str = "manifest.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    /// Side length of the square images.
    pub image_size: usize,
    /// Images per class.
    pub count_per_class: usize,
    pub seed: u64,
    /// Spectral exponent `p` of the real images.
    pub exponent: f64,
    /// Low-pass strength in (0, 1). The Gaussian width is
    /// `f_nyquist * cutoff / (1 - cutoff)`, so values near 1 leave the image
    /// essentially untouched and small values remove all detail.
    pub cutoff: f64,
    /// When non-zero, consecutive images of a class share a group id, as if
    /// they were frames of one video.
    pub frames_per_group: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            image_size: 128,
            count_per_class: 500,
            seed: 42,
            exponent: 1.8,
            cutoff: 0.35,
            frames_per_group: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.count_per_class < 1 {
            return Err(Error::Parameter("need at least one image per class".into()));
        }
        if self.image_size < 2 {
            return Err(Error::Parameter("image size must be at least 2".into()));
        }
        if !(self.cutoff > 0.0 && self.cutoff < 1.0) {
            return Err(Error::Parameter(format!(
                "cutoff must lie in (0, 1), got {}",
                self.cutoff
            )));
        }
        if !self.exponent.is_finite() {
            return Err(Error::Parameter("exponent must be finite".into()));
        }
        Ok(())
    }
}

/// Pixels of one real/fake pair, row-major, 8-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthPair {
    pub real: Vec<u8>,
    pub fake: Vec<u8>,
}

/// Generates pair `index`; independent of every other pair.
pub fn synth_pair(cfg: &SynthConfig, index: u64) -> SynthPair {
    let n = cfg.image_size;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);

    let mut field: Vec<Complex64> = (0..n * n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), 0.0))
        .collect();
    let fft = Fft::new(n);
    transform_2d(&mut field, n, &fft, false);

    let half_exponent = cfg.exponent / 2.0;
    let width = 0.5 * cfg.cutoff / (1.0 - cfg.cutoff);
    let mut low = field.clone();
    for r in 0..n {
        let fy = signed_frequency(r, n);
        for c in 0..n {
            let fx = signed_frequency(c, n);
            let f = (fy * fy + fx * fx).sqrt();
            let shape = if f == 0.0 {
                0.0
            } else {
                f.powf(-half_exponent)
            };
            let attenuation = (-0.5 * (f / width).powi(2)).exp();
            field[r * n + c] *= shape;
            low[r * n + c] *= shape * attenuation;
        }
    }
    transform_2d(&mut field, n, &fft, true);
    transform_2d(&mut low, n, &fft, true);

    let mean = rng.gen_range(96.0..160.0);
    let contrast = rng.gen_range(12f64.ln()..40f64.ln()).exp();
    SynthPair {
        real: quantize(&field, mean, contrast),
        fake: quantize(&low, mean, contrast),
    }
}

fn signed_frequency(i: usize, n: usize) -> f64 {
    let i = i as f64;
    let n = n as f64;
    if i < n / 2.0 {
        i / n
    } else {
        (i - n) / n
    }
}

fn transform_2d(data: &mut [Complex64], n: usize, fft: &Fft, inverse: bool) {
    let run = |buf: &mut [Complex64]| {
        if inverse {
            fft.inverse(buf)
        } else {
            fft.forward(buf)
        }
    };
    for row in data.chunks_exact_mut(n) {
        run(row);
    }
    let mut column = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            column[r] = data[r * n + c];
        }
        run(&mut column);
        for r in 0..n {
            data[r * n + c] = column[r];
        }
    }
}

/// Rescales the real part to the given mean and standard deviation, then
/// clamps and rounds to 8 bits.
fn quantize(field: &[Complex64], mean: f64, std: f64) -> Vec<u8> {
    let n = field.len() as f64;
    let mu = field.iter().map(|z| z.re).sum::<f64>() / n;
    let var = field.iter().map(|z| (z.re - mu).powi(2)).sum::<f64>() / n;
    let scale = if var > 0.0 { std / var.sqrt() } else { 0.0 };
    field
        .iter()
        .map(|z| (mean + (z.re - mu) * scale).round().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Writes `count_per_class` real and fake PNGs plus [`MANIFEST_NAME`] into
/// `out_dir`. Manifest paths are relative to `out_dir`.
pub fn generate_synthetic(cfg: &SynthConfig, out_dir: &Path) -> Result<DatasetManifest> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let n = cfg.image_size as u32;

    let written: Vec<Result<[ManifestEntry; 2]>> = (0..cfg.count_per_class)
        .into_par_iter()
        .map(|i| {
            let pair = synth_pair(cfg, i as u64);
            let mut out = Vec::with_capacity(2);
            for (label, pixels) in [(Label::Real, pair.real), (Label::Fake, pair.fake)] {
                let name = format!("{}_{i:05}.png", label.name());
                let path = out_dir.join(&name);
                let img = image::GrayImage::from_raw(n, n, pixels).expect("buffer matches size");
                img.save(&path).map_err(|source| match source {
                    image::ImageError::IoError(e) => Error::io(&path, e),
                    source => Error::Image {
                        path: path.clone(),
                        source,
                    },
                })?;
                let group = (cfg.frames_per_group > 0)
                    .then(|| format!("{}_v{:04}", label.name(), i / cfg.frames_per_group));
                out.push(ManifestEntry {
                    path: name,
                    label,
                    group,
                });
            }
            let [real, fake]: [ManifestEntry; 2] = out.try_into().expect("two entries");
            Ok([real, fake])
        })
        .collect();

    let mut entries = Vec::with_capacity(2 * cfg.count_per_class);
    for pair in written {
        entries.extend(pair?);
    }
    let manifest = DatasetManifest::new(entries, out_dir)?;
    manifest.save(&out_dir.join(MANIFEST_NAME))?;
    Ok(manifest)
}
