use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use sfk::classify::{
    kmeans_fit, lr_train, svm_fit, ClassifierSpec, KMeansConfig, Label, LabeledSample,
    LogisticConfig, SvmTrainConfig,
};
use sfk::dataset::{build_cache, SplitSpec};
use sfk::experiments::{generate_synthetic, sample_size_sweep, SynthConfig};
use sfk::spectrum::{dft2d, profile_of, ExtractionConfig, GrayImage};

fn image() -> impl Strategy<Value = GrayImage> {
    (2usize..14, 2usize..14).prop_flat_map(|(h, w)| {
        prop::collection::vec(0.0f64..255.0, h * w)
            .prop_map(move |px| GrayImage::new(h, w, px).unwrap())
    })
}

fn rotate_quarter(img: &GrayImage) -> GrayImage {
    let (h, w) = (img.height(), img.width());
    let mut out = vec![0.0; h * w];
    for r in 0..h {
        for c in 0..w {
            // (r, c) -> (c, h - 1 - r) in a w x h image
            out[c * h + (h - 1 - r)] = img.pixels()[r * w + c];
        }
    }
    GrayImage::new(w, h, out).unwrap()
}

fn samples() -> impl Strategy<Value = Vec<LabeledSample>> {
    (2usize..5, 6usize..20).prop_flat_map(|(d, n)| {
        prop::collection::vec(prop::collection::vec(-3.0f64..3.0, d), n).prop_map(|rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, f)| {
                    let label = if i % 2 == 0 { Label::Real } else { Label::Fake };
                    LabeledSample::new(f, label)
                })
                .collect()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fast_dft_matches_definition(img in image()) {
        let (h, w) = (img.height(), img.width());
        let fast = dft2d(&img);
        for k in 0..h {
            for l in 0..w {
                let mut acc = Complex64::new(0.0, 0.0);
                for m in 0..h {
                    for n in 0..w {
                        let angle = -2.0 * PI * ((k * m) as f64 / h as f64 + (l * n) as f64 / w as f64);
                        acc += img.pixels()[m * w + n] * Complex64::from_polar(1.0, angle);
                    }
                }
                prop_assert!((fast.get(k, l) - acc).norm() <= 1e-9 * (1.0 + acc.norm()));
            }
        }
    }

    #[test]
    fn parseval(img in image()) {
        let n = (img.height() * img.width()) as f64;
        let spatial: f64 = img.pixels().iter().map(|v| v * v).sum();
        let spectral: f64 = dft2d(&img).coefficients().iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        prop_assert!((spatial - spectral).abs() <= 1e-9 * (1.0 + spatial));
    }

    #[test]
    fn profile_is_invariant_to_quarter_turns(img in image()) {
        let cfg = ExtractionConfig::default();
        let (Ok(a), Ok(b)) = (profile_of(&img, &cfg), profile_of(&rotate_quarter(&img), &cfg)) else {
            return Ok(());
        };
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.bins().iter().zip(b.bins()) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()), "{} vs {}", x, y);
        }
    }

    #[test]
    fn linear_profile_ignores_brightness_scale(img in image(), scale in 0.1f64..10.0) {
        let cfg = ExtractionConfig { log_power: false, epsilon: 1e-300, ..ExtractionConfig::default() };
        let scaled = GrayImage::new(
            img.height(),
            img.width(),
            img.pixels().iter().map(|v| v * scale).collect(),
        ).unwrap();
        let (Ok(a), Ok(b)) = (profile_of(&img, &cfg), profile_of(&scaled, &cfg)) else {
            return Ok(());
        };
        for (x, y) in a.bins().iter().zip(b.bins()) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn svm_optimum_ignores_sample_order(data in samples(), rotate in 1usize..5) {
        let cfg = SvmTrainConfig::default();
        let mut shuffled = data.clone();
        shuffled.rotate_left(rotate % data.len());
        let (Ok(a), Ok(b)) = (svm_fit(&data, &cfg), svm_fit(&shuffled, &cfg)) else {
            return Ok(());
        };
        let rel = (a.objective - b.objective).abs() / a.objective.abs().max(1e-12);
        prop_assert!(rel <= 1e-2, "{} vs {}", a.objective, b.objective);
    }

    #[test]
    fn lr_ignores_sample_order(data in samples(), rotate in 1usize..5) {
        let cfg = LogisticConfig { max_iters: 500, ..LogisticConfig::default() };
        let mut shuffled = data.clone();
        shuffled.rotate_left(rotate % data.len());
        let a = lr_train(&data, &cfg).unwrap();
        let b = lr_train(&shuffled, &cfg).unwrap();
        for (x, y) in a.weights().iter().zip(b.weights()) {
            prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
        }
        prop_assert!((a.bias() - b.bias()).abs() <= 1e-9 * (1.0 + a.bias().abs()));
    }

    #[test]
    fn kmeans_partition_ignores_uniform_scaling(data in samples(), scale in 0.01f64..100.0) {
        let points: Vec<Vec<f64>> = data.iter().map(|s| s.features.clone()).collect();
        let scaled: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(|v| v * scale).collect()).collect();
        let cfg = KMeansConfig::default();
        let a = kmeans_fit(&points, &cfg).unwrap();
        let b = kmeans_fit(&scaled, &cfg).unwrap();
        prop_assert_eq!(a.assignments, b.assignments);
        prop_assert!((a.objective * scale * scale - b.objective).abs() <= 1e-6 * (1.0 + b.objective));
    }
}

#[test]
fn stronger_low_pass_is_never_harder_to_detect() {
    let svm = [ClassifierSpec::Svm(SvmTrainConfig::default())];
    let mut accuracy = Vec::new();
    for cutoff in [0.2, 0.35, 0.5] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = SynthConfig {
            image_size: 64,
            count_per_class: 60,
            cutoff,
            ..SynthConfig::default()
        };
        let manifest = generate_synthetic(&cfg, dir.path()).unwrap();
        let (cache, _) = build_cache(&manifest, &ExtractionConfig::default(), 42, 4).unwrap();
        let sweep = sample_size_sweep(&cache, &[40], &svm, &SplitSpec::default(), 5).unwrap();
        accuracy.push(sweep.rows[0].mean_accuracy);
    }
    assert!(
        accuracy.windows(2).all(|w| w[0] >= w[1]),
        "accuracy at cutoffs 0.2, 0.35, 0.5: {accuracy:?}"
    );
}
