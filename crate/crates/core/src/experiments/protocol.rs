//! Sample-size sweeps and frequency-band grids.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classify::{evaluate, ClassifierSpec, Label};
use crate::dataset::{band_select, split_indices, FeatureCache, SplitSpec};
use crate::numfmt;
use crate::{Error, Result};

/// Splits `cache` with `split`, trains on one side and returns test accuracy.
pub fn train_and_score(
    cache: &FeatureCache,
    classifier: &ClassifierSpec,
    split: &SplitSpec,
) -> Result<f64> {
    let (train, test) = split_indices(&cache.labels(), &cache.groups(), split)?;
    score_split(cache, classifier, &train, &test, split.seed)
}

fn score_split(
    cache: &FeatureCache,
    classifier: &ClassifierSpec,
    train: &[usize],
    test: &[usize],
    seed: u64,
) -> Result<f64> {
    let model = classifier.train(&cache.subset(train).samples(), seed)?;
    Ok(evaluate(&model, &cache.subset(test).samples())?.accuracy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    /// Total rows drawn before the train/test split.
    pub size: usize,
    pub classifier: String,
    pub mean_accuracy: f64,
    pub min_accuracy: f64,
    pub max_accuracy: f64,
    pub repeats: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn get(&self, size: usize, classifier: &str) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.size == size && r.classifier == classifier)
    }

    /// `sweep.csv`: `size,classifier,mean_accuracy,min_accuracy,max_accuracy,repeats`.
    pub fn write_csv<W: Write>(&self, mut out: W, echo: &[String]) -> std::io::Result<()> {
        for line in echo {
            writeln!(out, "# {line}")?;
        }
        writeln!(
            out,
            "size,classifier,mean_accuracy,min_accuracy,max_accuracy,repeats"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.size,
                r.classifier,
                numfmt::real(r.mean_accuracy),
                numfmt::real(r.min_accuracy),
                numfmt::real(r.max_accuracy),
                r.repeats
            )?;
        }
        Ok(())
    }
}

/// Draws `size / 2` rows per class, sorted ascending.
pub fn balanced_subsample(labels: &[Label], size: usize, seed: u64) -> Result<Vec<usize>> {
    if size == 0 || !size.is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "sample size {size} cannot be split evenly between two classes"
        )));
    }
    let per_class = size / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut picked = Vec::with_capacity(size);
    for label in [Label::Fake, Label::Real] {
        let mut pool: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        if pool.len() < per_class {
            return Err(Error::Parameter(format!(
                "sample size {size} needs {per_class} {label} rows but the corpus has {}",
                pool.len()
            )));
        }
        pool.shuffle(&mut rng);
        picked.extend_from_slice(&pool[..per_class]);
    }
    picked.sort_unstable();
    Ok(picked)
}

/// Trains every classifier at every size, `repeats` times with seeds
/// `split.seed, split.seed + 1, ...`, and reports mean, min and max test
/// accuracy. Each repeat redraws the subsample and the split.
pub fn sample_size_sweep(
    cache: &FeatureCache,
    sizes: &[usize],
    classifiers: &[ClassifierSpec],
    split: &SplitSpec,
    repeats: usize,
) -> Result<SweepResult> {
    split.validate()?;
    if repeats == 0 {
        return Err(Error::Parameter("repeats must be at least 1".into()));
    }
    if sizes.is_empty() || classifiers.is_empty() {
        return Err(Error::Parameter(
            "need at least one size and one classifier".into(),
        ));
    }
    let labels = cache.labels();
    let mut subsamples = Vec::with_capacity(sizes.len() * repeats);
    for &size in sizes {
        for r in 0..repeats {
            let seed = split.seed.wrapping_add(r as u64);
            subsamples.push((size, seed, balanced_subsample(&labels, size, seed)?));
        }
    }

    let jobs: Vec<(usize, usize)> = (0..subsamples.len())
        .flat_map(|s| (0..classifiers.len()).map(move |c| (s, c)))
        .collect();
    let scores: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(s, c)| {
            let (_, seed, rows) = &subsamples[s];
            let sub = cache.subset(rows);
            let spec = SplitSpec {
                seed: *seed,
                ..split.clone()
            };
            train_and_score(&sub, &classifiers[c], &spec)
        })
        .collect();

    let mut rows = Vec::with_capacity(sizes.len() * classifiers.len());
    for (si, &size) in sizes.iter().enumerate() {
        for (ci, classifier) in classifiers.iter().enumerate() {
            let mut acc = Vec::with_capacity(repeats);
            for r in 0..repeats {
                let job = (si * repeats + r) * classifiers.len() + ci;
                acc.push(match &scores[job] {
                    Ok(a) => *a,
                    Err(e) => {
                        return Err(Error::Training(format!(
                            "{} at size {size}, repeat {r}: {e}",
                            classifier.name()
                        )))
                    }
                });
            }
            rows.push(SweepRow {
                size,
                classifier: classifier.name().to_string(),
                mean_accuracy: acc.iter().sum::<f64>() / repeats as f64,
                min_accuracy: acc.iter().copied().fold(f64::INFINITY, f64::min),
                max_accuracy: acc.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                repeats,
            });
        }
    }
    Ok(SweepResult { rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandCell {
    pub from: usize,
    pub to: usize,
    pub accuracy: f64,
}

/// Accuracies for every band `[from, to)` between two breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct BandGridResult {
    pub breakpoints: Vec<usize>,
    /// Ordered by `from`, then `to`.
    pub cells: Vec<BandCell>,
}

impl BandGridResult {
    pub fn accuracy(&self, from: usize, to: usize) -> Option<f64> {
        self.cells
            .iter()
            .find(|c| c.from == from && c.to == to)
            .map(|c| c.accuracy)
    }

    /// `bandgrid.csv`: `from,to,accuracy`.
    pub fn write_csv<W: Write>(&self, mut out: W, echo: &[String]) -> std::io::Result<()> {
        for line in echo {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "from,to,accuracy")?;
        for c in &self.cells {
            writeln!(out, "{},{},{}", c.from, c.to, numfmt::real(c.accuracy))?;
        }
        Ok(())
    }
}

/// `[0, 100, ..., 600, d]` for profiles longer than 600 bins. Shorter
/// profiles get the same grid scaled by `d / 722`, the profile length the
/// fixed grid was laid out for.
pub fn default_breakpoints(d: usize) -> Vec<usize> {
    const REFERENCE: [usize; 7] = [0, 100, 200, 300, 400, 500, 600];
    const REFERENCE_LENGTH: f64 = 722.0;
    let mut points: Vec<usize> = if d > 600 {
        REFERENCE.to_vec()
    } else {
        REFERENCE
            .iter()
            .map(|&b| (b as f64 * d as f64 / REFERENCE_LENGTH).round() as usize)
            .collect()
    };
    points.push(d);
    points.dedup();
    points
}

/// Trains and scores one classifier per band. The split is drawn once and
/// shared by every cell.
pub fn band_grid(
    cache: &FeatureCache,
    breakpoints: &[usize],
    classifier: &ClassifierSpec,
    split: &SplitSpec,
) -> Result<BandGridResult> {
    let d = cache.dimension();
    if breakpoints.len() < 2 {
        return Err(Error::Parameter("need at least two breakpoints".into()));
    }
    if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter(format!(
            "breakpoints {breakpoints:?} must be strictly increasing"
        )));
    }
    if breakpoints[breakpoints.len() - 1] > d {
        return Err(Error::Parameter(format!(
            "breakpoint {} exceeds the profile length {d}",
            breakpoints[breakpoints.len() - 1]
        )));
    }
    let (train, test) = split_indices(&cache.labels(), &cache.groups(), split)?;

    let bands: Vec<(usize, usize)> = breakpoints
        .iter()
        .enumerate()
        .flat_map(|(i, &from)| breakpoints[i + 1..].iter().map(move |&to| (from, to)))
        .collect();
    let scores: Vec<Result<f64>> = bands
        .par_iter()
        .map(|&(from, to)| {
            let band = band_select(cache, from, to)?;
            score_split(&band, classifier, &train, &test, split.seed)
        })
        .collect();

    let mut cells = Vec::with_capacity(bands.len());
    for ((from, to), score) in bands.into_iter().zip(scores) {
        cells.push(BandCell {
            from,
            to,
            accuracy: score?,
        });
    }
    Ok(BandGridResult {
        breakpoints: breakpoints.to_vec(),
        cells,
    })
}
