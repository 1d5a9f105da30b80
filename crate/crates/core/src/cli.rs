//! The `sfk` command line.
//!
//! Exit codes: 0 on success, 1 when the data or a computation fails, 2 on
//! usage errors (unknown or inconsistent flags, malformed values).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use crate::classify::{
    evaluate, load_model, save_model, Classifier, ClassifierSpec, Gamma, KMeansConfig,
    LabeledSample, LogisticConfig, SvmTrainConfig,
};
use crate::dataset::{
    band_select, load_cache, load_manifest, split_indices, write_cache, CacheHeader, FeatureCache,
    SplitSpec,
};
use crate::experiments::{
    band_grid, class_stats, default_breakpoints, generate_synthetic, sample_size_sweep,
    SynthConfig, VideoEvaluation, MANIFEST_NAME,
};
use crate::numfmt;
use crate::spectrum::{extract_file, write_profile_row, ExtractionConfig};
use crate::{Error, Result};

/// Spectral forensics kit: detect GAN-generated images from their 1D power spectrum.
#[derive(Parser, Debug)]
#[command(name = "sfk", version)]
struct Cli {
    /// Seed for every random choice (splits, subsampling, solvers, synthesis).
    #[arg(long, global = true, env = "SFK_SEED", default_value_t = 42)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic real/fake PNG corpus and its manifest.
    SynthGenerate(SynthArgs),
    /// Turn images into spectral profiles.
    Extract(ExtractArgs),
    /// Train a classifier on the training side of a cache split.
    Train(TrainArgs),
    /// Classify images with a trained model.
    Predict(PredictArgs),
    /// Score a model on the held-out side of a cache split.
    Evaluate(EvaluateArgs),
    /// Accuracy against training-set size.
    Sweep(SweepArgs),
    /// Accuracy of every frequency band between breakpoints.
    Bands(BandsArgs),
    /// Per-class mean and standard deviation of every profile bin.
    Stats(StatsArgs),
    /// Per-frame and per-video (majority vote) accuracy.
    VideoEval(VideoArgs),
}

#[derive(Args, Debug)]
struct SynthArgs {
    /// Output directory; receives the PNGs and manifest.csv.
    #[arg(long)]
    out: PathBuf,
    /// Images per class.
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
    count: u64,
    /// Image side length in pixels.
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u64).range(2..))]
    size: u64,
    /// Spectral exponent p of the real images (power ~ 1/f^p).
    #[arg(long, default_value_t = 1.8)]
    exponent: f64,
    /// Low-pass strength of the fake images, in (0, 1); larger is milder.
    #[arg(long, default_value_t = 0.35, value_parser = open_unit)]
    cutoff: f64,
    /// Frames per video group; 0 writes ungrouped images.
    #[arg(long, default_value_t = 0)]
    frames_per_group: usize,
}

#[derive(Args, Debug)]
struct ExtractionArgs {
    /// Resample profiles to this many bins; 0 keeps the native length.
    #[arg(long = "target-len", default_value_t = 0, value_parser = target_length)]
    target_len: usize,
    /// Average raw power instead of log power.
    #[arg(long = "no-log")]
    no_log: bool,
    /// Skip dividing the profile by its DC bin.
    #[arg(long = "no-norm")]
    no_norm: bool,
    /// Offset inside the logarithm and degeneracy threshold for the DC bin.
    #[arg(long, default_value_t = 1e-12, value_parser = positive)]
    epsilon: f64,
}

impl ExtractionArgs {
    fn config(&self) -> ExtractionConfig {
        ExtractionConfig {
            target_length: self.target_len,
            normalize_dc: !self.no_norm,
            log_power: !self.no_log,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("input").required(true))]
struct ExtractArgs {
    /// CSV manifest `path,label[,group]`; writes a feature cache.
    #[arg(long, group = "input")]
    manifest: Option<PathBuf>,
    /// A single image; writes `path,label,b0,...` (stdout without --out).
    #[arg(long, group = "input")]
    image: Option<PathBuf>,
    /// Output file. Required with --manifest.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    extraction: ExtractionArgs,
    /// Worker threads [default: available parallelism].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    jobs: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Lr,
    Svm,
    Kmeans,
}

#[derive(Args, Debug)]
struct ClassifierArgs {
    /// Classifier: lr, svm or kmeans. Sweeps accept a comma list
    /// [default: svm; sweep: lr,svm,kmeans].
    #[arg(long, value_enum, value_delimiter = ',')]
    classifier: Vec<Kind>,
    /// SVM box constraint [default: 1].
    #[arg(long, value_parser = positive)]
    c: Option<f64>,
    /// SVM RBF width, a positive number or `auto` for 1/d [default: auto].
    #[arg(long, value_parser = gamma)]
    gamma: Option<Gamma>,
    /// Logistic regression step size [default: 0.1].
    #[arg(long = "lr-rate", value_parser = positive)]
    lr_rate: Option<f64>,
    /// Iteration cap: lr gradient steps [default: 10000] or kmeans Lloyd steps [default: 300].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    iters: Option<u64>,
    /// Logistic regression gradient tolerance [default: 1e-6].
    #[arg(long, value_parser = positive)]
    tol: Option<f64>,
    /// Number of k-means clusters [default: 2].
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    k: Option<u64>,
    /// k-means restarts; the lowest objective wins [default: 10].
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    restarts: Option<u64>,
}

impl ClassifierArgs {
    fn specs(
        &self,
        default: &[Kind],
        single: bool,
    ) -> std::result::Result<Vec<ClassifierSpec>, String> {
        let mut kinds: Vec<Kind> = Vec::new();
        let requested = if self.classifier.is_empty() {
            default
        } else {
            &self.classifier
        };
        for &k in requested {
            if !kinds.contains(&k) {
                kinds.push(k);
            }
        }
        if single && kinds.len() > 1 {
            return Err("this command trains a single --classifier".into());
        }
        let needs = |flag: &str, set: bool, allowed: &[Kind]| {
            if set && !kinds.iter().any(|k| allowed.contains(k)) {
                let names: Vec<&str> = allowed.iter().map(|k| kind_name(*k)).collect();
                Err(format!(
                    "{flag} only applies to --classifier {}",
                    names.join(" or ")
                ))
            } else {
                Ok(())
            }
        };
        needs("--c", self.c.is_some(), &[Kind::Svm])?;
        needs("--gamma", self.gamma.is_some(), &[Kind::Svm])?;
        needs("--lr-rate", self.lr_rate.is_some(), &[Kind::Lr])?;
        needs("--tol", self.tol.is_some(), &[Kind::Lr])?;
        needs("--iters", self.iters.is_some(), &[Kind::Lr, Kind::Kmeans])?;
        needs("--k", self.k.is_some(), &[Kind::Kmeans])?;
        needs("--restarts", self.restarts.is_some(), &[Kind::Kmeans])?;

        Ok(kinds
            .into_iter()
            .map(|kind| match kind {
                Kind::Lr => {
                    let d = LogisticConfig::default();
                    ClassifierSpec::Logistic(LogisticConfig {
                        learning_rate: self.lr_rate.unwrap_or(d.learning_rate),
                        max_iters: self.iters.map_or(d.max_iters, |v| v as usize),
                        tol: self.tol.unwrap_or(d.tol),
                    })
                }
                Kind::Svm => {
                    let d = SvmTrainConfig::default();
                    ClassifierSpec::Svm(SvmTrainConfig {
                        c: self.c.unwrap_or(d.c),
                        gamma: self.gamma.unwrap_or(d.gamma),
                        ..d
                    })
                }
                Kind::Kmeans => {
                    let d = KMeansConfig::default();
                    ClassifierSpec::KMeans(KMeansConfig {
                        k: self.k.map_or(d.k, |v| v as usize),
                        max_iters: self.iters.map_or(d.max_iters, |v| v as usize),
                        restarts: self.restarts.map_or(d.restarts, |v| v as usize),
                        ..d
                    })
                }
            })
            .collect())
    }
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Lr => "lr",
        Kind::Svm => "svm",
        Kind::Kmeans => "kmeans",
    }
}

#[derive(Args, Debug)]
struct SplitArgs {
    /// Fraction of each class held out for testing.
    #[arg(long = "test-frac", default_value_t = 0.2, value_parser = open_unit)]
    test_frac: f64,
}

impl SplitArgs {
    fn spec(&self, seed: u64) -> SplitSpec {
        SplitSpec {
            test_fraction: self.test_frac,
            seed,
            ..SplitSpec::default()
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Feature cache written by `extract`.
    #[arg(long)]
    cache: PathBuf,
    /// Output model file.
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    classifier: ClassifierArgs,
    #[command(flatten)]
    split: SplitArgs,
    /// Train on bins [a, b) only.
    #[arg(long, value_parser = band)]
    band: Option<(usize, usize)>,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("input").required(true))]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    /// Image to classify.
    #[arg(long, group = "input")]
    image: Option<PathBuf>,
    /// Classify every image of a manifest instead.
    #[arg(long, group = "input")]
    manifest: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    /// Cache to score; the model's split is replayed on it.
    #[arg(long)]
    cache: PathBuf,
    /// Also write `actual,predicted,count` and precision/recall here.
    #[arg(long)]
    confusion: Option<PathBuf>,
    /// Score every row instead of the held-out side.
    #[arg(long)]
    all: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    cache: PathBuf,
    /// Output CSV `size,classifier,mean_accuracy,min_accuracy,max_accuracy,repeats`.
    #[arg(long)]
    out: PathBuf,
    /// Total samples per point, drawn half from each class before splitting.
    #[arg(long, value_delimiter = ',', default_value = "20,100,1000")]
    sizes: Vec<usize>,
    /// Reseeded runs averaged per point.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    repeats: u64,
    #[command(flatten)]
    classifier: ClassifierArgs,
    #[command(flatten)]
    split: SplitArgs,
    /// Use bins [a, b) only.
    #[arg(long, value_parser = band)]
    band: Option<(usize, usize)>,
}

#[derive(Args, Debug)]
struct BandsArgs {
    #[arg(long)]
    cache: PathBuf,
    /// Output CSV `from,to,accuracy`.
    #[arg(long)]
    out: PathBuf,
    /// Strictly increasing bin indices [default: 0,100,...,600,d, scaled to d when d <= 600].
    #[arg(long, value_delimiter = ',')]
    breakpoints: Vec<usize>,
    #[command(flatten)]
    classifier: ClassifierArgs,
    #[command(flatten)]
    split: SplitArgs,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long)]
    cache: PathBuf,
    /// Output CSV `bin,real_mean,real_std,fake_mean,fake_std`.
    #[arg(long)]
    out: PathBuf,
    /// Use bins [a, b) only.
    #[arg(long, value_parser = band)]
    band: Option<(usize, usize)>,
}

#[derive(Args, Debug)]
struct VideoArgs {
    #[arg(long)]
    model: PathBuf,
    /// Cache whose rows all carry a group id.
    #[arg(long)]
    cache: PathBuf,
    /// Output CSV `group,actual,predicted,frames,correct_frames`.
    #[arg(long)]
    out: PathBuf,
    /// Score every row instead of the held-out side.
    #[arg(long)]
    all: bool,
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

fn open_unit(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v < 1.0 => Ok(v),
        _ => Err(format!("`{s}` is not a number strictly between 0 and 1")),
    }
}

fn target_length(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(1) => Err("a profile needs at least 2 bins".into()),
        Ok(v) => Ok(v),
        Err(_) => Err(format!("`{s}` is not a non-negative integer")),
    }
}

fn gamma(s: &str) -> std::result::Result<Gamma, String> {
    if s == "auto" {
        Ok(Gamma::Auto)
    } else {
        positive(s).map(Gamma::Value)
    }
}

fn band(s: &str) -> std::result::Result<(usize, usize), String> {
    let parsed = s
        .split_once(':')
        .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)));
    match parsed {
        Some((a, b)) if a < b => Ok((a, b)),
        _ => Err(format!("`{s}` is not a band `a:b` with a < b")),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let e = Cli::command().error(ErrorKind::ArgumentConflict, msg);
            let _ = e.print();
            e.exit_code()
        }
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type Outcome = std::result::Result<(), Failure>;

fn dispatch(cli: Cli) -> Outcome {
    let seed = cli.seed;
    match cli.command {
        Command::SynthGenerate(a) => synth(a, seed),
        Command::Extract(a) => extract(a, seed),
        Command::Train(a) => train(a, seed),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Sweep(a) => sweep(a, seed),
        Command::Bands(a) => bands(a, seed),
        Command::Stats(a) => stats(a),
        Command::VideoEval(a) => video(a),
    }
}

fn synth(a: SynthArgs, seed: u64) -> Outcome {
    if !a.exponent.is_finite() {
        return Err(Failure::Usage("--exponent must be finite".into()));
    }
    let cfg = SynthConfig {
        image_size: a.size as usize,
        count_per_class: a.count as usize,
        seed,
        exponent: a.exponent,
        cutoff: a.cutoff,
        frames_per_group: a.frames_per_group,
    };
    let manifest = generate_synthetic(&cfg, &a.out)?;
    println!(
        "wrote {} images and {}",
        manifest.len(),
        a.out.join(MANIFEST_NAME).display()
    );
    Ok(())
}

fn extract(a: ExtractArgs, seed: u64) -> Outcome {
    let cfg = a.extraction.config();
    if let Some(image) = &a.image {
        let profile = extract_file(image, &cfg)?;
        let mut buf = Vec::new();
        write_profile_row(&mut buf, &image.to_string_lossy(), None, &profile)
            .expect("writing to memory");
        match &a.out {
            Some(out) => std::fs::write(out, buf).map_err(|e| Error::io(out, e))?,
            None => std::io::stdout()
                .write_all(&buf)
                .map_err(|e| Error::io("<stdout>", e))?,
        }
        return Ok(());
    }
    let manifest_path = a.manifest.as_ref().expect("input group is required");
    let out = a
        .out
        .as_ref()
        .ok_or_else(|| Failure::Usage("--out is required with --manifest".into()))?;
    let jobs = a.jobs.map_or_else(
        || std::thread::available_parallelism().map_or(1, |n| n.get()),
        |j| j as usize,
    );
    let manifest = load_manifest(manifest_path)?;
    let (cache, failures) = write_cache(&manifest, &cfg, out, seed, jobs)?;
    for f in &failures {
        eprintln!("warning: skipped {}: {}", f.path, f.reason);
    }
    println!(
        "extracted {} of {} images, d={}, into {}",
        cache.len(),
        manifest.len(),
        cache.dimension(),
        out.display()
    );
    Ok(())
}

/// What a model needs to replay its features and split.
struct Provenance {
    header: CacheHeader,
    split: SplitSpec,
    /// Native profile length of the cache the band was cut from.
    profile_length: Option<usize>,
}

impl Provenance {
    fn comments(&self) -> Vec<String> {
        let mut out = vec![
            format!("extraction {}", self.header.echo()),
            format!(
                "split test_frac={} seed={} stratified={} group_aware={}",
                numfmt::real(self.split.test_fraction),
                self.split.seed,
                self.split.stratified,
                self.split.group_aware
            ),
        ];
        if let Some(n) = self.profile_length {
            out.push(format!("profile_length {n}"));
        }
        out
    }

    fn parse(comments: &[String], origin: &Path) -> Result<Provenance> {
        let bad = |msg: String| Error::ModelIntegrity(format!("{}: {msg}", origin.display()));
        let find = |key: &str| {
            comments
                .iter()
                .find_map(|c| c.strip_prefix(key).map(str::trim))
                .ok_or_else(|| bad(format!("missing `# {key}` line")))
        };
        let header = CacheHeader::parse_echo(find("extraction ")?).map_err(bad)?;

        let mut split = SplitSpec::default();
        for field in find("split ")?.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| bad(format!("`{field}` is not key=value")))?;
            let parsed = match k {
                "test_frac" => v.parse().map(|x| split.test_fraction = x).is_ok(),
                "seed" => v.parse().map(|x| split.seed = x).is_ok(),
                "stratified" => v.parse().map(|x| split.stratified = x).is_ok(),
                "group_aware" => v.parse().map(|x| split.group_aware = x).is_ok(),
                _ => true,
            };
            if !parsed {
                return Err(bad(format!("bad value in `{field}`")));
            }
        }
        let profile_length = match comments
            .iter()
            .find_map(|c| c.strip_prefix("profile_length "))
        {
            Some(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| bad(format!("bad profile length `{v}`")))?,
            ),
            None => None,
        };
        Ok(Provenance {
            header,
            split,
            profile_length,
        })
    }

    /// Cuts `cache` down to the columns this model was trained on.
    fn align(&self, cache: &FeatureCache) -> Result<FeatureCache> {
        cache.expect_config(&self.header.config)?;
        let (a, b) = self.header.band;
        let (c0, c1) = cache.header.band;
        if a < c0 || b > c1 {
            return Err(Error::Validation(format!(
                "model uses bins {a}:{b} but the cache only holds {c0}:{c1}"
            )));
        }
        if (a, b) == (c0, c1) {
            Ok(cache.clone())
        } else {
            band_select(cache, a - c0, b - c0)
        }
    }
}

fn load_with_band(path: &Path, band: Option<(usize, usize)>) -> Result<FeatureCache> {
    let cache = load_cache(path)?;
    match band {
        Some((a, b)) => band_select(&cache, a, b),
        None => Ok(cache),
    }
}

fn native_length(cache: &FeatureCache) -> Option<usize> {
    let h = &cache.header;
    (h.config.target_length == 0 && h.band.0 == 0).then_some(h.band.1)
}

fn train(a: TrainArgs, seed: u64) -> Outcome {
    let spec = a
        .classifier
        .specs(&[Kind::Svm], true)
        .map_err(Failure::Usage)?
        .remove(0);
    let full = load_cache(&a.cache)?;
    let profile_length = native_length(&full);
    let cache = match a.band {
        Some((from, to)) => band_select(&full, from, to)?,
        None => full,
    };
    let split = a.split.spec(seed);
    let (train_rows, _) = split_indices(&cache.labels(), &cache.groups(), &split)?;
    let model = spec.train(&cache.subset(&train_rows).samples(), seed)?;
    let provenance = Provenance {
        header: cache.header.clone(),
        split,
        profile_length,
    };
    save_model(&a.model, &model, &provenance.comments())?;
    println!(
        "trained {} on {} of {} rows, d={}, into {}",
        spec.name(),
        train_rows.len(),
        cache.len(),
        cache.dimension(),
        a.model.display()
    );
    Ok(())
}

fn predict(a: PredictArgs) -> Outcome {
    let file = load_model(&a.model)?;
    let prov = Provenance::parse(&file.comments, &a.model)?;
    let images: Vec<(String, PathBuf)> = match (&a.image, &a.manifest) {
        (Some(image), _) => vec![(image.to_string_lossy().into_owned(), image.clone())],
        (None, Some(path)) => {
            let manifest = load_manifest(path)?;
            manifest
                .entries()
                .iter()
                .map(|e| (e.path.clone(), manifest.resolve(e)))
                .collect()
        }
        (None, None) => unreachable!("input group is required"),
    };
    let mut stdout = std::io::stdout().lock();
    for (shown, path) in images {
        let profile = extract_file(&path, &prov.header.config)?.into_vec();
        if let Some(n) = prov.profile_length {
            if profile.len() != n {
                return Err(Error::Dimension(format!(
                    "{shown} yields {} bins but the model was trained on {n}-bin profiles",
                    profile.len()
                ))
                .into());
            }
        }
        let (from, to) = prov.header.band;
        let features = profile.get(from..to).ok_or_else(|| {
            Error::Dimension(format!(
                "{shown} yields {} bins, too few for band {from}:{to}",
                profile.len()
            ))
        })?;
        let value = file.model.decision_value(features)?;
        let label = file.model.predict(features)?;
        writeln!(stdout, "{shown} {label} {}", numfmt::real(value))
            .map_err(|e| Error::io("<stdout>", e))?;
    }
    Ok(())
}

/// Rows a saved model should be scored on: the replayed held-out side, or
/// everything with `all`.
fn scoring_rows(
    file_model: &Path,
    comments: &[String],
    cache_path: &Path,
    all: bool,
) -> Result<FeatureCache> {
    let prov = Provenance::parse(comments, file_model)?;
    let cache = prov.align(&load_cache(cache_path)?)?;
    if all {
        return Ok(cache);
    }
    let (_, test) = split_indices(&cache.labels(), &cache.groups(), &prov.split)?;
    Ok(cache.subset(&test))
}

fn evaluate_cmd(a: EvaluateArgs) -> Outcome {
    let file = load_model(&a.model)?;
    let rows = scoring_rows(&a.model, &file.comments, &a.cache, a.all)?;
    let samples: Vec<LabeledSample> = rows.samples();
    let metrics = evaluate(&file.model, &samples)?;
    if let Some(path) = &a.confusion {
        write_file(path, |w| metrics.write_confusion_csv(w))?;
    }
    println!("accuracy={}", numfmt::real(metrics.accuracy));
    Ok(())
}

fn classifier_echo(spec: &ClassifierSpec) -> String {
    match spec {
        ClassifierSpec::Logistic(c) => format!(
            "lr lr_rate={} iters={} tol={}",
            numfmt::real(c.learning_rate),
            c.max_iters,
            numfmt::real(c.tol)
        ),
        ClassifierSpec::Svm(c) => format!(
            "svm c={} gamma={} kkt_tolerance={} max_passes={}",
            numfmt::real(c.c),
            match c.gamma {
                Gamma::Auto => "auto".to_string(),
                Gamma::Value(g) => numfmt::real(g),
            },
            numfmt::real(c.kkt_tolerance),
            c.max_passes
        ),
        ClassifierSpec::KMeans(c) => format!(
            "kmeans k={} iters={} restarts={}",
            c.k, c.max_iters, c.restarts
        ),
    }
}

fn split_echo(split: &SplitSpec) -> String {
    format!(
        "split test_frac={} seed={}",
        numfmt::real(split.test_fraction),
        split.seed
    )
}

fn sweep(a: SweepArgs, seed: u64) -> Outcome {
    let specs = a
        .classifier
        .specs(&[Kind::Lr, Kind::Svm, Kind::Kmeans], false)
        .map_err(Failure::Usage)?;
    let cache = load_with_band(&a.cache, a.band)?;
    let split = a.split.spec(seed);
    let result = sample_size_sweep(&cache, &a.sizes, &specs, &split, a.repeats as usize)?;
    let mut echo = vec![cache.header.echo(), split_echo(&split)];
    echo.extend(specs.iter().map(classifier_echo));
    write_file(&a.out, |w| result.write_csv(w, &echo))?;
    for r in &result.rows {
        println!(
            "size={} classifier={} accuracy={}",
            r.size,
            r.classifier,
            numfmt::real(r.mean_accuracy)
        );
    }
    Ok(())
}

fn bands(a: BandsArgs, seed: u64) -> Outcome {
    let spec = a
        .classifier
        .specs(&[Kind::Svm], true)
        .map_err(Failure::Usage)?
        .remove(0);
    let cache = load_cache(&a.cache)?;
    let breakpoints = if a.breakpoints.is_empty() {
        default_breakpoints(cache.dimension())
    } else {
        a.breakpoints.clone()
    };
    let split = a.split.spec(seed);
    let grid = band_grid(&cache, &breakpoints, &spec, &split)?;
    let echo = vec![
        cache.header.echo(),
        split_echo(&split),
        classifier_echo(&spec),
        format!(
            "breakpoints {}",
            breakpoints
                .iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join(",")
        ),
    ];
    write_file(&a.out, |w| grid.write_csv(w, &echo))?;
    println!(
        "wrote {} band cells to {}",
        grid.cells.len(),
        a.out.display()
    );
    Ok(())
}

fn stats(a: StatsArgs) -> Outcome {
    let cache = load_with_band(&a.cache, a.band)?;
    let stats = class_stats(&cache)?;
    write_file(&a.out, |w| stats.write_csv(w, &[cache.header.echo()]))?;
    println!(
        "wrote {} bins for {} real and {} fake rows to {}",
        cache.dimension(),
        stats.counts[1],
        stats.counts[0],
        a.out.display()
    );
    Ok(())
}

fn video(a: VideoArgs) -> Outcome {
    let file = load_model(&a.model)?;
    let rows = scoring_rows(&a.model, &file.comments, &a.cache, a.all)?;
    let eval = VideoEvaluation::of_model(&file.model, &rows)?;
    let echo = vec![rows.header.echo(), format!("model {}", file.model.kind())];
    write_file(&a.out, |w| eval.write_csv(w, &echo))?;
    println!(
        "frame_accuracy={} video_accuracy={}",
        numfmt::real(eval.frame_accuracy),
        numfmt::real(eval.video_accuracy)
    );
    Ok(())
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| Error::io(path, e))
}
