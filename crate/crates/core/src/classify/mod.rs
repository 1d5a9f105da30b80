//! Binary classifiers over spectral profiles.
//!
//! Label 0 is "fake" (GAN generated), label 1 is "real". Every decision
//! rule resolves exact ties toward [`Label::Real`].

mod kmeans;
mod logistic;
mod metrics;
mod model_io;
mod svm;

use std::fmt;

pub use kmeans::{
    kmeans_classifier, kmeans_fit, kmeans_objective, KMeansConfig, KMeansFit, KMeansModel,
};
pub use logistic::{
    log_likelihood, log_likelihood_gradient, lr_train, lr_train_traced, LogisticConfig,
    LogisticFit, LogisticModel, L2_PENALTY,
};
pub use metrics::{evaluate, Metrics};
pub use model_io::{load_model, read_model, save_model, write_model, ModelFile};
pub use svm::{
    dual_objective, rbf_kernel, svm_fit, svm_train, Gamma, SvmFit, SvmModel, SvmTrainConfig,
};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Fake = 0,
    Real = 1,
}

impl Label {
    pub fn from_u8(v: u8) -> Option<Label> {
        match v {
            0 => Some(Label::Fake),
            1 => Some(Label::Real),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Fake => "fake",
            Label::Real => "real",
        }
    }

    /// `-1` for fake, `+1` for real.
    pub fn sign(self) -> f64 {
        match self {
            Label::Fake => -1.0,
            Label::Real => 1.0,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub features: Vec<f64>,
    pub label: Label,
}

impl LabeledSample {
    pub fn new(features: Vec<f64>, label: Label) -> Self {
        LabeledSample { features, label }
    }
}

/// A trained binary decision rule.
pub trait Classifier {
    /// Feature dimension the model expects.
    fn dimension(&self) -> usize;

    /// Signed score; non-negative means [`Label::Real`].
    fn decision_value(&self, x: &[f64]) -> Result<f64>;

    fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(if self.decision_value(x)? >= 0.0 {
            Label::Real
        } else {
            Label::Fake
        })
    }
}

/// Any of the three trained models.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Logistic(LogisticModel),
    Svm(SvmModel),
    KMeans(KMeansModel),
}

impl Model {
    pub fn kind(&self) -> &'static str {
        match self {
            Model::Logistic(_) => "logistic",
            Model::Svm(_) => "svm",
            Model::KMeans(_) => "kmeans",
        }
    }
}

impl Classifier for Model {
    fn dimension(&self) -> usize {
        match self {
            Model::Logistic(m) => m.dimension(),
            Model::Svm(m) => m.dimension(),
            Model::KMeans(m) => m.dimension(),
        }
    }

    fn decision_value(&self, x: &[f64]) -> Result<f64> {
        match self {
            Model::Logistic(m) => m.decision_value(x),
            Model::Svm(m) => m.decision_value(x),
            Model::KMeans(m) => m.decision_value(x),
        }
    }

    fn predict(&self, x: &[f64]) -> Result<Label> {
        match self {
            Model::Logistic(m) => m.predict(x),
            Model::Svm(m) => m.predict(x),
            Model::KMeans(m) => m.predict(x),
        }
    }
}

/// Which classifier to train, with its hyper-parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ClassifierSpec {
    Logistic(LogisticConfig),
    Svm(SvmTrainConfig),
    KMeans(KMeansConfig),
}

impl ClassifierSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::Logistic(_) => "lr",
            ClassifierSpec::Svm(_) => "svm",
            ClassifierSpec::KMeans(_) => "kmeans",
        }
    }

    /// Trains on `samples`. `seed` overrides the seed stored in the config
    /// so protocol code can derive per-run seeds.
    pub fn train(&self, samples: &[LabeledSample], seed: u64) -> Result<Model> {
        match self {
            ClassifierSpec::Logistic(cfg) => Ok(Model::Logistic(lr_train(samples, cfg)?)),
            ClassifierSpec::Svm(cfg) => {
                let cfg = SvmTrainConfig {
                    seed,
                    ..cfg.clone()
                };
                Ok(Model::Svm(svm_train(samples, &cfg)?))
            }
            ClassifierSpec::KMeans(cfg) => {
                let cfg = KMeansConfig {
                    seed,
                    ..cfg.clone()
                };
                let points: Vec<Vec<f64>> = samples.iter().map(|s| s.features.clone()).collect();
                let fit = kmeans_fit(&points, &cfg)?;
                Ok(Model::KMeans(kmeans_classifier(fit.centroids, samples)?))
            }
        }
    }
}

/// Checks a training set: non-empty, one dimension, finite features.
/// Returns the dimension.
pub(crate) fn check_samples(samples: &[LabeledSample]) -> Result<usize> {
    let first = samples
        .first()
        .ok_or_else(|| Error::Training("no training samples".into()))?;
    let d = first.features.len();
    if d == 0 {
        return Err(Error::Dimension("samples have no features".into()));
    }
    for (i, s) in samples.iter().enumerate() {
        if s.features.len() != d {
            return Err(Error::Dimension(format!(
                "sample {i} has {} features, expected {d}",
                s.features.len()
            )));
        }
        if s.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Training(format!(
                "sample {i} has non-finite features"
            )));
        }
    }
    Ok(d)
}

/// Fails unless both labels occur.
pub(crate) fn require_both_classes(samples: &[LabeledSample]) -> Result<()> {
    let real = samples.iter().filter(|s| s.label == Label::Real).count();
    if real == 0 || real == samples.len() {
        return Err(Error::Training(
            "training data must contain both fake and real samples".into(),
        ));
    }
    Ok(())
}

pub(crate) fn check_dimension(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() != expected {
        return Err(Error::Dimension(format!(
            "model expects {expected} features, got {}",
            x.len()
        )));
    }
    Ok(())
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
