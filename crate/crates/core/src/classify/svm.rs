//! Soft-margin RBF support vector machine trained with SMO.
//!
//! The dual problem is
//!
//! `max sum a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)`
//! subject to `0 <= a_i <= C` and `sum a_i y_i = 0`,
//!
//! solved two multipliers at a time. The first multiplier of a pair is any
//! point violating its KKT condition; the second is drawn at random from a
//! seeded generator, falling back to a scan from a random offset when the
//! random partner makes no progress.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    check_dimension, check_samples, require_both_classes, squared_distance, Classifier,
    LabeledSample,
};
use crate::{Error, Result};

/// RBF width; `Auto` resolves to `1 / d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    Auto,
    Value(f64),
}

impl Gamma {
    pub fn resolve(self, dimension: usize) -> f64 {
        match self {
            Gamma::Auto => 1.0 / dimension as f64,
            Gamma::Value(g) => g,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmTrainConfig {
    pub c: f64,
    pub gamma: Gamma,
    pub kkt_tolerance: f64,
    /// Consecutive sweeps without any multiplier change tolerated while
    /// violators remain.
    pub max_passes: usize,
    /// Hard cap on full sweeps over the training set.
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for SvmTrainConfig {
    fn default() -> Self {
        SvmTrainConfig {
            c: 1.0,
            gamma: Gamma::Auto,
            kkt_tolerance: 1e-3,
            max_passes: 10,
            max_sweeps: 100_000,
            seed: 42,
        }
    }
}

pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * squared_distance(a, b)).exp()
}

/// Trained model: only the points with a non-zero multiplier are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    support_vectors: Vec<Vec<f64>>,
    /// `a_i y_i` per support vector.
    dual_coeffs: Vec<f64>,
    bias: f64,
    gamma: f64,
}

impl SvmModel {
    pub fn new(
        support_vectors: Vec<Vec<f64>>,
        dual_coeffs: Vec<f64>,
        bias: f64,
        gamma: f64,
    ) -> Result<Self> {
        if support_vectors.is_empty() {
            return Err(Error::ModelIntegrity("SVM has no support vectors".into()));
        }
        if support_vectors.len() != dual_coeffs.len() {
            return Err(Error::ModelIntegrity(format!(
                "{} support vectors but {} coefficients",
                support_vectors.len(),
                dual_coeffs.len()
            )));
        }
        let d = support_vectors[0].len();
        if d == 0 || support_vectors.iter().any(|v| v.len() != d) {
            return Err(Error::ModelIntegrity(
                "support vectors have inconsistent dimension".into(),
            ));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::ModelIntegrity(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        if !bias.is_finite()
            || dual_coeffs.iter().any(|c| !c.is_finite() || *c == 0.0)
            || support_vectors.iter().flatten().any(|v| !v.is_finite())
        {
            return Err(Error::ModelIntegrity(
                "SVM parameters must be finite with non-zero coefficients".into(),
            ));
        }
        Ok(SvmModel {
            support_vectors,
            dual_coeffs,
            bias,
            gamma,
        })
    }

    pub fn support_vectors(&self) -> &[Vec<f64>] {
        &self.support_vectors
    }

    pub fn dual_coeffs(&self) -> &[f64] {
        &self.dual_coeffs
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl Classifier for SvmModel {
    fn dimension(&self) -> usize {
        self.support_vectors[0].len()
    }

    fn decision_value(&self, x: &[f64]) -> Result<f64> {
        check_dimension(self.dimension(), x)?;
        let sum: f64 = self
            .support_vectors
            .iter()
            .zip(&self.dual_coeffs)
            .map(|(sv, coef)| coef * rbf_kernel(sv, x, self.gamma))
            .sum();
        Ok(sum + self.bias)
    }
}

/// Full solver state at exit, for diagnostics and tests.
#[derive(Debug, Clone)]
pub struct SvmFit {
    pub model: SvmModel,
    /// Multiplier of every training point, in input order.
    pub alphas: Vec<f64>,
    /// Training labels as `-1` / `+1`.
    pub targets: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    pub sweeps: usize,
    /// Largest KKT residual over the training set at exit.
    pub max_kkt_residual: f64,
    pub objective: f64,
}

pub fn svm_train(samples: &[LabeledSample], cfg: &SvmTrainConfig) -> Result<SvmModel> {
    Ok(svm_fit(samples, cfg)?.model)
}

pub fn svm_fit(samples: &[LabeledSample], cfg: &SvmTrainConfig) -> Result<SvmFit> {
    let d = check_samples(samples)?;
    require_both_classes(samples)?;
    if !(cfg.c > 0.0 && cfg.c.is_finite()) {
        return Err(Error::Parameter(format!(
            "C must be positive, got {}",
            cfg.c
        )));
    }
    let gamma = cfg.gamma.resolve(d);
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Parameter(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    if !(cfg.kkt_tolerance > 0.0) {
        return Err(Error::Parameter("KKT tolerance must be positive".into()));
    }

    let mut smo = Smo::new(samples, cfg.c, gamma, cfg.kkt_tolerance);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sweeps = smo.solve(&mut rng, cfg.max_passes, cfg.max_sweeps);

    let max_kkt_residual = smo.max_residual();
    if max_kkt_residual > cfg.kkt_tolerance {
        return Err(Error::Training(format!(
            "SMO stopped after {sweeps} sweeps with KKT residual {max_kkt_residual:.3e} above {:.1e}",
            cfg.kkt_tolerance
        )));
    }

    let mut support_vectors = Vec::new();
    let mut dual_coeffs = Vec::new();
    for (i, &a) in smo.alpha.iter().enumerate() {
        if a > 0.0 {
            support_vectors.push(samples[i].features.clone());
            dual_coeffs.push(a * smo.y[i]);
        }
    }
    let objective = dual_objective(&smo.alpha, &smo.y, &smo.kernel);
    Ok(SvmFit {
        model: SvmModel::new(support_vectors, dual_coeffs, smo.b, gamma)?,
        alphas: smo.alpha,
        targets: smo.y,
        bias: smo.b,
        gamma,
        sweeps,
        max_kkt_residual,
        objective,
    })
}

/// Dual objective for multipliers `alpha`, targets `y` and a dense row-major
/// kernel matrix.
pub fn dual_objective(alpha: &[f64], y: &[f64], kernel: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        let row = &kernel[i * n..(i + 1) * n];
        let inner: f64 = (0..n).map(|j| alpha[j] * y[j] * row[j]).sum();
        quad += alpha[i] * y[i] * inner;
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

struct Smo {
    n: usize,
    c: f64,
    tol: f64,
    y: Vec<f64>,
    kernel: Vec<f64>,
    alpha: Vec<f64>,
    b: f64,
    /// `f(x_i) - y_i` for the current multipliers and bias.
    errors: Vec<f64>,
}

impl Smo {
    fn new(samples: &[LabeledSample], c: f64, gamma: f64, tol: f64) -> Self {
        let n = samples.len();
        let mut kernel = vec![0.0; n * n];
        for i in 0..n {
            kernel[i * n + i] = 1.0;
            for j in 0..i {
                let k = rbf_kernel(&samples[i].features, &samples[j].features, gamma);
                kernel[i * n + j] = k;
                kernel[j * n + i] = k;
            }
        }
        let y: Vec<f64> = samples.iter().map(|s| s.label.sign()).collect();
        let errors = y.iter().map(|v| -v).collect();
        Smo {
            n,
            c,
            tol,
            y,
            kernel,
            alpha: vec![0.0; n],
            b: 0.0,
            errors,
        }
    }

    fn k(&self, i: usize, j: usize) -> f64 {
        self.kernel[i * self.n + j]
    }

    /// `sum_k a_k y_k K(x_k, x_i)`, without the bias.
    fn margin_without_bias(&self, i: usize) -> f64 {
        let row = &self.kernel[i * self.n..(i + 1) * self.n];
        self.alpha
            .iter()
            .zip(&self.y)
            .zip(row)
            .filter(|((a, _), _)| **a != 0.0)
            .map(|((a, y), k)| a * y * k)
            .sum()
    }

    fn refresh_errors(&mut self) {
        for i in 0..self.n {
            self.errors[i] = self.margin_without_bias(i) + self.b - self.y[i];
        }
    }

    fn residual(&self, i: usize) -> f64 {
        // y f - 1 == y E for y in {-1, +1}
        let r = self.y[i] * self.errors[i];
        let a = self.alpha[i];
        if a <= 0.0 {
            (-r).max(0.0)
        } else if a >= self.c {
            r.max(0.0)
        } else {
            r.abs()
        }
    }

    fn violates(&self, i: usize) -> bool {
        self.residual(i) > self.tol
    }

    fn max_residual(&self) -> f64 {
        (0..self.n).map(|i| self.residual(i)).fold(0.0, f64::max)
    }

    fn solve(&mut self, rng: &mut ChaCha8Rng, max_passes: usize, max_sweeps: usize) -> usize {
        let mut idle_passes = 0;
        let mut sweeps = 0;
        while sweeps < max_sweeps {
            sweeps += 1;
            self.refresh_errors();
            let mut changed = 0;
            for i in 0..self.n {
                if !self.violates(i) {
                    continue;
                }
                if self.pair_with_partner(i, rng) {
                    changed += 1;
                }
            }
            self.refresh_errors();
            if changed == 0 {
                // Multipliers are stuck; the remaining violation can only be
                // in the threshold, which pair steps never revisit.
                self.refit_bias();
                if self.max_residual() <= self.tol {
                    break;
                }
                idle_passes += 1;
                if idle_passes >= max_passes {
                    break;
                }
            } else {
                idle_passes = 0;
            }
        }
        self.refresh_errors();
        if self.max_residual() > self.tol {
            self.refit_bias();
        }
        sweeps
    }

    fn pair_with_partner(&mut self, i: usize, rng: &mut ChaCha8Rng) -> bool {
        let mut j = rng.gen_range(0..self.n - 1);
        if j >= i {
            j += 1;
        }
        if self.take_step(i, j) {
            return true;
        }
        let start = rng.gen_range(0..self.n);
        for offset in 0..self.n {
            let j = (start + offset) % self.n;
            if j != i && self.take_step(i, j) {
                return true;
            }
        }
        false
    }

    fn take_step(&mut self, i: usize, j: usize) -> bool {
        let (yi, yj) = (self.y[i], self.y[j]);
        let (ai, aj) = (self.alpha[i], self.alpha[j]);
        let (ei, ej) = (self.errors[i], self.errors[j]);
        let c = self.c;
        let s = yi * yj;

        let (lo, hi) = if s < 0.0 {
            ((aj - ai).max(0.0), (c + aj - ai).min(c))
        } else {
            ((ai + aj - c).max(0.0), (ai + aj).min(c))
        };
        if hi - lo < 1e-12 * c {
            return false;
        }

        let (kii, kjj, kij) = (self.k(i, i), self.k(j, j), self.k(i, j));
        let eta = kii + kjj - 2.0 * kij;
        let mut aj_new = if eta > 1e-12 {
            (aj + yj * (ei - ej) / eta).clamp(lo, hi)
        } else {
            // Flat direction: take whichever end of the segment is better.
            let f1 = yi * (ei - self.b) - ai * kii - s * aj * kij;
            let f2 = yj * (ej - self.b) - s * ai * kij - aj * kjj;
            let objective_at = |a: f64| {
                let a1 = ai + s * (aj - a);
                -(a1 * f1 + a * f2 + 0.5 * a1 * a1 * kii + 0.5 * a * a * kjj + s * a * a1 * kij)
            };
            let (at_lo, at_hi) = (objective_at(lo), objective_at(hi));
            if at_lo > at_hi + 1e-12 {
                lo
            } else if at_hi > at_lo + 1e-12 {
                hi
            } else {
                aj
            }
        };
        if aj_new < 1e-12 * c {
            aj_new = 0.0;
        } else if aj_new > c * (1.0 - 1e-12) {
            aj_new = c;
        }
        if (aj_new - aj).abs() < 1e-12 * (aj_new + aj + 1e-12) {
            return false;
        }
        let mut ai_new = ai + s * (aj - aj_new);
        if ai_new < 1e-12 * c {
            ai_new = 0.0;
        } else if ai_new > c * (1.0 - 1e-12) {
            ai_new = c;
        }

        let (di, dj) = (yi * (ai_new - ai), yj * (aj_new - aj));
        let bi = self.b - ei - di * kii - dj * kij;
        let bj = self.b - ej - di * kij - dj * kjj;
        let b_new = if ai_new > 0.0 && ai_new < c {
            bi
        } else if aj_new > 0.0 && aj_new < c {
            bj
        } else {
            0.5 * (bi + bj)
        };
        let db = b_new - self.b;

        self.alpha[i] = ai_new;
        self.alpha[j] = aj_new;
        self.b = b_new;
        for k in 0..self.n {
            self.errors[k] +=
                di * self.kernel[i * self.n + k] + dj * self.kernel[j * self.n + k] + db;
        }
        true
    }

    /// Re-derives the threshold from the current multipliers: the mean over
    /// free support vectors, or the midpoint of the feasible interval when
    /// every multiplier sits at a bound.
    fn refit_bias(&mut self) {
        let mut free_sum = 0.0;
        let mut free_count = 0usize;
        let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..self.n {
            let g = self.margin_without_bias(i);
            let target = self.y[i] - g;
            let a = self.alpha[i];
            if a > 0.0 && a < self.c {
                free_sum += target;
                free_count += 1;
            } else {
                // at a = 0 we need y f >= 1, at a = C we need y f <= 1
                let needs_above = (a <= 0.0) == (self.y[i] > 0.0);
                if needs_above {
                    lower = lower.max(target);
                } else {
                    upper = upper.min(target);
                }
            }
        }
        self.b = if free_count > 0 {
            free_sum / free_count as f64
        } else if lower.is_finite() && upper.is_finite() {
            0.5 * (lower + upper)
        } else if lower.is_finite() {
            lower
        } else if upper.is_finite() {
            upper
        } else {
            self.b
        };
        self.refresh_errors();
    }
}
