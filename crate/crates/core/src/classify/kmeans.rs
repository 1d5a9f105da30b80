//! k-means clustering (Lloyd iterations, k-means++ seeding) and the
//! cluster-to-label mapping that turns it into a classifier.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_dimension, squared_distance, Classifier, Label, LabeledSample};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iters: usize,
    /// Independent seedings; the run with the lowest objective wins.
    pub restarts: usize,
    pub seed: u64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            k: 2,
            max_iters: 300,
            restarts: 10,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub centroids: Vec<Vec<f64>>,
    pub assignments: Vec<usize>,
    /// Sum of squared distances to the assigned centroid.
    pub objective: f64,
    /// Objective after every assignment step of the winning run.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

/// `J = sum_i |x_i - mu_{c(i)}|^2`.
pub fn kmeans_objective(points: &[Vec<f64>], centroids: &[Vec<f64>], assignments: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &c)| squared_distance(p, &centroids[c]))
        .sum()
}

pub fn kmeans_fit(points: &[Vec<f64>], cfg: &KMeansConfig) -> Result<KMeansFit> {
    if cfg.k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    if cfg.restarts == 0 {
        return Err(Error::Parameter("restarts must be at least 1".into()));
    }
    let d = points
        .first()
        .map(|p| p.len())
        .ok_or_else(|| Error::Training("no points to cluster".into()))?;
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::Dimension(
            "points have inconsistent dimension".into(),
        ));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Training("points must be finite".into()));
    }
    let distinct = count_distinct(points);
    if cfg.k > distinct {
        return Err(Error::Parameter(format!(
            "k = {} exceeds the {distinct} distinct points",
            cfg.k
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<KMeansFit> = None;
    for _ in 0..cfg.restarts {
        let run = lloyd(
            points,
            seed_plus_plus(points, cfg.k, &mut rng),
            cfg.max_iters,
        );
        if best.as_ref().is_none_or(|b| run.objective < b.objective) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn count_distinct(points: &[Vec<f64>]) -> usize {
    let mut keys: Vec<Vec<u64>> = points
        .iter()
        .map(|p| p.iter().map(|v| (v + 0.0).to_bits()).collect())
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

/// k-means++: first centre uniform, later centres drawn with probability
/// proportional to the squared distance to the nearest chosen centre.
fn seed_plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut centroids = vec![points[rng.gen_range(0..points.len())].clone()];
    let mut nearest: Vec<f64> = points
        .iter()
        .map(|p| squared_distance(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        // k <= distinct points guarantees some weight is positive
        let pick = WeightedIndex::new(&nearest)
            .map(|w| w.sample(rng))
            .unwrap_or_else(|_| nearest.iter().position(|&v| v > 0.0).unwrap_or(0));
        let c = points[pick].clone();
        for (n, p) in nearest.iter_mut().zip(points) {
            *n = n.min(squared_distance(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, max_iters: usize) -> KMeansFit {
    let k = centroids.len();
    let d = points[0].len();
    let mut assignments = vec![0usize; points.len()];
    assign(points, &centroids, &mut assignments);
    repair_empty(points, &mut centroids, &mut assignments);
    let mut objective = kmeans_objective(points, &centroids, &assignments);
    let mut trace = vec![objective];
    let mut iterations = 0;

    while iterations < max_iters {
        iterations += 1;
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignments) {
            counts[c] += 1;
            for (s, v) in sums[c].iter_mut().zip(p) {
                *s += v;
            }
        }
        for ((centroid, sum), &count) in centroids.iter_mut().zip(sums).zip(&counts) {
            if count > 0 {
                *centroid = sum.into_iter().map(|s| s / count as f64).collect();
            }
        }

        let previous = assignments.clone();
        assign(points, &centroids, &mut assignments);
        repair_empty(points, &mut centroids, &mut assignments);
        let next = kmeans_objective(points, &centroids, &assignments);
        debug_assert!(
            next <= objective + 1e-9 * objective.abs().max(1.0),
            "k-means objective increased from {objective} to {next}"
        );
        objective = next;
        trace.push(objective);
        if assignments == previous {
            break;
        }
    }

    KMeansFit {
        centroids,
        assignments,
        objective,
        objective_trace: trace,
        iterations,
    }
}

fn nearest_centroid(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let dist = squared_distance(p, c);
        if dist < best.1 {
            best = (i, dist);
        }
    }
    best
}

fn assign(points: &[Vec<f64>], centroids: &[Vec<f64>], assignments: &mut [usize]) {
    for (a, p) in assignments.iter_mut().zip(points) {
        *a = nearest_centroid(p, centroids).0;
    }
}

/// Moves each empty cluster's centroid onto the point farthest from its own
/// centroid, taken from a cluster that can spare it.
fn repair_empty(points: &[Vec<f64>], centroids: &mut [Vec<f64>], assignments: &mut [usize]) {
    let k = centroids.len();
    loop {
        let mut counts = vec![0usize; k];
        for &a in assignments.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let donor = (0..points.len())
            .filter(|&i| counts[assignments[i]] > 1)
            .max_by(|&a, &b| {
                let da = squared_distance(&points[a], &centroids[assignments[a]]);
                let db = squared_distance(&points[b], &centroids[assignments[b]]);
                da.total_cmp(&db).then(b.cmp(&a))
            });
        let Some(donor) = donor else {
            return;
        };
        centroids[empty] = points[donor].clone();
        assignments[donor] = empty;
    }
}

/// Centroids plus the label each cluster votes for.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansModel {
    centroids: Vec<Vec<f64>>,
    cluster_to_label: Vec<Label>,
}

impl KMeansModel {
    pub fn new(centroids: Vec<Vec<f64>>, cluster_to_label: Vec<Label>) -> Result<Self> {
        if centroids.len() < 2 {
            return Err(Error::ModelIntegrity(format!(
                "k-means model needs at least 2 centroids, got {}",
                centroids.len()
            )));
        }
        if centroids.len() != cluster_to_label.len() {
            return Err(Error::ModelIntegrity(
                "every cluster needs exactly one label".into(),
            ));
        }
        let d = centroids[0].len();
        if d == 0 || centroids.iter().any(|c| c.len() != d) {
            return Err(Error::ModelIntegrity(
                "centroids have inconsistent dimension".into(),
            ));
        }
        if centroids.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::ModelIntegrity("centroids must be finite".into()));
        }
        for i in 0..centroids.len() {
            for j in 0..i {
                if centroids[i] == centroids[j] {
                    return Err(Error::ModelIntegrity(format!(
                        "centroids {j} and {i} coincide"
                    )));
                }
            }
        }
        Ok(KMeansModel {
            centroids,
            cluster_to_label,
        })
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    pub fn cluster_to_label(&self) -> &[Label] {
        &self.cluster_to_label
    }

    pub fn nearest_cluster(&self, x: &[f64]) -> Result<usize> {
        check_dimension(self.dimension(), x)?;
        Ok(nearest_centroid(x, &self.centroids).0)
    }
}

impl Classifier for KMeansModel {
    fn dimension(&self) -> usize {
        self.centroids[0].len()
    }

    /// Distance to the nearest fake cluster minus distance to the nearest
    /// real cluster (squared). Infinite when one label owns no cluster.
    fn decision_value(&self, x: &[f64]) -> Result<f64> {
        check_dimension(self.dimension(), x)?;
        let mut nearest = [f64::INFINITY; 2];
        for (c, label) in self.centroids.iter().zip(&self.cluster_to_label) {
            let slot = &mut nearest[label.index()];
            *slot = slot.min(squared_distance(x, c));
        }
        let [fake, real] = nearest;
        Ok(match (fake.is_finite(), real.is_finite()) {
            (true, true) => fake - real,
            (false, _) => f64::INFINITY,
            (_, false) => f64::NEG_INFINITY,
        })
    }

    fn predict(&self, x: &[f64]) -> Result<Label> {
        Ok(self.cluster_to_label[self.nearest_cluster(x)?])
    }
}

/// Labels each cluster by majority vote of the labelled samples nearest to
/// it. Ties go to real; clusters that receive no samples take the global
/// majority.
pub fn kmeans_classifier(
    centroids: Vec<Vec<f64>>,
    samples: &[LabeledSample],
) -> Result<KMeansModel> {
    if samples.is_empty() {
        return Err(Error::Training(
            "no labelled samples to map clusters".into(),
        ));
    }
    let k = centroids.len();
    let d = centroids.first().map_or(0, |c| c.len());
    let mut votes = vec![[0usize; 2]; k];
    let mut global = [0usize; 2];
    for s in samples {
        check_dimension(d, &s.features)?;
        let (c, _) = nearest_centroid(&s.features, &centroids);
        votes[c][s.label.index()] += 1;
        global[s.label.index()] += 1;
    }
    let majority = |v: [usize; 2]| {
        if v[1] >= v[0] {
            Label::Real
        } else {
            Label::Fake
        }
    };
    let fallback = majority(global);
    let labels = votes
        .into_iter()
        .map(|v| if v == [0, 0] { fallback } else { majority(v) })
        .collect();
    KMeansModel::new(centroids, labels)
}
