//! Classifiers, stratified k-fold cross-validation and repeated-run
//! accuracy reports.
//!
//! Every fold fits a min-max [`Scaler`] on its training rows only, restricted
//! to the evaluated feature subset, and trains the classifier on the scaled
//! training rows. Accuracy is reported in percent.

use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{scale_value, Dataset, Scaler};
use crate::stats::{summary_stats, StatsError};

/// Seed used when the caller does not pick one.
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("feature subset is empty")]
    EmptySubset,
    #[error("feature index {index} out of range for {n_features} features")]
    FeatureOutOfRange { index: usize, n_features: usize },
    #[error("feature {0} appears twice in the subset")]
    DuplicateFeature(usize),
    #[error("class `{class}` has {count} samples, fewer than the {folds} folds requested")]
    ClassTooSmall { class: String, count: usize, folds: usize },
    #[error("k-NN with k={k} needs at least k training rows, got {train}")]
    KTooLarge { k: usize, train: usize },
    #[error("fold assignment covers {got} samples, dataset has {expected}")]
    FoldMismatch { got: usize, expected: usize },
    #[error("fold {0} has no test rows")]
    EmptyFold(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Derives the seed of repetition (or fold) `index` from a master seed.
///
/// SplitMix64: the master seed is advanced by `index + 1` golden-ratio
/// increments and passed through the SplitMix64 finaliser.
pub fn split_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassifierKind {
    Knn,
    LinearSvm,
}

impl FromStr for ClassifierKind {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "knn" => Ok(ClassifierKind::Knn),
            "linear-svm" | "linear_svm" | "svm" => Ok(ClassifierKind::LinearSvm),
            other => Err(EvalError::InvalidConfig(format!("unknown classifier `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    pub knn_k: usize,
    pub svm_lambda: f64,
    pub svm_epochs: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig { kind: ClassifierKind::Knn, knn_k: 5, svm_lambda: 1e-3, svm_epochs: 50 }
    }
}

impl ClassifierConfig {
    pub fn knn(k: usize) -> Self {
        ClassifierConfig { knn_k: k, ..Default::default() }
    }

    pub fn linear_svm() -> Self {
        ClassifierConfig { kind: ClassifierKind::LinearSvm, ..Default::default() }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        match self.kind {
            ClassifierKind::Knn if self.knn_k == 0 || self.knn_k.is_multiple_of(2) => Err(EvalError::InvalidConfig(
                format!("knn_k must be a positive odd integer, got {}", self.knn_k),
            )),
            ClassifierKind::LinearSvm if !(self.svm_lambda > 0.0 && self.svm_lambda.is_finite()) => {
                Err(EvalError::InvalidConfig(format!("svm_lambda must be positive, got {}", self.svm_lambda)))
            }
            ClassifierKind::LinearSvm if self.svm_epochs == 0 => {
                Err(EvalError::InvalidConfig("svm_epochs must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub folds: usize,
    pub repetitions: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { folds: 5, repetitions: 30, seed: DEFAULT_SEED }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.folds < 2 {
            return Err(EvalError::InvalidConfig(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.repetitions == 0 {
            return Err(EvalError::InvalidConfig("repetitions must be positive".into()));
        }
        Ok(())
    }
}

/// Fold index of every sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    folds: usize,
    assignment: Vec<usize>,
}

impl FoldAssignment {
    pub fn new(folds: usize, assignment: Vec<usize>) -> Result<Self, EvalError> {
        if folds < 2 {
            return Err(EvalError::InvalidConfig(format!("folds must be at least 2, got {folds}")));
        }
        if let Some(&bad) = assignment.iter().find(|&&f| f >= folds) {
            return Err(EvalError::InvalidConfig(format!("fold index {bad} out of range")));
        }
        Ok(FoldAssignment { folds, assignment })
    }

    pub fn folds(&self) -> usize {
        self.folds
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.assignment
    }

    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] != fold).collect()
    }
}

/// Stratified assignment: each class is shuffled with a seeded RNG and dealt
/// round-robin over the folds. The dealing position carries over from one
/// class to the next so overall fold sizes also stay within one of each
/// other.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Result<FoldAssignment, EvalError> {
    stratified_folds_named(labels, folds, seed, None)
}

fn stratified_folds_named(
    labels: &[usize],
    folds: usize,
    seed: u64,
    names: Option<&[String]>,
) -> Result<FoldAssignment, EvalError> {
    if folds < 2 {
        return Err(EvalError::InvalidConfig(format!("folds must be at least 2, got {folds}")));
    }
    let n_classes = labels.iter().max().map_or(0, |&c| c + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l].push(i);
    }
    for (c, m) in members.iter().enumerate() {
        if !m.is_empty() && m.len() < folds {
            let class = names.and_then(|n| n.get(c)).cloned().unwrap_or_else(|| c.to_string());
            return Err(EvalError::ClassTooSmall { class, count: m.len(), folds });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for m in members.iter_mut() {
        m.shuffle(&mut rng);
        for &i in m.iter() {
            assignment[i] = next;
            next = (next + 1) % folds;
        }
    }
    FoldAssignment::new(folds, assignment)
}

/// Stratified folds for a dataset, with class names in errors.
pub fn dataset_folds(dataset: &Dataset, folds: usize, seed: u64) -> Result<FoldAssignment, EvalError> {
    stratified_folds_named(dataset.labels(), folds, seed, Some(dataset.label_names()))
}

/// Majority label among the `k` smallest `distances` (parallel to `labels`).
/// Distance ties go to the lower row index, vote ties to the smaller label.
fn knn_vote(
    distances: &[f64],
    labels: &[usize],
    k: usize,
    n_classes: usize,
    scratch: &mut Vec<(f64, usize)>,
) -> usize {
    scratch.clear();
    scratch.extend(distances.iter().copied().zip(0..));
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < scratch.len() {
        scratch.select_nth_unstable_by(k - 1, cmp);
    }
    let mut votes = vec![0usize; n_classes];
    for &(_, row) in &scratch[..k] {
        votes[labels[row]] += 1;
    }
    let mut best = 0;
    for (c, &v) in votes.iter().enumerate() {
        if v > votes[best] {
            best = c;
        }
    }
    best
}

#[inline]
fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut d = 0.0;
    for (x, y) in a.iter().zip(b) {
        d += (x - y) * (x - y);
    }
    d
}

/// k-NN prediction for one query row against row-major training data.
pub fn classify_knn<R: AsRef<[f64]>>(
    train: &[R],
    train_labels: &[usize],
    query: &[f64],
    k: usize,
) -> Result<usize, EvalError> {
    if k == 0 || k > train.len() {
        return Err(EvalError::KTooLarge { k, train: train.len() });
    }
    let distances: Vec<f64> = train.iter().map(|r| squared_euclidean(query, r.as_ref())).collect();
    let n_classes = train_labels.iter().max().map_or(1, |&c| c + 1);
    Ok(knn_vote(&distances, train_labels, k, n_classes, &mut Vec::new()))
}

/// Linear SVM trained by the Pegasos stochastic subgradient method.
///
/// Two classes use a single model with class 1 as the positive side; more
/// classes use one model per class (one-vs-rest) and predict the arg-max
/// decision value. The bias is learned as the weight of a constant input 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    /// One weight vector per binary model; the last entry is the bias.
    models: Vec<Vec<f64>>,
}

impl LinearSvm {
    pub fn train<R: AsRef<[f64]>>(
        rows: &[R],
        labels: &[usize],
        n_classes: usize,
        config: &ClassifierConfig,
        seed: u64,
    ) -> Result<Self, EvalError> {
        config.validate()?;
        if n_classes < 2 {
            return Err(EvalError::InvalidConfig("linear SVM needs at least 2 classes".into()));
        }
        let positives: Vec<usize> = if n_classes == 2 { vec![1] } else { (0..n_classes).collect() };
        let models = positives
            .iter()
            .map(|&pos| {
                let y: Vec<f64> = labels.iter().map(|&l| if l == pos { 1.0 } else { -1.0 }).collect();
                pegasos(rows, &y, config.svm_lambda, config.svm_epochs, split_seed(seed, pos as u64))
            })
            .collect();
        Ok(LinearSvm { models })
    }

    pub fn models(&self) -> &[Vec<f64>] {
        &self.models
    }

    pub fn decision(&self, model: usize, x: &[f64]) -> f64 {
        let w = &self.models[model];
        let d = x.len();
        w[..d].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[d]
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        if self.models.len() == 1 {
            return usize::from(self.decision(0, x) > 0.0);
        }
        let mut best = 0;
        let mut best_value = f64::NEG_INFINITY;
        for c in 0..self.models.len() {
            let v = self.decision(c, x);
            if v > best_value {
                best = c;
                best_value = v;
            }
        }
        best
    }
}

fn pegasos<R: AsRef<[f64]>>(rows: &[R], y: &[f64], lambda: f64, epochs: usize, seed: u64) -> Vec<f64> {
    let d = rows.first().map_or(0, |r| r.as_ref().len());
    let mut w = vec![0.0; d + 1];
    let radius = 1.0 / lambda.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..rows.len()).collect();
    let mut t = 0u64;
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let x = rows[i].as_ref();
            let margin = y[i] * (w[..d].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[d]);
            let shrink = 1.0 - eta * lambda;
            for v in w.iter_mut() {
                *v *= shrink;
            }
            if margin < 1.0 {
                for (v, xi) in w[..d].iter_mut().zip(x) {
                    *v += eta * y[i] * xi;
                }
                w[d] += eta * y[i];
            }
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > radius {
                let s = radius / norm;
                for v in w.iter_mut() {
                    *v *= s;
                }
            }
        }
    }
    w
}

/// Trains a linear SVM on `dataset` rows (already scaled by the caller).
pub fn train_linear_svm(
    dataset: &Dataset,
    rows: &[usize],
    config: &ClassifierConfig,
    seed: u64,
) -> Result<LinearSvm, EvalError> {
    let x: Vec<&[f64]> = rows.iter().map(|&r| dataset.sample(r)).collect();
    let y: Vec<usize> = rows.iter().map(|&r| dataset.labels()[r]).collect();
    LinearSvm::train(&x, &y, dataset.n_classes(), config, seed)
}

fn check_subset(dataset: &Dataset, subset: &[usize]) -> Result<(), EvalError> {
    if subset.is_empty() {
        return Err(EvalError::EmptySubset);
    }
    let n = dataset.n_features();
    let mut seen = vec![false; n];
    for &j in subset {
        if j >= n {
            return Err(EvalError::FeatureOutOfRange { index: j, n_features: n });
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(EvalError::DuplicateFeature(j));
        }
    }
    Ok(())
}

fn check_folds(dataset: &Dataset, folds: &FoldAssignment) -> Result<(), EvalError> {
    if folds.as_slice().len() != dataset.n_samples() {
        return Err(EvalError::FoldMismatch { got: folds.as_slice().len(), expected: dataset.n_samples() });
    }
    Ok(())
}

/// Number of test rows of one fold predicted correctly.
fn fold_correct(
    dataset: &Dataset,
    subset: &[usize],
    classifier: &ClassifierConfig,
    train: &[usize],
    test: &[usize],
    seed: u64,
) -> Result<usize, EvalError> {
    let scaler = Scaler::fit_columns(dataset, train, subset).map_err(|_| EvalError::EmptyFold(0))?;
    let project = |r: usize| -> Vec<f64> {
        subset.iter().enumerate().map(|(c, &j)| scaler.scale(c, dataset.value(r, j))).collect()
    };
    let train_x: Vec<Vec<f64>> = train.iter().map(|&r| project(r)).collect();
    let train_y: Vec<usize> = train.iter().map(|&r| dataset.labels()[r]).collect();
    let labels = dataset.labels();
    match classifier.kind {
        ClassifierKind::Knn => {
            let k = classifier.knn_k;
            if k > train_x.len() {
                return Err(EvalError::KTooLarge { k, train: train_x.len() });
            }
            let mut scratch = Vec::with_capacity(train_x.len());
            let mut distances = vec![0.0; train_x.len()];
            Ok(test
                .iter()
                .filter(|&&r| {
                    let q = project(r);
                    for (d, t) in distances.iter_mut().zip(&train_x) {
                        *d = squared_euclidean(&q, t);
                    }
                    knn_vote(&distances, &train_y, k, dataset.n_classes(), &mut scratch) == labels[r]
                })
                .count())
        }
        ClassifierKind::LinearSvm => {
            let svm = LinearSvm::train(&train_x, &train_y, dataset.n_classes(), classifier, seed)?;
            Ok(test.iter().filter(|&&r| svm.predict(&project(r)) == labels[r]).count())
        }
    }
}

/// Cross-validated accuracy (percent) of `subset` under a fixed fold
/// assignment. `seed` only drives classifier internals (SVM shuffling).
pub fn cv_accuracy(
    dataset: &Dataset,
    subset: &[usize],
    classifier: &ClassifierConfig,
    folds: &FoldAssignment,
    seed: u64,
) -> Result<f64, EvalError> {
    classifier.validate()?;
    check_subset(dataset, subset)?;
    check_folds(dataset, folds)?;
    let mut correct = 0;
    for f in 0..folds.folds() {
        let test = folds.test_rows(f);
        if test.is_empty() {
            return Err(EvalError::EmptyFold(f));
        }
        let train = folds.train_rows(f);
        correct += fold_correct(dataset, subset, classifier, &train, &test, split_seed(seed, f as u64))?;
    }
    Ok(100.0 * correct as f64 / dataset.n_samples() as f64)
}

/// Accuracy summary over repeated, independently seeded CV runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalReport {
    pub mean: f64,
    pub std: f64,
    pub worst: f64,
    pub best: f64,
    pub per_run: Vec<f64>,
    /// Wall-clock seconds; excluded from serialized reports and equality.
    #[serde(skip)]
    pub runtime_secs: f64,
}

impl PartialEq for EvalReport {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean
            && self.std == other.std
            && self.worst == other.worst
            && self.best == other.best
            && self.per_run == other.per_run
    }
}

impl EvalReport {
    pub fn from_runs(per_run: Vec<f64>, runtime_secs: f64) -> Result<Self, EvalError> {
        let s = summary_stats(&per_run)?;
        Ok(EvalReport { mean: s.mean, std: s.std, worst: s.worst, best: s.best, per_run, runtime_secs })
    }
}

/// Runs `eval_config.repetitions` cross-validations with fresh stratified
/// folds; repetition `r` uses `split_seed(eval_config.seed, r)`.
pub fn repeated_eval(
    dataset: &Dataset,
    subset: &[usize],
    classifier: &ClassifierConfig,
    eval_config: &EvalConfig,
) -> Result<EvalReport, EvalError> {
    eval_config.validate()?;
    classifier.validate()?;
    check_subset(dataset, subset)?;
    let start = Instant::now();
    let per_run = (0..eval_config.repetitions)
        .into_par_iter()
        .map(|r| {
            let seed = split_seed(eval_config.seed, r as u64);
            let folds = dataset_folds(dataset, eval_config.folds, seed)?;
            cv_accuracy(dataset, subset, classifier, &folds, seed)
        })
        .collect::<Result<Vec<f64>, EvalError>>()?;
    EvalReport::from_runs(per_run, start.elapsed().as_secs_f64())
}

/// Fitness oracle for greedy forward selection over a fixed fold split.
///
/// For k-NN, squared distances of the accepted subset are cached per fold,
/// so evaluating one more feature costs one pass over the fold's test/train
/// pairs. The additions happen in the same order as in [`cv_accuracy`], which
/// makes the cached result bit-identical to a full re-evaluation. Other
/// classifiers fall back to [`cv_accuracy`].
pub struct IncrementalFitness<'a> {
    dataset: &'a Dataset,
    classifier: ClassifierConfig,
    folds: FoldAssignment,
    seed: u64,
    accepted: Vec<usize>,
    knn: Option<Vec<FoldCache>>,
}

struct FoldCache {
    train: Vec<usize>,
    test: Vec<usize>,
    train_labels: Vec<usize>,
    /// `test.len() x train.len()` squared distances over the accepted subset.
    distances: Vec<f64>,
}

impl<'a> IncrementalFitness<'a> {
    pub fn new(
        dataset: &'a Dataset,
        classifier: ClassifierConfig,
        folds: FoldAssignment,
        seed: u64,
    ) -> Result<Self, EvalError> {
        classifier.validate()?;
        check_folds(dataset, &folds)?;
        let knn = match classifier.kind {
            ClassifierKind::Knn => {
                let mut caches = Vec::with_capacity(folds.folds());
                for f in 0..folds.folds() {
                    let (train, test) = (folds.train_rows(f), folds.test_rows(f));
                    if test.is_empty() {
                        return Err(EvalError::EmptyFold(f));
                    }
                    if classifier.knn_k > train.len() {
                        return Err(EvalError::KTooLarge { k: classifier.knn_k, train: train.len() });
                    }
                    let train_labels = train.iter().map(|&r| dataset.labels()[r]).collect();
                    let distances = vec![0.0; test.len() * train.len()];
                    caches.push(FoldCache { train, test, train_labels, distances });
                }
                Some(caches)
            }
            ClassifierKind::LinearSvm => None,
        };
        Ok(IncrementalFitness { dataset, classifier, folds, seed, accepted: Vec::new(), knn })
    }

    pub fn folds(&self) -> &FoldAssignment {
        &self.folds
    }

    pub fn accepted(&self) -> &[usize] {
        &self.accepted
    }

    /// Accuracy (percent) of the accepted subset plus `candidate`.
    pub fn evaluate(&mut self, candidate: usize) -> Result<f64, EvalError> {
        let n = self.dataset.n_features();
        if candidate >= n {
            return Err(EvalError::FeatureOutOfRange { index: candidate, n_features: n });
        }
        if self.accepted.contains(&candidate) {
            return Err(EvalError::DuplicateFeature(candidate));
        }
        let Some(caches) = self.knn.as_ref() else {
            let mut subset = self.accepted.clone();
            subset.push(candidate);
            return cv_accuracy(self.dataset, &subset, &self.classifier, &self.folds, self.seed);
        };
        let ds = self.dataset;
        let k = self.classifier.knn_k;
        let mut correct = 0;
        let mut scratch = Vec::new();
        let mut candidate_dist = Vec::new();
        for cache in caches {
            let range = column_range(ds, &cache.train, candidate);
            let train_scaled: Vec<f64> =
                cache.train.iter().map(|&r| scale_value(range, ds.value(r, candidate))).collect();
            for (t, &row) in cache.test.iter().enumerate() {
                let q = scale_value(range, ds.value(row, candidate));
                let base = &cache.distances[t * cache.train.len()..(t + 1) * cache.train.len()];
                candidate_dist.clear();
                candidate_dist.extend(base.iter().zip(&train_scaled).map(|(d, x)| d + (q - x) * (q - x)));
                if knn_vote(&candidate_dist, &cache.train_labels, k, ds.n_classes(), &mut scratch)
                    == ds.labels()[row]
                {
                    correct += 1;
                }
            }
        }
        Ok(100.0 * correct as f64 / ds.n_samples() as f64)
    }

    /// Adds `feature` to the accepted subset.
    pub fn accept(&mut self, feature: usize) {
        let ds = self.dataset;
        if let Some(caches) = self.knn.as_mut() {
            for cache in caches.iter_mut() {
                let range = column_range(ds, &cache.train, feature);
                let train_scaled: Vec<f64> =
                    cache.train.iter().map(|&r| scale_value(range, ds.value(r, feature))).collect();
                let width = cache.train.len();
                for (t, &row) in cache.test.iter().enumerate() {
                    let q = scale_value(range, ds.value(row, feature));
                    for (d, x) in cache.distances[t * width..(t + 1) * width].iter_mut().zip(&train_scaled) {
                        *d += (q - x) * (q - x);
                    }
                }
            }
        }
        self.accepted.push(feature);
    }
}

fn column_range(dataset: &Dataset, rows: &[usize], feature: usize) -> (f64, f64) {
    rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
        let v = dataset.value(r, feature);
        (lo.min(v), hi.max(v))
    })
}
