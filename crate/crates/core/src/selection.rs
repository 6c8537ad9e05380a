//! Filter (top-k) and greedy forward wrapper selection over a feature
//! ranking.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crowding::FeatureRanking;
use crate::data::Dataset;
use crate::eval::{dataset_folds, split_seed, ClassifierConfig, EvalConfig, EvalError, IncrementalFitness};
use crate::rankers::Method;
use crate::stats::{summary_stats, Summary};

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("k = {k} is outside 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("accuracy threshold {0} is outside (0, 100]")]
    BadThreshold(f64),
    #[error("ranking covers {ranking} features, dataset has {dataset}")]
    RankingMismatch { ranking: usize, dataset: usize },
    #[error("no feature reached a positive accuracy")]
    NothingSelected,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    Filter,
    Wrapper,
}

/// One iteration of the wrapper loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub feature: usize,
    pub fitness: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Wrapper: acceptance order. Filter: ranking order.
    pub selected: Vec<usize>,
    /// Fitness of `selected` on the wrapper's folds; absent for the filter.
    pub best_accuracy: Option<f64>,
    pub trace: Vec<TraceStep>,
    pub mode: SelectionMode,
    pub ranking_method: Option<Method>,
}

impl SelectionResult {
    pub fn with_ranking_method(mut self, method: Method) -> Self {
        self.ranking_method = Some(method);
        self
    }
}

/// First `k` features of the ranking.
pub fn filter_select<S>(ranking: &FeatureRanking<S>, k: usize) -> Result<SelectionResult, SelectionError> {
    filter_order(&ranking.order, k)
}

pub(crate) fn filter_order(order: &[usize], k: usize) -> Result<SelectionResult, SelectionError> {
    if k == 0 || k > order.len() {
        return Err(SelectionError::KOutOfRange { k, n: order.len() });
    }
    Ok(SelectionResult {
        selected: order[..k].to_vec(),
        best_accuracy: None,
        trace: Vec::new(),
        mode: SelectionMode::Filter,
        ranking_method: None,
    })
}

/// Greedy forward selection in ranking order.
///
/// One stratified fold split is drawn from `seed` and reused for every
/// fitness evaluation. Starting from a best accuracy of 0, each feature is
/// added tentatively and kept only if the cross-validated accuracy strictly
/// improves. With `accuracy_threshold`, the loop stops as soon as the best
/// accuracy reaches it.
pub fn wrapper_select<S>(
    dataset: &Dataset,
    ranking: &FeatureRanking<S>,
    classifier: &ClassifierConfig,
    folds: usize,
    seed: u64,
    accuracy_threshold: Option<f64>,
) -> Result<SelectionResult, SelectionError> {
    wrapper_order(dataset, &ranking.order, classifier, folds, seed, accuracy_threshold)
}

pub(crate) fn wrapper_order(
    dataset: &Dataset,
    order: &[usize],
    classifier: &ClassifierConfig,
    folds: usize,
    seed: u64,
    accuracy_threshold: Option<f64>,
) -> Result<SelectionResult, SelectionError> {
    if let Some(t) = accuracy_threshold {
        if !(t > 0.0 && t <= 100.0) {
            return Err(SelectionError::BadThreshold(t));
        }
    }
    if order.len() != dataset.n_features() {
        return Err(SelectionError::RankingMismatch { ranking: order.len(), dataset: dataset.n_features() });
    }
    let assignment = dataset_folds(dataset, folds, seed)?;
    let mut fitness = IncrementalFitness::new(dataset, *classifier, assignment, split_seed(seed, u64::MAX))?;

    let mut best = 0.0;
    let mut trace = Vec::with_capacity(order.len());
    for &feature in order {
        let value = fitness.evaluate(feature)?;
        let accepted = value > best;
        if accepted {
            best = value;
            fitness.accept(feature);
        }
        trace.push(TraceStep { feature, fitness: value, accepted });
        if accepted && accuracy_threshold.is_some_and(|t| best >= t) {
            break;
        }
    }
    let selected = fitness.accepted().to_vec();
    if selected.is_empty() {
        return Err(SelectionError::NothingSelected);
    }
    Ok(SelectionResult {
        selected,
        best_accuracy: Some(best),
        trace,
        mode: SelectionMode::Wrapper,
        ranking_method: None,
    })
}

/// Outcome of one wrapper repetition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WrapperRun {
    pub seed: u64,
    pub best_accuracy: f64,
    pub selected: Vec<usize>,
    pub evaluations: usize,
}

/// Repeated wrapper runs summarised like an accuracy table row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WrapperReport {
    pub n_features: usize,
    /// Size of the subset found by the best-accuracy repetition (first one
    /// on ties).
    pub features_for_best: usize,
    pub mean: f64,
    pub std: f64,
    pub worst: f64,
    pub best: f64,
    pub per_run: Vec<f64>,
    pub runs: Vec<WrapperRun>,
    #[serde(skip)]
    pub runtime_secs: f64,
}

impl PartialEq for WrapperReport {
    fn eq(&self, other: &Self) -> bool {
        self.n_features == other.n_features
            && self.features_for_best == other.features_for_best
            && self.mean == other.mean
            && self.std == other.std
            && self.worst == other.worst
            && self.best == other.best
            && self.per_run == other.per_run
            && self.runs == other.runs
    }
}

impl WrapperReport {
    pub fn summary(&self) -> Summary {
        Summary { mean: self.mean, std: self.std, worst: self.worst, best: self.best }
    }
}

/// Runs the whole wrapper `eval_config.repetitions` times; repetition `r`
/// draws its folds from `split_seed(eval_config.seed, r)`.
pub fn repeated_wrapper<S: Sync>(
    dataset: &Dataset,
    ranking: &FeatureRanking<S>,
    classifier: &ClassifierConfig,
    eval_config: &EvalConfig,
    accuracy_threshold: Option<f64>,
) -> Result<WrapperReport, SelectionError> {
    repeated_wrapper_order(dataset, &ranking.order, classifier, eval_config, accuracy_threshold)
}

pub(crate) fn repeated_wrapper_order(
    dataset: &Dataset,
    order: &[usize],
    classifier: &ClassifierConfig,
    eval_config: &EvalConfig,
    accuracy_threshold: Option<f64>,
) -> Result<WrapperReport, SelectionError> {
    eval_config.validate()?;
    let start = Instant::now();
    let runs = (0..eval_config.repetitions)
        .into_par_iter()
        .map(|r| {
            let seed = split_seed(eval_config.seed, r as u64);
            let res = wrapper_order(dataset, order, classifier, eval_config.folds, seed, accuracy_threshold)?;
            Ok(WrapperRun {
                seed,
                best_accuracy: res.best_accuracy.unwrap_or(0.0),
                evaluations: res.trace.len(),
                selected: res.selected,
            })
        })
        .collect::<Result<Vec<_>, SelectionError>>()?;
    let per_run: Vec<f64> = runs.iter().map(|r| r.best_accuracy).collect();
    let s = summary_stats(&per_run).map_err(EvalError::from)?;
    let best_run = runs
        .iter()
        .enumerate()
        .fold(0, |b, (i, r)| if r.best_accuracy > runs[b].best_accuracy { i } else { b });
    Ok(WrapperReport {
        n_features: dataset.n_features(),
        features_for_best: runs[best_run].selected.len(),
        mean: s.mean,
        std: s.std,
        worst: s.worst,
        best: s.best,
        per_run,
        runs,
        runtime_secs: start.elapsed().as_secs_f64(),
    })
}
